"""
Persistence of run manifests for commands invoked with ``--record``.
"""

import hashlib
import logging

from django.conf import settings
from django.core.management import call_command
from django.db import DatabaseError, connection
from django.db.utils import OperationalError

from deficiency.models import RunManifest

logger = logging.getLogger(__name__)


def ensure_manifest_table() -> None:
    """Run migrations when the manifest table has not been created yet."""
    if RunManifest._meta.db_table in connection.introspection.table_names():
        return
    logger.warning("Run manifest table not found. Running migrations...")
    call_command("migrate", "deficiency", verbosity=0)
    logger.info("Migrations completed successfully")


def stdout_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def previous_run(manifest: RunManifest) -> RunManifest | None:
    """Latest earlier manifest of the same command, inputs, options and seed."""
    earlier = RunManifest.objects.filter(
        subcommand=manifest.subcommand, seed=manifest.seed, pk__lt=manifest.pk
    ).order_by("-pk")
    return next(
        (m for m in earlier if m.inputs == manifest.inputs and m.options == manifest.options),
        None,
    )


def record_run(
    subcommand: str,
    inputs: list[str],
    options: dict,
    stdout: str,
    exit_code: int,
    seed: int | None = None,
    outputs: list[str] | None = None,
) -> RunManifest | None:
    """Store one manifest row. Database trouble is logged, never raised."""
    try:
        ensure_manifest_table()
        manifest = RunManifest.objects.create(
            subcommand=subcommand,
            inputs=list(inputs),
            options=options,
            seed=seed,
            version=settings.LECAM_VERSION,
            outputs=list(outputs or []),
            exit_code=exit_code,
            stdout_sha256=stdout_digest(stdout),
        )
        previous = previous_run(manifest)
    except (OperationalError, DatabaseError) as e:
        logger.error(f"Could not record the {subcommand} run: {e}")
        return None
    logger.info(f"Recorded run #{manifest.pk} ({subcommand})")
    if previous is None:
        return manifest
    if manifest.reproduces(previous):
        logger.info(f"Run #{manifest.pk} reproduces run #{previous.pk}")
    else:
        logger.warning(f"Run #{manifest.pk} differs from run #{previous.pk} with the same inputs and seed")
    return manifest
