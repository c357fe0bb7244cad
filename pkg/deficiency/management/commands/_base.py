"""
Shared plumbing for the toolkit's management commands.

A command validates its options through a form, computes a payload, writes
it to stdout as canonical JSON (or CSV) and a one-line summary to stderr.
Exit codes: 2 for invalid input, 3 when a checked property fails.
"""

import logging

from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from deficiency import codec
from deficiency.exceptions import DimensionError, GuardError, PropertyFailure
from deficiency.runs import record_run

logger = logging.getLogger(__name__)

INVALID_INPUT = 2
PROPERTY_FAILED = 3


class Outcome:
    """What a command produced: the payload, whether its checks held, a summary line."""

    def __init__(self, payload, ok: bool = True, summary: str = "", seed: int | None = None):
        self.payload = payload
        self.ok = ok
        self.summary = summary
        self.seed = seed


class LecamCommand(BaseCommand):
    requires_system_checks = []
    form_class = None
    # options holding input file paths, recorded in the run manifest
    input_options: tuple[str, ...] = ()

    def add_arguments(self, parser):
        parser.add_argument(
            "--record",
            action="store_true",
            help="Store a run manifest (inputs, seed, version, stdout digest) in the local database",
        )

    def compute(self, cleaned_data: dict) -> Outcome:
        raise NotImplementedError

    def render(self, payload) -> str:
        return codec.dumps(payload)

    def bind(self, options: dict):
        form = self.form_class(
            {name: options.get(name) for name in self.form_class.base_fields}
        )
        if not form.is_valid():
            errors = "; ".join(
                f"{field}: {' '.join(messages)}" if field != "__all__" else " ".join(messages)
                for field, messages in form.errors.items()
            )
            raise CommandError(f"Invalid options: {errors}", returncode=INVALID_INPUT)
        return form

    def handle(self, *args, **options):
        form = self.bind(options)
        try:
            outcome = self.compute(form.cleaned_data)
        except (ValidationError, DimensionError, GuardError) as e:
            message = "; ".join(e.messages) if isinstance(e, ValidationError) else str(e)
            raise CommandError(message, returncode=INVALID_INPUT)
        except PropertyFailure as e:
            logger.error(f"{self.subcommand}: {e}")
            outcome = Outcome(e.report, ok=False, summary=str(e))

        text = self.render(outcome.payload)
        self.stdout.write(text, ending="")
        exit_code = 0 if outcome.ok else PROPERTY_FAILED

        if outcome.ok:
            self.stderr.write(self.style.SUCCESS(f"✅ {outcome.summary}"))
        else:
            self.stderr.write(self.style.ERROR(f"❌ {outcome.summary}"))

        if form.cleaned_data.get("record"):
            record_run(
                self.subcommand,
                [options[name] for name in self.input_options if options.get(name)],
                {
                    name: options.get(name)
                    for name in self.form_class.base_fields
                    if name not in self.input_options and name != "record"
                },
                text,
                exit_code,
                seed=outcome.seed,
                outputs=self.outputs(options),
            )

        if not outcome.ok:
            raise CommandError(outcome.summary or "Property check failed", returncode=PROPERTY_FAILED)

    @property
    def subcommand(self) -> str:
        return self.__module__.rsplit(".", 1)[-1]

    def outputs(self, options: dict) -> list[str]:
        return []
