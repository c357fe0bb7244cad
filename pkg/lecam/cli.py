"""
Single entry point: ``python -m lecam <subcommand> [options]``.

Each subcommand is a management command of the ``deficiency`` app. JSON (or
CSV) goes to stdout, the summary line and diagnostics go to stderr.
"""

import os
import sys

import django
from django.core.management import load_command_class
from django.core.management.base import CommandError

PROG = "lecam"
EX_USAGE = 64

# CLI name -> management command name
SUBCOMMANDS = {
    "deficiency": "deficiency",
    "hierarchy": "hierarchy",
    "certify": "certify",
    "gaussian": "gaussian",
    "compose": "compose",
    "nft": "nft",
    "shannon": "shannon",
    "verify-paper": "verify_paper",
}


def usage() -> str:
    return (
        f"usage: {PROG} {{{','.join(SUBCOMMANDS)}}} [options]\n"
        f"Run '{PROG} <subcommand> --help' for the options of one subcommand.\n"
    )


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] not in SUBCOMMANDS:
        if argv and argv[0] in ("-h", "--help"):
            sys.stdout.write(usage())
            return 0
        if argv:
            sys.stderr.write(f"{PROG}: unknown subcommand {argv[0]!r}\n")
        sys.stderr.write(usage())
        return EX_USAGE

    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "lecam.settings")
    django.setup()

    name, rest = argv[0], argv[1:]
    command = load_command_class("deficiency", SUBCOMMANDS[name])
    parser = command.create_parser(PROG, name)
    try:
        options = parser.parse_args(rest)
    except CommandError as e:
        # argparse errors surface as CommandError when not called from manage.py
        sys.stderr.write(parser.format_usage())
        sys.stderr.write(f"{PROG} {name}: {e}\n")
        return EX_USAGE
    except SystemExit as e:
        # --help
        return e.code if isinstance(e.code, int) else 0

    cmd_options = vars(options)
    args = cmd_options.pop("args", ())
    try:
        command.execute(*args, **cmd_options)
    except CommandError as e:
        sys.stderr.write(f"{PROG} {name}: {e}\n")
        return e.returncode
    return 0


def main() -> None:
    sys.exit(run())
