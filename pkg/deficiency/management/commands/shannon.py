"""
Repetition codes over the binary symmetric channel.
"""

from deficiency.codec import csv_table
from deficiency.forms import ShannonForm
from deficiency.shannon import SWEEP_COLUMNS, repetition_sweep

from ._base import LecamCommand, Outcome


class Command(LecamCommand):
    help = "Worst-message error of repetition codes as coding deficiency (CSV on stdout)"
    form_class = ShannonForm

    def add_arguments(self, parser):
        parser.add_argument("--p", type=float, required=True, help="Crossover probability in [0, 0.5]")
        parser.add_argument(
            "--repetition",
            default="1,3,5,7",
            help="Comma-separated odd blocklengths (default: 1,3,5,7)",
        )
        super().add_arguments(parser)

    def render(self, payload) -> str:
        return csv_table(SWEEP_COLUMNS, payload)

    def compute(self, cleaned_data):
        rows = repetition_sweep(cleaned_data["p"], cleaned_data["repetition"])
        return Outcome(
            rows,
            summary=", ".join(f"Pe({row['n']})={row['Pe']:.6g}" for row in rows),
        )
