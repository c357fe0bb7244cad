"""
Error accumulation along a chain of approximate oracles.
"""

from deficiency.composition import verify_composition_bound
from deficiency.forms import ComposeForm

from ._base import LecamCommand, Outcome


class Command(LecamCommand):
    help = "Check delta(ideal chain, approximate chain) <= sum of per-step errors"
    form_class = ComposeForm
    input_options = ("chain",)

    def add_arguments(self, parser):
        parser.add_argument(
            "--chain",
            required=True,
            help='Chain JSON file: {"base": Experiment, "ideal": [Kernel], "approx": [Kernel]}',
        )
        super().add_arguments(parser)

    def compute(self, cleaned_data):
        report = verify_composition_bound(cleaned_data["chain"])
        relation = "<=" if report.holds else ">"
        return Outcome(
            report.as_dict(),
            ok=report.holds,
            summary=(
                f"delta_total {report.delta_total:.6g} {relation} "
                f"sum of step errors {report.eps_sum:.6g}"
            ),
        )
