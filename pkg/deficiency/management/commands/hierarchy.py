"""
Where a deterministic representation map sits in the equivalence hierarchy.
"""

from deficiency.forms import HierarchyForm
from deficiency.hierarchy import DEFAULT_EPS, classify_hierarchy

from ._base import LecamCommand, Outcome


class Command(LecamCommand):
    help = "Sufficiency, likelihood distortion, testing and Le Cam equivalence of E vs E∘T"
    form_class = HierarchyForm
    input_options = ("experiment", "map")

    def add_arguments(self, parser):
        parser.add_argument("--experiment", required=True, help="Experiment JSON file")
        parser.add_argument("--map", required=True, help="Deterministic map JSON file")
        parser.add_argument(
            "--eps", type=float, default=DEFAULT_EPS, help=f"Tolerance for the graded levels (default: {DEFAULT_EPS:g})"
        )
        super().add_arguments(parser)

    def compute(self, cleaned_data):
        report = classify_hierarchy(
            cleaned_data["experiment"], cleaned_data["map"], cleaned_data["eps"]
        )
        held = [level for level, holds in report.levels.items() if holds]
        return Outcome(
            report.as_dict(),
            summary=f"Levels holding at eps={report.eps:g}: {', '.join(held) or 'none'}",
        )
