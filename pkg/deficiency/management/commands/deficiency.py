"""
Deficiency of one experiment with respect to another.
"""

from deficiency.comparison import deficiency, deficiency_bruteforce, evaluate_kernel, lecam_distance
from deficiency.forms import DeficiencyForm

from ._base import LecamCommand, Outcome


class Command(LecamCommand):
    help = "Exact Le Cam deficiency between two experiment files (JSON report on stdout)"
    form_class = DeficiencyForm
    input_options = ("source", "target", "kernel")

    def add_arguments(self, parser):
        parser.add_argument("--source", required=True, help="Experiment JSON file")
        parser.add_argument("--target", required=True, help="Experiment JSON file")
        parser.add_argument(
            "--both",
            action="store_true",
            help="Solve both directions and report the Le Cam distance",
        )
        parser.add_argument(
            "--oracle",
            type=float,
            metavar="RES",
            help="Cross-check against the brute-force grid oracle at this resolution",
        )
        parser.add_argument(
            "--kernel",
            help="Kernel or map JSON file to score against the optimal kernel",
        )
        super().add_arguments(parser)

    def compute(self, cleaned_data):
        e, f = cleaned_data["source"], cleaned_data["target"]
        if cleaned_data["both"]:
            distance = lecam_distance(e, f)
            payload = distance.as_dict()
            value = distance.forward.value
            summary = f"Delta({e.name}, {f.name}) = {distance.value:.6g}"
        else:
            report = deficiency(e, f)
            payload = report.as_dict()
            value = report.value
            summary = f"delta({e.name} -> {f.name}) = {report.value:.6g} [{report.solver_status}]"

        if cleaned_data["oracle"] is not None:
            oracle = deficiency_bruteforce(e, f, cleaned_data["oracle"])
            payload["oracle"] = {
                "resolution": cleaned_data["oracle"],
                "value": oracle,
                "difference": abs(oracle - value),
            }
        if cleaned_data["kernel"] is not None:
            payload["kernel"] = evaluate_kernel(e, f, cleaned_data["kernel"]).as_dict()
        return Outcome(payload, summary=summary)
