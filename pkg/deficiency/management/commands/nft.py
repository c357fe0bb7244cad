"""
No-free-transfer terms for a representation shared by two experiments.
"""

from deficiency.composition import nft_terms
from deficiency.forms import NftForm

from ._base import LecamCommand, Outcome


class Command(LecamCommand):
    help = "Source fidelity + target fidelity + invariance error against the task gap"
    form_class = NftForm
    input_options = ("source", "target", "map", "target_map")

    def add_arguments(self, parser):
        parser.add_argument("--source", required=True, help="Source experiment JSON file")
        parser.add_argument("--target", required=True, help="Target experiment JSON file")
        parser.add_argument(
            "--map", required=True, help="Representation (map or kernel JSON) applied to the source"
        )
        parser.add_argument(
            "--target-map",
            help="Representation for the target when its outcomes differ (default: --map)",
        )
        super().add_arguments(parser)

    def compute(self, cleaned_data):
        t = cleaned_data["map"]
        if cleaned_data["target_map"] is not None:
            t = (t, cleaned_data["target_map"])
        report = nft_terms(cleaned_data["source"], cleaned_data["target"], t)
        return Outcome(
            report.as_dict(),
            ok=report.holds,
            summary=f"Transfer inequality {'holds' if report.holds else 'FAILS'} with slack {report.slack:.6g}",
        )
