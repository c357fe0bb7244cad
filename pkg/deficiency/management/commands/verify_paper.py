"""
Run every regression anchor and the seeded falsification suites.
"""

from django.conf import settings

from deficiency.forms import VerifyPaperForm
from deficiency.suite import verify_paper

from ._base import LecamCommand, Outcome


class Command(LecamCommand):
    help = "Run all regression anchors; exit 3 if any of them fails"
    form_class = VerifyPaperForm

    def add_arguments(self, parser):
        parser.add_argument(
            "--seed",
            type=int,
            help=f"Seed for the randomized anchors (default: {settings.LECAM_DEFAULT_SEED})",
        )
        super().add_arguments(parser)

    def compute(self, cleaned_data):
        report = verify_paper(cleaned_data["seed"])
        failed = len(report.failures)
        return Outcome(
            report.as_dict(),
            ok=report.passed,
            summary=(
                f"{len(report.anchors) - failed}/{len(report.anchors)} anchors PASS "
                f"(seed {report.seed})"
            ),
            seed=report.seed,
        )
