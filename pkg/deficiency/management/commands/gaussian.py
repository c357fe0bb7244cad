"""
Discretized Gaussian experiments: invariance collapse, floor binning and the
narrow/wide noise simulation.
"""

from pathlib import Path

from deficiency.codec import csv_table
from deficiency.forms import CollapseForm, FloorBinningForm, NoiseSimulationForm
from deficiency.gaussian import (
    COLLAPSE_COLUMNS,
    counterexample1_report,
    counterexample3_simulation,
    counterexample3_testing_gap,
    invariance_collapse_sweep,
)

from ._base import LecamCommand, Outcome


class Command(LecamCommand):
    help = "Binned Gaussian experiments (sub-experiments: collapse, ce1, ce3)"
    experiment_forms = {
        "collapse": CollapseForm,
        "ce1": FloorBinningForm,
        "ce3": NoiseSimulationForm,
    }

    def add_arguments(self, parser):
        subparsers = parser.add_subparsers(dest="experiment", required=True)

        collapse = subparsers.add_parser(
            "collapse",
            help="Sweep scaling maps x -> c x between N(theta, 1) and N(theta, sigma^2)",
            description=(
                "CSV columns: " + ", ".join(COLLAPSE_COLUMNS) + ". "
                "Pass negative ranges with '=', e.g. --c-grid=-1:1:0.05."
            ),
        )
        collapse.add_argument("--sigma", type=float, required=True, help="Target standard deviation (> 1)")
        collapse.add_argument("--c-grid", help="lo:hi:step of scaling factors (default -1:1:0.05)")
        collapse.add_argument("--grid", help="lo:hi:step of the outcome bins (default -6:6:0.5)")
        collapse.add_argument("--thetas", help="Comma-separated means (default -1,0,1)")
        collapse.add_argument("--out", help="Also write the table as CSV to this path")

        ce1 = subparsers.add_parser("ce1", help="Floor binning of N(theta, 1)")
        ce1.add_argument("--grid", help="lo:hi:step with integer lo and step dividing 1 (default -4:5:0.25)")
        ce1.add_argument("--thetas", help="Comma-separated means (default 0,0.5)")

        ce3 = subparsers.add_parser("ce3", help="Simulate N(theta, 1) from N(theta, 0.01) by adding noise")
        ce3.add_argument("--step", type=float, help="Bin width (default 0.01)")
        ce3.add_argument("--thetas", help="Comma-separated means (default 0,0.1)")

        for subparser in (collapse, ce1, ce3):
            super().add_arguments(subparser)

    def handle(self, *args, **options):
        self.form_class = self.experiment_forms[options["experiment"]]
        self.out = options.get("out")
        return super().handle(*args, **options)

    @property
    def subcommand(self) -> str:
        return "gaussian"

    def outputs(self, options):
        return [options["out"]] if options.get("out") else []

    def compute(self, cleaned_data):
        if self.form_class is CollapseForm:
            return self.collapse(cleaned_data)
        if self.form_class is FloorBinningForm:
            report = counterexample1_report(cleaned_data["grid"], cleaned_data["thetas"])
            return Outcome(
                report.as_dict(),
                summary=(
                    f"Floor binning: sufficient={report.sufficient}, "
                    f"distortion={report.likelihood_distortion:.6g}"
                ),
            )
        return self.noise_simulation(cleaned_data)

    def collapse(self, cleaned_data):
        rows = invariance_collapse_sweep(
            cleaned_data["sigma"], cleaned_data["c_grid"], cleaned_data["grid"], cleaned_data["thetas"]
        )
        table = [row.as_dict() for row in rows]
        if self.out:
            Path(self.out).write_text(csv_table(COLLAPSE_COLUMNS, table), encoding="utf-8")
        failing = [row.c for row in rows if not row.nft_holds]
        unsolved = [row.c for row in rows if not row.optimal]
        if unsolved:
            summary = f"{len(rows)} scalings, solver not optimal at c in {unsolved}"
        elif failing:
            summary = f"{len(rows)} scalings, transfer inequality failed at c in {failing}"
        else:
            summary = f"{len(rows)} scalings, transfer inequality holds on every row"
        return Outcome(
            {"columns": list(COLLAPSE_COLUMNS), "rows": table},
            ok=not failing and not unsolved,
            summary=summary,
        )

    def noise_simulation(self, cleaned_data):
        thetas = cleaned_data["thetas"]
        simulation = counterexample3_simulation(cleaned_data["grid"], thetas)
        gap = counterexample3_testing_gap((thetas[0], thetas[1]))
        ok = simulation.within_bound and gap.holds
        return Outcome(
            {"simulation": simulation.as_dict(), "pairwise_gap": gap.as_dict()},
            ok=ok,
            summary=(
                f"Noise simulation error {simulation.simulation_error:.3e} "
                f"(bound {simulation.discretization_bound:.3e}); "
                f"pairwise deficiency {gap.pairwise_deficiency:.4f} >= {gap.lower_bound:.4f}"
            ),
        )
