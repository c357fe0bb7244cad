"""
Regression anchors: fixed instances with known answers plus seeded
falsification runs. ``verify_paper`` backs the command of the same name.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable

from django.conf import settings

from deficiency.comparison import deficiency
from deficiency.core import DeterministicMap, Experiment, apply_kernel, total_variation
from deficiency.gaussian import (
    Grid,
    counterexample1_report,
    counterexample3_simulation,
    counterexample3_testing_gap,
    gaussian_location_tv,
    invariance_collapse_sweep,
)
from deficiency.hierarchy import check_sufficiency, classify_hierarchy, distortion_profile
from deficiency.montecarlo import run_trials
from deficiency.reductions import karp_reduction
from deficiency.shannon import repetition_sweep

logger = logging.getLogger(__name__)

PASS = "PASS"
FAIL = "FAIL"


@dataclass(frozen=True)
class Anchor:
    name: str
    passed: bool
    computed: object
    expected: str
    provenance: str

    @property
    def status(self) -> str:
        return PASS if self.passed else FAIL

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "computed": self.computed,
            "expected": self.expected,
            "provenance": self.provenance,
        }


def close(name: str, computed: float, expected: float, tolerance: float, provenance: str) -> Anchor:
    return Anchor(
        name,
        abs(computed - expected) <= tolerance,
        computed,
        f"{expected!r} ± {tolerance:g}",
        provenance,
    )


# The 3-outcome pair whose first two outcomes get merged.
MERGED_P = Experiment("P", ("0", "1"), ("a", "b", "c"), [[0.5, 0.4, 0.1], [0.1, 0.4, 0.5]])
MERGED_MAP = DeterministicMap({"a": "0", "b": "0", "c": "1"}, ("0", "1"))


def merged_outcomes_anchors() -> list[Anchor]:
    q = apply_kernel(MERGED_P, MERGED_MAP, name="Q")
    witness = next(
        c.value for c in distortion_profile(MERGED_P, MERGED_MAP) if c.outcome == "a"
    )
    distortion = max(c.value for c in distortion_profile(MERGED_P, MERGED_MAP))
    sufficiency = check_sufficiency(MERGED_P, MERGED_MAP)
    levels = classify_hierarchy(MERGED_P, MERGED_MAP, 0.01).levels
    return [
        close("merged: TV(P0, P1)", total_variation(*MERGED_P.rows), 0.4, 1e-12, "hand computation"),
        close("merged: TV(Q0, Q1)", total_variation(*q.rows), 0.4, 1e-12, "hand computation"),
        close("merged: deficiency P -> Q", deficiency(MERGED_P, q).value, 0.0, 1e-9, "the map is a kernel"),
        close(
            "merged: distortion at outcome a",
            witness,
            abs(math.log(5.0) - math.log(1.8)),
            1e-4,
            "|log 5 - log 1.8|",
        ),
        Anchor("merged: distortion sup", distortion >= 1.0, distortion, ">= 1.0", "pointwise ratios"),
        Anchor(
            "merged: sufficiency deviation",
            sufficiency.max_conditional_deviation > 0.3,
            sufficiency.max_conditional_deviation,
            "> 0.3",
            "conditional of a given {a, b}",
        ),
        Anchor(
            "merged: testing passes while distortion fails at eps 0.01",
            levels["testing_equivalence"] and not levels["likelihood_distortion"],
            levels,
            "testing true, distortion false",
            "strict hierarchy",
        ),
    ]


def floor_binning_anchors() -> list[Anchor]:
    report = counterexample1_report()
    return [
        Anchor("floor binning: not sufficient", not report.sufficient, report.sufficiency_deviation, "> 1e-9", "bins of N(theta, 1)"),
        Anchor(
            "floor binning: finite distortion",
            report.distortion_finite,
            report.likelihood_distortion,
            "finite",
            "bounded likelihood ratios for |theta - theta'| <= 1",
        ),
    ]


def gaussian_noise_anchors() -> list[Anchor]:
    simulation = counterexample3_simulation(Grid(-6.0, 6.1, 0.01))
    pair = simulation.pairs[0]
    gap = counterexample3_testing_gap()
    expected_bound = 0.5 * (gaussian_location_tv(0.1, 0.1) - gaussian_location_tv(0.1, 1.0))
    return [
        Anchor(
            "gaussian noise: simulation error at step 0.01",
            simulation.simulation_error <= 0.02,
            simulation.simulation_error,
            "<= 0.02",
            "exact in the continuum",
        ),
        close("gaussian noise: TV narrow pair", pair.narrow, 0.3829, 0.002, "2 Phi(0.5) - 1"),
        close("gaussian noise: TV wide pair", pair.wide, 0.0399, 0.001, "2 Phi(0.05) - 1"),
        close(
            "gaussian gap: contraction lower bound",
            gap.lower_bound,
            0.5 * (0.3829 - 0.0399),
            0.003,
            f"closed form {expected_bound:.6f}",
        ),
        Anchor(
            "gaussian gap: pairwise deficiency Q -> P above bound",
            gap.holds,
            gap.pairwise_deficiency,
            f">= {gap.lower_bound:.6f}",
            "data processing",
        ),
    ]


def collapse_anchors() -> list[Anchor]:
    rows = invariance_collapse_sweep(2.0, [0.0, 0.5, 1.0], Grid(-6.0, 6.0, 0.5))
    collapsed, identity = rows[0], rows[-1]
    return [
        Anchor(
            "collapse: every row solved to optimality",
            all(row.optimal for row in rows),
            [row.solver_status for row in rows],
            "optimal",
            "simplex status",
        ),
        Anchor(
            "collapse: c = 1 keeps both families",
            max(identity.source_fidelity, identity.target_fidelity) <= 1e-8,
            [identity.source_fidelity, identity.target_fidelity],
            "<= 1e-8",
            "identity representation",
        ),
        Anchor(
            "collapse: c = 0 is invariant",
            collapsed.invariance_error <= 1e-12,
            collapsed.invariance_error,
            "0",
            "constant representation",
        ),
        Anchor("collapse: task gap positive", collapsed.task_gap > 0, collapsed.task_gap, "> 0", "sigma = 2"),
        Anchor(
            "collapse: transfer inequality on every row",
            all(row.nft_holds for row in rows),
            [row.c for row in rows if not row.nft_holds],
            "no failing c",
            "triangle inequality",
        ),
    ]


def coding_anchors() -> list[Anchor]:
    rows = repetition_sweep(0.1, [1, 3, 5])
    expected = {1: 0.1, 3: 0.028, 5: 0.00856}
    return [
        close(f"coding: repetition n={row['n']} at p=0.1", row["Pe"], expected[row["n"]], 1e-12, "binomial tail")
        for row in rows
    ]


def reduction_anchors() -> list[Anchor]:
    instances = [str(k) for k in range(8)]
    report = karp_reduction(
        instances,
        lambda x: "yes" if int(x) % 2 == 0 else "no",
        lambda x: str(int(x) + 2),
        lambda y: "even" if int(y) % 2 == 0 else "odd",
        {"even": "yes", "odd": "no"},
    )
    return [
        close("reduction: parity shift deficiency", report.deficiency, 0.0, 1e-9, "deterministic witness"),
        close("reduction: parity shift witness error", report.witness_error, 0.0, 0.0, "deterministic witness"),
    ]


def monte_carlo_anchors(seed: int, trials: dict[str, int]) -> list[Anchor]:
    descriptions = {
        "oracle": ("LP matches grid oracle and risk transfer holds", "lp <= oracle <= lp + 0.005 (0.03 for three target outcomes)"),
        "composition": ("composition bound", "delta_total <= sum eps + 1e-7"),
        "nft": ("transfer inequality", "slack >= -1e-7"),
    }
    anchors = []
    for name, count in trials.items():
        summary = run_trials(name, seed, count)
        title, expected = descriptions[name]
        anchors.append(
            Anchor(
                f"random: {title} ({count} trials)",
                summary.passed,
                {"failures": summary.failures, "worst_margin": summary.worst_margin},
                expected,
                f"seed {seed}",
            )
        )
    return anchors


FIXED_ANCHORS: tuple[Callable[[], list[Anchor]], ...] = (
    merged_outcomes_anchors,
    floor_binning_anchors,
    gaussian_noise_anchors,
    collapse_anchors,
    coding_anchors,
    reduction_anchors,
)


@dataclass(frozen=True)
class SuiteReport:
    seed: int
    version: str
    anchors: tuple[Anchor, ...]

    @property
    def passed(self) -> bool:
        return all(anchor.passed for anchor in self.anchors)

    @property
    def failures(self) -> list[Anchor]:
        return [anchor for anchor in self.anchors if not anchor.passed]

    def as_dict(self) -> dict:
        return {
            "seed": self.seed,
            "version": self.version,
            "status": PASS if self.passed else FAIL,
            "anchors": [anchor.as_dict() for anchor in self.anchors],
        }


def verify_paper(seed: int | None = None, trials: dict[str, int] | None = None) -> SuiteReport:
    seed = settings.LECAM_DEFAULT_SEED if seed is None else int(seed)
    counts = dict(settings.LECAM_SUITE_TRIALS)
    counts.update(trials or {})

    anchors = []
    for group in FIXED_ANCHORS:
        anchors.extend(group())
    anchors.extend(monte_carlo_anchors(seed, counts))

    report = SuiteReport(seed, settings.LECAM_VERSION, tuple(anchors))
    for anchor in report.failures:
        logger.error(f"{anchor.name}: computed {anchor.computed!r}, expected {anchor.expected}")
    return report
