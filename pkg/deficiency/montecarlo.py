"""
Seeded random instances and the falsification trials run over them.

Each trial gets its own generator spawned from one SeedSequence, so a run is
reproducible for a given seed whatever the worker count.
"""

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from deficiency.comparison import WITNESS_TOLERANCE, deficiency, deficiency_bruteforce
from deficiency.composition import ChainSpec, nft_terms, verify_composition_bound
from deficiency.core import DeterministicMap, Experiment, Kernel
from deficiency.exceptions import PropertyFailure
from deficiency.parallel import parallel_map
from deficiency.risk import binary_loss_problems, enumerate_deterministic_rules, verify_hinge

logger = logging.getLogger(__name__)

ORACLE_TOLERANCE = 0.005
ORACLE_RESOLUTION = 0.001
# three target outcomes enumerate whole kernel rows, so the grid is coarser
WIDE_ORACLE_RESOLUTION = 0.01
HINGE_ACTIONS = ("a0", "a1")


def labels(prefix: str, count: int) -> tuple[str, ...]:
    return tuple(f"{prefix}{k}" for k in range(count))


def random_experiment(
    rng: np.random.Generator,
    n_parameters: int,
    n_outcomes: int,
    name: str = "random",
    outcomes: tuple[str, ...] | None = None,
) -> Experiment:
    return Experiment(
        name,
        labels("t", n_parameters),
        outcomes or labels("x", n_outcomes),
        rng.dirichlet(np.ones(n_outcomes), size=n_parameters),
    )


def random_kernel(
    rng: np.random.Generator, from_outcomes: tuple[str, ...], to_outcomes: tuple[str, ...]
) -> Kernel:
    return Kernel(
        from_outcomes,
        to_outcomes,
        rng.dirichlet(np.ones(len(to_outcomes)), size=len(from_outcomes)),
    )


def random_map(
    rng: np.random.Generator, from_outcomes: tuple[str, ...], to_outcomes: tuple[str, ...]
) -> DeterministicMap:
    images = rng.integers(0, len(to_outcomes), size=len(from_outcomes))
    return DeterministicMap(
        {x: to_outcomes[j] for x, j in zip(from_outcomes, images)}, to_outcomes
    )


@dataclass(frozen=True)
class TrialOutcome:
    passed: bool
    margin: float
    detail: dict


@dataclass(frozen=True)
class TrialSummary:
    name: str
    seed: int
    trials: int
    failures: int
    worst_margin: float
    worst_trial: int
    worst_detail: dict

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "seed": self.seed,
            "trials": self.trials,
            "failures": self.failures,
            "worst_margin": self.worst_margin,
            "worst_trial": self.worst_trial,
            "worst_detail": self.worst_detail,
        }


def oracle_trial(rng: np.random.Generator) -> TrialOutcome:
    """LP against the grid oracle, then the risk-transfer bound on the same pair."""
    n_target = int(rng.integers(2, 4))
    if n_target == 2:
        e = random_experiment(rng, 2, int(rng.integers(2, 4)), "source")
        resolution, tolerance = ORACLE_RESOLUTION, ORACLE_TOLERANCE
    else:
        e = random_experiment(rng, 2, 2, "source")
        resolution = WIDE_ORACLE_RESOLUTION
        tolerance = n_target * WIDE_ORACLE_RESOLUTION
    f = random_experiment(rng, 2, n_target, "target", labels("y", n_target))
    report = deficiency(e, f)
    oracle = deficiency_bruteforce(e, f, resolution)
    # the grid only contains kernels, so it never beats the LP
    below = report.value - oracle
    above = oracle - report.value
    detail = {
        "lp": report.value,
        "oracle": oracle,
        "resolution": resolution,
        "target_outcomes": n_target,
    }
    try:
        hinge = verify_hinge(
            e,
            f,
            list(binary_loss_problems(2, HINGE_ACTIONS)),
            list(enumerate_deterministic_rules(f.outcomes, HINGE_ACTIONS)),
            report,
        )
        detail["hinge_gap"] = hinge.max_gap
    except PropertyFailure as exc:
        detail["hinge_gap"] = exc.report.max_gap
        return TrialOutcome(False, -1.0, detail)
    margin = min(tolerance - above, WITNESS_TOLERANCE - below)
    return TrialOutcome(margin >= 0.0, margin, detail)


def composition_trial(rng: np.random.Generator) -> TrialOutcome:
    base = random_experiment(rng, int(rng.integers(2, 4)), int(rng.integers(2, 4)), "base")
    ideal, approx = [], []
    outcomes = base.outcomes
    for step in range(int(rng.integers(1, 4))):
        next_outcomes = labels(f"s{step}_", int(rng.integers(2, 4)))
        good = random_kernel(rng, outcomes, next_outcomes)
        noise = random_kernel(rng, outcomes, next_outcomes)
        weight = rng.uniform(0.0, 0.3)
        ideal.append(good)
        approx.append(
            Kernel(outcomes, next_outcomes, (1.0 - weight) * good.matrix + weight * noise.matrix)
        )
        outcomes = next_outcomes
    report = verify_composition_bound(ChainSpec(base, tuple(ideal), tuple(approx)))
    return TrialOutcome(
        report.holds,
        report.eps_sum - report.delta_total,
        {"delta_total": report.delta_total, "eps_sum": report.eps_sum, "k": len(ideal)},
    )


def nft_trial(rng: np.random.Generator) -> TrialOutcome:
    n_parameters, n_outcomes = int(rng.integers(2, 4)), int(rng.integers(2, 4))
    e_s = random_experiment(rng, n_parameters, n_outcomes, "source")
    e_t = random_experiment(rng, n_parameters, n_outcomes, "target")
    representation = labels("z", int(rng.integers(1, 4)))
    if rng.random() < 0.5:
        t = random_map(rng, e_s.outcomes, representation)
    else:
        t = random_kernel(rng, e_s.outcomes, representation)
    report = nft_terms(e_s, e_t, t)
    return TrialOutcome(report.holds, report.slack, report.as_dict())


TRIALS: dict[str, Callable[[np.random.Generator], TrialOutcome]] = {
    "oracle": oracle_trial,
    "composition": composition_trial,
    "nft": nft_trial,
}


def run_trials(name: str, seed: int, trials: int) -> TrialSummary:
    trial = TRIALS[name]
    children = np.random.SeedSequence(seed).spawn(trials)
    outcomes = parallel_map(lambda child: trial(np.random.default_rng(child)), children)

    failures = sum(not outcome.passed for outcome in outcomes)
    worst = min(range(trials), key=lambda k: outcomes[k].margin) if outcomes else -1
    summary = TrialSummary(
        name,
        seed,
        trials,
        failures,
        outcomes[worst].margin if outcomes else 0.0,
        worst,
        outcomes[worst].detail if outcomes else {},
    )
    log = logger.error if failures else logger.info
    log(f"{name}: {trials - failures}/{trials} trials passed (seed {seed})")
    return summary
