"""
Representation equivalence levels for a deterministic map T applied to an
experiment E, from strongest to weakest:

  sufficiency            P_theta(x | T = z) does not depend on theta
  likelihood distortion  log-likelihood ratios move by at most eps under T
  testing equivalence    every two-point sub-experiment of E simulates E∘T's
  Le Cam equivalence     Delta(E, E∘T) <= eps

``classify_hierarchy`` evaluates all four and checks that they nest.
"""

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError

from deficiency.comparison import LeCamDistance, deficiency, lecam_distance
from deficiency.core import DeterministicMap, Experiment, apply_kernel, check_same_parameters
from deficiency.exceptions import NestingViolation
from deficiency.parallel import parallel_map

logger = logging.getLogger(__name__)

SUFFICIENCY_TOLERANCE = 1e-9
NESTING_TOLERANCE = 1e-7
# graded levels are judged at this eps unless one is given
DEFAULT_EPS = 1e-6


@dataclass(frozen=True)
class SufficiencyResult:
    holds: bool
    max_conditional_deviation: float
    skipped_images: tuple[str, ...] = ()
    worst: dict | None = None

    def as_dict(self) -> dict:
        return {
            "holds": self.holds,
            "max_conditional_deviation": self.max_conditional_deviation,
            "skipped_images": list(self.skipped_images),
            "worst": self.worst,
        }


def check_sufficiency(e: Experiment, t: DeterministicMap) -> SufficiencyResult:
    t.check_total(e.outcomes)
    deviation, worst, skipped = 0.0, None, []
    for image in t.to_outcomes:
        members = [i for i, x in enumerate(e.outcomes) if t(x) == image]
        if not members:
            continue
        masses = e.matrix[:, members].sum(axis=1)
        if np.any(masses <= 0):
            skipped.append(image)
            continue
        conditional = e.matrix[:, members] / masses[:, None]
        spread = conditional.max(axis=0) - conditional.min(axis=0)
        j = int(np.argmax(spread))
        if worst is None or spread[j] > deviation:
            deviation = float(spread[j])
            worst = {
                "image": image,
                "outcome": e.outcomes[members[j]],
                "parameters": [
                    e.parameters[int(np.argmax(conditional[:, j]))],
                    e.parameters[int(np.argmin(conditional[:, j]))],
                ],
            }
    return SufficiencyResult(
        deviation <= SUFFICIENCY_TOLERANCE, deviation, tuple(skipped), worst
    )


@dataclass(frozen=True)
class DistortionContribution:
    outcome: str
    image: str
    parameters: tuple[str, str]
    value: float

    def as_dict(self) -> dict:
        return {
            "outcome": self.outcome,
            "image": self.image,
            "parameters": list(self.parameters),
            "value": self.value,
        }


def distortion_profile(e: Experiment, t: DeterministicMap) -> list[DistortionContribution]:
    """Per-outcome, per-pair change of the log-likelihood ratio under ``t``.

    Ratios are compared pointwise at each x against the ratio of the image
    masses; a density vanishing on one side only gives +infinity.
    """
    f = apply_kernel(e, t)
    column = {label: j for j, label in enumerate(f.outcomes)}
    contributions = []
    for x, outcome in enumerate(e.outcomes):
        z = column[t(outcome)]
        for i, j in itertools.combinations(range(len(e.parameters)), 2):
            p, p_prime = e.matrix[i, x], e.matrix[j, x]
            if p == 0 and p_prime == 0:
                continue
            if p == 0 or p_prime == 0:
                value = math.inf
            else:
                value = abs(
                    math.log(f.matrix[i, z] / f.matrix[j, z]) - math.log(p / p_prime)
                )
            contributions.append(
                DistortionContribution(
                    outcome, f.outcomes[z], (e.parameters[i], e.parameters[j]), value
                )
            )
    return contributions


def likelihood_distortion(e: Experiment, t: DeterministicMap) -> float:
    return max((c.value for c in distortion_profile(e, t)), default=0.0)


@dataclass(frozen=True)
class PairwiseTestingResult:
    max_pairwise_deficiency: float
    argmax_pair: tuple[str, str] | None
    pairs: tuple[tuple[str, str, float], ...] = ()

    def as_dict(self) -> dict:
        return {
            "max_pairwise_deficiency": self.max_pairwise_deficiency,
            "argmax_pair": list(self.argmax_pair) if self.argmax_pair else None,
            "pairs": [[a, b, value] for a, b, value in self.pairs],
        }


def testing_equivalence(e: Experiment, f: Experiment) -> PairwiseTestingResult:
    """Largest deficiency of ``e`` w.r.t. ``f`` over all two-parameter restrictions."""
    check_same_parameters(e, f)
    if len(e.parameters) < 2:
        raise ValidationError("Testing equivalence needs at least two parameters")
    pairs = list(itertools.combinations(e.parameters, 2))
    values = parallel_map(
        lambda pair: deficiency(e.restrict(pair), f.restrict(pair)).value, pairs
    )
    best = int(np.argmax(values))
    logger.debug(f"Pairwise deficiencies {e.name!r} -> {f.name!r}: max {values[best]:.6g}")
    return PairwiseTestingResult(
        float(values[best]),
        pairs[best],
        tuple((a, b, float(value)) for (a, b), value in zip(pairs, values)),
    )


@dataclass(frozen=True)
class HierarchyReport:
    eps: float
    sufficiency: SufficiencyResult
    likelihood_distortion: float
    distortion_witness: DistortionContribution | None
    testing_equivalence: PairwiseTestingResult
    lecam_equivalence: LeCamDistance
    nesting_failures: tuple[str, ...] = ()

    @property
    def levels(self) -> dict:
        # LP values carry solver noise up to NESTING_TOLERANCE
        bound = self.eps + NESTING_TOLERANCE
        return {
            "sufficiency": self.sufficiency.holds,
            "likelihood_distortion": self.likelihood_distortion <= bound,
            "testing_equivalence": self.testing_equivalence.max_pairwise_deficiency <= bound,
            "lecam_equivalence": self.lecam_equivalence.value <= bound,
        }

    def as_dict(self) -> dict:
        lecam = self.lecam_equivalence
        return {
            "eps": self.eps,
            "levels": self.levels,
            "sufficiency": self.sufficiency.as_dict(),
            "likelihood_distortion": {
                "value": self.likelihood_distortion,
                "worst": self.distortion_witness.as_dict() if self.distortion_witness else None,
            },
            "testing_equivalence": self.testing_equivalence.as_dict(),
            "lecam_equivalence": {
                "delta_forward": lecam.forward.value,
                "delta_backward": lecam.backward.value,
                "Delta": lecam.value,
            },
            "nesting_failures": list(self.nesting_failures),
        }


def classify_hierarchy(e: Experiment, t: DeterministicMap, eps: float) -> HierarchyReport:
    if eps < 0:
        raise ValidationError("eps must be non-negative")
    t.check_total(e.outcomes)
    f = apply_kernel(e, t)

    sufficiency = check_sufficiency(e, t)
    profile = distortion_profile(e, t)
    witness = max(profile, key=lambda c: c.value, default=None)
    distortion = witness.value if witness else 0.0
    if len(e.parameters) >= 2:
        testing = testing_equivalence(e, f)
    else:
        testing = PairwiseTestingResult(0.0, None)
    lecam = lecam_distance(e, f)

    failures = []
    if sufficiency.holds and distortion > SUFFICIENCY_TOLERANCE:
        failures.append(f"sufficient map has likelihood distortion {distortion!r}")
    if sufficiency.holds and lecam.value > NESTING_TOLERANCE:
        failures.append(f"sufficient map has Le Cam distance {lecam.value!r}")
    if (
        distortion <= eps
        and testing.max_pairwise_deficiency > math.expm1(eps) + NESTING_TOLERANCE
    ):
        failures.append(
            f"distortion {distortion!r} <= eps but pairwise deficiency "
            f"{testing.max_pairwise_deficiency!r} exceeds e^eps - 1"
        )

    report = HierarchyReport(
        eps, sufficiency, distortion, witness, testing, lecam, tuple(failures)
    )
    if failures:
        logger.error(f"Hierarchy does not nest on {e.name!r}: {'; '.join(failures)}")
        raise NestingViolation("; ".join(failures), report)
    logger.info(f"Hierarchy levels for {e.name!r} at eps={eps:g}: {report.levels}")
    return report
