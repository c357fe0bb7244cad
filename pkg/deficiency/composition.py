"""
Error accumulation along kernel chains and the no-free-transfer inequality.
"""

import logging
from dataclasses import dataclass, field

from deficiency.comparison import deficiency
from deficiency.core import (
    Experiment,
    Kernel,
    KernelLike,
    apply_kernel,
    as_kernel,
    check_same_parameters,
    tv_distance,
)
from deficiency.exceptions import DimensionError

logger = logging.getLogger(__name__)

BOUND_TOLERANCE = 1e-7


@dataclass(frozen=True, eq=False)
class ChainSpec:
    """A base experiment pushed through k oracle kernels, ideal or approximate."""

    base: Experiment
    ideal_oracles: tuple[Kernel, ...]
    approx_oracles: tuple[Kernel, ...]
    per_step_eps: tuple[float, ...] = ()

    def __post_init__(self):
        ideal, approx = tuple(self.ideal_oracles), tuple(self.approx_oracles)
        if len(ideal) != len(approx):
            raise DimensionError(
                f"Chain has {len(ideal)} ideal but {len(approx)} approximate oracles"
            )
        outcomes = self.base.outcomes
        for step, (good, rough) in enumerate(zip(ideal, approx), start=1):
            if good.from_outcomes != outcomes:
                raise DimensionError(f"Oracle {step} does not accept the previous step's outcomes")
            if rough.from_outcomes != good.from_outcomes or rough.to_outcomes != good.to_outcomes:
                raise DimensionError(f"Approximate oracle {step} has a different shape")
            outcomes = good.to_outcomes
        eps = tuple(float(value) for value in self.per_step_eps)
        if eps and len(eps) != len(ideal):
            raise DimensionError(f"Expected {len(ideal)} per-step eps values, got {len(eps)}")
        object.__setattr__(self, "ideal_oracles", ideal)
        object.__setattr__(self, "approx_oracles", approx)
        object.__setattr__(self, "per_step_eps", eps)

    def __eq__(self, other):
        if not isinstance(other, ChainSpec):
            return NotImplemented
        return (
            self.base == other.base
            and self.ideal_oracles == other.ideal_oracles
            and self.approx_oracles == other.approx_oracles
            and self.per_step_eps == other.per_step_eps
        )

    __hash__ = None

    @property
    def length(self) -> int:
        return len(self.ideal_oracles)

    def as_dict(self) -> dict:
        payload = {
            "base": self.base.as_dict(),
            "ideal": [kernel.as_dict() for kernel in self.ideal_oracles],
            "approx": [kernel.as_dict() for kernel in self.approx_oracles],
        }
        if self.per_step_eps:
            payload["per_step_eps"] = list(self.per_step_eps)
        return payload


def compose_chain(spec: ChainSpec, use_approx: bool) -> Experiment:
    oracles = spec.approx_oracles if use_approx else spec.ideal_oracles
    result = spec.base
    for kernel in oracles:
        result = apply_kernel(result, kernel, name=result.name)
    return result.renamed(f"{spec.base.name}:{'approx' if use_approx else 'ideal'}")


@dataclass(frozen=True)
class StepMeasurement:
    deviation: float
    lp_deficiency: float

    def as_dict(self) -> dict:
        return {"deviation": self.deviation, "lp_deficiency": self.lp_deficiency}


def measure_step_deviations(spec: ChainSpec) -> list[StepMeasurement]:
    """Per-step error of the approximate oracle, measured on the ideal prefix.

    ``deviation`` is max_theta TV(prefix_theta ideal_i, prefix_theta approx_i),
    the quantity that telescopes along the chain. ``lp_deficiency`` is the
    deficiency between the same two one-step experiments; it never exceeds
    the deviation but cannot serve as a budget on its own, since an oracle
    that relabels its outputs has zero deficiency yet changes what later
    steps see.
    """
    measurements = []
    prefix = spec.base
    for ideal, approx in zip(spec.ideal_oracles, spec.approx_oracles):
        with_ideal = apply_kernel(prefix, ideal, name="ideal step")
        with_approx = apply_kernel(prefix, approx, name="approximate step")
        measurements.append(
            StepMeasurement(
                deviation=float(tv_distance(with_ideal.matrix, with_approx.matrix).max()),
                lp_deficiency=deficiency(with_ideal, with_approx).value,
            )
        )
        prefix = with_ideal
    return measurements


@dataclass(frozen=True)
class CompositionReport:
    delta_total: float
    steps: tuple[StepMeasurement, ...]
    declared_eps: tuple[float, ...] = ()
    eps_sum: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "eps_sum", float(sum(step.deviation for step in self.steps)))

    @property
    def holds(self) -> bool:
        return self.delta_total <= self.eps_sum + BOUND_TOLERANCE

    @property
    def uniform_bound(self) -> float:
        """k times the largest step error."""
        return len(self.steps) * max((step.deviation for step in self.steps), default=0.0)

    @property
    def tightness(self) -> float | None:
        return self.delta_total / self.eps_sum if self.eps_sum > 0 else None

    @property
    def declared_eps_cover(self) -> bool | None:
        if not self.declared_eps:
            return None
        return all(
            declared >= step.deviation - BOUND_TOLERANCE
            for declared, step in zip(self.declared_eps, self.steps)
        )

    def as_dict(self) -> dict:
        return {
            "delta_total": self.delta_total,
            "eps_sum": self.eps_sum,
            "holds": self.holds,
            "steps": [step.as_dict() for step in self.steps],
            "uniform_bound": self.uniform_bound,
            "tightness": self.tightness,
            "declared_eps": list(self.declared_eps) or None,
            "declared_eps_cover": self.declared_eps_cover,
        }


def verify_composition_bound(spec: ChainSpec) -> CompositionReport:
    """Deficiency of the ideal chain w.r.t. the approximate chain against the summed step errors."""
    steps = measure_step_deviations(spec)
    delta_total = deficiency(compose_chain(spec, False), compose_chain(spec, True)).value
    report = CompositionReport(delta_total, tuple(steps), spec.per_step_eps)
    if not report.holds:
        logger.error(
            f"Composition bound violated: delta_total {delta_total:.6g} > sum {report.eps_sum:.6g}"
        )
    return report


@dataclass(frozen=True)
class NftReport:
    source_fidelity: float
    target_fidelity: float
    invariance_error: float
    task_gap: float

    @property
    def slack(self) -> float:
        return self.source_fidelity + self.target_fidelity + self.invariance_error - self.task_gap

    @property
    def holds(self) -> bool:
        return self.slack >= -BOUND_TOLERANCE

    def as_dict(self) -> dict:
        return {
            "source_fidelity": self.source_fidelity,
            "target_fidelity": self.target_fidelity,
            "invariance_error": self.invariance_error,
            "task_gap": self.task_gap,
            "slack": self.slack,
            "holds": self.holds,
        }


Representation = KernelLike | tuple[KernelLike, KernelLike]


def nft_terms(e_s: Experiment, e_t: Experiment, t: Representation) -> NftReport:
    """Fidelity, invariance and task-gap terms for a shared representation.

    ``t`` is one kernel or map on a common outcome space, or a pair of maps
    (source, target) into one representation space.
    """
    check_same_parameters(e_s, e_t)
    t_s, t_t = t if isinstance(t, tuple) else (t, t)
    source_rep = apply_kernel(e_s, as_kernel(t_s, e_s.outcomes), name=f"{e_s.name}∘T")
    target_rep = apply_kernel(e_t, as_kernel(t_t, e_t.outcomes), name=f"{e_t.name}∘T")
    if source_rep.outcomes != target_rep.outcomes:
        raise DimensionError("Source and target representations land in different spaces")

    report = NftReport(
        source_fidelity=deficiency(source_rep, e_s).value,
        target_fidelity=deficiency(target_rep, e_t).value,
        invariance_error=float(tv_distance(source_rep.matrix, target_rep.matrix).max()),
        task_gap=deficiency(e_t, e_s).value,
    )
    if not report.holds:
        logger.error(f"No-free-transfer inequality violated with slack {report.slack:.3e}")
    return report
