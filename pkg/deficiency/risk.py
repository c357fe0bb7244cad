"""
Decision problems, risks, rule transfer through a kernel, and the empirical
deficiency-gap certificate.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
from django.conf import settings
from django.core.exceptions import ValidationError

from deficiency.comparison import DeficiencyReport, deficiency
from deficiency.core import (
    DeterministicMap,
    Experiment,
    Kernel,
    KernelLike,
    compose_kernels,
    validate_labels,
)
from deficiency.exceptions import DimensionError, GuardError, PropertyFailure

logger = logging.getLogger(__name__)

BOUND_TOLERANCE = 1e-12
HINGE_TOLERANCE = 1e-7

DETERMINISTIC = "deterministic"
RANDOMIZED = "randomized"


@dataclass(frozen=True, eq=False)
class DecisionProblem:
    """Finite action set with a loss matrix ``loss[theta, action]``."""

    actions: tuple[str, ...]
    loss: np.ndarray
    bounds: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        actions = validate_labels(self.actions, "action")
        if not actions:
            raise ValidationError("A decision problem needs at least one action")
        loss = np.array(self.loss, dtype=float)
        if loss.ndim != 2 or loss.shape[1] != len(actions) or loss.shape[0] < 1:
            raise DimensionError(
                f"Loss matrix has shape {loss.shape}, expected (parameters, {len(actions)})"
            )
        low, high = (float(value) for value in self.bounds)
        if not (np.isfinite(low) and np.isfinite(high)) or low > high:
            raise ValidationError(f"Loss bounds must be finite with a <= b, got {self.bounds}")
        if not np.all(np.isfinite(loss)):
            raise ValidationError("Loss entries must be finite")
        if loss.min() < low - BOUND_TOLERANCE or loss.max() > high + BOUND_TOLERANCE:
            raise ValidationError(f"Loss entries fall outside the declared bounds [{low}, {high}]")
        loss.setflags(write=False)
        object.__setattr__(self, "actions", actions)
        object.__setattr__(self, "loss", loss)
        object.__setattr__(self, "bounds", (low, high))

    def __eq__(self, other):
        if not isinstance(other, DecisionProblem):
            return NotImplemented
        return (
            self.actions == other.actions
            and self.bounds == other.bounds
            and np.array_equal(self.loss, other.loss)
        )

    def __hash__(self):
        return hash((self.actions, self.bounds, self.loss.tobytes()))

    @property
    def oscillation(self) -> float:
        return self.bounds[1] - self.bounds[0]

    def affine(self, scale: float, shift: float) -> "DecisionProblem":
        """The problem with loss ``scale * loss + shift``."""
        low, high = scale * self.bounds[0] + shift, scale * self.bounds[1] + shift
        return DecisionProblem(self.actions, scale * self.loss + shift, (min(low, high), max(low, high)))

    def as_dict(self) -> dict:
        return {
            "actions": list(self.actions),
            "loss": self.loss.tolist(),
            "bounds": list(self.bounds),
        }


@dataclass(frozen=True, eq=False)
class DecisionRule:
    """Map from outcomes to actions, stored as a kernel in both cases."""

    kind: str
    kernel: Kernel

    def __post_init__(self):
        if self.kind not in (DETERMINISTIC, RANDOMIZED):
            raise ValidationError(f"Unknown decision rule kind {self.kind!r}")
        if self.kind == DETERMINISTIC and not self.kernel.is_deterministic():
            raise ValidationError("A deterministic rule needs 0/1 kernel rows")

    @classmethod
    def deterministic(cls, mapping, outcomes: Sequence[str], actions: Sequence[str]):
        return cls(DETERMINISTIC, DeterministicMap(mapping, tuple(actions)).to_kernel(outcomes))

    @classmethod
    def randomized(cls, kernel: Kernel):
        return cls(RANDOMIZED, kernel)

    def __eq__(self, other):
        if not isinstance(other, DecisionRule):
            return NotImplemented
        return self.kind == other.kind and self.kernel == other.kernel

    def __hash__(self):
        return hash((self.kind, self.kernel))

    @property
    def outcomes(self) -> tuple[str, ...]:
        return self.kernel.from_outcomes

    @property
    def actions(self) -> tuple[str, ...]:
        return self.kernel.to_outcomes

    @property
    def mapping(self) -> dict[str, str]:
        return dict(self.kernel.as_map().mapping)

    def as_dict(self) -> dict:
        if self.kind == DETERMINISTIC:
            return {
                "kind": self.kind,
                "outcomes": list(self.outcomes),
                "actions": list(self.actions),
                "mapping": self.mapping,
            }
        return {"kind": self.kind, "kernel": self.kernel.as_dict()}


def risk(e: Experiment, rule: DecisionRule, dp: DecisionProblem) -> np.ndarray:
    """Expected loss of ``rule`` under every parameter of ``e``."""
    if rule.outcomes != e.outcomes:
        raise DimensionError(f"Rule is not defined on the outcomes of {e.name!r}")
    if rule.actions != dp.actions:
        raise DimensionError("Rule actions differ from the decision problem's actions")
    if dp.loss.shape[0] != len(e.parameters):
        raise DimensionError(
            f"Loss matrix has {dp.loss.shape[0]} rows for {len(e.parameters)} parameters"
        )
    action_probabilities = e.matrix @ rule.kernel.matrix
    return (action_probabilities * dp.loss).sum(axis=1)


def transfer_rule(
    rule_on_f: DecisionRule, t: KernelLike, from_outcomes: Sequence[str] | None = None
) -> DecisionRule:
    """Run ``t`` first, then the rule: the rule moved onto the kernel's input space.

    A deterministic map needs ``from_outcomes``, the outcome order of the
    experiment the moved rule will act on.
    """
    if isinstance(t, DeterministicMap):
        if from_outcomes is None:
            raise ValidationError("Moving a rule through a map needs the outcome order of its domain")
        t = t.to_kernel(tuple(from_outcomes))
    if t.to_outcomes != rule_on_f.outcomes:
        raise DimensionError("Kernel output outcomes differ from the rule's domain")
    composite = compose_kernels(t, rule_on_f.kernel)
    if rule_on_f.kind == DETERMINISTIC and t.is_deterministic():
        return DecisionRule(DETERMINISTIC, composite)
    return DecisionRule(RANDOMIZED, composite)


def _enumeration_guard(count: int, what: str) -> None:
    limit = settings.LECAM_RULE_ENUMERATION_LIMIT
    if count > limit:
        raise GuardError(f"Refusing to enumerate {count} {what} (limit {limit})")


def enumerate_deterministic_rules(
    outcomes: Sequence[str], actions: Sequence[str]
) -> Iterator[DecisionRule]:
    """Every total map from ``outcomes`` to ``actions``, each exactly once."""
    outcomes, actions = tuple(outcomes), tuple(actions)
    _enumeration_guard(len(actions) ** len(outcomes), "deterministic rules")

    def stream():
        for choice in itertools.product(range(len(actions)), repeat=len(outcomes)):
            matrix = np.zeros((len(outcomes), len(actions)))
            matrix[np.arange(len(outcomes)), choice] = 1.0
            yield DecisionRule(DETERMINISTIC, Kernel(outcomes, actions, matrix))

    return stream()


def zero_one_problem(parameters: Sequence[str], actions: Sequence[str] = ()) -> DecisionProblem:
    """Loss 0 for naming the true parameter, 1 otherwise."""
    actions = tuple(actions) or tuple(parameters)
    loss = np.array([[0.0 if a == theta else 1.0 for a in actions] for theta in parameters])
    return DecisionProblem(actions, loss)


def binary_loss_problems(n_parameters: int, actions: Sequence[str]) -> Iterator[DecisionProblem]:
    """Every loss matrix with entries in {0, 1}."""
    actions = tuple(actions)
    cells = n_parameters * len(actions)
    _enumeration_guard(2**cells, "0-1 loss matrices")

    def stream():
        for entries in itertools.product((0.0, 1.0), repeat=cells):
            yield DecisionProblem(actions, np.reshape(entries, (n_parameters, len(actions))))

    return stream()


def minimax_risk(
    e: Experiment, rules: Sequence[DecisionRule], dp: DecisionProblem
) -> tuple[float, int]:
    """Smallest worst-case risk over ``rules`` and the index of the rule achieving it."""
    best, best_index = np.inf, -1
    for index, rule in enumerate(rules):
        worst = float(risk(e, rule, dp).max())
        if worst < best:
            best, best_index = worst, index
    if best_index < 0:
        raise ValidationError("Minimax risk needs at least one rule")
    return best, best_index


# Representation hinge


@dataclass(frozen=True)
class HingeReport:
    delta: float
    max_gap: float
    bound: float
    checks: int
    violations: int
    worst: dict | None

    @property
    def holds(self) -> bool:
        return self.violations == 0

    def as_dict(self) -> dict:
        return {
            "delta": self.delta,
            "max_gap": self.max_gap,
            "bound": self.bound,
            "checks": self.checks,
            "violations": self.violations,
            "worst": self.worst,
            "holds": self.holds,
        }


def verify_hinge(
    e: Experiment,
    f: Experiment,
    dps: Sequence[DecisionProblem],
    rules_on_f: Sequence[DecisionRule],
    report: DeficiencyReport | None = None,
) -> HingeReport:
    """Check that every rule on ``f`` moved to ``e`` through the witness keeps its risk.

    Raises PropertyFailure when some gap exceeds ``osc * delta`` beyond
    tolerance.
    """
    report = report or deficiency(e, f)
    witness = report.witness
    max_gap, bound, checks, violations, worst = 0.0, 0.0, 0, 0, None

    for i, dp in enumerate(dps):
        allowed = dp.oscillation * report.value
        bound = max(bound, allowed)
        for j, rule in enumerate(rules_on_f):
            gaps = np.abs(risk(e, transfer_rule(rule, witness), dp) - risk(f, rule, dp))
            checks += gaps.size
            theta = int(np.argmax(gaps))
            if worst is None or gaps[theta] > max_gap:
                max_gap = float(gaps[theta])
                worst = {"problem": i, "rule": j, "parameter": e.parameters[theta]}
            violations += int(np.count_nonzero(gaps > allowed + HINGE_TOLERANCE))

    hinge = HingeReport(report.value, max_gap, bound, checks, violations, worst)
    if not hinge.holds:
        logger.error(
            f"Risk transfer {e.name!r} -> {f.name!r} broke the deficiency bound: "
            f"gap {max_gap:.3e} > {bound:.3e} in {violations} check(s)"
        )
        raise PropertyFailure("Risk gap exceeds oscillation times deficiency", hinge)
    return hinge


# Empirical deficiency-gap certificate


@dataclass(frozen=True, eq=False)
class FrequencyTable:
    """Outcome counts per parameter, e.g. from a held-out sample."""

    parameters: tuple[str, ...]
    outcomes: tuple[str, ...]
    counts: np.ndarray

    def __post_init__(self):
        parameters = validate_labels(self.parameters, "parameter")
        outcomes = validate_labels(self.outcomes, "outcome")
        counts = np.array(self.counts, dtype=float)
        if counts.shape != (len(parameters), len(outcomes)):
            raise DimensionError(
                f"Frequency table has shape {counts.shape}, "
                f"expected ({len(parameters)}, {len(outcomes)})"
            )
        if not np.all(np.isfinite(counts)) or np.any(counts < 0):
            raise ValidationError("Frequencies must be finite and non-negative")
        empty = [parameters[i] for i in np.flatnonzero(counts.sum(axis=1) <= 0)]
        if empty:
            raise ValidationError(f"Empty frequency table for parameter(s) {', '.join(empty)}")
        counts.setflags(write=False)
        object.__setattr__(self, "parameters", parameters)
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_experiment(cls, e: Experiment) -> "FrequencyTable":
        return cls(e.parameters, e.outcomes, e.matrix)

    def to_experiment(self, name: str) -> Experiment:
        sums = self.counts.sum(axis=1, keepdims=True)
        return Experiment(name, self.parameters, self.outcomes, self.counts / sums)


def sample_frequency_table(e: Experiment, n_samples: int, rng: np.random.Generator) -> FrequencyTable:
    """Multinomial draw of ``n_samples`` outcomes under every parameter."""
    if n_samples < 1:
        raise ValidationError("At least one sample per parameter is needed")
    counts = np.array([rng.multinomial(n_samples, row) for row in e.matrix], dtype=float)
    return FrequencyTable(e.parameters, e.outcomes, counts)


@dataclass(frozen=True)
class DecisionClassMember:
    """One loss in the certificate's decision class.

    With both rules set, the same decision procedure is scored on each side.
    Without rules, the best deterministic rule on each side is used and the
    minimax risks are compared.
    """

    problem: DecisionProblem
    source_rule: DecisionRule | None = None
    target_rule: DecisionRule | None = None

    @property
    def paired(self) -> bool:
        return self.source_rule is not None and self.target_rule is not None


def exhaustive_decision_class(
    source_outcomes: Sequence[str],
    target_outcomes: Sequence[str],
    problems: Sequence[DecisionProblem],
) -> list[DecisionClassMember]:
    if tuple(source_outcomes) == tuple(target_outcomes):
        return [
            DecisionClassMember(problem, rule, rule)
            for problem in problems
            for rule in enumerate_deterministic_rules(source_outcomes, problem.actions)
        ]
    return [DecisionClassMember(problem) for problem in problems]


def member_gap(source: Experiment, target: Experiment, member: DecisionClassMember) -> float:
    if member.paired:
        return float(
            np.abs(
                risk(source, member.source_rule, member.problem)
                - risk(target, member.target_rule, member.problem)
            ).max()
        )
    source_rules = list(enumerate_deterministic_rules(source.outcomes, member.problem.actions))
    target_rules = list(enumerate_deterministic_rules(target.outcomes, member.problem.actions))
    best_source, _ = minimax_risk(source, source_rules, member.problem)
    best_target, _ = minimax_risk(target, target_rules, member.problem)
    return abs(best_source - best_target)


@dataclass(frozen=True)
class CertificateReport:
    """``gaps`` has one entry per class member; ``worst_loss_id`` numbers the
    distinct losses in order of first appearance."""

    decision_class_size: int
    delta_hat: float
    worst_loss_id: int
    gaps: tuple[float, ...]
    epsilon: float | None = None
    worst_member: int = 0

    @property
    def simulable(self) -> bool | None:
        if self.epsilon is None:
            return None
        return self.delta_hat <= self.epsilon

    def as_dict(self) -> dict:
        return {
            "decision_class_size": self.decision_class_size,
            "delta_hat": self.delta_hat,
            "worst_loss_id": self.worst_loss_id,
            "worst_member": self.worst_member,
            "gaps": list(self.gaps),
            "epsilon": self.epsilon,
            "simulable": self.simulable,
        }


def empirical_deficiency_gap(
    samples_source: FrequencyTable,
    samples_target: FrequencyTable,
    decision_class: Sequence[DecisionClassMember],
    epsilon: float | None = None,
) -> CertificateReport:
    """Largest risk gap between source and target over a finite decision class."""
    if not decision_class:
        raise ValidationError("The decision class is empty")
    if samples_source.parameters != samples_target.parameters:
        raise DimensionError("Source and target tables cover different parameters")
    source = samples_source.to_experiment("source")
    target = samples_target.to_experiment("target")

    gaps = tuple(member_gap(source, target, member) for member in decision_class)
    loss_ids: dict[DecisionProblem, int] = {}
    for member in decision_class:
        loss_ids.setdefault(member.problem, len(loss_ids))
    worst = int(np.argmax(gaps))
    loss = loss_ids[decision_class[worst].problem]
    logger.info(
        f"Certificate over {len(gaps)} members and {len(loss_ids)} losses: "
        f"delta_hat={gaps[worst]:.6g} (loss #{loss}, member #{worst})"
    )
    return CertificateReport(len(gaps), gaps[worst], loss, gaps, epsilon, worst)
