"""
Le Cam deficiency between finite experiments.

``deficiency(e, f)`` solves the minimax program

    minimize t
    over     T[x, y] >= 0,  sum_y T[x, y] = 1          (Markov kernel)
             u[theta, y] >= +/-((P_theta T)_y - Q_theta(y))
             1/2 sum_y u[theta, y] <= t                  (for every theta)

with the dense simplex solver and reports the value recomputed from the
cleaned witness kernel, so the number returned is always achieved by the
kernel returned.
"""

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings
from django.core.exceptions import ValidationError

from deficiency.core import (
    Experiment,
    Kernel,
    KernelLike,
    as_kernel,
    check_same_parameters,
    tv_distance,
)
from deficiency.exceptions import DimensionError, GuardError
from deficiency.simplex import OPTIMAL, TOLERANCE_LIMITED, solve_linear_program

logger = logging.getLogger(__name__)

WITNESS_TOLERANCE = 1e-7
ORACLE_MAX_OUTCOMES = 3


@dataclass(frozen=True)
class DeficiencyReport:
    value: float
    witness: Kernel
    direction: tuple[str, str]
    solver_status: str
    iterations: int
    objective: float
    residual: float
    message: str = ""

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "witness": self.witness.as_dict(),
            "direction": list(self.direction),
            "solver_status": self.solver_status,
            "iterations": self.iterations,
            "objective": self.objective,
            "residual": self.residual,
            "message": self.message,
        }


@dataclass(frozen=True)
class LeCamDistance:
    forward: DeficiencyReport
    backward: DeficiencyReport

    @property
    def value(self) -> float:
        return max(self.forward.value, self.backward.value)

    def as_dict(self) -> dict:
        return {
            "forward": self.forward.as_dict(),
            "backward": self.backward.as_dict(),
            "Delta": self.value,
        }


@dataclass(frozen=True)
class BinaryDeficiencyDiagnostic:
    pair: tuple[str, str]
    lp_value: float
    tv_source: float
    tv_target: float
    tv_gap_expression: float
    contraction_lower_bound: float

    def as_dict(self) -> dict:
        return {
            "pair": list(self.pair),
            "lp_value": self.lp_value,
            "tv_source": self.tv_source,
            "tv_target": self.tv_target,
            "tv_gap_expression": self.tv_gap_expression,
            "contraction_lower_bound": self.contraction_lower_bound,
        }


@dataclass(frozen=True)
class KernelEvaluation:
    kernel_error: float
    deficiency: DeficiencyReport
    excess: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "excess", self.kernel_error - self.deficiency.value)

    def as_dict(self) -> dict:
        return {
            "kernel_error": self.kernel_error,
            "deficiency": self.deficiency.value,
            "excess": self.excess,
        }


def _check_kernel_shapes(e: Experiment, f: Experiment, t: Kernel) -> None:
    check_same_parameters(e, f)
    if t.from_outcomes != e.outcomes or t.to_outcomes != f.outcomes:
        raise DimensionError(
            f"Kernel must map the outcomes of {e.name!r} to the outcomes of {f.name!r}"
        )


def kernel_simulation_error(e: Experiment, f: Experiment, t: KernelLike) -> float:
    """Worst-case total variation between ``P_theta T`` and ``Q_theta``."""
    t = as_kernel(t, e.outcomes)
    _check_kernel_shapes(e, f, t)
    return float(tv_distance(e.matrix @ t.matrix, f.matrix).max())


def _clean_witness(e: Experiment, f: Experiment, active, block) -> Kernel:
    n_target = len(f.outcomes)
    block = np.clip(block, 0.0, None)
    sums = block.sum(axis=1, keepdims=True)
    uniform = np.full(n_target, 1.0 / n_target)
    block = np.where(sums > 0, block / np.where(sums > 0, sums, 1.0), uniform)

    matrix = np.empty((len(e.outcomes), n_target))
    matrix[active] = block
    target_index = {label: j for j, label in enumerate(f.outcomes)}
    for x in np.setdiff1d(np.arange(len(e.outcomes)), active):
        # never observed under any parameter; any row works
        label = e.outcomes[x]
        if label in target_index:
            matrix[x] = 0.0
            matrix[x, target_index[label]] = 1.0
        else:
            matrix[x] = uniform
    return Kernel(e.outcomes, f.outcomes, matrix)


@dataclass(frozen=True)
class DeficiencyProgram:
    """The minimax program in ``solve_linear_program`` form."""

    c: np.ndarray
    a_ub: np.ndarray
    b_ub: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray
    # source outcomes with positive mass under some parameter
    active: np.ndarray
    n_target: int

    @property
    def n_kernel(self) -> int:
        return self.active.size * self.n_target

    def kernel_block(self, x: np.ndarray) -> np.ndarray:
        return x[: self.n_kernel].reshape(self.active.size, self.n_target)


def deficiency_program(e: Experiment, f: Experiment) -> DeficiencyProgram:
    check_same_parameters(e, f)
    p, q = e.matrix, f.matrix
    k, m = q.shape
    active = np.flatnonzero(p.sum(axis=0) > 0)
    p_active = p[:, active]
    n_active = active.size

    n_kernel = n_active * m
    n_slack = k * m
    n_vars = n_kernel + n_slack + 1

    c = np.zeros(n_vars)
    c[-1] = 1.0

    a_eq = np.zeros((n_active, n_vars))
    for x in range(n_active):
        a_eq[x, x * m : (x + 1) * m] = 1.0
    b_eq = np.ones(n_active)

    # rows indexed by (theta, y); kron(P, I) maps T[x, y'] to (P T)[theta, y]
    mixing = np.kron(p_active, np.eye(m))
    slack = np.eye(n_slack)
    upper = np.hstack([mixing, -slack, np.zeros((n_slack, 1))])
    lower = np.hstack([-mixing, -slack, np.zeros((n_slack, 1))])
    budget = np.zeros((k, n_vars))
    for theta in range(k):
        budget[theta, n_kernel + theta * m : n_kernel + (theta + 1) * m] = 0.5
    budget[:, -1] = -1.0
    a_ub = np.vstack([upper, lower, budget])
    b_ub = np.concatenate([q.ravel(), -q.ravel(), np.zeros(k)])
    return DeficiencyProgram(c, a_ub, b_ub, a_eq, b_eq, active, m)


def deficiency(e: Experiment, f: Experiment) -> DeficiencyReport:
    """Exact deficiency of ``e`` with respect to ``f`` and a kernel achieving it."""
    program = deficiency_program(e, f)
    result = solve_linear_program(program.c, program.a_ub, program.b_ub, program.a_eq, program.b_eq)
    witness = _clean_witness(e, f, program.active, program.kernel_block(result.x))
    value = kernel_simulation_error(e, f, witness)

    status, message = OPTIMAL, result.message
    if not result.optimal:
        status = TOLERANCE_LIMITED
        message = message or f"solver status {result.status}"
    elif abs(value - result.objective) > WITNESS_TOLERANCE:
        status = TOLERANCE_LIMITED
        message = (
            f"witness error {value:.3e} differs from LP objective {result.objective:.3e}"
        )
    if status != OPTIMAL:
        logger.warning(f"Deficiency {e.name!r} -> {f.name!r} is {status}: {message}")

    logger.debug(
        f"Deficiency {e.name!r} -> {f.name!r} = {value:.12g} "
        f"({result.iterations} pivots, {program.c.size} variables)"
    )
    return DeficiencyReport(
        value=min(max(value, 0.0), 1.0),
        witness=witness,
        direction=(e.name, f.name),
        solver_status=status,
        iterations=result.iterations,
        objective=result.objective,
        residual=result.residual,
        message=message,
    )


def lecam_distance(e: Experiment, f: Experiment) -> LeCamDistance:
    return LeCamDistance(deficiency(e, f), deficiency(f, e))


def simulates(e: Experiment, f: Experiment, eps: float) -> bool:
    """True when ``e`` reproduces ``f`` up to worst-case TV ``eps``."""
    return deficiency(e, f).value <= eps + WITNESS_TOLERANCE


def evaluate_kernel(e: Experiment, f: Experiment, t: KernelLike) -> KernelEvaluation:
    """Compare a given kernel with the best kernel."""
    return KernelEvaluation(kernel_simulation_error(e, f, t), deficiency(e, f))


def contraction_lower_bound(e: Experiment, f: Experiment) -> tuple[float, tuple[str, str] | None]:
    """Largest 1/2 max(0, TV_f - TV_e) over parameter pairs; no kernel closes that gap."""
    check_same_parameters(e, f)
    best, best_pair = 0.0, None
    for i, j in itertools.combinations(range(len(e.parameters)), 2):
        gap = 0.5 * max(
            0.0,
            float(tv_distance(f.matrix[i], f.matrix[j]) - tv_distance(e.matrix[i], e.matrix[j])),
        )
        if best_pair is None or gap > best:
            best, best_pair = gap, (e.parameters[i], e.parameters[j])
    return best, best_pair


def binary_deficiency_diag(
    e: Experiment, f: Experiment, theta0: str, theta1: str
) -> BinaryDeficiencyDiagnostic:
    check_same_parameters(e, f)
    if theta0 == theta1:
        raise ValidationError("A binary comparison needs two distinct parameters")
    pair = [theta0, theta1]
    e_pair, f_pair = e.restrict(pair), f.restrict(pair)
    tv_source = float(tv_distance(e_pair.matrix[0], e_pair.matrix[1]))
    tv_target = float(tv_distance(f_pair.matrix[0], f_pair.matrix[1]))
    return BinaryDeficiencyDiagnostic(
        pair=(theta0, theta1),
        lp_value=deficiency(e_pair, f_pair).value,
        tv_source=tv_source,
        tv_target=tv_target,
        tv_gap_expression=0.5 * abs(tv_source - tv_target),
        contraction_lower_bound=0.5 * max(0.0, tv_target - tv_source),
    )


# Brute-force grid oracle


def simplex_grid(n_parts: int, steps: int) -> np.ndarray:
    """Every probability vector of length ``n_parts`` with entries in (1/steps)Z."""
    if n_parts == 1:
        return np.ones((1, 1))
    slots = steps + n_parts - 1
    points = []
    for bars in itertools.combinations(range(slots), n_parts - 1):
        edges = (-1, *bars, slots)
        points.append([edges[i + 1] - edges[i] - 1 for i in range(n_parts)])
    return np.array(points, dtype=float) / steps


def _partial_mixtures(columns: np.ndarray, grid: np.ndarray):
    """Yield batches of sum_x P[:, x] * T[x] over every grid choice of the rows T[x]."""
    k, r = columns.shape
    m = grid.shape[1]
    if r == 0:
        yield np.zeros((1, k, m))
        return
    head = np.zeros((1, k, m))
    for x in range(r - 1):
        head = (
            head[:, None] + columns[None, None, :, x, None] * grid[None, :, None, :]
        ).reshape(-1, k, m)
    last = columns[:, r - 1]
    for point in grid:
        yield head + last[None, :, None] * point[None, None, :]


def _best_last_row(alpha: np.ndarray, beta: np.ndarray, steps: int) -> np.ndarray:
    """Minimize max_theta |alpha + beta s| over grid values s in [0, 1], per batch row.

    The objective is convex and piecewise linear in s, so the continuous
    minimum sits at an endpoint, a root or a crossing of two pieces; the grid
    minimum is at the floor or ceiling of one of those.
    """
    batch, k = alpha.shape
    candidates = [np.zeros(batch), np.ones(batch)]
    with np.errstate(divide="ignore", invalid="ignore"):
        for i in range(k):
            if beta[i] > 0:
                candidates.append(-alpha[:, i] / beta[i])
            for j in range(i + 1, k):
                if beta[i] != beta[j]:
                    candidates.append((alpha[:, j] - alpha[:, i]) / (beta[i] - beta[j]))
                if beta[i] + beta[j] > 0:
                    candidates.append(-(alpha[:, i] + alpha[:, j]) / (beta[i] + beta[j]))
    s = np.nan_to_num(np.clip(np.stack(candidates, axis=1), 0.0, 1.0))
    s = np.concatenate([np.floor(s * steps), np.ceil(s * steps)], axis=1) / steps
    s = np.clip(s, 0.0, 1.0)
    values = np.abs(alpha[:, None, :] + s[..., None] * beta[None, None, :]).max(axis=2)
    return values.min(axis=1)


def deficiency_bruteforce(e: Experiment, f: Experiment, resolution: float) -> float:
    """Best simulation error over kernels whose entries are multiples of ``resolution``.

    Independent of the LP; used to cross-check it. With two target outcomes
    the last kernel row is optimized exactly on the grid instead of being
    enumerated.
    """
    check_same_parameters(e, f)
    if len(e.outcomes) > ORACLE_MAX_OUTCOMES or len(f.outcomes) > ORACLE_MAX_OUTCOMES:
        raise GuardError(
            f"Grid oracle accepts at most {ORACLE_MAX_OUTCOMES} outcomes per experiment"
        )
    if not 0 < resolution <= 1:
        raise ValidationError("Oracle resolution must lie in (0, 1]")
    steps = int(round(1.0 / resolution))
    if abs(steps * resolution - 1.0) > 1e-9:
        raise ValidationError(f"Oracle resolution {resolution!r} must divide 1")

    p, q = e.matrix, f.matrix
    k, m = q.shape
    if m == 1:
        return 0.0
    active = np.flatnonzero(p.sum(axis=0) > 0)
    grid = simplex_grid(m, steps)

    exact_last = m == 2
    enumerated = active[:-1] if exact_last else active
    evaluations = len(grid) ** len(enumerated)
    if exact_last:
        evaluations *= 2 * (2 + k * k)
    limit = settings.LECAM_ORACLE_MAX_EVALUATIONS
    if evaluations > limit:
        raise GuardError(
            f"Grid oracle would evaluate {evaluations:.3g} kernels (limit {limit:.3g})"
        )

    logger.debug(
        f"Grid oracle {e.name!r} -> {f.name!r}: {len(grid)} points per row, "
        f"{len(enumerated)} enumerated rows"
    )
    best = np.inf
    for mixtures in _partial_mixtures(p[:, enumerated], grid):
        if exact_last:
            values = _best_last_row(mixtures[..., 0] - q[None, :, 0], p[:, active[-1]], steps)
        else:
            values = tv_distance(mixtures, q[None]).max(axis=1)
        best = min(best, float(values.min()))
    return best
