"""
Dense two-phase simplex solver for the small linear programs used here.

Solves

    minimize    c @ x
    subject to  a_ub @ x <= b_ub
                a_eq @ x == b_eq
                x >= 0

on a full numpy tableau. Pricing is Dantzig's most negative reduced cost with
a Harris two-pass ratio test; after a run of degenerate pivots the solver
switches to Bland's rule, which cannot cycle. The tableau is rebuilt from the
original constraints and the current basis every ``REFACTOR_INTERVAL`` pivots
and before optimality or unboundedness is declared, so rounding from the
rank-one updates never accumulates.
"""

import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

OPTIMAL = "optimal"
TOLERANCE_LIMITED = "tolerance-limited"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

# relative to the largest entry of the entering column
PIVOT_TOLERANCE = 1e-9
OPTIMALITY_TOLERANCE = 1e-10
FEASIBILITY_TOLERANCE = 1e-9
HARRIS_TOLERANCE = 1e-11
DEGENERATE_RUN_BEFORE_BLAND = 50
REFACTOR_INTERVAL = 64


@dataclass(frozen=True)
class LinearProgramResult:
    x: np.ndarray
    objective: float
    status: str
    iterations: int
    residual: float
    message: str = ""

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class _Tableau:
    """Tableau of ``a @ x == b, x >= 0`` for a cost vector and a basis."""

    def __init__(self, a: np.ndarray, b: np.ndarray, cost: np.ndarray, basis: np.ndarray):
        self.a = a
        self.b = b
        self.cost = cost
        self.basis = basis
        self.table = np.empty((a.shape[0] + 1, a.shape[1] + 1))
        self.since_refactor = 0
        self.refactor()

    @property
    def basic_values(self) -> np.ndarray:
        return self.table[:-1, -1]

    @property
    def infeasibility(self) -> float:
        return float(-self.table[-1, -1])

    def refactor(self) -> None:
        """Recompute every row and the reduced costs from ``B^-1``."""
        m = self.a.shape[0]
        body = np.linalg.solve(self.a[:, self.basis], np.column_stack([self.a, self.b]))
        body[:, self.basis] = np.eye(m)
        self.table[:-1] = body
        cost_basic = self.cost[self.basis]
        self.table[-1, :-1] = self.cost - cost_basic @ body[:, :-1]
        self.table[-1, self.basis] = 0.0
        self.table[-1, -1] = -cost_basic @ body[:, -1]
        self.since_refactor = 0

    def pivot(self, row: int, col: int) -> None:
        table = self.table
        table[row] /= table[row, col]
        column = table[:, col].copy()
        column[row] = 0.0
        table -= np.outer(column, table[row])
        self.basis[row] = col
        self.since_refactor += 1

    def _entering(self, n_columns: int, bland: bool) -> int | None:
        costs = self.table[-1, :n_columns]
        if costs.size == 0:
            return None
        if bland:
            candidates = np.flatnonzero(costs < -OPTIMALITY_TOLERANCE)
            return int(candidates[0]) if candidates.size else None
        col = int(np.argmin(costs))
        return col if costs[col] < -OPTIMALITY_TOLERANCE else None

    def _leaving(self, col: int, bland: bool) -> tuple[int, float] | None:
        column = self.table[:-1, col]
        scale = max(1.0, np.abs(column).max(initial=0.0))
        rows = np.flatnonzero(column > PIVOT_TOLERANCE * scale)
        if rows.size == 0:
            return None
        rhs, pivots = self.basic_values[rows], column[rows]
        ratios = np.maximum(rhs, 0.0) / pivots
        if bland:
            # ties go to the smallest basic index
            ties = rows[ratios <= ratios.min() + HARRIS_TOLERANCE]
            row = int(ties[np.argmin(self.basis[ties])])
            return row, float(ratios.min())
        bound = ((rhs + HARRIS_TOLERANCE) / pivots).min()
        eligible = np.flatnonzero(rhs / pivots <= bound)
        choice = int(eligible[np.argmax(pivots[eligible])])
        return int(rows[choice]), float(ratios[choice])

    def iterate(self, n_columns: int, max_iterations: int) -> tuple[str, int]:
        """Pivot until optimality; returns (status, iterations)."""
        degenerate_run = 0
        for iteration in range(max_iterations):
            if self.since_refactor >= REFACTOR_INTERVAL:
                self.refactor()
            bland = degenerate_run > DEGENERATE_RUN_BEFORE_BLAND

            col = self._entering(n_columns, bland)
            if col is None:
                if self.since_refactor == 0:
                    return OPTIMAL, iteration
                self.refactor()
                continue

            leaving = self._leaving(col, bland)
            if leaving is None:
                if self.since_refactor == 0:
                    return UNBOUNDED, iteration
                self.refactor()
                continue

            row, step = leaving
            degenerate_run = degenerate_run + 1 if step <= HARRIS_TOLERANCE else 0
            # a Harris step may pick a row slightly below zero
            self.table[row, -1] = max(self.table[row, -1], 0.0)
            self.pivot(row, col)

        return TOLERANCE_LIMITED, max_iterations


def _drive_out_artificials(tableau: _Tableau, n_structural: int) -> np.ndarray:
    """Pivot basic artificials out; returns the mask of rows that are not redundant."""
    keep = np.ones(tableau.a.shape[0], dtype=bool)
    for row in np.flatnonzero(tableau.basis >= n_structural):
        entries = np.abs(tableau.table[row, :n_structural])
        col = int(np.argmax(entries))
        if entries[col] > PIVOT_TOLERANCE:
            tableau.pivot(row, col)
        else:
            # redundant equality
            keep[row] = False
    return keep


def solve_linear_program(
    c,
    a_ub=None,
    b_ub=None,
    a_eq=None,
    b_eq=None,
    max_iterations: int | None = None,
) -> LinearProgramResult:
    c = np.asarray(c, dtype=float)
    n = c.size
    a_ub = np.zeros((0, n)) if a_ub is None else np.asarray(a_ub, dtype=float).reshape(-1, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
    a_eq = np.zeros((0, n)) if a_eq is None else np.asarray(a_eq, dtype=float).reshape(-1, n)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    m_ub, m_eq = a_ub.shape[0], a_eq.shape[0]
    m = m_ub + m_eq
    n_structural = n + m_ub

    a = np.zeros((m, n_structural))
    a[:m_ub, :n] = a_ub
    a[:m_ub, n:] = np.eye(m_ub)
    a[m_ub:, :n] = a_eq
    b = np.concatenate([b_ub, b_eq])
    flipped = b < 0
    a[flipped] *= -1.0
    b[flipped] *= -1.0

    basis = np.full(m, -1)
    for i in range(m_ub):
        if not flipped[i]:
            basis[i] = n + i
    needs_artificial = np.flatnonzero(basis < 0)
    n_artificial = needs_artificial.size
    n_total = n_structural + n_artificial

    if max_iterations is None:
        max_iterations = 50 * (m + n_total) + 1000
    iterations = 0
    cost = np.concatenate([c, np.zeros(m_ub)])

    try:
        if n_artificial:
            artificial = np.zeros((m, n_artificial))
            artificial[needs_artificial, np.arange(n_artificial)] = 1.0
            basis[needs_artificial] = n_structural + np.arange(n_artificial)
            phase_one_cost = np.concatenate([np.zeros(n_structural), np.ones(n_artificial)])
            tableau = _Tableau(np.hstack([a, artificial]), b, phase_one_cost, basis)
            status, used = tableau.iterate(n_total, max_iterations)
            iterations += used
            infeasibility = tableau.infeasibility
            if status != OPTIMAL or infeasibility > FEASIBILITY_TOLERANCE * max(1.0, np.abs(b).max()):
                logger.warning(f"Phase one ended with infeasibility {infeasibility:.3e} ({status})")
                return LinearProgramResult(
                    np.zeros(n), np.nan, INFEASIBLE, iterations, float(infeasibility),
                    "no feasible point found",
                )
            keep = _drive_out_artificials(tableau, n_structural)
            a, b, basis = a[keep], b[keep], tableau.basis[keep]

        tableau = _Tableau(a, b, cost, basis)
        status, used = tableau.iterate(n_structural, max(1, max_iterations - iterations))
        iterations += used
    except np.linalg.LinAlgError as e:
        logger.warning(f"Simplex basis became singular: {e}")
        return LinearProgramResult(
            np.zeros(n), np.nan, TOLERANCE_LIMITED, iterations, np.inf, f"singular basis: {e}"
        )

    basic = tableau.basic_values.copy()
    # rounding noise only; larger negatives stay visible in the residual
    basic[(basic < 0) & (basic >= -FEASIBILITY_TOLERANCE)] = 0.0
    solution = np.zeros(n_structural)
    solution[tableau.basis] = basic
    x = solution[:n]
    objective = float(c @ x)

    residuals = [0.0, float(np.maximum(-x, 0.0).max(initial=0.0))]
    if m_ub:
        residuals.append(float(np.maximum(a_ub @ x - b_ub, 0.0).max()))
    if m_eq:
        residuals.append(float(np.abs(a_eq @ x - b_eq).max()))
    residual = max(residuals)

    message = ""
    if status == OPTIMAL and residual > FEASIBILITY_TOLERANCE:
        status = TOLERANCE_LIMITED
        message = f"primal residual {residual:.3e} above {FEASIBILITY_TOLERANCE:g}"
    elif status == TOLERANCE_LIMITED:
        message = f"iteration limit {max_iterations} reached"
    elif status == UNBOUNDED:
        message = "objective unbounded below"

    logger.debug(
        f"Simplex finished: status={status} iterations={iterations} "
        f"objective={objective:.12g} residual={residual:.2e}"
    )
    return LinearProgramResult(x, objective, status, iterations, residual, message)
