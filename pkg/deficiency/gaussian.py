"""
Gaussian location families discretized onto finite grids.

A grid is a run of equal bins [lo + k*step, lo + (k+1)*step); mass falling
below the first bin or above the last is assigned to the boundary bins, so
every row stays stochastic. The standard normal CDF is scipy's ``ndtr``
(Cephes), whose relative error is documented at about 1e-15 over the whole
real line.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from django.core.exceptions import ValidationError
from scipy.special import ndtr

from deficiency.comparison import deficiency, kernel_simulation_error
from deficiency.core import (
    DeterministicMap,
    Experiment,
    Kernel,
    apply_kernel,
    row_distances,
    tv_distance,
)
from deficiency.hierarchy import check_sufficiency, likelihood_distortion, testing_equivalence
from deficiency.parallel import parallel_map
from deficiency.simplex import OPTIMAL, TOLERANCE_LIMITED

logger = logging.getLogger(__name__)

MAX_BINS = 10**6
COVERAGE_SIGMAS = 6.0
NFT_TOLERANCE = 1e-7


def std_normal_cdf(x):
    """Standard normal CDF; accepts scalars or arrays."""
    value = ndtr(x)
    return float(value) if np.ndim(value) == 0 else value


def gaussian_location_tv(delta: float, sigma: float) -> float:
    """TV between N(0, sigma^2) and N(delta, sigma^2)."""
    return 2.0 * std_normal_cdf(abs(delta) / (2.0 * sigma)) - 1.0


def gaussian_scale_tv(sigma_a: float, sigma_b: float) -> float:
    """TV between N(0, sigma_a^2) and N(0, sigma_b^2).

    The densities cross at +/- x*, with x*^2 = 2 a^2 b^2 ln(b/a) / (b^2 - a^2).
    """
    a, b = sorted((float(sigma_a), float(sigma_b)))
    if a == b:
        return 0.0
    crossing = math.sqrt(2.0 * a * a * b * b * math.log(b / a) / (b * b - a * a))
    return 2.0 * (std_normal_cdf(crossing / a) - std_normal_cdf(crossing / b))


def sweep_values(lo: float, hi: float, step: float) -> list[float]:
    """``lo, lo + step, ...`` up to and including ``hi``."""
    if step <= 0 or hi < lo:
        raise ValidationError("A sweep needs step > 0 and hi >= lo")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + k * step, 12) for k in range(count)]


@dataclass(frozen=True)
class Grid:
    lo: float
    hi: float
    step: float

    def __post_init__(self):
        for field_name in ("lo", "hi", "step"):
            value = float(getattr(self, field_name))
            if not math.isfinite(value):
                raise ValidationError(f"Grid {field_name} must be finite")
            object.__setattr__(self, field_name, value)
        if self.lo >= self.hi:
            raise ValidationError(f"Grid needs lo < hi, got [{self.lo}, {self.hi}]")
        if self.step <= 0:
            raise ValidationError("Grid step must be positive")
        if (self.hi - self.lo) / self.step > MAX_BINS:
            raise ValidationError(f"Grid would have more than {MAX_BINS} bins")

    @classmethod
    def parse(cls, text: str) -> "Grid":
        """Read ``lo:hi:step``."""
        try:
            lo, hi, step = (float(part) for part in str(text).split(":"))
        except ValueError:
            raise ValidationError(f"Expected lo:hi:step, got {text!r}") from None
        return cls(lo, hi, step)

    @property
    def n_bins(self) -> int:
        span = (self.hi - self.lo) / self.step
        nearest = round(span)
        if abs(span - nearest) <= 1e-9 * max(1.0, span):
            return max(1, int(nearest))
        return int(math.ceil(span))

    @property
    def edges(self) -> np.ndarray:
        return self.lo + np.arange(self.n_bins + 1) * self.step

    @property
    def centers(self) -> np.ndarray:
        return self.lo + (np.arange(self.n_bins) + 0.5) * self.step

    @property
    def labels(self) -> tuple[str, ...]:
        labels = tuple(f"{left:.12g}" for left in self.edges[:-1])
        if len(set(labels)) != len(labels):
            labels = tuple(f"bin{k}" for k in range(self.n_bins))
        return labels

    def bin_index(self, values) -> np.ndarray:
        """Index of the bin containing each value, -1 or n_bins when off the grid."""
        index = np.floor((np.asarray(values, dtype=float) - self.lo) / self.step + 1e-9)
        return np.clip(index, -1, self.n_bins).astype(int)

    def binned_masses(self, means, sigma: float) -> np.ndarray:
        """Bin masses of N(mean, sigma^2) for every mean, tails in the boundary bins."""
        means = np.atleast_1d(np.asarray(means, dtype=float))
        interior = self.edges[1:-1]
        cdf = ndtr((interior[None, :] - means[:, None]) / sigma)
        padded = np.hstack([np.zeros((means.size, 1)), cdf, np.ones((means.size, 1))])
        return np.diff(padded, axis=1)


@dataclass(frozen=True)
class GaussianFamilySpec:
    thetas: tuple[float, ...]
    variance: float
    grid: Grid

    def __post_init__(self):
        thetas = tuple(float(theta) for theta in self.thetas)
        if not thetas:
            raise ValidationError("A Gaussian family needs at least one mean")
        if not all(math.isfinite(theta) for theta in thetas):
            raise ValidationError("Gaussian means must be finite")
        if not (math.isfinite(self.variance) and self.variance > 0):
            raise ValidationError("Gaussian variance must be positive")
        object.__setattr__(self, "thetas", thetas)

    @property
    def parameters(self) -> tuple[str, ...]:
        return tuple(f"{theta:g}" for theta in self.thetas)


def binned_gaussian_experiment(spec: GaussianFamilySpec, name: str | None = None) -> Experiment:
    masses = spec.grid.binned_masses(spec.thetas, math.sqrt(spec.variance))
    return Experiment(
        name or f"N(theta, {spec.variance:g})", spec.parameters, spec.grid.labels, masses
    )


def gaussian_noise_kernel(grid: Grid, variance: float) -> Kernel:
    """Row x: binned N(center_x, variance), i.e. adding independent Gaussian noise."""
    return Kernel(grid.labels, grid.labels, grid.binned_masses(grid.centers, math.sqrt(variance)))


def scaling_map(grid: Grid, c: float) -> DeterministicMap:
    """Send each bin to the bin containing ``c`` times its center."""
    targets = grid.bin_index(c * grid.centers)
    if np.any(targets < 0) or np.any(targets >= grid.n_bins):
        raise ValidationError(f"Scaling by c={c:g} maps bin centers off the grid")
    labels = grid.labels
    return DeterministicMap(
        {labels[k]: labels[j] for k, j in enumerate(targets)}, labels
    )


def floor_map(grid: Grid) -> DeterministicMap:
    """Send each sub-unit bin to the integer part of its left edge."""
    units = np.floor(grid.edges[:-1] + 1e-9).astype(int)
    return DeterministicMap({label: str(unit) for label, unit in zip(grid.labels, units)})


# Counterexample with a narrow and a wide Gaussian location family


REFERENCE_FIGURES = {
    "narrow_pair_tv": "≈ 1",
    "wide_pair_tv": "≈ 0.08",
    "pairwise_deficiency": "≈ 0.46",
}

CONVENTION_NOTE = (
    "Total variation is reported as half the L1 distance. The reference figure "
    "0.08 for the wide pair equals the unnormalized L1 distance (2 x 0.0399); "
    "the reference figures are printed for comparison only."
)


@dataclass(frozen=True)
class PairDistances:
    pair: tuple[str, str]
    narrow: float
    wide: float
    narrow_closed_form: float
    wide_closed_form: float

    def as_dict(self) -> dict:
        return {
            "pair": list(self.pair),
            "narrow": self.narrow,
            "wide": self.wide,
            "narrow_closed_form": self.narrow_closed_form,
            "wide_closed_form": self.wide_closed_form,
        }


@dataclass(frozen=True)
class NoiseSimulationReport:
    grid: Grid
    simulation_error: float
    discretization_bound: float
    pairs: tuple[PairDistances, ...]

    @property
    def within_bound(self) -> bool:
        return self.simulation_error <= self.discretization_bound

    def as_dict(self) -> dict:
        return {
            "grid": {"lo": self.grid.lo, "hi": self.grid.hi, "step": self.grid.step},
            "simulation_error": self.simulation_error,
            "discretization_bound": self.discretization_bound,
            "within_bound": self.within_bound,
            "pairwise_tv": [pair.as_dict() for pair in self.pairs],
            "reference_figures": dict(REFERENCE_FIGURES),
            "note": CONVENTION_NOTE,
        }


def counterexample3_simulation(
    grid: Grid,
    thetas: Sequence[float] = (0.0, 0.1),
    narrow_variance: float = 0.01,
    wide_variance: float = 1.0,
) -> NoiseSimulationReport:
    """Simulate the wide family from the narrow one by adding N(0, wide - narrow) noise.

    In the continuum the simulation is exact; what remains is discretization
    error.
    """
    if wide_variance <= narrow_variance:
        raise ValidationError("The wide family must have the larger variance")
    reach = COVERAGE_SIGMAS * math.sqrt(wide_variance)
    if grid.lo > min(thetas) - reach + 1e-9 or grid.edges[-1] < max(thetas) + reach - 1e-9:
        raise ValidationError(
            f"Grid [{grid.lo}, {grid.hi}] does not cover the means +/- {COVERAGE_SIGMAS:g} "
            f"standard deviations of the wide family"
        )

    narrow = binned_gaussian_experiment(GaussianFamilySpec(tuple(thetas), narrow_variance, grid), "P")
    wide = binned_gaussian_experiment(GaussianFamilySpec(tuple(thetas), wide_variance, grid), "Q")
    noise = gaussian_noise_kernel(grid, wide_variance - narrow_variance)
    error = kernel_simulation_error(narrow, wide, noise)

    pairs = []
    for i, j in itertools.combinations(range(len(narrow.parameters)), 2):
        delta = abs(float(thetas[i]) - float(thetas[j]))
        pairs.append(
            PairDistances(
                pair=(narrow.parameters[i], narrow.parameters[j]),
                narrow=float(tv_distance(narrow.matrix[i], narrow.matrix[j])),
                wide=float(tv_distance(wide.matrix[i], wide.matrix[j])),
                narrow_closed_form=gaussian_location_tv(delta, math.sqrt(narrow_variance)),
                wide_closed_form=gaussian_location_tv(delta, math.sqrt(wide_variance)),
            )
        )
    logger.info(f"Noise-kernel simulation at step {grid.step:g}: error {error:.3e}")
    return NoiseSimulationReport(grid, error, 2.0 * grid.step + 1e-3, tuple(pairs))


@dataclass(frozen=True)
class PairwiseGapReport:
    pairwise_deficiency: float
    argmax_pair: tuple[str, str] | None
    tv_narrow: float
    tv_wide: float
    closed_form_lower_bound: float

    @property
    def lower_bound(self) -> float:
        return 0.5 * max(0.0, self.tv_narrow - self.tv_wide)

    @property
    def holds(self) -> bool:
        return self.pairwise_deficiency >= self.lower_bound - 1e-7

    def as_dict(self) -> dict:
        return {
            "pairwise_deficiency": self.pairwise_deficiency,
            "argmax_pair": list(self.argmax_pair) if self.argmax_pair else None,
            "tv_narrow": self.tv_narrow,
            "tv_wide": self.tv_wide,
            "lower_bound": self.lower_bound,
            "closed_form_lower_bound": self.closed_form_lower_bound,
            "holds": self.holds,
            "reference_figures": {"pairwise_deficiency": REFERENCE_FIGURES["pairwise_deficiency"]},
        }


def _aligned_grid(center: float, half_width: float, step: float) -> Grid:
    bins_per_side = math.ceil(half_width / step - 1e-9)
    return Grid(center - bins_per_side * step, center + bins_per_side * step, step)


def counterexample3_testing_gap(
    thetas: tuple[float, float] = (0.0, 0.1),
    narrow_variance: float = 0.01,
    wide_variance: float = 1.0,
    narrow_step: float = 0.05,
    wide_step: float = 0.5,
) -> PairwiseGapReport:
    """How far the wide family is from simulating the narrow one on the pair.

    Both grids put a bin edge at the midpoint of the two means, where the
    densities cross, so the binned total variations equal their closed forms
    and the contraction bound is exact.
    """
    theta0, theta1 = (float(theta) for theta in thetas)
    center = 0.5 * (theta0 + theta1)
    half_gap = 0.5 * abs(theta1 - theta0)
    narrow_sigma, wide_sigma = math.sqrt(narrow_variance), math.sqrt(wide_variance)

    narrow_grid = _aligned_grid(center, half_gap + (COVERAGE_SIGMAS + 0.5) * narrow_sigma, narrow_step)
    wide_grid = _aligned_grid(center, half_gap + (COVERAGE_SIGMAS + 0.5) * wide_sigma, wide_step)
    narrow = binned_gaussian_experiment(
        GaussianFamilySpec((theta0, theta1), narrow_variance, narrow_grid), "P"
    )
    wide = binned_gaussian_experiment(
        GaussianFamilySpec((theta0, theta1), wide_variance, wide_grid), "Q"
    )

    result = testing_equivalence(wide, narrow)
    closed_form = 0.5 * (
        gaussian_location_tv(theta1 - theta0, narrow_sigma)
        - gaussian_location_tv(theta1 - theta0, wide_sigma)
    )
    return PairwiseGapReport(
        pairwise_deficiency=result.max_pairwise_deficiency,
        argmax_pair=result.argmax_pair,
        tv_narrow=float(tv_distance(narrow.matrix[0], narrow.matrix[1])),
        tv_wide=float(tv_distance(wide.matrix[0], wide.matrix[1])),
        closed_form_lower_bound=closed_form,
    )


# Floor binning of a unit-variance location family


@dataclass(frozen=True)
class FloorBinningReport:
    sufficiency_deviation: float
    sufficient: bool
    likelihood_distortion: float
    max_mean_gap: float

    @property
    def distortion_finite(self) -> bool:
        return math.isfinite(self.likelihood_distortion)

    def as_dict(self) -> dict:
        return {
            "sufficiency_deviation": self.sufficiency_deviation,
            "sufficient": self.sufficient,
            "likelihood_distortion": self.likelihood_distortion,
            "distortion_finite": self.distortion_finite,
            "max_mean_gap": self.max_mean_gap,
            "reference_figures": {"likelihood_distortion": "≈ 2"},
        }


def counterexample1_report(
    grid: Grid = Grid(-4.0, 5.0, 0.25), thetas: Sequence[float] = (0.0, 0.5)
) -> FloorBinningReport:
    """Floor binning of N(theta, 1): not sufficient, yet with finite distortion."""
    units_per_step = 1.0 / grid.step
    if abs(units_per_step - round(units_per_step)) > 1e-9 or abs(grid.lo - round(grid.lo)) > 1e-9:
        raise ValidationError("Floor binning needs an integer lo and a step dividing 1")
    e = binned_gaussian_experiment(GaussianFamilySpec(tuple(thetas), 1.0, grid), "N(theta, 1)")
    t = floor_map(grid)
    sufficiency = check_sufficiency(e, t)
    return FloorBinningReport(
        sufficiency_deviation=sufficiency.max_conditional_deviation,
        sufficient=sufficiency.holds,
        likelihood_distortion=likelihood_distortion(e, t),
        max_mean_gap=float(max(thetas) - min(thetas)),
    )


# Invariance collapse under scaling maps


@dataclass(frozen=True)
class CollapseRow:
    c: float
    invariance_error: float
    source_fidelity: float
    target_fidelity: float
    task_gap: float
    # "optimal" only when every LP behind the row is
    solver_status: str = OPTIMAL

    @property
    def optimal(self) -> bool:
        return self.solver_status == OPTIMAL

    @property
    def nft_holds(self) -> bool:
        return (
            self.source_fidelity + self.target_fidelity + self.invariance_error
            >= self.task_gap - NFT_TOLERANCE
        )

    def as_dict(self) -> dict:
        return {
            "c": self.c,
            "invariance_error": self.invariance_error,
            "source_fidelity": self.source_fidelity,
            "target_fidelity": self.target_fidelity,
            "task_gap": self.task_gap,
            "nft_holds": self.nft_holds,
            "solver_status": self.solver_status,
        }


COLLAPSE_COLUMNS = (
    "c",
    "invariance_error",
    "source_fidelity",
    "target_fidelity",
    "task_gap",
    "nft_holds",
    "solver_status",
)


def invariance_collapse_sweep(
    sigma: float,
    c_values: Sequence[float],
    grid: Grid,
    thetas: Sequence[float] = (-1.0, 0.0, 1.0),
) -> list[CollapseRow]:
    """Scaling representations x -> c x of N(theta, 1) against N(theta, sigma^2)."""
    if not sigma > 1:
        raise ValidationError("The target family needs sigma > 1")
    source = binned_gaussian_experiment(GaussianFamilySpec(tuple(thetas), 1.0, grid), "source")
    target = binned_gaussian_experiment(
        GaussianFamilySpec(tuple(thetas), sigma * sigma, grid), "target"
    )
    maps = [scaling_map(grid, c) for c in c_values]
    gap = deficiency(target, source)

    def row(args):
        c, t = args
        source_rep = apply_kernel(source, t, name="source∘T")
        target_rep = apply_kernel(target, t, name="target∘T")
        source_fidelity = deficiency(source_rep, source)
        target_fidelity = deficiency(target_rep, target)
        statuses = {
            report.solver_status for report in (gap, source_fidelity, target_fidelity)
        }
        return CollapseRow(
            c=float(c),
            invariance_error=float(row_distances(source_rep, target_rep).max()),
            source_fidelity=source_fidelity.value,
            target_fidelity=target_fidelity.value,
            task_gap=gap.value,
            solver_status=OPTIMAL if statuses == {OPTIMAL} else TOLERANCE_LIMITED,
        )

    rows = parallel_map(row, list(zip(c_values, maps)))
    for unsolved in (r for r in rows if not r.optimal):
        logger.warning(f"Collapse row c={unsolved.c:g} is {unsolved.solver_status}")
    logger.info(f"Collapse sweep over {len(rows)} scalings finished (sigma={sigma:g})")
    return rows
