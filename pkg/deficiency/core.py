"""
Finite statistical experiments, Markov kernels and the experiment algebra.

Every type here is immutable once built: label tuples are validated, the
probability matrix is copied into a read-only float64 array, and all
operations return new objects.
"""

import logging
from dataclasses import dataclass
from types import MappingProxyType
from typing import Callable, Iterable, Mapping, Sequence, Union

import numpy as np
from django.core.exceptions import ValidationError

from deficiency.exceptions import DimensionError

logger = logging.getLogger(__name__)

PROBABILITY_TOLERANCE = 1e-9

# Rows already this close to 1 are stored untouched, so serialized values
# read back bit-exactly. Rows between this and PROBABILITY_TOLERANCE are
# renormalized.
EXACT_SUM_TOLERANCE = 1e-12


def validate_labels(values: Iterable, what: str) -> tuple[str, ...]:
    labels = tuple(str(value) for value in values)
    if len(set(labels)) != len(labels):
        seen, duplicates = set(), []
        for label in labels:
            if label in seen and label not in duplicates:
                duplicates.append(label)
            seen.add(label)
        raise ValidationError(f"Duplicate {what} labels: {', '.join(duplicates)}")
    return labels


def _stochastic_rows(values, n_rows: int, n_cols: int, what: str) -> np.ndarray:
    """Validate a row-stochastic matrix and return a read-only copy."""
    try:
        matrix = np.array(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise DimensionError(f"{what}: rows are ragged or non-numeric ({exc})") from exc

    if matrix.shape != (n_rows, n_cols):
        raise DimensionError(
            f"{what}: matrix has shape {matrix.shape}, expected ({n_rows}, {n_cols})"
        )
    if not np.all(np.isfinite(matrix)):
        raise ValidationError(f"{what}: probabilities must be finite")
    if np.any(matrix < 0):
        raise ValidationError(f"{what}: probabilities must be non-negative")

    sums = matrix.sum(axis=1)
    offsets = np.abs(sums - 1.0)
    if np.any(offsets > PROBABILITY_TOLERANCE):
        row = int(np.argmax(offsets))
        raise ValidationError(
            f"{what}: row {row} sums to {sums[row]!r}, "
            f"outside 1 ± {PROBABILITY_TOLERANCE:g}"
        )
    drifted = offsets > EXACT_SUM_TOLERANCE
    if np.any(drifted):
        logger.debug(f"{what}: renormalizing {int(drifted.sum())} row(s)")
        matrix[drifted] /= sums[drifted, None]

    matrix.setflags(write=False)
    return matrix


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability vector over a named finite outcome set."""

    outcomes: tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self):
        outcomes = validate_labels(self.outcomes, "outcome")
        probs = _stochastic_rows([self.probs], 1, len(outcomes), "Distribution")[0]
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "probs", probs)

    def __eq__(self, other):
        if not isinstance(other, Distribution):
            return NotImplemented
        return self.outcomes == other.outcomes and np.array_equal(self.probs, other.probs)

    def __hash__(self):
        return hash((self.outcomes, self.probs.tobytes()))

    def __getitem__(self, outcome: str) -> float:
        return float(self.probs[self.outcomes.index(outcome)])

    def as_dict(self) -> dict:
        return {"outcomes": list(self.outcomes), "probs": self.probs.tolist()}


@dataclass(frozen=True, eq=False)
class Experiment:
    """Finite parameter set plus one distribution per parameter.

    ``matrix[i, j]`` is the probability of ``outcomes[j]`` under
    ``parameters[i]``.
    """

    name: str
    parameters: tuple[str, ...]
    outcomes: tuple[str, ...]
    matrix: np.ndarray

    def __post_init__(self):
        parameters = validate_labels(self.parameters, "parameter")
        if not parameters:
            raise ValidationError("An experiment needs at least one parameter")
        outcomes = validate_labels(self.outcomes, "outcome")
        matrix = _stochastic_rows(
            self.matrix, len(parameters), len(outcomes), f"Experiment {self.name!r}"
        )
        object.__setattr__(self, "name", str(self.name))
        object.__setattr__(self, "parameters", parameters)
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def from_rows(cls, name: str, parameters: Sequence[str], rows: Sequence[Distribution]):
        if len(rows) != len(parameters):
            raise DimensionError(
                f"Experiment {name!r}: {len(parameters)} parameters but {len(rows)} rows"
            )
        outcomes = rows[0].outcomes if rows else ()
        for row in rows:
            if row.outcomes != outcomes:
                raise DimensionError(f"Experiment {name!r}: rows use different outcome lists")
        return cls(name, tuple(parameters), outcomes, [row.probs for row in rows])

    def __eq__(self, other):
        if not isinstance(other, Experiment):
            return NotImplemented
        return (
            self.name == other.name
            and self.parameters == other.parameters
            and self.outcomes == other.outcomes
            and np.array_equal(self.matrix, other.matrix)
        )

    def __hash__(self):
        return hash((self.name, self.parameters, self.outcomes, self.matrix.tobytes()))

    def __repr__(self):
        return (
            f"Experiment({self.name!r}, {len(self.parameters)} parameters, "
            f"{len(self.outcomes)} outcomes)"
        )

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "parameters": list(self.parameters),
            "outcomes": list(self.outcomes),
            "rows": self.matrix.tolist(),
        }

    @property
    def rows(self) -> tuple[Distribution, ...]:
        return tuple(Distribution(self.outcomes, row) for row in self.matrix)

    def parameter_index(self, parameter: str) -> int:
        try:
            return self.parameters.index(str(parameter))
        except ValueError:
            raise ValidationError(
                f"Unknown parameter {parameter!r} for experiment {self.name!r}"
            ) from None

    def row(self, parameter: str) -> Distribution:
        return Distribution(self.outcomes, self.matrix[self.parameter_index(parameter)])

    def restrict(self, parameters: Sequence[str]) -> "Experiment":
        """Sub-experiment on a subset of the parameters, in the given order."""
        indices = [self.parameter_index(parameter) for parameter in parameters]
        return Experiment(
            self.name, tuple(parameters), self.outcomes, self.matrix[indices]
        )

    def renamed(self, name: str) -> "Experiment":
        return Experiment(name, self.parameters, self.outcomes, self.matrix)


@dataclass(frozen=True, eq=False)
class Kernel:
    """Row-stochastic matrix from one outcome set to another."""

    from_outcomes: tuple[str, ...]
    to_outcomes: tuple[str, ...]
    matrix: np.ndarray

    def __post_init__(self):
        from_outcomes = validate_labels(self.from_outcomes, "outcome")
        to_outcomes = validate_labels(self.to_outcomes, "outcome")
        matrix = _stochastic_rows(self.matrix, len(from_outcomes), len(to_outcomes), "Kernel")
        object.__setattr__(self, "from_outcomes", from_outcomes)
        object.__setattr__(self, "to_outcomes", to_outcomes)
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def identity(cls, outcomes: Sequence[str]) -> "Kernel":
        return cls(tuple(outcomes), tuple(outcomes), np.eye(len(outcomes)))

    @classmethod
    def constant(
        cls, from_outcomes: Sequence[str], to_outcomes: Sequence[str], probs
    ) -> "Kernel":
        """Kernel that ignores its input and always emits ``probs``."""
        probs = np.asarray(probs, dtype=float)
        return cls(
            tuple(from_outcomes), tuple(to_outcomes), np.tile(probs, (len(from_outcomes), 1))
        )

    def __eq__(self, other):
        if not isinstance(other, Kernel):
            return NotImplemented
        return (
            self.from_outcomes == other.from_outcomes
            and self.to_outcomes == other.to_outcomes
            and np.array_equal(self.matrix, other.matrix)
        )

    def __hash__(self):
        return hash((self.from_outcomes, self.to_outcomes, self.matrix.tobytes()))

    def __repr__(self):
        return f"Kernel({len(self.from_outcomes)} -> {len(self.to_outcomes)})"

    def as_dict(self) -> dict:
        return {
            "from_outcomes": list(self.from_outcomes),
            "to_outcomes": list(self.to_outcomes),
            "matrix": self.matrix.tolist(),
        }

    def is_deterministic(self) -> bool:
        return bool(np.all((self.matrix == 0.0) | (self.matrix == 1.0)))

    def as_map(self) -> "DeterministicMap":
        if not self.is_deterministic():
            raise ValidationError("Kernel has randomized rows and is not a deterministic map")
        images = np.argmax(self.matrix, axis=1)
        return DeterministicMap(
            {x: self.to_outcomes[j] for x, j in zip(self.from_outcomes, images)},
            self.to_outcomes,
        )


@dataclass(frozen=True, eq=False)
class DeterministicMap:
    """Total map between outcome labels, i.e. a kernel with 0/1 rows."""

    mapping: Mapping[str, str]
    to_outcomes: tuple[str, ...] = ()

    def __post_init__(self):
        mapping = {str(key): str(value) for key, value in dict(self.mapping).items()}
        if self.to_outcomes:
            to_outcomes = validate_labels(self.to_outcomes, "outcome")
        else:
            to_outcomes = tuple(dict.fromkeys(mapping.values()))
        unknown = sorted(set(mapping.values()) - set(to_outcomes))
        if unknown:
            raise ValidationError(f"Map images not in target outcomes: {', '.join(unknown)}")
        object.__setattr__(self, "mapping", MappingProxyType(mapping))
        object.__setattr__(self, "to_outcomes", to_outcomes)

    @classmethod
    def from_function(
        cls, from_outcomes: Sequence[str], function: Callable[[str], str], to_outcomes=()
    ) -> "DeterministicMap":
        return cls({x: function(x) for x in from_outcomes}, tuple(to_outcomes))

    def __eq__(self, other):
        if not isinstance(other, DeterministicMap):
            return NotImplemented
        return dict(self.mapping) == dict(other.mapping) and self.to_outcomes == other.to_outcomes

    def __hash__(self):
        return hash((tuple(sorted(self.mapping.items())), self.to_outcomes))

    def as_dict(self) -> dict:
        return {"mapping": dict(self.mapping), "to_outcomes": list(self.to_outcomes)}

    def __call__(self, outcome: str) -> str:
        return self.mapping[outcome]

    def check_total(self, from_outcomes: Sequence[str]) -> None:
        missing = [x for x in from_outcomes if x not in self.mapping]
        if missing:
            raise ValidationError(f"Partial map: no image for {', '.join(missing)}")

    def to_kernel(self, from_outcomes: Sequence[str]) -> Kernel:
        self.check_total(from_outcomes)
        column = {label: j for j, label in enumerate(self.to_outcomes)}
        matrix = np.zeros((len(from_outcomes), len(self.to_outcomes)))
        for i, x in enumerate(from_outcomes):
            matrix[i, column[self.mapping[x]]] = 1.0
        return Kernel(tuple(from_outcomes), self.to_outcomes, matrix)

    def preimage(self, image: str, from_outcomes: Sequence[str]) -> list[str]:
        return [x for x in from_outcomes if self.mapping[x] == image]

    def is_injective(self, from_outcomes: Sequence[str]) -> bool:
        images = [self.mapping[x] for x in from_outcomes]
        return len(set(images)) == len(images)

    def inverse(self, from_outcomes: Sequence[str]) -> "DeterministicMap":
        """Inverse of a bijection between ``from_outcomes`` and ``to_outcomes``."""
        self.check_total(from_outcomes)
        if not self.is_injective(from_outcomes) or len(from_outcomes) != len(self.to_outcomes):
            raise ValidationError("Only a bijection has an inverse map")
        return DeterministicMap({self.mapping[x]: x for x in from_outcomes}, tuple(from_outcomes))


KernelLike = Union[Kernel, DeterministicMap]


def as_kernel(t: KernelLike, from_outcomes: Sequence[str]) -> Kernel:
    if isinstance(t, DeterministicMap):
        return t.to_kernel(from_outcomes)
    return t


def tv_distance(a, b):
    """Half-L1 distance along the last axis of two probability arrays."""
    return 0.5 * np.abs(np.asarray(a) - np.asarray(b)).sum(axis=-1)


def total_variation(p: Distribution, q: Distribution) -> float:
    """Total variation distance, normalized to [0, 1]."""
    if p.outcomes != q.outcomes:
        raise DimensionError("Distributions are defined on different outcome lists")
    return float(tv_distance(p.probs, q.probs))


def check_same_parameters(e: Experiment, f: Experiment) -> None:
    if e.parameters != f.parameters:
        raise DimensionError(
            f"Parameter lists differ: {e.name!r} has {list(e.parameters)}, "
            f"{f.name!r} has {list(f.parameters)}"
        )


def row_distances(e: Experiment, f: Experiment) -> np.ndarray:
    """Per-parameter total variation between two experiments on one outcome list."""
    check_same_parameters(e, f)
    if e.outcomes != f.outcomes:
        raise DimensionError(f"{e.name!r} and {f.name!r} use different outcome lists")
    return tv_distance(e.matrix, f.matrix)


def apply_kernel(e: Experiment, t: KernelLike, name: str | None = None) -> Experiment:
    """Push every row of ``e`` through ``t``."""
    t = as_kernel(t, e.outcomes)
    if e.outcomes != t.from_outcomes:
        raise DimensionError(
            f"Kernel input outcomes do not match the outcomes of {e.name!r}"
        )
    return Experiment(
        name or f"{e.name}∘T", e.parameters, t.to_outcomes, e.matrix @ t.matrix
    )


def compose_kernels(t1: Kernel, t2: Kernel) -> Kernel:
    """Run ``t1`` then ``t2``."""
    if t1.to_outcomes != t2.from_outcomes:
        raise DimensionError("Kernels do not chain: output of the first is not input of the second")
    return Kernel(t1.from_outcomes, t2.to_outcomes, t1.matrix @ t2.matrix)


def point_mass_experiment(
    instances: Sequence[str],
    solution: Mapping[str, str] | Callable[[str], str],
    name: str = "point-mass",
    outcomes: Sequence[str] = (),
) -> Experiment:
    """Experiment whose row for each instance is a unit mass on its solution."""
    instances = validate_labels(instances, "instance")
    lookup = solution if callable(solution) else solution.__getitem__
    try:
        answers = [str(lookup(x)) for x in instances]
    except KeyError as exc:
        raise ValidationError(f"Solution is not defined for instance {exc.args[0]!r}") from None
    outcomes = validate_labels(outcomes, "outcome") if outcomes else tuple(dict.fromkeys(answers))
    column = {label: j for j, label in enumerate(outcomes)}
    matrix = np.zeros((len(instances), len(outcomes)))
    for i, answer in enumerate(answers):
        if answer not in column:
            raise ValidationError(f"Solution {answer!r} is not among the declared outcomes")
        matrix[i, column[answer]] = 1.0
    return Experiment(name, instances, outcomes, matrix)
