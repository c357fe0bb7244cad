"""
Deterministic reductions between problems, checked as zero-deficiency simulations.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from django.core.exceptions import ValidationError

from deficiency.comparison import deficiency, kernel_simulation_error
from deficiency.core import DeterministicMap, point_mass_experiment, validate_labels

logger = logging.getLogger(__name__)

Lookup = Mapping[str, str] | Callable[[str], str]


def _call(lookup: Lookup, key: str, what: str) -> str:
    try:
        return str(lookup(key) if callable(lookup) else lookup[key])
    except KeyError:
        raise ValidationError(f"{what} is not defined for {key!r}") from None


@dataclass(frozen=True)
class ReductionReport:
    consistent: bool
    mismatches: tuple[str, ...]
    witness_error: float
    deficiency: float

    def as_dict(self) -> dict:
        return {
            "consistent": self.consistent,
            "mismatches": list(self.mismatches),
            "witness_error": self.witness_error,
            "deficiency": self.deficiency,
        }


def karp_reduction(
    instances: Sequence[str],
    solution_a: Lookup,
    instance_map: Lookup,
    solution_b: Lookup,
    answer_map: Lookup | None = None,
) -> ReductionReport:
    """Check that solving B on mapped instances reproduces the answers of A.

    The A-side experiment has a unit mass on each instance's answer. The
    B-side experiment, indexed by the same instances, has a unit mass on the
    B-answer of the mapped instance. ``answer_map`` (identity by default)
    translates B-answers back and is the deterministic witness kernel; a
    valid reduction gives zero witness error and zero deficiency.
    """
    instances = validate_labels(instances, "instance")
    answers_a = {x: _call(solution_a, x, "Solution of A") for x in instances}
    answers_b = {
        x: _call(solution_b, _call(instance_map, x, "Instance map"), "Solution of B")
        for x in instances
    }
    problem_a = point_mass_experiment(instances, answers_a, name="problem A")
    problem_b = point_mass_experiment(instances, answers_b, name="problem B on mapped instances")

    translate = answer_map if answer_map is not None else (lambda answer: answer)
    witness = DeterministicMap(
        {y: _call(translate, y, "Answer map") for y in problem_b.outcomes}
    )
    unknown = set(witness.to_outcomes) - set(problem_a.outcomes)
    if unknown:
        # answers A never produces; give them a column so the kernel is well formed
        problem_a = point_mass_experiment(
            instances,
            answers_a,
            name="problem A",
            outcomes=problem_a.outcomes + tuple(sorted(unknown)),
        )
    witness = DeterministicMap(dict(witness.mapping), problem_a.outcomes)

    mismatches = tuple(x for x in instances if witness(answers_b[x]) != answers_a[x])
    report = ReductionReport(
        consistent=not mismatches,
        mismatches=mismatches,
        witness_error=kernel_simulation_error(problem_b, problem_a, witness),
        deficiency=deficiency(problem_b, problem_a).value,
    )
    if mismatches:
        logger.info(f"Reduction disagrees on {len(mismatches)} instance(s)")
    return report
