"""
Channel coding over the binary symmetric channel, read as experiment simulation.

A codebook turns messages into point masses on codewords; pushing those
through the n-fold channel gives the source experiment, and a decoder is a
kernel back onto messages. The decoder's worst-message error probability is
exactly its simulation error against the point-mass experiment on messages.
"""

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from django.conf import settings
from django.core.exceptions import ValidationError

from deficiency.comparison import DeficiencyReport, deficiency
from deficiency.core import (
    Experiment,
    Kernel,
    apply_kernel,
    point_mass_experiment,
    tv_distance,
)
from deficiency.exceptions import DimensionError, GuardError, PropertyFailure
from deficiency.risk import DETERMINISTIC, DecisionRule

logger = logging.getLogger(__name__)

BINARY_SYMMETRIC = "binary-symmetric"
MAX_BLOCKLENGTH = 16
IDENTITY_TOLERANCE = 1e-12
SEARCH_CHUNK = 1 << 16


@dataclass(frozen=True)
class ChannelSpec:
    crossover: float
    blocklength: int
    kind: str = BINARY_SYMMETRIC

    def __post_init__(self):
        if self.kind != BINARY_SYMMETRIC:
            raise ValidationError(f"Unsupported channel kind {self.kind!r}")
        p = float(self.crossover)
        if not 0.0 <= p <= 0.5:
            raise ValidationError(f"Crossover probability must lie in [0, 0.5], got {p}")
        if int(self.blocklength) != self.blocklength or self.blocklength < 1:
            raise ValidationError(f"Blocklength must be a positive integer, got {self.blocklength}")
        if self.blocklength > MAX_BLOCKLENGTH:
            raise GuardError(
                f"Blocklength {self.blocklength} gives more than 2^{MAX_BLOCKLENGTH} channel outputs"
            )
        object.__setattr__(self, "crossover", p)
        object.__setattr__(self, "blocklength", int(self.blocklength))

    @property
    def words(self) -> tuple[str, ...]:
        """All n-bit strings in lexicographic order."""
        n = self.blocklength
        return tuple(format(k, f"0{n}b") for k in range(2**n))


@dataclass(frozen=True)
class Codebook:
    codewords: tuple[str, ...]
    messages: tuple[str, ...] = ()

    def __post_init__(self):
        codewords = tuple(str(word) for word in self.codewords)
        if not codewords:
            raise ValidationError("A codebook needs at least one codeword")
        n = len(codewords[0])
        if n == 0 or any(len(word) != n or set(word) - {"0", "1"} for word in codewords):
            raise ValidationError("Codewords must be non-empty bit strings of one length")
        if len(set(codewords)) != len(codewords):
            raise ValidationError("Codewords must be distinct")
        messages = tuple(self.messages) or tuple(f"m{k}" for k in range(len(codewords)))
        if len(messages) != len(codewords):
            raise DimensionError(f"{len(messages)} messages for {len(codewords)} codewords")
        object.__setattr__(self, "codewords", codewords)
        object.__setattr__(self, "messages", messages)

    @property
    def blocklength(self) -> int:
        return len(self.codewords[0])

    @property
    def size(self) -> int:
        return len(self.codewords)

    @property
    def rate(self) -> float:
        return math.log2(self.size) / self.blocklength


def repetition_codebook(n: int) -> Codebook:
    return Codebook(("0" * n, "1" * n))


def _check_blocklength(cb: Codebook, spec: ChannelSpec) -> None:
    if cb.blocklength != spec.blocklength:
        raise DimensionError(
            f"Codewords have length {cb.blocklength} but the channel blocklength is {spec.blocklength}"
        )


def _hamming(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """Pairwise Hamming distances between integer-coded n-bit words."""
    xor = np.bitwise_xor(a[:, None], b[None, :])
    return sum((xor >> bit) & 1 for bit in range(n))


def _channel_rows(spec: ChannelSpec, inputs: np.ndarray) -> np.ndarray:
    n, p = spec.blocklength, spec.crossover
    distances = _hamming(inputs, np.arange(2**n), n)
    return p**distances * (1.0 - p) ** (n - distances)


def _codeword_indices(cb: Codebook) -> np.ndarray:
    return np.array([int(word, 2) for word in cb.codewords])


def bsc_kernel(spec: ChannelSpec) -> Kernel:
    """The n-fold product of the single-bit BSC as a kernel on n-bit strings."""
    words = spec.words
    return Kernel(words, words, _channel_rows(spec, np.arange(len(words))))


def coding_experiments(cb: Codebook, spec: ChannelSpec) -> tuple[Experiment, Experiment]:
    """Channel outputs per message, and the point-mass experiment on messages."""
    _check_blocklength(cb, spec)
    source = Experiment(
        "channel output", cb.messages, spec.words, _channel_rows(spec, _codeword_indices(cb))
    )
    target = point_mass_experiment(
        cb.messages, dict(zip(cb.messages, cb.messages)), name="message", outcomes=cb.messages
    )
    return source, target


def _decoder_from_choices(cb: Codebook, spec: ChannelSpec, choices: np.ndarray) -> DecisionRule:
    matrix = np.zeros((2**spec.blocklength, cb.size))
    matrix[np.arange(matrix.shape[0]), choices] = 1.0
    return DecisionRule(DETERMINISTIC, Kernel(spec.words, cb.messages, matrix))


def ml_decoder(cb: Codebook, spec: ChannelSpec) -> DecisionRule:
    """Maximum-likelihood decoder; ties go to the lowest message index."""
    _check_blocklength(cb, spec)
    likelihoods = _channel_rows(spec, _codeword_indices(cb))
    return _decoder_from_choices(cb, spec, np.argmax(likelihoods, axis=0))


def majority_decoder(cb: Codebook) -> DecisionRule:
    """Minimum Hamming distance decoding, which is majority vote for repetition codes.

    It does not depend on the crossover probability, so a pure-noise channel
    still gets a symmetric decoder.
    """
    spec = ChannelSpec(0.0, cb.blocklength)
    distances = _hamming(_codeword_indices(cb), np.arange(2**cb.blocklength), cb.blocklength)
    return _decoder_from_choices(cb, spec, np.argmin(distances, axis=0))


@dataclass(frozen=True)
class CodingDeficiency:
    deficiency: float
    max_error: float
    average_error: float
    per_message_errors: tuple[float, ...]

    def as_dict(self) -> dict:
        return {
            "deficiency": self.deficiency,
            "max_error": self.max_error,
            "average_error": self.average_error,
            "per_message_errors": list(self.per_message_errors),
        }


def coding_deficiency(cb: Codebook, spec: ChannelSpec, decoder: DecisionRule) -> CodingDeficiency:
    """Simulation error of ``decoder`` against the message experiment.

    Raises PropertyFailure when it disagrees with the worst-message error
    probability, which it must match since TV to a point mass is the miss
    probability.
    """
    source, target = coding_experiments(cb, spec)
    if decoder.outcomes != source.outcomes or decoder.actions != target.outcomes:
        raise DimensionError("Decoder must map every n-bit word to a message")
    decoded = apply_kernel(source, decoder.kernel, name="decoded")
    simulation_error = float(tv_distance(decoded.matrix, target.matrix).max())
    errors = 1.0 - np.diag(decoded.matrix)
    result = CodingDeficiency(
        simulation_error, float(errors.max()), float(errors.mean()), tuple(errors.tolist())
    )
    if abs(result.deficiency - result.max_error) > IDENTITY_TOLERANCE:
        logger.error(
            f"Coding identity broken: deficiency {result.deficiency!r} vs "
            f"max error {result.max_error!r}"
        )
        raise PropertyFailure("Coding deficiency differs from the maximum message error", result)
    return result


def lp_coding_deficiency(cb: Codebook, spec: ChannelSpec) -> DeficiencyReport:
    """Deficiency over all decoders, randomized ones included."""
    source, target = coding_experiments(cb, spec)
    return deficiency(source, target)


def best_deterministic_decoder(
    cb: Codebook, spec: ChannelSpec, criterion: str = "max"
) -> tuple[DecisionRule, float]:
    """Exhaustive search over all M^(2^n) deterministic decoders.

    ``criterion`` is ``"max"`` for the worst-message error or ``"average"``.
    Ties keep the first decoder in lexicographic order of its choices.
    """
    if criterion not in ("max", "average"):
        raise ValidationError(f"Unknown decoder criterion {criterion!r}")
    _check_blocklength(cb, spec)
    n_words, n_messages = 2**spec.blocklength, cb.size
    total = n_messages**n_words
    limit = settings.LECAM_RULE_ENUMERATION_LIMIT
    if total > limit:
        raise GuardError(f"Refusing to search {total} decoders (limit {limit})")

    rows = _channel_rows(spec, _codeword_indices(cb))
    place = n_messages ** np.arange(n_words - 1, -1, -1)
    best_error, best_index = math.inf, 0
    for start in range(0, total, SEARCH_CHUNK):
        index = np.arange(start, min(start + SEARCH_CHUNK, total))
        choices = (index[:, None] // place[None, :]) % n_messages
        success = np.stack(
            [(rows[m][None, :] * (choices == m)).sum(axis=1) for m in range(n_messages)],
            axis=1,
        )
        errors = 1.0 - success
        scores = errors.max(axis=1) if criterion == "max" else errors.mean(axis=1)
        k = int(np.argmin(scores))
        if scores[k] < best_error:
            best_error, best_index = float(scores[k]), int(index[k])

    choices = (best_index // place) % n_messages
    return _decoder_from_choices(cb, spec, choices), best_error


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def bsc_capacity(p: float) -> float:
    return 1.0 - binary_entropy(p)


SWEEP_COLUMNS = ("n", "rate", "Pe", "Pe_average", "capacity")


def repetition_sweep(p: float, n_values: Sequence[int]) -> list[dict]:
    """Worst-message error of majority-decoded repetition codes of odd lengths."""
    if not n_values:
        raise ValidationError("At least one blocklength is required")
    if any(int(n) != n or n < 1 or n % 2 == 0 for n in n_values):
        raise ValidationError("Repetition blocklengths must be odd positive integers")

    rows = []
    for n in n_values:
        cb, spec = repetition_codebook(int(n)), ChannelSpec(p, int(n))
        result = coding_deficiency(cb, spec, majority_decoder(cb))
        rows.append(
            {
                "n": int(n),
                "rate": cb.rate,
                "Pe": result.deficiency,
                "Pe_average": result.average_error,
                "capacity": bsc_capacity(spec.crossover),
            }
        )
        logger.debug(f"Repetition n={n}, p={p}: Pe={result.deficiency:.6g}")

    if 0.0 < p < 0.5:
        ordered = sorted(rows, key=lambda row: row["n"])
        for shorter, longer in zip(ordered, ordered[1:]):
            if shorter["n"] < longer["n"] and not longer["Pe"] < shorter["Pe"]:
                logger.error(f"Repetition error did not decrease from n={shorter['n']} to n={longer['n']}")
                raise PropertyFailure("Repetition error is not strictly decreasing in n", rows)
    return rows
