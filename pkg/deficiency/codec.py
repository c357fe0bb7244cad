"""
JSON documents for experiments, kernels, maps, decision problems, rules and
chains, plus the canonical writer used for every machine-readable output.

Output is byte-stable: keys are sorted, reals carry 17 significant digits and
infinities are written as the strings "inf" / "-inf".
"""

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Callable

import numpy as np
from django.core.exceptions import ValidationError
from django.core.serializers.json import DjangoJSONEncoder

from deficiency.composition import ChainSpec
from deficiency.core import DeterministicMap, Distribution, Experiment, Kernel, KernelLike
from deficiency.risk import DETERMINISTIC, RANDOMIZED, DecisionProblem, DecisionRule, FrequencyTable

INDENT = "  "


def format_real(value: float) -> str:
    if math.isnan(value):
        return '"nan"'
    if math.isinf(value):
        return '"inf"' if value > 0 else '"-inf"'
    text = format(value, ".17g")
    if not any(marker in text for marker in ".e"):
        text += ".0"
    return text


def _plain(value: Any) -> Any:
    if hasattr(value, "as_dict"):
        return value.as_dict()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, (tuple, set, frozenset)):
        return list(value) if isinstance(value, tuple) else sorted(value)
    return value


def _encode(value: Any, level: int, out: list[str]) -> None:
    value = _plain(value)
    if value is None or isinstance(value, bool):
        out.append(json.dumps(value))
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, float):
        out.append(format_real(value))
    elif isinstance(value, str):
        out.append(json.dumps(value, ensure_ascii=False))
    elif isinstance(value, dict):
        if not value:
            out.append("{}")
            return
        pad = INDENT * (level + 1)
        out.append("{\n")
        for k, key in enumerate(sorted(value, key=str)):
            out.append(f"{pad}{json.dumps(str(key), ensure_ascii=False)}: ")
            _encode(value[key], level + 1, out)
            out.append(",\n" if k < len(value) - 1 else "\n")
        out.append(INDENT * level + "}")
    elif isinstance(value, list):
        if not value:
            out.append("[]")
        elif all(not isinstance(item, (dict, list, tuple, np.ndarray)) for item in value):
            # scalar rows stay on one line
            parts = []
            for item in value:
                _encode(item, level, parts)
                parts.append(", ")
            out.append("[" + "".join(parts[:-1]) + "]")
        else:
            pad = INDENT * (level + 1)
            out.append("[\n")
            for k, item in enumerate(value):
                out.append(pad)
                _encode(item, level + 1, out)
                out.append(",\n" if k < len(value) - 1 else "\n")
            out.append(INDENT * level + "]")
    else:
        # dates, decimals, UUIDs
        _encode(DjangoJSONEncoder().default(value), level, out)


def dumps(value: Any) -> str:
    """Canonical JSON text for ``value``, terminated by a newline."""
    out: list[str] = []
    _encode(value, 0, out)
    return "".join(out) + "\n"


def loads_document(text: str, source: str = "<input>") -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def load_document(path: str | Path) -> Any:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ValidationError(f"{path}: no such file") from None
    except (OSError, UnicodeDecodeError) as exc:
        raise ValidationError(f"{path}: cannot read ({exc})") from None
    return loads_document(text, str(path))


def _fields(document: Any, what: str, required: tuple[str, ...]) -> dict:
    if not isinstance(document, dict):
        raise ValidationError(f"{what} document must be a JSON object")
    missing = [key for key in required if key not in document]
    if missing:
        raise ValidationError(f"{what} document is missing {', '.join(repr(k) for k in missing)}")
    return document


def _real(value: Any, what: str) -> float:
    if isinstance(value, str) and value in ("inf", "-inf"):
        return float(value)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{what} must be a number, got {value!r}")
    return float(value)


def distribution_from_dict(document: Any) -> Distribution:
    data = _fields(document, "Distribution", ("outcomes", "probs"))
    return Distribution(tuple(data["outcomes"]), data["probs"])


def experiment_from_dict(document: Any) -> Experiment:
    data = _fields(document, "Experiment", ("parameters", "outcomes", "rows"))
    return Experiment(
        data.get("name", "experiment"), tuple(data["parameters"]), tuple(data["outcomes"]), data["rows"]
    )


def kernel_from_dict(document: Any) -> Kernel:
    data = _fields(document, "Kernel", ("from_outcomes", "to_outcomes", "matrix"))
    return Kernel(tuple(data["from_outcomes"]), tuple(data["to_outcomes"]), data["matrix"])


def map_from_dict(document: Any) -> DeterministicMap:
    data = _fields(document, "Map", ("mapping",))
    if not isinstance(data["mapping"], dict):
        raise ValidationError("Map 'mapping' must be a JSON object")
    return DeterministicMap(data["mapping"], tuple(data.get("to_outcomes", ())))


def representation_from_dict(document: Any) -> KernelLike:
    """A deterministic map or a full kernel, told apart by their keys."""
    if isinstance(document, dict) and "mapping" in document:
        return map_from_dict(document)
    return kernel_from_dict(document)


def problem_from_dict(document: Any) -> DecisionProblem:
    data = _fields(document, "Decision problem", ("actions", "loss"))
    bounds = data.get("bounds", (0.0, 1.0))
    if not isinstance(bounds, (list, tuple)) or len(bounds) != 2:
        raise ValidationError("Decision problem 'bounds' must be a pair [a, b]")
    return DecisionProblem(
        tuple(data["actions"]), data["loss"], tuple(_real(b, "Loss bound") for b in bounds)
    )


def rule_from_dict(document: Any) -> DecisionRule:
    data = _fields(document, "Decision rule", ("kind",))
    if data["kind"] == DETERMINISTIC:
        data = _fields(data, "Deterministic rule", ("outcomes", "actions", "mapping"))
        return DecisionRule.deterministic(data["mapping"], data["outcomes"], data["actions"])
    if data["kind"] == RANDOMIZED:
        data = _fields(data, "Randomized rule", ("kernel",))
        return DecisionRule.randomized(kernel_from_dict(data["kernel"]))
    raise ValidationError(f"Unknown decision rule kind {data['kind']!r}")


def chain_from_dict(document: Any) -> ChainSpec:
    data = _fields(document, "Chain", ("base", "ideal", "approx"))
    if not isinstance(data["ideal"], list) or not isinstance(data["approx"], list):
        raise ValidationError("Chain 'ideal' and 'approx' must be lists of kernels")
    per_step_eps = data.get("per_step_eps") or ()
    return ChainSpec(
        experiment_from_dict(data["base"]),
        tuple(kernel_from_dict(kernel) for kernel in data["ideal"]),
        tuple(kernel_from_dict(kernel) for kernel in data["approx"]),
        tuple(_real(eps, "per_step_eps entry") for eps in per_step_eps),
    )


def table_from_dict(document: Any) -> FrequencyTable:
    """A frequency table, or an experiment read as exact frequencies."""
    if isinstance(document, dict) and "rows" in document and "counts" not in document:
        return FrequencyTable.from_experiment(experiment_from_dict(document))
    data = _fields(document, "Frequency table", ("parameters", "outcomes", "counts"))
    return FrequencyTable(tuple(data["parameters"]), tuple(data["outcomes"]), data["counts"])


def table_as_dict(table: FrequencyTable) -> dict:
    return {
        "parameters": list(table.parameters),
        "outcomes": list(table.outcomes),
        "counts": table.counts.tolist(),
    }


READERS: dict[str, Callable[[Any], Any]] = {
    "distribution": distribution_from_dict,
    "experiment": experiment_from_dict,
    "kernel": kernel_from_dict,
    "map": map_from_dict,
    "representation": representation_from_dict,
    "problem": problem_from_dict,
    "rule": rule_from_dict,
    "chain": chain_from_dict,
    "table": table_from_dict,
}


def _reader(kind: str) -> Callable[[Any], Any]:
    try:
        return READERS[kind]
    except KeyError:
        raise ValidationError(f"Unknown document kind {kind!r}") from None


def parse(text: str, kind: str, source: str = "<input>") -> Any:
    return _reader(kind)(loads_document(text, source))


def read(path: str | Path, kind: str) -> Any:
    reader = _reader(kind)
    document = load_document(path)
    try:
        return reader(document)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {'; '.join(exc.messages)}") from None


def csv_cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_real(value).strip('"')
    return str(value)


def csv_table(columns, rows: list[dict]) -> str:
    """RFC 4180 table with the same real formatting as the JSON writer."""
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(columns)
    for row in rows:
        writer.writerow([csv_cell(row[column]) for column in columns])
    return buffer.getvalue()


def serialize(value: Any) -> str:
    if isinstance(value, FrequencyTable):
        return dumps(table_as_dict(value))
    return dumps(value)
