"""JSON/CSV formats for operators, potentials and analysis results.

Operator document::

    {"diagonal": {"kind": "constant", "value": 0.0},
     "bands": {"1": {"kind": "constant", "value": 1.0}},
     "filtration": "bilateral"}

Diagonal kinds: ``constant`` (value), ``periodic`` (values), ``cosine``
(amplitude, frequency, phase), ``schrodinger`` (potential, sigma) and
``table`` (values, start, default).  A potential is a list of terms
``{"poly": [c0, c1, ...]}`` or ``{"cos": {"amp": .., "freq": .., "phase": ..}}``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from typing import Any

import numpy as np

from .operator_model import (
    BandOperatorSpec,
    Constant,
    Cosine,
    CosineTerm,
    DiagonalSequence,
    Filtration,
    Periodic,
    Polynomial,
    Potential,
    Schrodinger,
    Table,
)
from .spectral_analysis import ClassificationReport

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """A document does not match the expected schema."""


def _number(doc: dict, key: str, default: float | None = None) -> float:
    if key not in doc:
        if default is None:
            raise ConfigError(f"missing field {key!r}")
        return default
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"field {key!r} must be a number")
    return float(value)


def _numbers(doc: dict, key: str) -> list[float]:
    value = doc.get(key)
    if not isinstance(value, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        raise ConfigError(f"field {key!r} must be a list of numbers")
    return [float(v) for v in value]


# ---------------------------------------------------------------------------
# potentials


def potential_from_json(doc: Any) -> Potential:
    if not isinstance(doc, list):
        raise ConfigError("potential must be a list of terms")
    terms = []
    for term in doc:
        if not isinstance(term, dict) or len(term) != 1:
            raise ConfigError("each potential term must be {'poly': [...]} or {'cos': {...}}")
        if "poly" in term:
            terms.append(Polynomial(tuple(_numbers(term, "poly"))))
        elif "cos" in term:
            c = term["cos"]
            if not isinstance(c, dict):
                raise ConfigError("'cos' term must be an object")
            terms.append(
                CosineTerm(_number(c, "amp"), _number(c, "freq"), _number(c, "phase", 0.0))
            )
        else:
            raise ConfigError(f"unknown potential term {next(iter(term))!r}")
    return Potential(tuple(terms))


def potential_to_json(pot: Potential) -> list:
    out = []
    for term in pot.terms:
        if isinstance(term, Polynomial):
            out.append({"poly": list(term.coefficients)})
        else:
            out.append({"cos": {"amp": term.amplitude, "freq": term.frequency, "phase": term.phase}})
    return out


# ---------------------------------------------------------------------------
# sequences and operators


def sequence_from_json(doc: Any) -> DiagonalSequence:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ConfigError("a diagonal sequence must be an object with a 'kind'")
    kind = doc["kind"]
    if kind == "constant":
        return Constant(_number(doc, "value"))
    if kind == "periodic":
        values = _numbers(doc, "values")
        if not values:
            raise ConfigError("periodic 'values' must be nonempty")
        return Periodic(tuple(values))
    if kind == "cosine":
        return Cosine(_number(doc, "amplitude"), _number(doc, "frequency"), _number(doc, "phase", 0.0))
    if kind == "schrodinger":
        try:
            return Schrodinger(potential_from_json(doc.get("potential")), _number(doc, "sigma"))
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from None
    if kind == "table":
        start = doc.get("start", 1)
        if isinstance(start, bool) or not isinstance(start, int):
            raise ConfigError("table 'start' must be an integer")
        return Table(tuple(_numbers(doc, "values")), start, _number(doc, "default", 0.0))
    raise ConfigError(f"unknown sequence kind {kind!r}")


def sequence_to_json(seq: DiagonalSequence) -> dict:
    if isinstance(seq, Constant):
        return {"kind": "constant", "value": float(seq.c)}
    if isinstance(seq, Periodic):
        return {"kind": "periodic", "values": list(seq.pattern)}
    if isinstance(seq, Cosine):
        return {
            "kind": "cosine",
            "amplitude": float(seq.amplitude),
            "frequency": float(seq.frequency),
            "phase": float(seq.phase),
        }
    if isinstance(seq, Schrodinger):
        return {
            "kind": "schrodinger",
            "potential": potential_to_json(seq.potential),
            "sigma": float(seq.sigma),
        }
    if isinstance(seq, Table):
        return {"kind": "table", "values": list(seq.entries), "start": seq.start, "default": seq.default}
    raise TypeError(f"cannot serialise {type(seq).__name__}")


def spec_from_json(doc: Any) -> tuple[BandOperatorSpec, Filtration]:
    if not isinstance(doc, dict) or "diagonal" not in doc:
        raise ConfigError("operator document needs a 'diagonal'")
    diagonal = sequence_from_json(doc["diagonal"])
    bands_doc = doc.get("bands", {"1": {"kind": "constant", "value": 1.0}})
    if not isinstance(bands_doc, dict):
        raise ConfigError("'bands' must be an object keyed by band offset")
    bands = {}
    for key, seq_doc in bands_doc.items():
        try:
            k = int(key)
        except ValueError:
            raise ConfigError(f"band offset {key!r} is not an integer") from None
        if k < 1:
            raise ConfigError(f"band offset {k} must be >= 1")
        bands[k] = sequence_from_json(seq_doc)
    return BandOperatorSpec(diagonal, bands), filtration_from_json(doc.get("filtration", "bilateral"))


def filtration_from_json(value: Any) -> Filtration:
    try:
        return Filtration(value)
    except ValueError:
        raise ConfigError("filtration must be 'unilateral' or 'bilateral'") from None


def spec_to_json(spec: BandOperatorSpec, filt: Filtration | None = None) -> dict:
    doc: dict[str, Any] = {
        "diagonal": sequence_to_json(spec.diagonal),
        "bands": {str(k): sequence_to_json(seq) for k, seq in spec.bands.items()},
    }
    if filt is not None:
        doc["filtration"] = filt.value
    return doc


# ---------------------------------------------------------------------------
# results


def report_to_json(report: ClassificationReport) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "operator": spec_to_json(report.spec, report.filtration),
        "schedule": list(report.schedule.sizes),
        "grid_resolution": report.grid_resolution,
        "affine": None if report.affine is None else {"a": report.affine[0], "b": report.affine[1]},
        "essential_support": [[lo, hi] for lo, hi in report.essential_support],
        "verdict_counts": dict(sorted(report.verdicts().items())),
        "grid": [v.to_dict() for v in report.grid],
    }
    return doc


def schedule_from_json(value: Any) -> tuple[int, ...]:
    if not isinstance(value, list) or not all(
        isinstance(v, int) and not isinstance(v, bool) for v in value
    ):
        raise ConfigError("schedule must be a list of integers")
    return tuple(value)


# ---------------------------------------------------------------------------
# deterministic writers


def _format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    text = format(x, ".17g")
    if text in ("-0", "0"):
        return "0.0" if text == "0" else "-0.0"
    if "e" not in text and "." not in text:
        text += ".0"
    return text


def dumps(obj: Any, indent: int = 2) -> str:
    """JSON text with floats written to 17 significant digits and key order preserved."""
    out = io.StringIO()
    _emit(obj, out, indent, 0)
    out.write("\n")
    return out.getvalue()


def _emit(obj, out, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, str)):
        out.write(json.dumps(obj))
    elif isinstance(obj, (int, np.integer)):
        out.write(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.write(_format_float(float(obj)))
    elif isinstance(obj, dict):
        if not obj:
            out.write("{}")
            return
        out.write("{\n")
        for i, (k, v) in enumerate(obj.items()):
            out.write(f"{pad}{json.dumps(str(k))}: ")
            _emit(v, out, indent, level + 1)
            out.write(",\n" if i < len(obj) - 1 else "\n")
        out.write(end + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        items = list(obj)
        if not items:
            out.write("[]")
            return
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in items):
            out.write("[")
            for i, v in enumerate(items):
                if i:
                    out.write(", ")
                _emit(v, out, indent, level + 1)
            out.write("]")
            return
        out.write("[\n")
        for i, v in enumerate(items):
            out.write(pad)
            _emit(v, out, indent, level + 1)
            out.write(",\n" if i < len(items) - 1 else "\n")
        out.write(end + "]")
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")


def csv_text(header: list[str], rows: list) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(
            [_format_float(float(v)) if isinstance(v, (float, np.floating)) else v for v in row]
        )
    return buf.getvalue()
