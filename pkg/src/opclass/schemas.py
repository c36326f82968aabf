"""JSON schemas for operator inputs and reports, and validated loaders."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

import jsonschema
import numpy as np

from .errors import OpclassError, SpecParseError
from .linalg import matrix_from_json

SCHEMA_VERSION = "1.0"

_number_or_rational = {
    "oneOf": [
        {"type": "number"},
        {"type": "string", "pattern": r"^\s*[+]?(\d+(\.\d*)?|\.\d+)(/\d+)?\s*$"},
    ]
}

MATRIX_SCHEMA = {
    "type": "object",
    "required": ["rows", "cols", "entries"],
    "properties": {
        "rows": {"type": "integer", "minimum": 0},
        "cols": {"type": "integer", "minimum": 0},
        "entries": {
            "type": "array",
            "items": {
                "oneOf": [
                    {"type": "number"},
                    {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                ]
            },
        },
    },
}

WEIGHTS_SCHEMA = {
    "type": "object",
    "required": ["tail"],
    "properties": {
        "prefix": {"type": "array", "items": _number_or_rational},
        "tail": {
            "oneOf": [
                {"type": "object", "required": ["constant"], "additionalProperties": False,
                 "properties": {"constant": _number_or_rational}},
                {"type": "object", "required": ["periodic"], "additionalProperties": False,
                 "properties": {"periodic": {"type": "array", "minItems": 1,
                                             "items": _number_or_rational}}},
            ]
        },
    },
}

SYMBOL_SCHEMA = {
    "type": "object",
    "required": ["block_size", "coeffs"],
    "properties": {
        "block_size": {"type": "integer", "minimum": 1},
        "coeffs": {
            "type": "object",
            "propertyNames": {"pattern": r"^-?\d+$"},
            "additionalProperties": MATRIX_SCHEMA,
        },
    },
}

EXTENSION_SCHEMA = {
    "type": "object",
    "required": ["ambient", "subspace_basis", "n"],
    "properties": {
        "ambient": MATRIX_SCHEMA,
        "subspace_basis": MATRIX_SCHEMA,
        "n": {"type": "integer", "minimum": 1},
    },
}

_verdict_schema = {
    "type": "object",
    "required": ["class_name", "holds", "residual"],
    "properties": {
        "class_name": {"type": "string"},
        "holds": {"type": "boolean"},
        "residual": {"type": "number"},
        "note": {"type": "string"},
        "certificate": {
            "type": "object",
            "required": ["kind", "data"],
            "properties": {
                "kind": {"enum": ["psd", "violation", "periodicity", "decomposition",
                                  "residual", "rule"]},
                "data": {"type": "object"},
            },
        },
    },
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "opclass class report",
    "type": "object",
    "required": ["schema_version", "tool", "tool_version", "command", "input",
                 "tolerances", "verdicts"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "tool": {"const": "opclass"},
        "tool_version": {"type": "string"},
        "command": {"type": "string"},
        "input": {"type": "object"},
        "tolerances": {"type": "object", "additionalProperties": {"type": "number"}},
        "verdicts": {"type": "array", "items": _verdict_schema},
        "extras": {"type": "object"},
    },
}


def json_pointer(path) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in path)


def validate(doc: Any, schema: dict) -> None:
    """Raise :class:`SpecParseError` carrying the JSON pointer of the first error."""
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise SpecParseError(err.message, json_pointer(err.absolute_path))


def load_json(path: str) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise SpecParseError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc


def parse_matrix(doc: Any) -> np.ndarray:
    validate(doc, MATRIX_SCHEMA)
    try:
        return matrix_from_json(doc)
    except (OpclassError, ValueError) as exc:
        raise SpecParseError(str(exc), "/entries") from exc


def parse_weights(doc: Any, exact: bool = False):
    from .shifts import weights_from_json

    validate(doc, WEIGHTS_SCHEMA)
    try:
        return weights_from_json(doc, exact)
    except OpclassError as exc:
        raise SpecParseError(str(exc)) from exc


def parse_symbol(doc: Any):
    from .toeplitz import MatrixSymbol

    validate(doc, SYMBOL_SCHEMA)
    try:
        return MatrixSymbol.from_json(doc)
    except (OpclassError, ValueError) as exc:
        raise SpecParseError(str(exc), "/coeffs") from exc


def parse_extension(doc: Any):
    from .extensions import ExtensionSpec

    validate(doc, EXTENSION_SCHEMA)
    try:
        return ExtensionSpec(matrix_from_json(doc["ambient"]),
                             matrix_from_json(doc["subspace_basis"]), int(doc["n"]))
    except (OpclassError, ValueError) as exc:
        raise SpecParseError(str(exc)) from exc


@dataclass(frozen=True)
class OperatorSpec:
    """Tagged operator description: ``kind`` is matrix, shift or toeplitz.

    ``payload`` is a numpy matrix, a :class:`~opclass.shifts.WeightSequence`,
    or a ``(MatrixSymbol, order)`` pair.
    """

    kind: str
    payload: Any

    def to_json(self) -> dict:
        from .linalg import matrix_to_json

        if self.kind == "matrix":
            return {"kind": "matrix", "matrix": matrix_to_json(self.payload)}
        if self.kind == "shift":
            return {"kind": "shift", "weights": self.payload.to_json()}
        symbol, order = self.payload
        return {"kind": "toeplitz", "symbol": symbol.to_json(), "order": order}
