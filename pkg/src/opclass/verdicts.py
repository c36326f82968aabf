"""Verdict and certificate records returned by the classifiers."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional

import numpy as np

# certificate kinds
PSD = "psd"
VIOLATION = "violation"
PERIODICITY = "periodicity"
DECOMPOSITION = "decomposition"
RESIDUAL = "residual"
RULE = "rule"


def jsonable(x: Any) -> Any:
    """Convert numpy arrays, complex numbers and fractions to JSON values."""
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else str(x.numerator)
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.ndarray):
        if x.ndim == 2:
            from .linalg import matrix_to_json

            return matrix_to_json(x)
        if np.iscomplexobj(x):
            return [jsonable(v) for v in x.ravel()]
        return [float(v) for v in x.ravel()]
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if hasattr(x, "to_dict"):
        return x.to_dict()
    return x


@dataclass(frozen=True)
class Certificate:
    """Evidence for a verdict.

    ``kind`` is one of psd, violation, periodicity, decomposition, residual
    or rule; ``data`` holds the kind-specific payload (eigenvalue floor,
    witness vector, period and residual, component sequences, ...).
    """

    kind: str
    data: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "data": jsonable(self.data)}


@dataclass(frozen=True)
class ClassVerdict:
    class_name: str
    holds: bool
    residual: float = 0.0
    certificate: Optional[Certificate] = None
    note: str = ""

    def __bool__(self) -> bool:
        return self.holds

    def to_dict(self) -> dict:
        d = {
            "class_name": self.class_name,
            "holds": bool(self.holds),
            "residual": float(self.residual),
        }
        if self.certificate is not None:
            d["certificate"] = self.certificate.to_dict()
        if self.note:
            d["note"] = self.note
        return d
