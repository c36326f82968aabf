"""Truncated block Toeplitz operators with matrix trigonometric-polynomial symbols."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from . import classes
from . import verdicts as V
from .errors import DimensionMismatchError, OrderTooSmallError
from .linalg import adjoint, inf_norm, matrix_from_json, matrix_to_json, mpow, self_commutator
from .verdicts import Certificate, ClassVerdict

DEFAULT_GRID = 64


@dataclass(frozen=True)
class MatrixSymbol:
    """``Phi(z) = sum_d coeffs[d] z**d`` with ``k x k`` coefficients."""

    block_size: int
    coeffs: Mapping[int, np.ndarray]

    def __post_init__(self):
        if self.block_size < 1:
            raise ValueError("block_size must be >= 1")
        clean = {}
        for d, c in self.coeffs.items():
            c = np.asarray(c, dtype=complex)
            if c.shape != (self.block_size, self.block_size):
                raise DimensionMismatchError(
                    f"coefficient {d} has shape {c.shape}, expected {self.block_size}x{self.block_size}"
                )
            if np.any(c):
                clean[int(d)] = c
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    @classmethod
    def constant(cls, m) -> "MatrixSymbol":
        m = np.asarray(m, dtype=complex)
        return cls(m.shape[0], {0: m})

    @property
    def d_max(self) -> int:
        return max((abs(d) for d in self.coeffs), default=0)

    @property
    def is_analytic(self) -> bool:
        return all(d >= 0 for d in self.coeffs)

    def coefficient(self, d: int) -> np.ndarray:
        return self.coeffs.get(d, np.zeros((self.block_size, self.block_size), dtype=complex))

    def __call__(self, z: complex) -> np.ndarray:
        out = np.zeros((self.block_size, self.block_size), dtype=complex)
        for d, c in self.coeffs.items():
            out = out + c * z ** d
        return out

    def adjoint_symbol(self) -> "MatrixSymbol":
        """``z -> Phi(z)*`` on the circle: coefficient ``d`` becomes ``Phi_hat(-d)*``."""
        return MatrixSymbol(self.block_size, {-d: adjoint(c) for d, c in self.coeffs.items()})

    def __add__(self, other: "MatrixSymbol") -> "MatrixSymbol":
        keys = set(self.coeffs) | set(other.coeffs)
        return MatrixSymbol(self.block_size, {d: self.coefficient(d) + other.coefficient(d) for d in keys})

    def __rmul__(self, a: complex) -> "MatrixSymbol":
        return MatrixSymbol(self.block_size, {d: a * c for d, c in self.coeffs.items()})

    def to_json(self) -> dict:
        return {
            "block_size": self.block_size,
            "coeffs": {str(d): matrix_to_json(c) for d, c in self.coeffs.items()},
        }

    @classmethod
    def from_json(cls, doc: dict) -> "MatrixSymbol":
        return cls(int(doc["block_size"]),
                   {int(d): matrix_from_json(m) for d, m in doc["coeffs"].items()})


@dataclass(frozen=True)
class ToeplitzTruncation:
    symbol: MatrixSymbol
    order: int
    matrix: np.ndarray


def assemble(symbol: MatrixSymbol, order: int) -> ToeplitzTruncation:
    """``kN x kN`` matrix whose ``(p, q)`` block is ``Phi_hat(p - q)``."""
    if order <= 2 * symbol.d_max:
        raise OrderTooSmallError(f"order {order} must exceed 2*d_max = {2 * symbol.d_max}")
    k = symbol.block_size
    m = np.zeros((k * order, k * order), dtype=complex)
    for d, c in symbol.coeffs.items():
        for q in range(order):
            p = q + d
            if 0 <= p < order:
                m[p * k:(p + 1) * k, q * k:(q + 1) * k] = c
    return ToeplitzTruncation(symbol, order, m)


def symbol_is_normal_ae(symbol: MatrixSymbol, grid_points: int = DEFAULT_GRID, tol: float = 1e-9) -> ClassVerdict:
    """Normality of ``Phi(z)`` on an equispaced grid of the unit circle.

    A failure certifies (by the Gu-Hendricks-Rutherford criterion) that the
    Toeplitz operator is not hyponormal.
    """
    if grid_points < 8:
        raise ValueError("grid_points must be >= 8")
    worst, worst_z, scale = -1.0, None, 1.0
    for j in range(grid_points):
        z = np.exp(2j * np.pi * j / grid_points)
        phi = symbol(z)
        r = inf_norm(self_commutator(phi))
        scale = max(scale, 1.0 + inf_norm(phi) ** 2)
        if r > worst:
            worst, worst_z = r, z
    holds = worst <= tol * scale
    return ClassVerdict(
        "symbol_normal_ae", holds, worst,
        Certificate(V.RESIDUAL if holds else V.VIOLATION,
                    {"worst_z": complex(worst_z), "grid_points": grid_points, "max_residual": worst}),
    )


CLASS_DEGREE = {"hyponormal": 2, "n_normal": 2, "n_quasinormal": 3}

ClassSpec = Union[str, tuple]


def _parse_class(cls: ClassSpec) -> tuple[str, int]:
    if isinstance(cls, str):
        if cls == "hyponormal":
            return cls, 1
        name, _, n = cls.rpartition(":")
        return name, int(n)
    return cls[0], int(cls[1])


def truncated_class_probe(trunc: ToeplitzTruncation, cls: ClassSpec, tol: float = 1e-9) -> ClassVerdict:
    """Evaluate a class on the exact leading block of a truncation.

    ``cls`` is ``"hyponormal"``, ``("n_normal", n)`` or ``("n_quasinormal", n)``.
    Products of truncations agree with the infinite operator except in the
    last ``d_max * degree`` block rows and columns, where ``degree`` is the
    operator degree of the defining expression; only that trailing margin is
    dropped. The top-left corner is the true boundary of the Hardy space and
    is kept.
    """
    name, n = _parse_class(cls)
    if name not in CLASS_DEGREE:
        raise ValueError(f"unknown class {cls!r}")
    degree = CLASS_DEGREE[name] * (1 if name == "hyponormal" else n)
    margin = trunc.symbol.d_max * degree
    if trunc.order <= margin:
        raise OrderTooSmallError(
            f"order {trunc.order} must exceed d_max*degree = {margin}"
        )
    k = trunc.symbol.block_size
    lo, hi = 0, (trunc.order - margin) * k
    t = trunc.matrix
    if name == "hyponormal":
        expr = self_commutator(t)[lo:hi, lo:hi]
        v = classes.psd_verdict("hyponormal", expr, tol)
    else:
        tn = mpow(t, n)
        if name == "n_normal":
            expr = self_commutator(tn)
            label, deg = f"{n}_normal", 2 * n
        else:
            expr = tn @ (adjoint(tn) @ tn) - (adjoint(tn) @ tn) @ tn
            label, deg = f"{n}_quasinormal", 3 * n
        res = inf_norm(expr[lo:hi, lo:hi])
        scale = 1.0 + inf_norm(t) ** deg
        v = ClassVerdict(label, res <= tol * scale, res,
                         Certificate(V.RESIDUAL, {"residual": res, "scale": scale}))
    data = dict(v.certificate.data)
    data.update({"interior_blocks": [0, trunc.order - margin], "margin": margin})
    return ClassVerdict(v.class_name, v.holds, v.residual, Certificate(v.certificate.kind, data),
                        "exact leading block")
