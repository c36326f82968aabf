"""Operator-class predicates for dense square matrices.

Residuals are measured in the induced infinity norm and compared against
``tol * (1 + ||T||**d)``, where ``d`` is the degree of the defining
expression, so verdicts do not depend on the overall scale of ``T``.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
import scipy.linalg

from . import verdicts as V
from .errors import NotCommutingError, NotNormalError, NotPositiveError
from .linalg import (
    adjoint,
    commutator,
    inf_norm,
    is_psd,
    mpow,
    require_square,
    self_commutator,
)
from .verdicts import Certificate, ClassVerdict

DEFAULT_TOL = 1e-9
PD_TOL = 1e-10


def _residual_verdict(name, residual, norm_t, degree, tol, extra=None) -> ClassVerdict:
    scale = 1.0 + norm_t ** degree
    data = {"residual": residual, "scale": scale, "relative_residual": residual / scale}
    if extra:
        data.update(extra)
    return ClassVerdict(
        name, residual <= tol * scale, residual, Certificate(V.RESIDUAL, data)
    )


def is_normal(t, tol: float = DEFAULT_TOL) -> ClassVerdict:
    a = require_square(t)
    return _residual_verdict("normal", inf_norm(self_commutator(a)), inf_norm(a), 2, tol)


def is_n_normal(t, n: int, tol: float = DEFAULT_TOL) -> ClassVerdict:
    """``T**n`` normal; also reports ``||T* T**n - T**n T*||``."""
    a = require_square(t)
    an = mpow(a, n)
    nt = inf_norm(a)
    main = inf_norm(self_commutator(an))
    cross = inf_norm(adjoint(a) @ an - an @ adjoint(a))
    return _residual_verdict(
        f"{n}_normal", main, nt, 2 * n, tol,
        {"commutator_residual": cross,
         "commutator_relative": cross / (1.0 + nt ** (n + 1))},
    )


def is_hyponormal(t, tol: float = DEFAULT_TOL) -> ClassVerdict:
    """PSD test of ``T*T - TT*``.

    On a finite-dimensional space this only holds for normal ``T`` (the
    self-commutator has trace zero); it is meant for interior blocks of
    truncations as well.
    """
    a = require_square(t)
    return psd_verdict("hyponormal", self_commutator(a), tol)


def psd_verdict(name: str, m, tol: float = DEFAULT_TOL) -> ClassVerdict:
    v = is_psd(m, tol)
    if v.is_psd:
        return ClassVerdict(
            name, True, max(0.0, -v.min_eigenvalue),
            Certificate(V.PSD, {"eigenvalue_floor": v.min_eigenvalue,
                                "tolerance_used": v.tolerance_used}),
        )
    return ClassVerdict(
        name, False, -v.min_eigenvalue,
        Certificate(V.VIOLATION, {"min_eigenvalue": v.min_eigenvalue,
                                  "witness_vector": v.witness_vector,
                                  "tolerance_used": v.tolerance_used}),
    )


def is_quasinormal(t, tol: float = DEFAULT_TOL) -> ClassVerdict:
    a = require_square(t)
    p = adjoint(a) @ a
    return _residual_verdict("quasinormal", inf_norm(a @ p - p @ a), inf_norm(a), 3, tol)


def is_quasi_n_normal(t, n: int, tol: float = DEFAULT_TOL) -> ClassVerdict:
    """``T`` commutes with ``T*^n T^n``."""
    a = require_square(t)
    an = mpow(a, n)
    p = adjoint(an) @ an
    return _residual_verdict(
        f"quasi_{n}_normal", inf_norm(a @ p - p @ a), inf_norm(a), 2 * n + 1, tol
    )


def is_n_quasinormal(t, n: int, tol: float = DEFAULT_TOL) -> ClassVerdict:
    """``T**n`` quasinormal."""
    a = require_square(t)
    v = is_quasinormal(mpow(a, n), tol)
    return ClassVerdict(f"{n}_quasinormal", v.holds, v.residual, v.certificate)


def power_identity_check(t, n: int, k_max: int, tol: float = DEFAULT_TOL) -> ClassVerdict:
    """Residuals of ``T*^{nk} T^{nk} = (T*^n T^n)^k`` for ``k = 1..k_max``.

    All residuals vanishing is necessary for n-quasinormality; finitely many
    ``k`` cannot prove sufficiency, so a pass reads "consistent up to k_max".
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    a = require_square(t)
    nt = inf_norm(a)
    an = mpow(a, n)
    base = adjoint(an) @ an
    rel = []
    lhs_pow = np.eye(a.shape[0], dtype=complex)
    rhs = np.eye(a.shape[0], dtype=complex)
    for k in range(1, k_max + 1):
        lhs_pow = lhs_pow @ an
        rhs = rhs @ base
        r = inf_norm(adjoint(lhs_pow) @ lhs_pow - rhs)
        rel.append(r / (1.0 + nt ** (2 * n * k)))
    worst = max(rel)
    return ClassVerdict(
        f"{n}_quasinormal_power_identity", worst <= tol, worst,
        Certificate(V.RESIDUAL, {"relative_residuals": rel, "k_max": k_max}),
        f"consistent up to k={k_max}" if worst <= tol else "identity fails",
    )


def bram_halmos_matrix(t, n: int, k: int, interior: Optional[int] = None) -> np.ndarray:
    """Block matrix with ``(r, c)`` block ``A*^c A^r`` for ``A = T**n``.

    Its quadratic form at ``(x_0..x_k)`` is ``sum <A^j x_i, A^i x_j>``. With
    ``interior`` each block is compressed to its leading ``interior``
    coordinates, which is how callers test truncations of infinite operators.
    """
    a = require_square(t)
    an = mpow(a, n)
    pows = [np.eye(a.shape[0], dtype=complex)]
    for _ in range(k):
        pows.append(pows[-1] @ an)
    m = a.shape[0] if interior is None else interior
    blocks = [
        [(adjoint(pows[c]) @ pows[r])[:m, :m] for c in range(k + 1)]
        for r in range(k + 1)
    ]
    return np.block(blocks)


def bram_halmos_block_psd(
    t, n: int, k: int, tol: float = DEFAULT_TOL, interior: Optional[int] = None
) -> ClassVerdict:
    """Positivity of the order-``k`` Bram-Halmos matrix of ``T**n``.

    Holding for every ``k`` characterizes subnormality of ``T**n``; a single
    ``k`` certifies k-hyponormality of ``T**n``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    v = psd_verdict(f"{n}_subnormal_certificate", bram_halmos_matrix(t, n, k, interior), tol)
    cert = Certificate(v.certificate.kind, {**v.certificate.data, "n": n, "k": k,
                                            "interior": interior})
    return ClassVerdict(v.class_name, v.holds, v.residual, cert)


# -- Radjavi-Rosenthal square roots of normal operators ------------------------


def _require_normal(m, tol, label):
    v = is_normal(m, tol)
    if not v.holds:
        raise NotNormalError(f"{label} is not normal (residual {v.residual:.3e})")


def rr_construct(a, b, c, tol: float = DEFAULT_TOL) -> np.ndarray:
    """``A (+) [[B, C], [0, -B]]`` with ``A``, ``B`` normal and ``C`` positive
    definite commuting with ``B``; ``a`` may be ``None``.

    The result squares to ``A**2 (+) B**2 (+) B**2``, hence is 2-normal.
    """
    b = require_square(b)
    c = require_square(c)
    if b.shape != c.shape:
        raise ValueError("B and C must have the same size")
    _require_normal(b, tol, "B")
    if a is not None:
        a = require_square(a)
        _require_normal(a, tol, "A")
    if inf_norm(c - adjoint(c)) > tol * (1.0 + inf_norm(c)):
        raise NotPositiveError("C is not Hermitian")
    lam = float(np.linalg.eigvalsh((c + adjoint(c)) / 2)[0]) if c.size else 1.0
    if lam < PD_TOL * (1.0 + inf_norm(c)):
        raise NotPositiveError(f"C is not positive definite (min eigenvalue {lam:.3e})")
    comm = inf_norm(commutator(b, c))
    if comm > tol * (1.0 + inf_norm(b) * inf_norm(c)):
        raise NotCommutingError(f"||[B, C]|| = {comm:.3e}")
    return _rr_matrix(a, b, c)


def _rr_matrix(a, b, c) -> np.ndarray:
    z = np.block([[b, c], [np.zeros_like(b), -b]])
    return z if a is None else scipy.linalg.block_diag(a, z)


def hyponormal_2normal_forces_normal_check(b, c, tol: float = DEFAULT_TOL) -> dict:
    """Check that ``Z = [[B, C], [0, -B]]`` is hyponormal only when ``C = 0``.

    The upper-left block of ``Z*Z - ZZ*`` is ``B*B - BB* - CC* = -CC*``.
    ``C = 0`` is allowed here (then ``Z`` is normal).
    """
    b = require_square(b)
    c = require_square(c)
    _require_normal(b, tol, "B")
    comm = inf_norm(commutator(b, c))
    if comm > tol * (1.0 + inf_norm(b) * inf_norm(c)):
        raise NotCommutingError(f"||[B, C]|| = {comm:.3e}")
    z = _rr_matrix(None, b, c)
    k = b.shape[0]
    block = self_commutator(z)[:k, :k]
    expected = -(c @ adjoint(c))
    block_residual = inf_norm(block - expected)
    hyp = is_hyponormal(z, tol)
    c_zero = inf_norm(c) <= tol
    return {
        "z": z,
        "upper_left_block": block,
        "block_residual": block_residual,
        "block_matches": block_residual <= tol * (1.0 + inf_norm(c) ** 2),
        "hyponormal": hyp.holds,
        "c_is_zero": c_zero,
        "consistent": hyp.holds == c_zero,
        "normal": is_normal(z, tol).holds,
    }
