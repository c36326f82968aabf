"""Dense complex linear algebra used by every classifier.

Matrices are plain ``numpy`` complex arrays. Exact scalar arithmetic uses
``fractions.Fraction``, which is reduced, has a positive denominator and
unbounded integers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyInputError,
    NonSquareError,
    NotHermitianError,
)

ExactRational = Fraction

HERMITIAN_TOL = 1e-8
PSD_TOL = 1e-9
SPAN_TOL = 1e-10


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionMismatchError(f"expected a 2-d array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def require_square(m) -> np.ndarray:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise NonSquareError(f"matrix is {a.shape[0]}x{a.shape[1]}, not square")
    return a


def inf_norm(m) -> float:
    """Induced infinity norm (maximum absolute row sum); 0 for empty input."""
    a = np.asarray(m)
    if a.size == 0:
        return 0.0
    return float(np.abs(a).sum(axis=1).max())


def adjoint(m) -> np.ndarray:
    return np.conj(np.asarray(m)).T


def hermitian_part(m) -> np.ndarray:
    a = require_square(m)
    return (a + adjoint(a)) / 2


def mpow(m, k: int) -> np.ndarray:
    """``m**k`` by repeated multiplication (k >= 0)."""
    a = require_square(m)
    if k < 0:
        raise ValueError("negative matrix power")
    out = np.eye(a.shape[0], dtype=complex)
    for _ in range(k):
        out = out @ a
    return out


def hermitian_eigenvalues(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix.

    The input must satisfy ``||M - M*|| <= tol * (1 + ||M||)``; it is
    symmetrized before the eigensolve so near-Hermitian inputs give
    deterministic results.
    """
    a = require_square(m)
    deviation = inf_norm(a - adjoint(a))
    if deviation > tol * (1.0 + inf_norm(a)):
        raise NotHermitianError(deviation)
    return np.linalg.eigvalsh((a + adjoint(a)) / 2)


@dataclass(frozen=True)
class PsdVerdict:
    is_psd: bool
    min_eigenvalue: float
    tolerance_used: float
    witness_vector: Optional[np.ndarray] = None

    def to_dict(self) -> dict:
        d = {
            "is_psd": self.is_psd,
            "min_eigenvalue": self.min_eigenvalue,
            "tolerance_used": self.tolerance_used,
        }
        if self.witness_vector is not None:
            d["witness_vector"] = vector_to_json(self.witness_vector)
        return d


def _canonical_phase(v: np.ndarray) -> np.ndarray:
    # fix the eigenvector phase so witnesses are reproducible
    idx = int(np.argmax(np.abs(v) > 1e-12 * max(1.0, float(np.abs(v).max()))))
    if abs(v[idx]) == 0:
        return v
    return v * (abs(v[idx]) / v[idx])


def is_psd(m, tol: float = PSD_TOL) -> PsdVerdict:
    """Decide positive semidefiniteness with a relative threshold.

    ``is_psd`` holds when the smallest eigenvalue of the symmetrized input is
    at least ``-tol * (1 + ||M||_inf)``. A failing verdict carries the unit
    eigenvector of the smallest eigenvalue as a witness.
    """
    a = require_square(m)
    h = (a + adjoint(a)) / 2
    if h.shape[0] == 0:
        return PsdVerdict(True, 0.0, tol)
    threshold = tol * (1.0 + inf_norm(h))
    w, v = np.linalg.eigh(h)
    lam = float(w[0])
    if lam >= -threshold:
        return PsdVerdict(True, lam, threshold)
    return PsdVerdict(False, lam, threshold, _canonical_phase(v[:, 0]))


def is_psd_exact(rows: Sequence[Sequence[Fraction]]) -> bool:
    """Exact PSD decision for a symmetric rational matrix.

    Symmetric elimination: a negative diagonal entry refutes; a zero
    diagonal entry needs a zero row; a positive pivot is eliminated and the
    Schur complement is tested in turn.
    """
    a = [[Fraction(x) for x in r] for r in rows]
    active = list(range(len(a)))
    while active:
        if any(a[i][i] < 0 for i in active):
            return False
        for i in active:
            if a[i][i] == 0 and any(a[i][j] != 0 for j in active):
                return False
        pivots = [i for i in active if a[i][i] > 0]
        if not pivots:
            return True
        i = pivots[0]
        active.remove(i)
        for p in active:
            f = a[p][i] / a[i][i]
            if f:
                for q in active:
                    a[p][q] -= f * a[i][q]
    return True


def jacobi_scaled(m) -> tuple[np.ndarray, np.ndarray]:
    """``D^{-1/2} M D^{-1/2}`` with ``D`` the positive part of the diagonal.

    Congruence by a positive diagonal preserves (semi)definiteness and
    evens out badly scaled inputs such as moment matrices. Zero diagonal
    entries are left unscaled. Returns the scaled matrix and ``d**-1/2``.
    """
    a = require_square(m)
    d = np.real(np.diag(a)).copy()
    inv = np.where(d > 0, 1.0 / np.sqrt(np.where(d > 0, d, 1.0)), 1.0)
    return a * inv[:, None] * inv[None, :], inv


def commutator(a, b) -> np.ndarray:
    a = require_square(a)
    b = require_square(b)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"shapes {a.shape} and {b.shape} differ")
    return a @ b - b @ a


def self_commutator(m) -> np.ndarray:
    """``M*M - MM*``."""
    a = require_square(m)
    return adjoint(a) @ a - a @ adjoint(a)


def orthonormal_span(vectors: Iterable, tol: float = SPAN_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the span of ``vectors``.

    Uses Gram-Schmidt with one reorthogonalization pass. A vector whose
    residual after projection has norm ``<= tol * (1 + ||v||)`` is dropped.
    """
    vecs = [np.asarray(v, dtype=complex).ravel() for v in vectors]
    if not vecs:
        raise EmptyInputError("no vectors given")
    dim = vecs[0].shape[0]
    if any(v.shape[0] != dim for v in vecs):
        raise DimensionMismatchError("vectors have different lengths")
    basis: list[np.ndarray] = []
    for v in vecs:
        r = v.copy()
        for _ in range(2):
            for q in basis:
                r -= np.vdot(q, r) * q
        nr = np.linalg.norm(r)
        if nr <= tol * (1.0 + np.linalg.norm(v)):
            continue
        basis.append(r / nr)
    if not basis:
        return np.zeros((dim, 0), dtype=complex)
    return np.column_stack(basis)


def columns(m) -> list[np.ndarray]:
    a = np.asarray(m)
    return [a[:, j] for j in range(a.shape[1])]


def vector_to_json(v: Sequence[complex]) -> list:
    return [[float(np.real(x)), float(np.imag(x))] for x in np.asarray(v).ravel()]


def matrix_to_json(m) -> dict:
    a = np.asarray(m, dtype=complex)
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "entries": vector_to_json(a.ravel()),
    }


def matrix_from_json(doc: dict) -> np.ndarray:
    rows, cols = int(doc["rows"]), int(doc["cols"])
    vals = []
    for e in doc["entries"]:
        if isinstance(e, (list, tuple)):
            vals.append(complex(float(e[0]), float(e[1])))
        else:
            vals.append(complex(float(e)))
    if len(vals) != rows * cols:
        raise DimensionMismatchError(
            f"{len(vals)} entries given for a {rows}x{cols} matrix"
        )
    return np.array(vals, dtype=complex).reshape(rows, cols)
