"""Sub-n-normal operators realized as restrictions of n-normal matrices.

An :class:`ExtensionSpec` holds an ambient n-normal matrix ``S`` on ``K`` and
an orthonormal basis ``Q`` of an ``S``-invariant subspace ``H``; the
operator under study is ``T = Q* S Q``.

On a finite-dimensional space, invariant subspaces of the normal matrix
``S**n`` reduce it, so ``T`` is itself n-normal and the minimal extension
space ``H + S*^n H`` collapses to ``H``. The checks below still evaluate the
general formulas rather than assuming that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from . import classes
from .errors import (
    DimensionMismatchError,
    GramMismatchError,
    InvarianceViolatedError,
    NotIntertwiningError,
    NotNNormalError,
    NotOrthonormalError,
)
from .linalg import adjoint, as_matrix, inf_norm, mpow, orthonormal_span, require_square

DEFAULT_TOL = 1e-9
ORTHO_TOL = 1e-8
SPEC_TOL = 1e-6
# drop threshold for spanning vectors: rounding in S*^n Q must not add a dimension
SPAN_DROP_TOL = 1e-8


def _check_orthonormal(q: np.ndarray) -> None:
    if q.shape[1] == 0:
        return
    dev = inf_norm(adjoint(q) @ q - np.eye(q.shape[1]))
    if dev > ORTHO_TOL:
        raise NotOrthonormalError(f"basis columns are not orthonormal (deviation {dev:.3e})")


def invariance_defect(s: np.ndarray, q: np.ndarray) -> float:
    """``||(I - QQ*) S Q||_inf``."""
    if q.shape[1] == 0:
        return 0.0
    sq = s @ q
    return inf_norm(sq - q @ (adjoint(q) @ sq))


@dataclass(frozen=True)
class ExtensionSpec:
    ambient: np.ndarray
    subspace_basis: np.ndarray
    n: int
    tol: float = field(default=DEFAULT_TOL, compare=False)

    def __post_init__(self):
        s = require_square(self.ambient)
        q = as_matrix(self.subspace_basis)
        if q.shape[0] != s.shape[0]:
            raise DimensionMismatchError(
                f"basis has {q.shape[0]} rows, ambient has dimension {s.shape[0]}"
            )
        if self.n < 1:
            raise ValueError("n must be >= 1")
        object.__setattr__(self, "ambient", s)
        object.__setattr__(self, "subspace_basis", q)

    @property
    def compression(self) -> np.ndarray:
        return compress_to_subspace(self.ambient, self.subspace_basis)

    def validate(self) -> None:
        _check_orthonormal(self.subspace_basis)
        defect = invariance_defect(self.ambient, self.subspace_basis)
        if defect > self.tol * (1.0 + inf_norm(self.ambient)):
            raise InvarianceViolatedError(defect)
        v = classes.is_n_normal(self.ambient, self.n, self.tol)
        if not v.holds:
            raise NotNNormalError(f"ambient is not {self.n}-normal (residual {v.residual:.3e})")

    def to_json(self) -> dict:
        from .linalg import matrix_to_json

        return {
            "ambient": matrix_to_json(self.ambient),
            "subspace_basis": matrix_to_json(self.subspace_basis),
            "n": self.n,
        }


def compress_to_subspace(s, basis) -> np.ndarray:
    """``Q* S Q``; equals ``S|_H`` when ``H = range(Q)`` is invariant."""
    s = require_square(s)
    q = as_matrix(basis)
    _check_orthonormal(q)
    return adjoint(q) @ s @ q


@dataclass(frozen=True)
class MinimalExtension:
    reduced_ambient: np.ndarray
    reduced_basis: np.ndarray
    subspace_in_reduced: np.ndarray
    contains_H: bool
    invariance_defect: float
    n_normal_residual: float
    grew_with_extra_powers: Optional[bool] = None

    @property
    def dimension(self) -> int:
        return self.reduced_basis.shape[1]

    def as_spec(self, n: int) -> ExtensionSpec:
        return ExtensionSpec(self.reduced_ambient, self.subspace_in_reduced, n)


def _span_vectors(s, q, n, ks):
    vecs = []
    sn_star = adjoint(mpow(s, n))
    for k in ks:
        block = mpow(sn_star, k) @ q if k else q
        vecs.extend(block[:, j] for j in range(block.shape[1]))
    return vecs


def minimal_extension(spec: ExtensionSpec, extended_span: bool = False) -> MinimalExtension:
    """Restrict ``S`` to ``L = span(H, S*^n H)``.

    Verifies ``S L ⊆ L`` and that ``S|_L`` is n-normal. With
    ``extended_span`` the span also takes ``S*^{2n} H`` and ``S*^{3n} H`` and
    reports whether that enlarges ``L``.
    """
    spec.validate()
    s, q, n, tol = spec.ambient, spec.subspace_basis, spec.n, spec.tol
    dim = s.shape[0]
    if q.shape[1] == 0:
        empty = np.zeros((dim, 0), dtype=complex)
        return MinimalExtension(np.zeros((0, 0), dtype=complex), empty,
                                np.zeros((0, 0), dtype=complex), True, 0.0, 0.0)
    basis = orthonormal_span(_span_vectors(s, q, n, (0, 1)), SPAN_DROP_TOL)
    grew = None
    if extended_span:
        bigger = orthonormal_span(_span_vectors(s, q, n, (0, 1, 2, 3)), SPAN_DROP_TOL)
        grew = bigger.shape[1] > basis.shape[1]
    defect = invariance_defect(s, basis)
    if defect > tol * (1.0 + inf_norm(s)):
        raise InvarianceViolatedError(defect)
    reduced = adjoint(basis) @ s @ basis
    nn = classes.is_n_normal(reduced, n, tol)
    if not nn.holds:
        raise NotNNormalError(f"restriction to L is not {n}-normal (residual {nn.residual:.3e})")
    h_in_l = adjoint(basis) @ q
    contains = inf_norm(basis @ h_in_l - q) <= 1e-8
    return MinimalExtension(reduced, basis, h_in_l, contains, defect, nn.residual, grew)


@dataclass(frozen=True)
class EquivalenceResult:
    equivalent: bool
    intertwiner: np.ndarray
    gram_residual: float
    intertwining_residual: float


def _extend_isometry(v: np.ndarray, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Extend ``v`` (mapping range(src) onto range(dst)) to a unitary."""
    dim = v.shape[0]
    src_perp = scipy.linalg.null_space(adjoint(src)) if src.shape[1] < dim else np.zeros((dim, 0))
    dst_perp = scipy.linalg.null_space(adjoint(dst)) if dst.shape[1] < dim else np.zeros((dim, 0))
    return v + dst_perp @ adjoint(src_perp)


def minimal_extensions_unitarily_equivalent(
    spec1: ExtensionSpec, spec2: ExtensionSpec, u_on_H, tol: float = DEFAULT_TOL
) -> EquivalenceResult:
    """Build the intertwiner ``V`` with ``V(S1*^{nk} h) = S2*^{nk} U h``, ``k = 0, 1``.

    ``u_on_H`` is the unitary between the subspace coordinates with
    ``U T1 = T2 U``. ``V`` is well defined and isometric exactly when the Gram
    matrices of the two spanning families agree.
    """
    if spec1.n != spec2.n:
        raise ValueError("specs have different n")
    n = spec1.n
    u = as_matrix(u_on_H)
    t1, t2 = spec1.compression, spec2.compression
    scale = 1.0 + inf_norm(t1)
    r = inf_norm(u @ t1 - t2 @ u)
    if r > tol * scale or inf_norm(adjoint(u) @ u - np.eye(u.shape[0])) > ORTHO_TOL:
        raise NotIntertwiningError(f"||U T1 - T2 U|| = {r:.3e}")
    s1, s2 = spec1.ambient, spec2.ambient
    q1, q2 = spec1.subspace_basis, spec2.subspace_basis @ u
    x1 = np.hstack([q1, adjoint(mpow(s1, n)) @ q1])
    x2 = np.hstack([q2, adjoint(mpow(s2, n)) @ q2])
    g1, g2 = adjoint(x1) @ x1, adjoint(x2) @ x2
    gram_res = inf_norm(g1 - g2)
    if gram_res > tol * (1.0 + inf_norm(g1)):
        raise GramMismatchError(f"Gram matrices differ by {gram_res:.3e}")
    l1 = orthonormal_span(list(x1.T), SPAN_DROP_TOL)
    l2 = orthonormal_span(list(x2.T), SPAN_DROP_TOL)
    v_span = x2 @ np.linalg.pinv(x1, rcond=SPAN_DROP_TOL) @ (l1 @ adjoint(l1))
    if s1.shape == s2.shape:
        v = _extend_isometry(v_span, l1, l2)
    else:
        v = v_span
    inter = inf_norm((v @ s1 - s2 @ v) @ l1)
    ok = inter <= SPEC_TOL * (1.0 + inf_norm(s1))
    return EquivalenceResult(ok, v, gram_res, inter)


def _hausdorff_half(a: np.ndarray, b: np.ndarray) -> float:
    if a.size == 0:
        return 0.0
    if b.size == 0:
        return float("inf")
    return float(np.max(np.min(np.abs(a[:, None] - b[None, :]), axis=1)))


def spectral_inclusions_check(spec: ExtensionSpec) -> dict:
    """Eigenvalues of ``T`` and ``S`` and the two one-sided Hausdorff defects.

    Reported, not asserted: non-normal eigenproblems are ill-conditioned.
    """
    sig_t = np.linalg.eigvals(spec.compression) if spec.subspace_basis.shape[1] else np.zeros(0)
    sig_s = np.linalg.eigvals(spec.ambient)
    d_s_in_t = _hausdorff_half(sig_s, sig_t)
    d_t_in_s = _hausdorff_half(sig_t, sig_s)
    return {
        "sigma_T": np.sort_complex(sig_t),
        "sigma_S": np.sort_complex(sig_s),
        "defect_S_in_T": d_s_in_t,
        "defect_T_in_S": d_t_in_s,
        "hausdorff_defect": max(d_s_in_t, d_t_in_s),
        "within_tolerance": max(d_s_in_t, d_t_in_s) <= SPEC_TOL,
    }


def poly_eval(coeffs: Sequence[complex], m: np.ndarray) -> np.ndarray:
    """``sum_k coeffs[k] * m**k`` by Horner's rule."""
    out = np.zeros_like(m, dtype=complex)
    eye = np.eye(m.shape[0], dtype=complex)
    for c in reversed(list(coeffs)):
        out = out @ m + c * eye
    return out


def spectral_set_check(spec: ExtensionSpec, poly_coeffs: Sequence[complex], tol: float = DEFAULT_TOL) -> dict:
    """Compare ``||f(T)||`` with ``max |f|`` over the eigenvalues of ``T``.

    ``poly_coeffs`` are in ascending degree. The inequality can fail for
    nilpotent ``T``; this is a probe that reports either way.
    """
    t = spec.compression
    lhs = float(np.linalg.norm(poly_eval(poly_coeffs, t), 2)) if t.size else 0.0
    eig = np.linalg.eigvals(t) if t.size else np.zeros(0)
    vals = np.polynomial.polynomial.polyval(eig, np.asarray(poly_coeffs, dtype=complex))
    rhs = float(np.max(np.abs(vals))) if eig.size else 0.0
    return {"lhs_norm": lhs, "rhs_sup": rhs, "satisfied": lhs <= rhs * (1.0 + tol)}


def povm_moment_check(spec: ExtensionSpec, i_max: int, tol: float = DEFAULT_TOL) -> list:
    """Residuals of ``T*^{ni} T^{ni} = sum_j |lambda_j|^{2i} Q* E_j Q``.

    ``S**n = sum_j lambda_j E_j`` is the spectral decomposition (from a
    complex Schur form, which is diagonal for normal matrices). Residuals are
    relative to ``1 + ||S||**(2ni)``.
    """
    s, q, n = spec.ambient, spec.subspace_basis, spec.n
    sn = mpow(s, n)
    r, z = scipy.linalg.schur(sn, output="complex")
    off = inf_norm(np.triu(r, 1))
    if off > SPEC_TOL * (1.0 + inf_norm(sn)):
        raise NotNNormalError(f"S^{n} is not normal (Schur off-diagonal {off:.3e})")
    lam = np.diag(r)
    proj = adjoint(q) @ z  # row j of proj.T is Q* z_j
    t = spec.compression
    tn = mpow(t, n)
    ns = inf_norm(s)
    out = []
    ti = np.eye(t.shape[0], dtype=complex)
    for i in range(i_max + 1):
        if i:
            ti = ti @ tn
        lhs = adjoint(ti) @ ti
        weights = np.abs(lam) ** (2 * i)
        rhs = (proj * weights) @ adjoint(proj)
        out.append(inf_norm(lhs - rhs) / (1.0 + ns ** (2 * n * i)))
    return out


def bram_halmos_forms(t, n: int, xs: Sequence[np.ndarray]) -> tuple[float, float]:
    """The forms ``sum <A^j x_i, A^i x_j>`` and ``sum <A^{j+1} x_i, A^{i+1} x_j>``
    for ``A = T**n``; returns their real parts."""
    a = mpow(require_square(t), n)
    k = len(xs)
    pw = [np.asarray(x, dtype=complex) for x in xs]
    # powers[i][m] = A^m x_i
    powers = []
    for x in pw:
        row = [x]
        for _ in range(k):
            row.append(a @ row[-1])
        powers.append(row)
    base = sum(np.vdot(powers[j][i], powers[i][j]) for i in range(k) for j in range(k))
    shifted = sum(np.vdot(powers[j][i + 1], powers[i][j + 1]) for i in range(k) for j in range(k))
    return float(np.real(base)), float(np.real(shifted))


def form_inequality_check(
    spec: ExtensionSpec, rng: np.random.Generator, families: int = 20, max_k: int = 4,
    tol: float = DEFAULT_TOL,
) -> dict:
    """Test both forms of :func:`bram_halmos_forms` on random vector families.

    With ``A = T**n`` and ``c = ||A||_2**2``, the base form must be
    nonnegative and the shifted form at most ``c`` times the base form.
    Each comparison is scaled by ``(1 + c) * (sum_i sum_m ||A^m x_i||)**2``.
    """
    t = spec.compression
    a = mpow(t, spec.n)
    c = float(np.linalg.norm(a, 2)) ** 2 if a.size else 0.0
    worst_neg, worst_excess = 0.0, -math.inf
    dim = t.shape[0]
    for _ in range(families):
        k = int(rng.integers(1, max_k + 1))
        xs = [rng.normal(size=dim) + 1j * rng.normal(size=dim) for _ in range(k)]
        base, shifted = bram_halmos_forms(t, spec.n, xs)
        mass = 0.0
        for x in xs:
            v = x
            for _ in range(k + 1):
                mass += float(np.linalg.norm(v))
                v = a @ v
        scale = (1.0 + c) * mass ** 2
        worst_neg = max(worst_neg, -base / scale)
        worst_excess = max(worst_excess, (shifted - c * base) / scale)
    return {
        "c": c,
        "families": families,
        "worst_negative_base": worst_neg,
        "worst_excess": worst_excess,
        "holds": worst_neg <= tol and worst_excess <= tol,
    }


def subn_power_quasinormal_theorem_harness(
    spec: ExtensionSpec, m: int, k_max: int = 4, tol: float = DEFAULT_TOL
) -> dict:
    """If ``T**m`` is n-quasinormal, ``T`` should be n-quasinormal as well.

    ``flag`` is set when the hypothesis holds but the conclusion fails at
    ``10 * tol``; a flag means a bug or a degenerate tolerance.
    """
    if m <= 1:
        raise ValueError("m must be > 1")
    t = spec.compression
    hyp = classes.is_n_quasinormal(mpow(t, m), spec.n, tol)
    concl = classes.is_n_quasinormal(t, spec.n, 10 * tol)
    ident = classes.power_identity_check(t, spec.n, k_max, 10 * tol)
    return {
        "hypothesis": hyp.holds,
        "conclusion": concl.holds,
        "hypothesis_residual": hyp.residual,
        "conclusion_residual": concl.residual,
        "power_identity_residuals": ident.certificate.data["relative_residuals"],
        "flag": hyp.holds and not concl.holds,
    }


def run_harness(specs: Sequence[ExtensionSpec], m: int, k_max: int = 4, tol: float = DEFAULT_TOL) -> dict:
    results = [subn_power_quasinormal_theorem_harness(s, m, k_max, tol) for s in specs]
    return {
        "samples": len(results),
        "hypothesis_held": sum(r["hypothesis"] for r in results),
        "flags": [i for i, r in enumerate(results) if r["flag"]],
    }


# -- sample families ----------------------------------------------------------


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_rr_parts(k: int, rng: np.random.Generator, a_dim: int = 0):
    """Random ``(A, B, C)`` for the square-root-of-normal form.

    ``B`` and ``C`` share a random eigenbasis; ``C`` has eigenvalues in
    ``[0.1, 2]``; ``A`` is normal of size ``a_dim`` (or ``None``).
    """
    w = random_unitary(k, rng)
    b = w @ np.diag(rng.normal(size=k) + 1j * rng.normal(size=k)) @ adjoint(w)
    c = w @ np.diag(rng.uniform(0.1, 2.0, size=k)) @ adjoint(w)
    a = None
    if a_dim:
        wa = random_unitary(a_dim, rng)
        a = wa @ np.diag(rng.normal(size=a_dim) + 1j * rng.normal(size=a_dim)) @ adjoint(wa)
    return a, b, c


def random_rr_spec(rng: np.random.Generator, k: Optional[int] = None, a_dim: Optional[int] = None) -> ExtensionSpec:
    """A 2-normal ambient from the square-root form and an invariant subspace.

    In the eigenbasis of ``B`` the ambient splits into 2x2 upper-triangular
    pieces ``[[b_i, c_i], [0, -b_i]]``; the subspace keeps, for a random
    subset of pieces, either the first coordinate or both, plus random
    coordinates of the normal summand. A random global unitary hides the
    structure.
    """
    k = int(rng.integers(1, 4)) if k is None else k
    a_dim = int(rng.integers(0, 3)) if a_dim is None else a_dim
    w = random_unitary(k, rng)
    bd = rng.normal(size=k) + 1j * rng.normal(size=k)
    cd = rng.uniform(0.1, 2.0, size=k)
    b = w @ np.diag(bd) @ adjoint(w)
    c = w @ np.diag(cd) @ adjoint(w)
    a = None
    if a_dim:
        a = np.diag(rng.normal(size=a_dim) + 1j * rng.normal(size=a_dim))
    s0 = classes.rr_construct(a, b, c)
    dim = s0.shape[0]
    cols = []
    for i in range(a_dim):
        if rng.random() < 0.5:
            e = np.zeros(dim, dtype=complex)
            e[i] = 1
            cols.append(e)
    for i in range(k):
        top = np.zeros(dim, dtype=complex)
        top[a_dim:a_dim + k] = w[:, i]
        bottom = np.zeros(dim, dtype=complex)
        bottom[a_dim + k:] = w[:, i]
        choice = rng.integers(0, 3)
        if choice >= 1:
            cols.append(top)
        if choice == 2:
            cols.append(bottom)
    if not cols:
        top = np.zeros(dim, dtype=complex)
        top[a_dim:a_dim + k] = w[:, 0]
        cols.append(top)
    q0 = orthonormal_span(cols)
    g = random_unitary(dim, rng)
    return ExtensionSpec(g @ s0 @ adjoint(g), g @ q0, 2)
