"""Catalogue of witness operators and the class memberships they separate.

Expected verdicts are fixed constants. The registry checks the code
against known answers, so nothing here is computed from the code itself.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction as F
from typing import Callable, Optional, Sequence

import numpy as np

from . import classes, shifts, toeplitz
from .linalg import adjoint, inf_norm
from .schemas import OperatorSpec

HOLDS, FAILS = True, False

TRUNC_N = 40
PATEL_N = 10
TOEPLITZ_ORDER = 16


@dataclass(frozen=True)
class Claim:
    class_name: str
    expected: bool
    check: Callable[[OperatorSpec], bool]


@dataclass(frozen=True)
class RegistryEntry:
    name: str
    witness: OperatorSpec
    claims: tuple
    provenance: str


@dataclass(frozen=True)
class ClaimResult:
    entry: str
    class_name: str
    expected: bool
    observed: Optional[bool]
    error: str = ""

    @property
    def passed(self) -> bool:
        return self.observed is not None and self.observed == self.expected

    def to_dict(self) -> dict:
        return {"entry": self.entry, "class_name": self.class_name, "expected": self.expected,
                "observed": self.observed, "passed": self.passed, "error": self.error}


# -- witnesses ----------------------------------------------------------------


def two_u_plus_u_star(size: int = TRUNC_N) -> np.ndarray:
    """Truncation of ``2U + U*`` for the unilateral shift ``U``."""
    u = np.diag(np.ones(size - 1), -1).astype(complex)
    return 2 * u + adjoint(u)


def patel_truncation(size: int = PATEL_N) -> np.ndarray:
    """Compression to ``e_0..e_{2N}`` of the operator fixing ``e_0``, sending
    ``e_{2k-1}`` to ``e_{2k}`` and killing ``e_{2k}`` (``k >= 1``).

    The span is invariant, and the square is the projection onto ``e_0``.
    """
    dim = 2 * size + 1
    t = np.zeros((dim, dim), dtype=complex)
    t[0, 0] = 1.0
    for k in range(1, size + 1):
        t[2 * k, 2 * k - 1] = 1.0
    return t


def _matrix(spec: OperatorSpec) -> np.ndarray:
    if spec.kind == "matrix":
        return spec.payload
    if spec.kind == "toeplitz":
        sym, order = spec.payload
        return toeplitz.assemble(sym, order).matrix
    raise TypeError(f"no dense matrix for {spec.kind}")


def _m(fn):
    return lambda spec: bool(fn(_matrix(spec)))


def _w(fn):
    return lambda spec: bool(fn(spec.payload))


def _t(fn):
    def run(spec):
        sym, order = spec.payload
        return bool(fn(sym, toeplitz.assemble(sym, order)))
    return run


def _is_rank_one_projection_onto_e0(t: np.ndarray) -> bool:
    sq = t @ t
    target = np.zeros_like(sq)
    target[0, 0] = 1.0
    return inf_norm(sq - target) <= 1e-12


def _square_component_subnormal(w: shifts.WeightSequence, index: int) -> bool:
    return shifts.is_subnormal_shift(shifts.decompose_power(w, 2).components[index]).holds


def _entries() -> list:
    nil = OperatorSpec("matrix", np.array([[0, 1], [0, 0]], dtype=complex))
    traceless = OperatorSpec("matrix", np.array([[1, 2], [0, -1]], dtype=complex))
    p = np.diag([1.0, 0.0])
    ipi = OperatorSpec("matrix", np.block([[np.eye(2), p], [np.zeros((2, 2)), -np.eye(2)]]).astype(complex))
    tuu = OperatorSpec("matrix", two_u_plus_u_star())
    interior = TRUNC_N - 4
    ab = OperatorSpec("shift", shifts.WeightSequence.eventually_constant([F(1, 2), F(3, 4)]))
    abc = OperatorSpec("shift", shifts.WeightSequence.eventually_constant([F(1, 2), F(3, 5), F(7, 10)]))
    const = OperatorSpec("shift", shifts.WeightSequence.constant(F(1)))
    patel = OperatorSpec("matrix", patel_truncation())
    e12 = np.array([[0, 1], [0, 0]], dtype=complex)
    sym_const = OperatorSpec("toeplitz", (toeplitz.MatrixSymbol(2, {0: e12}), TOEPLITZ_ORDER))
    sym_z = OperatorSpec("toeplitz", (toeplitz.MatrixSymbol(2, {1: e12}), TOEPLITZ_ORDER))

    return [
        RegistryEntry("nilpotent-2x2", nil, (
            Claim("2_subnormal_certificate_k<=5", HOLDS, _m(
                lambda a: all(classes.bram_halmos_block_psd(a, 2, k).holds for k in range(1, 6)))),
            Claim("2_normal", HOLDS, _m(lambda a: classes.is_n_normal(a, 2).holds)),
            Claim("hyponormal", FAILS, _m(lambda a: classes.is_hyponormal(a).holds)),
        ), "nilpotent square: the square is zero, hence subnormal, while the matrix is not hyponormal"),
        RegistryEntry("two-u-plus-u-star-truncation", tuu, (
            Claim("hyponormal_interior", HOLDS, _m(
                lambda a: classes.bram_halmos_block_psd(a, 1, 1, interior=interior).holds)),
            Claim("square_hyponormal_interior", FAILS, _m(
                lambda a: classes.bram_halmos_block_psd(a, 2, 1, interior=interior).holds)),
        ), "2U + U* is hyponormal but its square is not"),
        RegistryEntry("traceless-upper-triangular", traceless, (
            Claim("normal", FAILS, _m(lambda a: classes.is_normal(a).holds)),
            Claim("2_normal", HOLDS, _m(lambda a: classes.is_n_normal(a, 2).holds)),
            Claim("hyponormal", FAILS, _m(lambda a: classes.is_hyponormal(a).holds)),
        ), "M = [[1, 2], [0, -1]] squares to the identity but is not normal"),
        RegistryEntry("identity-projection-block", ipi, (
            Claim("2_normal", HOLDS, _m(lambda a: classes.is_n_normal(a, 2).holds)),
            Claim("hyponormal", FAILS, _m(lambda a: classes.is_hyponormal(a).holds)),
        ), "[[I, P], [0, -I]] with a projection P squares to I and is not hyponormal"),
        RegistryEntry("shift-half-three-quarters-flat", ab, (
            Claim("hyponormal", HOLDS, _w(lambda w: shifts.is_hyponormal_shift(w).holds)),
            Claim("subnormal", FAILS, _w(lambda w: shifts.is_subnormal_shift(w).holds)),
            Claim("2_subnormal", HOLDS, _w(lambda w: shifts.is_n_subnormal_shift(w, 2).holds)),
            Claim("quadratically_hyponormal", FAILS,
                  _w(lambda w: shifts.quadratic_hyponormality_probe(w).holds)),
            Claim("2_quasinormal", FAILS, _w(lambda w: shifts.is_n_quasinormal_shift(w, 2).holds)),
            Claim("quasi_2_normal", FAILS, _w(lambda w: shifts.is_quasi_n_normal_shift(w, 2).holds)),
        ), "weights (1/2, 3/4, 1, 1, ...): square subnormal, not even quadratically hyponormal"),
        RegistryEntry("shift-half-three-fifths-seven-tenths-flat", abc, (
            Claim("hyponormal", HOLDS, _w(lambda w: shifts.is_hyponormal_shift(w).holds)),
            Claim("subnormal", FAILS, _w(lambda w: shifts.is_subnormal_shift(w).holds)),
            Claim("3_subnormal", HOLDS, _w(lambda w: shifts.is_n_subnormal_shift(w, 3).holds)),
            Claim("2_subnormal", FAILS, _w(lambda w: shifts.is_n_subnormal_shift(w, 2).holds)),
            Claim("square_component_0_subnormal", FAILS, _w(lambda w: _square_component_subnormal(w, 0))),
            Claim("quadratically_hyponormal", FAILS,
                  _w(lambda w: shifts.quadratic_hyponormality_probe(w).holds)),
        ), "weights (1/2, 3/5, 7/10, 1, ...): cube subnormal, square not"),
        RegistryEntry("constant-weight-shift", const, (
            Claim("quasinormal", HOLDS, _w(lambda w: shifts.is_quasinormal_shift(w).holds)),
            Claim("subnormal", HOLDS, _w(lambda w: shifts.is_subnormal_shift(w).holds)),
            Claim("normal", FAILS, _w(lambda w: shifts.is_normal_shift(w).holds)),
            Claim("2_normal", FAILS, _w(lambda w: shifts.is_n_normal_shift(w, 2).holds)),
        ), "the unilateral shift is quasinormal and subnormal but never normal"),
        RegistryEntry("patel-truncation", patel, (
            Claim("square_is_projection_onto_e0", HOLDS, _m(_is_rank_one_projection_onto_e0)),
            Claim("2_normal", HOLDS, _m(lambda a: classes.is_n_normal(a, 2).holds)),
            Claim("hyponormal", FAILS, _m(lambda a: classes.is_hyponormal(a).holds)),
            Claim("co_hyponormal", FAILS, _m(lambda a: classes.is_hyponormal(adjoint(a)).holds)),
        ), "an operator whose square is the rank-one projection onto e_0, neither hyponormal nor co-hyponormal"),
        RegistryEntry("toeplitz-constant-nilpotent-symbol", sym_const, (
            Claim("symbol_normal_ae", FAILS, _t(lambda s, tr: toeplitz.symbol_is_normal_ae(s).holds)),
            Claim("hyponormal_interior", FAILS,
                  _t(lambda s, tr: toeplitz.truncated_class_probe(tr, "hyponormal").holds)),
            Claim("2_normal", HOLDS, _t(lambda s, tr: classes.is_n_normal(tr.matrix, 2).holds)),
        ), "block Toeplitz operator with symbol [[0, 1], [0, 0]]"),
        RegistryEntry("toeplitz-z-nilpotent-symbol", sym_z, (
            Claim("symbol_normal_ae", FAILS, _t(lambda s, tr: toeplitz.symbol_is_normal_ae(s).holds)),
            Claim("hyponormal_interior", FAILS,
                  _t(lambda s, tr: toeplitz.truncated_class_probe(tr, "hyponormal").holds)),
            Claim("2_normal", HOLDS, _t(lambda s, tr: classes.is_n_normal(tr.matrix, 2).holds)),
            Claim("2_quasinormal", HOLDS,
                  _t(lambda s, tr: toeplitz.truncated_class_probe(tr, ("n_quasinormal", 2)).holds)),
        ), "block Toeplitz operator with symbol [[0, z], [0, 0]]: square is zero"),
    ]


REGISTRY: tuple = tuple(_entries())


def select(name_filter: Optional[str] = None, entries: Sequence[RegistryEntry] = REGISTRY) -> list:
    if not name_filter:
        return list(entries)
    return [e for e in entries if name_filter in e.name]


def run_entry(entry: RegistryEntry) -> list:
    out = []
    for claim in entry.claims:
        try:
            observed, err = claim.check(entry.witness), ""
        except Exception as exc:  # a crash is reported as a failed claim
            observed, err = None, f"{type(exc).__name__}: {exc}"
        out.append(ClaimResult(entry.name, claim.class_name, claim.expected, observed, err))
    return out


def run(entries: Sequence[RegistryEntry], workers: int = 4) -> list:
    """Run entries concurrently; results come back in entry order."""
    with ThreadPoolExecutor(max_workers=workers) as pool:
        per_entry = list(pool.map(run_entry, entries))
    return [r for rs in per_entry for r in rs]


def with_flipped_claim(entry: RegistryEntry, index: int = 0) -> RegistryEntry:
    """Copy of ``entry`` with one expected verdict inverted."""
    claims = list(entry.claims)
    c = claims[index]
    claims[index] = replace(c, expected=not c.expected)
    return replace(entry, claims=tuple(claims))


def format_table(results: Sequence[ClaimResult]) -> str:
    rows = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        exp = "holds" if r.expected else "fails"
        obs = "error" if r.observed is None else ("holds" if r.observed else "fails")
        line = f"{status}  {r.entry:<44} {r.class_name:<32} expected {exp:<5} observed {obs}"
        if r.error:
            line += f"  ({r.error})"
        rows.append(line)
    return "\n".join(rows)
