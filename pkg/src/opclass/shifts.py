"""Unilateral weighted shifts with eventually periodic weights.

A shift ``W e_j = alpha_j e_{j+1}`` is described by a finite prefix of
weights followed by a constant or periodic tail. Every class predicate here
is decided exactly for that family: finitely many indices determine the
answer. Weights may be ``Fraction`` (exact mode) or ``float``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from . import verdicts as V
from .errors import InvalidWeightsError, SeedLengthError, TruncationTooSmallError
from .linalg import is_psd, is_psd_exact, jacobi_scaled
from .verdicts import Certificate, ClassVerdict

Scalar = Union[Fraction, float]

# relative tolerance for comparing float weights; Fractions compare exactly
WEIGHT_RTOL = 1e-12


def _eq(a: Scalar, b: Scalar) -> bool:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b
    return math.isclose(a, b, rel_tol=WEIGHT_RTOL, abs_tol=0.0)


def _le(a: Scalar, b: Scalar) -> bool:
    return a <= b or _eq(a, b)


def parse_scalar(x, exact: bool = False) -> Scalar:
    """Read a weight literal: ``"p/q"`` and decimal strings are exact.

    Ints become Fractions. Floats stay floats unless ``exact`` is set, in
    which case their shortest decimal representation is taken literally.
    """
    if isinstance(x, bool):
        raise InvalidWeightsError(f"not a number: {x!r}")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidWeightsError(f"cannot parse weight {x!r}") from exc
    if isinstance(x, Real):
        return Fraction(repr(float(x))) if exact else float(x)
    raise InvalidWeightsError(f"not a number: {x!r}")


def _check_positive(values: Iterable[Scalar], what: str) -> tuple:
    out = tuple(values)
    for v in out:
        if not (v > 0) or (isinstance(v, float) and not math.isfinite(v)):
            raise InvalidWeightsError(f"{what} must be positive and finite, got {v}")
    return out


@dataclass(frozen=True)
class ConstantTail:
    value: Scalar

    @property
    def cycle(self) -> tuple:
        return (self.value,)


@dataclass(frozen=True)
class PeriodicTail:
    cycle: tuple

    def __post_init__(self):
        if len(self.cycle) < 1:
            raise InvalidWeightsError("periodic tail needs at least one weight")


Tail = Union[ConstantTail, PeriodicTail]


@dataclass(frozen=True)
class WeightSequence:
    """Weights ``prefix[0], ..., prefix[L-1]`` then the tail rule forever."""

    prefix: tuple = ()
    tail: Tail = field(default_factory=lambda: ConstantTail(Fraction(1)))

    def __post_init__(self):
        object.__setattr__(self, "prefix", _check_positive(self.prefix, "weights"))
        if isinstance(self.tail, PeriodicTail):
            object.__setattr__(
                self, "tail", PeriodicTail(_check_positive(self.tail.cycle, "tail weights"))
            )
        else:
            _check_positive(self.tail.cycle, "tail weight")

    @classmethod
    def constant(cls, c: Scalar) -> "WeightSequence":
        return cls((), ConstantTail(c))

    @classmethod
    def periodic(cls, cycle: Sequence[Scalar], prefix: Sequence[Scalar] = ()) -> "WeightSequence":
        return cls(tuple(prefix), PeriodicTail(tuple(cycle)))

    @classmethod
    def eventually_constant(cls, prefix: Sequence[Scalar], c: Scalar = Fraction(1)) -> "WeightSequence":
        return cls(tuple(prefix), ConstantTail(c))

    @property
    def cycle(self) -> tuple:
        return self.tail.cycle

    @property
    def period(self) -> int:
        return len(self.cycle)

    @property
    def horizon(self) -> int:
        """Prefix length plus one tail period: indices that determine everything."""
        return len(self.prefix) + self.period

    @property
    def is_exact(self) -> bool:
        return all(isinstance(v, Fraction) for v in self.prefix + self.cycle)

    def weight_at(self, j: int) -> Scalar:
        if j < 0:
            raise IndexError("weight index must be nonnegative")
        if j < len(self.prefix):
            return self.prefix[j]
        return self.cycle[(j - len(self.prefix)) % self.period]

    def weights(self, count: int) -> list:
        return [self.weight_at(j) for j in range(count)]

    def scaled(self, c: Scalar) -> "WeightSequence":
        tail = (
            ConstantTail(self.tail.value * c)
            if isinstance(self.tail, ConstantTail)
            else PeriodicTail(tuple(v * c for v in self.cycle))
        )
        return WeightSequence(tuple(v * c for v in self.prefix), tail)

    def canonical(self) -> "WeightSequence":
        """Equivalent description with shortest cycle and shortest prefix."""
        cyc = list(self.cycle)
        p = len(cyc)
        for d in range(1, p + 1):
            if p % d == 0 and all(_eq(cyc[i], cyc[(i + d) % p]) for i in range(p)):
                cyc = cyc[:d]
                break
        prefix = list(self.prefix)
        while prefix and _eq(prefix[-1], cyc[-1]):
            prefix.pop()
            cyc = [cyc[-1]] + cyc[:-1]
        tail = ConstantTail(cyc[0]) if len(cyc) == 1 else PeriodicTail(tuple(cyc))
        return WeightSequence(tuple(prefix), tail)

    def matrix(self, size: int) -> np.ndarray:
        """Leading ``size x size`` block of the shift matrix (real)."""
        m = np.zeros((size, size))
        for j in range(size - 1):
            m[j + 1, j] = float(self.weight_at(j))
        return m

    def to_json(self) -> dict:
        tail = (
            {"constant": V.jsonable(self.tail.value)}
            if isinstance(self.tail, ConstantTail)
            else {"periodic": V.jsonable(list(self.cycle))}
        )
        return {"prefix": V.jsonable(list(self.prefix)), "tail": tail}

    def __str__(self) -> str:
        def fmt(x):
            return str(x) if isinstance(x, Fraction) else f"{x:g}"

        head = ", ".join(fmt(v) for v in self.prefix)
        cyc = ", ".join(fmt(v) for v in self.cycle)
        return f"shift({head}{'; ' if head else ''}({cyc})...)"


def weights_from_json(doc: dict, exact: bool = False) -> WeightSequence:
    prefix = tuple(parse_scalar(x, exact) for x in doc.get("prefix", []))
    tail = doc.get("tail", {"constant": 1})
    if "constant" in tail:
        return WeightSequence(prefix, ConstantTail(parse_scalar(tail["constant"], exact)))
    if "periodic" in tail:
        return WeightSequence(prefix, PeriodicTail(tuple(parse_scalar(x, exact) for x in tail["periodic"])))
    raise InvalidWeightsError("tail must have a 'constant' or 'periodic' key")


def weight_at(w: WeightSequence, j: int) -> Scalar:
    return w.weight_at(j)


# -- moments and power decomposition -----------------------------------------


@dataclass(frozen=True)
class MomentSequence:
    gammas: tuple

    def __getitem__(self, k):
        return self.gammas[k]

    def __len__(self):
        return len(self.gammas)


def moments(w: WeightSequence, k_max: int) -> MomentSequence:
    """``gamma_0 = 1`` and ``gamma_{k+1} = alpha_k**2 * gamma_k`` for ``k < k_max``."""
    g = [Fraction(1) if w.is_exact else 1.0]
    for k in range(k_max):
        a = w.weight_at(k)
        g.append(a * a * g[-1])
    return MomentSequence(tuple(g))


def window_product(w: WeightSequence, j: int, n: int) -> Scalar:
    out = w.weight_at(j)
    for i in range(1, n):
        out = out * w.weight_at(j + i)
    return out


@dataclass(frozen=True)
class PowerDecomposition:
    """``W**n`` as an orthogonal sum of ``n`` shifts.

    Component ``j`` acts on ``span{e_j, e_{j+n}, ...}`` with weights
    ``alpha_{j+mn} * ... * alpha_{j+mn+n-1}``.
    """

    n: int
    components: tuple

    def to_json(self) -> dict:
        return {"n": self.n, "components": [c.to_json() for c in self.components]}


def decompose_power(w: WeightSequence, n: int) -> PowerDecomposition:
    if n < 1:
        raise ValueError("power must be >= 1")
    L, p = len(w.prefix), w.period
    q = p // math.gcd(p, n)
    comps = []
    for j in range(n):
        m0 = max(0, -(-(L - j) // n))
        beta = [window_product(w, j + m * n, n) for m in range(m0 + q)]
        comp = WeightSequence(tuple(beta[:m0]), PeriodicTail(tuple(beta[m0:])))
        comps.append(comp.canonical())
    return PowerDecomposition(n, tuple(comps))


# -- class predicates ---------------------------------------------------------


def is_normal_shift(w: WeightSequence) -> ClassVerdict:
    """Never holds: the (0,0) entry of ``W*W - WW*`` is ``alpha_0**2 > 0``."""
    a0 = float(w.weight_at(0))
    return ClassVerdict(
        "normal", False, a0 * a0,
        Certificate(V.RULE, {"self_commutator_00": a0 * a0}),
        "weighted shifts are never normal",
    )


def is_n_normal_shift(w: WeightSequence, n: int) -> ClassVerdict:
    """Never holds: ``W**n`` is a sum of shifts, each of which is not normal."""
    p0 = float(window_product(w, 0, n))
    return ClassVerdict(
        f"{n}_normal", False, p0 * p0,
        Certificate(V.RULE, {"self_commutator_00_of_power": p0 * p0}),
        "powers of weighted shifts are never normal",
    )


def is_hyponormal_shift(w: WeightSequence) -> ClassVerdict:
    """Hyponormal iff the weights are non-decreasing."""
    horizon = len(w.prefix) + 2 * w.period
    for j in range(horizon):
        a, b = w.weight_at(j), w.weight_at(j + 1)
        if not _le(a, b):
            gap = float(a) ** 2 - float(b) ** 2
            return ClassVerdict(
                "hyponormal", False, gap,
                Certificate(V.VIOLATION, {"first_violation": j, "weights": [a, b]}),
            )
    return ClassVerdict(
        "hyponormal", True, 0.0,
        Certificate(V.RULE, {"first_violation": None, "checked_up_to": horizon}),
    )


def _hankel_stop(w: WeightSequence, k: int) -> int:
    return len(w.prefix) + 2 * w.period + 2 * k


def is_k_hyponormal_shift(
    w: WeightSequence, k: int, k_window: Optional[int] = None, tol: float = 1e-9
) -> ClassVerdict:
    """PSD test of the moment Hankel matrices ``(gamma_{m+i+j})_{i,j<=k}``.

    Matrices are checked for ``m = 0..M_stop``. Past the prefix, the
    normalized Hankel matrix ``H(m) / gamma_m`` depends only on ``m`` modulo
    the tail period, so the range is exhaustive. ``k_window`` can extend it.

    Exact weights get an exact decision. Otherwise each matrix is Jacobi
    scaled (unit diagonal) before the eigenvalue test, since moment entries
    can span many orders of magnitude. Reported eigenvalues are those of the
    scaled matrix.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    m_stop = _hankel_stop(w, k)
    if k_window is not None:
        m_stop = max(m_stop, k_window)
    g = moments(w, m_stop + 2 * k + 1).gammas
    exact = w.is_exact
    floor = math.inf
    name = f"{k}_hyponormal"
    for m in range(m_stop + 1):
        rows = [[g[m + i + j] / g[m] for j in range(k + 1)] for i in range(k + 1)]
        scaled, inv = jacobi_scaled(np.array(rows, dtype=float))
        lam, vecs = np.linalg.eigh(np.real(scaled))
        floor = min(floor, float(lam[0]))
        psd = is_psd_exact(rows) if exact else is_psd(scaled, tol).is_psd
        if not psd:
            x = inv * vecs[:, 0]
            return ClassVerdict(
                name, False, max(0.0, -float(lam[0])),
                Certificate(V.VIOLATION, {
                    "m": m,
                    "min_eigenvalue": float(lam[0]),
                    "witness_vector": x / np.linalg.norm(x),
                    "exact": exact,
                }),
            )
    return ClassVerdict(
        name, True, max(0.0, -floor),
        Certificate(V.PSD, {"eigenvalue_floor": floor, "m_checked": m_stop, "exact": exact}),
    )


def hankel_matrix(w: WeightSequence, k: int, m: int) -> list:
    """``(gamma_{m+i+j})_{i,j=0..k}`` with exact entries in exact mode."""
    g = moments(w, m + 2 * k).gammas
    return [[g[m + i + j] for j in range(k + 1)] for i in range(k + 1)]


def is_subnormal_shift(w: WeightSequence) -> ClassVerdict:
    """Exact subnormality for constant-or-periodic tails.

    A non-decreasing shift with eventually periodic weights has a constant
    tail ``c``. Two equal consecutive weights past index 0 force a subnormal
    shift to be flat, so it is subnormal exactly when
    ``alpha_1 = alpha_2 = ... = c`` (``alpha_0 <= c`` is then free: the
    Berger measure sits on ``{0, c**2}``).
    """
    hyp = is_hyponormal_shift(w)
    if not hyp.holds:
        j = hyp.certificate.data["first_violation"]
        return ClassVerdict(
            "subnormal", False, hyp.residual,
            Certificate(V.RULE, {"rule": "not_hyponormal", "index": j}),
            f"weights decrease at index {j}, so not even hyponormal",
        )
    c = w.canonical()
    if isinstance(c.tail, PeriodicTail):
        return ClassVerdict(
            "subnormal", False, 0.0,
            Certificate(V.RULE, {"rule": "nonconstant_periodic_tail"}),
            "a non-constant periodic tail is not non-decreasing",
        )
    top = c.tail.value
    for j in range(1, len(c.prefix)):
        if not _eq(c.prefix[j], top):
            return ClassVerdict(
                "subnormal", False, float(top - c.prefix[j]) / float(top),
                Certificate(V.RULE, {"rule": "not_flat", "index": j, "tail": top}),
                f"alpha_{j} differs from the tail value while the tail repeats",
            )
    return ClassVerdict(
        "subnormal", True, 0.0,
        Certificate(V.RULE, {"rule": "flat_from_index_1", "tail": top}),
        "flat from index 1",
    )


def is_n_subnormal_shift(w: WeightSequence, n: int) -> ClassVerdict:
    """``W**n`` is subnormal iff every component of its decomposition is."""
    dec = decompose_power(w, n)
    parts = [is_subnormal_shift(c) for c in dec.components]
    holds = all(p.holds for p in parts)
    failing = [j for j, p in enumerate(parts) if not p.holds]
    return ClassVerdict(
        f"{n}_subnormal", holds, max((p.residual for p in parts), default=0.0),
        Certificate(V.DECOMPOSITION, {
            "components": [c.to_json() for c in dec.components],
            "component_subnormal": [p.holds for p in parts],
            "failing_components": failing,
        }),
    )


def is_quasinormal_shift(w: WeightSequence) -> ClassVerdict:
    """Quasinormal iff all weights are equal."""
    a0 = w.weight_at(0)
    for j in range(1, w.horizon):
        if not _eq(w.weight_at(j), a0):
            return ClassVerdict(
                "quasinormal", False, abs(float(w.weight_at(j)) - float(a0)),
                Certificate(V.VIOLATION, {"index": j}),
            )
    return ClassVerdict("quasinormal", True, 0.0, Certificate(V.RULE, {"constant": a0}))


@dataclass(frozen=True)
class PeriodicityWitness:
    period: int
    horizon: int
    max_residual: float

    def to_dict(self) -> dict:
        return {"period": self.period, "horizon": self.horizon, "max_residual": self.max_residual}


def _rel_residual(a: Scalar, b: Scalar) -> float:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return 0.0 if a == b else float(abs(a - b) / max(a, b))
    return abs(float(a) - float(b)) / max(float(a), float(b))


def minimal_period(w: WeightSequence, max_period: int, horizon: Optional[int] = None):
    """Smallest ``d <= max_period`` with ``alpha_{j+d} = alpha_j`` on the horizon."""
    horizon = horizon or len(w.prefix) + 2 * w.period + max_period
    for d in range(1, max_period + 1):
        res = 0.0
        ok = True
        for j in range(horizon):
            a, b = w.weight_at(j), w.weight_at(j + d)
            if not _eq(a, b):
                ok = False
                break
            res = max(res, _rel_residual(a, b))
        if ok:
            return PeriodicityWitness(d, horizon, res)
    return None


def is_n_quasinormal_shift(w: WeightSequence, n: int) -> ClassVerdict:
    """``W**n`` quasinormal iff window products satisfy ``P_j = P_{j+n}``."""
    horizon = len(w.prefix) + w.period * n + n
    name = f"{n}_quasinormal"
    worst = 0.0
    for j in range(horizon):
        a, b = window_product(w, j, n), window_product(w, j + n, n)
        if not _eq(a, b):
            return ClassVerdict(
                name, False, _rel_residual(a, b),
                Certificate(V.VIOLATION, {"index": j, "window_products": [a, b]}),
            )
        worst = max(worst, _rel_residual(a, b))
    wit = minimal_period(w, n)
    return ClassVerdict(
        name, True, worst,
        Certificate(V.PERIODICITY, {
            "period": wit.period if wit else None,
            "horizon": wit.horizon if wit else horizon,
            "max_residual": wit.max_residual if wit else None,
        }),
    )


def is_quasi_n_normal_shift(w: WeightSequence, n: int) -> ClassVerdict:
    """``W`` commutes with ``W*^n W^n`` iff ``alpha_{j+n} = alpha_j`` for all ``j``.

    ``W*^n W^n`` is diagonal with entries ``P_j**2``; commuting with ``W``
    forces ``P_j = P_{j+1}``.
    """
    name = f"quasi_{n}_normal"
    for j in range(w.horizon):
        a, b = w.weight_at(j), w.weight_at(j + n)
        if not _eq(a, b):
            return ClassVerdict(
                name, False, _rel_residual(a, b),
                Certificate(V.VIOLATION, {"index": j, "weights": [a, b]}),
            )
    return ClassVerdict(name, True, 0.0, Certificate(V.RULE, {"period_divides": n}))


# -- quasinormal recurrence ---------------------------------------------------


def _validate_seed(n: int, seed: Sequence[Scalar]) -> list:
    if n < 1:
        raise ValueError("n must be >= 1")
    if len(seed) != 2 * n - 1:
        raise SeedLengthError(f"seed must have {2 * n - 1} entries for n={n}, got {len(seed)}")
    return list(_check_positive(seed, "seed weights"))


def derive_quasinormal_continuation(n: int, seed: Sequence[Scalar], steps: int) -> list:
    """Extend ``seed`` (length ``2n-1``) by the forced relation ``P_j = P_{j+n}``.

    Each step solves for the newest weight:
    ``alpha_{j+2n-1} = (alpha_j ... alpha_{j+n-1}) / (alpha_{j+n} ... alpha_{j+2n-2})``.
    Fractions in, Fractions out.
    """
    a = _validate_seed(n, seed)
    for j in range(steps):
        num = math.prod(a[j:j + n])
        den = math.prod(a[j + n:j + 2 * n - 1]) if n > 1 else 1
        a.append(num / den)
    return a


@dataclass(frozen=True)
class ProbeResult:
    escaped_at: Optional[int]
    periodic_within: Optional[tuple]
    weights: tuple = ()

    def to_dict(self) -> dict:
        return {
            "escaped_at": self.escaped_at,
            "periodic_within": list(self.periodic_within) if self.periodic_within else None,
        }


def boundedness_forces_periodicity_probe(
    n: int, seed: Sequence[Scalar], bound_M: float, horizon: int
) -> ProbeResult:
    """Run the continuation for ``horizon`` steps and watch the weights.

    Reports the first weight index leaving ``[1/M, M]``; otherwise the best
    period ``d <= n`` and its relative residual
    ``max_j |alpha_{j+d} - alpha_j| / max(alpha_j, alpha_{j+d})``.
    """
    if bound_M <= 1:
        raise ValueError("bound must exceed 1")
    a = _validate_seed(n, seed)
    exact = all(isinstance(x, Fraction) for x in a)
    hi = Fraction(bound_M) if exact else float(bound_M)
    lo = 1 / hi

    def outside(x):
        return x < lo or x > hi

    for i, x in enumerate(a):
        if outside(x):
            return ProbeResult(i, None, tuple(a))
    for j in range(horizon):
        num = math.prod(a[j:j + n])
        den = math.prod(a[j + n:j + 2 * n - 1]) if n > 1 else 1
        x = num / den
        a.append(x)
        if outside(x):
            return ProbeResult(len(a) - 1, None, tuple(a))
    best = None
    for d in range(1, n + 1):
        res = max(
            (_rel_residual(a[j], a[j + d]) for j in range(len(a) - d)), default=0.0
        )
        if best is None or res < best[1]:
            best = (d, res)
    return ProbeResult(None, best, tuple(a))


# -- quadratic hyponormality --------------------------------------------------


def default_s_grid() -> list:
    return [0.0] + list(np.logspace(-3, 3, 64))


def quadratic_hyponormality_probe(
    w: WeightSequence,
    s_grid: Optional[Sequence[float]] = None,
    trunc_N: int = 40,
    tol: float = 1e-8,
) -> ClassVerdict:
    """Search for ``s >= 0`` making ``W**2 + sW`` fail hyponormality.

    The self-commutator of the order-``trunc_N`` truncation agrees with the
    infinite one on its leading ``trunc_N - 4`` block, so a negative
    eigenvalue there (below ``-tol * (1 + ||block||)``) refutes quadratic
    hyponormality. A pass only means no refutation on the grid.
    """
    if trunc_N < 8:
        raise TruncationTooSmallError(f"trunc_N must be >= 8, got {trunc_N}")
    grid = default_s_grid() if s_grid is None else list(s_grid)
    if not grid:
        raise ValueError("s_grid is empty")
    wm = w.matrix(trunc_N)
    w2 = wm @ wm
    keep = trunc_N - 4
    worst = (None, math.inf, None)
    refuting = None
    for s in grid:
        p = w2 + s * wm
        c = (p.T @ p - p @ p.T)[:keep, :keep]
        verdict = is_psd(c, tol)
        if verdict.min_eigenvalue < worst[1]:
            worst = (float(s), verdict.min_eigenvalue, verdict.witness_vector)
        if not verdict.is_psd and (refuting is None or verdict.min_eigenvalue < refuting[1]):
            refuting = (float(s), verdict.min_eigenvalue, verdict.witness_vector)
    refuted = refuting is not None
    s_star, lam, vec = refuting if refuted else worst
    data = {"worst_s": s_star, "min_interior_eigenvalue": lam, "trunc_N": trunc_N,
            "grid_size": len(grid)}
    if refuted:
        data["witness_vector"] = vec
        return ClassVerdict(
            "quadratically_hyponormal", False, -lam,
            Certificate(V.VIOLATION, data), "refuted",
        )
    return ClassVerdict(
        "quadratically_hyponormal", True, max(0.0, -lam),
        Certificate(V.PSD, data), "not refuted on the grid",
    )
