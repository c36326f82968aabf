from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from opclass.errors import EmptyInputError, NonSquareError, NotHermitianError
from opclass.linalg import (
    hermitian_eigenvalues,
    inf_norm,
    is_psd,
    is_psd_exact,
    jacobi_scaled,
    matrix_from_json,
    matrix_to_json,
    mpow,
    orthonormal_span,
    self_commutator,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def rand_complex(rng, shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def test_inf_norm_is_max_row_sum():
    m = np.array([[1, -2], [3j, 0.5]])
    assert inf_norm(m) == pytest.approx(3.5)
    assert inf_norm(np.zeros((0, 0))) == 0.0


def test_mpow_matches_numpy():
    rng = np.random.default_rng(0)
    a = rand_complex(rng, (4, 4))
    assert np.allclose(mpow(a, 5), np.linalg.matrix_power(a, 5))
    assert np.array_equal(mpow(a, 0), np.eye(4))
    with pytest.raises(ValueError):
        mpow(a, -1)


def test_non_square_rejected():
    with pytest.raises(NonSquareError):
        is_psd(np.ones((2, 3)))


def test_hermitian_eigenvalues_rejects_non_hermitian():
    with pytest.raises(NotHermitianError) as err:
        hermitian_eigenvalues(np.array([[0, 1], [0, 0]]))
    assert err.value.deviation == pytest.approx(1.0)


def test_psd_diagonal_cases():
    assert is_psd(np.diag([0.0, 1.0, 2.0])).is_psd
    v = is_psd(np.diag([1.0, -0.5]))
    assert not v.is_psd
    assert v.min_eigenvalue == pytest.approx(-0.5)
    assert np.allclose(np.abs(v.witness_vector), [0, 1])


def test_psd_tolerance_is_relative():
    # threshold is tol * (1 + ||M||) = 1e-3 here
    assert is_psd(np.diag([1e6, -1e-4]), 1e-9).is_psd
    assert not is_psd(np.diag([1e6, -1e-2]), 1e-9).is_psd
    assert not is_psd(np.diag([1.0, -1e-4]), 1e-9).is_psd


def test_psd_empty_matrix():
    assert is_psd(np.zeros((0, 0))).is_psd


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(1, 6))
def test_gram_matrices_are_psd(seed, dim):
    rng = np.random.default_rng(seed)
    b = rand_complex(rng, (dim, dim))
    assert is_psd(b.conj().T @ b).is_psd


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(2, 6))
def test_witness_realizes_negative_eigenvalue(seed, dim):
    rng = np.random.default_rng(seed)
    b = rand_complex(rng, (dim, dim))
    h = b + b.conj().T - 10 * np.eye(dim)
    v = is_psd(h)
    assert not v.is_psd
    w = v.witness_vector
    assert np.linalg.norm(w) == pytest.approx(1.0)
    assert np.real(np.vdot(w, h @ w)) == pytest.approx(v.min_eigenvalue)


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(2, 6), st.floats(1e-3, 1e3))
def test_psd_verdict_scale_invariant(seed, dim, c):
    rng = np.random.default_rng(seed)
    b = rand_complex(rng, (dim, dim))
    h = b + b.conj().T
    assert is_psd(h).is_psd == is_psd(c * h).is_psd


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(1, 7), st.integers(1, 7))
def test_orthonormal_span_properties(seed, dim, count):
    rng = np.random.default_rng(seed)
    vecs = [rand_complex(rng, dim) for _ in range(count)]
    vecs.append(vecs[0] + 2 * vecs[-1])  # dependent vector must be dropped
    q = orthonormal_span(vecs)
    assert q.shape[1] == min(dim, count)
    assert np.allclose(q.conj().T @ q, np.eye(q.shape[1]), atol=1e-10)
    for v in vecs:
        assert np.allclose(q @ (q.conj().T @ v), v, atol=1e-8)


def test_orthonormal_span_empty():
    with pytest.raises(EmptyInputError):
        orthonormal_span([])
    assert orthonormal_span([np.zeros(3)]).shape == (3, 0)


def test_self_commutator_of_shift_block():
    u = np.diag([1.0, 1.0], -1)
    assert np.allclose(self_commutator(u), np.diag([1.0, 0.0, -1.0]))


def test_matrix_json_round_trip():
    rng = np.random.default_rng(5)
    m = rand_complex(rng, (2, 3))
    assert np.array_equal(matrix_from_json(matrix_to_json(m)), m)
    assert np.array_equal(matrix_from_json({"rows": 1, "cols": 2, "entries": [1, 2]}),
                          np.array([[1, 2]], dtype=complex))


int_matrix = st.integers(1, 4).flatmap(
    lambda n: st.lists(st.lists(st.integers(-3, 3), min_size=n, max_size=n), min_size=n, max_size=n))


@settings(max_examples=200, deadline=None)
@given(int_matrix, st.booleans())
def test_exact_psd_matches_principal_minors(b, gram):
    n = len(b)
    if gram:  # B B^T: PSD, often singular
        rows = [[sum(F(b[i][t]) * b[j][t] for t in range(n)) for j in range(n)] for i in range(n)]
    else:
        rows = [[F(b[i][j] + b[j][i]) for j in range(n)] for i in range(n)]
    assert is_psd_exact(rows) == oracles.exact_psd(rows)
    if gram:
        assert is_psd_exact(rows)


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(1, 5))
def test_jacobi_scaling_preserves_psd_verdict(seed, dim):
    rng = np.random.default_rng(seed)
    d = np.diag(10.0 ** rng.uniform(-3, 3, size=dim))
    b = rand_complex(rng, (dim, dim))
    h = b + b.conj().T
    scaled, inv = jacobi_scaled(d @ h @ d)
    assert np.allclose(np.diag(scaled)[np.diag(d @ h @ d).real > 0], 1.0)
    assert is_psd(scaled).is_psd == is_psd(h).is_psd
