import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from opclass import classes
from opclass.errors import NotCommutingError, NotNormalError, NotPositiveError
from opclass.extensions import bram_halmos_forms, random_rr_parts, random_unitary
from opclass.registry import two_u_plus_u_star

seeds = st.integers(min_value=0, max_value=2**32 - 1)

NIL = np.array([[0, 1], [0, 0]], dtype=complex)
M = np.array([[1, 2], [0, -1]], dtype=complex)


def test_traceless_triangular():
    assert np.allclose(M @ M, np.eye(2), atol=1e-15)
    assert not classes.is_normal(M).holds
    v = classes.is_n_normal(M, 2)
    assert v.holds and v.residual == 0.0
    assert not classes.is_hyponormal(M).holds
    assert classes.is_n_quasinormal(M, 2).holds
    assert classes.is_quasi_n_normal(M, 2).holds
    assert not classes.is_quasinormal(M).holds


def test_nilpotent_certificates():
    for k in range(1, 6):
        assert classes.bram_halmos_block_psd(NIL, 2, k).holds
    v = classes.is_hyponormal(NIL)
    assert not v.holds
    w = np.array([complex(*e) for e in v.to_dict()["certificate"]["data"]["witness_vector"]])
    assert np.allclose(np.abs(w), [1, 0])
    assert np.real(np.vdot(w, (NIL.conj().T @ NIL - NIL @ NIL.conj().T) @ w)) == pytest.approx(-1)


def test_identity_projection_block():
    p = np.diag([1.0, 0.0])
    t = np.block([[np.eye(2), p], [np.zeros((2, 2)), -np.eye(2)]])
    assert classes.is_n_normal(t, 2).holds
    assert not classes.is_hyponormal(t).holds


def test_two_u_plus_u_star_interior():
    t = two_u_plus_u_star(40)
    assert classes.bram_halmos_block_psd(t, 1, 1, interior=36).holds
    v = classes.bram_halmos_block_psd(t, 2, 1, interior=36)
    assert not v.holds and v.residual > 0.1


def test_bram_halmos_layout():
    rng = np.random.default_rng(3)
    t = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    m = classes.bram_halmos_matrix(t, 1, 2)
    assert np.allclose(m[3:6, 0:3], t)  # (1, 0) block is A
    assert np.allclose(m[0:3, 3:6], t.conj().T)
    assert np.allclose(m[3:6, 3:6], t.conj().T @ t)
    assert np.allclose(m, m.conj().T)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 3), st.integers(1, 3))
def test_bram_halmos_quadratic_form_matches_direct_sum(seed, n, k):
    """x* M x must equal sum <A^j x_i, A^i x_j> computed vector by vector."""
    rng = np.random.default_rng(seed)
    t = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    xs = [rng.normal(size=3) + 1j * rng.normal(size=3) for _ in range(k + 1)]
    m = classes.bram_halmos_matrix(t, n, k)
    x = np.concatenate(xs)
    base, _ = bram_halmos_forms(t, n, xs)
    assert np.real(np.vdot(x, m @ x)) == pytest.approx(base, rel=1e-9, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 4), st.integers(1, 3), st.integers(1, 3))
def test_normal_matrices_pass_everything(seed, dim, n, k):
    rng = np.random.default_rng(seed)
    t = oracles.random_normal(rng, dim)
    assert classes.is_normal(t).holds
    assert classes.is_hyponormal(t).holds
    assert classes.is_n_normal(t, n).holds
    assert classes.bram_halmos_block_psd(t, n, k).holds


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(2, 5))
def test_verdicts_unitarily_invariant(seed, dim):
    rng = np.random.default_rng(seed)
    t = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    t[np.tril_indices(dim, -1)] = 0
    u = random_unitary(dim, rng)
    s = u @ t @ u.conj().T
    for check in (classes.is_normal, classes.is_hyponormal, classes.is_quasinormal):
        assert check(t).holds == check(s).holds
    assert classes.is_n_normal(t, 2).holds == classes.is_n_normal(s, 2).holds


@settings(max_examples=30, deadline=None)
@given(seeds, st.floats(1e-3, 1e3))
def test_normal_verdict_stable_under_scaling(seed, c):
    rng = np.random.default_rng(seed)
    t = oracles.random_normal(rng, 3)
    assert classes.is_normal(c * t).holds
    bumped = t.copy()
    bumped[0, 1] += 1e-3 * np.abs(t).max()
    # the threshold tol * (1 + ||T||^2) has an absolute floor, so a fixed
    # relative defect is only guaranteed to register once ||T|| is not tiny
    if c >= 1:
        assert not classes.is_normal(c * bumped).holds


def test_power_identity_for_quasinormal_and_not():
    iso_block = np.diag([1.0, 2.0])
    assert classes.power_identity_check(iso_block, 2, 4).holds
    v = classes.power_identity_check(NIL + np.eye(2), 1, 3)
    assert not v.holds and v.note == "identity fails"
    ok = classes.power_identity_check(M, 2, 3)
    assert ok.note == "consistent up to k=3"


def test_rr_construct_validation():
    b = np.diag([1.0, 2.0])
    c = np.eye(2)
    s = classes.rr_construct(None, b, c)
    assert s.shape == (4, 4)
    assert np.allclose(s @ s, np.diag([1, 4, 1, 4]))
    with pytest.raises(NotNormalError):
        classes.rr_construct(None, NIL, c)
    with pytest.raises(NotPositiveError):
        classes.rr_construct(None, b, np.diag([1.0, 0.0]))
    with pytest.raises(NotPositiveError):
        classes.rr_construct(None, b, np.array([[1, 1], [0, 1]]))
    with pytest.raises(NotCommutingError):
        classes.rr_construct(None, b, np.array([[2, 1], [1, 2]]))
    with pytest.raises(NotNormalError):
        classes.rr_construct(NIL, b, c)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 4), st.integers(0, 3))
def test_rr_square_roots_are_2_normal(seed, k, a_dim):
    rng = np.random.default_rng(seed)
    a, b, c = random_rr_parts(k, rng, a_dim)
    s = classes.rr_construct(a, b, c)
    v = classes.is_n_normal(s, 2)
    assert v.holds and v.residual <= 1e-9 * (1 + np.abs(s).sum(axis=1).max() ** 4)
    chk = classes.hyponormal_2normal_forces_normal_check(b, c)
    assert chk["block_matches"] and chk["consistent"]
    assert not chk["hyponormal"] and not chk["normal"]


def test_zero_c_gives_normal_operator():
    chk = classes.hyponormal_2normal_forces_normal_check(np.diag([1.0, 1j]), np.zeros((2, 2)))
    assert chk["c_is_zero"] and chk["hyponormal"] and chk["normal"] and chk["consistent"]
