import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistlock import (
    NoStableStateError,
    analyze,
    assemble_k,
    cdt_eigenvalues,
    critical_k,
    lambda_continuum,
    lambda_grid,
    lambda_via_dft,
    make_distance_lag,
    make_k_ring,
    predicted_wave_q,
)
from twistlock.stability import critical_k_scan, default_tol
from twistlock.verify import random_lags, random_network

# smallest k from which the 2k-regular ring keeps only synchrony stable, for n = 10..100;
# frozen from numpy.linalg.eigvalsh of the dense Jacobians at every q-state
STAIRCASE = {
    10: 3, 11: 4, 12: 4, 13: 4, 14: 5, 15: 5, 16: 5, 17: 6, 18: 6, 19: 6, 20: 7, 21: 7, 22: 8, 23: 8, 24: 8,
    25: 9, 26: 9, 27: 9, 28: 10, 29: 10, 30: 10, 31: 11, 32: 11, 33: 11, 34: 12, 35: 12, 36: 12, 37: 13,
    38: 13, 39: 13, 40: 14, 41: 14, 42: 14, 43: 15, 44: 15, 45: 15, 46: 16, 47: 16, 48: 16, 49: 17, 50: 17,
    51: 17, 52: 18, 53: 18, 54: 18, 55: 19, 56: 19, 57: 19, 58: 20, 59: 20, 60: 20, 61: 21, 62: 21, 63: 21,
    64: 22, 65: 22, 66: 22, 67: 23, 68: 23, 69: 23, 70: 24, 71: 24, 72: 25, 73: 25, 74: 25, 75: 26, 76: 26,
    77: 26, 78: 27, 79: 27, 80: 27, 81: 28, 82: 28, 83: 28, 84: 29, 85: 29, 86: 29, 87: 30, 88: 30, 89: 30,
    90: 31, 91: 31, 92: 31, 93: 32, 94: 32, 95: 32, 96: 33, 97: 33, 98: 33, 99: 34, 100: 34,
}


def test_complete_graph_rates():
    rep = analyze(make_k_ring(5, 2))
    assert np.allclose(rep.lam[1:, 0], -5.0, rtol=0, atol=1e-12)
    assert 0 in rep.stable_set


def test_fig1_finite_vs_continuum():
    rep = lambda_via_dft(make_k_ring(21, 2))
    assert rep.max_lambda[3] > 0
    assert all(rep.max_lambda[q] < 0 for q in (0, 1, 2))
    cont = lambda_continuum(21, 2)
    assert cont[1:, 3].max() < 0


def test_k_ring_101_10_stable_set():
    rep = analyze(make_k_ring(101, 10))
    assert rep.stable_signed() == [-3, -2, -1, 0, 1, 2, 3]
    assert rep.basin_rank[0] == 0


def test_lagged_k_ring_101_10_prediction():
    net = make_k_ring(101, 10)
    assert predicted_wave_q(analyze(net, make_distance_lag(net))) in range(4, 9)


def test_lagged_never_synchronizes():
    for k in range(1, 51):
        net = make_k_ring(101, k)
        assert 0 not in analyze(net, make_distance_lag(net)).stable_set


def test_report_fields():
    rep = analyze(make_k_ring(21, 2))
    assert rep.tol == default_tol(21, 1.0)
    assert rep.is_stable(-1) and not rep.is_stable(3)
    d = rep.to_dict()
    assert d["stable_signed"] == [-2, -1, 0, 1, 2]
    assert len(d["max_lambda"]) == 21


def test_predicted_wave_q_lag_free_is_sync():
    for k in (1, 3, 7):
        assert predicted_wave_q(cdt_eigenvalues(assemble_k(make_k_ring(41, k)))) == 0


def test_argmax_gamma_state_is_always_weakly_stable():
    rng = np.random.default_rng(11)
    for _ in range(100):
        n = int(rng.integers(3, 40))
        rep = analyze(random_network(rng, n), random_lags(rng, n))
        assert rep.max_lambda[int(np.argmax(rep.gamma))] <= 1e-12
        assert rep.stable_set


def test_predicted_wave_q_requires_a_stable_state():
    # with lag pi every q != 0 is exactly neutral, so a strict negative tolerance leaves nothing stable
    kgen = -np.ones(5, dtype=complex)
    kgen[0] = 0
    rep = lambda_grid(cdt_eigenvalues(kgen), tol=-1e-6)
    assert not rep.stable_set
    with pytest.raises(NoStableStateError):
        predicted_wave_q(rep)


def test_critical_k_staircase_matches_dense_oracle():
    got = {n: critical_k(n) for n in STAIRCASE}
    assert got == STAIRCASE


def test_critical_k_scan_details():
    scan = critical_k_scan(21)
    assert scan.critical_k == 7
    assert scan.reentrant == ()
    assert scan.sync_only == tuple(range(7, 11))
    assert critical_k(3) == 1


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 64), st.integers(0, 2**32 - 1), st.booleans())
def test_grid_symmetries(n, seed, lagged):
    rng = np.random.default_rng(seed)
    net = random_network(rng, n)
    rep = analyze(net, random_lags(rng, n) if lagged else None)
    lam = rep.lam
    mirror = (-np.arange(n)) % n
    assert np.all(np.abs(lam[0]) <= 1e-12)
    assert np.allclose(lam, lam[mirror, :], rtol=0, atol=1e-10)
    assert np.allclose(lam, lam[:, mirror], rtol=0, atol=1e-10)
    assert {(-q) % n for q in rep.stable_set} == set(rep.stable_set)


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 64), st.integers(0, 2**32 - 1), st.floats(0.05, 20))
def test_epsilon_scaling(n, seed, c):
    rng = np.random.default_rng(seed)
    net = random_network(rng, n)
    lags = random_lags(rng, n)
    a = analyze(net, lags)
    b = analyze(net.with_epsilon(c), lags)
    assert np.allclose(c * a.lam, b.lam, rtol=1e-12, atol=1e-12 * c)
    assert a.stable_set == b.stable_set
    assert a.basin_rank == b.basin_rank


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 64), st.integers(0, 2**32 - 1))
def test_two_routes_agree(n, seed):
    net = random_network(np.random.default_rng(seed), n)
    a = lambda_via_dft(net).lam
    b = lambda_grid(cdt_eigenvalues(assemble_k(net))).lam
    assert np.max(np.abs(a - b)) <= 1e-12
