import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistlock import (
    CirculantNetwork,
    DelayRing,
    LagRing,
    assemble_k,
    delay_to_lag,
    make_alpha_decay,
    make_distance_delay,
    make_distance_lag,
    make_k_ring,
    ring_distance,
)


def test_k_ring_21_2_edges():
    net = make_k_ring(21, 2)
    assert set(np.flatnonzero(net.gen)) == {1, 2, 19, 20}
    assert np.all(net.gen[[1, 2, 19, 20]] == 1.0)


def test_k_ring_complete_when_k_is_half_of_odd_n():
    net = make_k_ring(5, 2)
    assert list(net.gen) == [0, 1, 1, 1, 1]


def test_k_ring_antipode_counted_once():
    net = make_k_ring(10, 5)
    assert net.gen[5] == 1.0
    assert net.gen.sum() == 9.0


@pytest.mark.parametrize("n,k", [(10, 6), (10, 0), (2, 1), (21, -1)])
def test_k_ring_rejects_bad_parameters(n, k):
    with pytest.raises(ValueError):
        make_k_ring(n, k)


def test_alpha_zero_is_uniform_global():
    net = make_alpha_decay(101, 0.0)
    assert net.gen[0] == 0.0
    assert np.allclose(net.gen[1:], 1.0 / 100.0, rtol=0, atol=1e-15)


def test_alpha_decay_hand_sum_n6():
    rho = 2 * (1 + 1 / 2) + 1 / 3
    c = 1 / rho
    want = [0, c, c / 2, c / 3, c / 2, c]
    assert np.allclose(make_alpha_decay(6, 1.0).gen, want, rtol=0, atol=1e-15)


def test_alpha_decay_monotone_in_distance():
    gen = make_alpha_decay(101, 1.3).gen
    half = gen[1:51]
    assert np.all(np.diff(half) < 0)


def test_alpha_decay_rejects_negative_alpha():
    with pytest.raises(ValueError):
        make_alpha_decay(11, -0.5)


def test_distance_lag_reaches_pi_at_k():
    net = make_k_ring(101, 10)
    lags = make_distance_lag(net)
    assert lags.lags[10] == pytest.approx(math.pi, abs=0)
    assert lags.lags[0] == 0.0
    assert np.all(lags.lags[11:91] == 0.0)


def test_distance_lag_n21_k2():
    lags = make_distance_lag(make_k_ring(21, 2)).lags
    assert lags[1] == pytest.approx(math.pi / 2, abs=1e-15)
    assert lags[2] == pytest.approx(math.pi, abs=1e-15)


def test_distance_lag_rejects_non_k_ring():
    with pytest.raises(ValueError):
        make_distance_lag(make_alpha_decay(11, 1.0))
    with pytest.raises(ValueError):
        make_distance_lag(make_k_ring(21, 2), k=3)


def test_distance_delay_examples():
    assert np.allclose(make_distance_delay(6, 2.0).delays, [0, 0.5, 1, 1.5, 1, 0.5], rtol=0, atol=0)
    assert make_distance_delay(101, 1.0).max_delay == 50.0
    assert make_distance_delay(101, 1e15).max_delay < 1e-12
    with pytest.raises(ValueError):
        make_distance_delay(11, 0.0)


@pytest.mark.parametrize("n,j,k,d", [(21, 0, 20, 1), (101, 3, 53, 50), (10, 2, 7, 5)])
def test_ring_distance_examples(n, j, k, d):
    assert ring_distance(n, j, k) == d


def test_assemble_k_without_lags_is_real():
    net = make_k_ring(21, 3, epsilon=0.7)
    agg = assemble_k(net)
    assert np.all(agg.kgen.imag == 0.0)
    assert np.array_equal(agg.kgen.real, 0.7 * net.gen)


def test_assemble_k_lag_pi_flips_sign():
    net = make_k_ring(21, 2)
    agg = assemble_k(net, make_distance_lag(net))
    assert agg.kgen[2] == pytest.approx(-1.0, abs=1e-15)


def test_assemble_k_from_delays_uses_omega_tau():
    net = make_k_ring(11, 5, epsilon=2.0)
    delays = make_distance_delay(11, 3.0)
    agg = assemble_k(net, delay_to_lag(delays, 0.8))
    d = np.array([min(j, 11 - j) for j in range(11)])
    want = 2.0 * net.gen * np.exp(-1j * 0.8 * d / 3.0)
    assert np.allclose(agg.kgen, want, rtol=0, atol=1e-15)


def test_assemble_k_length_mismatch():
    with pytest.raises(ValueError):
        assemble_k(make_k_ring(11, 2), LagRing(np.zeros(12)))


def test_lags_on_non_edges_are_dropped():
    net = make_k_ring(11, 1)
    lags = np.zeros(11)
    lags[[1, 10]] = 0.3
    lags[[3, 8]] = 2.0
    agg = assemble_k(net, LagRing(lags))
    assert agg.kgen[3] == 0.0 and agg.kgen[8] == 0.0


@pytest.mark.parametrize("bad", [[1, 1, 1], [0, 1, 2], [0, -1, -1]])
def test_network_validation(bad):
    with pytest.raises(ValueError):
        CirculantNetwork(3, 1.0, np.array(bad, dtype=float))


def test_delay_ring_validation():
    with pytest.raises(ValueError):
        DelayRing(np.array([0.0, -1.0, -1.0]))
    with pytest.raises(ValueError):
        DelayRing(np.array([0.0, 1.0, 2.0]))


def test_networks_are_read_only():
    net = make_k_ring(11, 2)
    with pytest.raises(ValueError):
        net.gen[1] = 5.0


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 200), st.data())
def test_constructors_are_ring_symmetric(n, data):
    k = data.draw(st.integers(1, n // 2))
    alpha = data.draw(st.floats(0, 6))
    for net in (make_k_ring(n, k), make_alpha_decay(n, alpha)):
        g = net.gen
        assert g[0] == 0.0
        assert np.array_equal(g, g[(-np.arange(n)) % n])
        assert np.all(g >= 0)
    assert abs(make_alpha_decay(n, alpha).gen.sum() - 1.0) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 300), st.data())
def test_ring_distance_symmetric_and_bounded(n, data):
    j = data.draw(st.integers(0, n - 1))
    k = data.draw(st.integers(0, n - 1))
    d = ring_distance(n, j, k)
    assert d == ring_distance(n, k, j)
    assert 0 <= d <= n // 2
