"""Circulant ring networks and the aggregate coupling generator.

Every topology here is stored as the generating vector of a circulant
matrix: ``gen[j]`` is the weight between node 0 and node ``j``, and row
``i`` of the full matrix is ``gen`` cyclically shifted by ``i``.  Only the
oracle module ever materializes an N x N matrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CirculantNetwork",
    "LagRing",
    "DelayRing",
    "AggregateGen",
    "ring_distance",
    "ring_distances",
    "make_k_ring",
    "make_alpha_decay",
    "make_distance_lag",
    "make_distance_delay",
    "delay_to_lag",
    "assemble_k",
]

_SYM_TOL = 1e-12


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _check_ring_symmetric(name: str, values: np.ndarray) -> None:
    if values.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{name} must be finite")
    if values[0] != 0:
        raise ValueError(f"{name}[0] must be 0, got {values[0]!r}")
    mirror = values[(-np.arange(values.size)) % values.size]
    scale = max(1.0, float(np.max(np.abs(values))))
    if np.max(np.abs(values - mirror)) > _SYM_TOL * scale:
        raise ValueError(f"{name} must satisfy v[j] == v[n-j]")


def ring_distance(n: int, j: int, k: int) -> int:
    """Edge distance between nodes ``j`` and ``k`` on a ring of ``n`` nodes."""
    diff = abs(j - k)
    return min(diff, n - diff)


def ring_distances(n: int) -> np.ndarray:
    """Distances from node 0 to every node, as an integer array of length n."""
    j = np.arange(n)
    return np.minimum(j, n - j)


@dataclass(frozen=True, eq=False)
class CirculantNetwork:
    """Symmetric circulant network with coupling strength ``epsilon``.

    ``k`` and ``alpha`` record how the network was built (k-ring degree or
    distance-decay exponent) and are informational only.
    """

    n: int
    epsilon: float
    gen: np.ndarray
    k: int | None = None
    alpha: float | None = None

    def __post_init__(self):
        gen = _frozen(self.gen)
        object.__setattr__(self, "gen", gen)
        if int(self.n) != self.n or self.n < 3:
            raise ValueError(f"n must be an integer >= 3, got {self.n!r}")
        if gen.shape != (self.n,):
            raise ValueError(f"gen has length {gen.size}, expected {self.n}")
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be positive and finite, got {self.epsilon!r}")
        _check_ring_symmetric("gen", gen)
        if np.any(gen < 0):
            raise ValueError("gen entries must be non-negative")

    @property
    def offsets(self) -> np.ndarray:
        """Nonzero offsets j of the generating vector."""
        return np.flatnonzero(self.gen)

    def with_epsilon(self, epsilon: float) -> "CirculantNetwork":
        return CirculantNetwork(self.n, epsilon, self.gen, k=self.k, alpha=self.alpha)

    def is_k_ring(self, k: int) -> bool:
        if not 1 <= k <= self.n // 2:
            return False
        expected = make_k_ring(self.n, k).gen
        return bool(np.array_equal(self.gen, expected))

    def dense(self) -> np.ndarray:
        """Full adjacency matrix A with A[j, k] = gen[(k - j) mod n]."""
        idx = (np.arange(self.n)[None, :] - np.arange(self.n)[:, None]) % self.n
        return self.gen[idx]


@dataclass(frozen=True, eq=False)
class LagRing:
    """Per-offset phase lags in radians (lags[j] applies at offset j)."""

    lags: np.ndarray

    def __post_init__(self):
        lags = _frozen(self.lags)
        object.__setattr__(self, "lags", lags)
        _check_ring_symmetric("lags", lags)

    @property
    def n(self) -> int:
        return self.lags.size


@dataclass(frozen=True, eq=False)
class DelayRing:
    """Per-offset transmission delays (delays[j] applies at offset j)."""

    delays: np.ndarray
    nu: float | None = None

    def __post_init__(self):
        delays = _frozen(self.delays)
        object.__setattr__(self, "delays", delays)
        _check_ring_symmetric("delays", delays)
        if np.any(delays < 0):
            raise ValueError("delays must be non-negative")

    @property
    def n(self) -> int:
        return self.delays.size

    @property
    def max_delay(self) -> float:
        return float(self.delays.max())


@dataclass(frozen=True, eq=False)
class AggregateGen:
    """Complex generating vector of K, kgen[j] = eps * gen[j] * exp(-i lag[j])."""

    kgen: np.ndarray
    epsilon: float = 1.0

    def __post_init__(self):
        kgen = _frozen(self.kgen, dtype=complex)
        object.__setattr__(self, "kgen", kgen)
        if kgen.ndim != 1 or kgen.size < 3:
            raise ValueError("kgen must be one-dimensional with length >= 3")

    @property
    def n(self) -> int:
        return self.kgen.size


def make_k_ring(n: int, k: int, epsilon: float = 1.0) -> CirculantNetwork:
    """Binary ring where every node couples to its ``k`` nearest neighbours per side.

    For even ``n`` and ``k = n/2`` the antipodal node is counted once.
    """
    if int(n) != n or n < 3:
        raise ValueError(f"n must be an integer >= 3, got {n!r}")
    if int(k) != k or not 1 <= k <= n // 2:
        raise ValueError(f"k must lie in [1, {n // 2}] for n={n}, got {k!r}")
    d = ring_distances(n)
    gen = ((d >= 1) & (d <= k)).astype(float)
    return CirculantNetwork(int(n), epsilon, gen, k=int(k))


def make_alpha_decay(n: int, alpha: float, epsilon: float = 1.0) -> CirculantNetwork:
    """Fully connected ring with weights d**-alpha normalized to unit row sum."""
    if int(n) != n or n < 3:
        raise ValueError(f"n must be an integer >= 3, got {n!r}")
    if not (alpha >= 0 and math.isfinite(alpha)):
        raise ValueError(f"alpha must be finite and >= 0, got {alpha!r}")
    d = ring_distances(n).astype(float)
    raw = np.zeros(n)
    raw[1:] = d[1:] ** (-float(alpha))
    rho = raw.sum()
    return CirculantNetwork(int(n), epsilon, raw / rho, alpha=float(alpha))


def make_distance_lag(net: CirculantNetwork, k: int | None = None) -> LagRing:
    """Lag pi * d / k on each edge of a k-ring, zero off the edges."""
    if k is None:
        k = net.k
    if k is None or not net.is_k_ring(k):
        raise ValueError(f"network is not a k-ring with k={k!r}")
    d = ring_distances(net.n)
    lags = np.where(net.gen != 0, np.pi * d / k, 0.0)
    return LagRing(lags)


def make_distance_delay(n: int, nu: float) -> DelayRing:
    """Delays growing linearly with ring distance, tau = d / nu."""
    if not (nu > 0):
        raise ValueError(f"conduction speed nu must be positive, got {nu!r}")
    if int(n) != n or n < 3:
        raise ValueError(f"n must be an integer >= 3, got {n!r}")
    return DelayRing(ring_distances(int(n)) / float(nu), nu=float(nu))


def delay_to_lag(delays: DelayRing, omega: float) -> LagRing:
    """Phase-lag approximation of a delay ring: lag = omega * tau."""
    return LagRing(omega * delays.delays)


def assemble_k(net: CirculantNetwork, lags: LagRing | None = None) -> AggregateGen:
    if lags is None:
        return AggregateGen(net.epsilon * net.gen.astype(complex), net.epsilon)
    if lags.n != net.n:
        raise ValueError(f"lag ring has length {lags.n}, network has n={net.n}")
    kgen = net.epsilon * net.gen * np.exp(-1j * lags.lags)
    # non-edges carry no coupling whatever their stored lag
    kgen[net.gen == 0] = 0.0
    return AggregateGen(kgen, net.epsilon)
