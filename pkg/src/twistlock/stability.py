"""Stability of every q-twisted state from the real parts of K's eigenvalues.

For a q-state perturbed along Fourier mode m the growth rate is

    lambda[m, q] = (gamma[q + m] + gamma[q - m]) / 2 - gamma[q]

with indices taken mod n.  A state is stable when lambda[m, q] < tol for
all m in [1, n-1].
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import CirculantNetwork, assemble_k, make_k_ring
from .spectrum import CouplingSpectrum, cdt_eigenvalues, continuum_H, dft_hat

__all__ = [
    "NoStableStateError",
    "StabilityReport",
    "default_tol",
    "lambda_grid",
    "lambda_via_dft",
    "lambda_continuum",
    "critical_k",
    "critical_k_scan",
    "predicted_wave_q",
]


class NoStableStateError(ValueError):
    """Raised when a prediction needs a stable q-state and there is none."""


def default_tol(n: int, epsilon: float = 1.0) -> float:
    return 1e-9 * epsilon * n


@dataclass(frozen=True, eq=False)
class StabilityReport:
    """``lam[m, q]`` grid plus the per-q verdicts derived from it.

    ``marginal`` lists q whose max growth rate falls inside (-tol, tol);
    they are counted as stable but should not be trusted blindly.
    """

    n: int
    lam: np.ndarray
    max_lambda: np.ndarray
    gamma: np.ndarray
    tol: float
    stable_set: frozenset = field(default_factory=frozenset)
    marginal: frozenset = field(default_factory=frozenset)
    basin_rank: tuple = ()

    def is_stable(self, q: int) -> bool:
        return (q % self.n) in self.stable_set

    def stable_signed(self) -> list[int]:
        """Stable q mapped into (-n/2, n/2], sorted."""
        half = self.n // 2
        return sorted(q - self.n if q > half else q for q in self.stable_set)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "tol": self.tol,
            "max_lambda": [float(x) for x in self.max_lambda],
            "stable_set": sorted(int(q) for q in self.stable_set),
            "stable_signed": self.stable_signed(),
            "marginal": sorted(int(q) for q in self.marginal),
            "basin_rank": [int(q) for q in self.basin_rank],
        }


def _report(lam: np.ndarray, gamma: np.ndarray, tol: float) -> StabilityReport:
    n = lam.shape[0]
    max_lambda = lam[1:].max(axis=0)
    stable = frozenset(int(q) for q in np.flatnonzero(max_lambda < tol))
    marginal = frozenset(int(q) for q in np.flatnonzero(np.abs(max_lambda) < tol))
    # gamma[q] and gamma[n - q] agree only to rounding; rank on the mirrored mean so the pair ties exactly
    g = np.asarray(gamma, dtype=float)
    sym = 0.5 * (g + g[(-np.arange(n)) % n])
    rank = tuple(sorted(stable, key=lambda q: (-sym[q], q)))
    for arr in (lam, max_lambda):
        arr.setflags(write=False)
    return StabilityReport(n, lam, max_lambda, np.asarray(gamma, dtype=float), tol, stable, marginal, rank)


def lambda_grid(spec: CouplingSpectrum, tol: float | None = None) -> StabilityReport:
    """Growth rates for all (m, q) from the real parts gamma of K's eigenvalues."""
    n = spec.n
    g = np.asarray(spec.gamma, dtype=float)
    q = np.arange(n)[None, :]
    m = np.arange(n)[:, None]
    lam = 0.5 * (g[(q + m) % n] + g[(q - m) % n]) - g[q]
    if tol is None:
        tol = default_tol(n, spec.epsilon)
    return _report(lam, g, tol)


def lambda_via_dft(net: CirculantNetwork, tol: float | None = None) -> StabilityReport:
    """Same grid, computed from H(q) = sum_j h_j exp(+2 pi i q j / N) of the raw weights.

    Lag-free networks only.  Kept as a separate route from ``lambda_grid``
    so the two formulations can be checked against each other.
    """
    n = net.n
    q = np.arange(n)
    m = np.arange(n)
    plus = dft_hat(net.gen, q[None, :] + m[:, None]).real
    minus = dft_hat(net.gen, q[None, :] - m[:, None]).real
    centre = dft_hat(net.gen, q).real
    lam = net.epsilon * (0.5 * (plus + minus) - centre[None, :])
    if tol is None:
        tol = default_tol(n, net.epsilon)
    return _report(lam, net.epsilon * centre, tol)


def lambda_continuum(n: int, k: int, epsilon: float = 1.0) -> np.ndarray:
    """Grid lam[m, q] using the continuum sinc transform in place of the finite DFT.

    Arguments q +- m are not reduced mod n: the continuum transform is not
    periodic.
    """
    lam = np.empty((n, n))
    for q in range(n):
        hq = continuum_H(q, n, k)
        for m in range(n):
            lam[m, q] = 0.5 * (continuum_H(q + m, n, k) + continuum_H(q - m, n, k)) - hq
    return epsilon * lam


@dataclass(frozen=True)
class CriticalKScan:
    n: int
    critical_k: int | None
    sync_only: tuple  # every k whose stable set is exactly {0}
    reentrant: tuple  # k past the first sync-only k where another q is stable again
    stable_counts: tuple


def critical_k_scan(n: int, epsilon: float = 1.0) -> CriticalKScan:
    if n < 3:
        raise ValueError("n must be >= 3")
    kmax = n // 2
    only_sync = []
    counts = []
    for k in range(1, kmax + 1):
        report = lambda_grid(cdt_eigenvalues(assemble_k(make_k_ring(n, k, epsilon))))
        counts.append(len(report.stable_set))
        if report.stable_set == {0}:
            only_sync.append(k)
    crit = None
    for k in range(kmax, 0, -1):
        if k in only_sync:
            crit = k
        else:
            break
    reentrant = ()
    if only_sync:
        reentrant = tuple(k for k in range(only_sync[0] + 1, kmax + 1) if k not in only_sync)
    return CriticalKScan(n, crit, tuple(only_sync), reentrant, tuple(counts))


def critical_k(n: int) -> int | None:
    """Smallest k from which phase synchrony is the only stable q-state through k = n // 2.

    Returns None when no such k exists.
    """
    return critical_k_scan(n).critical_k


def predicted_wave_q(source: CouplingSpectrum | StabilityReport) -> int:
    """|q| of the stable state with the largest gamma (largest-basin heuristic)."""
    report = lambda_grid(source) if isinstance(source, CouplingSpectrum) else source
    if not report.basin_rank:
        raise NoStableStateError("no linearly stable q-state")
    best = report.gamma[report.basin_rank[0]]
    # q and n - q tie by symmetry; report the smallest |q| among equal maxima
    scale = max(1.0, abs(best))
    tied = [q for q in report.basin_rank if abs(report.gamma[q] - best) <= 1e-10 * scale]
    return min(min(q, report.n - q) for q in tied)
