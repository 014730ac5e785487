"""Circulant spectra by direct DFT summation, twisted states and winding numbers."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import AggregateGen

__all__ = [
    "CouplingSpectrum",
    "cdt_eigenvalues",
    "dft_hat",
    "continuum_H",
    "twisted_state",
    "signed_q",
    "wrap",
    "winding_number",
]


@dataclass(frozen=True, eq=False)
class CouplingSpectrum:
    """Eigenvalues ``phi`` of the aggregate matrix K and their real parts.

    Both arrays are indexed mod n.  ``epsilon`` is carried along so the
    stability tolerance can be made scale-aware.
    """

    phi: np.ndarray
    gamma: np.ndarray
    epsilon: float = 1.0

    @property
    def n(self) -> int:
        return self.phi.size

    def gamma_at(self, j: int) -> float:
        return float(self.gamma[j % self.n])


def _dft_matrix(n: int, sign: int) -> np.ndarray:
    # reduce jk mod n before scaling so the phase stays exact for large n
    j = np.arange(n)
    jk = np.outer(j, j) % n
    return np.exp(sign * 2j * np.pi * jk / n)


def cdt_eigenvalues(kgen: AggregateGen | np.ndarray) -> CouplingSpectrum:
    """phi[j] = sum_k kgen[k] exp(-2 pi i j k / n), by direct O(n^2) summation."""
    if isinstance(kgen, AggregateGen):
        vec, eps = kgen.kgen, kgen.epsilon
    else:
        vec, eps = np.asarray(kgen, dtype=complex), 1.0
    if vec.ndim != 1 or vec.size < 3:
        raise ValueError("generating vector must be one-dimensional with length >= 3")
    phi = _dft_matrix(vec.size, -1) @ vec
    phi.setflags(write=False)
    gamma = phi.real.copy()
    gamma.setflags(write=False)
    return CouplingSpectrum(phi, gamma, eps)


def dft_hat(h: np.ndarray, q) -> np.ndarray:
    """H(q) = sum_j h_j exp(+2 pi i q j / N) evaluated at arbitrary integer q.

    ``q`` is used as given (no reduction mod N), so H is evaluated on the
    raw arguments q + m and q - m.
    """
    h = np.asarray(h, dtype=float)
    q = np.asarray(q)
    j = np.arange(h.size)
    phase = 2.0 * np.pi * np.multiply.outer(q, j) / h.size
    return (h * np.cos(phase)).sum(-1) + 1j * (h * np.sin(phase)).sum(-1)


def continuum_H(q: int, n: int, k: int) -> float:
    """Continuum-limit transform of a k-ring, sin(x)/x with x = 2 pi q k / n."""
    if q == 0:
        return 1.0
    x = 2.0 * np.pi * q * k / n
    return float(np.sin(x) / x)


def twisted_state(q: int, n: int) -> np.ndarray:
    """Phases 2 pi q j / n of the q-twisted equilibrium."""
    return 2.0 * np.pi * (q % n) * np.arange(n) / n


def signed_q(q: int, n: int) -> int:
    """Representative of q mod n in (-n/2, n/2]."""
    r = q % n
    return r - n if r > n // 2 else r


def wrap(x):
    """Wrap angles into (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(x), 2.0 * np.pi)


def winding_number(phases) -> np.ndarray | int:
    """Net number of 2 pi wraps around the ring, along the last axis."""
    phases = np.asarray(phases, dtype=float)
    if phases.shape[-1] < 3:
        raise ValueError("need at least 3 phases")
    steps = wrap(np.roll(phases, -1, axis=-1) - phases)
    # a step of exactly pi must not round to -pi, or q = n/2 flips sign
    steps = np.where(steps <= -np.pi + 1e-9, steps + 2.0 * np.pi, steps)
    w = np.rint(steps.sum(-1) / (2.0 * np.pi)).astype(int)
    return int(w) if w.ndim == 0 else w
