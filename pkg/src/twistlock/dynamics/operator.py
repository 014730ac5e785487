"""Complex-valued operator iteration x <- Lambda[exp(sigma K) x].

``exp(sigma K)`` is applied exactly through the circulant eigenbasis: the
Fourier transform of ``x`` is scaled by exp(sigma * phi) and transformed
back, after which every entry is projected onto the unit circle.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..spectrum import CouplingSpectrum

__all__ = ["ComplexState", "OperatorIteration", "step_operator"]


@dataclass(frozen=True, eq=False)
class ComplexState:
    x: np.ndarray

    @classmethod
    def from_phases(cls, theta) -> "ComplexState":
        return cls(np.exp(1j * np.asarray(theta, dtype=float)))

    @property
    def phases(self) -> np.ndarray:
        return np.angle(self.x)


class OperatorIteration:
    def __init__(self, spec: CouplingSpectrum, sigma: float):
        if not sigma > 0:
            raise ValueError(f"sigma must be positive, got {sigma!r}")
        n = spec.n
        self.sigma = float(sigma)
        # (K x)_j = sum_o kgen[o] x[j+o], so Fourier mode f picks up phi[-f]
        self._gain = np.exp(self.sigma * np.asarray(spec.phi)[(-np.arange(n)) % n])

    def linear(self, x: np.ndarray) -> np.ndarray:
        return np.fft.ifft(np.fft.fft(x, axis=-1) * self._gain, axis=-1)

    def step(self, x: np.ndarray) -> np.ndarray:
        y = self.linear(x)
        return y / np.abs(y)


def step_operator(x: ComplexState, spec: CouplingSpectrum, sigma: float) -> ComplexState:
    return ComplexState(OperatorIteration(spec, sigma).step(x.x))
