"""Phase-state record and the scalar measures taken on it.

All measures accept a single state of shape (n,) or a batch (..., n) and
reduce over the last axis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..spectrum import twisted_state, wrap

__all__ = [
    "PhaseState",
    "similarity",
    "order_parameter",
    "lock_quality",
    "perturbation",
]


@dataclass(frozen=True, eq=False)
class PhaseState:
    """Phases at time ``t``; ``theta`` is kept unwrapped."""

    t: float
    theta: np.ndarray

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float)
        if not np.all(np.isfinite(theta)):
            raise FloatingPointError("non-finite phase in state")
        object.__setattr__(self, "theta", theta)

    @property
    def n(self) -> int:
        return self.theta.shape[-1]

    @property
    def wrapped(self) -> np.ndarray:
        return wrap(self.theta)


def _phases(state) -> np.ndarray:
    return state.theta if isinstance(state, PhaseState) else np.asarray(state, dtype=float)


def similarity(state, q: int) -> np.ndarray | float:
    """|mean_j exp(i (theta_j - theta_j^(q)))|, 1 when the network sits on the q-state."""
    theta = _phases(state)
    ref = twisted_state(q, theta.shape[-1])
    s = np.abs(np.exp(1j * (theta - ref)).mean(axis=-1))
    return float(s) if s.ndim == 0 else s


def order_parameter(state) -> np.ndarray | float:
    theta = _phases(state)
    r = np.abs(np.exp(1j * theta).mean(axis=-1))
    return float(r) if r.ndim == 0 else r


def lock_quality(state) -> np.ndarray | float:
    """Coherence of nearest-neighbour phase steps.

    Equals 1 for any exact twisted state and drops for disordered states,
    so it gates whether a measured winding number means anything.
    """
    theta = _phases(state)
    steps = np.roll(theta, -1, axis=-1) - theta
    c = np.abs(np.exp(1j * steps).mean(axis=-1))
    return float(c) if c.ndim == 0 else c


def perturbation(rng: np.random.Generator, shape, amplitude: float = 1e-3) -> np.ndarray:
    """Independent uniform draws in [-amplitude, amplitude]."""
    return rng.uniform(-amplitude, amplitude, size=shape)
