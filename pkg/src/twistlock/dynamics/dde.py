"""Fixed-step RK4 for the delayed Kuramoto model

    theta_j'(t) = omega + eps * sum_k A_jk sin(theta_k(t - tau_jk) - theta_j(t))

on a circulant network.  Past states live in a ring buffer sampled every
``dt``; delayed values are linearly interpolated between samples.  Lookups
that fall inside the step being taken interpolate between the start of the
step and the current RK stage, so tau = 0 reduces exactly to ordinary RK4.

The buffer stores unit phasors exp(i theta) next to the phases and the
interpolation is done on the phasors.  This is second order in dt like
phase interpolation, and removes every transcendental call from the
inner coupling loop.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

from ..graph import CirculantNetwork, DelayRing
from .measures import PhaseState

__all__ = ["HistoryBuffer", "DelayedKuramotoSystem", "step_delayed", "history_depth"]

_STAGES = (0.0, 0.5, 1.0)


def history_depth(max_delay: float, dt: float) -> int:
    return int(math.ceil(max_delay / dt - 1e-9)) + 2


class HistoryBuffer:
    """Ring buffer of the last ``depth`` states, spaced ``dt`` apart.

    States have shape (n,) or (batch, n); ``t`` is the time of the newest
    sample.
    """

    def __init__(self, depth: int, dt: float, shape):
        if depth < 2:
            raise ValueError("history depth must be >= 2")
        if not dt > 0:
            raise ValueError("dt must be positive")
        shape = tuple(shape)
        self._squeeze = len(shape) == 1
        b, n = (1, shape[0]) if self._squeeze else shape
        self.depth = int(depth)
        self.dt = float(dt)
        self.n = n
        self.theta = np.zeros((self.depth, b, n))
        self.z = np.ones((self.depth, b, n), dtype=complex)
        self.head = 0
        self.t = 0.0
        self.filled = 0

    @classmethod
    def for_delays(cls, delays: DelayRing, dt: float, shape) -> "HistoryBuffer":
        return cls(history_depth(delays.max_delay, dt), dt, shape)

    def _as2d(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        return theta.reshape(1, -1) if self._squeeze else theta

    def prefill(self, theta0, omega: float = 0.0, t0: float = 0.0) -> None:
        """History theta(s) = theta0 + omega (s - t0) for every stored s <= t0."""
        theta0 = self._as2d(theta0)
        for age in range(self.depth):
            idx = (self.depth - 1 - age) % self.depth
            self.theta[idx] = theta0 - omega * age * self.dt
        self.z[:] = np.exp(1j * self.theta)
        self.head = self.depth - 1
        self.t = float(t0)
        self.filled = self.depth

    def push(self, theta) -> None:
        self.head = (self.head + 1) % self.depth
        self.theta[self.head] = self._as2d(theta)
        self.z[self.head] = np.exp(1j * self.theta[self.head])
        self.t += self.dt
        self.filled = min(self.filled + 1, self.depth)

    def current(self) -> np.ndarray:
        out = self.theta[self.head].copy()
        return out[0] if self._squeeze else out

    def lookup(self, lag: float) -> np.ndarray:
        """Phases at time t - lag by linear interpolation."""
        u = lag / self.dt
        if u < 0 or u > self.filled - 1:
            raise ValueError(f"lag {lag} outside stored history")
        p = int(math.floor(u))
        frac = u - p
        a = self.theta[(self.head - p) % self.depth]
        out = a if frac == 0 else (1 - frac) * a + frac * self.theta[(self.head - p - 1) % self.depth]
        return out[0].copy() if self._squeeze else out.copy()


@njit(cache=True)
def _history_sum(z, head, offsets, weights, rows, fracs, out):
    # out[b, j] = sum_t weights[t] * interp(z)[rows[t], b, (j + offsets[t]) % n]
    depth, nb, n = z.shape
    out[:, :] = 0.0
    for t in range(offsets.size):
        r0 = (head + rows[t]) % depth
        r1 = (r0 + 1) % depth
        f = fracs[t]
        w = weights[t]
        o = offsets[t]
        for b in range(nb):
            for j in range(n):
                col = j + o
                if col >= n:
                    col -= n
                if f == 0.0:
                    out[b, j] += w * z[r0, b, col]
                else:
                    out[b, j] += w * ((1.0 - f) * z[r0, b, col] + f * z[r1, b, col])


@njit(cache=True)
def _inside_sum(z, head, stage, offsets, weights, fracs, out):
    # lookups within the current step: blend the step start with the stage state
    depth, nb, n = z.shape
    for t in range(offsets.size):
        f = fracs[t]
        w = weights[t]
        o = offsets[t]
        for b in range(nb):
            for j in range(n):
                col = j + o
                if col >= n:
                    col -= n
                out[b, j] += w * ((1.0 - f) * z[head, b, col] + f * stage[b, col])


class _StagePlan:
    def __init__(self, c, offsets, weights, delays, dt):
        u = c - delays / dt
        hist = u <= 1e-12
        self.h_off = offsets[hist].astype(np.int64)
        self.h_w = weights[hist].astype(complex)
        rows = np.floor(u[hist] + 1e-12)
        self.h_rows = rows.astype(np.int64)
        fr = u[hist] - rows
        fr[np.abs(fr) < 1e-12] = 0.0
        self.h_frac = fr
        self.i_off = offsets[~hist].astype(np.int64)
        self.i_w = weights[~hist].astype(complex)
        self.i_frac = u[~hist] / c if c > 0 else u[~hist]
        self.min_row = int(self.h_rows.min()) if self.h_rows.size else 0

    @property
    def has_inside(self) -> bool:
        return self.i_off.size > 0


class DelayedKuramotoSystem:
    """Delayed Kuramoto model bound to a network, a delay ring and a step size."""

    def __init__(self, net: CirculantNetwork, delays: DelayRing, omega: float, dt: float):
        if delays.n != net.n:
            raise ValueError(f"delay ring has length {delays.n}, network has n={net.n}")
        if not dt > 0:
            raise ValueError("dt must be positive")
        self.n = net.n
        self.omega = float(omega)
        self.dt = float(dt)
        offsets = net.offsets
        weights = net.epsilon * net.gen[offsets]
        tau = delays.delays[offsets]
        self.plans = [_StagePlan(c, offsets, weights, tau, self.dt) for c in _STAGES]
        self.required_depth = history_depth(delays.max_delay, self.dt)
        self._carry = None
        self._carry_key = None

    def _sum(self, hist: HistoryBuffer, plan: _StagePlan, stage_z) -> np.ndarray:
        out = np.empty(hist.z.shape[1:], dtype=complex)
        _history_sum(hist.z, hist.head, plan.h_off, plan.h_w, plan.h_rows, plan.h_frac, out)
        if plan.has_inside:
            _inside_sum(hist.z, hist.head, stage_z, plan.i_off, plan.i_w, plan.i_frac, out)
        return out

    def _rate(self, theta, z, ksum):
        return self.omega + (np.conj(z) * ksum).imag

    def step(self, hist: HistoryBuffer) -> None:
        """Advance ``hist`` by one step of size dt (in place)."""
        if hist.dt != self.dt:
            raise ValueError(f"history spacing {hist.dt} != system dt {self.dt}")
        if hist.depth < self.required_depth or hist.filled < self.required_depth:
            raise ValueError(
                f"history depth {hist.filled}/{hist.depth} cannot cover the largest delay "
                f"(needs {self.required_depth})")
        p0, ph, p1 = self.plans
        theta = hist.theta[hist.head]
        z = hist.z[hist.head]

        key = (id(hist), hist.head, hist.t)
        if self._carry is not None and self._carry_key == key:
            s0 = self._carry
        else:
            s0 = self._sum(hist, p0, z)
        k1 = self._rate(theta, z, s0)

        y = theta + 0.5 * self.dt * k1
        zy = np.exp(1j * y)
        if ph.has_inside:
            k2 = self._rate(y, zy, self._sum(hist, ph, zy))
            y = theta + 0.5 * self.dt * k2
            zy = np.exp(1j * y)
            k3 = self._rate(y, zy, self._sum(hist, ph, zy))
        else:
            sh = self._sum(hist, ph, zy)
            k2 = self._rate(y, zy, sh)
            y = theta + 0.5 * self.dt * k2
            zy = np.exp(1j * y)
            k3 = self._rate(y, zy, sh)

        y = theta + self.dt * k3
        zy = np.exp(1j * y)
        s1 = self._sum(hist, p1, zy)
        k4 = self._rate(y, zy, s1)

        new = theta + (self.dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(new)):
            raise FloatingPointError("non-finite phase in delayed integration")
        hist.push(new)
        # the end-of-step lookups are next step's start lookups when none fell inside the step
        if not p1.has_inside:
            self._carry = s1
            self._carry_key = (id(hist), hist.head, hist.t)
        else:
            self._carry = None


def step_delayed(state: PhaseState, hist: HistoryBuffer, net: CirculantNetwork, delays: DelayRing,
                 omega: float, dt: float, epsilon: float | None = None) -> PhaseState:
    """One RK4 step of the delayed model; ``hist`` must end at ``state`` and is advanced."""
    if epsilon is not None:
        net = net.with_epsilon(epsilon)
    if abs(hist.t - state.t) > 1e-9 * max(1.0, abs(state.t)):
        raise ValueError("history does not end at the given state")
    system = DelayedKuramotoSystem(net, delays, omega, dt)
    system.step(hist)
    return PhaseState(hist.t, hist.current())
