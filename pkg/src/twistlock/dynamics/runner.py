"""Drive a stepper for a fixed horizon while sampling probes.

A stepper is any callable ``PhaseState -> PhaseState`` with a ``dt``
attribute.  Probes are sampled on their own period; stop rules look at the
sampled series and may end the run early.  Everything works on batched
states of shape (batch, n): a stop rule then fires once every batch member
satisfies it.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dde import DelayedKuramotoSystem, HistoryBuffer
from .measures import PhaseState
from .ode import KuramotoSystem
from .operator import OperatorIteration

__all__ = [
    "Probe",
    "StopRule",
    "Trajectory",
    "OdeStepper",
    "DdeStepper",
    "OperatorStepper",
    "run_until",
]

CSV_SCHEMA = "twistlock-trajectory/1"


@dataclass
class Probe:
    name: str
    measure: Callable
    period: float


@dataclass
class StopRule:
    """Element is settled once, for ``hold`` consecutive samples, it stays
    below ``below``, above ``above``, or (``plateau``) moves less than that
    amount between samples."""

    probe: str
    below: float | None = None
    above: float | None = None
    plateau: float | None = None
    hold: int = 3

    def settled(self, series: list) -> np.ndarray | bool:
        if len(series) < self.hold + (1 if self.plateau is not None else 0):
            return False
        recent = np.asarray(series[-self.hold:])
        ok = np.zeros(recent.shape[1:], dtype=bool)
        if self.below is not None:
            ok |= np.all(recent < self.below, axis=0)
        if self.above is not None:
            ok |= np.all(recent > self.above, axis=0)
        if self.plateau is not None:
            window = np.asarray(series[-self.hold - 1:])
            ok |= np.all(np.abs(np.diff(window, axis=0)) < self.plateau, axis=0)
        return ok


@dataclass
class Trajectory:
    times: np.ndarray
    series: dict
    final: PhaseState
    stopped_early: bool = False
    meta: dict = field(default_factory=dict)

    def to_csv(self, path=None) -> str:
        """CSV with a schema comment line, a header ``t,probe...`` and one row per sample."""
        names = []
        cols = []
        for name, values in self.series.items():
            values = np.asarray(values)
            if values.ndim == 1:
                names.append(name)
                cols.append(values)
            else:
                flat = values.reshape(values.shape[0], -1)
                for b in range(flat.shape[1]):
                    names.append(f"{name}[{b}]")
                    cols.append(flat[:, b])
        buf = io.StringIO()
        buf.write(f"# {CSV_SCHEMA}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", *names])
        for i, t in enumerate(self.times):
            w.writerow([repr(float(t)), *(repr(float(c[i])) for c in cols)])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


class OdeStepper:
    def __init__(self, system: KuramotoSystem, dt: float):
        self.system = system
        self.dt = float(dt)

    def __call__(self, state: PhaseState) -> PhaseState:
        return PhaseState(state.t + self.dt, self.system.step(state.theta, self.dt))


class DdeStepper:
    """Steps a delayed system; the history buffer carries the true state."""

    def __init__(self, system: DelayedKuramotoSystem, hist: HistoryBuffer):
        self.system = system
        self.hist = hist
        self.dt = system.dt

    def __call__(self, state: PhaseState) -> PhaseState:
        self.system.step(self.hist)
        return PhaseState(self.hist.t, self.hist.current())


class OperatorStepper:
    """Operator iteration exposed as a phase stepper (phases tracked unwrapped)."""

    def __init__(self, op: OperatorIteration):
        self.op = op
        self.dt = op.sigma
        self._x = None

    def __call__(self, state: PhaseState) -> PhaseState:
        x = np.exp(1j * state.theta) if self._x is None else self._x
        new = self.op.step(x)
        theta = state.theta + np.angle(new / x)
        self._x = new
        return PhaseState(state.t + self.dt, theta)


def run_until(state: PhaseState, stepper, t_max: float, probes=(), stop=None) -> Trajectory:
    """Integrate from ``state`` up to ``t_max`` time units (or until ``stop`` fires).

    ``stop`` is a StopRule or a sequence of them; a batch member is settled
    once any rule holds for it, and the run ends when all members are.
    """
    if t_max < 0:
        raise ValueError("t_max must be non-negative")
    dt = stepper.dt
    nsteps = int(math.floor(t_max / dt + 1e-9))
    strides = {p.name: max(1, int(round(p.period / dt))) for p in probes}
    times = {p.name: [] for p in probes}
    series = {p.name: [] for p in probes}

    def sample(i, st):
        for p in probes:
            if i % strides[p.name] == 0:
                times[p.name].append(st.t)
                series[p.name].append(np.asarray(p.measure(st), dtype=float))

    rules = [] if stop is None else ([stop] if isinstance(stop, StopRule) else list(stop))
    for rule in rules:
        if rule.probe not in series:
            raise ValueError(f"stop rule refers to unknown probe {rule.probe!r}")
    check = min((strides[r.probe] for r in rules), default=1)

    sample(0, state)
    stopped = False
    for i in range(1, nsteps + 1):
        state = stepper(state)
        sample(i, state)
        if rules and i % check == 0:
            done = np.zeros((), dtype=bool)
            for rule in rules:
                done = done | rule.settled(series[rule.probe])
            if np.all(done):
                stopped = True
                break
    # probes share the time grid of the first one; others are resampled onto it
    if probes:
        ref = probes[0].name
        grid = np.asarray(times[ref])
        out = {}
        for p in probes:
            vals = np.asarray(series[p.name])
            if p.name != ref and len(vals) != len(grid):
                idx = np.searchsorted(np.asarray(times[p.name]), grid, side="right") - 1
                vals = vals[np.clip(idx, 0, len(vals) - 1)]
            out[p.name] = vals
    else:
        grid, out = np.asarray([state.t]), {}
    return Trajectory(grid, out, state, stopped)
