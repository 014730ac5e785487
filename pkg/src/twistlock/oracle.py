"""Brute-force checks of the analytic growth rates.

Nothing in here uses the circulant structure: Jacobians are materialized
densely, the symmetric eigensolver is a self-contained cyclic Jacobi
iteration, and lagged networks are checked by integrating the full
nonlinear equations with a dense coupling matrix and fitting the
exponential growth or decay of a seeded Fourier-mode perturbation.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .graph import CirculantNetwork, LagRing

__all__ = [
    "IndeterminateGrowthError",
    "EquilibriumError",
    "build_jacobian",
    "jacobi_eigh",
    "symmetric_eigenvalues",
    "growth_rate_fit",
    "GrowthFit",
    "fit_growth",
    "verification_rows",
    "write_verification_csv",
]

WINDOW = (1e-6, 1e-3)
DELTA = 1e-6


class IndeterminateGrowthError(RuntimeError):
    """The perturbation never spans the fit window (|lambda| below the resolvable floor)."""


class EquilibriumError(ValueError):
    """The q-state is not a (co-rotating) equilibrium of the given dynamics."""


def build_jacobian(net: CirculantNetwork, q: int) -> np.ndarray:
    """Dense linearization at the q-state of the lag-free model.

    J[j, k] = eps * A[j, k] * cos(2 pi q (k - j) / n) off the diagonal, and
    each diagonal entry cancels its row.
    """
    n = net.n
    a = net.dense()
    j = np.arange(n)
    diff = (j[None, :] - j[:, None]) % n
    jac = net.epsilon * a * np.cos(2.0 * np.pi * q * diff / n)
    np.fill_diagonal(jac, 0.0)
    np.fill_diagonal(jac, -jac.sum(axis=1))
    return jac


def _round_robin(m: int):
    """Rounds of disjoint index pairs covering every pair of range(m) once (m even)."""
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        rounds.append([(players[i], players[m - 1 - i]) for i in range(m // 2)])
        players = [players[0], players[-1], *players[1:-1]]
    return rounds


def jacobi_eigh(mat, tol: float = 1e-12, max_sweeps: int = 100):
    """Eigenvalues (ascending) and eigenvectors of a symmetric matrix by cyclic Jacobi.

    Each sweep visits every off-diagonal pair once, in round-robin order so
    the n/2 rotations of a round act on disjoint index pairs and are
    applied together.
    """
    a = np.array(mat, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if np.max(np.abs(a - a.T)) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    n = a.shape[0]
    v = np.eye(n)
    if n == 1:
        return a.diagonal().copy(), v
    m = n + (n % 2)
    rounds = []
    for pairs in _round_robin(m):
        kept = [(p, q) if p < q else (q, p) for p, q in pairs if p < n and q < n]
        rounds.append((np.array([p for p, _ in kept]), np.array([q for _, q in kept])))
    # drive the off-diagonal norm below tol, or to rounding level for large matrices
    target = max(tol, 1e-15 * np.linalg.norm(a))
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(a - np.diag(a.diagonal())))
        if off < target:
            break
        for P, Q in rounds:
            apq = a[P, Q]
            active = apq != 0.0
            if not np.any(active):
                continue
            app, aqq = a[P, P], a[Q, Q]
            t = np.zeros_like(apq)
            theta = (aqq[active] - app[active]) / (2.0 * apq[active])
            t[active] = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.hypot(theta, 1.0))
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            rp, rq = a[P, :].copy(), a[Q, :].copy()
            a[P, :] = c[:, None] * rp - s[:, None] * rq
            a[Q, :] = s[:, None] * rp + c[:, None] * rq
            cp, cq = a[:, P].copy(), a[:, Q].copy()
            a[:, P] = cp * c - cq * s
            a[:, Q] = cp * s + cq * c
            a[P, Q] = 0.0
            a[Q, P] = 0.0
            vp, vq = v[:, P].copy(), v[:, Q].copy()
            v[:, P] = vp * c - vq * s
            v[:, Q] = vp * s + vq * c
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    w = a.diagonal().copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def symmetric_eigenvalues(mat) -> np.ndarray:
    return jacobi_eigh(mat)[0]


# --- growth-rate fitting -------------------------------------------------


def _dense_coupling(net: CirculantNetwork, lags: LagRing | None, q: int) -> np.ndarray:
    n = net.n
    j = np.arange(n)
    diff = (j[None, :] - j[:, None]) % n
    lag = np.zeros((n, n)) if lags is None else lags.lags[diff]
    return net.epsilon * net.dense() * np.exp(1j * (2.0 * np.pi * q * diff / n - lag))


def _mode_basis(n: int, m: int) -> np.ndarray:
    """Orthonormal rows spanning the real Fourier pair (m, n - m)."""
    j = np.arange(n)
    rows = [np.cos(2.0 * np.pi * m * j / n), np.sin(2.0 * np.pi * m * j / n)]
    basis = [r / np.linalg.norm(r) for r in rows if np.linalg.norm(r) > 1e-9]
    return np.array(basis)


@dataclass(frozen=True)
class GrowthFit:
    rate: float
    branch: str  # "grow" or "decay"
    t_span: tuple
    samples: int
    dt: float


def fit_growth(net: CirculantNetwork, lags: LagRing | None, q: int, m: int, horizon: float = 2000.0,
               dt: float | None = None) -> GrowthFit:
    """Integrate the exact model from the q-state plus a mode-m kick and fit log|eta| vs t.

    |eta| is the size of the perturbation's component in the seeded Fourier
    pair.  Rounding noise excites every mode, so a faster growing mode can
    overtake the seeded one before it crosses the window; that is reported
    as indeterminate rather than fitted.
    """
    n = net.n
    if not 1 <= m % n <= n - 1:
        raise IndeterminateGrowthError("m = 0 is the neutral direction")
    m = m % n
    coup = _dense_coupling(net, lags, q)

    def rhs(psi):
        z = np.exp(1j * psi)
        return (np.conj(z) * (coup @ z)).imag

    drift = rhs(np.zeros(n))
    if np.max(np.abs(drift - drift.mean())) > 1e-9 * max(1.0, float(np.abs(coup).sum(axis=1).max())):
        raise EquilibriumError(f"q={q} is not an equilibrium of this network")
    if dt is None:
        dt = min(0.05, 0.5 / float(np.abs(coup).sum(axis=1).max()))
    basis = _mode_basis(n, m)
    u = basis.sum(axis=0)
    u /= np.linalg.norm(u)
    lo, hi = WINDOW

    def integrate(amplitude, stop):
        psi = amplitude * u
        ts, logs = [0.0], [math.log(amplitude)]
        t = 0.0
        while t < horizon:
            k1 = rhs(psi)
            k2 = rhs(psi + 0.5 * dt * k1)
            k3 = rhs(psi + 0.5 * dt * k2)
            k4 = rhs(psi + dt * k3)
            psi = psi + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            t += dt
            eta = psi - psi.mean()
            size = float(np.linalg.norm(basis @ eta))
            if not math.isfinite(size):
                raise FloatingPointError("integration diverged")
            if lo <= size <= hi and np.linalg.norm(eta) > 1.1 * size:
                raise IndeterminateGrowthError(f"mode m={m} overtaken by a faster mode (q={q})")
            if lo <= size <= hi:
                ts.append(t)
                logs.append(math.log(size))
            verdict = stop(size)
            if verdict:
                return verdict, np.array(ts), np.array(logs)
        return None, np.array(ts), np.array(logs)

    branch, ts, logs = integrate(DELTA, lambda s: "grow" if s > hi else ("decay" if s < 0.5 * lo else None))
    if branch == "decay":
        branch, ts, logs = integrate(hi, lambda s: "decay" if s < lo else None)
    if branch is None or len(ts) < 8 or logs.max() - logs.min() < math.log(10.0):
        raise IndeterminateGrowthError(f"|eta| did not cross the fit window within t={horizon} (q={q}, m={m})")
    slope = float(np.polyfit(ts, logs, 1)[0])
    return GrowthFit(slope, branch, (float(ts[0]), float(ts[-1])), len(ts), dt)


def growth_rate_fit(net: CirculantNetwork, lags: LagRing | None, q: int, m: int, horizon: float = 2000.0) -> float:
    """Numerical estimate of lambda[m, q] from the nonlinear dynamics alone."""
    return fit_growth(net, lags, q, m, horizon).rate


def verification_rows(net: CirculantNetwork, lags: LagRing | None, cells, analytic: np.ndarray,
                      rel_tol: float = 0.02, horizon: float = 2000.0) -> list[dict]:
    """Compare fitted rates with ``analytic[m, q]`` for every (q, m) in ``cells``."""
    rows = []
    for q, m in cells:
        expected = float(analytic[m % net.n, q % net.n])
        try:
            got = growth_rate_fit(net, lags, q, m, horizon)
        except IndeterminateGrowthError:
            rows.append(dict(q=q, m=m, analytic=expected, oracle=float("nan"), abs_err=float("nan"),
                             rel_err=float("nan"), verdict="indeterminate"))
            continue
        err = abs(got - expected)
        rel = err / abs(expected) if expected != 0 else float("inf")
        rows.append(dict(q=q, m=m, analytic=expected, oracle=got, abs_err=err, rel_err=rel,
                         verdict="match" if rel <= rel_tol else "mismatch"))
    return rows


def write_verification_csv(rows, path=None) -> str:
    buf = io.StringIO()
    buf.write("# twistlock-verification/1\n")
    fields = ["q", "m", "analytic", "oracle", "abs_err", "rel_err", "verdict"]
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: (repr(row[k]) if isinstance(row[k], float) else row[k]) for k in fields})
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text
