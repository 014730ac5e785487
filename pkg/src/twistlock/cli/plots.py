"""Static SVG panels for each experiment.

SVG output is made reproducible by pinning matplotlib's id salt and
dropping the creation date, so identical results give identical bytes.
"""
from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import ListedColormap  # noqa: E402

__all__ = ["emit_plots", "save_svg"]

_STYLE = {"svg.hashsalt": "twistlock", "svg.fonttype": "path", "font.size": 9}
STABLE_COLOR, UNSTABLE_COLOR = "#1f3b8c", "#a9c9ee"


def save_svg(fig, path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _figure():
    return plt.subplots(figsize=(5.5, 4.0))


def _heatmap(cells, xkey, path, title, lag=None):
    rows = [c for c in cells if lag is None or c.get("lag") == lag]
    fig, ax = _figure()
    if rows:
        xs = sorted({r[xkey] for r in rows})
        qs = sorted({r["q"] for r in rows})
        grid = np.full((len(qs), len(xs)), np.nan)
        xi = {x: i for i, x in enumerate(xs)}
        qi = {q: i for i, q in enumerate(qs)}
        for r in rows:
            grid[qi[r["q"]], xi[r[xkey]]] = 1.0 if r["analytic"] == "stable" else 0.0
        ax.imshow(grid, origin="lower", aspect="auto", interpolation="nearest",
                  cmap=ListedColormap([UNSTABLE_COLOR, STABLE_COLOR]), vmin=0, vmax=1)
        ax.set_xticks(range(len(xs)))
        ax.set_xticklabels([f"{x:g}" for x in xs], rotation=90 if len(xs) > 12 else 0, fontsize=6)
        step = max(1, len(qs) // 10)
        ax.set_yticks(range(0, len(qs), step))
        ax.set_yticklabels([str(q) for q in qs[::step]])
        wrong = [(xi[r[xkey]], qi[r["q"]]) for r in rows if r.get("verdict") in ("mismatch", "error")]
        if wrong:
            ax.scatter(*zip(*wrong), marker="x", color="red", s=12, label="simulation disagrees")
            ax.legend(loc="upper right", fontsize=7)
    ax.set_xlabel(xkey)
    ax.set_ylabel("q")
    ax.set_title(title)
    save_svg(fig, path)


def _fig1(result, out_dir):
    files = []
    cells = result["cells"]
    fig, ax = _figure()
    qs = [c["signed_q"] for c in cells]
    order = np.argsort(qs)
    ax.axhline(0.0, color="0.6", lw=0.8)
    ax.plot(np.array(qs)[order], np.array([c["finite_max_lambda"] for c in cells])[order], "o-", ms=3,
            label="finite network")
    ax.plot(np.array(qs)[order], np.array([c["continuum_max_lambda"] for c in cells])[order], "s--", ms=3,
            label="continuum limit")
    ax.set_xlabel("q")
    ax.set_ylabel("max_m lambda_{m,q}")
    ax.legend(fontsize=7)
    save_svg(fig, os.path.join(out_dir, "max_lambda.svg"))
    files.append("max_lambda.svg")
    for q, traj in sorted(result.get("extra", {}).get("trajectories", {}).items()):
        fig, ax = _figure()
        ax.plot(traj.times, np.asarray(traj.series["S"]).reshape(len(traj.times), -1)[:, 0], label=f"S^({q})")
        ax.plot(traj.times, np.asarray(traj.series["r"]).reshape(len(traj.times), -1)[:, 0], label="r")
        ax.set_xlabel("t")
        ax.set_ylim(-0.02, 1.02)
        ax.legend(fontsize=7)
        name = f"similarity_q{q}.svg"
        save_svg(fig, os.path.join(out_dir, name))
        files.append(name)
    return files


def _critical(result, out_dir):
    stair = result["analytic"]["staircase"]
    fig, ax = _figure()
    pts = [(s["n"], s["critical_k"]) for s in stair if s["critical_k"] is not None]
    if pts:
        ax.step(*zip(*pts), where="mid", color="k")
        ax.plot(*zip(*pts), "o", color="k", ms=3)
    ax.set_xlabel("n")
    ax.set_ylabel("critical k")
    save_svg(fig, os.path.join(out_dir, "staircase.svg"))
    fig, ax = _figure()
    for role, marker in (("critical", "o"), ("below", "v")):
        rows = [c for c in result["cells"] if c["role"] == role and "r_final" in c]
        if rows:
            ax.plot([c["n"] for c in rows], [c["r_final"] for c in rows], marker, label=f"k = {role}"
                    if role == "critical" else "k = critical - 1")
    ax.set_xlabel("n")
    ax.set_ylabel("final r")
    ax.set_ylim(-0.02, 1.02)
    if result["cells"]:
        ax.legend(fontsize=7)
    save_svg(fig, os.path.join(out_dir, "final_order.svg"))
    return ["staircase.svg", "final_order.svg"]


def _delay(result, out_dir):
    cells = result["cells"]
    fig, ax = _figure()
    if cells:
        nus = [c["nu"] for c in cells]
        ax.plot(nus, [c["predicted_q"] for c in cells], "k-", drawstyle="steps-mid", label="predicted |q|")
        sim = [c for c in cells if "mean_q" in c]
        if sim:
            ax.errorbar([c["nu"] for c in sim], [c["mean_q"] for c in sim], yerr=[c["std_q"] for c in sim],
                        fmt="o", ms=3, color="0.4", label="simulated mean +- std")
        ax.set_xscale("log")
        ax.legend(fontsize=7)
    ax.set_xlabel("conduction speed nu")
    ax.set_ylabel("|q|")
    save_svg(fig, os.path.join(out_dir, "wave_number.svg"))
    return ["wave_number.svg"]


def _oracle(result, out_dir):
    rows = [c for c in result["cells"] if c["check"] == "growth" and c.get("oracle") is not None]
    fig, ax = _figure()
    if rows:
        a = np.array([c["analytic"] for c in rows])
        o = np.array([c["oracle"] for c in rows])
        lim = [min(a.min(), o.min()), max(a.max(), o.max())]
        ax.plot(lim, lim, color="0.6", lw=0.8)
        ax.plot(a, o, "o", ms=3)
    ax.set_xlabel("analytic lambda")
    ax.set_ylabel("fitted growth rate")
    save_svg(fig, os.path.join(out_dir, "oracle_growth.svg"))
    return ["oracle_growth.svg"]


def emit_plots(result: dict, out_dir) -> list[str]:
    exp = result["config"]["experiment"]
    with matplotlib.rc_context(_STYLE):
        if exp == "fig1":
            return _fig1(result, out_dir)
        if exp == "kring_sweep":
            _heatmap(result["cells"], "k", os.path.join(out_dir, "stability_heatmap.svg"), "k-ring stability")
            return ["stability_heatmap.svg"]
        if exp == "alpha_sweep":
            _heatmap(result["cells"], "alpha", os.path.join(out_dir, "stability_heatmap.svg"),
                     "distance-decay stability")
            return ["stability_heatmap.svg"]
        if exp == "phaselag_sweep":
            _heatmap(result["cells"], "k", os.path.join(out_dir, "stability_heatmap.svg"),
                     "stability with distance lag", lag="distance")
            _heatmap(result["cells"], "k", os.path.join(out_dir, "stability_heatmap_nolag.svg"),
                     "stability without lag", lag="none")
            return ["stability_heatmap.svg", "stability_heatmap_nolag.svg"]
        if exp == "critical_k":
            return _critical(result, out_dir)
        if exp == "delay_waves":
            return _delay(result, out_dir)
        if exp == "verify_oracle":
            return _oracle(result, out_dir)
    return []
