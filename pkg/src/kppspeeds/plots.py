"""Figure rendering for the CLI report commands.

Each report command gets one PNG next to its CSV: the regime diagram as a
colored grid with the two analytic boundary curves, sweeps as speed-vs-
parameter lines, and the cross-check as front trajectory context (solver
speed vs fitted simulation speed).
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_REGIME_COLORS = {"fisher": "#d62728", "anomalous": "#9467bd", "interior": "#1f77b4"}
_REGIME_LEVELS = {"fisher": 0, "anomalous": 1, "interior": 2}


def _read_csv(text: str) -> list[dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))


def _plot_diagram(rows: list[dict[str, str]], ax) -> None:
    xs = sorted({float(r["x"]) for r in rows})
    ys = sorted({float(r["y"]) for r in rows})
    grid = np.zeros((len(ys), len(xs)))
    xi = {x: i for i, x in enumerate(xs)}
    yi = {y: i for i, y in enumerate(ys)}
    for r in rows:
        grid[yi[float(r["y"])], xi[float(r["x"])]] = _REGIME_LEVELS[r["regime"]]
    cmap = matplotlib.colors.ListedColormap(
        [_REGIME_COLORS["fisher"], _REGIME_COLORS["anomalous"], _REGIME_COLORS["interior"]]
    )
    ax.pcolormesh(xs, ys, grid, cmap=cmap, vmin=-0.5, vmax=2.5, shading="nearest", alpha=0.6)
    xf = np.linspace(min(xs), min(2.0, max(xs)), 200)
    ax.plot(xf, 2.0 - xf, "k-", lw=1.2, label="interface speed = exterior Fisher")
    xh = np.linspace(max(0.52, min(xs)), max(xs), 300)
    ax.plot(xh, xh / (2 * xh - 1), "k--", lw=1.2, label="interface speed = interior Fisher")
    ax.set_xlim(min(xs), max(xs))
    ax.set_ylim(min(ys), max(ys))
    ax.set_xlabel("D / d")
    ax.set_ylabel("g'(0) / f'(0)")
    ax.set_title("speed regimes (red: exterior, blue: interior, purple: anomalous)")
    ax.legend(loc="upper right", fontsize=8)


def _plot_sweep(rows: list[dict[str, str]], ax) -> None:
    # The varied column is the one that actually changes across rows.
    varying = None
    for key in ("D", "d", "R", "mu", "nu", "gp", "fp", "rho", "N"):
        vals = {r[key] for r in rows}
        if len(vals) > 1:
            varying = key
            break
    varying = varying or "R"
    ok = [r for r in rows if r["status"] == "ok"]
    bad = [r for r in rows if r["status"] != "ok"]
    if ok:
        x = np.array([float(r[varying]) for r in ok])
        c = np.array([float(r["c_star"]) for r in ok])
        ax.plot(x, c, "o-", ms=3, label="spreading speed")
    if bad:
        xb = np.array([float(r[varying]) for r in bad])
        ax.plot(xb, np.zeros_like(xb), "rx", label="no propagation")
    span = [float(r[varying]) for r in rows]
    if min(span) > 0 and max(span) / min(span) > 50:
        ax.set_xscale("log")
    ax.set_xlabel(varying)
    ax.set_ylabel("c*")
    ax.set_title(f"speed sweep over {varying}")
    ax.legend(fontsize=8)


def _plot_xcheck(rows: list[dict[str, str]], ax) -> None:
    r = rows[0]
    solver = float(r["c_star_solver"])
    sim = float(r["speed_sim"])
    ax.bar([0, 1], [solver, sim], color=["#1f77b4", "#ff7f0e"], width=0.6)
    ax.set_xticks([0, 1], ["tangency solver", "strip simulation"])
    ax.set_ylabel("speed")
    ax.set_title(f"solver vs simulator: relative error {float(r['rel_err']):.2%}")
    for i, val in enumerate((solver, sim)):
        ax.text(i, val, f"{val:.4f}", ha="center", va="bottom", fontsize=9)


def render_report(command: str, csv_text: str, csv_path: Path) -> list[Path]:
    """Render the figure(s) for a report command next to its CSV file."""
    rows = _read_csv(csv_text)
    if not rows:
        return []
    fig, ax = plt.subplots(figsize=(6.4, 4.8), dpi=130)
    if command == "diagram":
        _plot_diagram(rows, ax)
    elif command == "sweep":
        _plot_sweep(rows, ax)
    elif command == "xcheck":
        _plot_xcheck(rows, ax)
    else:
        plt.close(fig)
        return []
    fig.tight_layout()
    out = csv_path.with_name(csv_path.stem + f"_{command}.png")
    fig.savefig(out)
    plt.close(fig)
    return [out]
