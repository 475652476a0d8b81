"""Report figures, rendered off-screen to image files."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .graphon import StepGraphon


def _figure(width: float = 5.0, height: float = 3.5):
    fig = Figure(figsize=(width, height), layout="constrained")
    FigureCanvasAgg(fig)
    return fig, fig.add_subplot()


def _save(fig: Figure, path) -> Path:
    path = Path(path)
    fig.savefig(path, dpi=120)
    return path


def gap_trace(history, path, unit: str = "nat") -> Path:
    """Objective and antiblocker gap per solver iteration."""
    if not history:
        raise ValueError("empty history; run the solver with record_history=True")
    it, val, gap = (np.array(col, dtype=float) for col in zip(*history))
    fig, ax = _figure()
    ax.semilogy(it, np.maximum(gap, 1e-17), color="C0", label="gap")
    ax.set_xlabel("iteration")
    ax.set_ylabel("gap")
    ax2 = ax.twinx()
    ax2.plot(it, val, color="C1", label=f"objective ({unit})")
    ax2.set_ylabel(f"objective ({unit})")
    fig.legend(loc="upper right")
    return _save(fig, path)


def rate_curve(ells, rates, path, bracket=None, limit=None, unit: str = "nat") -> Path:
    """Cover rate log(N)/ell against block length, with the entropy bracket."""
    fig, ax = _figure()
    ax.plot(ells, rates, "o-", label="cover rate")
    if bracket is not None:
        lo, hi = bracket
        if math.isfinite(lo) and math.isfinite(hi):
            ax.axhspan(lo, hi, color="0.85", label="entropy bracket")
            ax.axhline(lo, color="0.5", lw=0.8)
    if limit is not None:
        ax.axhline(limit, color="C3", ls="--", label="limit")
    ax.set_xlabel("block length")
    ax.set_ylabel(f"rate ({unit})")
    ax.legend()
    return _save(fig, path)


def circle_convergence(ms, values, exact: float, path) -> Path:
    """Discretization error against the number of blocks."""
    ms = np.asarray(ms, dtype=float)
    err = np.abs(np.asarray(values, dtype=float) - exact)
    fig, ax = _figure()
    ax.loglog(ms, np.maximum(err, 1e-17), "o-")
    ax.set_xlabel("blocks")
    ax.set_ylabel("|error|")
    return _save(fig, path)


def graphon_support(w: StepGraphon, path) -> Path:
    """Support of a step graphon drawn on the unit square."""
    edges = np.concatenate(([0.0], np.cumsum(w.block_masses)))
    fig, ax = _figure(4.0, 4.0)
    ax.pcolormesh(edges, edges, w.support.astype(float), cmap="Greys", vmin=0, vmax=1)
    ax.set_xlim(0, 1)
    ax.set_ylim(1, 0)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    return _save(fig, path)
