"""The four figure kinds rendered from solver CSV artifacts.

solution_overlay   density of a snapshot against a reference profile
history            entropy change over time (plus error if present)
convergence        log-log error-vs-h with least-squares slope annotations
spectrum           eigenvalue scatter with the Re = 0 line marked

render() writes the image and returns a metadata dict (fitted slopes for
convergence plots); rendering never mutates its inputs and is deterministic
for fixed inputs.
"""

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from esdg_plots.csvio import PlotDataError, read_columns, require

KINDS = ("solution_overlay", "history", "convergence", "spectrum")

_STYLE = {"figure.figsize": (6.0, 4.2), "figure.dpi": 130, "font.size": 9, "svg.hashsalt": "esdg"}


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    csv_paths: tuple
    out_path: str
    title: str = ""
    x_col: str = ""
    y_cols: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}, expected one of {KINDS}")
        if not self.csv_paths:
            raise ValueError("at least one input CSV is required")


def _finish(fig, spec):
    if spec.title:
        fig.axes[0].set_title(spec.title)
    fig.tight_layout()
    fig.savefig(spec.out_path, metadata={"Software": "esdg-plots"})
    plt.close(fig)


def _solution_overlay(spec):
    sol = read_columns(spec.csv_paths[0])
    require(sol, ["x", "rho"], spec.csv_paths[0])
    fig, ax = plt.subplots()
    if len(spec.csv_paths) > 1:
        ref = read_columns(spec.csv_paths[1])
        require(ref, ["x", "rho"], spec.csv_paths[1])
        order = np.argsort(ref["x"])
        ax.plot(ref["x"][order], ref["rho"][order], "-", color="0.45", lw=1.2, label="reference")
    order = np.argsort(sol["x"])
    ax.plot(sol["x"][order], sol["rho"][order], ".", ms=2.5, color="tab:red", label="computed")
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    ax.legend(loc="best")
    _finish(fig, spec)
    return {"kind": spec.kind, "n_points": int(sol["x"].size)}


def _history(spec):
    hist = read_columns(spec.csv_paths[0])
    require(hist, ["t", "total_entropy"], spec.csv_paths[0])
    t = hist["t"]
    dS = hist["total_entropy"] - hist["total_entropy"][0]
    fig, ax = plt.subplots()
    ax.plot(t, dS, "-", color="tab:blue", lw=1.2, label="entropy change")
    ax.axhline(0.0, color="0.7", lw=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel("S(t) - S(0)")
    meta = {"kind": spec.kind, "final_change": float(dS[-1]), "monotone": bool(np.all(np.diff(dS) <= 1e-12))}
    if "l2_error" in hist and np.any(np.isfinite(hist["l2_error"])) and np.nanmax(hist["l2_error"]) > 0:
        ax2 = ax.twinx()
        ax2.semilogy(t, hist["l2_error"], "-", color="tab:orange", lw=1.0, label="L2 error")
        ax2.set_ylabel("L2 error")
        meta["final_error"] = float(hist["l2_error"][-1])
    ax.legend(loc="best")
    _finish(fig, spec)
    return meta


def _fit_slope(h, err):
    keep = np.isfinite(err) & (err > 0)
    if keep.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(h[keep]), np.log(err[keep]), 1)[0])


def _convergence(spec):
    tab = read_columns(spec.csv_paths[0])
    x_col = spec.x_col or "h"
    require(tab, [x_col], spec.csv_paths[0])
    y_cols = list(spec.y_cols) or [
        c for c in tab if c.startswith("error") or c.startswith("max_")
    ]
    if not y_cols:
        raise PlotDataError(f"{spec.csv_paths[0]}: no error columns to plot")
    require(tab, y_cols, spec.csv_paths[0])
    h = tab[x_col]
    fig, ax = plt.subplots()
    slopes = {}
    for name in y_cols:
        slope = _fit_slope(h, tab[name])
        slopes[name] = slope
        ax.loglog(h, tab[name], "o-", ms=3.5, lw=1.0, label=f"{name} (slope {slope:.2f})")
    ax.set_xlabel(x_col)
    ax.set_ylabel("error")
    ax.invert_xaxis()
    ax.legend(loc="best")
    ax.grid(True, which="both", alpha=0.25)
    _finish(fig, spec)
    return {"kind": spec.kind, "slopes": slopes}


def _spectrum(spec):
    tab = read_columns(spec.csv_paths[0])
    re_col = spec.x_col or "re"
    im_col = spec.y_cols[0] if spec.y_cols else "im"
    require(tab, [re_col, im_col], spec.csv_paths[0])
    fig, ax = plt.subplots()
    ax.scatter(tab[re_col], tab[im_col], s=6, color="tab:blue")
    ax.axvline(0.0, color="tab:red", lw=0.9)
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    _finish(fig, spec)
    return {"kind": spec.kind, "max_real": float(np.nanmax(tab[re_col]))}


_RENDERERS = {
    "solution_overlay": _solution_overlay,
    "history": _history,
    "convergence": _convergence,
    "spectrum": _spectrum,
}


def render(spec):
    """Render one figure; returns a metadata dict (slopes etc.)."""
    with plt.rc_context(_STYLE):
        return _RENDERERS[spec.kind](spec)
