"""Deterministic figure rendering from harness CSVs.

Five figure kinds mirror the composite panels of the study: error/estimator
trajectories with rate insets, per-component magnitudes, accumulation-strategy
comparisons, the log-log effectivity plot with fitted slopes, and the
synthetic accumulation panels.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .csvio import SchemaError, by_level, mesh_size, read_table

# pinned renderer settings: reruns must be byte-identical and keep text
# as selectable SVG elements
matplotlib.rcParams.update({
    "svg.hashsalt": "paraest-figures",
    "svg.fonttype": "none",
    "figure.dpi": 100,
})

KINDS = ("errors", "components", "comparison", "loglog_effectivity", "accumulation")

STRATEGY_STYLE = {"l1": ("tab:blue", "$L^1$ accumulations"),
                  "l2": ("tab:orange", "$L^2$ accumulations"),
                  "linf": ("tab:green", "$L^\\infty$ accumulations")}


@dataclass
class FigureSpec:
    kind: str
    inputs: list
    output: str
    slope_window: tuple = (5.0, 15.0)
    logy: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; valid: {KINDS}")
        if not self.inputs:
            raise SchemaError("figure spec with no input CSVs")


def fit_slope(t: np.ndarray, y: np.ndarray, window: tuple) -> float:
    mask = (t >= window[0]) & (t <= window[1]) & np.isfinite(y) & (y > 0)
    if mask.sum() < 2:
        raise SchemaError("not enough points in the slope window")
    return float(np.polyfit(np.log(t[mask]), np.log(y[mask]), 1)[0])


def _save(fig, output: str) -> str:
    out = Path(output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
    return str(out)


def _render_errors(spec: FigureSpec) -> str:
    levels = by_level(spec.inputs, ("level", "t", "error_linf_l2", "est_min", "eff_min"))
    fig, axes = plt.subplots(1, 3, figsize=(12.5, 3.6))
    has_positive = False
    for lv, tab in levels.items():
        solid = "-" if lv == max(levels) else "--"
        axes[0].plot(tab["t"], tab["error_linf_l2"], solid, lw=1.2,
                     label=f"error i={lv}")
        axes[0].plot(tab["t"], tab["est_min"], solid, lw=0.9, alpha=0.6,
                     label=f"estimator i={lv}")
        has_positive = has_positive or np.any(tab["error_linf_l2"] > 0) \
            or np.any(tab["est_min"] > 0)
    if has_positive:
        axes[0].set_yscale("log")
    axes[0].set_xlabel("t"); axes[0].set_title("error and estimator")
    axes[0].legend(fontsize=6, ncol=2)

    pairs = list(zip(sorted(levels)[:-1], sorted(levels)[1:]))
    for a, b in pairs:
        ta, tb = levels[a], levels[b]
        n = min(len(ta["t"]), len(tb["t"]))
        ia = np.searchsorted(ta["t"], tb["t"][:n], side="left").clip(0, len(ta["t"]) - 1)
        denom = np.log(mesh_size(b)) - np.log(mesh_size(a))
        for name, style in (("error_linf_l2", "-"), ("est_min", "--")):
            fa, fb = ta[name][ia], tb[name][:n]
            ok = (fa > 0) & (fb > 0)
            rate = np.full(n, np.nan)
            rate[ok] = (np.log(fb[ok]) - np.log(fa[ok])) / denom
            axes[1].plot(tb["t"][:n], rate, style, lw=1.0,
                         label=f"{'error' if name.startswith('error') else 'est'} {a}->{b}")
    axes[1].set_xlabel("t"); axes[1].set_title("convergence rate")
    if pairs:
        axes[1].legend(fontsize=6)

    for lv, tab in levels.items():
        axes[2].plot(tab["t"], tab["eff_min"], lw=1.0, label=f"i={lv}")
    axes[2].set_xlabel("t"); axes[2].set_title("effectivity (min strategy)")
    axes[2].legend(fontsize=6)
    fig.tight_layout()
    return _save(fig, spec.output)


def _render_components(spec: FigureSpec) -> str:
    req = ("level", "t", "S_acc", "T_acc", "E_max", "R_max", "DT_acc", "DS_acc")
    levels = by_level(spec.inputs, req)
    finest = max(levels)
    tab = levels[finest]
    names = ("S_acc", "T_acc", "E_max", "R_max", "DT_acc", "DS_acc")
    two_panels = len(levels) >= 2
    fig, axes = plt.subplots(1, 2 if two_panels else 1,
                             figsize=(9.0 if two_panels else 5.0, 3.4), squeeze=False)
    ax = axes[0][0]
    plotted = [name for name in names if np.any(tab[name] > 0)]
    for name in plotted:
        ax.plot(tab["t"], tab[name], lw=1.1, label=name)
    if plotted:
        ax.set_yscale("log")
        ax.legend(fontsize=7)
    ax.set_xlabel("t")
    ax.set_title(f"estimator components, i={finest}")

    if two_panels:
        a = sorted(levels)[-2]
        ta = levels[a]
        n = min(len(ta["t"]), len(tab["t"]))
        ia = np.searchsorted(ta["t"], tab["t"][:n], side="left").clip(0, len(ta["t"]) - 1)
        denom = np.log(mesh_size(finest)) - np.log(mesh_size(a))
        ax2 = axes[0][1]
        any_rate = False
        for name in names:
            fa, fb = ta[name][ia], tab[name][:n]
            ok = (fa > 0) & (fb > 0)
            if not ok.any():
                continue
            rate = np.full(n, np.nan)
            rate[ok] = (np.log(fb[ok]) - np.log(fa[ok])) / denom
            ax2.plot(tab["t"][:n], rate, lw=1.0, label=name)
            any_rate = True
        ax2.set_xlabel("t"); ax2.set_title(f"component rates {a}->{finest}")
        if any_rate:
            ax2.legend(fontsize=7)
    fig.tight_layout()
    return _save(fig, spec.output)


def _render_comparison(spec: FigureSpec) -> str:
    req = ("level", "t", "est_l1", "est_l2", "est_linf", "eff_l1", "eff_l2", "eff_linf")
    levels = by_level(spec.inputs, req)
    tab = levels[max(levels)]
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.4))
    for s, (color, label) in STRATEGY_STYLE.items():
        axes[0].plot(tab["t"], tab[f"est_{s}"], color=color, lw=1.2, label=label)
        axes[1].plot(tab["t"], tab[f"eff_{s}"], color=color, lw=1.2, label=label)
    if any(np.any(tab[f"est_{s}"] > 0) for s in STRATEGY_STYLE):
        axes[0].set_yscale("log")
    axes[0].set_xlabel("t"); axes[0].set_title("estimator by accumulation type")
    axes[1].set_xlabel("t"); axes[1].set_title("effectivity by accumulation type")
    for ax in axes:
        ax.legend(fontsize=7)
    fig.tight_layout()
    return _save(fig, spec.output)


def _render_loglog_effectivity(spec: FigureSpec) -> str:
    req = ("level", "t", "eff_l1", "eff_l2", "eff_linf")
    levels = by_level(spec.inputs, req)
    tab = levels[max(levels)]
    fig, ax = plt.subplots(figsize=(5.4, 3.8))
    y_top = 0.9
    for s, (color, label) in STRATEGY_STYLE.items():
        eff = tab[f"eff_{s}"]
        slope = fit_slope(tab["t"], eff, spec.slope_window)
        ax.plot(tab["t"], eff, color=color, lw=1.2,
                label=f"{label}")
        ax.text(0.03, y_top, f"{label}: slope {slope:.2f}", color=color,
                transform=ax.transAxes, fontsize=8)
        y_top -= 0.07
    ax.set_xscale("log"); ax.set_yscale("log")
    ax.set_xlabel("t"); ax.set_ylabel("effectivity")
    ax.set_title("effectivity growth on logarithmic axes")
    ax.legend(fontsize=7, loc="lower right")
    fig.tight_layout()
    return _save(fig, spec.output)


def _render_accumulation(spec: FigureSpec) -> str:
    fig, axes = plt.subplots(1, len(spec.inputs), figsize=(4.2 * len(spec.inputs), 3.4),
                             squeeze=False)
    for ax, path in zip(axes[0], spec.inputs):
        tab = read_table(path, ("t", "F"))
        pcols = [c for c in tab if c.startswith("weighted_p")]
        if not pcols:
            raise SchemaError(f"{path}: no weighted_p* columns")
        for c in pcols:
            ax.plot(tab["t"], tab[c], lw=1.1, label=c.replace("weighted_p", "p="))
        name = Path(path).stem.replace("accumulation_", "")
        ax.set_title(name)
        ax.set_xlabel("t")
        ax.legend(fontsize=7)
    axes[0][0].set_ylabel("$c_{p,t}\\,\\|F\\|_{L^p(0,t)}$")
    fig.tight_layout()
    return _save(fig, spec.output)


_RENDERERS = {"errors": _render_errors,
              "components": _render_components,
              "comparison": _render_comparison,
              "loglog_effectivity": _render_loglog_effectivity,
              "accumulation": _render_accumulation}


def render(spec: FigureSpec) -> str:
    """Render one figure spec to its SVG output path."""
    return _RENDERERS[spec.kind](spec)
