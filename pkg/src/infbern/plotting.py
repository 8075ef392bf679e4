"""Figure rendering for the CLI report path.

Figures are derived artifacts: every plot is rendered from the same sampled
arrays that go into its CSV twin, never the other way around.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "infbern"

import matplotlib.pyplot as plt
import numpy as np


@dataclass(frozen=True)
class Curve:
    label: str
    x: np.ndarray
    y: np.ndarray


@dataclass
class PlotSpec:
    curves: list[Curve] = field(default_factory=list)
    xlabel: str = ""
    ylabel: str = ""
    title: str = ""
    xlim: tuple | None = None
    ylim: tuple | None = None
    axhline: float | None = None

    def validate(self) -> None:
        if not self.curves:
            raise ValueError("a plot needs at least one curve")
        for c in self.curves:
            if len(c.x) == 0 or len(c.x) != len(c.y):
                raise ValueError(f"curve {c.label!r} has inconsistent arrays")
            if not (np.isfinite(c.x).all() and np.isfinite(c.y).all()):
                raise ValueError(f"curve {c.label!r} has non-finite samples")


def render(spec: PlotSpec, path) -> None:
    spec.validate()
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for c in spec.curves:
        ax.plot(c.x, c.y, label=c.label, linewidth=1.4)
    if spec.axhline is not None:
        ax.axhline(spec.axhline, color="0.6", linewidth=0.8, zorder=0)
    ax.set_xlabel(spec.xlabel)
    ax.set_ylabel(spec.ylabel)
    if spec.title:
        ax.set_title(spec.title)
    if spec.xlim:
        ax.set_xlim(*spec.xlim)
    if spec.ylim:
        ax.set_ylim(*spec.ylim)
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def render_heatmap(values: np.ndarray, extent, path, label: str = "") -> None:
    fig, ax = plt.subplots(figsize=(5.4, 4.6))
    im = ax.imshow(values, origin="lower", extent=extent, cmap="viridis",
                   vmin=0.0, vmax=1.0, interpolation="nearest")
    fig.colorbar(im, ax=ax, label=label)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
