"""Render summary graphs to image files.

Nodes are laid out on a circle; edges are drawn solid or dashed to match
their status, and endpoint decorations follow the mark states: a filled
arrowhead where an arrow is certain, nothing where a tail is certain, and a
small open circle where the mark varies across consistent models.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .pipeline import ALWAYS, NEVER


def _layout(nodes):
    n = max(len(nodes), 1)
    pos = {}
    for i, v in enumerate(nodes):
        theta = 2.0 * math.pi * i / n + math.pi / 2.0
        pos[v] = (math.cos(theta), math.sin(theta))
    return pos


def _endpoint_kind(marks):
    if marks["arrow"] == ALWAYS:
        return "arrow"
    if marks["tail"] == ALWAYS and marks["arrow"] == NEVER:
        return "tail"
    return "circle"


def _decorate(ax, tip, src, kind):
    dx, dy = tip[0] - src[0], tip[1] - src[1]
    norm = math.hypot(dx, dy) or 1.0
    ux, uy = dx / norm, dy / norm
    if kind == "arrow":
        ax.annotate(
            "",
            xy=tip,
            xytext=(tip[0] - 0.12 * ux, tip[1] - 0.12 * uy),
            arrowprops={"arrowstyle": "-|>", "color": "black", "lw": 1.5},
        )
    elif kind == "circle":
        ax.plot(
            [tip[0] - 0.06 * ux],
            [tip[1] - 0.06 * uy],
            marker="o",
            markersize=7,
            markerfacecolor="white",
            markeredgecolor="black",
            zorder=3,
        )


def render_summary(summary, path, title=None):
    """Draw the summary graph and save it to `path` (format by extension)."""
    pos = _layout(summary.nodes)
    fig, ax = plt.subplots(figsize=(6, 6))
    for (x, y), e in sorted(summary.edges.items()):
        (x0, y0), (x1, y1) = pos[x], pos[y]
        # trim the segment so decorations sit outside the node labels
        dx, dy = x1 - x0, y1 - y0
        norm = math.hypot(dx, dy) or 1.0
        ux, uy = dx / norm, dy / norm
        a = (x0 + 0.13 * ux, y0 + 0.13 * uy)
        b = (x1 - 0.13 * ux, y1 - 0.13 * uy)
        style = "-" if e["status"] == "solid" else "--"
        ax.plot([a[0], b[0]], [a[1], b[1]], style, color="black", lw=1.5, zorder=1)
        _decorate(ax, b, a, _endpoint_kind(e["marks"][y]))
        _decorate(ax, a, b, _endpoint_kind(e["marks"][x]))
    for v, (px, py) in pos.items():
        ax.text(
            px,
            py,
            str(v),
            ha="center",
            va="center",
            zorder=4,
            bbox={"boxstyle": "circle", "facecolor": "#eef2ff", "edgecolor": "black"},
        )
    if title:
        ax.set_title(title)
    ax.set_xlim(-1.4, 1.4)
    ax.set_ylim(-1.4, 1.4)
    ax.set_aspect("equal")
    ax.axis("off")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path
