"""Figure rendering for the command-line report paths.

Renders the scan curves produced by the CLI to PNG files next to the CSV
output. Uses the non-interactive Agg backend so it works headless; the CSV
remains the data contract and the figures are a convenience view.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = ["Curve", "render_curves", "render_rows"]

AXIS_KEYS = ("t", "tau", "theta")


@dataclass(frozen=True)
class Curve:
    """One labeled line: x/y arrays plus matplotlib style overrides."""

    x: Sequence[float]
    y: Sequence[float]
    label: str
    style: dict = field(default_factory=dict)


def render_curves(
    path: str,
    curves: Sequence[Curve],
    xlabel: str,
    ylabel: str,
    title: str | None = None,
) -> None:
    """Draw labeled curves on a single axes and save to ``path``."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for curve in curves:
        style = {"linewidth": 1.4, **curve.style}
        ax.plot(curve.x, curve.y, label=curve.label, **style)
    ax.axhline(0.0, color="0.6", linewidth=0.8, zorder=0)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if curves:
        ax.legend(fontsize=8, framealpha=0.6)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _distinct(rows: list[dict], key: str) -> list:
    seen = []
    for row in rows:
        value = row.get(key)
        if value is not None and value != "" and value not in seen:
            seen.append(value)
    return seen


def render_rows(path: str, rows: list[dict], title: str | None = None) -> None:
    """Render scan rows grouped into curves.

    The x axis is the first of t, tau, theta that takes more than one value
    (falling back to the row index); rows are grouped into one curve per
    combination of the remaining varying fields. Assumes a Cartesian grid,
    which is what the scan commands emit.
    """
    x_key = next((k for k in AXIS_KEYS if len(_distinct(rows, k)) > 1), None)
    group_keys = [
        k
        for k in ("scheme", "y_update", "directions", "theta", "tau", "t")
        if k != x_key and len(_distinct(rows, k)) > 1
    ]
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault(tuple(row.get(k) for k in group_keys), []).append(row)
    curves = []
    for key, members in groups.items():
        bits = []
        for name, value in zip(group_keys, key):
            if name == "scheme":
                bits.append(str(value))
            elif isinstance(value, float):
                bits.append(f"{name}={value:g}")
            else:
                bits.append(f"{name}={value}")
        label = ", ".join(bits) if bits else "cpf_value"
        if x_key is None:
            xs = list(range(len(members)))
        else:
            xs = [row[x_key] for row in members]
        pairs = sorted(zip(xs, [row["cpf_value"] for row in members]))
        style = {"linestyle": "--"} if "random" in label else {}
        curves.append(
            Curve([p[0] for p in pairs], [p[1] for p in pairs], label, style)
        )
    render_curves(
        path,
        curves,
        xlabel=x_key if x_key is not None else "row",
        ylabel="CPF correlation",
        title=title,
    )
