"""SVG rendering of sweep tables.

Rows are the dictionaries produced by :func:`noma_lab.sweep.run_sweep` or
read back from its CSV.  Output bytes are deterministic for a fixed table:
the SVG id salt is pinned and the date metadata is dropped.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import numpy as np  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

__all__ = ["PlotError", "PlotSummary", "emit_plot", "PLOT_KINDS"]

PLOT_KINDS = ("lines", "surface")

# Columns that can separate one curve or panel from another.
GROUP_COLUMNS = ("rho_db", "a1", "b1", "alpha_su1", "alpha_su2", "alpha_su3",
                 "alpha_ru2", "alpha_ru3", "w1", "w2", "wr", "epsilon")

AXIS_LABELS = {
    "rho_db": r"Transmit SNR $\rho$ (dB)",
    "a1": r"Power allocation $a_1$",
    "b1": r"Power allocation $b_1$",
    "epsilon": r"Outage tolerance $\epsilon$",
}

METRIC_LABELS = {
    "ergodic_sum": "Ergodic sum rate (bits/s/Hz)",
    "per_symbol_rates": "Ergodic rate (bits/s/Hz)",
    "outage": "Outage probability",
    "outage_capacity": "Outage capacity (bits/s/Hz)",
}

SHORT_NAMES = {"alpha_su1": "αSU1", "alpha_su2": "αSU2", "alpha_su3": "αSU3",
               "alpha_ru2": "αRU2", "alpha_ru3": "αRU3", "rho_db": "ρ", "epsilon": "ε"}


class PlotError(ValueError):
    """Raised when a table cannot be drawn as the requested kind."""


@dataclass(frozen=True)
class PlotSummary:
    path: Path
    series: tuple[str, ...]
    panels: int


def _num(row: dict, key: str) -> float | None:
    v = row.get(key)
    if v is None or v == "":
        return None
    return float(v)


def _varying(rows: list[dict], exclude: tuple[str, ...]) -> list[str]:
    out = []
    for col in GROUP_COLUMNS:
        if col in exclude:
            continue
        if len({_num(r, col) for r in rows}) > 1:
            out.append(col)
    return out


def _label(scheme: str, metric: str, cols: list[str], key: tuple) -> str:
    parts = [scheme]
    if ":" in metric:
        parts.append(metric.split(":", 1)[1])
    parts += [f"{SHORT_NAMES.get(c, c)}={v:g}" for c, v in zip(cols, key)]
    return ", ".join(parts)


def _metric_family(rows: list[dict]) -> str:
    fams = {str(r.get("metric", "")).split(":", 1)[0] for r in rows}
    if len(fams) != 1:
        raise PlotError(f"table mixes metrics {sorted(fams)}")
    return fams.pop()


def _check_columns(rows: list[dict], needed: tuple[str, ...]) -> None:
    for i, r in enumerate(rows):
        for c in needed:
            if c not in r or r[c] in (None, ""):
                raise PlotError(f"row {i} lacks a value for column {c!r}")


def _new_figure(ncols: int = 1, nrows: int = 1) -> Figure:
    fig = Figure(figsize=(5.0 * ncols, 4.0 * nrows))
    fig.set_layout_engine("constrained")
    return fig


def _draw_lines(rows, x_axis, title):
    _check_columns(rows, ("scheme", "metric", "value", x_axis))
    family = _metric_family(rows)
    cols = _varying(rows, (x_axis,))
    series: dict[tuple, list[tuple[float, float]]] = {}
    for r in rows:
        key = (r["scheme"], r["metric"]) + tuple(_num(r, c) for c in cols)
        series.setdefault(key, []).append((_num(r, x_axis), _num(r, "value")))
    fig = _new_figure()
    ax = fig.add_subplot()
    labels = []
    for key, pts in series.items():
        xs = [p[0] for p in pts]
        if len(set(xs)) != len(xs):
            raise PlotError(f"series {key} repeats {x_axis} values; table does not "
                            "match a line plot over that axis")
        pts.sort()
        label = _label(key[0], key[1], cols, key[2:])
        labels.append(label)
        style = "-" if key[0] == "mrc" else "--"
        ax.plot([p[0] for p in pts], [p[1] for p in pts], style, marker="o",
                markersize=3, label=label)
    ax.set_xlabel(AXIS_LABELS.get(x_axis, x_axis))
    ax.set_ylabel(METRIC_LABELS.get(family, family))
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize="small")
    if title:
        ax.set_title(title)
    return fig, tuple(labels), 1


def _draw_surface(rows, title):
    _check_columns(rows, ("scheme", "metric", "value", "a1", "b1"))
    family = _metric_family(rows)
    for axis in ("a1", "b1"):
        if len({_num(r, axis) for r in rows}) < 2:
            raise PlotError(f"a surface needs at least two {axis} values; table has one")
    cols = _varying(rows, ("a1", "b1"))
    panels: dict[tuple, dict[tuple[float, float], float]] = {}
    for r in rows:
        key = (r["scheme"], r["metric"]) + tuple(_num(r, c) for c in cols)
        cell = (_num(r, "a1"), _num(r, "b1"))
        grid = panels.setdefault(key, {})
        if cell in grid:
            raise PlotError(f"panel {key} has two rows at a1={cell[0]}, b1={cell[1]}")
        grid[cell] = _num(r, "value")
    n = len(panels)
    ncols = min(n, 4)
    nrows = -(-n // ncols)
    fig = _new_figure(ncols, nrows)
    axes = np.atleast_1d(fig.subplots(nrows, ncols, squeeze=False)).ravel()
    labels = []
    for ax, (key, grid) in zip(axes, panels.items()):
        a_vals = sorted({c[0] for c in grid})
        b_vals = sorted({c[1] for c in grid})
        if len(grid) != len(a_vals) * len(b_vals):
            raise PlotError(f"panel {key} has {len(grid)} cells, expected "
                            f"{len(a_vals)}x{len(b_vals)} for a full a1-b1 grid")
        z = np.array([[grid[(a, b)] for a in a_vals] for b in b_vals])
        mesh = ax.pcolormesh(a_vals, b_vals, z, shading="nearest")
        fig.colorbar(mesh, ax=ax, label=METRIC_LABELS.get(family, family))
        label = _label(key[0], key[1], cols, key[2:])
        labels.append(label)
        ax.set_title(label, fontsize="small")
        ax.set_xlabel(AXIS_LABELS["a1"])
        ax.set_ylabel(AXIS_LABELS["b1"])
    for ax in axes[n:]:
        ax.set_visible(False)
    if title:
        fig.suptitle(title)
    return fig, tuple(labels), n


def emit_plot(table: list[dict], kind: str, path: str | Path, *,
              x_axis: str = "rho_db", title: str | None = None) -> PlotSummary:
    """Render ``table`` as an SVG file.

    Parameters
    ----------
    table
        Sweep rows.  Numeric cells may be floats or their string forms.
    kind
        ``"lines"`` draws one curve per (scheme, parameter group) against
        ``x_axis``.  ``"surface"`` draws one a1-by-b1 heatmap per group.
    path
        Destination file.  Nothing is written if the table is rejected.

    Raises
    ------
    PlotError
        Empty table, unknown kind, missing columns, or rows that do not
        form the requested shape.
    """
    if kind not in PLOT_KINDS:
        raise PlotError(f"unknown plot kind {kind!r}; expected one of {PLOT_KINDS}")
    rows = list(table)
    if not rows:
        raise PlotError("cannot plot an empty table")
    if kind == "lines":
        fig, labels, panels = _draw_lines(rows, x_axis, title)
    else:
        fig, labels, panels = _draw_surface(rows, title)
    buf = io.BytesIO()
    with matplotlib.rc_context({"svg.hashsalt": "noma-lab", "svg.fonttype": "path"}):
        fig.savefig(buf, format="svg", metadata={"Date": None})
    path = Path(path)
    path.write_bytes(buf.getvalue())
    return PlotSummary(path, labels, panels)
