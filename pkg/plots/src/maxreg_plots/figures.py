"""Render static figures from maxreg CSV artifacts.

Each figure kind expects one CSV schema (checked against the ``# schema=``
comment in row 1) and writes a single image.  Rendering is read-only with
respect to its inputs and deterministic: identical CSVs yield identical
image bytes.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


class SchemaError(ValueError):
    """The CSV does not carry the schema the figure kind expects."""


class EmptyDataError(ValueError):
    """The CSV parses but holds no data rows."""


#: figure kind -> accepted CSV schema versions
KIND_SCHEMAS = {
    "convergence": ("convergence-v1",),
    "mr_scatter": ("mr-random-v1", "mr-refinement-v1"),
    "energy": ("mr-refinement-v1",),
    "sqrt_ratio": ("sqrt-ratio-v1",),
}


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    csv_path: str
    out_path: str
    title: str | None = None


@dataclass(frozen=True)
class RenderResult:
    kind: str
    out_path: str
    n_points: int
    metadata: dict = field(default_factory=dict)


def read_artifact(path: str):
    """Parse a maxreg CSV: (schema, header, column dict of string lists)."""
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().strip()
        if not first.startswith("# schema="):
            raise SchemaError(f"{path}: missing '# schema=' comment row")
        schema = first[len("# schema="):]
        header = [h.strip() for h in fh.readline().strip().split(",")]
        columns = {h: [] for h in header}
        for line in fh:
            if not line.strip():
                continue
            parts = line.strip().split(",")
            if len(parts) != len(header):
                raise SchemaError(
                    f"{path}: row has {len(parts)} fields, header has "
                    f"{len(header)}"
                )
            for h, v in zip(header, parts):
                columns[h].append(v)
    return schema, header, columns


def _floats(columns, name):
    return np.array([float(v) for v in columns[name]])


def _check(spec: FigureSpec):
    if spec.kind not in KIND_SCHEMAS:
        raise SchemaError(
            f"unknown figure kind {spec.kind!r}; expected one of "
            f"{sorted(KIND_SCHEMAS)}"
        )
    schema, header, columns = read_artifact(spec.csv_path)
    expected = KIND_SCHEMAS[spec.kind]
    if schema not in expected:
        raise SchemaError(
            f"{spec.csv_path}: kind {spec.kind!r} expects schema "
            f"{' or '.join(expected)}, found {schema!r} "
            f"with columns {header}"
        )
    n_rows = len(next(iter(columns.values()))) if columns else 0
    if n_rows == 0:
        raise EmptyDataError(f"{spec.csv_path}: no data rows")
    return schema, columns


def _new_axes(spec: FigureSpec, default_title: str):
    fig, ax = plt.subplots(figsize=(6.4, 4.8), dpi=110)
    ax.set_title(spec.title or default_title)
    ax.grid(True, which="both", alpha=0.3)
    return fig, ax


def _finish(fig, spec: FigureSpec):
    fig.tight_layout()
    fig.savefig(spec.out_path, metadata={"Software": "maxreg-plots"})
    plt.close(fig)


def _render_convergence(spec: FigureSpec, columns) -> RenderResult:
    dt = _floats(columns, "dt")
    err = _floats(columns, "error")
    slope = float(np.polyfit(np.log(dt), np.log(err), 1)[0])
    fig, ax = _new_axes(spec, "Convergence under time refinement")
    ax.loglog(dt, err, "o-", label="error")
    anchor = err[-1] * (dt / dt[-1]) ** slope
    ax.loglog(dt, anchor, "--", color="gray",
              label=f"fitted slope {slope:.3f}")
    ax.set_xlabel("dt")
    ax.set_ylabel("error")
    ax.legend()
    ax.annotate(f"slope = {slope:.3f}", xy=(0.05, 0.9),
                xycoords="axes fraction")
    _finish(fig, spec)
    return RenderResult(kind=spec.kind, out_path=spec.out_path,
                        n_points=len(dt),
                        metadata={"fitted_slope": slope})


def _render_mr_scatter(spec: FigureSpec, columns) -> RenderResult:
    lhs = _floats(columns, "norm_MR")
    rhs = _floats(columns, "rhs")
    fig, ax = _new_axes(spec, "Maximal-regularity estimate")
    lo = min(lhs.min(), rhs.min())
    hi = max(lhs.max(), rhs.max())
    line = np.array([lo * 0.8, hi * 1.2])
    ax.loglog(line, line, "-", color="gray", label="y = x")
    ax.loglog(rhs, lhs, "o", ms=4, label="problems")
    ax.set_xlabel("C (||u0||_V + ||f||)")
    ax.set_ylabel("||u||_MR")
    ax.legend()
    n_above = int(np.sum(lhs > rhs))
    _finish(fig, spec)
    return RenderResult(kind=spec.kind, out_path=spec.out_path,
                        n_points=len(lhs),
                        metadata={"points_above_line": n_above})


def _render_energy(spec: FigureSpec, columns) -> RenderResult:
    n_steps = _floats(columns, "n_steps")
    residual = _floats(columns, "energy_residual")
    slope = float("nan")
    if len(n_steps) > 1 and np.all(residual > 0):
        slope = float(np.polyfit(np.log(1.0 / n_steps), np.log(residual),
                                 1)[0])
    fig, ax = _new_axes(spec, "Energy identity residual")
    ax.loglog(n_steps, residual, "o-")
    ax.set_xlabel("time steps")
    ax.set_ylabel("integrated residual")
    if np.isfinite(slope):
        ax.annotate(f"decay order = {slope:.3f}", xy=(0.05, 0.9),
                    xycoords="axes fraction")
    _finish(fig, spec)
    return RenderResult(kind=spec.kind, out_path=spec.out_path,
                        n_points=len(n_steps),
                        metadata={"decay_order": slope})


def _render_sqrt_ratio(spec: FigureSpec, columns) -> RenderResult:
    n = _floats(columns, "n")
    upper = _floats(columns, "r_upper")
    lower = _floats(columns, "r_lower")
    spread = float(upper.max() / lower.min())
    fig, ax = _new_axes(spec, "Square-root property ratios")
    ax.semilogx(n, upper, "o-", label="sup ||A^{1/2}u||_H / ||u||_V")
    ax.semilogx(n, lower, "s-", label="inf ||A^{1/2}u||_H / ||u||_V")
    ax.set_xlabel("mesh resolution n")
    ax.set_ylabel("ratio")
    ax.legend()
    ax.annotate(f"spread = {spread:.3f}", xy=(0.05, 0.9),
                xycoords="axes fraction")
    _finish(fig, spec)
    return RenderResult(kind=spec.kind, out_path=spec.out_path,
                        n_points=len(n),
                        metadata={"spread": spread})


_RENDERERS = {
    "convergence": _render_convergence,
    "mr_scatter": _render_mr_scatter,
    "energy": _render_energy,
    "sqrt_ratio": _render_sqrt_ratio,
}


def render(spec: FigureSpec) -> RenderResult:
    """Validate the CSV against the kind's schema and write one image.

    Raises before touching the output file on any validation error, so a
    failed render never leaves a partial image behind.
    """
    schema, columns = _check(spec)
    out_dir = os.path.dirname(os.path.abspath(spec.out_path))
    os.makedirs(out_dir, exist_ok=True)
    return _RENDERERS[spec.kind](spec, columns)
