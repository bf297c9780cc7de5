"""Structured-text experiment configs and the builders behind the CLI.

Format: ``[section]`` headers with flat ``key = value`` lines, ``#``
comments, blank lines ignored.  Matrices use the dense row-major text
convention (first number is the dimension, then dim^2 entries) either
inline or via ``<key>_file`` paths relative to the config.  See README for
the full key reference.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import forms as F
from . import evolve as E
from .expressions import parse_expression
from .quasilinear import QuasilinearProblem, make_quasilinear_problem
from .triple import ValidationError, new_triple


class ConfigError(ValidationError):
    """Malformed config file; the message carries the line number."""


# -- matrix text format -------------------------------------------------------------


def parse_matrix_text(text: str) -> np.ndarray:
    """Dense row-major format: dim followed by dim^2 decimal numbers."""
    parts = text.replace(";", " ").split()
    if not parts:
        raise ConfigError("empty matrix literal")
    try:
        dim = int(float(parts[0]))
        values = [float(p) for p in parts[1:]]
    except ValueError as exc:
        raise ConfigError(f"bad matrix literal: {exc}") from None
    if dim <= 0 or len(values) != dim * dim:
        raise ConfigError(
            f"matrix literal declares dim {dim} but carries "
            f"{len(values)} entries (need {dim * dim})"
        )
    return np.array(values).reshape(dim, dim)


def format_matrix_text(mat: np.ndarray) -> str:
    mat = np.asarray(mat, dtype=float)
    rows = [" ".join(f"{v:.17g}" for v in row) for row in mat]
    return f"{mat.shape[0]}\n" + "\n".join(rows) + "\n"


def read_matrix(path: str) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_matrix_text(fh.read())


def write_matrix(path: str, mat) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_matrix_text(np.asarray(mat, dtype=float)))


# -- raw section parsing ------------------------------------------------------------


def parse_config_text(text: str, source: str = "<config>") -> dict:
    sections: dict[str, dict[str, str]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip().lower()
            if not name:
                raise ConfigError(f"{source}:{lineno}: empty section name")
            current = sections.setdefault(name, {})
            continue
        if "=" not in line:
            raise ConfigError(
                f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}"
            )
        if current is None:
            raise ConfigError(
                f"{source}:{lineno}: key outside of any [section]"
            )
        key, value = line.split("=", 1)
        current[key.strip().lower()] = value.strip()
    return sections


@dataclass
class ExperimentConfig:
    sections: dict
    base_dir: str = "."
    path: str = "<config>"

    def section(self, name: str, required: bool = False) -> dict:
        sec = self.sections.get(name, {})
        if required and not sec:
            raise ConfigError(f"{self.path}: missing required section [{name}]")
        return sec

    def get(self, section: str, key: str, default=None, required: bool = False):
        sec = self.section(section)
        if key in sec:
            return sec[key]
        if required:
            raise ConfigError(f"{self.path}: missing key {key!r} in [{section}]")
        return default

    def get_float(self, section, key, default=None, required=False):
        raw = self.get(section, key, required=required)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(
                f"{self.path}: [{section}] {key} = {raw!r} is not a number"
            ) from None

    def get_int(self, section, key, default=None, required=False):
        val = self.get_float(section, key, required=required)
        return default if val is None else int(round(val))

    def get_floats(self, section, key, default=None):
        raw = self.get(section, key)
        if raw is None:
            return default
        try:
            return [float(p) for p in raw.replace(",", " ").split()]
        except ValueError:
            raise ConfigError(
                f"{self.path}: [{section}] {key} = {raw!r} is not a number list"
            ) from None

    def get_matrix(self, section, key):
        """Inline matrix under ``key`` or a file path under ``key_file``."""
        inline = self.get(section, key)
        if inline is not None:
            return parse_matrix_text(inline)
        path = self.get(section, key + "_file")
        if path is not None:
            full = os.path.join(self.base_dir, path)
            if not os.path.exists(full):
                raise ConfigError(f"{self.path}: referenced file {full} not found")
            return read_matrix(full)
        return None

    # -- builders -------------------------------------------------------------------

    @property
    def seed(self) -> int:
        return self.get_int("run", "seed", default=0)

    def build_form(self):
        kind = (self.get("form", "kind", required=True) or "").lower()
        T = self.get_float("form", "t", default=1.0)
        if kind == "robin1d":
            return self._robin_form(self.section("form"), T)
        if kind == "schrodinger1d":
            return self._schrodinger_form(T)
        if kind == "scalar":
            return self._scalar_form(self.section("form"), T)
        if kind == "constant":
            return self._constant_form(T)
        if kind == "piecewise":
            return self._piecewise_form(T)
        raise ConfigError(
            f"{self.path}: unknown form.kind {kind!r} (expected robin1d, "
            "schrodinger1d, constant, scalar or piecewise)"
        )

    def _beta_from(self, sec: dict, key_prefix: str = "beta"):
        """Robin coefficient: one expression, per-endpoint ones, or a table."""
        table = sec.get(key_prefix + "_table")
        if table is not None:
            pairs = []
            for chunk in table.split(","):
                if ":" not in chunk:
                    raise ConfigError(
                        f"{self.path}: bad table entry {chunk!r} "
                        "(expected 't:value')"
                    )
                a, b = chunk.split(":", 1)
                pairs.append((float(a), float(b)))
            pairs.sort()
            ts = np.array([p[0] for p in pairs])
            vs = np.array([p[1] for p in pairs])
            lip = float(np.max(np.abs(np.diff(vs) / np.diff(ts)))) if len(ts) > 1 else 0.0

            def beta(t, e):
                return float(np.interp(t, ts, vs))

            return beta, lip
        expr0 = sec.get(key_prefix + "0", sec.get(key_prefix))
        expr1 = sec.get(key_prefix + "1", sec.get(key_prefix))
        if expr0 is None or expr1 is None:
            raise ConfigError(
                f"{self.path}: robin form needs {key_prefix} (or "
                f"{key_prefix}0/{key_prefix}1 or {key_prefix}_table)"
            )
        e0 = parse_expression(expr0)
        e1 = parse_expression(expr1)
        lip = self.get_float("form", key_prefix + "_lipschitz", default=None)
        if lip is None:
            lip = _sampled_lipschitz((e0, e1), self.get_float("form", "t", default=1.0))

        def beta(t, e):
            return e0(t=t) if e == 0 else e1(t=t)

        return beta, lip

    def _robin_form(self, sec: dict, T: float, interval=None):
        n = int(float(sec.get("n_elements", "16")))
        beta, lip = self._beta_from(sec)
        form = F.robin_form_1d(n, beta, lip, T)
        if interval is not None:
            from dataclasses import replace
            form = replace(form, interval=interval)
        return form

    def _schrodinger_form(self, T: float):
        sec = self.section("form")
        n = int(float(sec.get("n_nodes", "33")))
        L = float(sec.get("l", sec.get("half_width", "1.0")))
        grid = np.linspace(-L, L, n)
        m0_expr = parse_expression(sec.get("m0", "1"))
        m0 = np.array([max(m0_expr(x=x), 0.0) for x in grid])
        m_expr = parse_expression(sec.get("m", "1"))
        alpha1 = float(sec.get("alpha1", "1"))
        alpha2 = float(sec.get("alpha2", "1"))
        lip = float(sec.get("m_lipschitz", "0"))
        return F.schrodinger_form_1d(
            grid, m0, lambda t, x: m_expr(t=t, x=x), alpha1, alpha2, lip, T,
        )

    def _scalar_form(self, sec: dict, T: float, interval=None):
        expr = parse_expression(sec.get("g", "1"))
        g_min = sec.get("g_min")
        g_max = sec.get("g_max")
        lip = float(sec.get("g_lipschitz", "0"))
        form = F.scalar_form(
            lambda t: expr(t=t), T,
            g_min=None if g_min is None else float(g_min),
            g_max=None if g_max is None else float(g_max),
            g_lipschitz=lip,
        )
        if interval is not None:
            from dataclasses import replace
            form = replace(form, interval=interval)
            F.validate_decomposition(form)
        return form

    def _constant_form(self, T: float):
        a1 = self.get_matrix("form", "a1")
        if a1 is None:
            raise ConfigError(f"{self.path}: constant form needs a1 or a1_file")
        gram_h = self.get_matrix("form", "gram_h")
        gram_v = self.get_matrix("form", "gram_v")
        if gram_h is None:
            gram_h = np.eye(a1.shape[0])
        if gram_v is None:
            gram_v = np.eye(a1.shape[0])
        a2 = self.get_matrix("form", "a2")
        triple = new_triple(gram_h, gram_v)
        return F.constant_form(triple, a1, T=T, A2_matrix=a2)

    def _piecewise_form(self, T: float):
        sec = self.section("form")
        breakpoints = self.get_floats("form", "breakpoints")
        if not breakpoints or len(breakpoints) < 2:
            raise ConfigError(f"{self.path}: piecewise form needs breakpoints")
        base = sec.get("base_kind", "scalar").lower()
        values = [v.strip() for v in (sec.get("values") or "").split("|")]
        if len(values) != len(breakpoints) - 1:
            raise ConfigError(
                f"{self.path}: {len(breakpoints) - 1} pieces but "
                f"{len(values)} '|'-separated values entries"
            )
        pieces = []
        for i, val in enumerate(values):
            lo, hi = breakpoints[i], breakpoints[i + 1]
            piece_sec = dict(sec)
            if base == "scalar":
                piece_sec["g"] = val
                pieces.append(self._scalar_form(piece_sec, T, interval=(lo, hi)))
            elif base == "robin1d":
                piece_sec["beta"] = val
                piece_sec.pop("beta0", None)
                piece_sec.pop("beta1", None)
                from dataclasses import replace
                form = self._robin_form(piece_sec, T)
                form = replace(form, interval=(lo, hi))
                F.validate_decomposition(form)
                pieces.append(form)
            else:
                raise ConfigError(
                    f"{self.path}: piecewise base_kind {base!r} not supported"
                )
        return F.PiecewiseForm(breakpoints=np.asarray(breakpoints), pieces=tuple(pieces))

    def node_coordinates(self, form) -> np.ndarray:
        kind = (self.get("form", "kind") or "").lower()
        dim = form.triple.dim
        if kind in ("robin1d",) or (kind == "piecewise"
                                    and (self.get("form", "base_kind") or "scalar") == "robin1d"):
            return np.linspace(0.0, 1.0, dim)
        if kind == "schrodinger1d":
            L = self.get_float("form", "l", default=self.get_float("form", "half_width", default=1.0))
            return np.linspace(-L, L, dim)
        return np.zeros(dim)

    def build_perturbation(self, form) -> E.Perturbation:
        kind = (self.get("perturbation", "kind", default="identity") or "").lower()
        dim = form.triple.dim
        if kind == "identity":
            return E.identity_perturbation(dim)
        if kind in ("constant", "constant-matrix"):
            mat = self.get_matrix("perturbation", "matrix")
            if mat is None:
                raise ConfigError(
                    f"{self.path}: constant perturbation needs matrix/matrix_file"
                )
            return E.constant_perturbation(mat, form.triple)
        if kind == "expression":
            expr = parse_expression(
                self.get("perturbation", "b", required=True)
            )
            coords = self.node_coordinates(form)
            samples = [expr(t=t, x=x)
                       for t in np.linspace(0, self.get_float("form", "t", default=1.0), 17)
                       for x in coords]
            lo, hi = min(samples), max(samples)
            if lo <= 0:
                raise ConfigError(
                    f"{self.path}: perturbation expression dips to {lo} <= 0"
                )

            def B(t):
                return np.diag([expr(t=t, x=x) for x in coords])

            return E.Perturbation(B=B, beta0=float(lo), beta1=float(hi))
        raise ConfigError(f"{self.path}: unknown perturbation.kind {kind!r}")

    def build_source(self, form):
        raw = self.get("source", "f", default="0")
        dim = form.triple.dim
        table = self.get("source", "f_table")
        if table is not None:
            pairs = sorted(
                (float(a), float(b))
                for a, b in (chunk.split(":", 1) for chunk in table.split(","))
            )
            ts = np.array([p[0] for p in pairs])
            vs = np.array([p[1] for p in pairs])
            return lambda t: np.full(dim, np.interp(t, ts, vs))
        expr = parse_expression(raw)
        coords = self.node_coordinates(form)
        if "x" in expr.variables:
            return lambda t: np.array([expr(t=t, x=x) for x in coords])
        return lambda t: np.full(dim, expr(t=t))

    def build_initial(self, form) -> np.ndarray:
        raw = self.get("initial", "u0", default="0")
        dim = form.triple.dim
        parts = raw.split()
        if len(parts) > 1 and all(_is_number(p) for p in parts):
            vec = np.array([float(p) for p in parts])
            if vec.shape != (dim,):
                raise ConfigError(
                    f"{self.path}: u0 has {len(vec)} entries, expected {dim}"
                )
            return vec
        expr = parse_expression(raw)
        coords = self.node_coordinates(form)
        return np.array([expr(x=x) for x in coords])

    def build_problem(self) -> E.EvolutionProblem:
        form = self.build_form()
        return E.make_problem(
            form,
            self.build_initial(form),
            f=self.build_source(form),
            B=self.build_perturbation(form),
        )

    def build_quasilinear(self) -> QuasilinearProblem:
        form = self.build_form()
        if isinstance(form, F.PiecewiseForm):
            raise ConfigError(
                f"{self.path}: the quasilinear solver needs a single form"
            )
        sec = self.section("quasilinear", required=True)
        m_expr = parse_expression(sec.get("m", "1"))
        delta_m = float(sec.get("delta_m", "0.1"))
        return make_quasilinear_problem(
            form, lambda t, xi: m_expr(t=t, xi=xi), delta_m,
            f=self.build_source(form), u0=self.build_initial(form),
        )


def _is_number(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def _sampled_lipschitz(exprs, T: float, n: int = 257) -> float:
    ts = np.linspace(0.0, T, n)
    worst = 0.0
    for e in exprs:
        vals = np.array([e(t=t) for t in ts])
        worst = max(worst, float(np.max(np.abs(np.diff(vals) / np.diff(ts)))))
    return worst * 1.05 + 1e-12  # sampling headroom


def load_config(path: str) -> ExperimentConfig:
    if not os.path.exists(path):
        raise ConfigError(f"config file {path} not found")
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return ExperimentConfig(
        sections=parse_config_text(text, source=path),
        base_dir=os.path.dirname(os.path.abspath(path)),
        path=path,
    )
