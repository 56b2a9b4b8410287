"""Sectioned key-value run configuration.

Files are INI-style; every constant occupies one line so experiment
records diff cleanly.  Keys are validated against :data:`SCHEMA` and
unknown sections or keys are rejected.  :meth:`RunConfig.to_text`
re-serializes the typed values so that parsing the output reproduces the
configuration exactly.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from typing import Dict, Optional

from .conditions import SamplePlan
from .errors import UsageError
from .fields import Field, parse_field
from .growth import GrowthSpec, LambdaSpec
from .iteration import IterationParams
from .logradius import LogRadius, parse_radius, radius_to_str
from .solver.elliptic import SolveConfig


def _float(text):
    return float(text)


def _int(text):
    return int(text)


def _bool(text):
    s = str(text).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _vec(text):
    return tuple(float(s) for s in str(text).replace(",", " ").split())


def _ivec(text):
    return tuple(int(s) for s in str(text).replace(",", " ").split())


def _words(text):
    return tuple(s for s in str(text).replace(",", " ").split())


def _str(text):
    return str(text).strip()


_CONSTS = {f"c{i}": _float for i in range(1, 11)}

SCHEMA: Dict[str, Dict[str, object]] = {
    "growth": {
        "family": _str, "p": _float, "q": _float, "p1": _float, "q1": _float,
        "p_field": parse_field, "q_field": parse_field, "a_field": parse_field, "b_field": parse_field,
        "alpha": _float, "a0": _float, "b0coef": _float,
        "mu1": _float, "mu2": _float, "mu3": _float, "mu4": _float,
        "s0": _float, "b0": _float, "delta": _float, "M": _float, "R": _float, "K": _float,
        "n": _int, "x0": _vec, "t0": _float, "q_param": _float, "p_param": _float,
        **_CONSTS,
    },
    "lambda": {
        "family": _str, "L": _float, "c": _float, "beta": _float, "cbar": _float,
        "delta0": _float, "rho0": _float, "r_min": _float, "R": _float, "rho": parse_radius,
        "max_terms": _int, "n_grid": _int,
    },
    "iteration": {
        "kind": _str, "gamma": _float, "xi": _float, "a": _float, "alpha": _float,
        "nu": _float, "nu1": _float, "nu2": _float, "nubar": _float, "c0": _float,
        "delta_bar": _float, "gamma0": _float, "omega0": _float, "rho": parse_radius, "r": _float,
        "jmax": _int, "include_floor": _bool,
        "dg_c": _float, "dg_b": _float, "dg_delta": _float, "dg_y0": _float,
    },
    "solver": {
        "equation": _str, "scenario": _str, "grid": _int, "refinements": _ivec,
        "eps_reg": _float, "damping": _float, "tol": _float, "max_iter": _int,
        "dt": _float, "T": _float, "inner_tol": _float, "inner_max_iter": _int,
        "radii": _vec, "center": _vec, "store_every": _int, "rho": _float,
    },
    "output": {"directory": _str, "formats": _words, "stem": _str},
    "sampling": {
        "seed": _int, "v_min": _float, "v_max": _float, "n_v": _int, "ratio_max": _float,
        "n_points": _int, "radius": _float, "n_young": _int,
    },
}

SECTIONS = tuple(SCHEMA)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else str(value)
    if isinstance(value, LogRadius):
        return radius_to_str(value)
    if isinstance(value, Field):
        return value.to_str()
    if isinstance(value, tuple):
        return " ".join(_fmt(v) for v in value)
    return str(value)


@dataclass
class RunConfig:
    """Typed sections of a run configuration."""

    sections: Dict[str, Dict[str, object]] = field(default_factory=dict)
    source: Optional[str] = None

    @classmethod
    def from_text(cls, text: str, source: Optional[str] = None) -> "RunConfig":
        cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        cp.optionxform = str
        try:
            cp.read_string(text, source=source or "<config>")
        except configparser.Error as exc:
            raise UsageError(f"malformed config: {exc}") from exc
        out: Dict[str, Dict[str, object]] = {}
        for sec in cp.sections():
            if sec not in SCHEMA:
                raise UsageError(f"unknown config section [{sec}]")
            conv = SCHEMA[sec]
            vals = {}
            for key, raw in cp.items(sec):
                if key not in conv:
                    raise UsageError(f"unknown key {key!r} in [{sec}]")
                try:
                    vals[key] = conv[key](raw)
                except (ValueError, TypeError, UsageError) as exc:
                    raise UsageError(f"bad value for {sec}.{key}: {raw!r} ({exc})") from exc
            out[sec] = vals
        return cls(out, source)

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read config {path!r}: {exc}") from exc
        return cls.from_text(text, source=path)

    def to_text(self) -> str:
        lines = []
        for sec in SECTIONS:
            if sec not in self.sections:
                continue
            lines.append(f"[{sec}]")
            for key, val in self.sections[sec].items():
                lines.append(f"{key} = {_fmt(val)}")
            lines.append("")
        return "\n".join(lines)

    def echo(self) -> dict:
        """Plain-value copy for reports."""
        return {sec: {k: _fmt(v) for k, v in vals.items()} for sec, vals in self.sections.items()}

    def get(self, section: str, key: str, default=None):
        return self.sections.get(section, {}).get(key, default)

    def section(self, name: str) -> dict:
        return dict(self.sections.get(name, {}))

    def set(self, section: str, key: str, value) -> None:
        self.sections.setdefault(section, {})[key] = value

    def __eq__(self, other):
        if not isinstance(other, RunConfig):
            return NotImplemented
        return self.echo() == other.echo()

    # ------------------------------------------------------------ builders
    def growth_spec(self) -> GrowthSpec:
        g = self.section("growth")
        if not g:
            raise UsageError("config needs a [growth] section")
        g.pop("q_param", None)
        g.pop("p_param", None)
        consts = {k: g.pop(k) for k in list(g) if k in _CONSTS}
        if "x0" in g:
            g["x0"] = tuple(g["x0"])
        try:
            return GrowthSpec(constants=consts, **g)
        except TypeError as exc:
            raise UsageError(str(exc)) from exc

    def lambda_spec(self) -> LambdaSpec:
        lam = self.section("lambda")
        return LambdaSpec(lam.get("family", "constant"), lam.get("L", 0.0))

    def sample_plan(self, seed: Optional[int] = None) -> SamplePlan:
        s = self.section("sampling")
        if seed is not None:
            s["seed"] = seed
        return SamplePlan(**s)

    def solve_config(self) -> SolveConfig:
        s = self.section("solver")
        keys = ("eps_reg", "damping", "tol", "max_iter", "dt", "inner_tol", "inner_max_iter")
        return SolveConfig(**{k: s[k] for k in keys if k in s})

    def iteration_params(self) -> IterationParams:
        """Iteration constants gathered from [growth], [lambda] and [iteration].

        Later sections override earlier ones; ``c4``, ``c5`` and ``c10``
        come from the growth constants.
        """
        kw = {}
        g = self.section("growth")
        for key in ("n", "M", "s0", "b0", "delta", "mu1", "mu2", "mu3", "R"):
            if key in g:
                kw[key] = g[key]
        for key in ("c4", "c5", "c10"):
            if key in g:
                kw[key] = g[key]
        lam = self.section("lambda")
        for key in ("c", "beta", "cbar", "delta0"):
            if key in lam:
                kw[key] = lam[key]
        it = self.section("iteration")
        for key in ("gamma", "xi", "a", "alpha", "nu", "nu1", "nu2", "nubar", "c0", "delta_bar", "gamma0"):
            if key in it:
                kw[key] = it[key]
        return IterationParams(**kw)
