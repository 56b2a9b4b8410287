"""Scalar coefficient and exponent fields ``f(x, t)``.

Fields are small immutable objects so that they can be written to and
read back from config files.  ``x`` is an array whose last axis holds the
coordinates; the result has shape ``x.shape[:-1]``.

Text syntax (used by the config reader)::

    const(2.0)
    radial(coef=1.0, power=0.5, center=0.5 0.5)
    affine(c0=2.0, coef=0.1 0.0)
    logmod(base=2.0, amp=0.1, center=0.5 0.5)
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import UsageError


def _coords(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    return x


def _vec(text: str) -> tuple:
    return tuple(float(s) for s in text.replace(",", " ").split())


def _fmt_vec(v) -> str:
    return " ".join(repr(float(c)) for c in v)


class Field:
    """Base class; subclasses implement ``__call__`` and ``to_str``."""

    def __call__(self, x, t=None):  # pragma: no cover - interface
        raise NotImplementedError

    def to_str(self) -> str:  # pragma: no cover - interface
        raise NotImplementedError

    @property
    def is_constant(self) -> bool:
        return False


@dataclass(frozen=True)
class ConstField(Field):
    value: float

    def __call__(self, x, t=None):
        x = _coords(x)
        return np.full(x.shape[:-1], float(self.value)) if x.ndim > 1 else float(self.value)

    def to_str(self):
        return f"const({float(self.value)!r})"

    @property
    def is_constant(self):
        return True


@dataclass(frozen=True)
class RadialField(Field):
    """``coef * |x - center| ** power`` (plus an optional offset)."""

    coef: float
    power: float
    center: tuple = (0.5, 0.5)
    offset: float = 0.0

    def __call__(self, x, t=None):
        x = _coords(x)
        c = np.asarray(self.center, dtype=float)
        d = np.sqrt(np.sum((x - c[: x.shape[-1]]) ** 2, axis=-1))
        out = self.offset + self.coef * d ** self.power
        return float(out) if np.ndim(out) == 0 else out

    def to_str(self):
        return (f"radial(coef={float(self.coef)!r}, power={float(self.power)!r}, "
                f"center={_fmt_vec(self.center)}, offset={float(self.offset)!r})")


@dataclass(frozen=True)
class AffineField(Field):
    """``c0 + coef . x``."""

    c0: float
    coef: tuple = (0.0, 0.0)

    def __call__(self, x, t=None):
        x = _coords(x)
        c = np.asarray(self.coef, dtype=float)
        out = self.c0 + x[..., : c.size] @ c[: x.shape[-1]]
        return float(out) if np.ndim(out) == 0 else out

    def to_str(self):
        return f"affine(c0={float(self.c0)!r}, coef={_fmt_vec(self.coef)})"


@dataclass(frozen=True)
class LogModField(Field):
    """``base + amp / ln(e + 1/|x - center|)``: a log-type oscillation."""

    base: float
    amp: float
    center: tuple = (0.5, 0.5)

    def __call__(self, x, t=None):
        x = _coords(x)
        c = np.asarray(self.center, dtype=float)
        d = np.sqrt(np.sum((x - c[: x.shape[-1]]) ** 2, axis=-1))
        with np.errstate(divide="ignore"):
            out = self.base + self.amp / np.log(np.e + 1.0 / d)
        return float(out) if np.ndim(out) == 0 else out

    def to_str(self):
        return (f"logmod(base={float(self.base)!r}, amp={float(self.amp)!r}, "
                f"center={_fmt_vec(self.center)})")


_CALL_RE = re.compile(r"^\s*([a-z_]+)\s*\((.*)\)\s*$")


def parse_field(text) -> Field:
    """Parse the field syntax described in the module docstring."""
    if isinstance(text, Field):
        return text
    if isinstance(text, (int, float)):
        return ConstField(float(text))
    s = str(text).strip()
    try:
        return ConstField(float(s))
    except ValueError:
        pass
    m = _CALL_RE.match(s)
    if not m:
        raise UsageError(f"cannot parse field {text!r}")
    name, body = m.group(1), m.group(2)
    pos, kw = [], {}
    for part in re.split(r",\s*(?=[a-z_]+\s*=)|^(?=[a-z_]+\s*=)", body):
        part = part.strip().rstrip(",").strip()
        if not part:
            continue
        if "=" in part:
            k, v = part.split("=", 1)
            kw[k.strip()] = v.strip()
        else:
            pos.append(part)
    try:
        if name == "const":
            return ConstField(float(pos[0] if pos else kw["value"]))
        if name == "radial":
            return RadialField(float(kw["coef"]), float(kw["power"]),
                               _vec(kw.get("center", "0.5 0.5")), float(kw.get("offset", 0.0)))
        if name == "affine":
            return AffineField(float(kw["c0"]), _vec(kw.get("coef", "0 0")))
        if name == "logmod":
            return LogModField(float(kw["base"]), float(kw["amp"]),
                               _vec(kw.get("center", "0.5 0.5")))
    except (KeyError, IndexError, ValueError) as exc:
        raise UsageError(f"bad arguments in field {text!r}") from exc
    raise UsageError(f"unknown field kind {name!r}")
