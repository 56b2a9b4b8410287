"""Named boundary/initial-data setups driven by the ``solve`` command.

Each scenario fixes the data on the unit square and, where the config
does not override it, a growth law.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..errors import UsageError
from ..fields import ConstField, RadialField
from ..growth import Family, GrowthSpec


def _harmonic(X, Y):
    return np.exp(math.pi * (X - 1.0)) * np.sin(math.pi * Y)


@dataclass(frozen=True)
class Scenario:
    name: str
    boundary: Callable
    initial: Optional[Callable] = None
    exact: Optional[Callable] = None
    default_spec: Optional[GrowthSpec] = None
    center: tuple = (0.5, 0.5)
    doc: str = ""


LINEAR = GrowthSpec(family=Family.G3, p=2.0, q=2.0, a_field=ConstField(0.0))
DOUBLE_PHASE = GrowthSpec(family=Family.G3, p=1.8, q=2.4, alpha=0.5,
                          a_field=RadialField(1.0, 0.5, (0.5, 0.5)))


def _heat_initial(X, Y):
    return np.sin(math.pi * X) * np.sin(math.pi * Y)


SCENARIOS = {
    "harmonic": Scenario(
        "harmonic", boundary=_harmonic, exact=_harmonic, default_spec=LINEAR,
        doc="g(v) = v with boundary data exp(pi (x-1)) sin(pi y); the exact solution is harmonic"),
    "constant": Scenario(
        "constant", boundary=lambda X, Y, t=None: 0.0 * X + 0.75,
        initial=lambda X, Y: 0.0 * X + 0.75, exact=lambda X, Y: 0.0 * X + 0.75,
        doc="constant data 0.75; the solution is constant"),
    "affine": Scenario(
        "affine", boundary=lambda X, Y: 2.0 * X + Y, exact=lambda X, Y: 2.0 * X + Y,
        doc="affine data 2x + y; exact for x-independent growth"),
    "double-phase": Scenario(
        "double-phase", boundary=lambda X, Y, t=None: X + X * Y,
        default_spec=DOUBLE_PHASE,
        doc="g3 with a(x) = |x - x0|^0.5, p = 1.8, q = 2.4"),
    "heat": Scenario(
        "heat", boundary=lambda X, Y, t=None: 0.0 * X, initial=_heat_initial,
        exact=lambda X, Y, t: math.exp(-2 * math.pi ** 2 * t) * _heat_initial(X, Y),
        default_spec=LINEAR,
        doc="linear heat flow from sin(pi x) sin(pi y) with zero boundary data"),
}


def get_scenario(name: str) -> Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        raise UsageError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}") from None


def parabolic_data(sc: Scenario):
    """``(initial, boundary(X, Y, t))`` for an evolution run of ``sc``.

    Scenarios whose stationary boundary data do not match an initial
    profile use zero boundary values with the scenario's initial data.
    """
    if sc.name == "constant":
        return sc.initial, lambda X, Y, t: 0.0 * X + 0.75
    if sc.name == "heat":
        return sc.initial, sc.boundary
    if sc.name == "double-phase":
        return _heat_initial, lambda X, Y, t: 0.0 * X
    raise UsageError(f"scenario {sc.name!r} has no evolution setup")
