"""Initial data: named fixtures and JSON descriptors.

All profiles are v-frame states, i.e. what the solvers evolve. A descriptor is
a mapping with a ``kind`` key, for example::

    {"kind": "gaussian", "amplitude": 2.5, "width": 1.0, "wavenumber": 0.0}
    {"kind": "halfline_fixture", "energy": -1.0}
    {"kind": "random", "seed": 3, "count": 3}
"""

from __future__ import annotations

from typing import Any, Mapping

import numpy as np
from scipy.optimize import brentq

from .diagnostics import energy_E, mass
from .errors import ConstructionError, GridError
from .grid import ComplexField, GridSpec
from .ground_state import MASS_Q, ground_state, q_profile

HALFLINE_WAVENUMBER = -3.0
AMPLITUDE_BRACKET = (8.0, 12.0)


def gaussian(grid: GridSpec, amplitude=1.0, width=1.0, center=0.0, wavenumber=0.0) -> ComplexField:
    x = grid.x
    return ComplexField(grid, amplitude * np.exp(-(((x - center) / width) ** 2) + 1j * wavenumber * x))


def bump(grid: GridSpec, amplitude=1.0, center=0.0, width=1.0) -> ComplexField:
    """Smooth compactly supported bump ``exp(-1 / (1 - r^2))`` with ``r = (x - center) / width``."""
    r = (grid.x - center) / width
    values = np.zeros(grid.n_points)
    inside = np.abs(r) < 1.0
    values[inside] = amplitude * np.exp(-1.0 / (1.0 - r[inside] ** 2))
    return ComplexField(grid, values)


def halfline_profile(grid: GridSpec, amplitude: float, wavenumber: float = HALFLINE_WAVENUMBER) -> ComplexField:
    """``A x exp(-x^2 + i k x)``: vanishes at the wall, odd-order contact."""
    if grid.periodic:
        raise GridError("halfline_profile needs a DirichletHalfLine grid")
    x = grid.x
    return ComplexField(grid, amplitude * x * np.exp(-(x**2) + 1j * wavenumber * x))


def halfline_fixture(
    grid: GridSpec, energy: float = -1.0, wavenumber: float = HALFLINE_WAVENUMBER
) -> ComplexField:
    """Half-line profile with amplitude tuned so that ``E(v0) = energy``.

    The inward wavenumber keeps the linear coefficient of the certificate
    small, so the guaranteed blow-up time is short.
    """

    def excess(a):
        return energy_E(halfline_profile(grid, a, wavenumber)) - energy

    lo, hi = AMPLITUDE_BRACKET
    try:
        amp = brentq(excess, lo, hi, xtol=1e-14)
    except ValueError as exc:
        raise ConstructionError(
            f"no amplitude in [{lo}, {hi}] gives E = {energy} at wavenumber {wavenumber}"
        ) from exc
    return halfline_profile(grid, amp, wavenumber)


def random_field(grid: GridSpec, seed: int, count: int = 3, scale: float = 0.8) -> ComplexField:
    """Seeded sum of modulated Gaussians kept well inside the domain."""
    rng = np.random.default_rng(seed)
    x = grid.x
    reach = 0.25 * grid.half_width
    out = np.zeros(grid.n_points, dtype=np.complex128)
    for _ in range(count):
        amp = scale * (rng.normal() + 1j * rng.normal())
        if grid.periodic:
            center = rng.uniform(-reach, reach)
            out += amp * np.exp(-(((x - center) / rng.uniform(0.6, 2.0)) ** 2) + 1j * rng.uniform(-1.5, 1.5) * x)
        else:
            center = rng.uniform(0.5, 2.0 * reach)
            width = rng.uniform(0.6, 2.0)
            out += amp * x * np.exp(-(((x - center) / width) ** 2) + 1j * rng.uniform(-1.5, 1.5) * x)
    return ComplexField(grid, out)


def threshold_data(
    grid: GridSpec,
    delta: float,
    bump_amplitude: float = 0.05,
    bump_center: float = 0.5,
    bump_width: float = 2.0,
    max_halvings: int = 40,
) -> ComplexField:
    """``c (Q + a * bump)`` with mass ``2 pi + delta`` and negative energy.

    ``delta = 0`` gives Q itself. For each trial ``a`` the scale ``c`` is fixed
    by the mass; if the energy is not negative, ``a`` is halved.
    """
    if delta < 0.0:
        raise ConstructionError("mass excess delta must be nonnegative")
    q = ground_state(grid).q
    if delta == 0.0:
        return q
    target = MASS_Q + delta
    a = bump_amplitude
    for _ in range(max_halvings + 1):
        shape = q + bump(grid, a, bump_center, bump_width)
        v0 = shape * np.sqrt(target / mass(shape))
        if energy_E(v0) < 0.0:
            return v0
        a *= 0.5
    raise ConstructionError(f"construction failed: no bump amplitude gives E(v0) < 0 at delta = {delta:.6g}")


def from_descriptor(grid: GridSpec, spec: Mapping[str, Any]) -> ComplexField:
    kind = str(spec.get("kind", "")).lower()
    params = {k: v for k, v in spec.items() if k != "kind"}
    try:
        if kind == "ground_state":
            phase = float(params.get("phase", 0.0))
            shift = float(params.get("shift", 0.0))
            scale = float(params.get("scale", 1.0))
            if not grid.periodic:
                raise GridError("the ground state lives on the whole line")
            return ComplexField(grid, scale * np.exp(1j * phase) * q_profile(grid.x, shift))
        if kind == "gaussian":
            return gaussian(grid, **params)
        if kind == "bump":
            return bump(grid, **params)
        if kind == "halfline_profile":
            return halfline_profile(grid, **params)
        if kind == "halfline_fixture":
            return halfline_fixture(grid, **params)
        if kind == "threshold":
            return threshold_data(grid, **params)
        if kind == "random":
            return random_field(grid, **params)
        if kind == "zero":
            return ComplexField.zeros(grid)
    except TypeError as exc:
        raise ValueError(f"bad parameters for initial condition {kind!r}: {exc}") from None
    raise ValueError(f"unknown initial condition kind {spec.get('kind')!r}")


def describe(f: ComplexField) -> dict[str, float]:
    return {"mass": mass(f), "energy_E": energy_E(f), "max_abs": float(np.max(np.abs(f.values)))}
