"""The ground state Q, its standing waves, and the Gagliardo-Nirenberg ratio.

Q is the positive even solution of ``-Q'' + Q - (3/16) Q^5 = 0``; it has the
closed form ``Q(x) = 2 sech(2x)^{1/2}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridError, UndefinedFunctionalError
from .gauge import gauge_transform
from .grid import ComplexField, GridSpec, derivative, quadrature, second_derivative

# Closed-form integrals of Q, used as reference values.
MASS_Q = 2.0 * np.pi
GRAD_SQ_Q = np.pi
L4_Q = 16.0
L6_Q = 16.0 * np.pi
GN_CONSTANT = 4.0 / np.pi**2
MIN_HALF_WIDTH = 15.0


def q_profile(x, shift: float = 0.0) -> np.ndarray:
    y = 2.0 * (np.asarray(x, dtype=np.float64) - shift)
    # sech(y)^{1/2} written with exp(-|y|) so it never overflows.
    e = np.exp(-np.abs(y))
    return 2.0 * np.sqrt(2.0 * e / (1.0 + e * e))


def q_profile_derivative(x, shift: float = 0.0) -> np.ndarray:
    y = 2.0 * (np.asarray(x, dtype=np.float64) - shift)
    return -q_profile(x, shift) * np.tanh(y)


@dataclass(frozen=True)
class GroundState:
    grid: GridSpec
    q: ComplexField
    analytic: bool = True

    @property
    def values(self) -> np.ndarray:
        return self.q.values.real

    def qx(self) -> ComplexField:
        return self.q.with_values(q_profile_derivative(self.grid.x))


def _check_line(grid: GridSpec) -> None:
    if not grid.periodic:
        raise GridError("the ground state lives on the whole line; Q(0) = 2 does not vanish at x = 0")
    if grid.half_width < MIN_HALF_WIDTH:
        raise GridError(f"ground state needs L >= {MIN_HALF_WIDTH}, got {grid.half_width}")


def ground_state(grid: GridSpec) -> GroundState:
    _check_line(grid)
    return GroundState(grid, ComplexField(grid, q_profile(grid.x)), analytic=True)


def elliptic_residual(gs: GroundState, interior: float = 0.9) -> float:
    """Max-norm of ``-q'' + q - (3/16) q^5`` over ``|x| <= interior * L``."""
    q = gs.q
    res = -second_derivative(q).values + q.values - (3.0 / 16.0) * q.values**5
    inside = np.abs(gs.grid.x) <= interior * gs.grid.half_width
    return float(np.max(np.abs(res[inside])))


def standing_wave(t: float, grid: GridSpec, frame: str = "v") -> ComplexField:
    """``e^{it} Q`` (v-frame) or its u-frame image ``R(t) = G_{3/4}(e^{it} Q)``."""
    gs = ground_state(grid)
    v = gs.q * np.exp(1j * t)
    if frame == "v":
        return v
    if frame == "u":
        return gauge_transform(0.75, v)
    raise ValueError(f"frame must be 'u' or 'v', got {frame!r}")


def gn_functional(f: ComplexField) -> float:
    """``||f||_6^6 / (||f||_2^4 ||f_x||_2^2)``, bounded above by 4/pi^2."""
    rho = f.abs2()
    mass = float(quadrature(rho, f.grid))
    grad = float(quadrature(derivative(f).abs2(), f.grid))
    if mass == 0.0 or grad == 0.0:
        raise UndefinedFunctionalError("undefined functional: zero field or zero gradient")
    l6 = float(quadrature(rho**3, f.grid))
    return l6 / (mass**2 * grad)


def energy_directional_derivative(f: ComplexField) -> float:
    """d/ds E((1+s) f) at s = 0, i.e. ``2||f_x||^2 - (6/16)||f||_6^6``.

    Equals -4 pi at f = Q.
    """
    grad = float(quadrature(derivative(f).abs2(), f.grid))
    l6 = float(quadrature(f.abs2() ** 3, f.grid))
    return 2.0 * grad - 0.375 * l6
