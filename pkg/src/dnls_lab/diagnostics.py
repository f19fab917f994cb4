"""Conserved quantities, weighted virial functionals and the half-line blow-up certificate.

Frames: ``u`` solves the original derivative equation, ``v = G_{-3/4} u`` the
gauge-reduced one. ``E(v) = ||v_x||^2 - ||v||_6^6 / 16`` and
``P(v) = Im \\int conj(v) v_x + ||v||_4^4 / 4`` are the v-frame energy and
momentum; they coincide with the u-frame ``E_D(u)`` and ``P_D(u)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, fields
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import CertificateError, GridError
from .gauge import energy_ed_via_gauge, gauge_transform, momentum_pd_direct
from .grid import ComplexField, GridSpec, derivative, quadrature

V_FRAME = -0.75


def mass(f: ComplexField) -> float:
    return float(quadrature(f.abs2(), f.grid))


def grad_norm(f: ComplexField) -> float:
    return math.sqrt(float(quadrature(derivative(f).abs2(), f.grid)))


def energy_E(v: ComplexField) -> float:
    vx = derivative(v)
    return float(quadrature(vx.abs2() - v.abs2() ** 3 / 16.0, v.grid))


def momentum_P(v: ComplexField) -> float:
    vx = derivative(v).values
    integrand = np.imag(np.conj(v.values) * vx) + 0.25 * v.abs2() ** 2
    return float(quadrature(integrand, v.grid))


def momentum_nls(u: ComplexField) -> float:
    """``Im \\int conj(u) u_x``, the momentum conserved by the quintic NLS."""
    ux = derivative(u).values
    return float(quadrature(np.imag(np.conj(u.values) * ux), u.grid))


@dataclass(frozen=True, eq=False)
class GaugeFrames:
    """A u-frame field together with its v-frame image, mapped once on demand."""

    u: ComplexField

    @cached_property
    def v(self) -> ComplexField:
        return gauge_transform(V_FRAME, self.u)


def _frames(u) -> GaugeFrames:
    return u if isinstance(u, GaugeFrames) else GaugeFrames(u)


def energy_ED(u) -> float:
    """u-frame energy, computed as ``E(G_{-3/4} u)``."""
    return energy_E(_frames(u).v)


def momentum_PD(u) -> float:
    """u-frame momentum, computed as ``P(G_{-3/4} u)``."""
    return momentum_P(_frames(u).v)


# --- virial functionals -----------------------------------------------------


class WeightKind(str, enum.Enum):
    ONE = "One"
    X = "X"
    X_SQUARED = "XSquared"
    CUSTOM = "Custom"


@dataclass(frozen=True, eq=False)
class VirialWeight:
    """Real weight psi with analytic psi' and psi''' sampled on a grid."""

    kind: WeightKind
    psi: np.ndarray
    dpsi: np.ndarray
    d3psi: np.ndarray

    @classmethod
    def one(cls, grid: GridSpec) -> "VirialWeight":
        ones = np.ones(grid.n_points)
        zeros = np.zeros(grid.n_points)
        return cls(WeightKind.ONE, ones, zeros, zeros)

    @classmethod
    def x(cls, grid: GridSpec) -> "VirialWeight":
        zeros = np.zeros(grid.n_points)
        return cls(WeightKind.X, grid.x.copy(), np.ones(grid.n_points), zeros)

    @classmethod
    def x_squared(cls, grid: GridSpec) -> "VirialWeight":
        x = grid.x
        return cls(WeightKind.X_SQUARED, x**2, 2.0 * x, np.zeros(grid.n_points))

    @classmethod
    def custom(
        cls,
        grid: GridSpec,
        psi: Callable[[np.ndarray], np.ndarray],
        dpsi: Callable[[np.ndarray], np.ndarray] | None,
        d3psi: Callable[[np.ndarray], np.ndarray] | None,
    ) -> "VirialWeight":
        # psi''' from differenced samples is too noisy for the J' identity.
        if dpsi is None or d3psi is None:
            raise ValueError("custom weights must supply analytic psi' and psi'''")
        x = grid.x
        arrays = [np.broadcast_to(np.asarray(f(x), dtype=np.float64), x.shape).copy() for f in (psi, dpsi, d3psi)]
        for arr in arrays:
            if not np.all(np.isfinite(arr)):
                raise ValueError("weight samples must be finite")
        return cls(WeightKind.CUSTOM, *arrays)


def virial_I(v: ComplexField, w: VirialWeight) -> float:
    return float(quadrature(w.psi * v.abs2(), v.grid))


def virial_J(v: ComplexField, w: VirialWeight) -> float:
    vx = derivative(v).values
    integrand = 2.0 * w.psi * np.imag(np.conj(v.values) * vx) + 0.5 * w.psi * v.abs2() ** 2
    return float(quadrature(integrand, v.grid))


def virial_I_rate(v: ComplexField, w: VirialWeight) -> float:
    """``I'(t) = 2 Im \\int psi' conj(v) v_x``."""
    vx = derivative(v).values
    return float(quadrature(2.0 * w.dpsi * np.imag(np.conj(v.values) * vx), v.grid))


def virial_J_rate(v: ComplexField, w: VirialWeight) -> float:
    """``J'(t) = 4 \\int psi' (|v_x|^2 - |v|^6/16) - \\int psi''' |v|^2``."""
    vx = derivative(v)
    rho = v.abs2()
    integrand = 4.0 * w.dpsi * (vx.abs2() - rho**3 / 16.0) - w.d3psi * rho
    return float(quadrature(integrand, v.grid))


def surplus_term(v: ComplexField) -> float:
    """``\\int x |v|^4``, the term that separates the derivative equation from quintic NLS."""
    return float(quadrature(v.grid.x * v.abs2() ** 2, v.grid))


def boundary_leak(v: ComplexField, fraction: float = 0.9) -> float:
    """Max ``|v|`` in the outer strip of the domain (``|x| >= fraction * L``)."""
    x = np.abs(v.grid.x)
    strip = x >= fraction * v.grid.half_width
    return float(np.max(np.abs(v.values[strip]))) if strip.any() else 0.0


# --- per-frame record -------------------------------------------------------

CSV_COLUMNS = (
    "t",
    "mass",
    "energy_E",
    "energy_ED",
    "momentum_P",
    "momentum_PD",
    "virial_I",
    "virial_J",
    "grad_norm",
    "dt_used",
)


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One time slice. ``virial_I`` uses psi = x^2 and ``virial_J`` uses psi = x."""

    t: float
    mass: float
    energy_E: float
    energy_ED: float
    momentum_P: float
    momentum_PD: float
    virial_I: float
    virial_J: float
    grad_norm: float
    dt_used: float

    def as_row(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in CSV_COLUMNS)

    def is_finite(self) -> bool:
        return all(math.isfinite(value) for value in self.as_row())

    def to_dict(self) -> dict[str, float]:
        return asdict(self)


assert tuple(f.name for f in fields(DiagnosticsRecord)) == CSV_COLUMNS


def diagnostics_record(
    t: float, v: ComplexField, dt_used: float = 0.0, equation: str = "dnls"
) -> DiagnosticsRecord:
    """Diagnostics of a v-frame state.

    For the derivative equation the u-frame columns are evaluated directly on the
    reconstructed ``u = G_{3/4} v``, which makes them an independent check on the
    frame dictionary. For quintic NLS there is no gauge: the u-frame columns
    repeat the v-frame ones and the momentum is ``Im \\int conj(u) u_x``.
    """
    grid = v.grid
    vx = derivative(v)
    rho = v.abs2()
    grad_sq = float(quadrature(vx.abs2(), grid))
    energy = float(quadrature(vx.abs2() - rho**3 / 16.0, grid))
    transport = float(quadrature(np.imag(np.conj(v.values) * vx.values), grid))
    x = grid.x
    weighted = float(quadrature(2.0 * x * np.imag(np.conj(v.values) * vx.values), grid))
    if equation == "nls5":
        momentum = transport
        virial_j = weighted
        energy_d, momentum_d = energy, momentum
    else:
        momentum = transport + 0.25 * float(quadrature(rho**2, grid))
        virial_j = weighted + 0.5 * float(quadrature(x * rho**2, grid))
        u = gauge_transform(-V_FRAME, v)
        energy_d = energy_ed_via_gauge(0.0, u)
        momentum_d = momentum_pd_direct(u)
    return DiagnosticsRecord(
        t=float(t),
        mass=float(quadrature(rho, grid)),
        energy_E=energy,
        energy_ED=energy_d,
        momentum_P=momentum,
        momentum_PD=momentum_d,
        virial_I=float(quadrature(x**2 * rho, grid)),
        virial_J=virial_j,
        grad_norm=math.sqrt(grad_sq),
        dt_used=float(dt_used),
    )


# --- half-line certificate --------------------------------------------------


@dataclass(frozen=True)
class BlowupCertificate:
    """Quadratic bound ``I(t) <= a2 t^2 + a1 t + a0`` with ``a2 = 4E < 0``."""

    a2: float
    a1: float
    a0: float
    t_star_bound: float
    mass0: float

    def bound(self, t):
        t = np.asarray(t, dtype=np.float64)
        return self.a2 * t**2 + self.a1 * t + self.a0

    def gradient_lower_bound(self, virial_i):
        """``||v_x|| >= mass0 / (2 sqrt(I))``."""
        return self.mass0 / (2.0 * np.sqrt(np.asarray(virial_i, dtype=np.float64)))

    def to_dict(self) -> dict[str, float]:
        return asdict(self)


def blowup_certificate(u0: ComplexField) -> BlowupCertificate:
    """Certificate for u-frame half-line data with negative energy.

    Coefficients are computed from the data alone; ``I'(0)`` comes from the
    rate formula with psi = x^2, never from time differencing.
    """
    grid = u0.grid
    if grid.periodic:
        raise GridError("the blow-up certificate is a half-line construction")
    if abs(u0.values[0]) > 1e-12:
        raise CertificateError("data must satisfy the Dirichlet condition u(0) = 0")
    v0 = gauge_transform(V_FRAME, u0)
    energy = energy_E(v0)
    if not energy < 0.0:
        raise CertificateError(f"nonnegative energy: E(u0) = {energy:.6g}, certificate inapplicable")
    weight = VirialWeight.x_squared(grid)
    a2 = 4.0 * energy
    a1 = virial_I_rate(v0, weight) + surplus_term(v0)
    a0 = virial_I(v0, weight)
    t_star = (a1 + math.sqrt(a1 * a1 - 4.0 * a2 * a0)) / (-2.0 * a2)
    return BlowupCertificate(a2=a2, a1=a1, a0=a0, t_star_bound=t_star, mass0=mass(v0))
