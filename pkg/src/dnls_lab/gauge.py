"""Gauge transformations ``G_a f = exp(i a \\int_{left}^x |f|^2) f`` and their identities."""

from __future__ import annotations

import numpy as np

from .grid import ComplexField, cumulative_integral, derivative, quadrature, second_derivative

# Exponents that appear in the theory: v = G_{-3/4} u is the working frame,
# w = G_{1/4} v = G_{-1/2} u simplifies the virial computation, G_{-1} and
# G_{1/2} build the derivative-free system.
DISTINGUISHED = {
    "phi": -1.0,
    "v_frame": -0.75,
    "w_frame": -0.5,
    "v_to_w": 0.25,
    "psi_outer": 0.5,
    "v_to_u": 0.75,
}

SEAM_TOLERANCE = 1e-10


def phase_integral(f: ComplexField) -> np.ndarray:
    """Running integral of ``|f|^2`` from the left end of the domain."""
    return cumulative_integral(f.abs2(), f.grid)


def gauge_transform(a: float, f: ComplexField) -> ComplexField:
    if a == 0.0:
        return f
    return f.with_values(np.exp(1j * a * phase_integral(f)) * f.values)


def seam_jump(a: float, f: ComplexField) -> float:
    """Size of the discontinuity that ``G_a f`` has across the periodic seam.

    The running phase grows by ``a * mass`` across ``[-L, L)``, so the gauged
    field is periodic only when that is a multiple of 2 pi or ``f`` vanishes at
    the ends. Zero on the half-line, where no periodic extension is used.
    """
    if not f.grid.periodic or a == 0.0:
        return 0.0
    mass = float(quadrature(f.abs2(), f.grid))
    edge = max(abs(f.values[0]), abs(f.values[-1]))
    return float(edge * abs(np.exp(1j * a * mass) - 1.0))


def gauge_derivative(a: float, f: ComplexField) -> ComplexField:
    """Closed form of ``d/dx G_a f = e^{ia\\int|f|^2} (i a |f|^2 f + f_x)``."""
    fx = derivative(f).values
    phase = np.exp(1j * a * phase_integral(f))
    return f.with_values(phase * (1j * a * f.abs2() * f.values + fx))


def gauged_derivative(a: float, f: ComplexField, gauged: ComplexField | None = None) -> ComplexField:
    """Derivative of ``G_a f``: direct differentiation unless the seam jump is too large."""
    if seam_jump(a, f) > SEAM_TOLERANCE:
        return gauge_derivative(a, f)
    if gauged is None:
        gauged = gauge_transform(a, f)
    return derivative(gauged)


def energy_ed_via_gauge(a: float, u: ComplexField) -> float:
    """The u-frame energy written through ``g = G_a u``.

    ``||g_x||^2 + (2a + 3/2) Im \\int |g|^2 g conj(g_x) + (a^2 + 3a/2 + 1/2) \\int |g|^6``;
    the value does not depend on ``a``. At ``a = 0`` this is the direct formula.
    """
    g = gauge_transform(a, u)
    gx = gauged_derivative(a, u, g).values
    rho = g.abs2()
    grid = u.grid
    kinetic = quadrature(np.abs(gx) ** 2, grid)
    cubic = quadrature(np.imag(rho * g.values * np.conj(gx)), grid)
    sextic = quadrature(rho**3, grid)
    return float(kinetic + (2.0 * a + 1.5) * cubic + (a * a + 1.5 * a + 0.5) * sextic)


def momentum_pd_direct(u: ComplexField) -> float:
    """``Im \\int conj(u) u_x - (1/2) \\int |u|^4`` evaluated in the u-frame."""
    ux = derivative(u).values
    grid = u.grid
    return float(
        quadrature(np.imag(np.conj(u.values) * ux), grid) - 0.5 * quadrature(u.abs2() ** 2, grid)
    )


def to_phi_psi(u: ComplexField) -> tuple[ComplexField, ComplexField]:
    """The pair ``phi = G_{-1} u`` and ``psi = e^{-(i/2)\\int|u|^2} d/dx G_{-1/2} u``.

    Both outer phases use ``\\int |u|^2``; equivalently ``psi = phi_x + (i/2)|phi|^2 phi``.
    When ``u`` solves the u-frame equation the pair solves the derivative-free
    system ``i phi_t + phi_xx = -i phi^2 conj(psi)``,
    ``i psi_t + psi_xx = i psi^2 conj(phi)``.
    """
    phi = gauge_transform(-1.0, u)
    inner = gauged_derivative(-0.5, u).values
    psi = np.exp(-0.5j * phase_integral(u)) * inner
    return phi, u.with_values(psi)


def phi_psi_residuals(
    u_prev: ComplexField, u_mid: ComplexField, u_next: ComplexField, h: float
) -> tuple[float, float]:
    """Max-norm residuals of the (phi, psi) system at the middle of three frames.

    Time derivatives are centred differences with spacing ``h``.
    """
    phi_m, psi_m = to_phi_psi(u_prev)
    phi, psi = to_phi_psi(u_mid)
    phi_p, psi_p = to_phi_psi(u_next)
    phi_t = (phi_p.values - phi_m.values) / (2.0 * h)
    psi_t = (psi_p.values - psi_m.values) / (2.0 * h)
    r_phi = 1j * phi_t + second_derivative(phi).values + 1j * phi.values**2 * np.conj(psi.values)
    r_psi = 1j * psi_t + second_derivative(psi).values - 1j * psi.values**2 * np.conj(phi.values)
    return float(np.max(np.abs(r_phi))), float(np.max(np.abs(r_psi)))
