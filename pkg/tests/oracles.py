"""Independent reference computations used to freeze expected values.

Nothing here imports the package's own calculus: the oracles use scipy
quadrature and ODE integration on closed forms.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad, solve_ivp


def shoot_ground_state_peak(lo: float = 1.5, hi: float = 2.5, x_max: float = 40.0) -> float:
    """Peak value of the decaying even solution of Q'' = Q - (3/16) Q^5 by bisection.

    Starting from Q(0) = c, Q'(0) = 0: too small a c turns back up (Q' > 0 while
    Q > 0), too large a c crosses zero. The separatrix is the ground state.
    """

    def rhs(_, y):
        return [y[1], y[0] - 3.0 / 16.0 * y[0] ** 5]

    def crosses_zero(c: float) -> bool | None:
        def hit_zero(_, y):
            return y[0]

        def turn_up(_, y):
            return y[1]

        hit_zero.terminal = True
        turn_up.terminal = True
        turn_up.direction = 1
        sol = solve_ivp(rhs, (0.0, x_max), [c, 0.0], rtol=1e-13, atol=1e-15, events=[hit_zero, turn_up])
        if sol.t_events[0].size:
            return True
        if sol.t_events[1].size:
            return False
        return None  # still on the separatrix at x_max: bracket is at resolution

    for _ in range(60):
        mid = 0.5 * (lo + hi)
        verdict = crosses_zero(mid)
        if verdict is None:
            break
        if verdict:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def q_closed(x):
    # 2 / sqrt(cosh 2x) without overflow in the tails
    e = np.exp(-2.0 * abs(x))
    return 2.0 * np.sqrt(2.0 * e / (1.0 + e * e))


def q_closed_dx(x):
    return -np.tanh(2.0 * x) * q_closed(x)


def q_integrals() -> dict[str, float]:
    """Adaptive quadrature of the closed form on the whole line."""
    # Even integrands; the tail beyond x = 40 is below 1e-30.
    def whole_line(f):
        return 2.0 * quad(f, 0.0, 40.0, epsabs=1e-15, epsrel=1e-13, limit=200)[0]

    return {
        "mass": whole_line(lambda x: q_closed(x) ** 2),
        "grad_sq": whole_line(lambda x: q_closed_dx(x) ** 2),
        "l4": whole_line(lambda x: q_closed(x) ** 4),
        "l6": whole_line(lambda x: q_closed(x) ** 6),
        "x2_mass": whole_line(lambda x: x * x * q_closed(x) ** 2),
    }


def gaussian_gn_ratio() -> float:
    """GN ratio of exp(-x^2) by closed-form Gaussian integrals."""
    mass = np.sqrt(np.pi / 2.0)
    grad = np.sqrt(np.pi / 2.0)  # \int 4x^2 e^{-2x^2} = sqrt(pi/2)
    l6 = np.sqrt(np.pi / 6.0)
    return float(l6 / (mass**2 * grad))


def halfline_fixture_oracle(energy: float = -1.0, k: float = -3.0) -> dict[str, float]:
    """Certificate inputs for v(x) = A x exp(-x^2 + i k x) on [0, inf) by quad.

    With g = exp(-2x^2): |v|^2 = A^2 x^2 g, |v_x|^2 = A^2 g ((1 - 2x^2)^2 + k^2 x^2),
    Im(conj(v) v_x) = A^2 k x^2 g. E is a2 A^2 - a6 A^6 in the amplitude.
    """
    from scipy.optimize import brentq

    def half(f):
        return quad(f, 0.0, 12.0, epsabs=1e-15, epsrel=1e-13, limit=200)[0]

    grad = half(lambda x: np.exp(-2 * x * x) * ((1 - 2 * x * x) ** 2 + k * k * x * x))
    sext = half(lambda x: x**6 * np.exp(-6 * x * x)) / 16.0
    amp = brentq(lambda a: a * a * grad - a**6 * sext - energy, 8.0, 12.0, xtol=1e-15)
    a2 = amp * amp
    mass = a2 * half(lambda x: x * x * np.exp(-2 * x * x))
    i0 = a2 * half(lambda x: x**4 * np.exp(-2 * x * x))
    rate = 4.0 * a2 * k * half(lambda x: x**3 * np.exp(-2 * x * x))
    surplus = a2 * a2 * half(lambda x: x**5 * np.exp(-4 * x * x))
    a1 = rate + surplus
    t_star = (a1 + np.sqrt(a1 * a1 - 16.0 * energy * i0)) / (-8.0 * energy)
    return {"amplitude": amp, "a2": 4.0 * energy, "a1": a1, "a0": i0, "mass0": mass, "t_star": float(t_star)}


def bump_h1_norm(amplitude: float, width: float) -> float:
    """H^1 norm of amplitude * exp(-1 / (1 - r^2)), r = x / width, by quad."""

    def f(x):
        r = x / width
        return np.exp(-1.0 / (1.0 - r * r)) if abs(r) < 1 else 0.0

    def fx(x):
        r = x / width
        if abs(r) >= 1:
            return 0.0
        return f(x) * (-2.0 * r / (1.0 - r * r) ** 2) / width

    l2 = quad(lambda x: f(x) ** 2, -width, width, epsabs=1e-15, limit=200)[0]
    h1 = quad(lambda x: fx(x) ** 2, -width, width, epsabs=1e-15, limit=200)[0]
    return float(amplitude * np.sqrt(l2 + h1))
