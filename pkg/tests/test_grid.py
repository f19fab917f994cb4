import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dnls_lab.errors import GridError
from dnls_lab.grid import (
    ComplexField,
    GridSpec,
    cumulative_integral,
    derivative,
    interpolate,
    l2_norm_squared,
    quadrature,
    sobolev_h1_norm,
    spectral_l2_norm_squared,
)

from oracles import q_closed, q_integrals


def bump(x, center=0.0, width=1.0):
    return np.exp(-((x - center) ** 2) / width**2)


class TestGridSpec:
    def test_periodic_spacing(self):
        g = GridSpec.line(20.0, 1024)
        assert g.dx == pytest.approx(40.0 / 1024)
        assert g.x[0] == -20.0
        assert g.x[-1] == pytest.approx(20.0 - g.dx)

    def test_halfline_endpoints_exact(self):
        g = GridSpec.halfline(7.5, 301)
        assert g.x[0] == 0.0
        assert g.x[-1] == 7.5
        assert g.dx == pytest.approx(7.5 / 300)

    @pytest.mark.parametrize("n", [8, 15, 1000])
    def test_rejects_bad_periodic_sizes(self, n):
        with pytest.raises(GridError):
            GridSpec.line(10.0, n)

    def test_rejects_nonpositive_width(self):
        with pytest.raises(GridError):
            GridSpec.halfline(0.0, 101)

    def test_field_length_checked(self):
        g = GridSpec.line(10.0, 64)
        with pytest.raises(GridError):
            ComplexField(g, np.zeros(63))

    def test_field_is_read_only(self):
        f = ComplexField.zeros(GridSpec.line(10.0, 64))
        with pytest.raises(ValueError):
            f.values[0] = 1.0

    def test_wavenumbers_only_on_line(self):
        with pytest.raises(GridError):
            GridSpec.halfline(5.0, 101).k


class TestDerivative:
    def test_fourier_mode_exact(self):
        g = GridSpec.line(3 * np.pi, 64)
        f = ComplexField(g, np.exp(1j * g.x))
        assert np.max(np.abs(derivative(f).values - 1j * f.values)) < 1e-12

    @pytest.mark.parametrize("grid", [GridSpec.line(10.0, 128), GridSpec.halfline(5.0, 101)])
    def test_constant_has_zero_derivative(self, grid):
        f = ComplexField(grid, np.full(grid.n, 3.0 - 2.0j))
        assert np.max(np.abs(derivative(f).values)) < 1e-12

    def test_sech_against_analytic(self):
        g = GridSpec.line(32.0, 1024)
        f = ComplexField(g, 1.0 / np.cosh(g.x))
        exact = -np.tanh(g.x) / np.cosh(g.x)
        assert np.max(np.abs(derivative(f).values - exact)) < 1e-10

    def test_halfline_fourth_order(self):
        errors = []
        for n in (101, 201, 401):
            g = GridSpec.halfline(4.0, n)
            f = ComplexField(g, g.x * np.exp(-g.x**2) * np.exp(2j * g.x))
            exact = ((1 - 2 * g.x**2) + 2j * g.x) * np.exp(-g.x**2) * np.exp(2j * g.x)
            errors.append(np.max(np.abs(derivative(f).values - exact)))
        slopes = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
        assert np.all(slopes > 3.7)

    def test_linearity(self):
        g = GridSpec.line(15.0, 256)
        f = ComplexField(g, bump(g.x, 1.0) * np.exp(0.5j * g.x))
        h = ComplexField(g, bump(g.x, -2.0, 2.0))
        a, b = 0.3 - 1.2j, 2.5
        lhs = derivative(a * f + b * h).values
        rhs = a * derivative(f).values + b * derivative(h).values
        assert np.max(np.abs(lhs - rhs)) < 1e-12

    def test_integration_by_parts(self):
        g = GridSpec.line(20.0, 512)
        f = ComplexField(g, bump(g.x, 0.5) * np.exp(1j * g.x))
        h = ComplexField(g, bump(g.x, -1.0, 1.5))
        total = quadrature(derivative(f).values * h.values, g) + quadrature(f.values * derivative(h).values, g)
        assert abs(total) < 1e-10


class TestQuadrature:
    def test_constant_on_line(self):
        g = GridSpec.line(12.5, 256)
        assert quadrature(np.ones(g.n), g) == pytest.approx(25.0, abs=1e-13)

    def test_q_mass(self):
        g = GridSpec.line(20.0, 1024)
        assert abs(quadrature(q_closed(g.x) ** 2, g) - 2 * np.pi) < 1e-10

    def test_sech2_2x(self):
        g = GridSpec.line(20.0, 1024)
        assert abs(quadrature(1.0 / np.cosh(2 * g.x) ** 2, g) - 1.0) < 1e-12

    def test_simpson_on_halfline(self):
        # \int_0^L x^2 e^{-x} = 2 - e^{-L}(L^2 + 2L + 2)
        g = GridSpec.halfline(10.0, 2001)
        exact = 2.0 - np.exp(-10.0) * (100 + 20 + 2)
        assert quadrature(g.x**2 * np.exp(-g.x), g) == pytest.approx(exact, abs=1e-9)

    def test_raw_samples_need_grid(self):
        with pytest.raises(GridError):
            quadrature(np.ones(16))

    def test_plancherel(self):
        g = GridSpec.line(20.0, 512)
        f = ComplexField(g, bump(g.x, 1.0) * np.exp(3j * g.x) + 0.5 * bump(g.x, -3.0, 0.7))
        assert abs(l2_norm_squared(f) - spectral_l2_norm_squared(f)) < 1e-10


class TestCumulativeIntegral:
    def test_periodic_matches_erf(self):
        from scipy.special import erf

        g = GridSpec.line(15.0, 512)
        running = cumulative_integral(np.exp(-g.x**2), g)
        exact = 0.5 * np.sqrt(np.pi) * (erf(g.x) + 1.0)
        assert np.max(np.abs(running - exact)) < 1e-12

    def test_halfline_starts_at_zero(self):
        g = GridSpec.halfline(5.0, 501)
        running = cumulative_integral(np.cos(g.x), g)
        assert running[0] == 0.0
        assert np.max(np.abs(running - np.sin(g.x))) < 1e-9


class TestSobolevNorm:
    def test_zero(self):
        assert sobolev_h1_norm(ComplexField.zeros(GridSpec.line(10.0, 64))) == 0.0

    def test_ground_state_value(self):
        ref = q_integrals()
        g = GridSpec.line(20.0, 1024)
        q = ComplexField(g, q_closed(g.x))
        assert sobolev_h1_norm(q) == pytest.approx(np.sqrt(ref["mass"] + ref["grad_sq"]), abs=1e-8)
        assert sobolev_h1_norm(q) == pytest.approx(np.sqrt(3 * np.pi), abs=1e-8)

    def test_modulated_bump_against_direct_quadrature(self):
        # |d/dx (e^{ix} b)|^2 = b'^2 + b^2 for real b: the phase adds exactly ||b||^2.
        g = GridSpec.line(15.0, 512)
        b = bump(g.x)
        plain = ComplexField(g, b)
        modulated = ComplexField(g, np.exp(1j * g.x) * b)
        direct_b = quadrature(b**2, g)
        direct_db = quadrature((2 * g.x * b) ** 2, g)
        assert sobolev_h1_norm(plain) ** 2 == pytest.approx(direct_b + direct_db, rel=1e-12)
        assert sobolev_h1_norm(modulated) ** 2 - sobolev_h1_norm(plain) ** 2 == pytest.approx(
            direct_b, rel=1e-10
        )


class TestInterpolation:
    def test_reproduces_grid_values(self):
        g = GridSpec.line(10.0, 128)
        f = ComplexField(g, bump(g.x) * np.exp(0.7j * g.x))
        assert np.max(np.abs(interpolate(f, g.x) - f.values)) < 1e-12

    def test_off_grid_points(self):
        g = GridSpec.line(15.0, 512)
        f = ComplexField(g, q_closed(g.x))
        pts = np.linspace(-5.0, 5.0, 37) + 0.0123
        assert np.max(np.abs(interpolate(f, pts) - q_closed(pts))) < 1e-10

    def test_outside_domain_is_zero(self):
        g = GridSpec.line(10.0, 64)
        f = ComplexField(g, np.ones(64))
        assert np.all(interpolate(f, np.array([-25.0, 10.0, 14.0])) == 0.0)


@settings(max_examples=25, deadline=None)
@given(
    center=st.floats(-3.0, 3.0),
    width=st.floats(0.6, 2.0),
    k=st.floats(-2.0, 2.0),
    shift=st.integers(-40, 40),
)
def test_quadrature_translation_invariant(center, width, k, shift):
    g = GridSpec.line(20.0, 256)
    f = bump(g.x, center, width) * np.exp(1j * k * g.x)
    assert abs(quadrature(np.abs(np.roll(f, shift)) ** 2, g) - quadrature(np.abs(f) ** 2, g)) < 1e-12
