"""Spatial grids, differentiation, quadrature and norms.

Two flavours of domain are supported: a periodic truncation ``[-L, L)`` of the
real line (Fourier pseudospectral calculus) and a Dirichlet interval ``[0, L]``
standing in for the half-line (fourth-order finite differences, Simpson
quadrature).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import cumulative_simpson, simpson

from .errors import GridError

MIN_POINTS = 16


class GridKind(str, enum.Enum):
    PERIODIC_LINE = "PeriodicLine"
    DIRICHLET_HALF_LINE = "DirichletHalfLine"


@dataclass(frozen=True, eq=False)
class GridSpec:
    """Uniform grid on ``[-L, L)`` (periodic) or ``[0, L]`` (Dirichlet)."""

    kind: GridKind
    half_width: float
    n_points: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", GridKind(self.kind))
        if not np.isfinite(self.half_width) or self.half_width <= 0:
            raise GridError(f"half_width must be positive, got {self.half_width}")
        if int(self.n_points) != self.n_points or self.n_points < MIN_POINTS:
            raise GridError(f"n_points must be an integer >= {MIN_POINTS}, got {self.n_points}")
        object.__setattr__(self, "n_points", int(self.n_points))
        if self.kind is GridKind.PERIODIC_LINE and self.n_points & (self.n_points - 1):
            raise GridError(f"PeriodicLine needs a power-of-two n_points, got {self.n_points}")

    @classmethod
    def line(cls, L: float = 30.0, n: int = 1024) -> "GridSpec":
        return cls(GridKind.PERIODIC_LINE, float(L), n)

    @classmethod
    def halfline(cls, L: float = 10.0, n: int = 4001) -> "GridSpec":
        return cls(GridKind.DIRICHLET_HALF_LINE, float(L), n)

    @property
    def periodic(self) -> bool:
        return self.kind is GridKind.PERIODIC_LINE

    @property
    def L(self) -> float:
        return self.half_width

    @property
    def n(self) -> int:
        return self.n_points

    @property
    def dx(self) -> float:
        if self.periodic:
            return 2.0 * self.half_width / self.n_points
        return self.half_width / (self.n_points - 1)

    @cached_property
    def x(self) -> NDArray[np.float64]:
        if self.periodic:
            x = -self.half_width + self.dx * np.arange(self.n_points)
        else:
            x = np.linspace(0.0, self.half_width, self.n_points)
        x.setflags(write=False)
        return x

    @cached_property
    def k(self) -> NDArray[np.float64]:
        """Angular wavenumbers in numpy FFT ordering (periodic grids only)."""
        self._require_periodic("wavenumbers")
        k = 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)
        k.setflags(write=False)
        return k

    @cached_property
    def dealias_mask(self) -> NDArray[np.bool_]:
        """2/3-rule mask: keeps modes with ``|index| < n/3``."""
        self._require_periodic("dealiasing")
        index = np.abs(np.fft.fftfreq(self.n_points) * self.n_points)
        mask = index < self.n_points / 3.0
        mask.setflags(write=False)
        return mask

    def _require_periodic(self, what: str) -> None:
        if not self.periodic:
            raise GridError(f"{what} is only defined on a PeriodicLine grid")

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "L": self.half_width, "n": self.n_points, "dx": self.dx}

    @classmethod
    def from_dict(cls, doc: dict) -> "GridSpec":
        return cls(GridKind(doc["kind"]), float(doc["L"]), int(doc["n"]))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GridSpec):
            return NotImplemented
        return (self.kind, self.half_width, self.n_points) == (
            other.kind,
            other.half_width,
            other.n_points,
        )

    def __hash__(self) -> int:
        return hash((self.kind, self.half_width, self.n_points))


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Complex samples of a function on a grid. The sample array is read-only."""

    grid: GridSpec
    values: NDArray[np.complex128]

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.complex128)
        if values.shape != (self.grid.n_points,):
            raise GridError(
                f"field has shape {values.shape}, grid expects ({self.grid.n_points},)"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: GridSpec, func) -> "ComplexField":
        return cls(grid, func(grid.x))

    @classmethod
    def zeros(cls, grid: GridSpec) -> "ComplexField":
        return cls(grid, np.zeros(grid.n_points, dtype=np.complex128))

    def with_values(self, values: ArrayLike) -> "ComplexField":
        return ComplexField(self.grid, values)

    @property
    def x(self) -> NDArray[np.float64]:
        return self.grid.x

    def abs2(self) -> NDArray[np.float64]:
        return self.values.real**2 + self.values.imag**2

    def conj(self) -> "ComplexField":
        return self.with_values(np.conj(self.values))

    def _other(self, other):
        if isinstance(other, ComplexField):
            if other.grid != self.grid:
                raise GridError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return self.with_values(self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self.with_values(self.values - self._other(other))

    def __rsub__(self, other):
        return self.with_values(self._other(other) - self.values)

    def __mul__(self, other):
        return self.with_values(self.values * self._other(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)

    def __len__(self) -> int:
        return self.grid.n_points


def _as_values(f) -> NDArray:
    return f.values if isinstance(f, ComplexField) else np.asarray(f)


# Fourth-order one-sided closures, rows apply to f[0:5] (mirrored at the right end).
_FD1_LEFT = np.array(
    [
        [-25.0, 48.0, -36.0, 16.0, -3.0],
        [-3.0, -10.0, 18.0, -6.0, 1.0],
    ]
) / 12.0


def fd_derivative(values: NDArray, dx: float) -> NDArray:
    """Fourth-order finite-difference first derivative with one-sided closures."""
    f = np.asarray(values)
    out = np.empty_like(f)
    out[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * dx)
    out[0] = _FD1_LEFT[0] @ f[:5] / dx
    out[1] = _FD1_LEFT[1] @ f[:5] / dx
    out[-1] = -(_FD1_LEFT[0] @ f[-1:-6:-1]) / dx
    out[-2] = -(_FD1_LEFT[1] @ f[-1:-6:-1]) / dx
    return out


def spectral_derivative(values: NDArray, grid: GridSpec, order: int = 1) -> NDArray:
    return np.fft.ifft((1j * grid.k) ** order * np.fft.fft(values))


def derivative(f: ComplexField) -> ComplexField:
    """d/dx: Fourier multiplier ``ik`` on the line, 4th-order FD on the half-line."""
    grid = f.grid
    if grid.periodic:
        return f.with_values(spectral_derivative(f.values, grid))
    return f.with_values(fd_derivative(f.values, grid.dx))


def second_derivative(f: ComplexField) -> ComplexField:
    grid = f.grid
    if grid.periodic:
        return f.with_values(spectral_derivative(f.values, grid, order=2))
    return f.with_values(fd_derivative(fd_derivative(f.values, grid.dx), grid.dx))


def quadrature(f, grid: GridSpec | None = None):
    """Integral over the domain: rectangle rule (periodic) or composite Simpson.

    ``f`` is either a :class:`ComplexField` or raw samples accompanied by ``grid``.
    """
    if isinstance(f, ComplexField):
        grid = f.grid
    elif grid is None:
        raise GridError("raw samples need an explicit grid")
    values = _as_values(f)
    if grid.periodic:
        return grid.dx * values.sum()
    return simpson(values, dx=grid.dx)


def cumulative_integral(values: NDArray, grid: GridSpec) -> NDArray[np.float64]:
    """Running integral of real samples from the left end of the domain.

    On the periodic line the mean is integrated exactly and the zero-mean
    remainder through the inverse Fourier multiplier, so the result is smooth
    to spectral accuracy (a plain running sum is only first order). On the
    half-line cumulative Simpson starting from ``x = 0`` is used.
    """
    g = np.asarray(values, dtype=np.float64)
    if not grid.periodic:
        return cumulative_simpson(g, dx=grid.dx, initial=0.0)
    ghat = np.fft.fft(g)
    mean = ghat[0].real / grid.n_points
    k = grid.k
    with np.errstate(divide="ignore", invalid="ignore"):
        ahat = np.where(k != 0.0, ghat / (1j * k), 0.0)
    if grid.n_points % 2 == 0:
        ahat[grid.n_points // 2] = 0.0
    periodic_part = np.fft.ifft(ahat).real
    out = mean * (grid.x + grid.half_width) + periodic_part
    return out - out[0]


def l2_norm_squared(f) -> float:
    if isinstance(f, ComplexField):
        return float(quadrature(f.abs2(), f.grid))
    raise TypeError("expected a ComplexField")


def l2_norm(f: ComplexField) -> float:
    return float(np.sqrt(l2_norm_squared(f)))


def sobolev_h1_norm(f: ComplexField) -> float:
    """sqrt(||f||_2^2 + ||f_x||_2^2)."""
    fx = derivative(f)
    return float(np.sqrt(l2_norm_squared(f) + l2_norm_squared(fx)))


def spectral_l2_norm_squared(f: ComplexField) -> float:
    """||f||_2^2 evaluated in transform space (Parseval), periodic grids only."""
    f.grid._require_periodic("Parseval norm")
    fhat = np.fft.fft(f.values)
    return float(f.grid.dx * np.sum(np.abs(fhat) ** 2) / f.grid.n_points)


def interpolate(f: ComplexField, points: ArrayLike) -> NDArray[np.complex128]:
    """Evaluate the trigonometric interpolant of a periodic field at arbitrary points.

    Points outside ``[-L, L)`` are returned as zero instead of wrapping around.
    The Nyquist mode is split symmetrically so real data stays real.
    """
    grid = f.grid
    grid._require_periodic("band-limited interpolation")
    pts = np.asarray(points, dtype=np.float64)
    n = grid.n_points
    coeffs = np.fft.fft(f.values) / n
    k = grid.k.copy()
    nyq = n // 2
    phases_shift = pts + grid.half_width
    out = np.empty(pts.shape, dtype=np.complex128)
    flat_pts = phases_shift.ravel()
    flat_out = out.ravel()
    block = 512
    for start in range(0, flat_pts.size, block):
        chunk = flat_pts[start : start + block]
        modes = np.exp(1j * np.outer(chunk, k))
        # Nyquist term as cosine so the interpolant is the symmetric one.
        modes[:, nyq] = np.cos(np.abs(k[nyq]) * chunk)
        flat_out[start : start + block] = modes @ coeffs
    inside = (pts >= -grid.half_width) & (pts < grid.half_width)
    return np.where(inside, out, 0.0)
