"""Time integration of the gauge-reduced derivative NLS and of quintic NLS.

v-frame equation:  i v_t + v_xx = (i/2)|v|^2 v_x - (i/2) v^2 conj(v_x) - (3/16)|v|^4 v
quintic NLS:       i u_t + u_xx + (3/16)|u|^4 u = 0

Both are written as ``v_t = i v_xx + N(v)``. On the periodic line the linear
part is integrated exactly inside an ETDRK4 step (Cox-Matthews, phi-functions by
contour averaging) and N is evaluated pseudospectrally with 2/3-rule
dealiasing. On the Dirichlet half-line the linear part is Crank-Nicolson and N
is explicit (Heun predictor-corrector), which is second order overall. Step
size is adapted by step doubling.
"""

from __future__ import annotations

import enum
import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import sparse
from scipy.linalg import lapack

from .diagnostics import DiagnosticsRecord, boundary_leak, diagnostics_record, grad_norm
from .errors import ConvergenceError, GridError
from .grid import ComplexField, GridSpec, fd_derivative, quadrature

log = logging.getLogger(__name__)

DT_MIN = 1e-14
GUARD_FACTOR = 50.0
LEAK_THRESHOLD = 1e-6
CONTOUR_POINTS = 32
# Adapted step sizes are rounded down onto dt0 * 2^(j/LADDER) so that the
# per-step-size precomputations (phi-functions, banded matrices) get reused.
LADDER = 16


class Equation(str, enum.Enum):
    DNLS = "DNLSGauged"
    NLS5 = "NLS5"

    @classmethod
    def parse(cls, value) -> "Equation":
        if isinstance(value, cls):
            return value
        aliases = {"dnls": cls.DNLS, "dnlsgauged": cls.DNLS, "nls5": cls.NLS5}
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise ValueError(f"unknown equation {value!r}") from None

    @property
    def tag(self) -> str:
        return "nls5" if self is Equation.NLS5 else "dnls"


class Status(str, enum.Enum):
    REACHED_T_END = "ReachedTEnd"
    BLOWUP_STOP = "BlowupStop"
    STEP_FAILURE = "StepFailure"


@dataclass(frozen=True, eq=False)
class EvolutionProblem:
    equation: Equation
    initial: ComplexField
    t_end: float
    dt0: float = 1e-3
    tolerance: float = 1e-9
    frame_stride: int = 1
    stop_grad_norm: float | None = None
    adaptive: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "equation", Equation.parse(self.equation))
        if not self.dt0 > 0:
            raise ValueError("dt0 must be positive")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if self.frame_stride < 1:
            raise ValueError("frame_stride must be >= 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if not self.grid.periodic and abs(self.initial.values[0]) > 1e-12:
            raise GridError("half-line data must vanish at x = 0")
        g0 = grad_norm(self.initial)
        if self.stop_grad_norm is None:
            object.__setattr__(self, "stop_grad_norm", GUARD_FACTOR * g0 if g0 > 0 else math.inf)
        elif not self.stop_grad_norm > g0:
            raise ValueError(
                f"stop_grad_norm {self.stop_grad_norm} must exceed the initial gradient norm {g0}"
            )

    @property
    def grid(self) -> GridSpec:
        return self.initial.grid


@dataclass(frozen=True)
class TrajectoryFrame:
    t: float
    state: ComplexField
    diagnostics: DiagnosticsRecord


@dataclass
class SolverOutcome:
    status: Status
    frames: list[TrajectoryFrame]
    t_final: float
    steps_accepted: int = 0
    steps_rejected: int = 0
    warnings: list[str] = field(default_factory=list)
    message: str = ""

    @property
    def final(self) -> TrajectoryFrame:
        return self.frames[-1]

    @property
    def times(self) -> np.ndarray:
        return np.array([f.t for f in self.frames])

    def records(self) -> list[DiagnosticsRecord]:
        return [f.diagnostics for f in self.frames]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(f.diagnostics, name) for f in self.frames])


# --- periodic line: ETDRK4 --------------------------------------------------


def _dnls_nonlinear(v: np.ndarray, vx: np.ndarray) -> np.ndarray:
    rho = v.real**2 + v.imag**2
    return 0.5 * rho * vx - 0.5 * v * v * np.conj(vx) + (3j / 16.0) * rho * rho * v


def _nls5_nonlinear(v: np.ndarray, vx: np.ndarray) -> np.ndarray:
    rho = v.real**2 + v.imag**2
    return (3j / 16.0) * rho * rho * v


class _LineStepper:
    order = 4

    def __init__(self, grid: GridSpec, equation: Equation):
        self.grid = grid
        self.ik = 1j * np.asarray(grid.k)
        self.linear = -1j * np.asarray(grid.k) ** 2
        self.mask = np.asarray(grid.dealias_mask)
        self.derivative_free = equation is Equation.NLS5
        self._coeffs = lru_cache(maxsize=64)(self._phi_coefficients)

    def initial(self, f: ComplexField) -> np.ndarray:
        return np.fft.fft(f.values) * self.mask

    def to_field(self, state: np.ndarray) -> ComplexField:
        return ComplexField(self.grid, np.fft.ifft(state))

    def nonlinear(self, vhat: np.ndarray) -> np.ndarray:
        v = np.fft.ifft(vhat)
        if self.derivative_free:
            out = _nls5_nonlinear(v, v)
        else:
            out = _dnls_nonlinear(v, np.fft.ifft(self.ik * vhat))
        return np.fft.fft(out) * self.mask

    def _phi_coefficients(self, h: float):
        z = h * self.linear
        roots = np.exp(2j * np.pi * (np.arange(1, CONTOUR_POINTS + 1) - 0.5) / CONTOUR_POINTS)
        zc = z[:, None] + roots[None, :]
        ez = np.exp(zc)
        ez2 = np.exp(zc / 2.0)
        zc3 = zc**3
        half = h * np.mean((ez2 - 1.0) / zc, axis=1)
        f1 = h * np.mean((-4.0 - zc + ez * (4.0 - 3.0 * zc + zc**2)) / zc3, axis=1)
        f2 = h * np.mean((2.0 + zc + ez * (zc - 2.0)) / zc3, axis=1)
        f3 = h * np.mean((-4.0 - 3.0 * zc - zc**2 + ez * (4.0 - zc)) / zc3, axis=1)
        return np.exp(z), np.exp(z / 2.0), half, f1, f2, f3

    def step(self, vhat: np.ndarray, h: float) -> np.ndarray:
        e, e2, half, f1, f2, f3 = self._coeffs(h)
        n0 = self.nonlinear(vhat)
        a = e2 * vhat + half * n0
        na = self.nonlinear(a)
        b = e2 * vhat + half * na
        nb = self.nonlinear(b)
        c = e2 * a + half * (2.0 * nb - n0)
        nc = self.nonlinear(c)
        return e * vhat + f1 * n0 + 2.0 * f2 * (na + nb) + f3 * nc

    def error(self, fine: np.ndarray, coarse: np.ndarray) -> float:
        scale = np.linalg.norm(fine)
        diff = np.linalg.norm(fine - coarse)
        return float(diff / scale) if scale > 0 else float(diff)

    def grad_norm(self, vhat: np.ndarray) -> float:
        g = self.grid
        return math.sqrt(g.dx * float(np.sum(np.abs(self.ik * vhat) ** 2)) / g.n_points)


# --- half-line: Crank-Nicolson + Heun --------------------------------------


def _halfline_laplacian(m: int, dx: float) -> sparse.csr_matrix:
    """4th-order five-point Laplacian on interior nodes, odd reflection at both walls.

    The reflection makes the matrix symmetric, so the Crank-Nicolson linear
    step is exactly unitary.
    """
    c = 1.0 / (12.0 * dx * dx)
    main = np.full(m, -30.0 * c)
    main[0] += c
    main[-1] += c
    off1 = np.full(m - 1, 16.0 * c)
    off2 = np.full(m - 2, -c)
    return sparse.diags([off2, off1, main, off1, off2], [-2, -1, 0, 1, 2], format="csr")


class _HalflineStepper:
    order = 2

    def __init__(self, grid: GridSpec, equation: Equation):
        self.grid = grid
        self.m = grid.n_points - 2
        self.lap = _halfline_laplacian(self.m, grid.dx)
        c = 1.0 / (12.0 * grid.dx**2)
        self._bands = np.zeros((5, self.m))
        self._bands[0, 2:] = -c
        self._bands[1, 1:] = 16.0 * c
        self._bands[2, :] = -30.0 * c
        self._bands[2, 0] += c
        self._bands[2, -1] += c
        self._bands[3, :-1] = 16.0 * c
        self._bands[4, :-2] = -c
        self.nl = _nls5_nonlinear if equation is Equation.NLS5 else _dnls_nonlinear
        self._implicit = lru_cache(maxsize=64)(self._implicit_bands)

    def initial(self, f: ComplexField) -> np.ndarray:
        v = np.array(f.values, dtype=np.complex128)
        v[0] = 0.0
        v[-1] = 0.0
        return v

    def to_field(self, state: np.ndarray) -> ComplexField:
        return ComplexField(self.grid, state)

    def _implicit_bands(self, h: float):
        # LU of I - (ih/2) D2 in LAPACK band storage, two extra rows for fill-in
        ab = np.zeros((7, self.m), dtype=np.complex128)
        ab[2:] = -0.5j * h * self._bands
        ab[4] += 1.0
        lu, piv, info = lapack.zgbtrf(ab, 2, 2)
        if info != 0:
            raise np.linalg.LinAlgError(f"singular Crank-Nicolson matrix (info={info})")
        return lu, piv

    def _solve(self, factors, rhs: np.ndarray) -> np.ndarray:
        lu, piv = factors
        x, info = lapack.zgbtrs(lu, 2, 2, rhs, piv)
        if info != 0:
            raise np.linalg.LinAlgError(f"banded back-substitution failed (info={info})")
        return x

    def nonlinear(self, v: np.ndarray) -> np.ndarray:
        return self.nl(v, fd_derivative(v, self.grid.dx))[1:-1]

    def step(self, v: np.ndarray, h: float) -> np.ndarray:
        factors = self._implicit(h)
        inner = v[1:-1]
        explicit = inner + 0.5j * h * (self.lap @ inner)
        n0 = self.nonlinear(v)
        pred = np.zeros_like(v)
        pred[1:-1] = self._solve(factors, explicit + h * n0)
        n1 = self.nonlinear(pred)
        out = np.zeros_like(v)
        out[1:-1] = self._solve(factors, explicit + 0.5 * h * (n0 + n1))
        return out

    def error(self, fine: np.ndarray, coarse: np.ndarray) -> float:
        scale = np.linalg.norm(fine)
        diff = np.linalg.norm(fine - coarse)
        return float(diff / scale) if scale > 0 else float(diff)

    def grad_norm(self, v: np.ndarray) -> float:
        vx = fd_derivative(v, self.grid.dx)
        return math.sqrt(max(float(quadrature(np.abs(vx) ** 2, self.grid)), 0.0))


# --- driver -----------------------------------------------------------------


def _quantize(dt: float, dt0: float) -> float:
    j = math.floor(LADDER * math.log2(dt / dt0) + 1e-9)
    return dt0 * 2.0 ** (j / LADDER)


def _integrate(problem: EvolutionProblem, stepper) -> SolverOutcome:
    grid = problem.grid
    tag = problem.equation.tag
    state = stepper.initial(problem.initial)
    t = 0.0
    dt = problem.dt0
    frames: list[TrajectoryFrame] = []
    notes: list[str] = []
    leak_flagged = False

    def record(state, t, h):
        nonlocal leak_flagged
        f = stepper.to_field(state)
        frames.append(TrajectoryFrame(t, f, diagnostics_record(t, f, h, equation=tag)))
        if not grid.periodic and not leak_flagged:
            leak = boundary_leak(f)
            if leak > LEAK_THRESHOLD:
                leak_flagged = True
                msg = f"boundary leak: |v| = {leak:.3g} near x = L at t = {t:.6g}"
                notes.append(msg)
                warnings.warn(msg, RuntimeWarning, stacklevel=3)

    record(state, t, 0.0)
    accepted = rejected = 0
    p = stepper.order
    t_end = problem.t_end
    end_slack = 1e-12 * max(1.0, t_end)
    last_h = 0.0
    status = Status.REACHED_T_END
    message = ""

    while t < t_end - end_slack:
        h = min(dt, t_end - t)
        if h < DT_MIN:
            status, message = Status.STEP_FAILURE, f"step size underflow ({h:.3g}) at t = {t:.6g}"
            break
        if problem.adaptive:
            coarse = stepper.step(state, h)
            fine = stepper.step(stepper.step(state, 0.5 * h), 0.5 * h)
            err = stepper.error(fine, coarse) / (2.0**p - 1.0)
            if not (np.isfinite(err) and np.all(np.isfinite(fine))):
                rejected += 1
                dt = 0.25 * h
                continue
            factor = 2.0 if err == 0.0 else min(2.0, 0.9 * (problem.tolerance / err) ** (1.0 / (p + 1)))
            if err > problem.tolerance:
                rejected += 1
                dt = _quantize(h * max(0.1, factor), problem.dt0)
                continue
            new_state = fine
            dt = _quantize(h * factor, problem.dt0) if h == dt else dt
        else:
            new_state = stepper.step(state, h)
            if not np.all(np.isfinite(new_state)):
                status, message = Status.STEP_FAILURE, f"non-finite state at t = {t + h:.6g}"
                break
        state = new_state
        t += h
        last_h = h
        accepted += 1
        g = stepper.grad_norm(state)
        if g >= problem.stop_grad_norm:
            record(state, t, h)
            status = Status.BLOWUP_STOP
            message = f"gradient norm {g:.6g} reached guard {problem.stop_grad_norm:.6g} at t = {t:.10g}"
            break
        if accepted % problem.frame_stride == 0 or t >= t_end - end_slack:
            record(state, t, h)

    if status is Status.STEP_FAILURE and frames[-1].t != t:
        record(state, t, last_h)
    if message:
        log.info(message)
    return SolverOutcome(
        status=status,
        frames=frames,
        t_final=t,
        steps_accepted=accepted,
        steps_rejected=rejected,
        warnings=notes,
        message=message,
    )


def evolve_line(problem: EvolutionProblem) -> SolverOutcome:
    if not problem.grid.periodic:
        raise GridError("evolve_line needs a PeriodicLine grid")
    return _integrate(problem, _LineStepper(problem.grid, problem.equation))


def evolve_halfline(problem: EvolutionProblem) -> SolverOutcome:
    if problem.grid.periodic:
        raise GridError("evolve_halfline needs a DirichletHalfLine grid")
    return _integrate(problem, _HalflineStepper(problem.grid, problem.equation))


def evolve(problem: EvolutionProblem) -> SolverOutcome:
    return evolve_line(problem) if problem.grid.periodic else evolve_halfline(problem)


# --- temporal convergence ---------------------------------------------------


@dataclass(frozen=True)
class ConvergenceResult:
    dts: tuple[float, ...]
    differences: tuple[float, ...]
    orders: tuple[float, ...]
    expected_min: float

    @property
    def order(self) -> float:
        return self.orders[-1]

    @property
    def passed(self) -> bool:
        return self.order >= self.expected_min


def convergence_study(
    problem: EvolutionProblem, refinements: int, strict: bool = True
) -> ConvergenceResult:
    """Observed temporal order from fixed-step runs at dt0, dt0/2, ..., dt0/2^refinements.

    Successive final states are differenced; the order is log2 of the ratio of
    consecutive differences (the finest pair is reported as ``order``).
    """
    if refinements < 2:
        raise ValueError("need refinements >= 2 (three runs) to measure a slope")
    finals = []
    dts = []
    for j in range(refinements + 1):
        dt = problem.dt0 / 2**j
        run = evolve(replace(problem, dt0=dt, adaptive=False, frame_stride=10**9))
        if run.status is not Status.REACHED_T_END:
            raise ConvergenceError(f"run with dt = {dt:.3g} ended with {run.status.value}: {run.message}")
        finals.append(run.final.state)
        dts.append(dt)
    diffs = []
    for a, b in zip(finals, finals[1:]):
        d = a - b
        diffs.append(math.sqrt(float(quadrature(d.abs2(), d.grid))))
    orders = tuple(math.log2(d0 / d1) for d0, d1 in zip(diffs, diffs[1:]))
    expected = 3.5 if problem.grid.periodic else 1.8
    result = ConvergenceResult(tuple(dts), tuple(diffs), orders, expected)
    if strict and not result.passed:
        raise ConvergenceError(f"observed order {result.order:.3f} below {expected}")
    return result


def fixed_step_times(t_end: float, dt: float) -> Sequence[float]:
    n = int(round(t_end / dt))
    return [j * dt for j in range(n + 1)]
