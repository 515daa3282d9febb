"""Maximizer families, explicit wave solutions, sharp constants and the two
sharp polynomial inequalities.

Frequency-space samples are always taken on ``grid.dual()`` where ``grid`` is
the physical grid, so physical and frequency samples of one function pair up
under forward_fourier.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import BranchError, ConstraintViolation, DomainError, UnsupportedCase
from .grid import FREQUENCY, PHYSICAL, ComplexField, Grid, freq_magnitude
from .propagators import SCHRODINGER, WAVE, QuotientReport, WaveSplitPair, exponent

CONE_SLACK = 1e-12


@dataclass(frozen=True)
class SharpConstant:
    equation: str
    dim: int
    expression: str
    value: float


_CONSTANTS = {
    (SCHRODINGER, 1): ("12^(-1/12)", lambda: 12.0 ** (-1.0 / 12.0)),
    (SCHRODINGER, 2): ("2^(-1/2)", lambda: 2.0 ** -0.5),
    (WAVE, 2): ("(25/(64 pi))^(1/6)", lambda: (25.0 / (64.0 * math.pi)) ** (1.0 / 6.0)),
    (WAVE, 3): ("(3/(16 pi))^(1/4)", lambda: (3.0 / (16.0 * math.pi)) ** 0.25),
}


def _equation(name: str) -> str:
    key = name.lower()
    if key in ("schr", "schrodinger", "s"):
        return SCHRODINGER
    if key in ("wave", "w"):
        return WAVE
    raise UnsupportedCase(f"unknown equation {name!r}")


def sharp_constant(equation: str, n: int) -> SharpConstant:
    eq = _equation(equation)
    try:
        expr, fn = _CONSTANTS[(eq, int(n))]
    except KeyError:
        raise UnsupportedCase(f"no sharp constant for ({eq}, n={n})") from None
    return SharpConstant(eq, int(n), expr, fn())


def _cvec(b, n=None) -> np.ndarray:
    v = np.atleast_1d(np.asarray(b, dtype=complex)).ravel()
    if n is not None and v.size != n:
        raise ValueError(f"b must have length {n}")
    return v


@dataclass(frozen=True)
class ExpQuadraticParams:
    """exp(A |x|^2 + b.x + C) in physical or frequency variables."""
    A: complex
    b: np.ndarray
    C: complex
    space: str = PHYSICAL

    def __post_init__(self):
        object.__setattr__(self, "A", complex(self.A))
        object.__setattr__(self, "C", complex(self.C))
        object.__setattr__(self, "b", _cvec(self.b))
        if not self.A.real < 0:
            raise ConstraintViolation(f"Re(A) must be negative, got {self.A}")
        if self.space not in (PHYSICAL, FREQUENCY):
            raise ValueError(f"unknown space {self.space!r}")

    @property
    def dim(self) -> int:
        return self.b.size

    def replace(self, **kw) -> "ExpQuadraticParams":
        d = dict(A=self.A, b=self.b, C=self.C, space=self.space)
        d.update(kw)
        return ExpQuadraticParams(**d)

    def to_frequency(self) -> "ExpQuadraticParams":
        if self.space == FREQUENCY:
            return self
        A, b, C, n = self.A, self.b, self.C, self.dim
        return ExpQuadraticParams(
            1 / (4 * A), 1j * b / (2 * A),
            C - np.dot(b, b) / (4 * A) + 0.5 * n * np.log(math.pi / (-A)), FREQUENCY)

    def to_physical(self) -> "ExpQuadraticParams":
        if self.space == PHYSICAL:
            return self
        A, b, C, n = self.A, self.b, self.C, self.dim
        return ExpQuadraticParams(
            1 / (4 * A), -1j * b / (2 * A),
            C - np.dot(b, b) / (4 * A) - 0.5 * n * np.log(-4 * math.pi * A), PHYSICAL)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """x has shape (..., n)."""
        x = np.asarray(x, dtype=float)
        return np.exp(self.A * np.sum(x * x, axis=-1) + x @ self.b + self.C)

    def as_tuple(self) -> tuple:
        return (self.A, *self.b, self.C)


def gaussian_params(dim: int) -> ExpQuadraticParams:
    """Physical exp(-|x|^2)."""
    return ExpQuadraticParams(-1.0, np.zeros(dim), 0.0, PHYSICAL)


@dataclass(frozen=True)
class ConeExpParams:
    """f+^ = |xi|^(-1/2) exp(A|xi| + b.xi + C),  f-^ = |xi|^(-1/2) exp(conj(A)|xi| - conj(b).xi + D)."""
    A: complex
    b: np.ndarray
    C: complex
    D: complex
    dim: int = 3

    def __post_init__(self):
        object.__setattr__(self, "A", complex(self.A))
        object.__setattr__(self, "C", complex(self.C))
        object.__setattr__(self, "D", complex(self.D))
        object.__setattr__(self, "b", _cvec(self.b))
        if self.dim not in (2, 3):
            raise UnsupportedCase(f"cone maximizers handled for n=2,3, got {self.dim}")
        if self.b.size != self.dim:
            raise ValueError(f"b must have length {self.dim}")
        self.check()

    def check(self, slack: float = 0.0) -> None:
        if not np.linalg.norm(self.b.real) < -self.A.real + slack:
            raise ConstraintViolation(
                f"need |Re b| < -Re A, got |Re b|={np.linalg.norm(self.b.real):.6g}, Re A={self.A.real:.6g}")

    @classmethod
    def unchecked(cls, A, b, C, D, dim) -> "ConeExpParams":
        """Bypass the cone constraint; for probing error paths only."""
        obj = object.__new__(cls)
        for k, v in dict(A=complex(A), b=_cvec(b), C=complex(C), D=complex(D), dim=dim).items():
            object.__setattr__(obj, k, v)
        return obj

    def replace(self, **kw) -> "ConeExpParams":
        d = dict(A=self.A, b=self.b, C=self.C, D=self.D, dim=self.dim)
        d.update(kw)
        return ConeExpParams(**d)

    def as_tuple(self) -> tuple:
        return (self.A, *self.b, self.C, self.D)


def canonical_cone_constant(dim: int) -> float:
    return math.log(2 * math.pi ** 2) if dim == 3 else math.log(2 * math.pi)


def cone_maximizer_params(dim: int) -> ConeExpParams:
    c = canonical_cone_constant(dim)
    return ConeExpParams(-1.0, np.zeros(dim), c, c, dim)


def sample_gaussian_maximizer(params: ExpQuadraticParams, grid: Grid) -> ComplexField:
    """Samples on grid (physical params) or on grid.dual() (frequency params)."""
    g = grid if params.space == PHYSICAL else grid.dual()
    if g.dim != params.dim:
        raise ValueError("grid and params dimensions differ")
    pts = np.stack(g.mesh(), axis=-1)
    return ComplexField(g, params.evaluate(pts), params.space)


def sample_cone_maximizer(params: ConeExpParams, grid: Grid) -> WaveSplitPair:
    """Frequency pair (f+^, f-^) on grid.dual(); the xi=0 cell uses the
    regularized |xi| of freq_magnitude."""
    dual = grid.dual()
    if dual.dim != params.dim:
        raise ValueError("grid and params dimensions differ")
    r = freq_magnitude(dual)
    xi = np.stack(dual.mesh(), axis=-1)
    A, b = params.A, params.b
    fp = r ** -0.5 * np.exp(A * r + xi @ b + params.C)
    fm = r ** -0.5 * np.exp(np.conj(A) * r - xi @ np.conj(b) + params.D)
    return WaveSplitPair(ComplexField(dual, fp, FREQUENCY), ComplexField(dual, fm, FREQUENCY))


def _plus_wave(A, b, C, dim, t, x, derivative=False):
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != dim:
        raise ValueError(f"x must end in an axis of length {dim}")
    s = A + 1j * t
    y = x - 1j * b
    z = s * s + np.sum(y * y, axis=-1)
    if dim == 3:
        u = np.exp(C) / (2 * math.pi ** 2) / z
        if derivative:
            return -2j * s * u / z
        return u
    bad = (z.imag == 0) & (z.real <= 0)
    if np.any(bad):
        raise BranchError("square-root argument reaches the negative real axis")
    w = np.sqrt(z)
    u = np.exp(C) / (2 * math.pi) / w
    if derivative:
        return -1j * s * u / z
    return u


def eval_plus_wave_closed_form(params: ConeExpParams, t, x, derivative: bool = False):
    """u+(t, x) (or its t-derivative) for the (+)-profile of params.
    x has shape (..., n) and broadcasts against t."""
    return _plus_wave(params.A, params.b, params.C, params.dim, t, x, derivative)


def eval_minus_wave_closed_form(params: ConeExpParams, t, x, derivative: bool = False):
    # conj(u-) is the (+)-wave with constant conj(D)
    return np.conj(_plus_wave(params.A, params.b, np.conj(params.D), params.dim, t, x, derivative))


def eval_wave_closed_form(params: ConeExpParams, t, x, derivative: bool = False):
    return (eval_plus_wave_closed_form(params, t, x, derivative)
            + eval_minus_wave_closed_form(params, t, x, derivative))


def cone_physical_data(params: ConeExpParams, grid: Grid) -> tuple:
    """Physical data (f, g) = (u(0), du/dt(0)) sampled on grid."""
    pts = np.stack(grid.mesh(), axis=-1)
    f = eval_wave_closed_form(params, 0.0, pts)
    g = eval_wave_closed_form(params, 0.0, pts, derivative=True)
    return ComplexField(grid, f), ComplexField(grid, g)


def poly_inequality_gap(X, Y, which: str = "quartic"):
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if np.any(X < 0) or np.any(Y < 0):
        raise DomainError("X and Y must be nonnegative")
    if which == "quartic":
        gap = 1.5 * (X + Y) ** 2 - (X ** 2 + Y ** 2 + 4 * X * Y)
    elif which == "sextic":
        lhs = (X ** 6 + Y ** 6 + 9 * X ** 4 * Y ** 2 + 9 * X ** 2 * Y ** 4
               + 6 * X ** 5 * Y + 6 * X * Y ** 5 + 18 * X ** 3 * Y ** 3)
        gap = 6.25 * (X ** 2 + Y ** 2) ** 3 - lhs
    else:
        raise ValueError(f"which must be 'quartic' or 'sextic', got {which!r}")
    return gap if gap.ndim else float(gap)


def cone_data_norm(params: ConeExpParams) -> float:
    """||(f, g)|| in H^(1/2) x H^(-1/2), i.e. sqrt(2(|f+|^2 + |f-|^2))."""
    n = params.dim
    a = 2 * params.A.real
    beta2 = 4 * float(np.dot(params.b.real, params.b.real))
    if n == 3:
        F = 4 * math.pi / (a * a - beta2)
    else:
        F = 2 * math.pi / math.sqrt(a * a - beta2)
    c = F / (2 * math.pi) ** n
    return math.sqrt(2 * c * (math.exp(2 * params.C.real) + math.exp(2 * params.D.real)))


def _quad(fn, lo, hi, rtol, log):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        val, err = integrate.quad(fn, lo, hi, epsabs=0.0, epsrel=rtol, limit=400)
    if caught:
        log.append(str(caught[-1].message).splitlines()[0])
    return val, err


def wave_quotient_closed_form(params: ConeExpParams, rtol: float = 1e-10) -> QuotientReport:
    """Quotient from the explicit solution by radial quadrature over (t, |x|).

    Imaginary parts of A and b only translate u in (t, x) and drop out of the
    integral.  A rotation plus a boost (which preserves the quotient and the
    constants C, D) removes Re(b), leaving a real negative A.
    """
    n = params.dim
    p = exponent(WAVE, n)
    beta = np.linalg.norm(params.b.real)
    a = -math.sqrt(params.A.real ** 2 - beta ** 2)
    eC, eD = np.exp(params.C), np.exp(params.D)
    omega = 4 * math.pi if n == 3 else 2 * math.pi

    if n == 3:
        kp, km = eC / (2 * math.pi ** 2), eD / (2 * math.pi ** 2)

        def dens(t, r):
            z = a * a - t * t + r * r + 2j * a * t
            return abs(kp / z + km / np.conj(z)) ** p * omega * r * r
    else:
        kp, km = eC / (2 * math.pi), eD / (2 * math.pi)

        def dens(t, r):
            w = np.sqrt(complex(a * a - t * t + r * r, 2 * a * t))
            return abs(kp / w + km / np.conj(w)) ** p * omega * r

    log: list = []

    def inner(t):
        s = abs(t)
        v1, e1 = _quad(lambda r: dens(t, r), 0.0, s, rtol, log) if s > 0 else (0.0, 0.0)
        v2, e2 = _quad(lambda r: dens(t, r), s, np.inf, rtol, log)
        return v1 + v2

    total, err = 0.0, 0.0
    for lo, hi in ((-np.inf, 0.0), (0.0, np.inf)):
        v, e = _quad(inner, lo, hi, rtol, log)
        total += v
        err += e
    lp = total ** (1.0 / p)
    norm = cone_data_norm(params)
    q = lp / norm
    return QuotientReport(
        equation=WAVE, dim=n, p=p, lp_norm=lp, data_norm=norm, quotient=q,
        method="closed_form", error_estimate=q * (err / total) / p,
        extras={"converged": not log, "quadrature_messages": log[:5], "rtol": rtol,
                "reduced_A": a},
    )


def wave3_quotient_closed_form(params: ConeExpParams, rtol: float = 1e-10) -> QuotientReport:
    if params.dim != 3:
        raise UnsupportedCase("wave3_quotient_closed_form needs n=3 parameters")
    return wave_quotient_closed_form(params, rtol)


def wave2_quotient_closed_form(params: ConeExpParams, rtol: float = 1e-10) -> QuotientReport:
    if params.dim != 2:
        raise UnsupportedCase("wave2_quotient_closed_form needs n=2 parameters")
    return wave_quotient_closed_form(params, rtol)
