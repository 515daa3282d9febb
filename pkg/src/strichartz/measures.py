"""Self-convolutions of delta measures on the paraboloid and the forward cone.

Closed forms come from reducing a point (tau, xi) to (tau*, 0).  The oracle is
independent of that reduction: vector deltas are removed by substitution, the
remaining scalar delta is replaced by a triangular bump of width eps, and the
result is integrated on a grid and extrapolated in eps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, RegionError, UnsupportedCase

PARABOLOID = "paraboloid"
CONE = "cone_plus"
UNIT = "unit"
INVERSE_NORM = "inverse_norm"

EPSILONS = (0.1, 0.05, 0.025)
MARGIN = 10.0
NOISE_FLOOR = 1e-3
BLOCK = 1 << 20
ORDER_SLACK = 1e-6  # rounding in log2 of an exact halving ratio


@dataclass(frozen=True)
class FreqPoint:
    tau: float
    xi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "tau", float(self.tau))
        object.__setattr__(self, "xi", np.atleast_1d(np.asarray(self.xi, dtype=float)).ravel())

    @property
    def dim(self) -> int:
        return self.xi.size

    @property
    def xi_norm(self) -> float:
        return float(np.linalg.norm(self.xi))


@dataclass(frozen=True)
class MeasureSpec:
    surface: str
    dim: int
    weight: str
    factors: int

    def __post_init__(self):
        s = CONE if self.surface in ("cone", CONE) else self.surface
        object.__setattr__(self, "surface", s)
        if (s, self.dim, self.weight, self.factors) not in _CLOSED:
            raise UnsupportedCase(f"unsupported measure combination {self}")

    @property
    def key(self) -> tuple:
        return (self.surface, self.dim, self.weight, self.factors)


def _tau_star(key, pt: FreqPoint) -> float:
    surface, dim, _, k = key
    x2 = float(np.dot(pt.xi, pt.xi))
    if surface == PARABOLOID:
        return pt.tau - x2 / k
    d = pt.tau * pt.tau - x2
    return math.copysign(math.sqrt(abs(d)), d) if pt.tau > 0 else -1.0


def region_distance(spec: MeasureSpec, pt: FreqPoint) -> float:
    """How far tau sits above the region boundary at fixed xi."""
    if pt.dim != spec.dim:
        raise ValueError(f"point has dimension {pt.dim}, spec needs {spec.dim}")
    if spec.surface == PARABOLOID:
        return pt.tau - float(np.dot(pt.xi, pt.xi)) / spec.factors
    return pt.tau - pt.xi_norm


def _require_interior(spec, pt):
    if not region_distance(spec, pt) > 0:
        raise RegionError(f"point tau={pt.tau}, xi={pt.xi.tolist()} is not inside the support region")


_CLOSED = {
    (PARABOLOID, 2, UNIT, 2): lambda ts: math.pi / 2,
    (PARABOLOID, 1, UNIT, 3): lambda ts: math.pi / math.sqrt(3),
    (CONE, 3, INVERSE_NORM, 2): lambda ts: 2 * math.pi,
    (CONE, 2, INVERSE_NORM, 2): lambda ts: 2 * math.pi / ts,
    (CONE, 2, INVERSE_NORM, 3): lambda ts: 4 * math.pi ** 2,
}

SUPPORTED = [MeasureSpec(*k) for k in _CLOSED]


def symmetry_reduce(spec: MeasureSpec, pt: FreqPoint) -> FreqPoint:
    _require_interior(spec, pt)
    return FreqPoint(_tau_star(spec.key, pt), np.zeros(spec.dim))


def convolution_closed_form(spec: MeasureSpec, pt: FreqPoint) -> float:
    red = symmetry_reduce(spec, pt)
    return float(_CLOSED[spec.key](red.tau))


def triangle(s, eps):
    return np.maximum(0.0, 1.0 - np.abs(s) / eps) / eps


def _axis(lo, hi, h):
    n = max(2, int(math.ceil((hi - lo) / h)))
    step = (hi - lo) / n
    return lo + (np.arange(n) + 0.5) * step, step


def _grid_sum(fn, ax0, ax1) -> float:
    """Midpoint sum of fn(X0, X1) on the product of two axes, blockwise."""
    (a0, h0), (a1, h1) = ax0, ax1
    rows = max(1, BLOCK // a1.size)
    total = 0.0
    for i in range(0, a0.size, rows):
        X0, X1 = np.meshgrid(a0[i:i + rows], a1, indexing="ij")
        total += float(np.sum(fn(X0, X1)))
    return total * h0 * h1


def _parab_pair(pt, eps):
    tau, xi = pt.tau, pt.xi
    ts = tau - xi @ xi / 2
    R = math.sqrt((ts + eps) / 2)
    h = eps / (8 * 4 * R)
    c = xi / 2
    ax = [_axis(c[j] - R - h, c[j] + R + h, h) for j in range(2)]

    def fn(e1, e2):
        g = e1 ** 2 + e2 ** 2 + (xi[0] - e1) ** 2 + (xi[1] - e2) ** 2
        return triangle(tau - g, eps)
    return _grid_sum(fn, *ax)


def _parab_triple(pt, eps):
    tau, x = pt.tau, float(pt.xi[0])
    ts = tau - x * x / 3
    R = math.sqrt(ts + eps)
    h = eps / (8 * 6 * R)
    ax = [_axis(x / 3 - R - h, x / 3 + R + h, h) for _ in range(2)]

    def fn(e1, e2):
        return triangle(tau - e1 ** 2 - e2 ** 2 - (x - e1 - e2) ** 2, eps)
    return _grid_sum(fn, *ax)


def _cone3_pair(pt, eps):
    # cylindrical coordinates about the xi axis: eta = (rho cos phi, rho sin phi, z)
    tau, s = pt.tau, pt.xi_norm
    R = (tau + eps) / 2
    h = eps / 16
    az = _axis(s / 2 - R - h, s / 2 + R + h, h)
    ar = _axis(0.0, R + h, h)

    def fn(z, rho):
        d1 = np.sqrt(rho ** 2 + z ** 2)
        d2 = np.sqrt(rho ** 2 + (s - z) ** 2)
        return triangle(tau - d1 - d2, eps) * 2 * np.pi * rho / (d1 * d2)
    return _grid_sum(fn, az, ar)


def _cone2_pair(pt, eps):
    tau, xi = pt.tau, pt.xi
    R = (tau + eps) / 2
    h = eps / 16
    c = xi / 2
    ax = [_axis(c[j] - R - h, c[j] + R + h, h) for j in range(2)]

    def fn(e1, e2):
        d1 = np.hypot(e1, e2)
        d2 = np.hypot(xi[0] - e1, xi[1] - e2)
        return triangle(tau - d1 - d2, eps) / (d1 * d2)
    return _grid_sum(fn, *ax)


def _ellipse_bump(a, k, eps):
    """2 pi * int_k^inf triangle(a - s) ds / sqrt(s^2 - k^2), exactly.

    In elliptic coordinates with foci 0 and w (|w| = k), the weighted measure
    d eta / (|eta| |w - eta|) is d mu d nu and |eta| + |w - eta| = k cosh mu;
    this is the resulting integral with s = k cosh mu.
    """
    k = np.maximum(k, 1e-300)

    def K(s):
        return np.arccosh(np.maximum(s / k, 1.0))

    def M(s):
        return np.sqrt(np.maximum(s * s - k * k, 0.0))

    lo, hi = a - eps, a + eps
    left = (eps - a) * (K(a) - K(lo)) + (M(a) - M(lo))
    right = (eps + a) * (K(hi) - K(a)) - (M(hi) - M(a))
    return 2 * np.pi * (left + right) / eps ** 2


def _cone2_triple(pt, eps):
    # eta1 in polar coordinates: d eta1 / |eta1| = d r d theta
    tau, xi = pt.tau, pt.xi
    hr = eps / 8
    ar = _axis(0.0, tau + eps, hr)
    at = _axis(0.0, 2 * np.pi, eps / (8 * (tau + eps)))

    def fn(r, th):
        k = np.hypot(xi[0] - r * np.cos(th), xi[1] - r * np.sin(th))
        return _ellipse_bump(tau - r, k, eps)
    return _grid_sum(fn, ar, at)


_ORACLES = {
    (PARABOLOID, 2, UNIT, 2): _parab_pair,
    (PARABOLOID, 1, UNIT, 3): _parab_triple,
    (CONE, 3, INVERSE_NORM, 2): _cone3_pair,
    (CONE, 2, INVERSE_NORM, 2): _cone2_pair,
    (CONE, 2, INVERSE_NORM, 3): _cone2_triple,
}


def mollified_value(spec: MeasureSpec, pt: FreqPoint, eps: float) -> float:
    """The convolution with its scalar delta replaced by a width-eps bump."""
    _require_interior(spec, pt)
    return _ORACLES[spec.key](pt, eps)


@dataclass(frozen=True)
class OracleResult:
    value: float
    error: float
    order: float | None
    epsilons: tuple
    values: tuple = field(default=())


def oracle_epsilons(spec: MeasureSpec, pt: FreqPoint, epsilons=EPSILONS) -> tuple:
    """The eps ladder, shrunk uniformly if pt sits closer than MARGIN * eps to the boundary."""
    d = region_distance(spec, pt)
    if not d > 0:
        raise RegionError(f"point tau={pt.tau}, xi={pt.xi.tolist()} is not inside the support region")
    scale = min(1.0, d / (MARGIN * max(epsilons)))
    return tuple(e * scale for e in epsilons)


def richardson(epsilons, values, noise_floor: float = NOISE_FLOOR) -> OracleResult:
    """Extrapolate a halving eps ladder to eps = 0."""
    if len(values) != 3:
        raise ValueError("need three levels")
    v1, v2, v3 = values
    d1, d2 = v1 - v2, v2 - v3
    scale = abs(v3) if v3 else 1.0
    if max(abs(d1), abs(d2)) <= noise_floor * scale:
        # no resolvable eps dependence
        return OracleResult(v3, max(abs(d1), abs(d2)), None, tuple(epsilons), tuple(values))
    if d1 * d2 <= 0:
        raise ConvergenceError(f"differences change sign: {d1:.3e}, {d2:.3e}")
    order = math.log2(d1 / d2)
    if order < 1 - ORDER_SLACK:
        raise ConvergenceError(f"observed order {order:.2f} below 1")
    ext = v3 - d2 / (2 ** order - 1)
    return OracleResult(ext, abs(ext - v3), order, tuple(epsilons), tuple(values))


def convolution_oracle(spec: MeasureSpec, pt: FreqPoint, epsilon=None) -> OracleResult:
    """Mollified-quadrature value extrapolated to eps -> 0.

    epsilon: None for the default ladder, a scalar for the ladder
    (e, e/2, e/4), or an explicit three-term sequence."""
    if epsilon is None:
        eps = oracle_epsilons(spec, pt)
    elif np.ndim(epsilon) == 0:
        eps = (float(epsilon), epsilon / 2, epsilon / 4)
    else:
        eps = tuple(float(e) for e in epsilon)
    vals = [mollified_value(spec, pt, e) for e in eps]
    return richardson(eps, vals)


def random_interior_points(spec: MeasureSpec, count: int, rng, tau_range=(1.5, 3.0),
                           margin: float = 1.0) -> list:
    """Points with tau in tau_range and region distance at least margin."""
    pts = []
    while len(pts) < count:
        tau = rng.uniform(*tau_range)
        xi = rng.normal(size=spec.dim)
        if spec.surface == PARABOLOID:
            rmax = math.sqrt(max(spec.factors * (tau - margin), 0.0))
        else:
            rmax = max(tau - margin, 0.0)
        xi *= rng.uniform(0, rmax) / max(np.linalg.norm(xi), 1e-300)
        pt = FreqPoint(tau, xi)
        if region_distance(spec, pt) >= margin:
            pts.append(pt)
    return pts


def paraboloid_shift(pt: FreqPoint, v, factors: int) -> FreqPoint:
    """Image of pt when every factor's frequency is moved by v."""
    v = np.asarray(v, dtype=float)
    return FreqPoint(pt.tau + 2 * v @ pt.xi + factors * (v @ v), pt.xi + factors * v)


def lorentz_boost(pt: FreqPoint, a: float) -> FreqPoint:
    """Boost of rapidity a along the first frequency axis."""
    xi = pt.xi.copy()
    tau = pt.tau * math.cosh(a) + xi[0] * math.sinh(a)
    xi[0] = pt.tau * math.sinh(a) + pt.xi[0] * math.cosh(a)
    return FreqPoint(tau, xi)
