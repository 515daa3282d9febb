"""Product-type functional equations

    f(x1) ... f(xk) = F(sum phi(xj), sum xj)

with phi(x) = |x|^2 (Schrodinger kinds) or |x| (cone kinds), plus the planar
and spatial constructions behind their solution and an exponential fitter.

For the cone kinds f is the weighted profile |xi|^(1/2) f+^(xi); see
weighted_profile.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import DegenerateError, InvalidRectangle, VanishingSampleError
from .grid import ComplexField

SAMPLE_FLOOR = 1e-30
NON_MEMBER_THRESHOLD = 1e-3


@dataclass(frozen=True)
class FeqKind:
    name: str
    arity: int
    dim: int
    phi: str
    unique: bool = True

    def phi_of(self, x: np.ndarray) -> np.ndarray:
        r2 = np.sum(x * x, axis=-1)
        return r2 if self.phi == "quadratic" else np.sqrt(r2)


KINDS = {
    "schr1": FeqKind("schr1", 3, 1, "quadratic"),
    "schr2": FeqKind("schr2", 2, 2, "quadratic"),
    "wave2": FeqKind("wave2", 3, 2, "cone"),
    "wave3": FeqKind("wave3", 2, 3, "cone"),
    # x^2 + y^2 and x + y fix {x, y}, so any f solves this one
    "pair1d": FeqKind("pair1d", 2, 1, "quadratic", unique=False),
}


def get_kind(kind) -> FeqKind:
    if isinstance(kind, FeqKind):
        return kind
    try:
        return KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown functional equation kind {kind!r}") from None


def as_callable(f):
    """Callables pass through; a ComplexField becomes a linear interpolant."""
    if not isinstance(f, ComplexField):
        return f
    axes = f.grid.axes()
    re = RegularGridInterpolator(axes, f.values.real, bounds_error=True)
    im = RegularGridInterpolator(axes, f.values.imag, bounds_error=True)

    def g(x):
        x = np.asarray(x, dtype=float)
        # 1D callables take points of shape (...,)
        shape = x.shape if f.grid.dim == 1 else x.shape[:-1]
        pts = x.reshape(-1, f.grid.dim)
        return (re(pts) + 1j * im(pts)).reshape(shape)
    return g


def _fx(f, x, dim):
    """Evaluate f on points of shape (..., dim); 1D callables get (...,)."""
    return np.asarray(f(x[..., 0] if dim == 1 else x))


def feq_residual(kind, f, F, tuples) -> float:
    """max |prod f(xj) - F(sum phi, sum x)| / (1 + |F|) over tuples of shape
    (m, arity, dim).  F takes (s, v) with v of shape (m,) in 1D, (m, dim) else."""
    k = get_kind(kind)
    f = as_callable(f)
    X = np.asarray(tuples, dtype=float).reshape(-1, k.arity, k.dim)
    lhs = np.prod(_fx(f, X, k.dim), axis=1)
    s = np.sum(k.phi_of(X), axis=1)
    v = np.sum(X, axis=1)
    rhs = np.asarray(F(s, v[:, 0] if k.dim == 1 else v))
    return float(np.max(np.abs(lhs - rhs) / (1 + np.abs(rhs))))


def random_tuples(kind, m: int, rng, scale: float = 1.0) -> np.ndarray:
    k = get_kind(kind)
    return rng.normal(scale=scale, size=(m, k.arity, k.dim))


def exponential_solution(kind, A, b, C) -> tuple:
    """(f, F) with f = exp(A phi(x) + b.x + C) and the matching F."""
    k = get_kind(kind)
    b = np.atleast_1d(np.asarray(b, dtype=complex))

    def f(x):
        x = np.asarray(x, dtype=float)
        xv = x[..., None] if k.dim == 1 else x
        return np.exp(A * k.phi_of(xv) + xv @ b + C)

    def F(s, v):
        vv = np.asarray(v, dtype=float)
        vv = vv[..., None] if k.dim == 1 else vv
        return np.exp(A * s + vv @ b + k.arity * C)
    return f, F


def pair1d_solution(f) -> tuple:
    """Any f with F(s, t) = f((t + w)/2) f((t - w)/2), w = sqrt(2s - t^2)."""
    def F(s, t):
        w = np.sqrt(np.maximum(2 * s - t * t, 0.0))
        return f((t + w) / 2) * f((t - w) / 2)
    return f, F


def weighted_profile(fhat):
    """x -> |x|^(1/2) fhat(x), the form in which cone profiles solve the equations."""
    def g(x):
        x = np.asarray(x, dtype=float)
        return np.sqrt(np.linalg.norm(x, axis=-1)) * fhat(x)
    return g


def _H(v):
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def square_map(x, y) -> tuple:
    """Opposite vertices p, q of the square with diagonal x y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    m, h = (x + y) / 2, _H((x - y) / 2)
    return m + h, m - h


def ellipsoid_map(x, y, tol: float = 1e-12) -> tuple:
    """p on the line through 0 and y with p + q = x + y and |p| + |q| = |x| + |y|."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    nx = np.linalg.norm(x, axis=-1)
    ny = np.linalg.norm(y, axis=-1)
    cross = np.linalg.norm(np.cross(x, y), axis=-1)
    if np.any(cross <= tol * nx * ny):
        raise DegenerateError("x and y must be linearly independent")
    xy = np.sum(x * y, axis=-1)
    lam = (xy - nx * ny) / (xy + nx * ny + 2 * ny ** 2)
    p = lam[..., None] * y
    return p, x + y - p


def ellipsoid_jacobians(x, y, h: float = 1e-6) -> tuple:
    """det dP/dy and det dQ/dy of the ellipsoid map by central differences;
    x, y of shape (m, 3)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    JP = np.empty(x.shape[:-1] + (3, 3))
    JQ = np.empty_like(JP)
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        p1, q1 = ellipsoid_map(x, y + e)
        p0, q0 = ellipsoid_map(x, y - e)
        JP[..., :, k] = (p1 - p0) / (2 * h)
        JQ[..., :, k] = (q1 - q0) / (2 * h)
    return np.linalg.det(JP), np.linalg.det(JQ)


def independent_pairs(m: int, rng, margin: float = 0.5, ratio: float = 2.0) -> tuple:
    """m pairs (x, y) in R^3 with sin(angle) >= margin and |x|/|y| in
    [1/ratio, ratio], norms in [1/2, 2].  Near-parallel pairs or very unequal
    norms make P degenerate (P = lam y with lam -> 0)."""
    xs, ys, have = [], [], 0
    while have < m:
        k = 2 * (m - have) + 16
        u = rng.normal(size=(k, 3))
        v = rng.normal(size=(k, 3))
        x = u / np.linalg.norm(u, axis=1)[:, None] * rng.uniform(0.5, 2.0, (k, 1))
        y = v / np.linalg.norm(v, axis=1)[:, None] * rng.uniform(0.5, 2.0, (k, 1))
        nx, ny = np.linalg.norm(x, axis=1), np.linalg.norm(y, axis=1)
        sin = np.linalg.norm(np.cross(x, y), axis=1) / (nx * ny)
        ok = (sin >= margin) & (nx <= ratio * ny) & (ny <= ratio * nx)
        xs.append(x[ok])
        ys.append(y[ok])
        have += int(ok.sum())
    return np.concatenate(xs)[:m], np.concatenate(ys)[:m]


def rectangle_residual(f, rectangles, tol: float = 1e-10) -> float:
    """max |f(a) f(c) - f(b) f(d)| over vertex quadruples (a, b, c, d)."""
    f = as_callable(f)
    R = np.asarray(rectangles, dtype=float).reshape(-1, 4, 2)
    a, b, c, d = (R[:, i] for i in range(4))
    u, w = a - b, c - b
    size = 1.0 + np.max(np.abs(R), axis=(1, 2))
    if np.any(np.abs(np.sum(u * w, axis=-1)) > tol * size ** 2):
        raise InvalidRectangle("adjacent sides are not orthogonal")
    if np.any(np.max(np.abs(u - (d - c)), axis=-1) > tol * size):
        raise InvalidRectangle("opposite sides are not parallel translates")
    return float(np.max(np.abs(f(a) * f(c) - f(b) * f(d)), initial=0.0))


def random_rectangles(m: int, rng, scale: float = 1.0) -> np.ndarray:
    b = rng.normal(scale=scale, size=(m, 2))
    u = rng.normal(scale=scale, size=(m, 2))
    w = _H(u) * rng.normal(scale=1.0, size=(m, 1))
    return np.stack([b + u, b, b + w, b + u + w], axis=1)


def cauchy_residual(g, pairs) -> float:
    """max |g(x) g(y) - g(x + y)| over pairs of shape (m, 2, dim)."""
    P = np.asarray(pairs, dtype=float)
    x, y = P[:, 0], P[:, 1]
    return float(np.max(np.abs(g(x) * g(y) - g(x + y)), initial=0.0))


def minkowski(X, Y) -> float:
    X, Y = np.asarray(X, dtype=float), np.asarray(Y, dtype=float)
    return float(X[0] * Y[0] - X[1:] @ Y[1:])


@dataclass(frozen=True)
class NullDecomposition:
    U: np.ndarray
    V: np.ndarray
    a: float
    b: float
    c: float
    d: float

    def reconstruction_error(self, X, Y) -> float:
        eX = np.abs(self.a * self.U + self.b * self.V - X).max()
        eY = np.abs(self.c * self.U + self.d * self.V - Y).max()
        return float(max(eX, eY))


def _is_null(X, tol):
    return abs(X[0] - np.linalg.norm(X[1:])) <= tol * abs(X[0])


def _null_rays(X, W):
    """The two future null directions in span(X, W) (a timelike plane),
    normalized to tau = 1."""
    Q, _ = np.linalg.qr(np.stack([X, W], axis=1))
    eta = np.diag(np.r_[1.0, -np.ones(X.size - 1)])
    lam, vec = np.linalg.eigh(Q.T @ eta @ Q)
    # signature (1, 1): lam[0] < 0 < lam[1]
    s, t = vec[:, 1] / np.sqrt(lam[1]), vec[:, 0] / np.sqrt(-lam[0])
    out = []
    for c in (s + t, s - t):
        N = Q @ c
        N = N / N[0]
        N[1:] /= np.linalg.norm(N[1:])
        out.append(N)
    return out


def _other_ray(rays, R):
    return max(rays, key=lambda N: np.abs(N - R).max())


def cone_null_decompose(X, Y, tol: float = 1e-12) -> NullDecomposition:
    """Null U, V (tau = 1) spanning the plane of X and Y with X = aU + bV,
    Y = cU + dV and a, b, c, d >= 0."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    for Z in (X, Y):
        if not Z[0] > 0 or minkowski(Z, Z) < -tol * Z[0] ** 2:
            raise ValueError("vectors must lie in the closed forward cone")
    nX, nY = _is_null(X, tol), _is_null(Y, tol)
    scale = max(np.abs(X).max(), np.abs(Y).max())
    independent = np.linalg.matrix_rank(np.stack([X, Y]), tol=tol * scale) == 2
    if not independent:
        if nX and nY:
            raise DegenerateError("X and Y lie on the same null ray")
        # any plane through the common timelike direction will do
        e1 = np.zeros_like(X)
        e1[1] = 1.0
        U, V = _null_rays(X if not nX else Y, e1)
    elif nX and nY:
        U, V = X / X[0], Y / Y[0]
    elif nX:
        U = X / X[0]
        V = _other_ray(_null_rays(Y, X), U)
    elif nY:
        V = Y / Y[0]
        U = _other_ray(_null_rays(X, Y), V)
    else:
        U, V = _null_rays(X, Y)
    M = np.stack([U, V], axis=1)
    (a, b), *_ = np.linalg.lstsq(M, X, rcond=None)
    (c, d), *_ = np.linalg.lstsq(M, Y, rcond=None)
    if nX and independent:
        a, b = X[0], 0.0
    if nY and independent:
        c, d = 0.0, Y[0]

    def clip(z):
        return 0.0 if abs(z) < 10 * tol * scale else float(z)
    return NullDecomposition(U, V, clip(a), clip(b), clip(c), clip(d))


@dataclass(frozen=True)
class ExpFamilyFit:
    A: complex
    b: np.ndarray
    C: complex
    residual: float
    model: str = "quadratic"

    def member(self, threshold: float = NON_MEMBER_THRESHOLD) -> bool:
        return self.residual <= threshold


def snake_order(shape) -> np.ndarray:
    """Flat indices visiting a grid so that consecutive cells are neighbours."""
    idx = np.arange(int(np.prod(shape))).reshape(shape)
    if len(shape) == 1:
        return idx
    parts = []
    for i in range(shape[0]):
        sub = snake_order(shape[1:])
        if i % 2:
            sub = sub[::-1]
        parts.append(idx[i].ravel()[sub])
    return np.concatenate(parts)


def _fit_log(points, logs, phi, weights=None):
    n = points.shape[1]
    cols = [phi] + [points[:, j] for j in range(n)] + [np.ones(len(phi))]
    M = np.stack(cols, axis=1)
    w = np.ones(len(phi)) if weights is None else np.sqrt(weights)
    coef, *_ = np.linalg.lstsq(M * w[:, None], logs * w, rcond=None)
    resid = logs - M @ coef
    wn = w ** 2 / np.sum(w ** 2)
    rms = float(np.sqrt(np.sum(wn * np.abs(resid) ** 2)))
    return coef, rms


def fit_exponential(samples, kind="schr2", floor: float = SAMPLE_FLOOR, weights=None,
                    points=None) -> ExpFamilyFit:
    """Least-squares fit of log f to A phi(x) + b.x + C.

    samples: a ComplexField (visited in snake order), or values ordered along
    a connected path together with points of shape (m, n)."""
    model = get_kind(kind).phi if kind in KINDS else kind
    if isinstance(samples, ComplexField):
        order = snake_order(samples.grid.shape)
        pts = np.stack([m.ravel() for m in samples.grid.mesh()], axis=1)[order]
        vals = samples.values.ravel()[order]
        if weights is not None:
            weights = np.asarray(weights).ravel()[order]
    else:
        vals = np.asarray(samples, dtype=complex).ravel()
        pts = np.asarray(points, dtype=float).reshape(vals.size, -1)
    if np.any(np.abs(vals) < floor):
        raise VanishingSampleError(f"samples fall below {floor:g}; solutions never vanish")
    lg = np.log(np.abs(vals)) + 1j * np.unwrap(np.angle(vals))
    r2 = np.sum(pts * pts, axis=1)
    phi = r2 if model == "quadratic" else np.sqrt(r2)
    coef, rms = _fit_log(pts, lg, phi, weights)
    return ExpFamilyFit(complex(coef[0]), coef[1:-1].astype(complex), complex(coef[-1]), rms, model)
