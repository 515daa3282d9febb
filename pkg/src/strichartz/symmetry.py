"""Symmetry groups acting on maximizer coefficients.

G (Schrodinger) acts on frequency-form ExpQuadraticParams, L (wave) on
ConeExpParams.  Conventions, for a solution u:

    translate(t0, x0)   u(t + t0, x + x0)
    parabolic_dilate    u(lam^2 t, lam x)
    dilate              u(lam t, lam x)
    rotate(R)           u(t, R^T x)
    galilean(v)         f^(xi) -> f^(xi - v/2)
    boost(a)            Lorentz boost of rapidity a along the first axis
    scale(mu), phase    constant multiples
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .closed_forms import ConeExpParams, ExpQuadraticParams, canonical_cone_constant, CONE_SLACK
from .errors import ConstraintViolation
from .grid import PHYSICAL

COMPARE_TOL = 1e-8
IDENTITY_TOL = 1e-10

G_KINDS = ("translate", "parabolic_dilate", "scale", "rotate", "phase", "galilean")
L_KINDS = ("translate", "dilate", "scale", "rotate", "phase", "boost")


def _rotation_ok(R) -> np.ndarray:
    R = np.asarray(R, dtype=float)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise ValueError("rotation must be a square matrix")
    if not np.allclose(R @ R.T, np.eye(R.shape[0]), atol=1e-10) or not abs(np.linalg.det(R) - 1) < 1e-10:
        raise ValueError("rotation must be orthogonal with determinant 1")
    return R


@dataclass(frozen=True)
class Generator:
    group: str
    kind: str
    value: tuple

    def __post_init__(self):
        kinds = G_KINDS if self.group == "G" else L_KINDS if self.group == "L" else None
        if kinds is None or self.kind not in kinds:
            raise ValueError(f"unknown {self.group} generator {self.kind!r}")
        if self.kind in ("parabolic_dilate", "dilate", "scale") and not self.value[0] > 0:
            raise ValueError(f"{self.kind} needs a positive parameter")
        if self.kind == "rotate":
            _rotation_ok(self.value[0])

    def is_identity(self, tol: float = IDENTITY_TOL) -> bool:
        k, v = self.kind, self.value
        if k in ("parabolic_dilate", "dilate", "scale"):
            return abs(v[0] - 1) <= tol
        if k == "rotate":
            R = np.asarray(v[0])
            return bool(np.max(np.abs(R - np.eye(R.shape[0]))) <= tol)
        return all(np.max(np.abs(np.atleast_1d(x)), initial=0.0) <= tol for x in v)

    def to_dict(self) -> dict:
        def conv(x):
            a = np.asarray(x, dtype=float)
            return a.tolist() if a.ndim else float(a)
        return {"group": self.group, "kind": self.kind, "value": [conv(x) for x in self.value]}


def GGenerator(kind: str, *value) -> Generator:
    return Generator("G", kind, tuple(value))


def LGenerator(kind: str, *value) -> Generator:
    return Generator("L", kind, tuple(value))


def apply_G(params: ExpQuadraticParams, gen: Generator) -> ExpQuadraticParams:
    """Action on frequency-form coefficients; physical params are mapped
    through the frequency form and returned in their own space."""
    if gen.group != "G":
        raise ValueError("apply_G needs a G generator")
    if params.space == PHYSICAL:
        return apply_G(params.to_frequency(), gen).to_physical()
    A, b, C, n = params.A, params.b, params.C, params.dim
    k, v = gen.kind, gen.value
    if k == "translate":
        t0, x0 = v
        return params.replace(A=A + 1j * t0, b=b + 1j * np.asarray(x0, dtype=float))
    if k == "parabolic_dilate":
        lam = v[0]
        return params.replace(A=A / lam ** 2, b=b / lam, C=C - n * math.log(lam))
    if k == "scale":
        return params.replace(C=C + math.log(v[0]))
    if k == "rotate":
        return params.replace(b=np.asarray(v[0]) @ b)
    if k == "phase":
        return params.replace(C=C + 1j * v[0])
    # galilean: f^(xi) -> f^(xi - v/2)
    w = np.asarray(v[0], dtype=float)
    return params.replace(b=b - A * w, C=C + A * (w @ w) / 4 - (b @ w) / 2)


def apply_L(params: ConeExpParams, gen: Generator) -> ConeExpParams:
    if gen.group != "L":
        raise ValueError("apply_L needs an L generator")
    A, b, C, D, n = params.A, params.b, params.C, params.D, params.dim
    k, v = gen.kind, gen.value
    if k == "translate":
        t0, x0 = v
        return params.replace(A=A + 1j * t0, b=b + 1j * np.asarray(x0, dtype=float))
    if k == "dilate":
        s = (n - 1) * math.log(v[0])
        return params.replace(A=A / v[0], b=b / v[0], C=C - s, D=D - s)
    if k == "scale":
        s = math.log(v[0])
        return params.replace(C=C + s, D=D + s)
    if k == "rotate":
        return params.replace(b=np.asarray(v[0]) @ b)
    if k == "phase":
        tp, tm = v
        return params.replace(C=C + 1j * tp, D=D + 1j * tm)
    a = v[0]
    ch, sh = math.cosh(a), math.sinh(a)
    nb = b.copy()
    nb[0] = -A * sh + b[0] * ch
    A2 = A * ch - b[0] * sh
    excess = np.linalg.norm(nb.real) + A2.real
    if excess >= 0:
        # boosts preserve the open cone; only rounding can land here
        if excess > CONE_SLACK * max(1.0, abs(A2)):
            raise ConstraintViolation(f"boost left the cone by {excess:.3e}")
        return ConeExpParams.unchecked(A2, nb, C, D, n)
    return ConeExpParams(A2, nb, C, D, n)


def apply(params, gen: Generator):
    return apply_G(params, gen) if gen.group == "G" else apply_L(params, gen)


def apply_word(params, word):
    for g in word:
        params = apply(params, g)
    return params


def rotation_to_axis(u: np.ndarray) -> np.ndarray:
    """Rotation R (det 1) with R u = |u| e1; identity when u = 0."""
    u = np.asarray(u, dtype=float)
    n = u.size
    nu = np.linalg.norm(u)
    if nu <= 1e-14:
        return np.eye(n)
    e = u / nu
    if e[0] > 1 - 1e-15:
        return np.eye(n)
    # complete e to an orthonormal frame; rows of R are the frame
    M = np.eye(n)
    M[:, 0] = e
    Q, _ = np.linalg.qr(M)
    if Q[:, 0] @ e < 0:
        Q[:, 0] = -Q[:, 0]
    R = Q.T
    if np.linalg.det(R) < 0:
        R[-1] = -R[-1]
    return R


@dataclass(frozen=True)
class Canonical:
    canonical: object
    trail: list

    def replay_error(self, params) -> float:
        got = apply_word(params, self.trail)
        if isinstance(got, ExpQuadraticParams) and got.space != self.canonical.space:
            got = got.to_frequency()
        return coefficient_distance(got, self.canonical)


def coefficient_distance(p, q) -> float:
    a = np.asarray(p.as_tuple(), dtype=complex)
    b = np.asarray(q.as_tuple(), dtype=complex)
    if a.shape != b.shape:
        return math.inf
    return float(np.max(np.abs(a - b)))


def canonicalize_G(params: ExpQuadraticParams) -> Canonical:
    """Reduce to the frequency form of exp(-|x|^2): (-1/4, 0, (n/2) log pi)."""
    n = params.dim
    if params.space == PHYSICAL:
        params = params.to_frequency()
    trail = []

    def step(g):
        nonlocal params
        trail.append(g)
        params = apply_G(params, g)

    step(GGenerator("translate", -params.A.imag, -params.b.imag))
    step(GGenerator("phase", -params.C.imag))
    step(GGenerator("rotate", np.eye(n)))
    step(GGenerator("galilean", (params.b / params.A).real))
    step(GGenerator("parabolic_dilate", math.sqrt(-4 * params.A.real)))
    step(GGenerator("scale", math.exp(0.5 * n * math.log(math.pi) - params.C.real)))
    return Canonical(params, trail)


def canonicalize_L(params: ConeExpParams) -> Canonical:
    """Reduce to A = -1, b = 0, C = c_n (log 2 pi^2 or log 2 pi); D keeps its
    offset Re(D) - Re(C) from C, which the group cannot change."""
    n = params.dim
    trail = []

    def step(g):
        nonlocal params
        trail.append(g)
        params = apply_L(params, g)

    step(LGenerator("translate", -params.A.imag, -params.b.imag))
    step(LGenerator("phase", -params.C.imag, -params.D.imag))
    step(LGenerator("rotate", rotation_to_axis(params.b.real)))
    step(LGenerator("boost", math.atanh(params.b[0].real / params.A.real)))
    step(LGenerator("dilate", -params.A.real))
    step(LGenerator("scale", math.exp(canonical_cone_constant(n) - params.C.real)))
    return Canonical(params, trail)


def canonicalize(params) -> Canonical:
    return canonicalize_L(params) if isinstance(params, ConeExpParams) else canonicalize_G(params)


def orbit_equivalent(p, q, group: str | None = None, tol: float = COMPARE_TOL) -> bool:
    if group is not None:
        want = ConeExpParams if group == "L" else ExpQuadraticParams
        if not (isinstance(p, want) and isinstance(q, want)):
            raise ValueError(f"parameters do not belong to group {group}")
    if type(p) is not type(q) or len(p.b) != len(q.b):
        return False
    return coefficient_distance(canonicalize(p).canonical, canonicalize(q).canonical) <= tol


def random_generator(group: str, dim: int, rng, mild: bool = True, common_phase: bool = False) -> Generator:
    """A random generator with parameters in a moderate range."""
    kinds = G_KINDS if group == "G" else L_KINDS
    kind = kinds[rng.integers(len(kinds))]
    s = 0.3 if mild else 1.0
    make = GGenerator if group == "G" else LGenerator
    if kind == "translate":
        return make(kind, rng.uniform(-s, s), rng.uniform(-s, s, dim))
    if kind in ("parabolic_dilate", "dilate"):
        return make(kind, math.exp(rng.uniform(-s, s)))
    if kind == "scale":
        return make(kind, math.exp(rng.uniform(-1, 1)))
    if kind == "rotate":
        Q, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
        if np.linalg.det(Q) < 0:
            Q[:, 0] = -Q[:, 0]
        return make(kind, Q)
    if kind == "phase":
        if group == "G":
            return make(kind, rng.uniform(-np.pi, np.pi))
        tp = rng.uniform(-np.pi, np.pi)
        return make(kind, tp, tp if common_phase else rng.uniform(-np.pi, np.pi))
    if kind == "galilean":
        return make(kind, rng.uniform(-s, s, dim))
    return make(kind, rng.uniform(-s, s))


def random_word(group: str, dim: int, rng, length: int = 5, **kw) -> list:
    return [random_generator(group, dim, rng, **kw) for _ in range(length)]
