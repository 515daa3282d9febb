"""Uniform grids, sampled fields and the continuum Fourier convention.

The forward transform approximates  f^(xi) = int f(x) exp(-i x.xi) dx  and the
inverse carries the (2 pi)^(-n) prefactor.  A grid spans [-L, L) on each axis
with N (even) points; its dual grid has the same N and half-width pi/h, so the
frequency samples are 2 pi k / (2L), k in [-N/2, N/2).  The zero frequency sits
at index N/2 on every axis.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BoundaryMassError, ZeroModeError

BOUNDARY_THRESHOLD = 1e-6
ZERO_MODE_THRESHOLD = 5e-2

PHYSICAL = "physical"
FREQUENCY = "frequency"


@dataclass(frozen=True)
class Grid:
    dim: int
    points: tuple
    extent: tuple

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        pts = tuple(int(p) for p in np.broadcast_to(self.points, (self.dim,)))
        ext = tuple(float(e) for e in np.broadcast_to(self.extent, (self.dim,)))
        for p in pts:
            if p < 2 or p % 2:
                raise ValueError(f"points per axis must be even and >= 2, got {p}")
        for e in ext:
            if not e > 0:
                raise ValueError(f"extent must be positive, got {e}")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "extent", ext)

    @classmethod
    def cube(cls, dim: int, n: int, extent: float) -> "Grid":
        return cls(dim, (n,) * dim, (extent,) * dim)

    @property
    def shape(self) -> tuple:
        return self.points

    @property
    def size(self) -> int:
        return int(np.prod(self.points))

    @property
    def spacing(self) -> tuple:
        return tuple(2.0 * e / p for e, p in zip(self.extent, self.points))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axes(self) -> list:
        return [-e + h * np.arange(p) for e, h, p in zip(self.extent, self.spacing, self.points)]

    def mesh(self) -> list:
        return np.meshgrid(*self.axes(), indexing="ij")

    def radius(self) -> np.ndarray:
        return np.sqrt(sum(x * x for x in self.mesh()))

    def dual(self) -> "Grid":
        """Grid of the frequency samples."""
        return Grid(self.dim, self.points, tuple(np.pi / h for h in self.spacing))

    def zero_index(self) -> tuple:
        return tuple(p // 2 for p in self.points)

    def meta(self) -> dict:
        return {"dim": self.dim, "points": list(self.points), "extent": list(self.extent)}


@dataclass(frozen=True)
class ComplexField:
    grid: Grid
    values: np.ndarray
    space: str = PHYSICAL

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.size != self.grid.size:
            raise ValueError(f"expected {self.grid.size} samples, got {v.size}")
        object.__setattr__(self, "values", v.reshape(self.grid.shape))
        if self.space not in (PHYSICAL, FREQUENCY):
            raise ValueError(f"unknown space {self.space!r}")

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def with_values(self, values) -> "ComplexField":
        return ComplexField(self.grid, values, self.space)

    def __mul__(self, c):
        return self.with_values(self.values * c)

    __rmul__ = __mul__


@dataclass(frozen=True)
class SpaceTimeField:
    grid: Grid
    times: np.ndarray
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise ValueError("need at least two sample times")
        dt = np.diff(t)
        if np.any(dt <= 0) or not np.allclose(dt, dt[0], rtol=1e-9, atol=0):
            raise ValueError("times must be strictly increasing and uniform")
        v = np.asarray(self.values, dtype=complex).reshape((t.size,) + self.grid.shape)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def slice(self, k: int) -> ComplexField:
        return ComplexField(self.grid, self.values[k])

    @property
    def slices(self) -> list:
        return [self.slice(k) for k in range(self.times.size)]


def _axis_signs(n: int) -> np.ndarray:
    return 1.0 - 2.0 * (np.arange(n) % 2)


def _checkerboard(shape) -> np.ndarray:
    s = np.ones(shape)
    for ax, n in enumerate(shape):
        sh = [1] * len(shape)
        sh[ax] = n
        s = s * _axis_signs(n).reshape(sh)
    return s


def _global_sign(shape) -> float:
    # exp(-i N pi / 2) per axis, N even
    return float(np.prod([(-1.0) ** (n // 2) for n in shape]))


def forward_fourier(f: ComplexField) -> ComplexField:
    """Samples of f^ on the dual grid (DFT times spacing^n, centred)."""
    if f.space != PHYSICAL:
        raise ValueError("forward_fourier expects a physical-space field")
    g = f.grid
    chk = _checkerboard(g.shape)
    out = np.fft.fftn(f.values * chk) * chk * (_global_sign(g.shape) * g.cell_volume)
    return ComplexField(g.dual(), out, FREQUENCY)


def inverse_fourier(fhat: ComplexField) -> ComplexField:
    if fhat.space != FREQUENCY:
        raise ValueError("inverse_fourier expects a frequency-space field")
    g = fhat.grid.dual()
    chk = _checkerboard(g.shape)
    out = np.fft.ifftn(fhat.values * chk) * chk * (_global_sign(g.shape) / g.cell_volume)
    return ComplexField(g, out, PHYSICAL)


def to_frequency(f: ComplexField) -> ComplexField:
    return f if f.space == FREQUENCY else forward_fourier(f)


def to_physical(f: ComplexField) -> ComplexField:
    return f if f.space == PHYSICAL else inverse_fourier(f)


def freq_magnitude(dual: Grid, regularize: bool = True) -> np.ndarray:
    """|xi| on a dual grid.  With regularize, the xi=0 cell gets half the
    smallest nonzero magnitude so that |xi|^(-s) weights stay finite."""
    r = dual.radius()
    if regularize:
        r[dual.zero_index()] = 0.5 * min(dual.spacing)
    return r


def boundary_mask(shape) -> np.ndarray:
    m = np.zeros(shape, dtype=bool)
    for ax in range(len(shape)):
        idx = [slice(None)] * len(shape)
        idx[ax] = 0
        m[tuple(idx)] = True
        idx[ax] = -1
        m[tuple(idx)] = True
    return m


def outer_band_mask(shape) -> np.ndarray:
    """Cells whose index is in the outer quarter of some axis on either side."""
    m = np.zeros(shape, dtype=bool)
    for ax, n in enumerate(shape):
        k = np.abs(np.arange(n) - n // 2)
        sh = [1] * len(shape)
        sh[ax] = n
        m = m | (k >= n // 4).reshape(sh)
    return m


def l2_norm(f: ComplexField) -> float:
    return float(np.sqrt(np.sum(np.abs(f.values) ** 2) * f.grid.cell_volume))


def lp_spacetime_norm(u: SpaceTimeField, p: float,
                      boundary_threshold: float = BOUNDARY_THRESHOLD) -> float:
    """Midpoint-rule L^p norm over space-time."""
    if p < 1:
        raise ValueError("p must be >= 1")
    a = np.abs(u.values) ** p
    total = float(np.sum(a))
    if total == 0.0:
        return 0.0
    mask = boundary_mask(u.grid.shape)
    frac = float(np.sum(a[:, mask])) / total
    if frac > boundary_threshold:
        raise BoundaryMassError(f"boundary cells carry {frac:.3e} of sum |u|^p")
    return (total * u.grid.cell_volume * u.dt) ** (1.0 / p)


def sobolev_half_norm(f: ComplexField, g: ComplexField, sign_pair=(0.5, -0.5),
                      zero_mode_threshold: float = ZERO_MODE_THRESHOLD) -> float:
    """(||f||^2_{H^s1} + ||g||^2_{H^s2})^(1/2), homogeneous norms, default s = +-1/2."""
    fh, gh = to_frequency(f), to_frequency(g)
    dual = fh.grid
    r = freq_magnitude(dual)
    s1, s2 = sign_pair
    wf = r ** (2 * s1) * np.abs(fh.values) ** 2
    wg = r ** (2 * s2) * np.abs(gh.values) ** 2
    _check_zero_mode(wg, dual, zero_mode_threshold)
    c = dual.cell_volume / (2 * np.pi) ** dual.dim
    return float(np.sqrt((wf.sum() + wg.sum()) * c))


def _check_zero_mode(weighted: np.ndarray, dual: Grid, threshold: float) -> None:
    tot = weighted.sum()
    if tot > 0 and weighted[dual.zero_index()] / tot > threshold:
        raise ZeroModeError(
            f"zero-frequency cell carries {weighted[dual.zero_index()] / tot:.3e} "
            "of the negative-order weight")
