"""Direct maximization of the Strichartz quotient.

The unknown is the frequency-space data: f^ for Schrodinger, (f+^, f-^) for
the wave equation.  With J = sum_k w_k int |u(t_k)|^p dx and N the squared data
norm, the objective is Phi = J / N^(p/2) = Q^p.  Gradients are taken in the
Plancherel inner product <a, b> = Re sum conj(a) b dxi / (2 pi)^n, which is the
physical L^2 inner product, so they are physical L^2 gradients in disguise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .closed_forms import ExpQuadraticParams, sharp_constant
from .errors import StagnationError, VanishingSampleError
from .feq import ExpFamilyFit, fit_exponential
from .grid import (
    FREQUENCY, PHYSICAL, ComplexField, Grid, _checkerboard, _global_sign,
    boundary_mask, freq_magnitude, outer_band_mask, to_frequency, to_physical,
)
from .propagators import CASES, SCHRODINGER, EvolutionSpec, WaveSplitPair, time_integral, wave_split

ARMIJO = 1e-4
MAX_BACKTRACKS = 50
WINDOW = 1e-3
DUAL_SLICES = 32


@dataclass(frozen=True)
class AscentConfig:
    max_iters: int = 500
    step: float = 1.0
    step_decay: float = 0.5
    grad_tol: float = 1e-6
    seed: int = 0
    stall_iters: int = 20
    stall_tol: float = 1e-13
    band: float | None = None     # frequency cutoff |xi| <= band on the unknown
    regauge: bool = True          # gauge moves along the symmetry orbit
    drift: float = 0.05           # tolerated relative drift before a gauge move
    width: float | None = None    # reference spectral rms width; None keeps the seed's

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be positive")
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")
        if not 0 < self.step_decay < 1:
            raise ValueError("step_decay must lie in (0, 1)")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")


class Functional:
    """Phi = Q^p on a fixed dual grid and time sampling.

    For Schrodinger with a tail requested, |t| > T is not closed by the c/t^2
    model but computed exactly: completing the square in the propagator gives

        int_{|t|>T} int |u|^p dx dt
            = 4 (4 pi)^-(n+2) 2^n int_{|s|<1/4T} int |F[e^(is|y|^2) f]|^p dxi ds,

    a short window of chirped transforms of f.  Its gradient is consistent
    with its value, which the closure's is not."""

    def __init__(self, spec: EvolutionSpec, dual: Grid, band: float | None = None,
                 dual_slices: int = DUAL_SLICES):
        if dual.dim != spec.dim:
            raise ValueError("grid and spec dimensions differ")
        self.spec, self.dual, self.band = spec, dual, band
        self.band_mask = None if band is None else dual.radius() <= band
        self.grid = dual.dual()
        self.p = spec.p
        self.times = spec.times
        self.dual_tail = spec.equation == SCHRODINGER and spec.tail_correction
        if self.dual_tail:
            n = spec.dim
            self.weights = np.full(spec.n_times, spec.dt)
            S = 1.0 / (4 * spec.half_width)
            self.stimes = -S + (np.arange(dual_slices) + 0.5) * (2 * S / dual_slices)
            self.sweight = 4 * (4 * np.pi) ** -(n + 2) * 2 ** n * (2 * S / dual_slices)
            self.y2 = self.grid.radius() ** 2
        else:
            self.weights = spec.slice_weights()
        self.chk = _checkerboard(dual.shape)
        self.gs = _global_sign(dual.shape)
        self.dv = self.grid.cell_volume
        self.pl = dual.cell_volume / (2 * np.pi) ** dual.dim
        self.bmask = boundary_mask(dual.shape)
        self.amask = outer_band_mask(dual.shape)
        if spec.equation == SCHRODINGER:
            self.k2 = dual.radius() ** 2
            self.norm_weights = (1.0,)
        else:
            self.k = dual.radius()
            self.rinv = freq_magnitude(dual) ** -0.5
            self.norm_weights = (2.0, 2.0)

    @property
    def components(self) -> int:
        return len(self.norm_weights)

    def _fwd(self, v):
        return np.fft.fftn(v * self.chk) * self.chk * (self.gs * self.dv)

    def _inv(self, vh):
        return np.fft.ifftn(vh * self.chk) * self.chk * (self.gs / self.dv)

    def multipliers(self, t):
        if self.components == 1:
            return (np.exp(1j * t * self.k2),)
        ph = np.exp(1j * t * self.k)
        return (self.rinv * ph, self.rinv * np.conj(ph))

    def inner(self, a, b) -> float:
        return float(np.real(np.sum(np.conj(a) * b)) * self.pl)

    def norm2(self, V) -> float:
        return sum(c * self.inner(v, v) for c, v in zip(self.norm_weights, V))

    def slices(self, V):
        for t in self.times:
            yield sum(m * v for m, v in zip(self.multipliers(t), V))

    def evaluate(self, V, gradient: bool = False) -> dict:
        p = self.p
        g = np.empty(self.times.size)
        bnd = 0.0
        grads = [np.zeros(self.dual.shape, dtype=complex) for _ in V] if gradient else None
        for k, uh in enumerate(self.slices(V)):
            u = self._inv(uh)
            a = np.abs(u)
            ap = a ** p
            g[k] = ap.sum() * self.dv
            bnd += ap[self.bmask].sum() * self.dv
            if gradient:
                G = self._fwd(a ** (p - 2) * u) * (p * self.weights[k])
                for j, m in enumerate(self.multipliers(self.times[k])):
                    grads[j] += np.conj(m) * G
        J = float(self.weights @ g)
        h = None
        if self.dual_tail:
            h, hb = self._dual_window(V[0], grads)
            J += self.sweight * float(h.sum())
            bnd += hb
        N = self.norm2(V)
        phi = J / N ** (p / 2)
        gsum = g.sum() + (h.sum() if h is not None else 0.0)
        out = {"phi": phi, "J": J, "N": N, "g": g, "h": h,
               "boundary_fraction": bnd / gsum if gsum > 0 else 0.0}
        if gradient:
            out["grad"] = [self.project(gj / N ** (p / 2) - (p * J / N ** (p / 2 + 1)) * c * v)
                           for gj, c, v in zip(grads, self.norm_weights, V)]
        return out

    def _dual_window(self, v, grads):
        """Slices int |F[e^(is|y|^2) f]|^p dxi of the exact tail; adds the
        tail's gradient into grads when given."""
        p = self.p
        f = self._inv(v)
        dk = self.dual.cell_volume
        h = np.empty(self.stimes.size)
        bnd = 0.0
        for j, sj in enumerate(self.stimes):
            chirp = np.exp(1j * sj * self.y2)
            w = self._fwd(chirp * f)
            a = np.abs(w)
            ap = a ** p
            h[j] = ap.sum() * dk
            bnd += ap[self.bmask].sum() * dk
            if grads is not None:
                # adjoint of v -> fwd(chirp inv(v)) is v -> fwd(conj(chirp) inv(v))
                r = self._fwd(np.conj(chirp) * self._inv(a ** (p - 2) * w))
                grads[0] += r * (p * self.sweight * (2 * np.pi) ** self.dual.dim)
        return h, bnd

    def project(self, v):
        return v if self.band_mask is None else v * self.band_mask

    def time_centroid(self, res: dict) -> float:
        wg = self.weights * res["g"]
        return float(wg @ self.times / wg.sum())

    def space_centroid(self, V) -> np.ndarray:
        a = sum(np.abs(self._inv(v)) ** 2 for v in V)
        x = self.grid.mesh()
        return np.array([float(np.sum(xi * a) / a.sum()) for xi in x])

    def translate(self, V, t0: float, x0) -> list:
        """Data of u(t + t0, x + x0)."""
        shift = np.exp(1j * sum(c * k for c, k in zip(x0, self.dual.mesh())))
        if self.components == 1:
            return [V[0] * np.exp(1j * t0 * self.k2) * shift]
        ph = np.exp(1j * t0 * self.k)
        return [V[0] * ph * shift, V[1] * np.conj(ph) * shift]

    def freq_moments(self, V):
        """Spectral centroid and rms width per axis of sum |v|^2."""
        a = sum(np.abs(v) ** 2 for v in V)
        k = self.dual.mesh()
        tot = a.sum()
        mean = np.array([float(np.sum(ki * a) / tot) for ki in k])
        var = sum(float(np.sum((ki - m) ** 2 * a) / tot) for ki, m in zip(k, mean))
        return mean, math.sqrt(var / self.dual.dim)

    def resample(self, V, lam: float, shift) -> list:
        """v(lam xi + shift) for each component, evaluated exactly from the
        physical samples by a direct sum along each axis."""
        xs, ks, hs = self.grid.axes(), self.dual.axes(), self.grid.spacing
        out = []
        for v in V:
            f = self._inv(v)
            for d, (x, k, h) in enumerate(zip(xs, ks, hs)):
                E = np.exp(-1j * np.outer(lam * k + shift[d], x)) * h
                f = np.moveaxis(np.tensordot(E, f, axes=([1], [d])), 0, d)
            out.append(self.project(f))
        return out

    def normalize(self, V) -> list:
        n = math.sqrt(self.norm2(V))
        return [v / n for v in V]

    def alias_fraction(self, V) -> float:
        tot = sum(np.sum(np.abs(v) ** 2) for v in V)
        return float(sum(np.sum(np.abs(v[self.amask]) ** 2) for v in V) / tot) if tot else 0.0

    def quotient_error(self, res: dict, V) -> float:
        """Error estimate of Q = phi^(1/p) in the style of the quotient reports."""
        if self.dual_tail:
            return self._dual_error(res, V)
        ti = time_integral(res["g"], self.spec)
        total = ti["total"]
        q = res["phi"] ** (1 / self.p)
        rel = (ti["err"] + res["boundary_fraction"] * total) / total + self.alias_fraction(V)
        return q * rel / self.p

    def _dual_error(self, res: dict, V) -> float:
        # interleaved-rule spread on both windows
        def spread(x, w):
            return 0.5 * abs(2 * w * (x[0::2].sum() - x[1::2].sum()))
        total = res["J"]
        err = spread(res["g"], self.spec.dt) + self.sweight * 0.5 * abs(
            2 * (res["h"][0::2].sum() - res["h"][1::2].sum()))
        q = res["phi"] ** (1 / self.p)
        rel = err / total + res["boundary_fraction"] + self.alias_fraction(V)
        return q * rel / self.p

    # conversions between user-facing fields and component arrays
    def unpack(self, data) -> list:
        if self.components == 1:
            fh = to_frequency(data)
            self._check_grid(fh.grid)
            return [self.project(fh.values.copy())]
        pair = data if isinstance(data, WaveSplitPair) else wave_split(*data)
        self._check_grid(pair.dual)
        return [self.project(pair.f_plus.values.copy()), self.project(pair.f_minus.values.copy())]

    def pack(self, V):
        if self.components == 1:
            return ComplexField(self.dual, V[0], FREQUENCY)
        return WaveSplitPair(ComplexField(self.dual, V[0], FREQUENCY),
                             ComplexField(self.dual, V[1], FREQUENCY))

    def _check_grid(self, dual):
        if dual != self.dual:
            raise ValueError("data lives on a different grid")


def functional_for(data, spec: EvolutionSpec, band: float | None = None) -> Functional:
    if isinstance(data, WaveSplitPair):
        dual = data.dual
    elif isinstance(data, tuple):
        dual = to_frequency(data[0]).grid
    else:
        dual = to_frequency(data).grid
    return Functional(spec, dual, band)


def _to_space_of(data, V, fun: Functional):
    """Gradient components in the representation of data."""
    if fun.components == 1:
        gh = ComplexField(fun.dual, V[0], FREQUENCY)
        return to_physical(gh) if data.space == PHYSICAL else gh
    return fun.pack(V)


def quotient_gradient(f, spec: EvolutionSpec):
    """L^2 gradient of Q^p.  A physical field gets a physical gradient, a
    frequency field a frequency one; wave data gets a WaveSplitPair."""
    fun = functional_for(f, spec)
    V = fun.unpack(f)
    res = fun.evaluate(V, gradient=True)
    return _to_space_of(f, res["grad"], fun)


def quotient_value(f, spec: EvolutionSpec) -> float:
    """Q computed by the optimizer's own evaluation path (no diagnostics raised)."""
    fun = functional_for(f, spec)
    return fun.evaluate(fun.unpack(f))["phi"] ** (1 / spec.p)


def relative_gradient(fun: Functional, V, res: dict) -> float:
    """|grad Phi| |f| / (p Phi); zero exactly at critical points, scale free."""
    gn = math.sqrt(sum(fun.inner(g, g) for g in res["grad"]))
    return gn * math.sqrt(res["N"]) / (fun.p * res["phi"])


@dataclass
class AscentTrace:
    quotients: list
    evaluations: list
    final: object
    final_physical: object
    grad_norm: float
    iterations: int
    converged: bool
    error_estimate: float
    fit: ExpFamilyFit | None = None
    params: object = None
    notes: list = field(default_factory=list)
    steps: list = field(default_factory=list)        # (start, accepted) per ascent step
    gauge_moves: list = field(default_factory=list)  # (iteration, before, after)

    quotient: float = math.nan                       # at the final iterate

    def rows(self) -> list:
        return [{"iteration": i, "quotient": q} for i, q in enumerate(self.quotients)]


def maximize_quotient(f0, spec: EvolutionSpec, cfg: AscentConfig = AscentConfig(),
                      fit: bool = True) -> AscentTrace:
    """Normalized gradient ascent with Armijo backtracking.

    The search direction is d = grad Phi * N^(p/2+1) / (p J), for which a unit
    step is the fixed-point map f <- (N / p J) grad J."""
    fun = functional_for(f0, spec, cfg.band)
    V = fun.unpack(f0)
    n0 = math.sqrt(fun.norm2(V))
    if n0 == 0:
        raise ValueError("initial data must be nonzero")
    V = [v / n0 for v in V]
    width = cfg.width if cfg.width is not None else fun.freq_moments(V)[1]
    res = fun.evaluate(V, gradient=True)
    quotients = [res["phi"] ** (1 / fun.p)]
    evaluations = [(quotients[0], fun.quotient_error(res, V))]
    stall = 0
    converged = False
    it = 0
    notes = []
    steps, gauge_moves = [], []
    for it in range(1, cfg.max_iters + 1):
        rg = relative_gradient(fun, V, res)
        if rg < cfg.grad_tol:
            converged = True
            it -= 1
            break
        scale = res["N"] ** (fun.p / 2 + 1) / (fun.p * res["J"])
        D = [g * scale for g in res["grad"]]
        slope = sum(fun.inner(g, d) for g, d in zip(res["grad"], D))
        s = cfg.step
        for _ in range(MAX_BACKTRACKS):
            W = [v + s * d for v, d in zip(V, D)]
            nw = math.sqrt(fun.norm2(W))
            W = [w / nw for w in W]
            trial = fun.evaluate(W, gradient=True)
            evaluations.append((trial["phi"] ** (1 / fun.p), fun.quotient_error(trial, W)))
            if trial["phi"] >= res["phi"] + ARMIJO * s * slope:
                break
            s *= cfg.step_decay
        else:
            raise StagnationError(f"backtracking failed {MAX_BACKTRACKS} times at iteration {it}")
        gain = trial["phi"] - res["phi"]
        steps.append((res["phi"] ** (1 / fun.p), trial["phi"] ** (1 / fun.p)))
        V, res = W, trial
        quotients.append(res["phi"] ** (1 / fun.p))
        if cfg.regauge:
            V, res, moved = _regauge(fun, V, res, cfg.drift, width)
            if moved:
                q = res["phi"] ** (1 / fun.p)
                gauge_moves.append((it, quotients[-1], q))
                evaluations.append((q, fun.quotient_error(res, V)))
        stall = stall + 1 if gain <= cfg.stall_tol * res["phi"] else 0
        if stall >= cfg.stall_iters:
            converged = True
            notes.append("quotient stagnated")
            break
    final = fun.pack(V)
    phys = to_physical(final) if fun.components == 1 else final.reconstruct()
    trace = AscentTrace(
        quotients=quotients, evaluations=evaluations, final=final, final_physical=phys,
        grad_norm=relative_gradient(fun, V, res), iterations=it, converged=converged,
        error_estimate=fun.quotient_error(res, V), notes=notes, steps=steps,
        gauge_moves=gauge_moves, quotient=res["phi"] ** (1 / fun.p))
    if fit:
        try:
            trace.fit, trace.params = fit_maximizer_family(final, spec)
        except VanishingSampleError as e:
            notes.append(f"fit skipped: {e}")
    return trace


def _regauge(fun: Functional, W, res: dict, drift: float, width: float | None):
    """Gauge move: bring the iterate back to a reference position on its orbit.

    Uses exact symmetries only: frequency dilation and (Schrodinger) Galilean
    shift to hold the spectral centroid at 0 and the spectral width at width,
    then time and space translation to hold the space-time centroid at 0.  This
    keeps the iterate at the scale the grid and time window resolve, since
    discretization error is not orbit invariant.  Returns (W, res, moved)."""
    moved = False
    if width is not None:
        mean, s = fun.freq_moments(W)
        if fun.components > 1:
            mean = np.zeros_like(mean)
        if abs(math.log(s / width)) > drift or np.linalg.norm(mean) > drift * width:
            W = fun.normalize(fun.resample(W, s / width, mean))
            res = fun.evaluate(W, gradient=True)
            moved = True
    tc = fun.time_centroid(res)
    xc = fun.space_centroid(W)
    t0 = tc if abs(tc) > drift * fun.spec.half_width else 0.0
    x0 = np.where(np.abs(xc) > drift * np.asarray(fun.grid.extent), xc, 0.0)
    if t0 != 0.0 or np.any(x0):
        W = [fun.project(w) for w in fun.translate(W, t0, x0)]
        res = fun.evaluate(W, gradient=True)
        moved = True
    return W, res, moved


def _window(values: np.ndarray, rel: float):
    a = np.abs(values)
    return a >= rel * a.max()


def _window_fit(field: ComplexField, model: str, rel: float, pre=None, skip_origin: bool = False):
    """Fit log of field on the window |field| >= rel max |field|, weighted by
    |field|^2, visiting the window in snake order."""
    from .feq import snake_order
    vals = field.values if pre is None else pre * field.values
    mask = _window(vals, rel)
    if skip_origin:
        # the xi=0 cell carries a regularized |xi|, not the model's 0
        mask[field.grid.zero_index()] = False
    order = snake_order(field.grid.shape)
    sel = order[mask.ravel()[order]]
    pts = np.stack([m.ravel() for m in field.grid.mesh()], axis=1)[sel]
    v = vals.ravel()[sel]
    return fit_exponential(v, model, points=pts, weights=np.abs(v) ** 2)


def fit_maximizer_family(final, spec: EvolutionSpec | None = None, window: float = WINDOW):
    """Fit the exponential maximizer family to a field.

    Schrodinger: a physical (or frequency) ComplexField is fitted by
    exp(A|x|^2 + b.x + C) in physical space.  Wave: the weighted profiles
    |xi|^(1/2) f+-^ of a WaveSplitPair are fitted by exp(A|xi| + b.xi + C);
    the reported residual is the larger of the two fits.
    Returns (fit, params) with params an ExpQuadraticParams or None."""
    if isinstance(final, WaveSplitPair):
        w = freq_magnitude(final.dual) ** 0.5
        fp = _window_fit(final.f_plus, "cone", window, w, skip_origin=True)
        fm = _window_fit(final.f_minus, "cone", window, w, skip_origin=True)
        fit = ExpFamilyFit(fp.A, fp.b, fp.C, max(fp.residual, fm.residual), "cone")
        return fit, None
    f = to_physical(final)
    fit = _window_fit(f, "quadratic", window)
    try:
        params = ExpQuadraticParams(fit.A, fit.b, fit.C, PHYSICAL)
    except Exception:
        params = None
    return fit, params


@dataclass
class ScanTable:
    rows: list
    base: float
    curvature: list
    r2: list


def perturbation_scan(base, spec: EvolutionSpec, directions, amplitudes) -> ScanTable:
    """Quotient along base + eps * h for each direction h (scaled to the data
    norm of base), or along eps -> direction(eps) for callable directions
    (orbit curves).  A quadratic q(eps) - q(0) = -c eps^2 is fitted per direction."""
    fun = functional_for(base, spec)
    V0 = fun.unpack(base)
    n0 = math.sqrt(fun.norm2(V0))
    q0 = fun.evaluate(V0)["phi"] ** (1 / fun.p)
    rows, curv, r2 = [], [], []
    amps = np.asarray(amplitudes, dtype=float)
    for i, h in enumerate(directions):
        if callable(h):
            Vs = [fun.unpack(h(e)) for e in amps]
        else:
            H = fun.unpack(h)
            nh = math.sqrt(fun.norm2(H))
            Vs = [[v + e * n0 / nh * w for v, w in zip(V0, H)] for e in amps]
        dq = []
        for e, V in zip(amps, Vs):
            q = fun.evaluate(V)["phi"] ** (1 / fun.p)
            rows.append({"direction": i, "epsilon": float(e), "quotient": q, "delta": q - q0})
            dq.append(q - q0)
        dq = np.asarray(dq)
        x = amps ** 2
        c = -float(x @ dq / (x @ x)) if x @ x > 0 else 0.0
        ss = float(np.sum((dq - dq.mean()) ** 2))
        r2.append(1 - float(np.sum((dq + c * x) ** 2)) / ss if ss > 0 else 1.0)
        curv.append(c)
    return ScanTable(rows, q0, curv, r2)


def random_smooth_field(grid: Grid, rng, bumps: int = 3, width=(0.6, 1.2), spread: float = 0.5) -> ComplexField:
    """Sum of a few Gaussian bumps with random complex weights and mild linear phases."""
    x = np.stack(grid.mesh(), axis=-1)
    v = np.zeros(grid.shape, dtype=complex)
    for _ in range(bumps):
        c = rng.uniform(-spread, spread, grid.dim)
        s = rng.uniform(*width)
        k = rng.normal(scale=0.5, size=grid.dim)
        amp = rng.normal() + 1j * rng.normal()
        d = x - c
        v += amp * np.exp(-np.sum(d * d, axis=-1) / (2 * s * s) + 1j * (d @ k))
    return ComplexField(grid, v)


def random_wave_data(grid: Grid, rng, **kw) -> tuple:
    """Physical (f, g) made of smooth random bumps; g has zero mean."""
    f = random_smooth_field(grid, rng, **kw)
    g = random_smooth_field(grid, rng, **kw)
    # derivative of a bump has no zero mode, which keeps the H^(-1/2) norm tame
    gh = to_frequency(g)
    r = gh.grid.radius()
    gh = gh.with_values(gh.values * np.minimum(r, 1.0))
    return f, to_physical(gh)


def tripwire_bound(equation: str, dim: int, error_estimate: float) -> float:
    return sharp_constant(equation, dim).value + 2 * error_estimate


def evaluate_with_error(data, spec: EvolutionSpec) -> tuple:
    """(Q, error estimate) through the optimizer's evaluation path."""
    fun = functional_for(data, spec)
    V = fun.unpack(data)
    res = fun.evaluate(V)
    return res["phi"] ** (1 / fun.p), fun.quotient_error(res, V)


# Default ascent setups per case.  Schrodinger widths and windows are paired so
# that T = 1/width: the time window and the exact tail window then resolve the
# maximizer equally well.  Wave setups are exploratory.
SETUPS = {
    "schr1": {"grid": (1, 512, 10.0), "times": (128, 0.5), "band": 16.0, "width": 2.0},
    "schr2": {"grid": (2, 64, 6.0), "times": (64, 1 / math.sqrt(2)), "band": 8.0, "width": math.sqrt(2)},
    "wave2": {"grid": (2, 48, 8.0), "times": (32, 2.0), "band": None, "width": None},
    "wave3": {"grid": (3, 24, 6.0), "times": (16, 2.0), "band": None, "width": None},
}


def default_setup(case: str, **overrides):
    """(grid, spec, cfg) for a case name such as "schr1" or "wave3"."""
    if case not in SETUPS:
        raise ValueError(f"unknown case {case!r}; choose from {sorted(SETUPS)}")
    s = SETUPS[case]
    eq, dim = CASES[case]
    grid = Grid.cube(*s["grid"])
    spec = EvolutionSpec(eq, dim, *s["times"])
    kw = {"band": s["band"], "width": s["width"]}
    kw.update(overrides)
    return grid, spec, AscentConfig(**kw)
