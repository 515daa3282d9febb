import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from strichartz.errors import BoundaryMassError, ZeroModeError
from strichartz.grid import (
    FREQUENCY, ComplexField, Grid, SpaceTimeField, forward_fourier, freq_magnitude,
    inverse_fourier, l2_norm, lp_spacetime_norm, sobolev_half_norm,
)
from strichartz.propagators import EvolutionSpec, schrodinger_evolve, wave_split


def gaussian(grid):
    return ComplexField(grid, np.exp(-grid.radius() ** 2))


def random_field(grid, rng):
    return ComplexField(grid, rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape))


def test_grid_spacing_and_shape():
    g = Grid.cube(2, 64, 5.0)
    assert g.shape == (64, 64)
    assert g.spacing == pytest.approx((10.0 / 64, 10.0 / 64))
    x = g.axes()[0]
    assert x[0] == -5.0 and x[-1] == pytest.approx(5.0 - 10.0 / 64)


@pytest.mark.parametrize("n", [1, 3, 7])
def test_grid_rejects_odd_or_tiny_axes(n):
    with pytest.raises(ValueError):
        Grid.cube(1, n, 1.0)


def test_field_length_checked():
    with pytest.raises(ValueError):
        ComplexField(Grid.cube(1, 8, 1.0), np.zeros(7))


def test_spacetime_times_uniform():
    g = Grid.cube(1, 8, 1.0)
    with pytest.raises(ValueError):
        SpaceTimeField(g, [0.0, 0.1, 0.3], np.zeros((3, 8)))


def test_fourier_of_zero():
    g = Grid.cube(2, 16, 3.0)
    assert np.all(forward_fourier(ComplexField(g, np.zeros(g.shape))).values == 0)
    assert np.all(inverse_fourier(ComplexField(g.dual(), np.zeros(g.shape), FREQUENCY)).values == 0)


def test_gaussian_transform():
    g = Grid.cube(1, 1024, 20.0)
    fh = forward_fourier(gaussian(g))
    xi = fh.grid.axes()[0]
    assert np.max(np.abs(fh.values - math.sqrt(math.pi) * np.exp(-xi ** 2 / 4))) < 1e-10


def test_gaussian_inverse_transform():
    g = Grid.cube(1, 1024, 20.0)
    xi = g.dual().axes()[0]
    f = inverse_fourier(ComplexField(g.dual(), math.sqrt(math.pi) * np.exp(-xi ** 2 / 4), FREQUENCY))
    assert np.max(np.abs(f.values - np.exp(-g.axes()[0] ** 2))) < 1e-10


def test_impulse_transform_is_flat():
    g = Grid.cube(1, 64, 4.0)
    v = np.zeros(64)
    v[g.zero_index()] = 1 / g.spacing[0]
    fh = forward_fourier(ComplexField(g, v))
    assert np.max(np.abs(fh.values - 1)) < 1e-12


@settings(max_examples=25, deadline=None)
@given(dim=st.integers(1, 3), seed=st.integers(0, 2 ** 31))
def test_round_trip_and_plancherel(dim, seed):
    rng = np.random.default_rng(seed)
    g = Grid.cube(dim, {1: 64, 2: 16, 3: 8}[dim], float(rng.uniform(1, 10)))
    f = random_field(g, rng)
    fh = forward_fourier(f)
    back = inverse_fourier(fh)
    assert np.max(np.abs(back.values - f.values)) < 1e-12 * np.max(np.abs(f.values)) * 10
    ratio = l2_norm(fh) / l2_norm(f)
    assert ratio == pytest.approx((2 * math.pi) ** (dim / 2), rel=1e-10)


def test_l2_gaussian():
    g = Grid.cube(1, 1024, 20.0)
    assert l2_norm(gaussian(g)) == pytest.approx((math.pi / 2) ** 0.25, rel=1e-12)
    assert l2_norm(ComplexField(g, np.zeros(g.shape))) == 0


def test_lp_zero_and_box():
    g = Grid.cube(2, 32, 4.0)
    t = np.linspace(0, 1, 5)
    assert lp_spacetime_norm(SpaceTimeField(g, t, np.zeros((5, 32, 32))), 4) == 0
    x, y = g.mesh()
    box = ((np.abs(x) < 1) & (np.abs(y) < 1)).astype(float)
    u = SpaceTimeField(g, t, np.broadcast_to(box, (5, 32, 32)))
    vol = box.sum() * g.cell_volume * 5 * 0.25
    assert lp_spacetime_norm(u, 4) == pytest.approx(vol ** 0.25, rel=1e-14)


def test_lp_boundary_mass():
    g = Grid.cube(1, 16, 1.0)
    u = SpaceTimeField(g, [0.0, 1.0], np.ones((2, 16)))
    with pytest.raises(BoundaryMassError):
        lp_spacetime_norm(u, 6)


def test_lp_homogeneity():
    rng = np.random.default_rng(3)
    g = Grid.cube(1, 32, 2.0)
    v = np.zeros((4, 32), dtype=complex)
    v[:, 8:24] = rng.normal(size=(4, 16))
    u = SpaceTimeField(g, [0.0, 0.1, 0.2, 0.3], v)
    c = 2.5 - 1.5j
    scaled = SpaceTimeField(g, u.times, c * v)
    assert lp_spacetime_norm(scaled, 6) == pytest.approx(abs(c) * lp_spacetime_norm(u, 6), rel=1e-14)


def _gaussian_l6(T):
    # |u(t,x)| = (1+16t^2)^(-1/4) exp(-x^2/(1+16t^2)) for data exp(-x^2)
    def inner(t):
        s = 1 + 16 * t * t
        return integrate.quad(lambda x: s ** -1.5 * math.exp(-6 * x * x / s), -np.inf, np.inf,
                              epsabs=0, epsrel=1e-13)[0]
    return integrate.quad(inner, -T, T, epsabs=0, epsrel=1e-12)[0] ** (1 / 6)


def test_lp_gaussian_solution():
    spec = EvolutionSpec("schrodinger", 1, 256, 1.0, tail_correction=False)
    u = schrodinger_evolve(gaussian(Grid.cube(1, 1024, 20.0)), spec)
    assert lp_spacetime_norm(u, 6) == pytest.approx(_gaussian_l6(1.0), rel=5e-4)


def test_lp_refinement_increments_shrink():
    exact = _gaussian_l6(1.0)
    errs = []
    for nt in (16, 32, 64, 128):
        spec = EvolutionSpec("schrodinger", 1, nt, 1.0, tail_correction=False)
        u = schrodinger_evolve(gaussian(Grid.cube(1, 1024, 20.0)), spec)
        errs.append(lp_spacetime_norm(u, 6))
    inc = np.abs(np.diff(errs))
    assert np.all(np.diff(inc) < 0)
    # midpoint rule: the error falls by about 4 per halving
    assert abs(errs[-1] - exact) < abs(errs[-2] - exact) / 3


def test_sobolev_zero():
    g = Grid.cube(2, 16, 3.0)
    z = ComplexField(g, np.zeros(g.shape))
    assert sobolev_half_norm(z, z) == 0


def test_sobolev_cone_profile():
    # f^ = |xi|^(-1/2) e^(-|xi|) in 3D: ||f||^2 = (2pi)^-3 int |xi| |f^|^2 = (2pi)^-3 4pi int r^2 e^(-2r) dr
    g = Grid.cube(3, 128, 20.0)
    dual = g.dual()
    r = freq_magnitude(dual)
    fh = ComplexField(dual, r ** -0.5 * np.exp(-dual.radius()), FREQUENCY)
    zero = ComplexField(dual, np.zeros(dual.shape), FREQUENCY)
    radial = integrate.quad(lambda s: 4 * math.pi * s * s * math.exp(-2 * s), 0, np.inf)[0]
    exact = math.sqrt(radial / (2 * math.pi) ** 3)
    assert sobolev_half_norm(fh, zero) == pytest.approx(exact, rel=1e-3)


def test_sobolev_zero_mode_rejected():
    g = Grid.cube(2, 16, 3.0)
    f = ComplexField(g, np.zeros(g.shape))
    gg = ComplexField(g, np.exp(-g.radius() ** 2))
    with pytest.raises(ZeroModeError):
        sobolev_half_norm(f, gg)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2 ** 31))
def test_parallelogram_law(seed):
    rng = np.random.default_rng(seed)
    g = Grid.cube(2, 32, 5.0)
    x, y = g.mesh()
    c = rng.uniform(-1, 1, 4)
    f = ComplexField(g, np.exp(-((x - c[0]) ** 2 + (y - c[1]) ** 2)) * (1 + 1j * c[2]))
    # derivative-type g has no zero mode
    gg = ComplexField(g, (x - c[3]) * np.exp(-(x - c[3]) ** 2 - y ** 2))
    pair = wave_split(f, gg)
    lhs = sobolev_half_norm(f, gg) ** 2
    c0 = pair.dual.cell_volume / (2 * math.pi) ** 2
    rhs = 2 * c0 * (np.sum(np.abs(pair.f_plus.values) ** 2) + np.sum(np.abs(pair.f_minus.values) ** 2))
    assert lhs == pytest.approx(rhs, rel=1e-10)
