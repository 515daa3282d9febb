import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from strichartz.errors import ConvergenceError, RegionError, UnsupportedCase
from strichartz.measures import (
    SUPPORTED, FreqPoint, MeasureSpec, convolution_closed_form, convolution_oracle, lorentz_boost,
    mollified_value, paraboloid_shift, random_interior_points, richardson, symmetry_reduce,
)

P2 = MeasureSpec("paraboloid", 2, "unit", 2)
P1 = MeasureSpec("paraboloid", 1, "unit", 3)
C3 = MeasureSpec("cone_plus", 3, "inverse_norm", 2)
C2 = MeasureSpec("cone_plus", 2, "inverse_norm", 2)
C2T = MeasureSpec("cone_plus", 2, "inverse_norm", 3)
CONSTANTS = {P2: math.pi / 2, P1: math.pi / math.sqrt(3), C3: 2 * math.pi, C2T: 4 * math.pi ** 2}


def rel(a, b):
    return abs(a - b) / abs(b)


def test_supported_set():
    assert len(SUPPORTED) == 5
    with pytest.raises(UnsupportedCase):
        MeasureSpec("paraboloid", 3, "unit", 2)
    with pytest.raises(UnsupportedCase):
        MeasureSpec("cone_plus", 3, "unit", 2)


@pytest.mark.parametrize("spec", list(CONSTANTS))
def test_closed_form_constants(spec):
    pt = random_interior_points(spec, 1, np.random.default_rng(0))[0]
    assert convolution_closed_form(spec, pt) == CONSTANTS[spec]


def test_cone2_pair_closed_form():
    assert convolution_closed_form(C2, FreqPoint(1.0, [0.0, 0.0])) == pytest.approx(2 * math.pi)
    assert convolution_closed_form(C2, FreqPoint(5.0, [3.0, 0.0])) == pytest.approx(2 * math.pi / 4)


def test_boundary_points_rejected():
    with pytest.raises(RegionError):
        convolution_closed_form(C3, FreqPoint(2.0, [2.0, 0.0, 0.0]))
    with pytest.raises(RegionError):
        symmetry_reduce(P2, FreqPoint(1.0, [1.0, 1.0]))
    with pytest.raises(RegionError):
        convolution_oracle(C2, FreqPoint(-1.0, [0.0, 0.0]))


def test_symmetry_reduce_examples():
    assert symmetry_reduce(P1, FreqPoint(4.0, [3.0])).tau == pytest.approx(1.0)
    assert symmetry_reduce(C3, FreqPoint(5.0, [3.0, 0.0, 0.0])).tau == pytest.approx(4.0)
    assert symmetry_reduce(P2, FreqPoint(3.0, [1.0, 1.0])).tau == pytest.approx(2.0)
    assert np.all(symmetry_reduce(C2, FreqPoint(5.0, [3.0, 0.0])).xi == 0)


def test_paraboloid_pair_oracle():
    res = convolution_oracle(P2, FreqPoint(2.0, [0.0, 0.0]), (0.1, 0.05, 0.025))
    assert abs(res.value - math.pi / 2) < 1e-2


def test_cone2_triple_oracle():
    res = convolution_oracle(C2T, FreqPoint(1.0, [0.0, 0.0]))
    assert rel(res.value, 4 * math.pi ** 2) < 2e-2


def test_cone2_ratio():
    a = convolution_oracle(C2, FreqPoint(2.0, [0.0, 0.0])).value
    b = convolution_oracle(C2, FreqPoint(2.0, [0.0, 1.2])).value
    assert rel(b / a, (math.sqrt(4 - 1.44) / 2) ** -1) < 1e-2


@pytest.mark.parametrize("spec", SUPPORTED)
def test_oracle_matches_closed_form(spec):
    for pt in random_interior_points(spec, 3, np.random.default_rng(1)):
        res = convolution_oracle(spec, pt)
        assert rel(res.value, convolution_closed_form(spec, pt)) < 2e-2


@pytest.mark.parametrize("spec", list(CONSTANTS))
def test_constancy_sweep(spec):
    pts = random_interior_points(spec, 20, np.random.default_rng(2))
    vals = np.array([convolution_oracle(spec, p).value for p in pts])
    assert np.ptp(vals) / abs(vals.mean()) < 2e-2


def test_mollified_bias_shrinks():
    pt = FreqPoint(2.0, [0.3, 0.0])
    errs = [abs(mollified_value(P2, pt, e) - math.pi / 2) for e in (0.2, 0.1, 0.05)]
    assert errs[0] >= errs[1] >= errs[2] or errs[2] < 1e-3


@settings(max_examples=8, deadline=None)
@given(vx=st.floats(-0.5, 0.5), vy=st.floats(-0.5, 0.5))
def test_galilean_shift_invariance(vx, vy):
    pt = FreqPoint(2.0, [0.2, -0.1])
    moved = paraboloid_shift(pt, [vx, vy], 2)
    assert rel(convolution_oracle(P2, moved).value, convolution_oracle(P2, pt).value) < 2e-2


@settings(max_examples=8, deadline=None)
@given(v=st.floats(-0.5, 0.5))
def test_galilean_shift_invariance_triple(v):
    pt = FreqPoint(2.0, [0.3])
    moved = paraboloid_shift(pt, [v], 3)
    assert rel(convolution_oracle(P1, moved).value, convolution_oracle(P1, pt).value) < 2e-2


@settings(max_examples=6, deadline=None)
@given(a=st.floats(-0.5, 0.5))
def test_lorentz_boost_invariance(a):
    pt = FreqPoint(2.5, [0.3, 0.2])
    boosted = lorentz_boost(pt, a)
    assert rel(convolution_oracle(C2, boosted).value, convolution_oracle(C2, pt).value) < 2e-2
    assert rel(convolution_oracle(C2T, boosted).value, convolution_oracle(C2T, pt).value) < 2e-2


@pytest.mark.parametrize("lam", [0.7, 1.6])
def test_scaling_laws(lam):
    pt = FreqPoint(2.0, [0.4, 0.2])
    p_scaled = FreqPoint(lam ** 2 * pt.tau, lam * pt.xi)
    assert rel(convolution_oracle(P2, p_scaled).value, convolution_oracle(P2, pt).value) < 2e-2
    c_scaled = FreqPoint(lam * pt.tau, lam * pt.xi)
    assert rel(convolution_oracle(C2, c_scaled).value, convolution_oracle(C2, pt).value / lam) < 2e-2
    assert rel(convolution_oracle(C2T, c_scaled).value, convolution_oracle(C2T, pt).value) < 2e-2


def test_richardson_recovers_linear_and_quadratic_bias():
    eps = (0.1, 0.05, 0.025)
    for order in (1, 2):
        vals = [3.0 + 0.7 * e ** order for e in eps]
        res = richardson(eps, vals)
        assert res.value == pytest.approx(3.0, abs=1e-12)
        assert res.order == pytest.approx(order)


def test_richardson_rejects_inconsistent_ladder():
    with pytest.raises(ConvergenceError):
        richardson((0.1, 0.05, 0.025), [1.0, 1.1, 1.0])
