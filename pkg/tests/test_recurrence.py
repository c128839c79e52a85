import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pentaspec.coeffs import CoefficientModel, LimitProfile
from pentaspec.errors import PivotError, SpectralRegionError
from pentaspec.operators import norm_bounds
from pentaspec.recurrence import (
    characteristic_roots,
    closed_form_T0,
    forward_iterate,
    jost_function,
    minimal_solution,
    transfer_matrix,
    write_trace_csv,
    ChainRecurrence,
)

FREE = LimitProfile(0, 0, 1, 1)


def test_roots_examples():
    r = characteristic_roots(2.0)
    assert r.degenerate and r.alpha1 == r.alpha2 == -1
    r = characteristic_roots(0.0)
    assert {r.alpha1, r.alpha2} == {1j, -1j} or np.allclose(sorted([r.alpha1.imag, r.alpha2.imag]), [-1, 1])
    r = characteristic_roots(2.5)
    assert r.alpha1 == pytest.approx(-0.5) and r.alpha2 == pytest.approx(-2.0)


@settings(max_examples=100, deadline=None)
@given(re=st.floats(-10, 10), im=st.floats(-10, 10))
def test_roots_satisfy_quadratic(re, im):
    p = complex(re, im)
    r = characteristic_roots(p)
    for a in (r.alpha1, r.alpha2):
        assert abs(a * a + p * a + 1) <= 1e-12 * max(1.0, abs(a)) ** 2 * max(1.0, abs(p))
    assert abs(r.alpha1 * r.alpha2 - 1) <= 1e-12
    assert abs(r.alpha1) <= 1 + 1e-12


def test_closed_form_cases():
    # p1 = (r1 - lam)/s1 = 2 at lam = -2
    assert np.allclose(closed_form_T0(-2.0, FREE, "odd").values(4)[1:], [1, -2, 3, -4])
    assert np.allclose(closed_form_T0(2.0, FREE, "odd").values(6)[1:], [1, 2, 3, 4, 5, 6])
    assert np.allclose(closed_form_T0(0.0, FREE, "odd").values(4)[1:], [1, 0, -1, 0], atol=1e-14)


def test_near_degenerate_uses_stable_path():
    cf = closed_form_T0(2.0 - 1e-11, FREE, "odd")
    ref = forward_iterate(CoefficientModel.from_profile(FREE), "odd", 2.0 - 1e-11, (0, 1), 40)
    assert np.allclose(cf.values(40), ref, rtol=1e-9)


def test_forward_iterate_zero_seed():
    m = CoefficientModel.exponential((0, 1, 1, 2), (0.5, 0.2, 0.1), 0.5)
    assert not np.any(forward_iterate(m, "odd", 0.7, (0, 0), 30))


def test_forward_iterate_single_step():
    # equation n = 0 of the odd chain: c_{-1} y_0 + (a_1 - lam) y_1 + b_1 y_2 = 0
    m = CoefficientModel.finite_support((0, 0, 1, 1), {"a": [(1, -1.0)]})
    assert forward_iterate(m, "odd", 0.0, (0, 1), 2)[2] == pytest.approx(1.0)
    # equation n = 1 with c_1 = 1, a_3 - lam = -1, b_3 = 1 and (y_1, y_2) = (0, 1)
    m = CoefficientModel.finite_support((0, 0, 1, 1), {"a": [(3, -1.0)]})
    y = forward_iterate(m, "odd", 0.0, (-1.0, 0.0), 3)
    assert (y[1], y[2], y[3]) == pytest.approx((0.0, 1.0, 1.0))


def test_forward_iterate_pivot():
    m = CoefficientModel.finite_support((0, 0, 1, 1), {"b": [(5, 0.0)]})
    with pytest.raises(PivotError) as info:
        forward_iterate(m, "odd", 0.3, (0, 1), 10)
    assert info.value.index == 5


def test_minimal_solution_free():
    m = CoefficientModel.from_profile(FREE)
    res = minimal_solution(m, "odd", 3.0, M=20)
    ratios = res.values[2:] / res.values[1:-1]
    assert np.allclose(ratios, (3 - math.sqrt(5)) / 2, atol=1e-6)
    assert abs(res.y0) > 0.1 and res.converged
    with pytest.raises(SpectralRegionError):
        minimal_solution(m, "odd", 1.0)


def test_minimal_solution_outside_norm_bound():
    m = CoefficientModel.exponential((0, 1, 1, 0.5), (0.5, 0.3, -0.2), 0.6)
    _, upper = norm_bounds(LimitProfile(0, 1, 1, 0.5), 2)
    for chain in ("odd", "even"):
        assert abs(minimal_solution(m, chain, upper + 1.5).y0) > 0


def test_jost_and_minimal_share_zeros():
    m = CoefficientModel.finite_support((0, 0, 1, 1), {"a": [(1, 3.0)]})
    rec = ChainRecurrence(m, "odd")
    f0, y1, ok = jost_function(rec, [10 / 3, 4.0 + 1j])
    assert ok.all() and abs(f0[0]) < 1e-12 and abs(f0[1]) > 1e-3
    assert abs(minimal_solution(m, "odd", 4.0 + 1j).y0 - f0[1] / y1[1]) < 1e-9


def test_transfer_examples():
    m = CoefficientModel.from_profile(FREE)
    for j in (1, 4, 17):
        assert np.array_equal(transfer_matrix(m, "odd", j, 0.0).matrix, [[0, 1], [-1, 0]])
        assert np.array_equal(transfer_matrix(m, "even", j, 2.0).matrix, [[0, 1], [-1, 2]])


def test_transfer_product_matches_forward():
    m = CoefficientModel.exponential((0.2, -0.4, 1.1, 0.8), (0.5, 0.3, -0.2), 0.6)
    lam = 0.3 + 0.2j
    y = forward_iterate(m, "even", lam, (0.0, 1.0), 12)
    v = np.array([y[1], y[2]])
    for j in range(1, 11):
        v = transfer_matrix(m, "even", j, lam) @ v
        assert np.allclose(v, y[j + 1:j + 3], rtol=1e-12)


def test_trace_csv(tmp_path):
    write_trace_csv(tmp_path / "t.csv", [0, 1 + 1j, 2])
    assert (tmp_path / "t.csv").read_text().splitlines()[2] == "1,1.0,1.0"
