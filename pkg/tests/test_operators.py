import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pentaspec.coeffs import CoefficientModel, LimitProfile
from pentaspec.errors import DomainError
from pentaspec.operators import (
    BandOperator,
    FiniteSection,
    PerturbationEntries,
    apply,
    check_order,
    norm_bounds,
    tail_bound,
    truncate,
)


def test_apply_unit_vector():
    op = BandOperator.T0(LimitProfile(0, 0, 1, 1))
    assert np.array_equal(apply(op, np.array([1.0, 0, 0, 0])), [0, 0, 1, 0])


def test_apply_witness():
    prof = LimitProfile(0.3, -1.2, 2.0, 0.7)
    y = apply(BandOperator.T0(prof), np.array([1.0, 1.0, 0.0, 0.0]))
    assert np.allclose(y, prof.as_tuple(), rtol=0, atol=0)


def test_K_zero_for_constant():
    K = BandOperator.K(CoefficientModel.constant(1, 2, 3, 4))
    assert not np.any(apply(K, np.random.default_rng(0).standard_normal(30)))


def test_apply_rejects_empty():
    with pytest.raises(DomainError):
        apply(BandOperator.T0(LimitProfile(0, 0, 1, 1)), np.array([]))


@pytest.mark.parametrize("p", [1.0, 0.5, math.inf, "x"])
def test_bad_order(p):
    with pytest.raises(DomainError):
        check_order(p)


def test_norm_bound_examples():
    assert norm_bounds(LimitProfile(0, 0, 1, 1), 2) == pytest.approx((1.0, math.sqrt(12)))
    assert norm_bounds(LimitProfile(1, 1, 1, 1), 2) == pytest.approx((math.sqrt(2), math.sqrt(18)))


def test_tail_bound_examples():
    zero = PerturbationEntries(CoefficientModel.constant(0, 0, 1, 1))
    assert tail_bound(zero, 5) == 0.0
    ones = PerturbationEntries(CoefficientModel.exponential((0, 0, 1, 1), (1, 1, 1), 0.5))
    for n in range(2, 20):
        assert tail_bound(ones, n) <= 3 * 0.5 ** (n - 1) * (1 + 1e-12)
    # amplitudes (1, 2, 3) on (u, v, w), i.e. on bands a, b, c
    e = PerturbationEntries(CoefficientModel.exponential((0, 0, 1, 1), (1, 2, 3), 0.5))
    assert tail_bound(e, 3) == pytest.approx(1.5, abs=1e-15)
    with pytest.raises(DomainError):
        tail_bound(e, 1)


def test_truncate_examples():
    sec = truncate(BandOperator.T0(LimitProfile(0, 0, 1, 1)), 3)
    assert np.array_equal(sec.matrix, [[0, 0, 1], [0, 0, 0], [1, 0, 0]])
    r1, r2, s1, s2 = 1.0, 2.0, 3.0, 4.0
    M = truncate(BandOperator.T0(LimitProfile(r1, r2, s1, s2)), 5).matrix
    expect = np.array([
        [r1, 0, s1, 0, 0],
        [0, r2, 0, s2, 0],
        [s1, 0, r1, 0, s1],
        [0, s2, 0, r2, 0],
        [0, 0, s1, 0, r1],
    ])
    assert np.array_equal(M, expect)
    with pytest.raises(DomainError):
        truncate(BandOperator.T0(LimitProfile(0, 0, 1, 1)), 0)


def test_truncate_linearity():
    m = CoefficientModel.exponential((0, 1, 1, 2), (0.4, -0.3, 0.2), 0.6, {"b": [(3, 5.0)]})
    T, T0, K = (truncate(getattr(BandOperator, s)(m), 9).matrix for s in ("T", "T0", "K"))
    assert np.array_equal(K, T - T0)


def test_band_structure():
    m = CoefficientModel.exponential((0, 1, 1, 2), (0.4, -0.3, 0.2), 0.6)
    M = truncate(BandOperator.T(m), 12).matrix
    i, j = np.nonzero(M)
    assert set(np.abs(i - j)) <= {0, 2}


def test_bands_csv_roundtrip(tmp_path):
    sec = truncate(BandOperator.T(CoefficientModel.exponential((0, 1, 1, 2), (0.4, -0.3, 0.2), 0.6)), 7)
    sec.bands_to_csv(tmp_path / "s.csv")
    back = FiniteSection.from_bands_csv(tmp_path / "s.csv")
    assert np.array_equal(back.matrix, sec.matrix)


@settings(max_examples=25, deadline=None)
@given(
    prof=st.tuples(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.2, 3), st.floats(0.2, 3)),
    p=st.sampled_from([1.5, 2.0, 3.0]),
    seed=st.integers(0, 2**16),
)
def test_ratio_never_exceeds_upper(prof, p, seed):
    lower, upper = norm_bounds(LimitProfile(*prof), p)
    x = np.random.default_rng(seed).standard_normal(64)
    y = apply(BandOperator.T0(LimitProfile(*prof)), x, p)
    assert np.sum(np.abs(y) ** p) ** (1 / p) <= upper * np.sum(np.abs(x) ** p) ** (1 / p) * (1 + 1e-12)
    assert lower <= upper
