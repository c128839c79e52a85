import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pentaspec.coeffs import LimitProfile
from pentaspec.errors import ConsistencyError, DomainError
from pentaspec.spectra import SpectralPoint, SpectralSet, essential_spectrum, fine_spectrum_T, fine_spectrum_T0


@pytest.mark.parametrize("prof, expect", [
    ((0, 0, 1, 1), ((-2, 2),)),
    ((0, 5, 1, 1), ((-2, 2), (3, 7))),
    ((0, 3, 1, 1), ((-2, 5),)),
    ((0, 0, -1, 1), ((-2, 2),)),
])
def test_essential_examples(prof, expect):
    assert essential_spectrum(LimitProfile(*prof)).intervals == expect


def test_fine_T0_free():
    rep = fine_spectrum_T0(LimitProfile(0, 0, 1, 1))
    for name in ("point", "residual", "compression", "discrete"):
        assert getattr(rep, name).is_empty
    for name in ("spectrum", "continuous", "essential", "approximate", "defect"):
        assert getattr(rep, name).intervals == ((-2, 2),)
    assert all(rep.identities().values())


def test_fine_T0_overlap():
    rep = fine_spectrum_T0(LimitProfile(1, -1, 1, 2))
    assert rep.spectrum.intervals == ((-5, 3),)
    assert set(rep.spectrum.generators) == {(-1, 3), (-5, 3)}


def test_fine_T_with_point():
    prof = LimitProfile(0, 0, 1, 1)
    empty = fine_spectrum_T(prof, SpectralSet.empty())
    base = fine_spectrum_T0(prof)
    for name in ("spectrum", "point", "residual", "continuous", "approximate", "defect"):
        assert getattr(empty, name).same_as(getattr(base, name))
    rep = fine_spectrum_T(prof, SpectralSet((), (2.5,)))
    assert rep.spectrum.values == [2.5] and rep.spectrum.intervals == ((-2, 2),)
    for name in ("point", "discrete", "compression"):
        assert getattr(rep, name).values == [2.5]
    assert rep.residual.is_empty
    assert all(rep.identities().values())


def test_embedded_point_rejected():
    with pytest.raises(ConsistencyError):
        fine_spectrum_T(LimitProfile(0, 0, 1, 1), SpectralSet((), (1.0,)))
    with pytest.raises(DomainError):
        SpectralSet(((-2, 2),), (1.0,))


def test_json_roundtrip():
    s = SpectralSet(((0, 1), (3, 4)), (SpectralPoint(2 + 1j, "odd-chain", 1e-12),))
    back = SpectralSet.from_dict(s.to_dict())
    assert back.same_as(s) and back.points[0].source == "odd-chain"


intervals = st.lists(
    st.tuples(st.floats(-10, 10), st.floats(0, 5)).map(lambda t: (t[0], t[0] + t[1])), min_size=1, max_size=4
)


@settings(max_examples=60, deadline=None)
@given(a=intervals, b=intervals)
def test_union_is_canonical(a, b):
    u = SpectralSet(a) | SpectralSet(b)
    ivs = u.intervals
    assert all(lo <= hi for lo, hi in ivs)
    assert all(ivs[k][1] < ivs[k + 1][0] for k in range(len(ivs) - 1))
    for lo, hi in a + b:
        assert lo in u and hi in u


@settings(max_examples=40, deadline=None)
@given(r=st.tuples(st.floats(-5, 5), st.floats(-5, 5)), s=st.tuples(st.floats(0.2, 3), st.floats(0.2, 3)))
def test_identities_always_hold_for_T0(r, s):
    assert all(fine_spectrum_T0(LimitProfile(r[0], r[1], s[0], s[1])).identities().values())
