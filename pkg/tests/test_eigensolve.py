import numpy as np
import pytest

from pentaspec.coeffs import CoefficientModel
from pentaspec.eigensolve import (
    ShootingFunction,
    discrete_spectrum,
    find_complex_eigenvalues,
    find_real_eigenvalues,
    shoot,
    split_rectangle,
    winding_number,
    write_records_csv,
)
from pentaspec.errors import DomainError, HypothesisError
from pentaspec.operators import BandOperator, truncate
from pentaspec.oracle import section_eigenvalues


def test_free_residual_bounded_away(free):
    for lam in (2.5, 4.0, -3.0, 1 + 1j, -0.5 - 2j):
        for chain in ("odd", "even"):
            assert abs(shoot(free, chain, "direct", lam)) > 0.1


def test_single_site_sign_change(single_site):
    assert np.sign(shoot(single_site, "odd", "direct", 3.0).real) != np.sign(
        shoot(single_site, "odd", "direct", 3.6).real)


def test_symmetric_sides_agree():
    m = CoefficientModel.exponential((0, 1, 1, 0.5), (1.0, 0.4, 0.4), 0.5)
    for lam in (3.1, -2.5 + 0.5j):
        assert shoot(m, "odd", "direct", lam) == shoot(m, "odd", "adjoint", lam)


def test_real_search(single_site, free):
    assert find_real_eigenvalues(free, "odd", "direct", (2.1, 10), 500) == []
    recs = find_real_eigenvalues(single_site, "odd", "direct", (2.1, 10), 500)
    assert len(recs) == 1
    r = recs[0]
    assert abs(r.value - 10 / 3) < 1e-9 and r.residual < 1e-8
    # isolation certificate
    for d in (1e-4, -1e-4):
        assert abs(shoot(single_site, "odd", "direct", r.value + d)) > 10 * r.residual
    assert find_real_eigenvalues(single_site, "even", "direct", (2.1, 10), 500) == []


def test_real_search_domain(single_site):
    with pytest.raises(DomainError):
        find_real_eigenvalues(single_site, "odd", "direct", (1.0, 3.0), 50)
    with pytest.raises(DomainError):
        find_real_eigenvalues(single_site, "odd", "direct", (2.1, 3.0), 1)


def test_complex_search(free, single_site):
    assert find_complex_eigenvalues(free, "odd", "direct", (3, 5, -1, 1), 6) == []
    recs = find_complex_eigenvalues(single_site, "odd", "direct", (2.5, 5, -1, 1), 10)
    assert len(recs) == 1 and abs(recs[0].value - 10 / 3) < 1e-10
    with pytest.raises(DomainError):
        find_complex_eigenvalues(free, "odd", "direct", (1, 3, -1, 1), 4)


def test_symmetric_model_has_real_eigenvalues():
    m = CoefficientModel.exponential((0, 0, 1, 1), (3.0, 0.8, 0.8), 0.5)
    recs = find_complex_eigenvalues(m, "odd", "direct", (-8, 8, 0.01, 8), 10)
    recs += find_complex_eigenvalues(m, "odd", "direct", (2.001, 8, -0.01, 0.01), 12)
    assert recs and all(abs(r.value.imag) < 1e-8 for r in recs)


def test_winding_additivity(single_site):
    fn = ShootingFunction(single_site, "odd", "direct")
    parent = (2.5, 4.5, -1.0, 1.0)
    total, _ = winding_number(fn, parent)
    kids = [winding_number(fn, c)[0] for c in split_rectangle(parent)]
    assert total == 1 and sum(kids) == total


@pytest.mark.slow
def test_complex_pair_and_adjoint():
    m = CoefficientModel.finite_support((0, 0, 1, 1), {"b": [(1, 3.0)], "c": [(1, -2.0)]})
    res = discrete_spectrum(m, return_records=True)
    vals = sorted(res.spectrum.values, key=lambda z: z.imag)
    assert len(vals) == 2 and abs(vals[0] + vals[1]) < 1e-9 and vals[1].imag > 2
    assert all(r.adjoint_matched for r in res.records)
    ev = section_eigenvalues(truncate(BandOperator.T(m), 4000)).eigenvalues
    for z in vals:
        assert np.abs(ev - z).min() < 1e-4


def test_discrete_spectrum(single_site, free):
    assert discrete_spectrum(free).is_empty
    res = discrete_spectrum(single_site, return_records=True)
    assert len(res.records) == 1 and res.records[0].chain == "odd"
    assert res.records[0].multiplicity == 1 and res.records[0].adjoint_matched


def test_hypothesis_gate():
    m = CoefficientModel.power_law((0, 0, 1, 1), (1.0, 0, 0), 2.0)
    with pytest.raises(HypothesisError):
        discrete_spectrum(m)
    res = discrete_spectrum(m, {"interval": [2.5, 6.0]}, acknowledge=True, grid=100, return_records=True)
    assert res.acknowledged and res.hypothesis["status"] == "fails"
    # algebraic decay never lets the backward recurrence settle: reported, not hidden
    assert any("start-index cap" in u.get("reason", "") for u in res.unresolved)


def test_records_csv(tmp_path, single_site):
    res = discrete_spectrum(single_site, return_records=True)
    write_records_csv(tmp_path / "e.csv", res.records)
    head, row = (tmp_path / "e.csv").read_text().splitlines()
    assert head == "re,im,chain,residual,multiplicity,adjoint_matched"
    re, im, chain, _, mult, matched = row.split(",")
    assert abs(float(re) - 10 / 3) < 1e-9 and chain == "odd" and mult == "1" and matched == "true"
