"""Sufficient conditions for the absence of eigenvalues inside the essential spectrum.

Two independent tests:

* every odd/even subsequence of a, b, c converges exponentially fast
  (a global property of the model);
* for a given lam, the series  sum_n prod_{j<=n} term_j(lam)  diverges on
  the odd chain or on the even chain, where term_j is the smallest singular
  value of the j-th transfer matrix.

The second test is three-valued: a divergent series cannot be certified from
finitely many terms without a model-based argument, so the verdict carries
the certificate it relied on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coeffs import BANDS, CoefficientModel, values
from .errors import DomainError, NumericalDomainError, PivotError
from .recurrence import ChainRecurrence, _check_chain
from .spectra import essential_spectrum

__all__ = [
    "RateVerdict",
    "ConditionTerm",
    "DivergenceVerdict",
    "EmbeddedVerdict",
    "exponential_rate_check",
    "series_terms",
    "divergence_check",
    "no_embedded_eigenvalue",
    "limit_term",
]

P_READING = "P_j = |c_{2j-1}/b_{2j+1}|^2 + |(a_{2j+1} - lam)/b_{2j+1}|^2 + 1"
Q_READING = "Q_j = |c_{2j}/b_{2j+2}|^2 + |(a_{2j+2} - lam)/b_{2j+2}|^2 + 1"
DEFAULT_NMAX = 10_000
DEFAULT_THRESHOLD = 1e6
LIMIT_ONE = 1 - 1e-9
GEOMETRIC_GAP = 1e-6
ESS_TOL = 1e-9


@dataclass(frozen=True)
class RateVerdict:
    status: str  # holds | fails | unknown
    rate: float | None
    certificate: dict = field(default_factory=dict)

    def to_dict(self):
        return {"status": self.status, "rate": self.rate, "certificate": self.certificate}


def exponential_rate_check(model: CoefficientModel) -> RateVerdict:
    kind = model.kind
    specs = {band: getattr(model, band) for band in BANDS}
    if kind in ("constant", "finite-support"):
        return RateVerdict("holds", 0.0, {"reason": f"{kind} model: finitely many deviations"})
    if kind == "exponential":
        rates = {b: s.rate for b, s in specs.items() if s.amplitude != 0}
        rate = max(rates.values(), default=0.0)
        return RateVerdict("holds", rate, {"reason": "entries are limit + amplitude * rate**n",
                                           "band_rates": rates})
    if kind == "power-law":
        active = {b: s.exponent for b, s in specs.items() if s.amplitude != 0}
        if not active:
            return RateVerdict("holds", 0.0, {"reason": "all power-law amplitudes are zero"})
        return RateVerdict("fails", None, {"reason": "n**-exponent is not O(q**n) for any q < 1",
                                           "band_exponents": active})
    # explicit table: fit log|entry - limit| against n past the settle index
    fitted = {}
    for band, spec in specs.items():
        stop = max(len(spec.table), spec.last_override)
        n = np.arange(max(model.settle_index, 1), stop + 1)
        if n.size == 0:
            continue
        dev = np.abs(values(model, band, n) - np.where(n % 2 == 1, spec.odd_limit, spec.even_limit))
        keep = dev > 1e-300
        if keep.sum() >= 2:
            slope = np.polyfit(n[keep], np.log(dev[keep]), 1)[0]
            fitted[band] = float(math.exp(slope))
    rate = max(fitted.values(), default=None)
    return RateVerdict("unknown", rate, {"reason": "finite table; log-linear fit only",
                                         "fitted_rates": fitted})


@dataclass(frozen=True)
class ConditionTerm:
    j: int
    P: float
    term: float
    ratio_c: float  # |c/b|^2
    ratio_a: float  # |(a - lam)/b|^2
    sigma_min: float

    def to_dict(self):
        return {"j": self.j, "P": self.P, "term": self.term, "ratio_c": self.ratio_c,
                "ratio_a": self.ratio_a, "sigma_min": self.sigma_min}


def _term_arrays(model, chain, lam, n_max):
    _check_chain(chain)
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    rec = ChainRecurrence(model, chain)
    C, A, B = rec.coefficients(n_max + 1)
    c, a, b = C[1:], A[1:], B[1:]
    if np.any(b == 0):
        j = int(np.flatnonzero(b == 0)[0]) + 1
        idx = rec.band_index("b", j)
        raise PivotError(f"zero b-entry b_{idx} in condition term {j}", index=idx)
    lam = complex(lam)
    ratio_c = np.abs(c / b) ** 2
    ratio_a = np.abs((a - lam) / b) ** 2
    P = ratio_c + ratio_a + 1.0
    # P^2 - 4|c/b|^2 regrouped as a sum of non-negative parts; the direct
    # difference cancels badly when both singular values are close to 1
    disc = (1.0 - ratio_c) ** 2 + ratio_a * (ratio_a + 2.0 * ratio_c + 2.0)
    if not np.all(np.isfinite(disc)):
        j = int(np.flatnonzero(~np.isfinite(disc))[0]) + 1
        raise NumericalDomainError(f"non-finite discriminant in condition term {j}")
    root = np.sqrt(disc)
    # 0.5 (P - root) rewritten as 2|c/b|^2 / (P + root): same value, no cancellation
    term = np.sqrt(2.0 * ratio_c / (P + root))
    mats = np.zeros((c.size, 2, 2), dtype=np.complex128)
    mats[:, 0, 1] = 1.0
    mats[:, 1, 0] = -c / b
    mats[:, 1, 1] = -(a - lam) / b
    sv = np.linalg.svd(mats, compute_uv=False)
    smin, smax = sv[:, 1], sv[:, 0]
    bad = np.abs(term - smin) > 1e-10 * np.maximum(smax, 1.0)
    if bad.any():
        j = int(np.flatnonzero(bad)[0]) + 1
        raise NumericalDomainError(f"condition term {j} disagrees with the transfer-matrix sigma_min")
    return P, term, ratio_c, ratio_a, smin


def series_terms(model: CoefficientModel, chain: str, lam, n_max: int):
    """Terms j = 1..n_max of the divergence series (P_j on odd, Q_j on even chain)."""
    P, term, rc, ra, smin = _term_arrays(model, chain, lam, int(n_max))
    return [
        ConditionTerm(j + 1, float(P[j]), float(term[j]), float(rc[j]), float(ra[j]), float(smin[j]))
        for j in range(P.size)
    ]


def limit_term(model: CoefficientModel, chain: str, lam) -> float:
    """Limit of term_j as j -> inf, from the model's declared limits."""
    rec = ChainRecurrence(model, chain)
    p = (rec.r - complex(lam)) / rec.s
    P0 = 2.0 + abs(p) ** 2
    return math.sqrt(2.0 / (P0 + math.sqrt(max(P0 * P0 - 4.0, 0.0))))


@dataclass(frozen=True)
class DivergenceVerdict:
    chain: str
    status: str  # diverges | converges | inconclusive
    partial_sums: dict
    tail_estimate: float | None
    limit_term: float
    certificate: dict
    first_terms: list
    reading: str

    def to_dict(self):
        return {
            "chain": self.chain,
            "status": self.status,
            "partial_sums": {str(k): v for k, v in self.partial_sums.items()},
            "tail_estimate": self.tail_estimate,
            "limit_term": self.limit_term,
            "certificate": self.certificate,
            "first_terms": self.first_terms,
            "reading": self.reading,
        }


def _require_essential(model, lam):
    ess = essential_spectrum(ChainRecurrence(model, "odd").profile)
    if ess.distance(lam) > ESS_TOL:
        raise DomainError(
            f"lambda={complex(lam)} is outside the essential spectrum {list(ess.intervals)}; "
            "the divergence criterion only applies inside it"
        )


def divergence_check(model: CoefficientModel, chain: str, lam, threshold=DEFAULT_THRESHOLD,
                     n_max=DEFAULT_NMAX) -> DivergenceVerdict:
    _require_essential(model, lam)
    n_max = int(n_max)
    P, term, rc, ra, smin = _term_arrays(model, chain, lam, n_max)
    with np.errstate(divide="ignore"):
        logprod = np.cumsum(np.log(term))
    log_thr = math.log(threshold)
    prods = np.exp(np.minimum(logprod, log_thr + 1.0))
    sums = np.cumsum(prods)
    checkpoints = sorted({n for n in (1, 10, 100, 1000, 10_000, 100_000) if n <= n_max} | {n_max})
    partial = {n: float(sums[n - 1]) for n in checkpoints}
    L = limit_term(model, chain, lam)
    first = [float(t) for t in term[:20]]
    reading = P_READING if chain == "odd" else Q_READING
    half = n_max // 2

    def verdict(status, tail, cert):
        return DivergenceVerdict(chain, status, partial, tail, L, cert, first, reading)

    if sums[-1] > threshold:
        n_cross = int(np.argmax(sums > threshold)) + 1
        return verdict("diverges", None, {"kind": "partial-sum", "threshold": threshold,
                                          "crossed_at": n_cross})
    if L >= LIMIT_ONE and half >= 1:
        # terms tend to 1 and the running product has stopped decaying
        drift = float(logprod[-1] - logprod[half - 1])
        if drift >= math.log(0.5):
            return verdict("diverges", None, {"kind": "term-limit", "limit_term": L,
                                              "log_product_drift_second_half": drift})
    if L < 1 - GEOMETRIC_GAP and half >= 1:
        q = float(term[half:].max())
        if q < 1 - GEOMETRIC_GAP:
            tail = float(prods[-1] * q / (1 - q))
            return verdict("converges", tail, {"kind": "geometric", "q": q, "limit_term": L,
                                               "bound": float(sums[-1] + tail)})
    return verdict("inconclusive", None, {"limit_term": L})


@dataclass(frozen=True)
class EmbeddedVerdict:
    lam: complex
    status: str  # guaranteed-absent | not-guaranteed
    fired: tuple
    reasons: dict

    def to_dict(self):
        z = complex(self.lam)
        return {"lambda": {"re": z.real, "im": z.imag}, "status": self.status,
                "fired": list(self.fired), "reasons": self.reasons}


def no_embedded_eigenvalue(model: CoefficientModel, lam, threshold=DEFAULT_THRESHOLD,
                           n_max=DEFAULT_NMAX, rate=None) -> EmbeddedVerdict:
    """Whether lam in the essential spectrum is certainly not an eigenvalue of T."""
    _require_essential(model, lam)
    rate = rate or exponential_rate_check(model)
    reasons = {"exponential-rate": rate.to_dict()}
    fired = []
    if rate.status == "holds":
        fired.append("exponential-rate")
    else:
        for chain, label in (("odd", "condition-i"), ("even", "condition-ii")):
            v = divergence_check(model, chain, lam, threshold, n_max)
            reasons[label] = v.to_dict()
            if v.status == "diverges":
                fired.append(label)
    status = "guaranteed-absent" if fired else "not-guaranteed"
    return EmbeddedVerdict(complex(lam), status, tuple(fired), reasons)
