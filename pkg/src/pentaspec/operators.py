"""Band-matrix actions of T, T0 and K = T - T0 on finite vectors.

Row i of every operator holds c_{i-2} at column i-2, a_i on the diagonal and
b_i at column i+2; nothing else is nonzero.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .coeffs import BANDS, CoefficientModel, LimitProfile, deviation_sup, limit_profile, values
from .errors import DomainError

__all__ = [
    "BandOperator",
    "PerturbationEntries",
    "FiniteSection",
    "check_order",
    "lp_norm",
    "apply",
    "norm_bounds",
    "tail_bound",
    "truncate",
]

SOURCES = ("T", "T0", "K")


def check_order(p):
    """Validate the l_p exponent, 1 < p < inf."""
    try:
        p = float(p)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"p must be a real number, got {p!r}") from exc
    if not (1.0 < p < math.inf):
        raise DomainError(f"p must satisfy 1 < p < inf, got {p}")
    return p


def lp_norm(x, p):
    x = np.abs(np.asarray(x))
    scale = x.max(initial=0.0)
    if scale == 0.0:
        return 0.0
    return float(scale * np.sum((x / scale) ** p) ** (1.0 / p))


@dataclass(frozen=True)
class BandOperator:
    """One of T, T0 or K attached to a coefficient model.

    ``BandOperator.T0(profile)`` builds the limit operator directly from a
    :class:`LimitProfile`.
    """

    model: CoefficientModel
    source: str = "T"

    def __post_init__(self):
        if self.source not in SOURCES:
            raise DomainError(f"source must be one of {SOURCES}")
        if self.source != "T":
            limit_profile(self.model)

    @classmethod
    def T(cls, model):
        return cls(model, "T")

    @classmethod
    def T0(cls, model_or_profile):
        if isinstance(model_or_profile, LimitProfile):
            model_or_profile = CoefficientModel.from_profile(model_or_profile)
        return cls(model_or_profile, "T0")

    @classmethod
    def K(cls, model):
        return cls(model, "K")

    @property
    def profile(self):
        return limit_profile(self.model)

    def transpose(self):
        return BandOperator(self.model.transpose(), self.source)

    def bands(self, n):
        """Arrays (a, b, c) of length n holding entries 1..n of each band."""
        idx = np.arange(1, int(n) + 1)
        if self.source == "T":
            return tuple(values(self.model, band, idx) for band in BANDS)
        prof = self.profile
        odd = idx % 2 == 1
        r = np.where(odd, prof.r1, prof.r2)
        s = np.where(odd, prof.s1, prof.s2)
        if self.source == "T0":
            return r, s.copy(), s.copy()
        a, b, c = (values(self.model, band, idx) for band in BANDS)
        return a - r, b - s, c - s


@dataclass(frozen=True)
class PerturbationEntries:
    """u_n, v_n, w_n: deviations of a, b, c from their odd/even limits."""

    model: CoefficientModel

    def __post_init__(self):
        limit_profile(self.model)

    def arrays(self, n):
        return BandOperator.K(self.model).bands(n)

    def sup_from(self, m):
        """(sup|u_k|, sup|v_k|, sup|w_k|) over k >= m."""
        return tuple(deviation_sup(self.model, band, m) for band in BANDS)


def apply(op: BandOperator, x, p=2.0):
    """y = op x for a finite vector x, zero-padded beyond its length.

    ``p`` only tags the space; the matrix action does not depend on it.
    """
    check_order(p)
    x = np.asarray(x)
    if x.ndim != 1 or x.size == 0:
        raise DomainError("apply needs a non-empty 1-d vector")
    L = x.size
    a, b, c = op.bands(L)
    dtype = np.result_type(x.dtype, np.float64)
    y = a * x
    y = y.astype(dtype, copy=False)
    if L > 2:
        y[:-2] += b[:-2] * x[2:]
        y[2:] += c[:-2] * x[:-2]
    return y


def norm_bounds(profile: LimitProfile, p):
    """Lower and upper bounds for the l_p operator norm of T0."""
    p = check_order(p)
    r1, r2, s1, s2 = (abs(v) for v in profile.as_tuple())
    lower = ((r1**p + r2**p + s1**p + s2**p) / 2.0) ** (1.0 / p)
    upper = (3.0 ** (p - 1.0) * (r1**p + 2 * s1**p + r2**p + 2 * s2**p)) ** (1.0 / p)
    return lower, upper


def tail_bound(entries: PerturbationEntries, n: int) -> float:
    """Upper bound on ||K - K_n||_p, where K_n keeps the first n rows of K."""
    if isinstance(n, bool) or int(n) != n or n < 2:
        raise DomainError(f"tail_bound needs an integer n >= 2, got {n!r}")
    su, sv, sw = entries.sup_from(int(n) - 1)
    return sw + su + sv


@dataclass(frozen=True, eq=False)
class FiniteSection:
    """Leading N x N principal submatrix, kept as its three bands.

    ``a`` has length N; ``b`` and ``c`` have length max(N - 2, 0) (entry k of
    ``b`` sits at (k, k+2), entry k of ``c`` at (k+2, k), zero-based).
    """

    size: int
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    source: str = "T"

    @cached_property
    def matrix(self):
        N = self.size
        M = np.zeros((N, N))
        idx = np.arange(N)
        M[idx, idx] = self.a
        if N > 2:
            k = np.arange(N - 2)
            M[k, k + 2] = self.b
            M[k + 2, k] = self.c
        return M

    def transpose(self):
        return FiniteSection(self.size, self.a, self.c, self.b, self.source + "^T")

    def norm_inf(self):
        """Max absolute row sum, a cheap scale for deflation tolerances."""
        rows = np.abs(self.a).copy()
        if self.size > 2:
            rows[:-2] += np.abs(self.b)
            rows[2:] += np.abs(self.c)
        return float(rows.max(initial=0.0))

    def blocks(self):
        """Tridiagonal blocks (diag, upper, lower) of the odd and even chains.

        Reordering indices as (1, 3, 5, ..., 2, 4, ...) is a permutation
        similarity that splits the section into these two blocks.
        """
        out = []
        for start in (0, 1):
            d = self.a[start::2]
            up = self.b[start::2][: max(d.size - 1, 0)]
            lo = self.c[start::2][: max(d.size - 1, 0)]
            out.append((d, up, lo))
        return tuple(out)

    def to_csv(self, path):
        np.savetxt(path, self.matrix, delimiter=",", fmt="%.17g")

    def bands_to_csv(self, path):
        """Band-triple CSV: n, a_n, b_n, c_n (b_n, c_n empty past N-2)."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "a", "b", "c"])
            for i in range(self.size):
                bi = repr(float(self.b[i])) if i < self.size - 2 else ""
                ci = repr(float(self.c[i])) if i < self.size - 2 else ""
                w.writerow([i + 1, repr(float(self.a[i])), bi, ci])

    @classmethod
    def from_bands_csv(cls, path, source="T"):
        a, b, c = [], [], []
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                a.append(float(row["a"]))
                if row["b"] != "":
                    b.append(float(row["b"]))
                    c.append(float(row["c"]))
        return cls(len(a), np.array(a), np.array(b), np.array(c), source)


def truncate(op: BandOperator, N: int) -> FiniteSection:
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise DomainError(f"section size must be a positive integer, got {N!r}")
    N = int(N)
    a, b, c = op.bands(N)
    m = max(N - 2, 0)
    return FiniteSection(N, a, b[:m].copy(), c[:m].copy(), op.source)
