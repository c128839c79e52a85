"""Coefficient sequences {a_n}, {b_n}, {c_n} and their odd/even limits.

The operator acts as ``(Tx)_i = c_{i-2} x_{i-2} + a_i x_i + b_i x_{i+2}``.
Each band converges along odd and along even indices; limits are always
declared by the model, never estimated from data.
"""
from __future__ import annotations

import math
import numbers
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, ModelInconsistencyError

__all__ = [
    "KINDS",
    "BANDS",
    "BandSpec",
    "CoefficientModel",
    "LimitProfile",
    "entry",
    "values",
    "limit_profile",
    "deviation_sup",
]

KINDS = ("constant", "exponential", "power-law", "finite-support", "explicit-table")
BANDS = ("a", "b", "c")


def _real(name, x):
    if isinstance(x, (complex, np.complexfloating)) and not isinstance(x, numbers.Real):
        if x.imag != 0:
            raise DomainError(f"{name} must be real, got complex {x!r}")
        x = x.real
    try:
        v = float(x)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"{name} must be a real number, got {x!r}") from exc
    if not math.isfinite(v):
        raise DomainError(f"{name} must be finite, got {v}")
    return v


@dataclass(frozen=True)
class LimitProfile:
    """Limits (r1, r2, s1, s2): a -> r1/r2 and b, c -> s1/s2 on odd/even indices."""

    r1: float
    r2: float
    s1: float
    s2: float

    def __post_init__(self):
        for name in ("r1", "r2", "s1", "s2"):
            object.__setattr__(self, name, _real(name, getattr(self, name)))
        if self.s1 == 0 or self.s2 == 0:
            raise DomainError("limits s1 and s2 must be nonzero")

    def as_tuple(self):
        return (self.r1, self.r2, self.s1, self.s2)

    def chain(self, chain):
        """(r, s) governing the odd or even chain."""
        if chain == "odd":
            return self.r1, self.s1
        if chain == "even":
            return self.r2, self.s2
        raise DomainError(f"chain must be 'odd' or 'even', got {chain!r}")


@dataclass(frozen=True)
class BandSpec:
    """Parameters of one band.

    ``amplitude``/``rate`` drive the exponential kind, ``amplitude``/``exponent``
    the power-law kind, ``table`` the explicit-table kind.  ``overrides`` replace
    single entries in every kind.
    """

    odd_limit: float
    even_limit: float
    amplitude: float = 0.0
    rate: float | None = None
    exponent: float | None = None
    overrides: tuple = ()
    table: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "odd_limit", _real("odd_limit", self.odd_limit))
        object.__setattr__(self, "even_limit", _real("even_limit", self.even_limit))
        object.__setattr__(self, "amplitude", _real("amplitude", self.amplitude))
        if self.rate is not None:
            object.__setattr__(self, "rate", _real("rate", self.rate))
        if self.exponent is not None:
            object.__setattr__(self, "exponent", _real("exponent", self.exponent))
        ov = {}
        for item in self.overrides:
            idx, val = item
            if isinstance(idx, bool) or int(idx) != idx or int(idx) < 1:
                raise DomainError(f"override index must be a positive integer, got {idx!r}")
            ov[int(idx)] = _real(f"override[{idx}]", val)
        object.__setattr__(self, "overrides", tuple(sorted(ov.items())))
        object.__setattr__(self, "table", tuple(_real("table entry", v) for v in self.table))

    def limit(self, n):
        return self.odd_limit if n % 2 == 1 else self.even_limit

    @property
    def last_override(self):
        return self.overrides[-1][0] if self.overrides else 0


@dataclass(frozen=True)
class CoefficientModel:
    """Generator of the three band sequences with declared odd/even limits."""

    kind: str
    a: BandSpec
    b: BandSpec
    c: BandSpec
    settle_index: int = 0
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown model kind {self.kind!r}; expected one of {KINDS}")
        for band in BANDS:
            spec = getattr(self, band)
            if not isinstance(spec, BandSpec):
                raise DomainError(f"band {band} must be a BandSpec")
            if self.kind == "exponential":
                if spec.rate is None or not 0.0 < spec.rate < 1.0:
                    raise DomainError(f"band {band}: exponential rate must lie in (0, 1)")
            elif self.kind == "power-law":
                if spec.exponent is None or spec.exponent <= 0:
                    raise DomainError(f"band {band}: power-law exponent must be > 0")
        if self.kind == "explicit-table":
            if self.settle_index < 0:
                raise DomainError("settle_index must be >= 0")
            self._check_table_monotone()

    def _check_table_monotone(self):
        # |entry - limit| non-increasing beyond the settle index, per parity.
        for band in BANDS:
            spec = getattr(self, band)
            stop = max(len(spec.table), spec.last_override, self.settle_index) + 2
            if stop <= self.settle_index:
                continue
            n = np.arange(max(self.settle_index, 1), stop + 1)
            dev = np.abs(values(self, band, n) - _limits(spec, n))
            for parity in (0, 1):
                d = dev[n % 2 == parity]
                if np.any(np.diff(d) > 1e-15 * max(1.0, float(d.max(initial=0.0)))):
                    raise DomainError(
                        f"band {band}: |entry - limit| increases beyond settle index "
                        f"{self.settle_index}"
                    )

    # constructors -----------------------------------------------------------
    @classmethod
    def constant(cls, r1, r2, s1, s2):
        return cls(
            "constant",
            BandSpec(r1, r2),
            BandSpec(s1, s2),
            BandSpec(s1, s2),
        )

    @classmethod
    def from_profile(cls, profile: LimitProfile):
        return cls.constant(*profile.as_tuple())

    @classmethod
    def exponential(cls, profile, amplitudes=(0.0, 0.0, 0.0), rate=0.5, overrides=None):
        """Exponentially convergent model, ``entry = limit + amplitude * rate**n``."""
        rates = rate if isinstance(rate, (tuple, list)) else (rate,) * 3
        overrides = overrides or {}
        r1, r2, s1, s2 = profile.as_tuple() if isinstance(profile, LimitProfile) else profile
        lims = {"a": (r1, r2), "b": (s1, s2), "c": (s1, s2)}
        specs = {
            band: BandSpec(
                *lims[band],
                amplitude=amp,
                rate=rt,
                overrides=tuple(overrides.get(band, ())),
            )
            for band, amp, rt in zip(BANDS, amplitudes, rates)
        }
        return cls("exponential", **specs)

    @classmethod
    def power_law(cls, profile, amplitudes=(0.0, 0.0, 0.0), exponent=2.0, overrides=None):
        exps = exponent if isinstance(exponent, (tuple, list)) else (exponent,) * 3
        overrides = overrides or {}
        r1, r2, s1, s2 = profile.as_tuple() if isinstance(profile, LimitProfile) else profile
        lims = {"a": (r1, r2), "b": (s1, s2), "c": (s1, s2)}
        specs = {
            band: BandSpec(
                *lims[band],
                amplitude=amp,
                exponent=ex,
                overrides=tuple(overrides.get(band, ())),
            )
            for band, amp, ex in zip(BANDS, amplitudes, exps)
        }
        return cls("power-law", **specs)

    @classmethod
    def finite_support(cls, profile, overrides):
        """Limit-periodic model with finitely many entries replaced.

        ``overrides`` maps band name to an iterable of ``(index, value)``.
        """
        r1, r2, s1, s2 = profile.as_tuple() if isinstance(profile, LimitProfile) else profile
        lims = {"a": (r1, r2), "b": (s1, s2), "c": (s1, s2)}
        specs = {
            band: BandSpec(*lims[band], overrides=tuple(overrides.get(band, ())))
            for band in BANDS
        }
        return cls("finite-support", **specs)

    def with_overrides(self, **overrides):
        """Copy with extra ``band=[(index, value), ...]`` overrides merged in."""
        specs = {}
        for band in BANDS:
            spec = getattr(self, band)
            extra = overrides.get(band)
            if extra:
                merged = dict(spec.overrides)
                merged.update(dict(extra))
                spec = replace(spec, overrides=tuple(merged.items()))
            specs[band] = spec
        return replace(self, **specs)

    def transpose(self):
        """Model of the transposed matrix: the b and c bands trade places."""
        return replace(self, b=self.c, c=self.b, name=f"{self.name}^T" if self.name else "")

    @property
    def is_symmetric(self):
        return self.b == self.c

    # serialisation ----------------------------------------------------------
    def to_dict(self):
        out = {"kind": self.kind}
        for band in BANDS:
            spec = getattr(self, band)
            d = {"odd_limit": spec.odd_limit, "even_limit": spec.even_limit}
            if spec.amplitude:
                d["amplitude"] = spec.amplitude
            if spec.rate is not None:
                d["rate"] = spec.rate
            if spec.exponent is not None:
                d["exponent"] = spec.exponent
            if spec.overrides:
                d["overrides"] = [[i, v] for i, v in spec.overrides]
            if spec.table:
                d["table"] = list(spec.table)
            out[band] = d
        if self.kind == "explicit-table":
            out["settle_index"] = self.settle_index
        return out

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise DomainError("model block must be a mapping")
        kind = data.get("kind", "constant")
        specs = {}
        for band in BANDS:
            raw = data.get(band)
            if raw is None:
                raise DomainError(f"model block is missing band {band!r}")
            raw = dict(raw)
            unknown = set(raw) - {
                "odd_limit", "even_limit", "amplitude", "rate", "exponent", "overrides", "table",
            }
            if unknown:
                raise DomainError(f"band {band}: unknown keys {sorted(unknown)}")
            if "odd_limit" not in raw or "even_limit" not in raw:
                raise DomainError(f"band {band}: odd_limit and even_limit are required")
            raw["overrides"] = tuple(tuple(x) for x in raw.get("overrides", ()))
            raw["table"] = tuple(raw.get("table", ()))
            specs[band] = BandSpec(**raw)
        settle = data.get("settle_index", 0)
        if kind == "explicit-table" and "settle_index" not in data:
            raise DomainError("explicit-table models need a declared settle_index")
        return cls(kind, settle_index=int(settle), **specs)


def _limits(spec, n):
    return np.where(n % 2 == 1, spec.odd_limit, spec.even_limit)


def _spec(model, band):
    if band not in BANDS:
        raise DomainError(f"band must be one of {BANDS}, got {band!r}")
    return getattr(model, band)


def values(model: CoefficientModel, band: str, n) -> np.ndarray:
    """Vectorised :func:`entry` over an integer array of indices (all >= 1)."""
    spec = _spec(model, band)
    n = np.asarray(n, dtype=np.int64)
    if n.size and n.min() < 1:
        raise DomainError("band indices start at 1")
    out = _limits(spec, n).astype(np.float64)
    kind = model.kind
    if kind == "exponential":
        # rate**n underflows to 0 for large n, which is the right limit
        with np.errstate(under="ignore"):
            out = out + spec.amplitude * np.power(spec.rate, n.astype(np.float64))
    elif kind == "power-law":
        out = out + spec.amplitude * np.power(n.astype(np.float64), -spec.exponent)
    elif kind == "explicit-table" and spec.table:
        tab = np.asarray(spec.table)
        inside = n <= tab.size
        out[inside] = tab[n[inside] - 1]
    for idx, val in spec.overrides:
        out[n == idx] = val
    return out


def entry(model: CoefficientModel, band: str, n: int) -> float:
    """n-th entry (n >= 1) of band ``a``, ``b`` or ``c``."""
    if isinstance(n, bool) or int(n) != n:
        raise DomainError(f"index must be an integer, got {n!r}")
    if n < 1:
        raise DomainError(f"band indices start at 1, got {n}")
    return float(values(model, band, np.array([int(n)]))[0])


def limit_profile(model: CoefficientModel) -> LimitProfile:
    """Return (r1, r2, s1, s2); b and c must share their odd and even limits."""
    a, b, c = model.a, model.b, model.c
    if b.odd_limit != c.odd_limit or b.even_limit != c.even_limit:
        raise ModelInconsistencyError(
            "b-band and c-band limits disagree: "
            f"b -> ({b.odd_limit}, {b.even_limit}), c -> ({c.odd_limit}, {c.even_limit})"
        )
    if b.odd_limit == 0 or b.even_limit == 0:
        raise DomainError("limits s1 and s2 must be nonzero")
    return LimitProfile(a.odd_limit, a.even_limit, b.odd_limit, b.even_limit)


def deviation_sup(model: CoefficientModel, band: str, m: int) -> float:
    """sup_{k >= m} |entry(k) - limit(k)| for one band.

    Closed-form kinds use their monotone envelope (exact when no override
    sits beyond ``m``); tables are scanned up to the settle index, past which
    the deviation is non-increasing per parity.
    """
    spec = _spec(model, band)
    m = max(int(m), 1)
    sup = 0.0
    for idx, val in spec.overrides:
        if idx >= m:
            sup = max(sup, abs(val - spec.limit(idx)))
    kind = model.kind
    if kind == "exponential":
        sup = max(sup, abs(spec.amplitude) * spec.rate ** m)
    elif kind == "power-law":
        sup = max(sup, abs(spec.amplitude) * float(m) ** (-spec.exponent))
    elif kind == "explicit-table":
        stop = max(len(spec.table), model.settle_index, m) + 2
        n = np.arange(m, stop + 1)
        dev = np.abs(values(model, band, n) - _limits(spec, n))
        sup = max(sup, float(dev.max(initial=0.0)))
    return sup
