"""Spectral sets (closed real intervals plus isolated points) and fine-spectrum reports."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .coeffs import LimitProfile
from .errors import ConsistencyError, DomainError

__all__ = [
    "DEFAULT_TOL",
    "SpectralPoint",
    "SpectralSet",
    "FineSpectrumReport",
    "chain_interval",
    "essential_spectrum",
    "fine_spectrum_T0",
    "fine_spectrum_T",
]

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class SpectralPoint:
    value: complex
    source: str = ""
    residual: float = 0.0

    def to_dict(self):
        z = complex(self.value)
        return {"re": z.real, "im": z.imag, "source": self.source, "residual": float(self.residual)}


def _merge(intervals, tol):
    ivs = sorted((float(lo), float(hi)) for lo, hi in intervals)
    out = []
    for lo, hi in ivs:
        if lo > hi:
            raise DomainError(f"interval [{lo}, {hi}] has lo > hi")
        if out and lo <= out[-1][1] + tol:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return tuple(out)


@dataclass(frozen=True)
class SpectralSet:
    """Union of closed real intervals and finitely many isolated points.

    Intervals are kept merged and sorted.  ``generators`` records the
    intervals as they were passed in, before merging.
    """

    intervals: tuple = ()
    points: tuple = ()
    tol: float = DEFAULT_TOL
    generators: tuple = field(default=(), compare=False)

    def __post_init__(self):
        raw = tuple((float(lo), float(hi)) for lo, hi in self.intervals)
        object.__setattr__(self, "intervals", _merge(raw, self.tol))
        if not self.generators:
            object.__setattr__(self, "generators", raw)
        pts = tuple(p if isinstance(p, SpectralPoint) else SpectralPoint(complex(p)) for p in self.points)
        for p in pts:
            if self._in_intervals(p.value):
                raise DomainError(f"isolated point {p.value} lies inside an interval")
        pts = tuple(sorted(pts, key=lambda p: (complex(p.value).real, complex(p.value).imag)))
        object.__setattr__(self, "points", pts)

    @classmethod
    def empty(cls, tol=DEFAULT_TOL):
        return cls((), (), tol)

    # membership ------------------------------------------------------------
    def _in_intervals(self, z):
        z = complex(z)
        if abs(z.imag) > self.tol:
            return False
        return any(lo - self.tol <= z.real <= hi + self.tol for lo, hi in self.intervals)

    def distance(self, z):
        """Euclidean distance from z to the set."""
        z = complex(z)
        best = np.inf
        for lo, hi in self.intervals:
            dx = max(lo - z.real, 0.0, z.real - hi)
            best = min(best, float(np.hypot(dx, z.imag)))
        for p in self.points:
            best = min(best, abs(z - complex(p.value)))
        return best

    def __contains__(self, z):
        return self.distance(z) <= self.tol

    @property
    def is_empty(self):
        return not self.intervals and not self.points

    @property
    def values(self):
        return [complex(p.value) for p in self.points]

    # set algebra -----------------------------------------------------------
    def union(self, other):
        tol = max(self.tol, other.tol)
        ivs = self.intervals + other.intervals
        merged = SpectralSet(ivs, (), tol)
        pts = []
        for p in self.points + other.points:
            if merged._in_intervals(p.value):
                continue
            if any(abs(complex(p.value) - complex(q.value)) <= tol for q in pts):
                continue
            pts.append(p)
        return SpectralSet(ivs, tuple(pts), tol, generators=self.generators + other.generators)

    __or__ = union

    def isdisjoint(self, other):
        tol = max(self.tol, other.tol)
        for lo, hi in self.intervals:
            for lo2, hi2 in other.intervals:
                if lo <= hi2 + tol and lo2 <= hi + tol:
                    return False
        for p in self.points:
            if other.distance(p.value) <= tol:
                return False
        for p in other.points:
            if self.distance(p.value) <= tol:
                return False
        return True

    def same_as(self, other):
        """Set equality up to tolerance; point sources and residuals are ignored."""
        tol = max(self.tol, other.tol)
        if len(self.intervals) != len(other.intervals):
            return False
        for (a, b), (c, d) in zip(self.intervals, other.intervals):
            if abs(a - c) > tol or abs(b - d) > tol:
                return False
        mine = [complex(p.value) for p in self.points]
        theirs = [complex(p.value) for p in other.points]
        return all(any(abs(z - w) <= tol for w in theirs) for z in mine) and all(
            any(abs(z - w) <= tol for z in mine) for w in theirs
        )

    # serialisation ---------------------------------------------------------
    def to_dict(self):
        return {
            "intervals": [[lo, hi] for lo, hi in self.intervals],
            "points": [p.to_dict() for p in self.points],
            "generators": [[lo, hi] for lo, hi in self.generators],
        }

    @classmethod
    def from_dict(cls, d, tol=DEFAULT_TOL):
        pts = tuple(
            SpectralPoint(complex(p["re"], p.get("im", 0.0)), p.get("source", ""), p.get("residual", 0.0))
            for p in d.get("points", ())
        )
        gens = tuple(tuple(g) for g in d.get("generators", ()))
        return cls(tuple(tuple(iv) for iv in d.get("intervals", ())), pts, tol, generators=gens)

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def chain_interval(profile: LimitProfile, chain: str):
    """[r - 2|s|, r + 2|s|] for the odd or even chain."""
    r, s = profile.chain(chain)
    return (r - 2.0 * abs(s), r + 2.0 * abs(s))


def essential_spectrum(profile: LimitProfile, tol=DEFAULT_TOL) -> SpectralSet:
    return SpectralSet((chain_interval(profile, "odd"), chain_interval(profile, "even")), (), tol)


REPORT_FIELDS = (
    "spectrum",
    "point",
    "residual",
    "continuous",
    "essential",
    "discrete",
    "compression",
    "approximate",
    "defect",
)


@dataclass(frozen=True)
class FineSpectrumReport:
    spectrum: SpectralSet
    point: SpectralSet
    residual: SpectralSet
    continuous: SpectralSet
    essential: SpectralSet
    discrete: SpectralSet
    compression: SpectralSet
    approximate: SpectralSet
    defect: SpectralSet
    hypothesis: str = "exponential-rate"

    def identities(self):
        """The three subdivision identities, each evaluated as a set computation."""
        p, r, c = self.point, self.residual, self.continuous
        tripartition = (
            (p | r | c).same_as(self.spectrum)
            and p.isdisjoint(r)
            and p.isdisjoint(c)
            and r.isdisjoint(c)
        )
        return {
            "tripartition": tripartition,
            "approximate_compression": (self.approximate | self.compression).same_as(self.spectrum),
            "approximate_defect": (self.approximate | self.defect).same_as(self.spectrum),
        }

    def to_dict(self):
        out = {name: getattr(self, name).to_dict() for name in REPORT_FIELDS}
        out["hypothesis"] = self.hypothesis
        out["identities"] = self.identities()
        return out


def fine_spectrum_T0(profile: LimitProfile, tol=DEFAULT_TOL) -> FineSpectrumReport:
    ess = essential_spectrum(profile, tol)
    empty = SpectralSet.empty(tol)
    return FineSpectrumReport(
        spectrum=ess,
        point=empty,
        residual=empty,
        continuous=ess,
        essential=ess,
        discrete=empty,
        compression=empty,
        approximate=ess,
        defect=ess,
    )


def fine_spectrum_T(profile: LimitProfile, discrete: SpectralSet, tol=DEFAULT_TOL,
                    hypothesis="exponential-rate") -> FineSpectrumReport:
    """Report for T = T0 + K given its discrete eigenvalues outside the intervals."""
    ess = essential_spectrum(profile, tol)
    inside = [p.value for p in discrete.points if ess.distance(p.value) <= tol]
    if inside:
        raise ConsistencyError(
            "discrete points inside the essential spectrum",
            {"points": [complex(z) for z in inside], "essential": ess.to_dict()["intervals"]},
        )
    pts = SpectralSet((), discrete.points, tol)
    full = ess | pts
    return FineSpectrumReport(
        spectrum=full,
        point=pts,
        residual=SpectralSet.empty(tol),
        continuous=ess,
        essential=ess,
        discrete=pts,
        compression=pts,
        approximate=full,
        defect=full,
        hypothesis=hypothesis,
    )
