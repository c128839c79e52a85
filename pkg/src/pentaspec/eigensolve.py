"""Discrete eigenvalues of T outside the essential spectrum.

lam is an eigenvalue exactly when the decaying solution of one chain
recurrence also meets the boundary condition y_0 = 0.  Two evaluators are
used for that boundary value:

* ``shoot`` reports y_0 with the decaying solution scaled to y_1 = 1 (the
  residual carried in every record);
* zero *search* uses the scaling y_n ~ alpha1(lam)**n instead, which is
  analytic and pole-free off the chain interval.  Both vanish at the same lam
  (they differ by the nonzero factor y_1), but only the second one is safe
  for bisection and winding numbers.

The adjoint side runs the same machinery on the transposed model (b and c
swapped); its zero set must coincide with the direct one.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .coeffs import BANDS, CoefficientModel, deviation_sup, limit_profile, values
from .conditions import exponential_rate_check
from .errors import ConsistencyError, DomainError, HypothesisError
from .oracle import section_eigenvalues
from .operators import BandOperator, truncate
from .recurrence import CHAINS, DEFAULT_COLLAR, ChainRecurrence, _check_chain, jost_function, minimal_solution
from .spectra import SpectralPoint, SpectralSet, essential_spectrum

log = logging.getLogger(__name__)

__all__ = [
    "SIDES",
    "ShootingFunction",
    "EigenvalueRecord",
    "SearchResult",
    "shoot",
    "winding_number",
    "split_rectangle",
    "find_real_eigenvalues",
    "find_complex_eigenvalues",
    "discrete_spectrum",
    "write_records_csv",
]

SIDES = ("direct", "adjoint")
RESIDUAL_MAX = 1e-8
XTOL = 1e-10
FLAT_F = 1e-12
BOUNDARY_WARN = 1e-3
MATCH_TOL = 1e-6
CLUSTER_TOL = 1e-4
MAX_STEP = math.pi / 4
SPLIT = 0.5 + 1 / 64  # off-centre split keeps children edges off symmetric zeros


def _check_side(side):
    if side not in SIDES:
        raise DomainError(f"side must be one of {SIDES}, got {side!r}")


def _side_model(model, side):
    _check_side(side)
    return model if side == "direct" else model.transpose()


@dataclass
class ShootingFunction:
    """lam -> boundary value of the decaying solution on one chain and side."""

    model: CoefficientModel
    chain: str
    side: str = "direct"
    collar: float = DEFAULT_COLLAR
    threads: int = 1

    def __post_init__(self):
        _check_chain(self.chain)
        _check_side(self.side)
        self._rec = ChainRecurrence(_side_model(self.model, self.side), self.chain)
        self._ess = essential_spectrum(self._rec.profile)
        self.calls = 0
        self.unconverged = 0

    def __call__(self, lam):
        """Residual y_0 with y_1 = 1."""
        return complex(minimal_solution(self._rec.model, self.chain, lam, 1, collar=self.collar).y0)

    def analytic(self, lams):
        """Pole-free boundary values on an array of lam (zero search)."""
        lams = np.atleast_1d(np.asarray(lams, dtype=np.complex128))
        d = np.array([self._ess.distance(z) for z in lams])
        if np.any(d <= self.collar):
            z = lams[np.argmin(d)]
            raise DomainError(f"lambda={complex(z)} lies within the collar {self.collar} "
                              "of the essential spectrum")
        self.calls += lams.size
        f0, _, ok = jost_function(self._rec, lams, threads=self.threads)
        self.unconverged += int(np.count_nonzero(~ok))
        return f0


def shoot(model: CoefficientModel, chain: str, side: str, lam, collar=DEFAULT_COLLAR) -> complex:
    return ShootingFunction(model, chain, side, collar)(lam)


@dataclass
class EigenvalueRecord:
    value: complex
    chain: str
    side: str
    residual: float
    iterations: int
    multiplicity: int = 1
    adjoint_matched: bool = False
    boundary_warning: bool = False
    oracle_distance: float | None = None

    def to_dict(self):
        z = complex(self.value)
        return {
            "re": z.real,
            "im": z.imag,
            "chain": self.chain,
            "side": self.side,
            "residual": self.residual,
            "iterations": self.iterations,
            "multiplicity": self.multiplicity,
            "adjoint_matched": self.adjoint_matched,
            "boundary_warning": self.boundary_warning,
            "oracle_distance": self.oracle_distance,
        }


class SearchResult(list):
    """List of records plus whatever the search could not settle."""

    def __init__(self, records=(), unresolved=(), rejected=()):
        super().__init__(records)
        self.unresolved = list(unresolved)
        self.rejected = list(rejected)


def write_records_csv(path, records):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["re", "im", "chain", "residual", "multiplicity", "adjoint_matched"])
        for r in records:
            z = complex(r.value)
            w.writerow([repr(z.real), repr(z.imag), r.chain, repr(r.residual),
                        r.multiplicity, str(r.adjoint_matched).lower()])


def _make_record(fn, lam, iterations, rejected):
    res = abs(fn(lam))
    if not res < RESIDUAL_MAX:
        rejected.append({"lambda": [lam.real, lam.imag], "residual": res,
                         "reason": f"residual {res:.3e} >= {RESIDUAL_MAX}"})
        log.warning("zero candidate %s rejected: residual %.3e", lam, res)
        return None
    near = fn._ess.distance(lam) < BOUNDARY_WARN
    return EigenvalueRecord(complex(lam), fn.chain, fn.side, res, iterations, boundary_warning=near)


def _check_interval(fn, lo, hi):
    ess = fn._ess
    for a, b in ess.intervals:
        if lo <= b + fn.collar and a - fn.collar <= hi:
            raise DomainError(f"search interval [{lo}, {hi}] meets the essential interval "
                              f"[{a}, {b}] or its collar {fn.collar}")


# ---------------------------------------------------------------------------
# real search


def find_real_eigenvalues(model: CoefficientModel, chain: str, side: str, interval, grid: int = 1000,
                          collar=DEFAULT_COLLAR, xtol=XTOL, threads=1) -> SearchResult:
    lo, hi = (float(v) for v in interval)
    if not lo < hi:
        raise DomainError(f"search interval needs lo < hi, got [{lo}, {hi}]")
    if isinstance(grid, bool) or int(grid) != grid or grid < 2:
        raise DomainError(f"grid must be an integer >= 2, got {grid!r}")
    fn = ShootingFunction(model, chain, side, collar, threads)
    _check_interval(fn, lo, hi)

    x = np.linspace(lo, hi, int(grid))
    f = fn.analytic(x).real
    rejected, found = [], []
    exact = np.flatnonzero(f == 0.0)
    for k in exact:
        rec = _make_record(fn, complex(x[k]), 0, rejected)
        if rec:
            found.append(rec)
    brackets = np.flatnonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)
    a, b = x[brackets].copy(), x[brackets + 1].copy()
    fa = f[brackets].copy()
    its = 0
    while a.size and np.any(b - a >= xtol):
        m = 0.5 * (a + b)
        fm = fn.analytic(m).real
        left = np.sign(fm) == np.sign(fa)
        a = np.where(left, m, a)
        fa = np.where(left, fm, fa)
        b = np.where(left, b, m)
        its += 1
        if its > 200:
            break
    for lam in 0.5 * (a + b):
        rec = _make_record(fn, complex(lam), its, rejected)
        if rec:
            found.append(rec)
    found.sort(key=lambda r: r.value.real)
    return SearchResult(found, _convergence_note(fn), rejected)


def _convergence_note(fn):
    if not fn.unconverged:
        return []
    log.warning("%d boundary evaluations hit the start-index cap", fn.unconverged)
    return [{"reason": "backward recurrence hit the start-index cap; zero locations are heuristic",
             "evaluations": fn.unconverged, "chain": fn.chain, "side": fn.side}]


# ---------------------------------------------------------------------------
# complex search


def _perimeter(rect, n):
    """n points walking the rectangle boundary counter-clockwise, spaced by arc length."""
    x0, x1, y0, y1 = rect
    w, h = x1 - x0, y1 - y0
    t = np.arange(n) * (2 * (w + h) / n)
    z = np.empty(n, dtype=np.complex128)
    e1 = t < w
    e2 = (t >= w) & (t < w + h)
    e3 = (t >= w + h) & (t < 2 * w + h)
    e4 = t >= 2 * w + h
    z[e1] = (x0 + t[e1]) + 1j * y0
    z[e2] = x1 + 1j * (y0 + t[e2] - w)
    z[e3] = (x1 - (t[e3] - w - h)) + 1j * y1
    z[e4] = x0 + 1j * (y1 - (t[e4] - 2 * w - h))
    # make sure the four corners are sampled
    return np.unique(np.concatenate([z, [x0 + 1j * y0, x1 + 1j * y0, x1 + 1j * y1, x0 + 1j * y1]]),
                     return_index=False)


def _ordered_perimeter(rect, n):
    x0, x1, y0, y1 = rect
    z = _perimeter(rect, n)
    # order by position along the boundary
    def arc(p):
        if p.imag == y0 and p.real < x1:
            return p.real - x0
        if p.real == x1 and p.imag < y1:
            return (x1 - x0) + (p.imag - y0)
        if p.imag == y1 and p.real > x0:
            return (x1 - x0) + (y1 - y0) + (x1 - p.real)
        return 2 * (x1 - x0) + (y1 - y0) + (y1 - p.imag)
    return np.array(sorted(z, key=arc))


def _refine(fn, z, f, max_points):
    """Insert midpoints where the phase turns by more than MAX_STEP between samples.

    Consecutive samples always share an edge (corners are sampled), so the
    midpoint of two neighbours lies on the boundary.
    """
    while True:
        steps = np.abs(np.angle(np.roll(f, -1) / f))
        bad = np.flatnonzero(steps > MAX_STEP)
        if bad.size == 0:
            return z, f, None
        if z.size + bad.size > max_points:
            return z, f, "phase not resolved within the sample budget"
        mid = 0.5 * (z[bad] + np.roll(z, -1)[bad])
        fm = fn.analytic(mid)
        if np.abs(fm).min() < FLAT_F:
            return z, f, "boundary sample below 1e-12"
        z = np.insert(z, bad + 1, mid)
        f = np.insert(f, bad + 1, fm)


def _winding_from_samples(f):
    steps = np.angle(np.roll(f, -1) / f)
    return steps.sum() / (2 * math.pi), float(np.abs(steps).max())


def winding_number(fn, rect, n0=64, max_points=1 << 15):
    """Zero count of ``fn.analytic`` inside ``rect`` from its boundary phase.

    Base samples start at ``n0`` and double until two consecutive counts
    agree; each pass is adaptively refined wherever the phase step exceeds
    pi/4.  Returns ``(count, info)``; count is None when a sample hits
    |f| < 1e-12, the sample budget runs out, or the count never settles.
    """
    prev = None
    n = n0
    info = {"samples": 0, "min_abs": None}
    for _ in range(4):
        z = _ordered_perimeter(rect, n)
        f = fn.analytic(z)
        if np.abs(f).min() < FLAT_F:
            info["reason"] = "boundary sample below 1e-12"
            return None, info
        z, f, why = _refine(fn, z, f, max_points)
        info.update(samples=int(z.size), min_abs=float(np.abs(f).min()))
        if why:
            info["reason"] = why
            return None, info
        w, biggest = _winding_from_samples(f)
        count = int(round(w))
        if prev is not None and count == prev:
            info["max_phase_step"] = biggest
            return count, info
        prev = count
        n *= 2
    info["reason"] = "winding number did not stabilise"
    return None, info


def split_rectangle(rect, frac=SPLIT):
    x0, x1, y0, y1 = rect
    xm = x0 + frac * (x1 - x0)
    ym = y0 + frac * (y1 - y0)
    return [(x0, xm, y0, ym), (xm, x1, y0, ym), (x0, xm, ym, y1), (xm, x1, ym, y1)]


def _split_cell(rect, frac=SPLIT):
    """Quad split for squarish cells; halve the long side of elongated ones."""
    x0, x1, y0, y1 = rect
    w, h = x1 - x0, y1 - y0
    if w > 2 * h:
        xm = x0 + frac * w
        return [(x0, xm, y0, y1), (xm, x1, y0, y1)]
    if h > 2 * w:
        ym = y0 + frac * h
        return [(x0, x1, y0, ym), (x0, x1, ym, y1)]
    return split_rectangle(rect, frac)


def _newton(fn, z, rect, max_iter=60):
    x0, x1, y0, y1 = rect
    span = max(x1 - x0, y1 - y0)
    for k in range(1, max_iter + 1):
        h = 1e-7 * max(1.0, abs(z))
        try:
            fz, fp, fm = fn.analytic([z, z + h, z - h])
        except DomainError:
            return None, k
        d = (fp - fm) / (2 * h)
        if d == 0:
            return None, k
        step = fz / d
        if abs(step) > span:
            step *= span / abs(step)
        z = z - step
        if abs(step) <= 1e-14 * max(1.0, abs(z)) or abs(fz) == 0:
            return z, k
    return None, max_iter


def _inside(z, rect, pad=0.0):
    x0, x1, y0, y1 = rect
    return x0 - pad <= z.real <= x1 + pad and y0 - pad <= z.imag <= y1 + pad


def _check_rect(fn, rect):
    x0, x1, y0, y1 = (float(v) for v in rect)
    if not (x0 < x1 and y0 < y1):
        raise DomainError(f"rectangle needs x0 < x1 and y0 < y1, got {rect}")
    for a, b in fn._ess.intervals:
        dx = max(a - x1, 0.0, x0 - b)
        dy = max(y0, 0.0, -y1)
        if math.hypot(dx, dy) <= fn.collar:
            raise DomainError(f"rectangle {rect} meets the essential interval [{a}, {b}] "
                              f"or its collar {fn.collar}")
    return (x0, x1, y0, y1)


def find_complex_eigenvalues(model: CoefficientModel, chain: str, side: str, rect, depth: int = 24,
                             collar=DEFAULT_COLLAR, threads=1) -> SearchResult:
    fn = ShootingFunction(model, chain, side, collar, threads)
    rect = _check_rect(fn, rect)
    found, unresolved, rejected = [], [], []
    stack = [(rect, 0)]
    while stack:
        cell, level = stack.pop(0)
        count, info = winding_number(fn, cell)
        if count == 0:
            continue
        if count == 1:
            cx = 0.5 * (cell[0] + cell[1]) + 0.5j * (cell[2] + cell[3])
            z, its = _newton(fn, cx, cell)
            if z is not None and _inside(z, cell, 1e-9 * max(1.0, abs(z))):
                rec = _make_record(fn, complex(z), its, rejected)
                if rec:
                    found.append(rec)
                    continue
        if level < depth:
            stack.extend((c, level + 1) for c in _split_cell(cell))
        else:
            unresolved.append({"rect": list(cell), "winding": count, **info})
            log.warning("unresolved cell %s (winding %s)", cell, count)
    # zeros polished onto a shared edge can be reported by two cells
    found.sort(key=lambda r: (r.value.real, r.value.imag))
    uniq = []
    for r in found:
        if not any(abs(r.value - q.value) <= MATCH_TOL * 1e-2 for q in uniq):
            uniq.append(r)
    return SearchResult(uniq, unresolved + _convergence_note(fn), rejected)


# ---------------------------------------------------------------------------
# whole discrete spectrum


def _row_sum_bound(model):
    """Upper bound on sup_i (|c_{i-2}| + |a_i| + |b_i|), hence on the spectral radius."""
    total = 0.0
    for band in BANDS:
        spec = getattr(model, band)
        stop = max(len(spec.table), spec.last_override, model.settle_index, 2) + 2
        head = float(np.abs(values(model, band, np.arange(1, stop + 1))).max())
        tail = max(abs(spec.odd_limit), abs(spec.even_limit)) + deviation_sup(model, band, stop)
        total += max(head, tail)
    return total


def _gaps(intervals, lo, hi, gap):
    out, cur = [], lo
    for a, b in intervals:
        if a - gap > cur:
            out.append((cur, a - gap))
        cur = max(cur, b + gap)
    if cur < hi:
        out.append((cur, hi))
    return out


def _auto_regions(model, ess, gap):
    R = _row_sum_bound(model) + 1.0
    strips = [("interval", iv) for iv in _gaps(ess.intervals, -R, R, gap)]
    if model.is_symmetric:
        return strips, R
    rects = [("rect", (-R, R, gap, R)), ("rect", (-R, R, -R, -gap))]
    rects += [("rect", (lo, hi, -gap, gap)) for _, (lo, hi) in strips]
    return rects, R


def _normalise_region(region):
    if region is None:
        return None
    if isinstance(region, dict):
        region = [region]
    out = []
    for item in region:
        if "interval" in item:
            out.append(("interval", tuple(float(v) for v in item["interval"])))
        elif "rectangle" in item:
            out.append(("rect", tuple(float(v) for v in item["rectangle"])))
        else:
            raise DomainError(f"region entries need 'interval' or 'rectangle', got {item!r}")
    return out


def _search(model, side, regions, grid, depth, collar, threads):
    recs, unresolved, rejected = [], [], []
    for chain in CHAINS:
        for kind, spec in regions:
            if kind == "interval":
                got = find_real_eigenvalues(model, chain, side, spec, grid, collar, threads=threads)
            else:
                got = find_complex_eigenvalues(model, chain, side, spec, depth, collar, threads)
            recs.extend(got)
            unresolved.extend(dict(u, chain=chain, side=side) for u in got.unresolved)
            rejected.extend(dict(u, chain=chain, side=side) for u in got.rejected)
    return recs, unresolved, rejected


def _match(direct, adjoint, tol):
    used = set()
    missing = []
    for r in direct:
        best, k = min(((abs(r.value - q.value), i) for i, q in enumerate(adjoint) if i not in used),
                      default=(math.inf, -1))
        if best <= tol:
            used.add(k)
            r.adjoint_matched = True
            adjoint[k].adjoint_matched = True
        else:
            missing.append(r)
    extra = [q for i, q in enumerate(adjoint) if i not in used]
    return missing, extra


@dataclass
class DiscreteSpectrumResult:
    spectrum: SpectralSet
    records: list
    adjoint_records: list
    unresolved: list = field(default_factory=list)
    rejected: list = field(default_factory=list)
    hypothesis: dict = field(default_factory=dict)
    acknowledged: bool = False

    def to_dict(self):
        return {
            "spectrum": self.spectrum.to_dict(),
            "records": [r.to_dict() for r in self.records],
            "adjoint_records": [r.to_dict() for r in self.adjoint_records],
            "unresolved": self.unresolved,
            "rejected": self.rejected,
            "hypothesis": self.hypothesis,
            "acknowledged": self.acknowledged,
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def discrete_spectrum(model: CoefficientModel, region=None, *, acknowledge=False, collar=DEFAULT_COLLAR,
                      search_gap=1e-4, grid=2000, depth=24, multiplicity_N=512, match_tol=MATCH_TOL,
                      threads=1, return_records=False):
    """Discrete eigenvalues of T as isolated points of a SpectralSet.

    ``region`` is None (automatic cover of the resolvent set up to a row-sum
    bound, leaving a ``search_gap`` band around the intervals), a dict or a
    list of dicts with key ``interval`` [lo, hi] or ``rectangle``
    [x0, x1, y0, y1].
    """
    profile = limit_profile(model)
    rate = exponential_rate_check(model)
    if rate.status != "holds" and not acknowledge:
        raise HypothesisError(
            f"exponential-rate hypothesis is '{rate.status}' for this model; pass acknowledge=True "
            "to search anyway (results are then heuristic)",
            verdict=rate.to_dict(),
        )
    if search_gap <= collar:
        raise DomainError("search_gap must exceed the collar")
    ess = essential_spectrum(profile)
    regions = _normalise_region(region)
    if regions is None:
        regions, _ = _auto_regions(model, ess, search_gap)

    direct, unres_d, rej_d = _search(model, "direct", regions, grid, depth, collar, threads)
    adjoint, unres_a, rej_a = _search(model, "adjoint", regions, grid, depth, collar, threads)
    missing, extra = _match(direct, adjoint, match_tol)
    if missing or extra:
        raise ConsistencyError(
            "direct and adjoint searches disagree",
            {"direct": [r.to_dict() for r in direct], "adjoint": [r.to_dict() for r in adjoint],
             "unmatched_direct": [r.to_dict() for r in missing],
             "unmatched_adjoint": [r.to_dict() for r in extra]},
        )

    if direct and multiplicity_N:
        ev = section_eigenvalues(truncate(BandOperator.T(model), int(multiplicity_N))).eigenvalues
        for r in direct:
            d = np.abs(ev - r.value)
            r.oracle_distance = float(d.min())
            r.multiplicity = max(1, int(np.count_nonzero(d <= CLUSTER_TOL)))

    pts = tuple(SpectralPoint(r.value, f"{r.chain}-chain", r.residual) for r in direct)
    spectrum = SpectralSet((), pts)
    if not return_records:
        return spectrum
    return DiscreteSpectrumResult(spectrum, direct, adjoint, unres_d + unres_a, rej_d + rej_a,
                                  rate.to_dict(), bool(acknowledge and rate.status != "holds"))
