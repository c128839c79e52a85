"""Finite-section ground truth.

Because the bands sit at offsets -2, 0, +2, the N x N section is permutation
similar to two tridiagonal blocks (odd and even indices).  A block whose
off-diagonal products b_k c_k are all >= 0 is diagonally similar to a real
symmetric tridiagonal matrix with off-diagonal sqrt(b_k c_k) and goes through
the implicit-shift QL path; any other block is already upper Hessenberg and
goes through shifted QR.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from ._accel import backend_name
from .coeffs import CoefficientModel
from .errors import ConvergenceError, DomainError
from .operators import BandOperator, FiniteSection, truncate
from .spectra import SpectralSet, essential_spectrum

__all__ = [
    "MAX_SECTION",
    "SectionSpectrum",
    "PortraitRow",
    "block_eigenvalues",
    "section_eigenvalues",
    "fill_distance",
    "spectral_portrait",
]

MAX_SECTION = 8192


def _sort(z):
    z = np.asarray(z, dtype=np.complex128)
    return z[np.lexsort((z.imag, z.real))]


@dataclass
class SectionSpectrum:
    size: int
    eigenvalues: np.ndarray
    metadata: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "N": self.size,
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "metadata": self.metadata,
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["re", "im"])
            for z in self.eigenvalues:
                w.writerow([repr(float(z.real)), repr(float(z.imag))])


def block_eigenvalues(d, up, lo, abs_tol=0.0, max_iter=None, method="auto"):
    """Eigenvalues of one tridiagonal block (diag d, super up, sub lo)."""
    d = np.asarray(d, dtype=np.float64)
    n = d.size
    if n == 0:
        return np.zeros(0, dtype=np.complex128), {"path": "empty", "iterations": 0}
    max_iter = max_iter or 30 * n
    prod = np.asarray(up, dtype=np.float64) * np.asarray(lo, dtype=np.float64)
    if method == "auto":
        method = "symmetric" if np.all(prod >= 0) else "hessenberg"
    if method == "symmetric":
        if np.any(prod < 0):
            raise DomainError("symmetric path needs b_k c_k >= 0 on every off-diagonal")
        e = np.zeros(n)
        e[: n - 1] = np.sqrt(prod)
        w, its, status = kernels.tridiag_eigvalsh(d, e, float(abs_tol), int(max_iter))
        if status != kernels.OK:
            raise ConvergenceError(f"QL did not converge after {its} iterations",
                                   partial={"iterations": int(its)})
        return np.asarray(w, dtype=np.complex128), {"path": "symmetric-ql", "iterations": int(its)}
    H = np.diag(d).astype(np.complex128)
    if n > 1:
        H[np.arange(n - 1), np.arange(1, n)] = up
        H[np.arange(1, n), np.arange(n - 1)] = lo
    w, its, first, status = kernels.hessenberg_eigvals(H, float(abs_tol), int(max_iter))
    if status != kernels.OK:
        raise ConvergenceError(
            f"shifted QR did not converge after {its} iterations",
            partial={"iterations": int(its), "deflated": [complex(z) for z in w[first:]]},
        )
    return np.asarray(w), {"path": "hessenberg-qr", "iterations": int(its)}


def section_eigenvalues(section: FiniteSection, method="auto") -> SectionSpectrum:
    N = section.size
    if N < 1 or N > MAX_SECTION:
        raise DomainError(f"section size must lie in [1, {MAX_SECTION}], got {N}")
    scale = section.norm_inf()
    tol = 1e-12 * scale
    parts, meta = [], {"backend": backend_name(), "deflation_tol": tol, "blocks": []}
    for name, (d, up, lo) in zip(("odd", "even"), section.blocks()):
        w, info = block_eigenvalues(d, up, lo, tol, 30 * N, method)
        info["chain"] = name
        info["size"] = int(d.size)
        meta["blocks"].append(info)
        parts.append(w)
    eig = np.concatenate(parts)
    if all(b["path"] in ("symmetric-ql", "empty") for b in meta["blocks"]):
        eig = eig.real.astype(np.complex128)
    meta["iterations"] = sum(b["iterations"] for b in meta["blocks"])
    return SectionSpectrum(N, _sort(eig), meta)


def fill_distance(intervals, eigenvalues, samples=2001):
    """sup over interval points x of the distance from x to the nearest eigenvalue."""
    z = np.asarray(eigenvalues, dtype=np.complex128)
    if z.size == 0:
        return float("inf")
    order = np.argsort(z.real)
    zs = z[order]
    re = zs.real
    worst = 0.0
    for lo, hi in intervals:
        inside = re[(re >= lo) & (re <= hi)]
        cand = np.concatenate([
            [lo, hi],
            inside,
            0.5 * (inside[1:] + inside[:-1]),
            np.linspace(lo, hi, samples),
        ])
        pos = np.searchsorted(re, cand)
        best = np.full(cand.size, np.inf)
        for off in range(-4, 5):
            k = np.clip(pos + off, 0, zs.size - 1)
            best = np.minimum(best, np.abs(cand - zs[k]))
        worst = max(worst, float(best.max()))
    return worst


@dataclass
class PortraitRow:
    N: int
    max_distance: float
    fill: float
    outliers: list

    def to_dict(self):
        return {
            "N": self.N,
            "max_distance": self.max_distance,
            "fill": self.fill,
            "outliers": [[z.real, z.imag] for z in self.outliers],
        }


def spectral_portrait(model: CoefficientModel, schedule, eps=1e-8, predicted: SpectralSet | None = None):
    """Distance diagnostics of section spectra against the predicted spectral set.

    ``max_distance`` is measured to ``predicted`` (the essential spectrum when
    not given); ``outliers`` are section eigenvalues farther than ``eps`` from
    the essential intervals, so true discrete eigenvalues show up there and
    can be tracked for stabilisation across the schedule.
    """
    schedule = [int(n) for n in schedule]
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise DomainError("N-schedule must be strictly increasing")
    op = BandOperator.T(model)
    ess = essential_spectrum(op.profile)
    predicted = predicted or ess
    rows = []
    for N in schedule:
        spec = section_eigenvalues(truncate(op, N))
        ev = spec.eigenvalues
        dist = np.array([predicted.distance(z) for z in ev])
        ess_dist = np.array([ess.distance(z) for z in ev])
        outl = [complex(z) for z, dd in zip(ev, ess_dist) if dd > eps]
        rows.append(PortraitRow(N, float(dist.max(initial=0.0)), fill_distance(ess.intervals, ev), outl))
    trend = [
        rows[i + 1].fill / rows[i].fill if rows[i].fill > 0 else None for i in range(len(rows) - 1)
    ]
    return {"rows": rows, "fill_ratio": trend, "essential": ess}
