"""Three-term recurrences along the odd and even chains.

Writing y_n = x_{2n-1} (odd chain) or y_n = x_{2n} (even chain), the
eigenvalue equation (T - lam) x = 0 splits into

    odd:  c_{2n-1} y_n + (a_{2n+1} - lam) y_{n+1} + b_{2n+1} y_{n+2} = 0
    even: c_{2n}   y_n + (a_{2n+2} - lam) y_{n+1} + b_{2n+2} y_{n+2} = 0

for n = 0, 1, ... with the boundary value y_0 = 0.  Index n = 0 needs the
undefined c_{-1} (resp. c_0); it is only ever multiplied by y_0, so any
nonzero value gives the same eigenvalue condition.  The chain's limit s is
used, which makes a constant model reproduce the T0 recurrence exactly.
"""
from __future__ import annotations

import cmath
import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .coeffs import CoefficientModel, LimitProfile, limit_profile, values
from .errors import (
    DomainError,
    InstabilityError,
    NumericalDomainError,
    PivotError,
    SpectralRegionError,
)
from .spectra import essential_spectrum

__all__ = [
    "CHAINS",
    "ReducedParameter",
    "CharacteristicRoots",
    "ClosedFormSolution",
    "MinimalSolutionResult",
    "TransferMatrix",
    "ChainRecurrence",
    "reduced_parameter",
    "characteristic_roots",
    "closed_form_T0",
    "forward_iterate",
    "minimal_solution",
    "jost_function",
    "transfer_matrix",
    "write_trace_csv",
]

CHAINS = ("odd", "even")
DEGENERATE_TOL = 1e-14
NEAR_DEGENERATE = 1e-8
MAX_START = 2**16
DEFAULT_COLLAR = 1e-6


def _check_chain(chain):
    if chain not in CHAINS:
        raise DomainError(f"chain must be 'odd' or 'even', got {chain!r}")


@dataclass(frozen=True)
class ReducedParameter:
    p1: complex
    p2: complex


def reduced_parameter(lam, profile: LimitProfile) -> ReducedParameter:
    lam = complex(lam)
    return ReducedParameter((profile.r1 - lam) / profile.s1, (profile.r2 - lam) / profile.s2)


@dataclass(frozen=True)
class CharacteristicRoots:
    """Roots of y^2 + p y + 1 = 0 ordered so that |alpha1| <= |alpha2|."""

    p: complex
    alpha1: complex
    alpha2: complex
    degenerate: bool


def characteristic_roots(p) -> CharacteristicRoots:
    p = complex(p)
    if not (math.isfinite(p.real) and math.isfinite(p.imag)):
        raise DomainError(f"p must be finite, got {p}")
    if abs(p - 2) <= DEGENERATE_TOL:
        return CharacteristicRoots(p, -1.0 + 0j, -1.0 + 0j, True)
    if abs(p + 2) <= DEGENERATE_TOL:
        return CharacteristicRoots(p, 1.0 + 0j, 1.0 + 0j, True)
    disc = cmath.sqrt(p * p - 4.0)
    plus, minus = -p + disc, -p - disc
    big = (plus if abs(plus) >= abs(minus) else minus) / 2.0
    # product of the roots is 1; dividing avoids cancellation in the small root
    small = 1.0 / big
    return CharacteristicRoots(p, small, big, False)


@dataclass(frozen=True)
class ClosedFormSolution:
    """Solution of y_n + p y_{n+1} + y_{n+2} = 0 with y_0 = 0 and given y_1.

    ``case`` is ``"p=2"``, ``"p=-2"`` or ``"generic"``.  In the generic case
    y_n = const1 * alpha1**n + const2 * alpha2**n with const2 = -const1.
    """

    case: str
    p: complex
    y1: complex
    const1: complex
    const2: complex
    roots: CharacteristicRoots
    method: str = "closed-form"

    def __call__(self, n):
        n = int(n)
        if n < 0:
            raise DomainError("index must be >= 0")
        if n == 0:
            return 0j
        return complex(self.values(n)[n])

    def values(self, M):
        """Array (y_0, ..., y_M)."""
        n = np.arange(M + 1)
        if self.case == "p=2":
            out = (self.const1 + n * self.const2) * (-1.0) ** n
        elif self.case == "p=-2":
            out = self.const1 + n * self.const2
        elif self.method == "chebyshev":
            out = np.zeros(M + 1, dtype=np.complex128)
            if M >= 1:
                out[1] = 1.0
            for k in range(M - 1):
                out[k + 2] = -self.p * out[k + 1] - out[k]
            out = out * self.y1
        else:
            a1, a2 = self.roots.alpha1, self.roots.alpha2
            with np.errstate(over="ignore", invalid="ignore"):
                out = self.const1 * a1**n + self.const2 * a2**n
        out = np.asarray(out, dtype=np.complex128)
        out[0] = 0.0
        return out


def closed_form_T0(lam, profile: LimitProfile, chain: str, y1=1.0) -> ClosedFormSolution:
    """Closed-form solution of the constant-coefficient chain recurrence."""
    _check_chain(chain)
    r, s = profile.chain(chain)
    p = (r - complex(lam)) / s
    y1 = complex(y1)
    roots = characteristic_roots(p)
    if roots.degenerate and roots.alpha1 == -1:
        # (c1 + n c2)(-1)^n with c1 = 0 and c2 = -y1
        return ClosedFormSolution("p=2", p, y1, 0j, -y1, roots)
    if roots.degenerate:
        return ClosedFormSolution("p=-2", p, y1, 0j, y1, roots)
    if roots.alpha1 == roots.alpha2:
        raise NumericalDomainError("equal roots in the generic branch")
    if min(abs(p - 2), abs(p + 2)) < NEAR_DEGENERATE:
        # (a1^n - a2^n)/(a1 - a2) is 0/0-prone here; a second-kind Chebyshev
        # recurrence evaluates the same quotient without cancellation
        return ClosedFormSolution("generic", p, y1, 0j, 0j, roots, method="chebyshev")
    c1 = y1 / (roots.alpha1 - roots.alpha2)
    return ClosedFormSolution("generic", p, y1, c1, -c1, roots)


class ChainRecurrence:
    """Coefficient arrays (C, A, B) of one chain, grown on demand."""

    def __init__(self, model: CoefficientModel, chain: str):
        _check_chain(chain)
        self.model = model
        self.chain = chain
        self.profile = limit_profile(model)
        self.r, self.s = self.profile.chain(chain)
        self._C = self._A = self._B = np.zeros(0)

    def coefficients(self, length):
        """(C, A, B) for equation indices 0 .. length-1."""
        if self._C.size < length:
            size = max(int(length), 2 * self._C.size, 64)
            n = np.arange(size)
            off = 1 if self.chain == "odd" else 2
            cidx = 2 * n - 1 if self.chain == "odd" else 2 * n
            C = np.empty(size)
            C[0] = self.s
            C[1:] = values(self.model, "c", cidx[1:])
            self._C = C
            self._A = values(self.model, "a", 2 * n + off)
            self._B = values(self.model, "b", 2 * n + off)
        return self._C[:length], self._A[:length], self._B[:length]

    def band_index(self, band, n):
        """Band index used at equation n (for error messages)."""
        if band == "c":
            return 2 * n - 1 if self.chain == "odd" else 2 * n
        return 2 * n + (1 if self.chain == "odd" else 2)

    def minimal_root(self, lam):
        p = (self.r - lam) / self.s
        return characteristic_roots(p).alpha1


def forward_iterate(model: CoefficientModel, chain: str, lam, seed, M: int) -> np.ndarray:
    """(y_0, ..., y_M) generated forward from ``seed = (y_0, y_1)``."""
    if M < 1:
        raise DomainError("M must be >= 1")
    rec = ChainRecurrence(model, chain)
    C, A, B = rec.coefficients(max(M - 1, 1))
    lam = complex(lam)
    y, bad = kernels.forward_sweep(C, A, B, lam, complex(seed[0]), complex(seed[1]), int(M))
    if bad >= 0:
        idx = rec.band_index("b", bad)
        raise PivotError(f"zero b-entry b_{idx} needed at recurrence step {bad}", index=idx)
    n = M - 1
    if n > 0:
        terms = np.abs(np.stack([C[:n] * y[:n], (A[:n] - lam) * y[1:n + 1], B[:n] * y[2:]]))
        res = np.abs(C[:n] * y[:n] + (A[:n] - lam) * y[1:n + 1] + B[:n] * y[2:])
        scale = terms.max(axis=0)
        ok = res <= 1e-9 * np.where(scale > 0, scale, 1.0)
        if not ok.all():
            raise NumericalDomainError(f"recurrence residual above 1e-9 at step {int(np.argmin(ok))}")
    return y


@dataclass
class MinimalSolutionResult:
    chain: str
    lam: complex
    values: np.ndarray
    boundary_residual: float
    n_start: int
    converged: bool
    normalized: bool = True
    history: list = field(default_factory=list)

    @property
    def y0(self):
        return complex(self.values[0])


def _check_region(profile, lam, collar):
    ess = essential_spectrum(profile)
    d = ess.distance(lam)
    if d <= collar:
        raise SpectralRegionError(
            f"lambda={complex(lam)} is within {collar} of the essential spectrum "
            f"{list(ess.intervals)}; no decaying solution is guaranteed there"
        )


def _start_estimate(alpha, extra, tol):
    a = abs(alpha)
    if a < 1e-300:
        return 64
    k = math.log(tol) / (2.0 * math.log(a)) if a < 1.0 else MAX_START
    n = int(min(max(extra + k + 16, 64), MAX_START))
    return 1 << (n - 1).bit_length()


def _backward(rec, lam, N, M):
    C, A, B = rec.coefficients(N)
    out, bad = kernels.backward_minimal(C, A, B, np.array([complex(lam)]), int(N), int(M))
    if bad >= 0:
        idx = rec.band_index("c", bad)
        raise PivotError(f"zero c-entry c_{idx} needed at backward step {bad}", index=idx)
    return out[0]


def _normalise(vals):
    y1 = vals[1]
    if abs(y1) > 1e-30:
        return vals / y1, True
    m = np.abs(vals).max()
    return (vals / m if m > 0 else vals), False


def minimal_solution(model: CoefficientModel, chain: str, lam, M: int = 1, *, rtol=1e-8,
                     max_start=MAX_START, collar=DEFAULT_COLLAR, n_start=None,
                     raise_on_failure=True) -> MinimalSolutionResult:
    """Decaying solution of the chain recurrence, normalised to y_1 = 1.

    Backward recurrence from ``(y_{N+1}, y_N) = (0, 1)``; N doubles until the
    normalised y_0 moves by less than ``rtol`` between N and 2N.
    """
    _check_chain(chain)
    if M < 1:
        raise DomainError("M must be >= 1")
    rec = ChainRecurrence(model, chain)
    lam = complex(lam)
    _check_region(rec.profile, lam, collar)
    alpha = rec.minimal_root(lam)
    N = n_start or _start_estimate(alpha, M + 2, rtol * 1e-2)
    N = max(N, M + 2)
    prev, ok = _normalise(_backward(rec, lam, N, M))
    history = [(N, complex(prev[0]))]
    while True:
        if 2 * N > max_start:
            if raise_on_failure:
                raise InstabilityError(
                    f"backward recurrence for lambda={lam} did not stabilise by N={N}"
                )
            return MinimalSolutionResult(chain, lam, prev, abs(prev[0]), N, False, ok, history)
        cur, ok = _normalise(_backward(rec, lam, 2 * N, M))
        history.append((2 * N, complex(cur[0])))
        if abs(cur[0] - prev[0]) <= rtol * max(abs(cur[0]), 1.0):
            return MinimalSolutionResult(chain, lam, cur, abs(cur[0]), 2 * N, True, ok, history)
        prev, N = cur, 2 * N


def _chunks(lams, threads):
    if threads <= 1 or lams.size < 2 * threads:
        return [lams]
    return np.array_split(lams, threads)


def _jost_eval(rec, lams, alphas, N, threads):
    C, A, B = rec.coefficients(N)

    def run(idx):
        t0, t1, bad = kernels.jost_sweep(C, A, B, lams[idx], alphas[idx], int(N))
        if bad >= 0:
            i = rec.band_index("c", bad)
            raise PivotError(f"zero c-entry c_{i} needed at backward step {bad}", index=i)
        return t0, t1

    parts = _chunks(np.arange(lams.size), threads)
    if len(parts) == 1:
        return run(parts[0])
    with ThreadPoolExecutor(max_workers=threads) as pool:
        res = list(pool.map(run, parts))
    return np.concatenate([r[0] for r in res]), np.concatenate([r[1] for r in res])


def jost_function(rec: ChainRecurrence, lams, *, rtol=1e-12, max_start=MAX_START, threads=1):
    """Boundary value y_0 of the decaying solution normalised as y_n ~ alpha1**n.

    Unlike the y_1 = 1 normalisation this is analytic (pole-free) in lam off
    the chain's interval, so its zeros can be counted by the argument
    principle.  Returns ``(f0, y1, converged)`` arrays.
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=np.complex128))
    alphas = np.array([rec.minimal_root(z) for z in lams], dtype=np.complex128)
    f0 = np.zeros_like(lams)
    y1 = np.zeros_like(lams)
    done = np.zeros(lams.size, dtype=bool)
    Ns = np.array([_start_estimate(a, 2, rtol * 1e-2) for a in alphas])
    while not done.all():
        N = int(Ns[~done].min())
        sel = np.flatnonzero(~done & (Ns == N))
        a_prev = _jost_eval(rec, lams[sel], alphas[sel], N, threads)
        if 2 * N > max_start:
            f0[sel], y1[sel] = a_prev[0], alphas[sel] * a_prev[1]
            done[sel] = True
            Ns[sel] = -1
            continue
        a_next = _jost_eval(rec, lams[sel], alphas[sel], 2 * N, threads)
        conv = np.abs(a_next[0] - a_prev[0]) <= rtol * np.maximum(np.abs(a_next[0]), 1.0)
        good = sel[conv]
        f0[good] = a_next[0][conv]
        y1[good] = alphas[good] * a_next[1][conv]
        done[good] = True
        Ns[good] = 2 * N
        Ns[sel[~conv]] = 2 * N
    converged = Ns > 0
    return f0, y1, converged


@dataclass(frozen=True)
class TransferMatrix:
    """2x2 map (y_j, y_{j+1}) -> (y_{j+1}, y_{j+2})."""

    matrix: np.ndarray
    chain: str
    j: int

    @property
    def det(self):
        return complex(-self.matrix[1, 0])

    def __matmul__(self, v):
        return self.matrix @ np.asarray(v)


def transfer_matrix(model: CoefficientModel, chain: str, j: int, lam) -> TransferMatrix:
    if isinstance(j, bool) or int(j) != j or j < 1:
        raise DomainError(f"j must be a positive integer, got {j!r}")
    rec = ChainRecurrence(model, chain)
    C, A, B = rec.coefficients(int(j) + 1)
    c, a, b = C[j], A[j], B[j]
    if b == 0.0:
        idx = rec.band_index("b", j)
        raise PivotError(f"zero b-entry b_{idx} in transfer matrix {j}", index=idx)
    lam = complex(lam)
    m = np.array([[0.0, 1.0], [-c / b, -(a - lam) / b]], dtype=np.complex128)
    return TransferMatrix(m, chain, int(j))


def write_trace_csv(path, values_):
    """Solution trace as columns n, re y_n, im y_n."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "re", "im"])
        for n, y in enumerate(np.asarray(values_, dtype=np.complex128)):
            w.writerow([n, repr(float(y.real)), repr(float(y.imag))])
