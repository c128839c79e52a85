"""Hot loops: three-term recurrences and small eigenvalue iterations.

Every kernel exists twice, ``*_nb`` (numba, loop form) and ``*_np`` (numpy,
vectorised over the spectral parameter where that helps, LAPACK for the
eigenvalue routines).  The unsuffixed name is bound to one of them according
to :data:`pentaspec._accel.USE_NUMBA`.

Recurrence convention (one chain, equation index n = 0, 1, ...)::

    C[n] y_n + (A[n] - lam) y_{n+1} + B[n] y_{n+2} = 0
"""
import numpy as np

from ._accel import USE_NUMBA, njit

EPS = np.finfo(np.float64).eps
RESCALE = 1e100

# status codes returned by compiled kernels
OK = 0
ZERO_PIVOT = 1
NO_CONVERGENCE = 2


# --------------------------------------------------------------------------
# forward recurrence
# --------------------------------------------------------------------------
def _forward_loop(C, A, B, lam, y0, y1, M):
    out = np.zeros(M + 1, dtype=np.complex128)
    out[0] = y0
    if M >= 1:
        out[1] = y1
    for n in range(M - 1):
        if B[n] == 0.0:
            return out, n
        out[n + 2] = -(C[n] * out[n] + (A[n] - lam) * out[n + 1]) / B[n]
    return out, -1


forward_sweep_nb = njit(_forward_loop)


def forward_sweep_np(C, A, B, lam, y0, y1, M):
    # one parameter value: the loop is inherently sequential
    return _forward_loop(C, A, B, lam, y0, y1, M)


# --------------------------------------------------------------------------
# backward recurrence for the minimal solution, seed (y_{N+1}, y_N) = (0, 1)
# --------------------------------------------------------------------------
def _backward_loop(C, A, B, lams, N, M):
    L = lams.shape[0]
    out = np.zeros((L, M + 1), dtype=np.complex128)
    bad = -1
    for k in range(L):
        lam = lams[k]
        y2 = 0.0 + 0.0j
        y1 = 1.0 + 0.0j
        for n in range(N - 1, -1, -1):
            if C[n] == 0.0:
                bad = n
                break
            yn = -((A[n] - lam) * y1 + B[n] * y2) / C[n]
            if n <= M:
                out[k, n] = yn
            mag = abs(yn)
            if mag > RESCALE:
                s = 1.0 / mag
                yn *= s
                y1 *= s
                if n <= M:
                    for j in range(n, M + 1):
                        out[k, j] *= s
            y2 = y1
            y1 = yn
        if bad >= 0:
            break
    return out, bad


backward_minimal_nb = njit(_backward_loop)


def backward_minimal_np(C, A, B, lams, N, M):
    lams = np.asarray(lams, dtype=np.complex128)
    L = lams.shape[0]
    out = np.zeros((L, M + 1), dtype=np.complex128)
    if np.any(C[:N] == 0.0):
        return out, int(np.flatnonzero(C[:N] == 0.0)[-1])
    y2 = np.zeros(L, dtype=np.complex128)
    y1 = np.ones(L, dtype=np.complex128)
    for n in range(N - 1, -1, -1):
        yn = -((A[n] - lams) * y1 + B[n] * y2) / C[n]
        if n <= M:
            out[:, n] = yn
        mag = np.abs(yn)
        big = mag > RESCALE
        if big.any():
            s = np.where(big, 1.0 / np.where(big, mag, 1.0), 1.0)
            yn = yn * s
            y1 = y1 * s
            if n <= M:
                out[:, n:] *= s[:, None]
        y2, y1 = y1, yn
    return out, -1


# --------------------------------------------------------------------------
# Jost-normalised sweep: seed y_n = alpha**n at n = N, N+1, scaled t_n = y_n / alpha**n
# --------------------------------------------------------------------------
def _jost_loop(C, A, B, lams, alphas, N):
    L = lams.shape[0]
    t0 = np.zeros(L, dtype=np.complex128)
    t1 = np.zeros(L, dtype=np.complex128)
    bad = -1
    for k in range(L):
        lam = lams[k]
        al = alphas[k]
        al2 = al * al
        u2 = 1.0 + 0.0j
        u1 = 1.0 + 0.0j
        for n in range(N - 1, -1, -1):
            if C[n] == 0.0:
                bad = n
                break
            un = -((A[n] - lam) * al * u1 + B[n] * al2 * u2) / C[n]
            u2 = u1
            u1 = un
        if bad >= 0:
            break
        t0[k] = u1
        t1[k] = u2
    return t0, t1, bad


jost_sweep_nb = njit(_jost_loop)


def jost_sweep_np(C, A, B, lams, alphas, N):
    lams = np.asarray(lams, dtype=np.complex128)
    alphas = np.asarray(alphas, dtype=np.complex128)
    if np.any(C[:N] == 0.0):
        z = np.zeros(lams.shape[0], dtype=np.complex128)
        return z, z.copy(), int(np.flatnonzero(C[:N] == 0.0)[-1])
    al2 = alphas * alphas
    u2 = np.ones_like(lams)
    u1 = np.ones_like(lams)
    for n in range(N - 1, -1, -1):
        un = -((A[n] - lams) * alphas * u1 + B[n] * al2 * u2) / C[n]
        u2, u1 = u1, un
    return u1, u2, -1


# --------------------------------------------------------------------------
# symmetric tridiagonal eigenvalues: implicit-shift QL
# --------------------------------------------------------------------------
def _tridiag_ql(d_in, e_in, abs_tol, max_iter):
    n = d_in.shape[0]
    d = d_in.copy()
    e = np.zeros(n)
    for i in range(n - 1):
        e[i] = e_in[i]
    total = 0
    for l in range(n):
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= EPS * dd or abs(e[m]) <= abs_tol:
                    break
                m += 1
            if m == l:
                break
            total += 1
            if total > max_iter:
                return np.sort(d), total, NO_CONVERGENCE
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = np.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + (r if g >= 0 else -r))
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = False
            i = m - 1
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = np.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return np.sort(d), total, OK


tridiag_eigvalsh_nb = njit(_tridiag_ql)


def tridiag_eigvalsh_np(d, e, abs_tol, max_iter):
    n = d.shape[0]
    if n == 0:
        return np.zeros(0), 0, OK
    T = np.diag(d) + np.diag(e[: n - 1], 1) + np.diag(e[: n - 1], -1)
    return np.linalg.eigvalsh(T), 0, OK


# --------------------------------------------------------------------------
# general Hessenberg eigenvalues: complex single-shift QR with Wilkinson shift
# --------------------------------------------------------------------------
def _hessenberg_qr(H_in, abs_tol, max_iter):
    n = H_in.shape[0]
    H = H_in.astype(np.complex128).copy()
    eig = np.zeros(n, dtype=np.complex128)
    cs = np.zeros(n, dtype=np.complex128)
    sn = np.zeros(n, dtype=np.complex128)
    hi = n - 1
    total = 0
    since = 0
    while hi >= 0:
        l = hi
        while l > 0:
            sub = abs(H[l, l - 1])
            if sub <= EPS * (abs(H[l, l]) + abs(H[l - 1, l - 1])) or sub <= abs_tol:
                H[l, l - 1] = 0.0
                break
            l -= 1
        if l == hi:
            eig[hi] = H[hi, hi]
            hi -= 1
            since = 0
            continue
        total += 1
        since += 1
        if total > max_iter:
            # deflated eigenvalues occupy eig[hi+1:]
            return eig, total, hi + 1, NO_CONVERGENCE
        a = H[hi - 1, hi - 1]
        b = H[hi - 1, hi]
        c = H[hi, hi - 1]
        dd = H[hi, hi]
        if since % 11 == 10:
            mu = dd + 0.75 * abs(c)
        else:
            half = 0.5 * (a - dd)
            disc = np.sqrt(half * half + b * c)
            mu1 = 0.5 * (a + dd) + disc
            mu2 = 0.5 * (a + dd) - disc
            mu = mu1 if abs(mu1 - dd) <= abs(mu2 - dd) else mu2
        for k in range(l, hi + 1):
            H[k, k] -= mu
        for k in range(l, hi):
            x = H[k, k]
            y = H[k + 1, k]
            r = np.sqrt(abs(x) ** 2 + abs(y) ** 2)
            if r == 0.0:
                cc = 1.0 + 0.0j
                ss = 0.0 + 0.0j
            else:
                cc = x / r
                ss = y / r
            cs[k] = cc
            sn[k] = ss
            for j in range(k, hi + 1):
                u = H[k, j]
                v = H[k + 1, j]
                H[k, j] = np.conj(cc) * u + np.conj(ss) * v
                H[k + 1, j] = -ss * u + cc * v
        for k in range(l, hi):
            cc = cs[k]
            ss = sn[k]
            top = min(k + 2, hi)
            for i in range(l, top + 1):
                u = H[i, k]
                v = H[i, k + 1]
                H[i, k] = u * cc + v * ss
                H[i, k + 1] = -u * np.conj(ss) + v * np.conj(cc)
        for k in range(l, hi + 1):
            H[k, k] += mu
    return eig, total, 0, OK


hessenberg_eigvals_nb = njit(_hessenberg_qr)


def hessenberg_eigvals_np(H, abs_tol, max_iter):
    return np.linalg.eigvals(H).astype(np.complex128), 0, 0, OK


if USE_NUMBA:
    forward_sweep = forward_sweep_nb
    backward_minimal = backward_minimal_nb
    jost_sweep = jost_sweep_nb
    tridiag_eigvalsh = tridiag_eigvalsh_nb
    hessenberg_eigvals = hessenberg_eigvals_nb
else:
    forward_sweep = forward_sweep_np
    backward_minimal = backward_minimal_np
    jost_sweep = jost_sweep_np
    tridiag_eigvalsh = tridiag_eigvalsh_np
    hessenberg_eigvals = hessenberg_eigvals_np
