# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. Semantics mirror ``_kernels_py`` exactly."""
import numpy as np

cdef double DARK_DENSITY = 1e-28

from libc.math cimport fabs, sqrt, cos, sin, M_PI, INFINITY


def sturm_count(const double[:, :] bands, double sigma, double pivmin, double growth=INFINITY):
    cdef Py_ssize_t b = bands.shape[0] - 1
    cdef Py_ssize_t n = bands.shape[1]
    cdef Py_ssize_t i
    cdef long count = 0
    cdef double d1 = 1.0, d2 = 1.0, l_prev = 0.0
    cdef double di, l21, l1, s
    for i in range(n):
        di = bands[0, i] - sigma
        l21 = 0.0
        l1 = 0.0
        if b == 2 and i >= 2:
            l21 = bands[2, i - 2] / d2
            if fabs(l21 * l21 * d2) > growth:
                return -1
            di -= l21 * l21 * d2
        if i >= 1 and b >= 1:
            s = bands[1, i - 1]
            if b == 2 and i >= 2:
                s -= l21 * l_prev * d2
            l1 = s / d1
            if fabs(l1 * l1 * d1) > growth:
                return -1
            di -= l1 * l1 * d1
        if fabs(di) < pivmin:
            di = -pivmin
        if di < 0.0:
            count += 1
        l_prev = l1
        d2 = d1
        d1 = di
    return count


def band_lu(const double[:, :] bands, double sigma, double pivmin):
    cdef Py_ssize_t b = bands.shape[0] - 1
    cdef Py_ssize_t n = bands.shape[1]
    cdef Py_ssize_t kl = b, ku = b, kv = 2 * b
    cdef Py_ssize_t j, d, t, c, km, jp, ju, r1, r2
    cdef double best, v, piv, u, tmp
    ab_arr = np.zeros((2 * kl + ku + 1, n))
    ipiv_arr = np.zeros(n, dtype=np.intp)
    cdef double[:, ::1] ab = ab_arr
    cdef Py_ssize_t[::1] ipiv = ipiv_arr
    for j in range(n):
        ab[kv, j] = bands[0, j] - sigma
    for d in range(1, b + 1):
        for j in range(n - d):
            ab[kv - d, j + d] = bands[d, j]
            ab[kv + d, j] = bands[d, j]
    ju = 0
    for j in range(n):
        km = kl if kl < n - 1 - j else n - 1 - j
        jp = 0
        best = fabs(ab[kv, j])
        for t in range(1, km + 1):
            v = fabs(ab[kv + t, j])
            if v > best:
                best = v
                jp = t
        ipiv[j] = j + jp
        if best < pivmin:
            ab[kv, j] = pivmin if ab[kv, j] >= 0.0 else -pivmin
            jp = 0
            ipiv[j] = j
        t = j + ku + jp
        if t > n - 1:
            t = n - 1
        if t > ju:
            ju = t
        if jp != 0:
            for c in range(j, ju + 1):
                r1 = kv + j - c
                r2 = kv + j + jp - c
                tmp = ab[r1, c]
                ab[r1, c] = ab[r2, c]
                ab[r2, c] = tmp
        if km > 0:
            piv = ab[kv, j]
            for t in range(1, km + 1):
                ab[kv + t, j] /= piv
            for c in range(j + 1, ju + 1):
                u = ab[kv + j - c, c]
                if u != 0.0:
                    for t in range(1, km + 1):
                        ab[kv + j + t - c, c] -= ab[kv + t, j] * u
    return ab_arr, ipiv_arr


def band_lu_solve(const double[:, ::1] ab, const Py_ssize_t[::1] ipiv, Py_ssize_t b, rhs):
    cdef Py_ssize_t n = ab.shape[1]
    cdef Py_ssize_t kl = b, kv = 2 * b
    cdef Py_ssize_t j, t, km, p, i, lo
    cdef double xj, tmp
    x_arr = np.array(rhs, dtype=np.float64, copy=True)
    cdef double[::1] x = x_arr
    for j in range(n - 1):
        km = kl if kl < n - 1 - j else n - 1 - j
        p = ipiv[j]
        if p != j:
            tmp = x[p]
            x[p] = x[j]
            x[j] = tmp
        xj = x[j]
        if xj != 0.0:
            for t in range(1, km + 1):
                x[j + t] -= ab[kv + t, j] * xj
    for j in range(n - 1, -1, -1):
        xj = x[j] / ab[kv, j]
        x[j] = xj
        if xj != 0.0:
            lo = j - kv if j - kv > 0 else 0
            for i in range(lo, j):
                x[i] -= ab[kv + i - j, j] * xj
    return x_arr


def detect_loop(double complex[::1] amps, Py_ssize_t M, double k, Py_ssize_t m_target,
                const double[::1] uniforms, double[::1] out_x, Py_ssize_t ndone):
    cdef Py_ssize_t nu = uniforms.shape[0]
    cdef Py_ssize_t pos = 0
    cdef Py_ssize_t n
    cdef double period = M_PI / k
    cdef double complex beta, e, ec, cur, nxt
    cdef double bound, x = 0.0, w, dens, norm, inv
    cdef bint accepted
    while ndone < m_target:
        beta = 0.0
        for n in range(M):
            beta = beta + amps[n].conjugate() * amps[n + 1] * sqrt((n + 1.0) * (M - n))
        beta = beta * (2.0 / M)
        bound = 1.0 + abs(beta)
        accepted = False
        while pos + 2 <= nu:
            x = uniforms[pos] * period
            w = uniforms[pos + 1] * bound
            pos += 2
            dens = 1.0 + beta.real * cos(2.0 * k * x) - beta.imag * sin(2.0 * k * x)
            if w <= dens:
                accepted = True
                break
        if not accepted:
            break
        e = cos(k * x) + 1j * sin(k * x)
        ec = e.conjugate()
        norm = 0.0
        for n in range(M):
            nxt = e * sqrt(n + 1.0) * amps[n + 1] + ec * sqrt(<double>(M - n)) * amps[n]
            amps[n] = nxt
            norm += nxt.real * nxt.real + nxt.imag * nxt.imag
        if norm <= M * DARK_DENSITY:
            raise ZeroDivisionError("posterior has zero norm")
        inv = 1.0 / sqrt(norm)
        for n in range(M):
            amps[n] = amps[n] * inv
        amps[M] = 0.0
        M -= 1
        out_x[ndone] = x
        ndone += 1
    return ndone, pos, M
