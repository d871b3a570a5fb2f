"""Pure-Python implementations of the hot loops.

Same signatures and semantics as the compiled ``_kernels`` module; used when the
extension is not built or when ``FRAGSIM_PURE_PYTHON`` is set.
"""
import math

import numpy as np

DARK_DENSITY = 1e-28


def sturm_count(bands, sigma, pivmin, growth=math.inf):
    """Number of eigenvalues of the banded matrix strictly below ``sigma``.

    Inertia of ``A - sigma*I`` from an unpivoted LDL^T factorization; tiny
    pivots are replaced by ``-pivmin``. Returns -1 when a Schur update exceeds
    ``growth``, since the count is then not backward stable.
    """
    b = bands.shape[0] - 1
    n = bands.shape[1]
    diag = bands[0].tolist()
    e1 = bands[1].tolist() if b >= 1 else None
    e2 = bands[2].tolist() if b >= 2 else None
    count = 0
    d1 = d2 = 1.0  # d[i-1], d[i-2]
    l_prev = 0.0  # L[i-1, i-2]
    for i in range(n):
        di = diag[i] - sigma
        l21 = l1 = 0.0
        if b == 2 and i >= 2:
            l21 = e2[i - 2] / d2
            if abs(l21 * l21 * d2) > growth:
                return -1
            di -= l21 * l21 * d2
        if i >= 1 and b >= 1:
            s = e1[i - 1]
            if b == 2 and i >= 2:
                s -= l21 * l_prev * d2
            l1 = s / d1
            if abs(l1 * l1 * d1) > growth:
                return -1
            di -= l1 * l1 * d1
        if abs(di) < pivmin:
            di = -pivmin
        if di < 0.0:
            count += 1
        l_prev = l1
        d2 = d1
        d1 = di
    return count


def band_lu(bands, sigma, pivmin):
    """LU with partial pivoting of ``A - sigma*I`` in LAPACK ``gbtrf`` layout.

    Returns ``(ab, ipiv)`` with ``ab`` of shape ``(3b+1, n)``.
    """
    b = bands.shape[0] - 1
    n = bands.shape[1]
    kl = ku = b
    kv = kl + ku
    ab = np.zeros((2 * kl + ku + 1, n))
    for j in range(n):
        ab[kv, j] = bands[0, j] - sigma
    for d in range(1, b + 1):
        for j in range(n - d):
            # A[j, j+d] and A[j+d, j]
            ab[kv - d, j + d] = bands[d, j]
            ab[kv + d, j] = bands[d, j]
    rows = [list(ab[r]) for r in range(ab.shape[0])]
    ipiv = [0] * n
    ju = 0
    for j in range(n):
        km = min(kl, n - 1 - j)
        jp = 0
        best = abs(rows[kv][j])
        for t in range(1, km + 1):
            v = abs(rows[kv + t][j])
            if v > best:
                best = v
                jp = t
        ipiv[j] = j + jp
        if best < pivmin:
            rows[kv][j] = pivmin if rows[kv][j] >= 0.0 else -pivmin
            jp = 0
            ipiv[j] = j
        ju = max(ju, min(j + ku + jp, n - 1))
        if jp != 0:
            for c in range(j, ju + 1):
                r1 = kv + j - c
                r2 = kv + j + jp - c
                rows[r1][c], rows[r2][c] = rows[r2][c], rows[r1][c]
        if km > 0:
            piv = rows[kv][j]
            for t in range(1, km + 1):
                rows[kv + t][j] /= piv
            for c in range(j + 1, ju + 1):
                u = rows[kv + j - c][c]
                if u != 0.0:
                    for t in range(1, km + 1):
                        rows[kv + j + t - c][c] -= rows[kv + t][j] * u
    return np.array(rows), np.array(ipiv, dtype=np.intp)


def band_lu_solve(ab, ipiv, b, rhs):
    """Solve with the factors from :func:`band_lu`; returns a new array."""
    n = ab.shape[1]
    kl = b
    kv = 2 * b
    rows = [list(ab[r]) for r in range(ab.shape[0])]
    x = list(rhs)
    piv = list(ipiv)
    for j in range(n - 1):
        km = min(kl, n - 1 - j)
        p = piv[j]
        if p != j:
            x[p], x[j] = x[j], x[p]
        xj = x[j]
        if xj != 0.0:
            for t in range(1, km + 1):
                x[j + t] -= rows[kv + t][j] * xj
    for j in range(n - 1, -1, -1):
        xj = x[j] / rows[kv][j]
        x[j] = xj
        if xj != 0.0:
            for i in range(max(0, j - kv), j):
                x[i] -= rows[kv + i - j][j] * xj
    return np.array(x)


def detect_loop(amps, M, k, m_target, uniforms, out_x, ndone):
    """Sequential detections by rejection sampling; mutates ``amps`` and ``out_x``.

    Consumes uniforms in pairs (position, acceptance). Stops when ``m_target``
    detections are recorded or when the uniforms run out mid-detection.
    Returns ``(ndone, used, M)``.
    """
    period = math.pi / k
    nu = len(uniforms)
    pos = 0
    c = amps
    while ndone < m_target:
        n = np.arange(M)
        root = np.sqrt((n + 1.0) * (M - n))
        beta = (2.0 / M) * np.sum(np.conj(c[:M]) * c[1 : M + 1] * root)
        bound = 1.0 + abs(beta)
        accepted = False
        x = 0.0
        while pos + 2 <= nu:
            x = uniforms[pos] * period
            w = uniforms[pos + 1] * bound
            pos += 2
            dens = 1.0 + (beta * complex(math.cos(2.0 * k * x), math.sin(2.0 * k * x))).real
            if w <= dens:
                accepted = True
                break
        if not accepted:
            break
        e = complex(math.cos(k * x), math.sin(k * x))
        new = e * np.sqrt(n + 1.0) * c[1 : M + 1] + e.conjugate() * np.sqrt(M - n) * c[:M]
        norm2 = float(np.sum(new.real**2 + new.imag**2))
        if norm2 <= M * DARK_DENSITY:
            raise ZeroDivisionError("posterior has zero norm")
        c[:M] = new / math.sqrt(norm2)
        c[M] = 0.0
        M -= 1
        out_x[ndone] = x
        ndone += 1
    return ndone, pos, M
