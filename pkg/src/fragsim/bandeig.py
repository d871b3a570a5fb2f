"""Lowest eigenpairs of real symmetric banded matrices.

Eigenvalues are isolated by Sturm-sequence bisection, then refined together with
their eigenvectors by shifted inverse iteration using a pivoted band LU. Only
the upper bands are stored, so symmetry holds by construction.
"""
from dataclasses import dataclass

import numpy as np

from ._backend import get_kernels

DEFAULT_TOL = 1e-10
_EPS = np.finfo(float).eps
_START_SEED = 0x5EED
_GROWTH_LIMIT = 1e6


class ConvergenceError(RuntimeError):
    """Inverse iteration exhausted its budget; ``best_residual`` is the best seen."""

    def __init__(self, message, best_residual):
        super().__init__(f"{message} (best residual {best_residual:.3e})")
        self.best_residual = best_residual


@dataclass(frozen=True, eq=False)
class SymmetricBandedMatrix:
    """Upper-band storage: ``bands[d][i] = A[i, i+d]``; unused tail entries are zero."""

    bands: np.ndarray

    def __post_init__(self):
        bands = np.ascontiguousarray(self.bands, dtype=np.float64)
        if bands.ndim != 2 or bands.shape[0] not in (2, 3):
            raise ValueError("bands must have shape (b+1, n) with half-bandwidth b in {1, 2}")
        if not np.all(np.isfinite(bands)):
            raise ValueError("band entries must be finite")
        n = bands.shape[1]
        for d in range(1, bands.shape[0]):
            bands[d, max(n - d, 0):] = 0.0
        bands.setflags(write=False)
        object.__setattr__(self, "bands", bands)

    @classmethod
    def from_diagonals(cls, diag, *offdiags):
        diag = np.asarray(diag, dtype=np.float64)
        n = diag.size
        bands = np.zeros((len(offdiags) + 1, n))
        bands[0] = diag
        for d, off in enumerate(offdiags, start=1):
            off = np.asarray(off, dtype=np.float64)
            if off.size != max(n - d, 0):
                raise ValueError(f"diagonal {d} must have length {n - d}")
            bands[d, : n - d] = off
        return cls(bands)

    @property
    def n(self):
        return self.bands.shape[1]

    @property
    def half_bandwidth(self):
        return self.bands.shape[0] - 1

    def matvec(self, v):
        v = np.asarray(v, dtype=np.float64)
        y = self.bands[0] * v
        n = self.n
        for d in range(1, self.half_bandwidth + 1):
            if d >= n:
                break
            off = self.bands[d, : n - d]
            y[: n - d] += off * v[d:]
            y[d:] += off * v[: n - d]
        return y

    def to_dense(self):
        a = np.diag(self.bands[0].copy())
        n = self.n
        for d in range(1, self.half_bandwidth + 1):
            if d >= n:
                break
            off = self.bands[d, : n - d]
            a += np.diag(off, d) + np.diag(off, -d)
        return a

    def norm_inf(self):
        """Infinity norm (max absolute row sum)."""
        rows = np.abs(self.bands[0]).copy()
        n = self.n
        for d in range(1, self.half_bandwidth + 1):
            if d >= n:
                break
            off = np.abs(self.bands[d, : n - d])
            rows[: n - d] += off
            rows[d:] += off
        return float(rows.max()) if n else 0.0

    def gershgorin(self):
        n = self.n
        radius = np.zeros(n)
        for d in range(1, self.half_bandwidth + 1):
            if d >= n:
                break
            off = np.abs(self.bands[d, : n - d])
            radius[: n - d] += off
            radius[d:] += off
        return float(np.min(self.bands[0] - radius)), float(np.max(self.bands[0] + radius))


@dataclass(frozen=True, eq=False)
class EigenPair:
    eigenvalue: float
    eigenvector: np.ndarray
    residual_norm: float


# trial positions inside the bracket when the midpoint count is unreliable
_PROBES = (0.5, 0.375, 0.625, 0.3, 0.7, 0.45, 0.55, 0.2, 0.8)


def _count_inside(kern, bands, lo, hi, pivmin, growth):
    """A point strictly inside (lo, hi) and its eigenvalue count."""
    for frac in _PROBES:
        x = lo + frac * (hi - lo)
        if not lo < x < hi:
            continue
        c = kern.sturm_count(bands, x, pivmin, growth)
        if c >= 0:
            return x, c
    # bracket too narrow to avoid the unstable point; accept the plain count
    x = 0.5 * (lo + hi)
    return x, kern.sturm_count(bands, x, pivmin)


def _bisect(kern, bands, index, lo, hi, pivmin, growth):
    # invariant: count(lo) <= index < count(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if hi - lo <= 2.0 * _EPS * max(abs(lo), abs(hi)) + pivmin:
            break
        x, count = _count_inside(kern, bands, lo, hi, pivmin, growth)
        if count > index:
            hi = x
        else:
            lo = x
    return 0.5 * (lo + hi)


def lowest_eigenpairs(m, k=1, tol=DEFAULT_TOL, max_iter=None, backend=None):
    """Return the ``k`` lowest eigenpairs of ``m`` in ascending order.

    Each returned pair satisfies ``||A v - lambda v|| <= tol``. Eigenvector signs
    are fixed by making the largest-magnitude component positive. Near-degenerate
    pairs are returned as an orthonormal basis of the cluster.

    Parameters
    ----------
    m : SymmetricBandedMatrix
    k : int
        Number of eigenpairs.
    tol : float
        Residual-norm bound.
    max_iter : int, optional
        Inverse-iteration budget per eigenpair, default ``10 * n``.
    backend : {"compiled", "python"}, optional
        Force a kernel implementation.
    """
    n = m.n
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= n (k={k}, n={n})")
    if not tol > 0:
        raise ValueError("tol must be positive")
    kern = get_kernels(backend)
    bands = m.bands
    budget = max_iter if max_iter is not None else 10 * n
    anorm = max(m.norm_inf(), np.finfo(float).tiny)
    pivmin = _EPS * _EPS * max(1.0, anorm)
    # pentadiagonal LDL^T loses its inertia guarantee under element growth
    growth = _GROWTH_LIMIT * anorm if m.half_bandwidth == 2 else np.inf

    glo, ghi = m.gershgorin()
    pad = 2.0 * _EPS * max(abs(glo), abs(ghi)) + 2.0 * pivmin + 1e-300
    glo -= pad
    ghi += pad

    rng = np.random.default_rng(_START_SEED)
    found_vals = []
    found_vecs = []
    pairs = []
    for j in range(k):
        shift = _bisect(kern, bands, j, glo, ghi, pivmin, growth)
        ab, ipiv = kern.band_lu(bands, shift, pivmin * anorm + _EPS * anorm * 1e-3)
        v = rng.standard_normal(n)
        v /= np.linalg.norm(v)
        best = np.inf
        result = None
        for _ in range(budget):
            v = kern.band_lu_solve(ab, ipiv, m.half_bandwidth, v)
            for u in found_vecs:
                v -= np.dot(u, v) * u
            nv = np.linalg.norm(v)
            if not np.isfinite(nv) or nv == 0.0:
                v = rng.standard_normal(n)
                continue
            v /= nv
            av = m.matvec(v)
            lam = float(np.dot(v, av))
            res = float(np.linalg.norm(av - lam * v))
            if res < best:
                best = res
            if res <= tol:
                result = (lam, v, res)
                break
        if result is None:
            raise ConvergenceError(f"eigenpair {j} did not converge in {budget} iterations", best)
        lam, v, res = result
        imax = int(np.argmax(np.abs(v)))
        if v[imax] < 0:
            v = -v
        v.setflags(write=False)
        found_vals.append(lam)
        found_vecs.append(v)
        pairs.append(EigenPair(lam, v, res))
    pairs.sort(key=lambda p: p.eigenvalue)
    return pairs
