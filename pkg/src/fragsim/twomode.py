"""Single-particle modes of the double well and the two-mode constants.

The lowest eigenstates of -1/2 d^2/dx^2 + U(x) are computed on a symmetric
hard-wall grid with second-order finite differences. The symmetric ground state
and antisymmetric first excited state give the localized pair
phi1 = (phi_s + phi_a)/sqrt(2) (right well) and its mirror image phi2, from which
eps11, eps12, T0, T1, T2 follow. Transverse directions enter only through the
analytic Gaussian factors of ``trapmodel``.
"""
import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad, simpson

from . import bandeig
from .trapmodel import PotentialProfile, TrapSpec, potential_profile, to_natural, transverse_factors

DEFAULT_SPACING = 0.01
TURNING_FACTOR = 1.5
TAIL_ACTION = 20.0
PARITY_THRESHOLD = 0.9
_CLUSTER_RTOL = 1e-6


class ModeError(RuntimeError):
    """The discretized spectrum could not be classified as expected."""


@dataclass(frozen=True)
class Grid1D:
    """Odd number of points symmetric about zero; wavefunctions vanish at both ends."""

    half_extent: float
    n: int

    def __post_init__(self):
        if self.n < 5 or self.n % 2 == 0:
            raise ValueError(f"point count must be odd and >= 5, got {self.n}")
        if not self.half_extent > 0:
            raise ValueError("half_extent must be positive")

    @classmethod
    def from_spacing(cls, min_half_extent, spacing):
        half_points = max(int(math.ceil(min_half_extent / spacing - 1e-9)), 2)
        return cls(half_extent=half_points * spacing, n=2 * half_points + 1)

    @property
    def spacing(self):
        return 2.0 * self.half_extent / (self.n - 1)

    @property
    def points(self):
        # integer offsets keep x_i + x_{n-1-i} == 0 exactly
        offsets = np.arange(self.n) - (self.n - 1) // 2
        return offsets * self.spacing


@dataclass(frozen=True, eq=False)
class ModeSpectrum:
    grid: Grid1D
    potential: np.ndarray
    energies: np.ndarray
    states: np.ndarray
    parities: np.ndarray
    phi_s: np.ndarray
    phi_a: np.ndarray
    eps_s: float
    eps_a: float
    eps_s1: float


@dataclass(frozen=True, eq=False)
class ModeSet:
    """Everything the many-body problem needs from the single-particle problem."""

    grid: Grid1D
    potential: np.ndarray
    phi_s: np.ndarray
    phi_a: np.ndarray
    eps_s: float
    eps_a: float
    eps_s1: float
    phi1: np.ndarray
    phi2: np.ndarray
    eps11: float
    eps12: float
    T0: float
    T1: float
    T2: float
    transverse_zero_point: float


@dataclass(frozen=True)
class OverlapIntegrals:
    T0: float
    T1: float
    T2: float


@dataclass(frozen=True)
class Diagnostics:
    validity_ratio: float
    status: str
    tunneling_time: float
    tunneling_time_s: float


def _tail_extent(profile, energy, action):
    """Smallest x beyond the turning point where the WKB decay exponent reaches ``action``."""
    xt = profile.turning_point(energy)

    def kappa(x):
        return math.sqrt(max(2.0 * (float(profile(x)) - energy), 0.0))

    x, acc, step = xt, 0.0, 0.05
    while acc < action:
        acc += quad(kappa, x, x + step)[0]
        x += step
    return x


def auto_grid(profile: PotentialProfile, count=4, spacing=None, energy=None, ground_energy=None):
    """Hard-wall grid for the lowest ``count`` states.

    The half extent is ``TURNING_FACTOR`` times the outer classical turning
    point of state ``count`` (energy ``energy``), extended if needed until the
    ground state's WKB tail exponent reaches ``TAIL_ACTION``. Without energies,
    an upper bound from the harmonic ladder plus the barrier peak is used.
    """
    h = spacing if spacing is not None else min(DEFAULT_SPACING, profile.barrier_width / 16.0)
    if h > profile.barrier_width / 8.0 + 1e-15:
        raise ValueError(f"spacing {h} does not resolve the barrier (needs <= width/8)")
    bound = (count - 0.5) * profile.effective_frequency + profile.barrier_peak
    e_top = energy if energy is not None else bound
    e_low = ground_energy if ground_energy is not None else bound
    extent = max(TURNING_FACTOR * profile.turning_point(e_top), _tail_extent(profile, e_low, TAIL_ACTION))
    return Grid1D.from_spacing(extent, h)


def hamiltonian_matrix(profile: PotentialProfile, grid: Grid1D):
    """Tridiagonal finite-difference Hamiltonian on the interior points."""
    h = grid.spacing
    x = grid.points[1:-1]
    diag = 1.0 / (h * h) + profile(x)
    off = np.full(x.size - 1, -0.5 / (h * h))
    return bandeig.SymmetricBandedMatrix.from_diagonals(diag, off)


def _parity_basis(vecs, vals, h):
    """Rotate a near-degenerate cluster onto reflection eigenvectors."""
    refl = h * vecs @ vecs[:, ::-1].T
    refl = 0.5 * (refl + refl.T)
    par, q = np.linalg.eigh(refl)
    new_vecs = q.T @ vecs
    new_vals = np.einsum("ij,j,ij->i", q.T, vals, q.T)
    order = np.argsort(new_vals, kind="stable")
    return new_vecs[order], new_vals[order]


def solve_modes(profile: PotentialProfile, grid: Grid1D, count=4, tol=None, backend=None) -> ModeSpectrum:
    """Lowest ``count`` states classified by parity.

    Raises
    ------
    ModeError
        When a state's parity overlap is below ``PARITY_THRESHOLD`` or the two
        lowest states are not even-then-odd.
    """
    if count < 4:
        raise ValueError("count must be >= 4")
    h = grid.spacing
    if h > profile.barrier_width / 8.0 + 1e-15:
        raise ValueError(f"grid spacing {h:.4g} does not resolve the barrier (needs <= width/8)")
    mat = hamiltonian_matrix(profile, grid)
    anorm = mat.norm_inf()
    if tol is None:
        tol = max(bandeig.DEFAULT_TOL, 64.0 * np.finfo(float).eps * anorm * math.sqrt(mat.n))
    pairs = bandeig.lowest_eigenpairs(mat, count, tol=tol, backend=backend)
    vals = np.array([p.eigenvalue for p in pairs])
    vecs = np.zeros((count, grid.n))
    for i, p in enumerate(pairs):
        vecs[i, 1:-1] = p.eigenvector / math.sqrt(h)

    # group near-degenerate eigenvalues and give each cluster a parity basis
    i = 0
    while i < count:
        j = i + 1
        while j < count and vals[j] - vals[j - 1] <= _CLUSTER_RTOL * max(1.0, abs(vals[j])):
            j += 1
        if j - i > 1:
            vecs[i:j], vals[i:j] = _parity_basis(vecs[i:j], vals[i:j], h)
        i = j

    parities = h * np.einsum("ij,ij->i", vecs, vecs[:, ::-1])
    bad = np.flatnonzero(np.abs(parities) < PARITY_THRESHOLD)
    if bad.size:
        raise ModeError(
            f"ambiguous parity for states {bad.tolist()} (overlaps {parities[bad]}); refine the grid"
        )
    even = np.flatnonzero(parities > 0)
    odd = np.flatnonzero(parities < 0)
    if len(even) < 2 or len(odd) < 1:
        raise ModeError("need two even and one odd state; increase count")
    s, a, s1 = even[0], odd[0], even[1]
    eps_s, eps_a = float(vals[s]), float(vals[a])
    if not (s == 0 and a == 1):
        # exact doublets may come back in either order at round-off level
        noise = 128.0 * np.finfo(float).eps * anorm
        if {s, a} == {0, 1} and abs(eps_a - eps_s) <= noise:
            eps_a = eps_s
        else:
            raise ModeError(f"lowest two states are not even-then-odd (even={even.tolist()}, odd={odd.tolist()})")

    # H commutes with reflection on the symmetric grid: remove the residual
    # admixture of nearly degenerate partners left by inverse iteration
    for i in range(count):
        sign = 1.0 if parities[i] > 0 else -1.0
        v = 0.5 * (vecs[i] + sign * vecs[i, ::-1])
        vecs[i] = v / math.sqrt(h * np.dot(v, v))

    phi_s = vecs[s].copy()
    if phi_s[np.argmax(np.abs(phi_s))] < 0:
        phi_s = -phi_s
    phi_a = vecs[a].copy()
    right = grid.points > 0
    if phi_a[right][np.argmax(np.abs(phi_a[right]))] < 0:
        phi_a = -phi_a
    for arr in (phi_s, phi_a, vecs, vals, parities):
        arr.setflags(write=False)
    potential = profile(grid.points)
    potential.setflags(write=False)
    return ModeSpectrum(
        grid=grid,
        potential=potential,
        energies=vals,
        states=vecs,
        parities=parities,
        phi_s=phi_s,
        phi_a=phi_a,
        eps_s=eps_s,
        eps_a=eps_a,
        eps_s1=float(vals[s1]),
    )


def localized_pair(spectrum: ModeSpectrum):
    """(phi1, phi2): right-well state and its mirror image."""
    phi1 = (spectrum.phi_s + spectrum.phi_a) / math.sqrt(2.0)
    phi2 = (spectrum.phi_s - spectrum.phi_a) / math.sqrt(2.0)
    return phi1, phi2


def overlap_integrals(phi1, phi2, grid: Grid1D, transverse_product=1.0) -> OverlapIntegrals:
    """Simpson quadrature of phi1^4, phi1^3 phi2, phi1^2 phi2^2 times the transverse factor."""
    phi1 = np.asarray(phi1)
    phi2 = np.asarray(phi2)
    if phi1.shape != (grid.n,) or phi2.shape != (grid.n,):
        raise ValueError(f"wavefunctions must have shape ({grid.n},), got {phi1.shape} and {phi2.shape}")
    x = grid.points
    p1sq = phi1 * phi1
    t0 = simpson(p1sq * p1sq, x=x)
    t1 = simpson(p1sq * phi1 * phi2, x=x)
    t2 = simpson(p1sq * phi2 * phi2, x=x)
    return OverlapIntegrals(T0=t0 * transverse_product, T1=t1 * transverse_product, T2=t2 * transverse_product)


def mode_energies(spectrum: ModeSpectrum, transverse_zero_point=0.0):
    """(eps11, eps12); the transverse zero-point energy shifts eps11 only."""
    eps11 = 0.5 * (spectrum.eps_s + spectrum.eps_a) + transverse_zero_point
    eps12 = 0.5 * (spectrum.eps_s - spectrum.eps_a)
    return eps11, eps12


def compute_modes(spec: TrapSpec, grid: Grid1D = None, count=4, spacing=None, backend=None) -> ModeSet:
    """Solve the single-particle problem for ``spec`` and reduce it to two-mode constants.

    Without an explicit grid, a first solve on a conservative grid supplies the
    energies that fix the final half extent.
    """
    profile = potential_profile(spec)
    scale = to_natural(spec)
    if grid is None:
        trial = solve_modes(profile, auto_grid(profile, count, spacing), count, backend=backend)
        grid = auto_grid(profile, count, spacing, energy=trial.energies[-1], ground_energy=trial.eps_s)
    spectrum = solve_modes(profile, grid, count, backend=backend)
    product, zero_point = transverse_factors(spec, scale)
    phi1, phi2 = localized_pair(spectrum)
    overlaps = overlap_integrals(phi1, phi2, grid, product)
    eps11, eps12 = mode_energies(spectrum, zero_point)
    return ModeSet(
        grid=grid,
        potential=spectrum.potential,
        phi_s=spectrum.phi_s,
        phi_a=spectrum.phi_a,
        eps_s=spectrum.eps_s,
        eps_a=spectrum.eps_a,
        eps_s1=spectrum.eps_s1,
        phi1=phi1,
        phi2=phi2,
        eps11=eps11,
        eps12=eps12,
        T0=overlaps.T0,
        T1=overlaps.T1,
        T2=overlaps.T2,
        transverse_zero_point=zero_point,
    )


def diagnostics(modes: ModeSet, g, N, time_unit=None) -> Diagnostics:
    """Perturbative-validity ratio g N T0 / (eps_s1 - eps_s) and the tunneling time.

    The tunneling time is the half period pi / (2 |eps12|) of single-particle
    inversion; ``time_unit`` (seconds per natural time unit) converts it.
    """
    ratio = g * N * modes.T0 / (modes.eps_s1 - modes.eps_s)
    if ratio < 0.1:
        status = "valid"
    elif ratio < 1.0:
        status = "marginal"
    else:
        status = "invalid"
    gap = abs(modes.eps12)
    t_nat = math.pi / (2.0 * gap) if gap > 0 else math.inf
    t_s = t_nat * time_unit if time_unit is not None else math.nan
    return Diagnostics(validity_ratio=ratio, status=status, tunneling_time=t_nat, tunneling_time_s=t_s)


def write_profile_csv(modes: ModeSet, path):
    """Columns x, U, phi1, phi2 on the mode grid."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(["x", "U", "phi1", "phi2"])
        for row in zip(modes.grid.points, modes.potential, modes.phi1, modes.phi2):
            writer.writerow([f"{v:.16e}" for v in row])
