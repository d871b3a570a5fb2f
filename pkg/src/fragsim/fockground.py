"""Many-body ground state over the Fock amplitudes C_N1 and its coherence measures.

The variational equations for C_N1 form a symmetric pentadiagonal matrix of
dimension N+1. The state ansatz is reflection symmetric (C_N1 = C_{N-N1}), so
the ground state is the lowest eigenvector in the even sector.
"""
import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import bandeig

MAX_PARTICLES = 16384


class FockError(ValueError):
    pass


@dataclass(frozen=True)
class TwoModeParams:
    """Constants of the two-mode Hamiltonian (natural units, 3D-reduced)."""

    eps11: float
    eps12: float
    g: float
    T0: float
    T1: float
    T2: float
    N: int

    def __post_init__(self):
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N < 2 or self.N % 2:
            raise FockError(f"N must be an even integer >= 2, got {self.N!r}")
        if self.N > MAX_PARTICLES:
            raise FockError(f"N={self.N} exceeds {MAX_PARTICLES}; use the closed-form approximations")
        if self.eps12 > 0:
            raise FockError(f"eps12 must be <= 0, got {self.eps12}")
        if not self.T0 > 0:
            raise FockError(f"T0 must be positive, got {self.T0}")
        for name in ("eps11", "eps12", "g", "T0", "T1", "T2"):
            if not math.isfinite(getattr(self, name)):
                raise FockError(f"{name} must be finite")
        object.__setattr__(self, "N", int(self.N))

    @classmethod
    def from_modes(cls, modes, g, N):
        return cls(eps11=modes.eps11, eps12=modes.eps12, g=g, T0=modes.T0, T1=modes.T1, T2=modes.T2, N=N)

    @property
    def hopping(self):
        """Effective single-particle coupling eps12 + g T1 (N-1)."""
        return self.eps12 + self.g * self.T1 * (self.N - 1)


@dataclass(frozen=True, eq=False)
class FockState:
    N: int
    amplitudes: np.ndarray
    energy: float


@dataclass(frozen=True)
class CoherenceReport:
    C1: float
    dN1: float
    C2: float
    Jz_mean: float


def assemble_hamiltonian(p: TwoModeParams) -> bandeig.SymmetricBandedMatrix:
    N = p.N
    n1 = np.arange(N + 1, dtype=float)
    n2 = N - n1
    gt0, gt2 = p.g * p.T0, p.g * p.T2
    diag = N * p.eps11 + 0.5 * gt0 * (n1 * n1 + n2 * n2 - N) + 2.0 * gt2 * n1 * n2
    a = n1[:-1]
    off1 = p.hopping * np.sqrt((a + 1.0) * (N - a))
    b = n1[:-2]
    off2 = 0.5 * gt2 * np.sqrt((b + 1.0) * (b + 2.0) * (N - b) * (N - b - 1.0))
    return bandeig.SymmetricBandedMatrix.from_diagonals(diag, off1, off2)


def _even_part(v):
    return 0.5 * (v + v[::-1])


def ground_state(p: TwoModeParams, tol=bandeig.DEFAULT_TOL, backend=None) -> FockState:
    """Lowest reflection-symmetric eigenvector, symmetrized and sign-fixed (C_{N/2} >= 0)."""
    mat = assemble_hamiltonian(p)
    tol = max(tol, 64.0 * np.finfo(float).eps * mat.norm_inf() * math.sqrt(mat.n))
    n = mat.n
    k = 1
    while True:
        pairs = bandeig.lowest_eigenpairs(mat, min(k, n), tol=tol, backend=backend)
        chosen = None
        for i, pair in enumerate(pairs):
            v = pair.eigenvector
            if np.dot(v, v[::-1]) > 0.5:
                chosen = pair
                break
            # degenerate partner: recover the even combination from the cluster
            if i + 1 < len(pairs) and abs(pairs[i + 1].eigenvalue - pair.eigenvalue) <= tol:
                for w in (v, pairs[i + 1].eigenvector):
                    e = _even_part(w)
                    if np.linalg.norm(e) > 0.1:
                        chosen = bandeig.EigenPair(pair.eigenvalue, e / np.linalg.norm(e), pair.residual_norm)
                        break
                if chosen is not None:
                    break
        if chosen is not None or k >= n:
            break
        k = min(2 * k + 1, n)
    if chosen is None:
        raise FockError("no reflection-symmetric eigenvector found")
    amps = _even_part(np.array(chosen.eigenvector))
    amps /= np.linalg.norm(amps)
    if amps[p.N // 2] < 0:
        amps = -amps
    amps.setflags(write=False)
    return FockState(N=p.N, amplitudes=amps, energy=float(chosen.eigenvalue))


def hopping_expectation(amps, N):
    """<a1^dag a2 + a2^dag a1> for real amplitudes."""
    c = np.asarray(amps, dtype=float)
    a = np.arange(N, dtype=float)
    return 2.0 * float(np.sum(c[:-1] * c[1:] * np.sqrt((a + 1.0) * (N - a))))


def second_order_coherence(dN1, N):
    r = (dN1 / N) ** 2
    return (1.0 - 4.0 * r) / ((N - 2.0) / N + 4.0 * r)


def observables(s: FockState) -> CoherenceReport:
    N = s.N
    c = np.asarray(s.amplitudes, dtype=float)
    prob = c * c
    n1 = np.arange(N + 1, dtype=float)
    mean = float(np.sum(n1 * prob))
    # centred second moment avoids cancellation when the spread is tiny
    var = float(np.sum((n1 - mean) ** 2 * prob))
    dN1 = math.sqrt(max(var, 0.0))
    C1 = hopping_expectation(c, N) / N
    return CoherenceReport(C1=C1, dN1=dN1, C2=second_order_coherence(dN1, N), Jz_mean=0.5 * N * C1)


def binomial_amplitudes(N):
    """Single condensate |N> in the symmetric mode, written over N1."""
    k = np.arange(N + 1)
    log_c = 0.5 * (gammaln(N + 1) - gammaln(k + 1) - gammaln(N - k + 1)) - 0.5 * N * math.log(2.0)
    amps = np.exp(log_c)
    return amps / np.linalg.norm(amps)


def dual_condensate_amplitudes(N):
    amps = np.zeros(N + 1)
    amps[N // 2] = 1.0
    return amps


def write_coefficients_csv(state: FockState, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(["N1", "C_N1"])
        for n1, c in enumerate(state.amplitudes):
            writer.writerow([n1, f"{c:.16e}"])
