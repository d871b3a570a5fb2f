"""Analytic approximations to the two-mode ground state.

``continuum_approx`` treats C_N1 as a smooth Gaussian in u = (N1 - N/2)/N and
holds while the number spread is at least one particle. ``two_coefficient_approx``
keeps only N1 = N/2 and N/2 +- 1 and holds deep in the fragmented regime.
"""
import math
from dataclasses import dataclass

import numpy as np

from .fockground import TwoModeParams

CONTINUUM_MIN_SPREAD = 1.0
TWO_COEF_MAX = 0.1
SIMPLIFY_RATIO = 0.01


class ContinuumError(ArithmeticError):
    """Parameters outside the regime where the continuum expressions are defined."""


@dataclass(frozen=True)
class ContinuumResult:
    A: float
    B: float
    sigma: float
    dN1: float
    C1: float
    E: float
    valid: bool
    sigma_simplified: float = None


@dataclass(frozen=True, eq=False)
class TwoCoefResult:
    gamma: float
    zeta: float
    amplitudes: np.ndarray
    C1: float
    dN1: float
    E: float
    valid: bool
    note: str = ""


def continuum_coherence(sigma, N):
    return math.exp(-1.0 / (8.0 * sigma * sigma * N * N)) * (1.0 + 1.0 / N - 2.0 * sigma * sigma)


def continuum_approx(p: TwoModeParams) -> ContinuumResult:
    N, g = p.N, p.g
    e = -p.eps12
    denom = e - N * g * (p.T1 + p.T2)
    if not denom > 1e-300:
        raise ContinuumError(
            f"-eps12 - N g (T1 + T2) = {denom:.3e} is not positive: outside continuum validity"
        )
    A = 1.5 / N * (e - N * g * (p.T1 + 4.0 * p.T2 / 3.0)) / denom
    B = (e - N * g * (p.T1 + 1.5 * p.T2 - 0.5 * p.T0)) / denom
    if not B > 0:
        raise ContinuumError(f"B = {B:.3e} is not positive: outside continuum validity")
    root = -A + math.sqrt(A * A + B)
    sigma = 1.0 / (2.0 * math.sqrt(N)) / math.sqrt(root)
    energy = N * (
        denom / (4.0 * N * N * sigma * sigma)
        + (p.eps11 + p.eps12)
        + N * g * (0.25 * p.T0 + p.T1 + 0.75 * p.T2)
    )
    simplified = None
    if e > 0 and N * g * abs(p.T1) <= SIMPLIFY_RATIO * e and N * g * p.T2 <= SIMPLIFY_RATIO * e:
        # leading-order reduction of the full form (A -> 0, B -> 1 + N g T0 / 2e)
        simplified = 1.0 / (2.0 * math.sqrt(N)) / (1.0 + 0.5 * N * g * p.T0 / e) ** 0.25
    dN1 = N * sigma
    return ContinuumResult(
        A=A,
        B=B,
        sigma=sigma,
        dN1=dN1,
        C1=continuum_coherence(sigma, N),
        E=energy,
        valid=dN1 >= CONTINUUM_MIN_SPREAD,
        sigma_simplified=simplified,
    )


def two_coefficient_amplitudes(gamma, N):
    if abs(gamma) >= 1.0 / math.sqrt(2.0):
        raise ValueError(f"|gamma| = {abs(gamma):.4g} >= 1/sqrt(2): amplitude would be imaginary")
    amps = np.zeros(N + 1)
    amps[N // 2] = math.sqrt(1.0 - 2.0 * gamma * gamma)
    amps[N // 2 - 1] = amps[N // 2 + 1] = gamma
    return amps


def two_coefficient_approx(p: TwoModeParams) -> TwoCoefResult:
    N, g = p.N, p.g
    gt0 = g * p.T0
    if not gt0 > 0:
        raise ValueError("g T0 must be positive")
    root = math.sqrt(0.5 * N * (0.5 * N + 1.0))
    drive = -p.eps12 - g * (N - 1) * p.T1
    gamma = root * drive / gt0
    note = ""
    if drive == 0.0:
        zeta = 0.0
        note = "degenerate limit: eps12 = T1 = 0, zeta set to 0"
    else:
        zeta = N * N * g * p.T2 / (root * drive)
    energy = N * p.eps11 + (N * (N - 2) / 4.0 - 2.0 * gamma * gamma) * gt0
    dN1 = math.sqrt(2.0) * gamma
    valid = abs(gamma) <= TWO_COEF_MAX and abs(zeta) <= TWO_COEF_MAX
    if abs(gamma) >= 1.0 / math.sqrt(2.0):
        return TwoCoefResult(gamma, zeta, None, math.nan, dN1, energy, False, "|gamma| >= 1/sqrt(2): no amplitudes")
    amps = two_coefficient_amplitudes(gamma, N)
    amps.setflags(write=False)
    c1 = 2.0 * gamma * math.sqrt(1.0 - 2.0 * gamma * gamma) * math.sqrt(1.0 + 2.0 / N)
    return TwoCoefResult(gamma, zeta, amps, c1, dN1, energy, valid, note)


def perturbed_dual_energy(p: TwoModeParams, gamma):
    """<H> for the three-amplitude state with the T2 term dropped.

    Uses the dual-condensate energy plus the effective single-particle term and
    the self-interaction cost of the number fluctuations.
    """
    N = p.N
    amps = two_coefficient_amplitudes(gamma, N)
    a = np.arange(N, dtype=float)
    hop = 2.0 * float(np.sum(amps[:-1] * amps[1:] * np.sqrt((a + 1.0) * (N - a))))
    n1 = np.arange(N + 1) - N / 2
    fluct = float(np.sum(n1 * n1 * amps * amps))
    e_dual = N * p.eps11 + 0.5 * p.g * p.T0 * (N * N / 2.0 - N)
    return e_dual + p.hopping * hop + 0.5 * p.g * p.T0 * (2.0 * fluct)


def energy_balance_gamma(p: TwoModeParams):
    """Leading-order minimizer N(-eps12 - g N T1) / (2 g T0) of the benefit/cost balance."""
    return p.N * (-p.eps12 - p.g * p.N * p.T1) / (2.0 * p.g * p.T0)


def gaussian_coefficients(sigma, N):
    """C_N1 sampled from exp(-u^2 / 4 sigma^2) at u = (N1 - N/2)/N, normalized on the lattice."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    u = (np.arange(N + 1) - N / 2) / N
    amps = np.exp(-u * u / (4.0 * sigma * sigma))
    return amps / np.linalg.norm(amps)


CONTINUUM_CHECK_SPREAD = 1.5
CONTINUUM_DN1_RTOL = 0.05
CONTINUUM_C1_ATOL = 0.02
TWO_COEF_CHECK_C1 = 0.1
TWO_COEF_RTOL = 0.10


def continuum_check(cont: ContinuumResult, C1, dN1):
    """'pass', 'fail' or 'n/a' for the continuum band at one numerical point."""
    if cont is None or not dN1 >= CONTINUUM_CHECK_SPREAD:
        return "n/a"
    ok = abs(cont.dN1 - dN1) <= CONTINUUM_DN1_RTOL * dN1 and abs(cont.C1 - C1) <= CONTINUUM_C1_ATOL
    return "pass" if ok else "fail"


def two_coefficient_check(tc: TwoCoefResult, C1, dN1):
    if tc is None or not (C1 <= TWO_COEF_CHECK_C1 and abs(tc.zeta) < TWO_COEF_MAX):
        return "n/a"
    if not (math.isfinite(tc.C1) and C1 > 0 and dN1 > 0):
        return "fail"
    ok = abs(tc.C1 - C1) <= TWO_COEF_RTOL * C1 and abs(tc.dN1 - dN1) <= TWO_COEF_RTOL * dN1
    return "pass" if ok else "fail"
