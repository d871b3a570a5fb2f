import math

import numpy as np
import pytest

from conftest import paper_trap
from fragsim import closedform, fockground
from fragsim.closedform import ContinuumError, continuum_approx, two_coefficient_approx
from fragsim.fockground import FockState, TwoModeParams, observables
from fragsim.trapmodel import to_natural
from fragsim.twomode import compute_modes


def _p(**kw):
    base = dict(eps11=1.0, eps12=-0.5, g=0.01, T0=0.2, T1=0.0, T2=0.0, N=100)
    base.update(kw)
    return TwoModeParams(**base)


def test_validity_edge_coherence():
    # large-N limit exp(-1/8)
    assert closedform.continuum_coherence(1e-6, 10**6) == pytest.approx(0.8825, abs=5e-4)
    N = 100
    assert closedform.continuum_coherence(1 / N, N) == pytest.approx(
        math.exp(-1 / 8) * (1 + 1 / N - 2 / N**2), rel=1e-15)


def test_simplified_sigma_example():
    N = 100
    e = 0.5
    p = _p(eps12=-e, T0=2 * e / (N * 0.01))  # g T0 N / (-eps12) = 2
    cont = continuum_approx(p)
    assert cont.sigma_simplified == pytest.approx(1 / (2 * math.sqrt(N)) / 2**0.25, rel=1e-14)
    # full form differs from the simplified one by the A-term, O(1/N)
    assert cont.sigma == pytest.approx(cont.sigma_simplified, rel=2.0 / N)


def test_continuum_error_outside_regime():
    with pytest.raises(ContinuumError):
        continuum_approx(_p(T1=1.0))


def test_continuum_matches_gaussian_lattice_sum():
    cont = continuum_approx(_p())
    amps = closedform.gaussian_coefficients(cont.sigma, 100)
    r = observables(FockState(100, amps, 0.0))
    assert r.dN1 == pytest.approx(cont.dN1, rel=1e-3)
    assert r.C1 == pytest.approx(cont.C1, abs=1e-3)


def test_continuum_tracks_numerics_when_spread_large():
    p = _p()
    cont = continuum_approx(p)
    r = observables(fockground.ground_state(p))
    assert cont.valid
    assert cont.dN1 == pytest.approx(r.dN1, rel=0.02)
    assert cont.C1 == pytest.approx(r.C1, abs=0.005)


def test_two_coefficient_formulas():
    p = _p(eps12=-1e-6, T1=-1e-8, T2=1e-12, T0=0.13, g=7.8e-3)
    tc = two_coefficient_approx(p)
    N = 100
    root = math.sqrt(N / 2 * (N / 2 + 1))
    drive = 1e-6 + 7.8e-3 * (N - 1) * 1e-8
    assert tc.gamma == pytest.approx(root * drive / (7.8e-3 * 0.13), rel=1e-14)
    assert tc.zeta == pytest.approx(N * N * 7.8e-3 * 1e-12 / (root * drive), rel=1e-14)
    assert tc.valid
    assert np.linalg.norm(tc.amplitudes) == pytest.approx(1.0, abs=1e-15)
    assert tc.dN1 == pytest.approx(math.sqrt(2) * tc.gamma)
    assert tc.C1 == pytest.approx(observables(FockState(N, tc.amplitudes, 0.0)).C1, rel=1e-12)


@pytest.mark.parametrize("gamma", [1e-4, 1e-3, 1e-2, 3e-2])
@pytest.mark.parametrize("N", [100, 1000])
def test_c1_is_twice_gamma_to_first_order(gamma, N):
    amps = closedform.two_coefficient_amplitudes(gamma, N)
    c1 = observables(FockState(N, amps, 0.0)).C1
    assert abs(c1 / (2 * gamma) - 1) <= 2 * gamma**2 + 2.0 / N


def test_two_coefficient_beyond_range():
    tc = two_coefficient_approx(_p(eps12=-0.5))
    assert abs(tc.gamma) >= 1 / math.sqrt(2)
    assert math.isnan(tc.C1) and tc.amplitudes is None and not tc.valid
    with pytest.raises(ValueError):
        closedform.two_coefficient_amplitudes(0.8, 10)


def test_two_coefficient_degenerate_limit():
    tc = two_coefficient_approx(_p(eps12=0.0, T1=0.0, T2=0.0))
    assert tc.gamma == 0.0 and tc.zeta == 0.0 and tc.note
    assert tc.C1 == 0.0


def test_energy_balance_minimizes_perturbed_energy():
    p = _p(eps12=-1e-6, T1=0.0, T2=0.0, T0=0.13, g=7.8e-3)
    gamma0 = closedform.energy_balance_gamma(p)
    grid = np.linspace(0.2 * gamma0, 3 * gamma0, 2801)
    energies = [closedform.perturbed_dual_energy(p, g) for g in grid]
    best = grid[int(np.argmin(energies))]
    assert best == pytest.approx(gamma0, rel=0.02)
    assert two_coefficient_approx(p).gamma == pytest.approx(gamma0, rel=2.0 / p.N)


def test_gamma_scaling_signs():
    p = _p(eps12=-1e-4, T1=-1e-7, T0=0.13, g=7.8e-3)
    base = two_coefficient_approx(p).gamma
    more_n = two_coefficient_approx(TwoModeParams(**{**p.__dict__, "N": 102})).gamma
    more_g = two_coefficient_approx(TwoModeParams(**{**p.__dict__, "g": 7.9e-3})).gamma
    assert more_n > base
    assert more_g < base


def test_gamma_decreases_along_barrier_sweep():
    spec = paper_trap()
    g = to_natural(spec).reduced_interaction
    gammas = []
    for a in (40, 55, 70, 85):
        m = compute_modes(spec.with_barrier(a))
        gammas.append(two_coefficient_approx(TwoModeParams.from_modes(m, g, 100)).gamma)
    assert all(b < a for a, b in zip(gammas, gammas[1:]))


def test_agreement_checks():
    cont = continuum_approx(_p())
    assert closedform.continuum_check(cont, cont.C1, cont.dN1) == "pass"
    assert closedform.continuum_check(cont, cont.C1 - 0.05, cont.dN1) == "fail"
    assert closedform.continuum_check(cont, cont.C1, 1.0) == "n/a"
    tc = two_coefficient_approx(_p(eps12=-5e-7, T0=0.13, g=7.8e-3))
    assert tc.C1 < 0.1
    assert closedform.two_coefficient_check(tc, tc.C1, tc.dN1) == "pass"
    assert closedform.two_coefficient_check(tc, 1.2 * tc.C1, tc.dN1) == "fail"
    assert closedform.two_coefficient_check(tc, 0.5, 0.4) == "n/a"
