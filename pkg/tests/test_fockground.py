import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fockground_oracles import dense_ground, random_params
from fragsim import fockground
from fragsim.fockground import FockError, FockState, TwoModeParams, assemble_hamiltonian, ground_state, observables


def _params(**kw):
    base = dict(eps11=0.0, eps12=-1.0, g=1.0, T0=1.0, T1=0.0, T2=0.0, N=2)
    base.update(kw)
    return TwoModeParams(**base)


def test_n2_hand_matrix():
    m = assemble_hamiltonian(_params())
    np.testing.assert_allclose(m.to_dense(), [[1, -math.sqrt(2), 0], [-math.sqrt(2), 0, -math.sqrt(2)],
                                              [0, -math.sqrt(2), 1]], atol=1e-15)


def test_n2_hand_eigenvalue(backend):
    s = ground_state(_params(), backend=backend)
    assert s.energy == pytest.approx((1 - math.sqrt(17)) / 2, abs=1e-12)


def test_band_arrays_reflection_symmetric():
    p = TwoModeParams(eps11=0.3, eps12=-0.2, g=0.05, T0=0.4, T1=-0.01, T2=0.02, N=10)
    b = assemble_hamiltonian(p).bands
    np.testing.assert_array_equal(b[0], b[0][::-1])
    np.testing.assert_allclose(b[1][:10], b[1][:10][::-1], rtol=1e-15)
    np.testing.assert_allclose(b[2][:9], b[2][:9][::-1], rtol=1e-15)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_matches_dense_oracle(seed):
    p = random_params(np.random.default_rng(seed))
    e, v = dense_ground(p)
    s = ground_state(p)
    assert s.energy == pytest.approx(e, abs=1e-10)
    np.testing.assert_allclose(s.amplitudes, v, atol=1e-8)


@pytest.mark.parametrize("N", [2, 10, 100, 1000])
def test_noninteracting_is_binomial(N, backend):
    p = TwoModeParams(eps11=0.7, eps12=-0.4, g=0.0, T0=1.0, T1=0.0, T2=0.0, N=N)
    s = ground_state(p, backend=backend)
    np.testing.assert_allclose(s.amplitudes, fockground.binomial_amplitudes(N), atol=1e-8)
    assert s.energy == pytest.approx(N * (0.7 - 0.4), abs=1e-9 * N)


def test_infinite_barrier_is_dual(backend):
    s = ground_state(TwoModeParams(eps11=1.0, eps12=0.0, g=0.01, T0=0.1, T1=0.0, T2=0.0, N=50), backend=backend)
    np.testing.assert_allclose(s.amplitudes, fockground.dual_condensate_amplitudes(50), atol=1e-10)
    r = observables(s)
    assert abs(r.C1) < 1e-10 and r.dN1 < 1e-9
    assert r.C2 - 1 == pytest.approx(2 / 48, abs=1e-12)


def test_exact_dual_observables():
    r = observables(FockState(50, fockground.dual_condensate_amplitudes(50), 0.0))
    assert (r.C1, r.dN1) == (0.0, 0.0)
    assert r.C2 - 1 == pytest.approx(2 / 48, abs=1e-15)


def test_binomial_observables():
    N = 400
    r = observables(FockState(N, fockground.binomial_amplitudes(N), 0.0))
    assert r.C1 == pytest.approx(1.0, abs=1e-12)
    assert r.dN1 == pytest.approx(math.sqrt(N) / 2, rel=1e-12)
    assert r.C2 == pytest.approx(1.0, abs=1e-12)
    assert r.Jz_mean == pytest.approx(N / 2)


def test_two_coefficient_state_observables():
    N, gamma = 100, 0.1
    amps = np.zeros(N + 1)
    amps[N // 2] = math.sqrt(1 - 2 * gamma**2)
    amps[N // 2 - 1] = amps[N // 2 + 1] = gamma
    r = observables(FockState(N, amps, 0.0))
    assert r.C1 == pytest.approx(2 * 0.1 * math.sqrt(0.98) * math.sqrt(1.02), rel=1e-12)
    assert r.C1 == pytest.approx(0.1999, abs=1e-4)
    assert r.dN1 == pytest.approx(math.sqrt(2) * 0.1, rel=1e-12)


def test_shift_invariance():
    p = TwoModeParams(eps11=0.2, eps12=-0.05, g=0.01, T0=0.3, T1=-1e-3, T2=1e-3, N=60)
    a = ground_state(p)
    q = TwoModeParams(**{**p.__dict__, "eps11": p.eps11 + 3.25})
    b = ground_state(q)
    assert b.energy - a.energy == pytest.approx(60 * 3.25, abs=1e-9)
    np.testing.assert_allclose(a.amplitudes, b.amplitudes, atol=1e-10)
    ra, rb = observables(a), observables(b)
    for name in ("C1", "dN1", "C2"):
        assert getattr(ra, name) == pytest.approx(getattr(rb, name), abs=1e-10)


def test_energy_is_expectation_and_amplitudes_positive():
    p = TwoModeParams(eps11=1.0, eps12=-3e-4, g=7.8e-3, T0=0.13, T1=-2e-6, T2=1e-9, N=100)
    s = ground_state(p)
    m = assemble_hamiltonian(p)
    c = np.asarray(s.amplitudes)
    assert c @ m.matvec(c) == pytest.approx(s.energy, abs=1e-9)
    assert np.linalg.norm(c) == pytest.approx(1.0, abs=1e-14)
    # amplitudes below the solver's absolute accuracy carry no sign information
    assert np.all(c[np.abs(c) > 1e-10] > 0)
    assert np.sum(np.abs(c) > 1e-10) > 10
    np.testing.assert_array_equal(c, c[::-1])


def test_second_order_identity():
    for dn, N in ((0.0, 10), (1.3, 100), (5.0, 100)):
        assert fockground.second_order_coherence(dn, N) == (1 - 4 * (dn / N) ** 2) / ((N - 2) / N + 4 * (dn / N) ** 2)


@pytest.mark.parametrize("kw", [dict(N=3), dict(N=0), dict(eps12=0.5), dict(T0=0.0), dict(g=math.nan),
                                dict(N=fockground.MAX_PARTICLES + 2)])
def test_invalid_params(kw):
    with pytest.raises(FockError):
        _params(**kw)


def test_coefficient_csv(tmp_path):
    s = ground_state(_params(N=6))
    path = tmp_path / "c.csv"
    fockground.write_coefficients_csv(s, path)
    rows = list(csv.reader(open(path, newline="", encoding="utf-8")))
    assert rows[0] == ["N1", "C_N1"]
    assert [int(r[0]) for r in rows[1:]] == list(range(7))
    np.testing.assert_array_equal([float(r[1]) for r in rows[1:]], s.amplitudes)
