"""Double-slit detection Monte Carlo for a two-mode state.

In the far field the localized modes become plane waves e^{ikx} and e^{-ikx};
each detection at x applies Psi(x) = e^{ikx} a1 + e^{-ikx} a2 to the remaining
state. Per-run fringes are fitted from the first Fourier coefficient at
spatial frequency 2k; the pooled pattern over many runs has visibility C1.
"""
import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._backend import get_kernels

# relative density below which a detection point counts as an exact dark fringe
DARK_DENSITY = 1e-28


@dataclass(frozen=True, eq=False)
class ComplexFockState:
    """Amplitudes over N1 = 0..M (particles left in mode 1) and fringe wavenumber k."""

    amplitudes: np.ndarray
    k: float

    @property
    def M(self):
        return self.amplitudes.size - 1


@dataclass(frozen=True, eq=False)
class DetectionRun:
    positions: np.ndarray
    visibility: float
    phase: float
    seed: int = None

    @property
    def fourier(self):
        """Per-run estimate (2/m) sum exp(-2ikx) with the fitted visibility and phase."""
        return self.visibility * complex(math.cos(self.phase), math.sin(self.phase))


@dataclass(frozen=True)
class FringeStatistics:
    mean_pattern_visibility: float
    phase_dispersion: float
    standard_error: float
    rayleigh_p: float
    runs: int


def far_field(state, k) -> ComplexFockState:
    amps = np.array(state.amplitudes, dtype=np.complex128)
    amps.setflags(write=False)
    return ComplexFockState(amplitudes=amps, k=float(k))


def fringe_coefficient(s: ComplexFockState) -> complex:
    """beta = (2/M) <a2^dag a1>; the detection density is proportional to 1 + Re[beta e^{2ikx}]."""
    M = s.M
    c = s.amplitudes
    n = np.arange(M)
    return complex((2.0 / M) * np.sum(np.conj(c[:M]) * c[1:] * np.sqrt((n + 1.0) * (M - n))))


def intensity_profile(s: ComplexFockState, x):
    """Unnormalized detection density 1 + Re[beta exp(2ikx)]."""
    if s.M < 1:
        raise ValueError("no particles left")
    beta = fringe_coefficient(s)
    x = np.asarray(x, dtype=float)
    return 1.0 + np.real(beta * np.exp(2j * s.k * x))


def detect_at(s: ComplexFockState, x) -> ComplexFockState:
    """Posterior state after removing one atom detected at ``x``."""
    M = s.M
    if M < 2:
        raise ValueError("need at least two particles to detect one and keep a state")
    c = s.amplitudes
    n = np.arange(M)
    e = complex(math.cos(s.k * x), math.sin(s.k * x))
    new = e * np.sqrt(n + 1.0) * c[1:] + e.conjugate() * np.sqrt(M - n) * c[:M]
    norm2 = float(np.sum(new.real**2 + new.imag**2))
    if norm2 <= M * DARK_DENSITY:
        raise ZeroDivisionError(f"detection at x={x} has zero probability for this state")
    new = new / math.sqrt(norm2)
    new.setflags(write=False)
    return ComplexFockState(amplitudes=new, k=s.k)


def fit_fringe(positions, k):
    """Visibility (clipped to [0, 1]) and phase in [-pi, pi) from the 2k Fourier coefficient."""
    positions = np.asarray(positions, dtype=float)
    z = 2.0 * np.mean(np.exp(-2j * k * positions))
    phase = math.atan2(z.imag, z.real)
    if phase >= math.pi:
        phase -= 2.0 * math.pi
    return min(abs(z), 1.0), phase


def run_seed(master_seed, run_index):
    """Per-run 64-bit seed derived from (master_seed, run_index)."""
    ss = np.random.SeedSequence([int(master_seed), int(run_index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def sample_run(s: ComplexFockState, m, rng_seed, backend=None) -> DetectionRun:
    """Draw ``m`` sequential detections over one fringe period by rejection sampling."""
    M = s.M
    if not 1 <= m <= M - 1:
        raise ValueError(f"m must satisfy 1 <= m <= M-1 (m={m}, M={M})")
    kern = get_kernels(backend)
    rng = np.random.Generator(np.random.Philox(rng_seed))
    amps = np.array(s.amplitudes, dtype=np.complex128)
    out = np.zeros(m)
    done = 0
    while done < m:
        uniforms = rng.random(4 * (m - done) + 16)
        done, _, M = kern.detect_loop(amps, M, s.k, m, uniforms, out, done)
    vis, phase = fit_fringe(out, s.k)
    out.setflags(write=False)
    return DetectionRun(positions=out, visibility=vis, phase=phase, seed=rng_seed)


def _run_one(args):
    s, m, seed, backend = args
    return sample_run(s, m, seed, backend)


def run_experiment(s: ComplexFockState, m, runs, master_seed, workers=1, backend=None):
    """Independent runs with seeds ``run_seed(master_seed, i)``; results keep run order."""
    tasks = [(s, m, run_seed(master_seed, i), backend) for i in range(runs)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_one, tasks, chunksize=max(1, runs // (4 * workers))))
    return [_run_one(t) for t in tasks]


def rayleigh_test(phases):
    """p-value of the Rayleigh test for circular uniformity."""
    phases = np.asarray(phases, dtype=float)
    n = phases.size
    rbar = abs(np.mean(np.exp(1j * phases)))
    z = n * rbar * rbar
    p = math.exp(math.sqrt(1.0 + 4.0 * n + 4.0 * (n * n - n * n * rbar * rbar)) - (1.0 + 2.0 * n))
    return min(max(p, 0.0), 1.0), z


def fringe_statistics(runs, k) -> FringeStatistics:
    """Pool all detections and summarize the average pattern and the phase spread.

    The standard error is the between-run scatter of the per-run Fourier
    estimates, since detections within one run are correlated.
    """
    if len(runs) < 2:
        raise ValueError("need at least two runs")
    per_run = np.array([2.0 * np.mean(np.exp(-2j * k * r.positions)) for r in runs])
    counts = np.array([r.positions.size for r in runs], dtype=float)
    pooled = np.sum(per_run * counts) / np.sum(counts)
    phases = np.array([r.phase for r in runs])
    dispersion = 1.0 - abs(np.mean(np.exp(1j * phases)))
    # project the scatter onto the direction of the pooled coefficient
    direction = pooled / abs(pooled) if abs(pooled) > 0 else 1.0
    along = np.real(per_run * np.conj(direction))
    se = float(np.std(along, ddof=1) / math.sqrt(len(runs)))
    p, _ = rayleigh_test(phases)
    return FringeStatistics(
        mean_pattern_visibility=float(abs(pooled)),
        phase_dispersion=float(dispersion),
        standard_error=se,
        rayleigh_p=p,
        runs=len(runs),
    )


def write_interference_csv(runs, stats: FringeStatistics, reference_c1, path):
    """One row per run (seed, V, phase) followed by a summary row."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(["kind", "run", "seed", "visibility", "phase",
                         "mean_pattern_visibility", "phase_dispersion", "reference_C1"])
        for i, r in enumerate(runs):
            writer.writerow(["run", i, r.seed, f"{r.visibility:.16e}", f"{r.phase:.16e}", "", "", ""])
        writer.writerow(["summary", "", "", "", "", f"{stats.mean_pattern_visibility:.16e}",
                         f"{stats.phase_dispersion:.16e}", f"{reference_c1:.16e}"])
