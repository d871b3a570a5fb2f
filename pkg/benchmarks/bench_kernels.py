"""Compare the compiled kernels with the pure-Python fallback.

Run with ``python3 benchmarks/bench_kernels.py``; prints one line per case.
"""
import argparse
import timeit

import numpy as np

from fragsim import bandeig, fockground, interferometer
from fragsim._backend import get_kernels


def _fock_matrix(N):
    p = fockground.TwoModeParams(eps11=1.0, eps12=-1e-3, g=7.8e-3, T0=0.13, T1=-1e-5, T2=1e-8, N=N)
    return fockground.assemble_hamiltonian(p)


def _cases(N, detections):
    mat = _fock_matrix(N)
    state = interferometer.far_field(fockground.FockState(N, fockground.dual_condensate_amplitudes(N), 0.0), 1.0)
    sigma = float(mat.to_dense().diagonal().mean()) if N <= 2000 else 0.0
    pivmin = np.finfo(float).eps ** 2 * max(1.0, mat.norm_inf())
    return {
        "sturm_count": lambda be: get_kernels(be).sturm_count(mat.bands, sigma, pivmin),
        "band_lu": lambda be: get_kernels(be).band_lu(mat.bands, sigma, pivmin),
        "lowest_eigenpair": lambda be: bandeig.lowest_eigenpairs(mat, 1, backend=be),
        "sample_run": lambda be: interferometer.sample_run(state, detections, 1, backend=be),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--particles", type=int, default=1000)
    parser.add_argument("--detections", type=int, default=200)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    try:
        get_kernels("compiled")
    except ImportError:
        print("compiled kernels not built; only the python backend is available")
        return
    print(f"{'case':<18}{'python (s)':>12}{'compiled (s)':>14}{'speedup':>10}")
    for name, fn in _cases(args.particles, args.detections).items():
        times = {be: min(timeit.repeat(lambda: fn(be), number=1, repeat=args.repeat))
                 for be in ("python", "compiled")}
        print(f"{name:<18}{times['python']:>12.4g}{times['compiled']:>14.4g}"
              f"{times['python'] / times['compiled']:>10.1f}")


if __name__ == "__main__":
    main()
