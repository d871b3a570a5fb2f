"""Command-line entry point: ``fragsim <subcommand> --config <path> [options]``."""
import argparse
import dataclasses
import json
import math
import os
import sys
import time

import numpy as np

from . import closedform, fockground, interferometer, sweep, twomode
from .trapmodel import to_natural

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _u64(text):
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser():
    parser = argparse.ArgumentParser(prog="fragsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON configuration file")
    common.add_argument("--out", help="output directory (default: output.directory from the config)")
    common.add_argument("--seed", type=_u64, help="override interference.master_seed")
    common.add_argument("--workers", type=_positive_int, help="override the worker count")
    common.add_argument("--alpha", type=float, help="barrier strength for single-point commands")
    for name, text in (
        ("modes", "single-particle modes and overlap integrals at one alpha"),
        ("ground", "many-body ground state and coherence at one alpha"),
        ("sweep", "full pipeline over every alpha in the config"),
        ("interfere", "detection Monte Carlo on the ground state at one alpha"),
        ("approx", "closed-form approximations only at one alpha"),
    ):
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


def _finite(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _emit(summary):
    print(json.dumps({k: _finite(v) for k, v in summary.items()}, indent=2, sort_keys=True))


def _apply_overrides(cfg, args):
    if args.seed is not None:
        cfg = dataclasses.replace(
            cfg, interference=dataclasses.replace(cfg.interference, master_seed=args.seed)
        )
    if args.workers is not None:
        cfg = dataclasses.replace(cfg, workers=args.workers)
    if args.alpha is not None:
        if not (math.isfinite(args.alpha) and args.alpha >= 0):
            raise sweep.ConfigError("--alpha: must be finite and >= 0")
        cfg = dataclasses.replace(cfg, alphas=(args.alpha,))
    return cfg


def _modes(cfg, alpha):
    spec = cfg.trap.spec(alpha)
    grid = sweep._grid(cfg)
    modes = twomode.compute_modes(spec, grid=grid, count=cfg.grid.mode_count,
                                  spacing=cfg.grid.spacing, backend=cfg.solver.backend)
    return spec, to_natural(spec), modes


def cmd_modes(cfg, out):
    alpha = cfg.alphas[0]
    spec, scale, modes = _modes(cfg, alpha)
    diag = twomode.diagnostics(modes, scale.reduced_interaction, spec.particle_count, scale.time_unit)
    os.makedirs(out, exist_ok=True)
    twomode.write_profile_csv(modes, os.path.join(out, f"profile_{sweep._tag(alpha)}.csv"))
    _emit(dict(alpha=alpha, eps_s=modes.eps_s, eps_a=modes.eps_a, eps_s1=modes.eps_s1,
               eps11=modes.eps11, eps12=modes.eps12, T0=modes.T0, T1=modes.T1, T2=modes.T2,
               grid_n=modes.grid.n, grid_half_extent=modes.grid.half_extent,
               validity_ratio=diag.validity_ratio, validity_status=diag.status,
               tunneling_time_s=diag.tunneling_time_s))


def _ground(cfg, alpha):
    spec, scale, modes = _modes(cfg, alpha)
    params = fockground.TwoModeParams.from_modes(modes, scale.reduced_interaction, spec.particle_count)
    return params, fockground.ground_state(params, tol=cfg.solver.tol, backend=cfg.solver.backend)


def cmd_ground(cfg, out):
    alpha = cfg.alphas[0]
    _, state = _ground(cfg, alpha)
    obs = fockground.observables(state)
    os.makedirs(out, exist_ok=True)
    fockground.write_coefficients_csv(state, os.path.join(out, f"coefficients_{sweep._tag(alpha)}.csv"))
    _emit(dict(alpha=alpha, N=state.N, E=state.energy, C1=obs.C1, dN1=obs.dN1, C2=obs.C2))


def cmd_approx(cfg, out):
    alpha = cfg.alphas[0]
    spec, scale, modes = _modes(cfg, alpha)
    params = fockground.TwoModeParams.from_modes(modes, scale.reduced_interaction, spec.particle_count)
    summary = dict(alpha=alpha, N=params.N)
    try:
        cont = closedform.continuum_approx(params)
        summary.update(cont_sigma=cont.sigma, cont_C1=cont.C1, cont_dN1=cont.dN1,
                       cont_E=cont.E, cont_valid=cont.valid)
    except closedform.ContinuumError as exc:
        summary.update(cont_valid=False, cont_error=str(exc))
    tc = closedform.two_coefficient_approx(params)
    summary.update(tc_gamma=tc.gamma, tc_zeta=tc.zeta, tc_C1=tc.C1, tc_dN1=tc.dN1,
                   tc_E=tc.E, tc_valid=tc.valid)
    if tc.note:
        summary["tc_note"] = tc.note
    _emit(summary)


def cmd_interfere(cfg, out):
    alpha = cfg.alphas[0]
    it = cfg.interference
    _, state = _ground(cfg, alpha)
    if not 1 <= it.detections <= state.N - 1:
        raise sweep.ConfigError("interference.detections: must lie in [1, N-1]")
    result = sweep.PointResult(row=sweep.SweepRow(alpha=alpha), state=state)
    runs, stats = sweep.run_interference(cfg, result, cfg.workers)
    c1 = fockground.observables(state).C1
    os.makedirs(out, exist_ok=True)
    interferometer.write_interference_csv(runs, stats, c1, os.path.join(out, f"interference_{sweep._tag(alpha)}.csv"))
    _emit(dict(alpha=alpha, reference_C1=c1, runs=stats.runs, detections=it.detections,
               master_seed=it.master_seed,
               mean_pattern_visibility=stats.mean_pattern_visibility,
               standard_error=stats.standard_error, phase_dispersion=stats.phase_dispersion,
               rayleigh_p=stats.rayleigh_p,
               median_run_visibility=float(np.median([r.visibility for r in runs]))))


def cmd_sweep(cfg, out):
    start = time.perf_counter()
    results = sweep.run_sweep(cfg)
    wall = time.perf_counter() - start
    sweep.emit_outputs(results, cfg, out, wall_time=wall, workers=cfg.workers)
    failed = [r.row for r in results if not r.row.ok]
    for row in failed:
        print(f"alpha={row.alpha:g}: {row.error}", file=sys.stderr)
    print(f"{len(results) - len(failed)}/{len(results)} points written to {out} in {wall:.2f} s")
    return EXIT_NUMERICAL if len(failed) == len(results) else EXIT_OK


COMMANDS = {
    "modes": cmd_modes,
    "ground": cmd_ground,
    "sweep": cmd_sweep,
    "interfere": cmd_interfere,
    "approx": cmd_approx,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _apply_overrides(sweep.load_config(args.config), args)
    except sweep.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out or cfg.output.directory
    try:
        return COMMANDS[args.command](cfg, out) or EXIT_OK
    except sweep.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except sweep.NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
