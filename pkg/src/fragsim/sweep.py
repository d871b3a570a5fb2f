"""Barrier-strength sweeps: configuration, per-point pipeline and file output."""
import csv
import json
import math
import os
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np
import scipy

from . import __version__, bandeig, closedform, fockground, interferometer, twomode
from ._backend import get_kernels
from .trapmodel import TrapSpec, TrapSpecError, to_natural


class ConfigError(ValueError):
    pass


NUMERICAL_ERRORS = (
    ArithmeticError, ValueError, np.linalg.LinAlgError, twomode.ModeError, bandeig.ConvergenceError,
)


@dataclass(frozen=True)
class TrapConfig:
    """Trap parameters in lab units; field names carry the unit."""

    mass_amu: float = 22.98977
    scattering_length_nm: float = 3.0
    omega_x_hz: float = 19.0
    omega_y_hz: float = 19.0
    omega_z_hz: float = 19.0
    delta_um: float = 6.0
    particle_count: int = 100
    conventional_half_factor: bool = False

    def spec(self, alpha):
        return TrapSpec.from_lab_units(alpha_natural=float(alpha), **asdict(self))


@dataclass(frozen=True)
class GridConfig:
    """Fixed grid when both ``n`` and ``half_extent`` are set, otherwise automatic."""

    n: int = None
    half_extent: float = None
    spacing: float = None
    mode_count: int = 4


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-10
    backend: str = None


@dataclass(frozen=True)
class ApproxConfig:
    continuum: bool = True
    two_coefficient: bool = True


@dataclass(frozen=True)
class InterferenceConfig:
    enabled: bool = False
    k: float = 1.0
    detections: int = 50
    runs: int = 200
    master_seed: int = 12345


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    profiles: bool = False
    coefficients: bool = False


@dataclass(frozen=True)
class SweepConfig:
    trap: TrapConfig = field(default_factory=TrapConfig)
    alphas: tuple = (0.0,)
    grid: GridConfig = field(default_factory=GridConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    approximations: ApproxConfig = field(default_factory=ApproxConfig)
    interference: InterferenceConfig = field(default_factory=InterferenceConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    workers: int = 1


_SECTIONS = {
    "trap": TrapConfig,
    "grid": GridConfig,
    "solver": SolverConfig,
    "approximations": ApproxConfig,
    "interference": InterferenceConfig,
    "output": OutputConfig,
}


def _section(name, cls, data):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"{name}: expected an object")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"{name}: unknown keys {sorted(unknown)}")
    return cls(**data)


def _alphas(data):
    if not isinstance(data, dict):
        raise ConfigError("alpha: expected an object with 'values' or 'start'/'stop'/'count'")
    if "values" in data:
        if set(data) != {"values"}:
            raise ConfigError("alpha: 'values' cannot be combined with a range")
        values = data["values"]
        if not isinstance(values, list) or not values:
            raise ConfigError("alpha.values: expected a non-empty list")
    else:
        missing = {"start", "stop", "count"} - set(data)
        if missing or set(data) - {"start", "stop", "count"}:
            raise ConfigError("alpha: range needs exactly 'start', 'stop' and 'count'")
        count = data["count"]
        if isinstance(count, bool) or not isinstance(count, int) or count < 1:
            raise ConfigError("alpha.count: must be an integer >= 1")
        values = np.linspace(data["start"], data["stop"], count).tolist() if count > 1 else [data["start"]]
    try:
        values = tuple(float(v) for v in values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"alpha: non-numeric value ({exc})") from None
    if any(not math.isfinite(v) or v < 0 for v in values):
        raise ConfigError("alpha: values must be finite and >= 0")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError("alpha: values must be strictly increasing")
    return values


def _validate(cfg: SweepConfig):
    try:
        cfg.trap.spec(cfg.alphas[0])
    except TrapSpecError as exc:
        raise ConfigError(f"trap.{exc}") from None
    except TypeError as exc:
        raise ConfigError(f"trap: {exc}") from None
    g = cfg.grid
    if g.n is not None:
        if isinstance(g.n, bool) or not isinstance(g.n, int) or g.n < 3 or g.n % 2 == 0:
            raise ConfigError("grid.n: must be an odd integer >= 3")
        if g.half_extent is None or not g.half_extent > 0:
            raise ConfigError("grid.half_extent: required and positive when grid.n is set")
    elif g.half_extent is not None:
        raise ConfigError("grid.half_extent: only valid together with grid.n")
    if g.spacing is not None and not g.spacing > 0:
        raise ConfigError("grid.spacing: must be positive")
    if not isinstance(g.mode_count, int) or g.mode_count < 3:
        raise ConfigError("grid.mode_count: must be an integer >= 3")
    if not (isinstance(cfg.solver.tol, (int, float)) and cfg.solver.tol > 0):
        raise ConfigError("solver.tol: must be positive")
    if cfg.solver.backend not in (None, "python", "compiled"):
        raise ConfigError("solver.backend: must be null, 'python' or 'compiled'")
    it = cfg.interference
    if it.enabled:
        if not it.k > 0:
            raise ConfigError("interference.k: must be positive")
        if not 1 <= it.detections <= cfg.trap.particle_count - 1:
            raise ConfigError("interference.detections: must lie in [1, N-1]")
        if it.runs < 2:
            raise ConfigError("interference.runs: must be >= 2")
        if not 0 <= it.master_seed < 2**64:
            raise ConfigError("interference.master_seed: must fit in 64 bits")
    if isinstance(cfg.workers, bool) or not isinstance(cfg.workers, int) or cfg.workers < 1:
        raise ConfigError("workers: must be an integer >= 1")


def parse_config(data) -> SweepConfig:
    if not isinstance(data, dict):
        raise ConfigError("config: expected a JSON object")
    unknown = set(data) - set(_SECTIONS) - {"alpha", "workers"}
    if unknown:
        raise ConfigError(f"config: unknown keys {sorted(unknown)}")
    try:
        parts = {name: _section(name, cls, data.get(name)) for name, cls in _SECTIONS.items()}
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    cfg = SweepConfig(alphas=_alphas(data.get("alpha", {"values": [0.0]})), workers=data.get("workers", 1), **parts)
    _validate(cfg)
    return cfg


def load_config(path) -> SweepConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return parse_config(data)


def config_to_dict(cfg: SweepConfig):
    out = {name: asdict(getattr(cfg, name)) for name in _SECTIONS}
    out["alpha"] = {"values": list(cfg.alphas)}
    out["workers"] = cfg.workers
    return out


COLUMNS = (
    "alpha", "eps_s", "eps_a", "eps_s1", "eps12", "T0", "T1", "T2",
    "E", "C1", "dN1", "C2",
    "cont_sigma", "cont_C1", "cont_dN1", "cont_valid",
    "tc_gamma", "tc_zeta", "tc_C1", "tc_dN1", "tc_valid",
    "validity_ratio", "tunneling_time_s",
    "cont_check", "tc_check", "error",
)


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    eps_s: float = math.nan
    eps_a: float = math.nan
    eps_s1: float = math.nan
    eps12: float = math.nan
    T0: float = math.nan
    T1: float = math.nan
    T2: float = math.nan
    E: float = math.nan
    C1: float = math.nan
    dN1: float = math.nan
    C2: float = math.nan
    cont_sigma: float = math.nan
    cont_C1: float = math.nan
    cont_dN1: float = math.nan
    cont_valid: bool = None
    tc_gamma: float = math.nan
    tc_zeta: float = math.nan
    tc_C1: float = math.nan
    tc_dN1: float = math.nan
    tc_valid: bool = None
    validity_ratio: float = math.nan
    tunneling_time_s: float = math.nan
    cont_check: str = "n/a"
    tc_check: str = "n/a"
    error: str = ""

    @property
    def ok(self):
        return not self.error

    def cells(self):
        out = []
        for name in COLUMNS:
            v = getattr(self, name)
            if isinstance(v, bool):
                out.append("true" if v else "false")
            elif v is None:
                out.append("")
            elif isinstance(v, float):
                out.append(f"{v:.16e}" if math.isfinite(v) else "")
            else:
                out.append(str(v))
        return out


@dataclass(frozen=True, eq=False)
class PointResult:
    """One sweep point: the CSV row plus the arrays needed for optional dumps."""

    row: SweepRow
    modes: twomode.ModeSet = None
    state: fockground.FockState = None


def _grid(cfg: SweepConfig):
    g = cfg.grid
    if g.n is None:
        return None
    return twomode.Grid1D(half_extent=float(g.half_extent), n=g.n)


def evaluate_point(cfg: SweepConfig, alpha) -> PointResult:
    """Full pipeline at one barrier strength; exceptions are recorded in the row."""
    try:
        spec = cfg.trap.spec(alpha)
        scale = to_natural(spec)
        g, N = scale.reduced_interaction, spec.particle_count
        backend = cfg.solver.backend
        modes = twomode.compute_modes(
            spec, grid=_grid(cfg), count=cfg.grid.mode_count, spacing=cfg.grid.spacing, backend=backend
        )
        params = fockground.TwoModeParams.from_modes(modes, g, N)
        state = fockground.ground_state(params, tol=cfg.solver.tol, backend=backend)
        obs = fockground.observables(state)
        diag = twomode.diagnostics(modes, g, N, time_unit=scale.time_unit)
        values = dict(
            alpha=float(alpha), eps_s=modes.eps_s, eps_a=modes.eps_a, eps_s1=modes.eps_s1,
            eps12=modes.eps12, T0=modes.T0, T1=modes.T1, T2=modes.T2,
            E=state.energy, C1=obs.C1, dN1=obs.dN1, C2=obs.C2,
            validity_ratio=diag.validity_ratio, tunneling_time_s=diag.tunneling_time_s,
        )
        if cfg.approximations.continuum:
            try:
                cont = closedform.continuum_approx(params)
                values.update(cont_sigma=cont.sigma, cont_C1=cont.C1, cont_dN1=cont.dN1, cont_valid=cont.valid)
                values["cont_check"] = closedform.continuum_check(cont, obs.C1, obs.dN1)
            except closedform.ContinuumError:
                # outside the continuum regime; the row stays usable
                values["cont_valid"] = False
        if cfg.approximations.two_coefficient:
            tc = closedform.two_coefficient_approx(params)
            values.update(tc_gamma=tc.gamma, tc_zeta=tc.zeta, tc_C1=tc.C1, tc_dN1=tc.dN1, tc_valid=tc.valid)
            values["tc_check"] = closedform.two_coefficient_check(tc, obs.C1, obs.dN1)
        return PointResult(row=SweepRow(**values), modes=modes, state=state)
    except NUMERICAL_ERRORS as exc:
        return PointResult(row=SweepRow(alpha=float(alpha), error=f"{type(exc).__name__}: {exc}"))


def _evaluate(args):
    return evaluate_point(*args)


def run_sweep(cfg: SweepConfig, workers=None):
    """Rows in α order; points run in a process pool when ``workers`` > 1."""
    workers = cfg.workers if workers is None else workers
    tasks = [(cfg, a) for a in cfg.alphas]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_evaluate, tasks))
    return [_evaluate(t) for t in tasks]


def write_sweep_csv(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(COLUMNS)
        for row in rows:
            writer.writerow(row.cells())


def _tag(alpha):
    return f"alpha_{alpha:.6g}".replace("+", "")


def run_interference(cfg: SweepConfig, result: PointResult, workers=1):
    it = cfg.interference
    s = interferometer.far_field(result.state, it.k)
    runs = interferometer.run_experiment(
        s, it.detections, it.runs, it.master_seed, workers=workers, backend=cfg.solver.backend
    )
    return runs, interferometer.fringe_statistics(runs, it.k)


def emit_outputs(results, cfg: SweepConfig, out_dir=None, wall_time=None, workers=1):
    """Write sweep.csv, optional per-α dumps and metadata.json; returns the paths written."""
    if not results:
        raise ValueError("no sweep rows to write")
    out_dir = out_dir or cfg.output.directory
    os.makedirs(out_dir, exist_ok=True)
    written = []
    path = os.path.join(out_dir, "sweep.csv")
    write_sweep_csv([r.row for r in results], path)
    written.append(path)
    for r in results:
        if not r.row.ok:
            continue
        tag = _tag(r.row.alpha)
        if cfg.output.profiles:
            path = os.path.join(out_dir, f"profile_{tag}.csv")
            twomode.write_profile_csv(r.modes, path)
            written.append(path)
        if cfg.output.coefficients:
            path = os.path.join(out_dir, f"coefficients_{tag}.csv")
            fockground.write_coefficients_csv(r.state, path)
            written.append(path)
        if cfg.interference.enabled:
            runs, stats = run_interference(cfg, r, workers)
            path = os.path.join(out_dir, f"interference_{tag}.csv")
            interferometer.write_interference_csv(runs, stats, r.row.C1, path)
            written.append(path)
    path = os.path.join(out_dir, "metadata.json")
    write_metadata(cfg, path, wall_time=wall_time)
    written.append(path)
    return written


def run_metadata(cfg: SweepConfig, wall_time=None):
    return {
        "config": config_to_dict(cfg),
        "versions": {
            "fragsim": __version__,
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "platform": platform.platform(),
        },
        "backend": "python" if get_kernels(cfg.solver.backend).__name__.endswith("_py") else "compiled",
        "seeds": {"interference_master_seed": cfg.interference.master_seed},
        "wall_time_s": wall_time,
    }


def write_metadata(cfg: SweepConfig, path, wall_time=None):
    # kept apart from the CSVs so that timing never breaks byte-identical data files
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(run_metadata(cfg, wall_time), fh, indent=2, sort_keys=True)
        fh.write("\n")


def sweep_and_emit(cfg: SweepConfig, out_dir=None, workers=None):
    start = time.perf_counter()
    results = run_sweep(cfg, workers)
    wall = time.perf_counter() - start
    paths = emit_outputs(results, cfg, out_dir, wall_time=wall, workers=workers or cfg.workers)
    return results, paths
