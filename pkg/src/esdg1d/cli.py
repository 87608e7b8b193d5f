"""Batch driver: parse config, run experiment, emit CSV artifacts and a manifest.

Config files are flat ``section.key = value`` text (``#`` comments). The
manifest written after a run echoes the full canonical config plus
``result.*`` lines and can be fed back as a config (result lines are
ignored on parse), reproducing the run exactly.

Exit codes: 0 success, 2 config error, 3 integration failure (step-size
underflow at tolerance), 4 admissibility crash.
"""

import argparse
import sys
import time as wallclock
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from esdg1d import dg, diagnostics, driver, euler, fluxes, timestep, viscosity
from esdg1d.errors import AdmissibilityError, ConfigError, IntegrationFailure

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INTEGRATION = 3
EXIT_ADMISSIBILITY = 4

PROBLEM_KINDS = ("density_wave", "modified_sod", "modified_sod_near_vacuum", "shu_osher", "custom")


@dataclass(frozen=True)
class RunConfig:
    problem_kind: str = "density_wave"
    problem_amplitude: float = 0.5
    problem_left: tuple = (1.0, 0.0, 1.0)
    problem_right: tuple = (0.125, 0.0, 0.1)
    problem_x0: float = 0.5
    problem_domain: tuple = (0.0, 1.0)
    disc_variant: str = "nodal"
    disc_N: int = 3
    disc_K: int = 8
    disc_volume_points: int | None = None
    scheme: str = "weak_form"
    flux_kind: str = "llf_davis"
    flux_volume: str = "ec_ranocha"
    viscosity_mode: str = "elementwise"
    viscosity_delta_tol: float = viscosity.DELTA_TOL_DEFAULT
    trace_mode: str = "auto"
    time_integrator: str = "adaptive"
    time_abs_tol: float = 1e-8
    time_rel_tol: float = 1e-6
    time_cfl: float = 0.1
    time_t_final: float | None = None
    time_max_steps: int = 1_000_000
    init_mode: str = "projection"
    output_history_stride: int = 1
    sweep_mode: str = "evolve"
    residual_quadrature: str = "high"


# config-file key -> (dataclass field, parser)
def _parse_triple(s):
    parts = [float(p) for p in str(s).split(",")]
    if len(parts) != 3:
        raise ValueError(f"expected 'rho,u,p', got {s!r}")
    return tuple(parts)


def _parse_pair(s):
    parts = [float(p) for p in str(s).split(",")]
    if len(parts) != 2:
        raise ValueError(f"expected 'a,b', got {s!r}")
    return tuple(parts)


def _parse_optional_float(s):
    return None if str(s).lower() in ("auto", "none") else float(s)


def _parse_optional_int(s):
    return None if str(s).lower() in ("auto", "none") else int(s)


KEY_TABLE = {
    "problem.kind": ("problem_kind", str),
    "problem.amplitude": ("problem_amplitude", float),
    "problem.left": ("problem_left", _parse_triple),
    "problem.right": ("problem_right", _parse_triple),
    "problem.x0": ("problem_x0", float),
    "problem.domain": ("problem_domain", _parse_pair),
    "disc.variant": ("disc_variant", str),
    "disc.N": ("disc_N", int),
    "disc.K": ("disc_K", int),
    "disc.volume_points": ("disc_volume_points", _parse_optional_int),
    "scheme": ("scheme", str),
    "flux.kind": ("flux_kind", str),
    "flux.volume": ("flux_volume", str),
    "viscosity.mode": ("viscosity_mode", str),
    "viscosity.delta_tol": ("viscosity_delta_tol", float),
    "trace.mode": ("trace_mode", str),
    "time.integrator": ("time_integrator", str),
    "time.abs_tol": ("time_abs_tol", float),
    "time.rel_tol": ("time_rel_tol", float),
    "time.cfl": ("time_cfl", float),
    "time.t_final": ("time_t_final", _parse_optional_float),
    "time.max_steps": ("time_max_steps", int),
    "init.mode": ("init_mode", str),
    "output.history_stride": ("output_history_stride", int),
    "sweep.mode": ("sweep_mode", str),
    "residual.quadrature": ("residual_quadrature", str),
}

FIELD_TO_KEY = {f: k for k, (f, _) in KEY_TABLE.items()}


def validate_config(cfg):
    if cfg.problem_kind not in PROBLEM_KINDS:
        raise ConfigError(f"problem.kind: unknown problem {cfg.problem_kind!r}")
    if cfg.disc_variant not in ("nodal", "modal"):
        raise ConfigError(f"disc.variant: expected nodal or modal, got {cfg.disc_variant!r}")
    if not 1 <= cfg.disc_N <= 16:
        raise ConfigError(f"disc.N: degree must be in [1, 16], got {cfg.disc_N}")
    if cfg.disc_K < 1:
        raise ConfigError(f"disc.K: need at least one element, got {cfg.disc_K}")
    if cfg.scheme not in driver.SCHEMES:
        raise ConfigError(f"scheme: unknown scheme {cfg.scheme!r}")
    if cfg.flux_kind not in fluxes.FLUX_KINDS:
        raise ConfigError(f"flux.kind: unknown flux {cfg.flux_kind!r}")
    if cfg.flux_volume not in ("ec_ranocha", "central"):
        raise ConfigError(f"flux.volume: unknown volume flux {cfg.flux_volume!r}")
    if cfg.viscosity_mode not in viscosity.VISCOSITY_MODES:
        raise ConfigError(f"viscosity.mode: unknown mode {cfg.viscosity_mode!r}")
    if cfg.scheme == "flux_diff" and cfg.viscosity_mode != "none":
        raise ConfigError("scheme flux_diff requires viscosity.mode = none")
    if cfg.trace_mode not in ("auto",) + dg.TRACE_MODES:
        raise ConfigError(f"trace.mode: unknown mode {cfg.trace_mode!r}")
    if cfg.time_integrator not in ("adaptive", "fixed_cfl"):
        raise ConfigError(f"time.integrator: unknown integrator {cfg.time_integrator!r}")
    if cfg.time_integrator == "fixed_cfl" and cfg.time_cfl <= 0.0:
        raise ConfigError(f"time.cfl: must be positive for fixed_cfl, got {cfg.time_cfl}")
    if cfg.time_abs_tol <= 0.0 or cfg.time_rel_tol < 0.0:
        raise ConfigError("time.abs_tol must be positive and time.rel_tol non-negative")
    if cfg.time_max_steps < 1:
        raise ConfigError("time.max_steps must be >= 1")
    if cfg.init_mode not in ("projection", "interpolation"):
        raise ConfigError(f"init.mode: unknown mode {cfg.init_mode!r}")
    if cfg.output_history_stride < 1:
        raise ConfigError("output.history_stride must be >= 1")
    if cfg.sweep_mode not in ("evolve", "residual"):
        raise ConfigError(f"sweep.mode: unknown mode {cfg.sweep_mode!r}")
    if cfg.residual_quadrature not in ("high", "default"):
        raise ConfigError(f"residual.quadrature: expected high or default")
    return cfg


def parse_config_text(text, origin="<config>"):
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key.startswith("result."):
            continue
        if key not in KEY_TABLE:
            raise ConfigError(f"{origin}:{lineno}: unknown key {key!r}")
        field_name, parser = KEY_TABLE[key]
        try:
            values[field_name] = parser(val)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{origin}:{lineno}: bad value for {key}: {exc}") from exc
    return validate_config(RunConfig(**values))


def parse_config_file(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, origin=str(path))


def config_lines(cfg):
    out = []
    for f in fields(RunConfig):
        key = FIELD_TO_KEY[f.name]
        v = getattr(cfg, f.name)
        if v is None:
            v = "auto"
        elif isinstance(v, tuple):
            v = ",".join(repr(float(x)) for x in v)
        out.append(f"{key} = {v}")
    return out


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

def build_problem(cfg):
    if cfg.problem_kind == "density_wave":
        return driver.density_wave(cfg.problem_amplitude)
    if cfg.problem_kind == "custom":
        a, b = cfg.problem_domain
        t_final = cfg.time_t_final if cfg.time_t_final is not None else 0.2
        return driver.riemann_problem(
            "custom", cfg.problem_left, cfg.problem_right, cfg.problem_x0, a, b, t_final
        )
    return driver.PROBLEMS[cfg.problem_kind]()


def build_semidiscretization(cfg, problem=None):
    problem = problem or build_problem(cfg)
    disc = driver.build_discretization(
        cfg.disc_variant, cfg.disc_N, cfg.disc_K, problem, cfg.disc_volume_points
    )
    bc = driver.build_boundary(problem)
    trace = driver.resolve_trace_mode(cfg.trace_mode, cfg.scheme, cfg.viscosity_mode)
    semi = driver.Semidiscretization(
        disc,
        bc,
        scheme=cfg.scheme,
        flux_kind=cfg.flux_kind,
        volume_flux=cfg.flux_volume,
        trace_mode=trace,
        viscosity_mode=cfg.viscosity_mode,
        delta_tol=cfg.viscosity_delta_tol,
    )
    return problem, semi


@dataclass
class RunResult:
    status: str
    exit_code: int
    t_reached: float
    n_accepted: int
    n_rejected: int
    wall_seconds: float
    history: dict
    final_state: np.ndarray | None
    l2_error: float | None = None
    l1_error_riemann: float | None = None
    message: str = ""
    entropy_monotone: bool | None = None
    paths: dict | None = None


def _fmt(v):
    if v is None or (isinstance(v, float) and not np.isfinite(v)):
        return "nan"
    return f"{v:.16e}"


def run(cfg, out_dir=None):
    """Execute one configured run; returns a RunResult and writes artifacts."""
    problem, semi = build_semidiscretization(cfg)
    t_final = cfg.time_t_final if cfg.time_t_final is not None else problem.t_final
    disc = semi.disc
    u = driver.initialize(disc, problem, cfg.init_mode)

    hist = {"t": [], "dt": [], "total_entropy": [], "entropy_rate": [], "rate_scale": [], "l2_error": []}
    counter = {"n": 0, "last_t": 0.0}

    def record(t, state, dt):
        euler.check_admissible(state, "history snapshot", time=t)
        S = dg.total_entropy(disc, state)
        rate, scale = semi.entropy_rate(state, semi.rhs(state, t))
        err = diagnostics.l2_error(disc, state, problem.exact, t) if problem.exact else float("nan")
        hist["t"].append(t)
        hist["dt"].append(dt)
        hist["total_entropy"].append(S)
        hist["entropy_rate"].append(rate)
        hist["rate_scale"].append(scale)
        hist["l2_error"].append(err)

    def on_step(t, state):
        counter["n"] += 1
        if counter["n"] % cfg.output_history_stride == 0:
            record(t, state, t - counter["last_t"])
        counter["last_t"] = t

    t0 = wallclock.perf_counter()
    status, code, message = "ok", EXIT_OK, ""
    t_reached = 0.0
    n_acc = n_rej = 0
    final = None
    try:
        record(0.0, u, 0.0)
        if cfg.time_integrator == "adaptive":
            ctrl = timestep.TimeController(
                abs_tol=cfg.time_abs_tol, rel_tol=cfg.time_rel_tol, dt_max=t_final
            )
            final, t_reached = timestep.integrate_adaptive(
                semi.rhs, u, 0.0, t_final, ctrl, admissible=euler.is_admissible,
                step_callback=on_step, max_steps=cfg.time_max_steps,
            )
            n_acc, n_rej = ctrl.n_accepted, ctrl.n_rejected
        else:
            final, t_reached, n_acc = timestep.integrate_fixed_cfl(
                semi.rhs, u, 0.0, t_final, cfg.time_cfl, disc.mesh.h, semi.max_wavespeed,
                step_callback=on_step,
            )
    except IntegrationFailure as exc:
        t_reached = exc.time_reached
        status = "admissibility_failure" if exc.origin == "admissibility" else "integration_failure"
        code = EXIT_ADMISSIBILITY if exc.origin == "admissibility" else EXIT_INTEGRATION
        message = str(exc)
    except AdmissibilityError as exc:
        t_reached = exc.time if exc.time is not None else t_reached
        status, code, message = "admissibility_failure", EXIT_ADMISSIBILITY, str(exc)
    wall = wallclock.perf_counter() - t0

    result = RunResult(
        status, code, t_reached, n_acc, n_rej, wall, hist, final,
        message=message,
    )
    if status == "ok":
        if problem.exact is not None:
            result.l2_error = diagnostics.l2_error(disc, final, problem.exact, t_reached)
        if problem.riemann_data is not None and t_reached > 0:
            qL, qR, x0 = problem.riemann_data
            ref = diagnostics.riemann_reference(disc, qL, qR, x0, t_reached)
            result.l1_error_riemann = diagnostics.l1_error(disc, final, ref)
        S = np.asarray(hist["total_entropy"])
        slack = 100.0 * (cfg.time_abs_tol + cfg.time_rel_tol * np.max(np.abs(S)))
        result.entropy_monotone = diagnostics.entropy_history_report(S, slack).monotone

    if out_dir is not None:
        result.paths = write_artifacts(cfg, result, semi, out_dir)
    return result


def write_artifacts(cfg, result, semi, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}

    hist_path = out / "history.csv"
    cols = ["t", "dt", "total_entropy", "entropy_rate", "rate_scale", "l2_error"]
    with hist_path.open("w") as fh:
        fh.write(",".join(cols) + "\n")
        for i in range(len(result.history["t"])):
            fh.write(",".join(_fmt(result.history[c][i]) for c in cols) + "\n")
    paths["history"] = str(hist_path)

    if result.final_state is not None:
        snap_path = out / "solution.csv"
        disc = semi.disc
        u = result.final_state
        eps = semi.viscosity_nodal(u)
        rho, vel, p = euler.cons_to_prim(u)
        with snap_path.open("w") as fh:
            fh.write("x,rho,rhou,E,p,eps\n")
            x = disc.x
            for k in range(disc.mesh.K):
                for q in range(disc.ops.n_nodes):
                    row = (x[k, q], u[k, q, 0], u[k, q, 1], u[k, q, 2], p[k, q], eps[k, q])
                    fh.write(",".join(_fmt(v) for v in row) + "\n")
        paths["solution"] = str(snap_path)

    man_path = out / "manifest.txt"
    with man_path.open("w") as fh:
        for line in config_lines(cfg):
            fh.write(line + "\n")
        fh.write(f"result.status = {result.status}\n")
        fh.write(f"result.exit_code = {result.exit_code}\n")
        fh.write(f"result.t_reached = {_fmt(result.t_reached)}\n")
        fh.write(f"result.steps_accepted = {result.n_accepted}\n")
        fh.write(f"result.steps_rejected = {result.n_rejected}\n")
        fh.write(f"result.wall_seconds = {result.wall_seconds:.3f}\n")
        if result.l2_error is not None:
            fh.write(f"result.l2_error = {_fmt(result.l2_error)}\n")
        if result.l1_error_riemann is not None:
            fh.write(f"result.l1_error_riemann = {_fmt(result.l1_error_riemann)}\n")
        if result.entropy_monotone is not None:
            fh.write(f"result.entropy_monotone = {result.entropy_monotone}\n")
        if result.message:
            fh.write(f"result.message = {result.message}\n")
    paths["manifest"] = str(man_path)
    return paths


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def parse_grid_file(path):
    rows = []
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        overrides = {}
        for item in line.split(","):
            if "=" not in item:
                raise ConfigError(f"{path}:{lineno}: expected key=value items, got {item!r}")
            key, _, val = item.partition("=")
            key, val = key.strip(), val.strip()
            if key not in KEY_TABLE:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            field_name, parser = KEY_TABLE[key]
            try:
                overrides[field_name] = parser(val)
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
        rows.append(overrides)
    if not rows:
        raise ConfigError(f"{path}: empty sweep grid")
    return rows


def _rate_column(h, err):
    rates = [float("nan")]
    for i in range(1, len(h)):
        if err[i - 1] > 0 and err[i] > 0 and h[i] != h[i - 1]:
            rates.append(np.log(err[i - 1] / err[i]) / np.log(h[i - 1] / h[i]))
        else:
            rates.append(float("nan"))
    return rates


def sweep(template_cfg, grid_rows, out_dir):
    """Run a parameter grid and write Table-style CSVs with error/rate columns."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if template_cfg.sweep_mode == "residual":
        return _sweep_residual(template_cfg, grid_rows, out)
    return _sweep_evolve(template_cfg, grid_rows, out)


def _sweep_evolve(template_cfg, grid_rows, out):
    records = []
    for overrides in grid_rows:
        cfg = validate_config(replace(template_cfg, **overrides))
        problem = build_problem(cfg)
        h = (problem.b - problem.a) / cfg.disc_K
        try:
            result = run(cfg)
            err = result.l2_error if result.l2_error is not None else result.l1_error_riemann
            records.append((cfg.disc_N, cfg.disc_K, h, err, result.status))
        except Exception as exc:  # sub-run failures are recorded, sweep continues
            records.append((cfg.disc_N, cfg.disc_K, h, float("nan"), f"error: {exc}"))

    runs_path = out / "sweep_runs.csv"
    with runs_path.open("w") as fh:
        fh.write("N,K,h,error,status\n")
        for N, K, h, err, status in records:
            fh.write(f"{N},{K},{_fmt(h)},{_fmt(err)},{status}\n")

    # Table-style pivot: rows by h, per-degree error and rate columns
    degrees = sorted({r[0] for r in records})
    hs = sorted({r[2] for r in records}, reverse=True)
    table_path = out / "sweep_table.csv"
    with table_path.open("w") as fh:
        header = ["h"]
        for N in degrees:
            header += [f"error_N{N}", f"rate_N{N}"]
        fh.write(",".join(header) + "\n")
        per_degree = {}
        for N in degrees:
            rows = sorted([r for r in records if r[0] == N], key=lambda r: -r[2])
            errs = {r[2]: r[3] for r in rows}
            hh = [r[2] for r in rows]
            ee = [r[3] for r in rows]
            rr = _rate_column(hh, ee)
            per_degree[N] = (errs, dict(zip(hh, rr)))
        for h in hs:
            row = [_fmt(h)]
            for N in degrees:
                errs, rates = per_degree[N]
                row.append(_fmt(errs.get(h, float("nan"))))
                row.append(_fmt(rates.get(h, float("nan"))))
            fh.write(",".join(row) + "\n")
    return {"runs": str(runs_path), "table": str(table_path)}


def _sweep_residual(template_cfg, grid_rows, out):
    groups = {}
    for overrides in grid_rows:
        cfg = validate_config(replace(template_cfg, **overrides))
        groups.setdefault((cfg.disc_N, cfg.residual_quadrature), []).append(cfg.disc_K)

    tables = {}
    for (N, quad), Ks in groups.items():
        tables[(N, quad)] = diagnostics.residual_convergence_study(N, sorted(Ks), quadrature=quad)

    path = out / "residual_table.csv"
    with path.open("w") as fh:
        fh.write("N,quadrature,h,max_delta,delta_rate,max_eps,eps_rate\n")
        for (N, quad), tab in sorted(tables.items()):
            dr = _rate_column(list(tab.h), list(tab.values["max_delta"]))
            er = _rate_column(list(tab.h), list(tab.values["max_eps"]))
            for i in range(len(tab.h)):
                fh.write(
                    f"{N},{quad},{_fmt(tab.h[i])},{_fmt(tab.values['max_delta'][i])},"
                    f"{_fmt(dr[i])},{_fmt(tab.values['max_eps'][i])},{_fmt(er[i])}\n"
                )
    return {"table": str(path)}


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def main(argv=None):
    parser = argparse.ArgumentParser(prog="esdg1d", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one configured experiment")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default="out")
    p_sweep = sub.add_parser("sweep", help="run a parameter grid")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--grid", required=True)
    p_sweep.add_argument("--out", default="out")
    args = parser.parse_args(argv)

    try:
        cfg = parse_config_file(args.config)
        if args.command == "run":
            result = run(cfg, args.out)
            if result.message:
                print(f"{result.status}: {result.message}", file=sys.stderr)
            print(f"status={result.status} t_reached={result.t_reached:.8g} "
                  f"steps={result.n_accepted} rejected={result.n_rejected}")
            return result.exit_code
        grid = parse_grid_file(args.grid)
        paths = sweep(cfg, grid, args.out)
        print(" ".join(f"{k}={v}" for k, v in paths.items()))
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationFailure as exc:
        print(f"integration failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    except AdmissibilityError as exc:
        print(f"admissibility failure: {exc}", file=sys.stderr)
        return EXIT_ADMISSIBILITY


if __name__ == "__main__":
    sys.exit(main())
