"""Command-line front end: flat key=value configs in, deterministic CSV out.

Commands: speed, steady, eigen, threshold, diagram, sweep, simulate, xcheck.
Numbers are printed with 17 significant digits so identical inputs produce
byte-identical CSV; report-style commands also render figures next to the
output file unless ``--no-plot`` is given.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import cylinder, halfspace, mortality
from .params import (
    ConfigError,
    DomainError,
    InfeasibleError,
    InstabilityError,
    Params,
    Regime,
    TangencyResult,
    UnsupportedDimensionError,
)
from .simulate import InitSpec, SimConfig, run_radial, run_strip

COMMANDS = ("speed", "steady", "eigen", "threshold", "diagram", "sweep", "simulate", "xcheck")
MODELS = ("halfspace", "cylinder", "roadfield")
EXTERIORS = ("kpp", "mortality")
SWEEP_VARS = ("D", "d", "R", "mu", "nu", "gp", "fp", "rho", "N")

_PARAM_KEYS = ("N", "D", "d", "gp", "fp", "rho", "mu", "nu", "R", "S")
_SIM_KEYS = {
    "sim.geometry": str,
    "sim.nx": int,
    "sim.ny": int,
    "sim.dx": float,
    "sim.dy": float,
    "sim.dr": float,
    "sim.r_out": float,
    "sim.dt": float,
    "sim.T": float,
    "sim.init": str,
    "sim.init.center": float,
    "sim.init.radius": float,
    "sim.init.height": float,
    "sim.init.level": float,
    "sim.outer_bc": str,
}
_TOP_KEYS = {
    "command": str,
    "model": str,
    "exterior": str,
    "N": int,
    "D": float,
    "d": float,
    "gp": float,
    "fp": float,
    "rho": float,
    "mu": float,
    "nu": float,
    "R": float,
    "S": float,
    "sweep.var": str,
    "sweep.start": float,
    "sweep.stop": float,
    "sweep.count": int,
    "sweep.scale": str,
    "out": str,
}

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_INSTABILITY = 4


@dataclass(frozen=True)
class SweepSpec:
    var: str
    start: float
    stop: float
    count: int
    scale: str = "linear"

    def values(self) -> list[float]:
        if self.scale == "log":
            return list(np.geomspace(self.start, self.stop, self.count))
        return list(np.linspace(self.start, self.stop, self.count))


@dataclass(frozen=True)
class RunConfig:
    command: str
    model: str
    exterior: str
    params: Params
    sweep: SweepSpec | None = None
    sim: dict = field(default_factory=dict)
    out: str | None = None


def parse_config(text: str) -> RunConfig:
    """Parse a flat ``key = value`` configuration (``#`` starts a comment)."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'")
        if key not in _TOP_KEYS and key not in _SIM_KEYS:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        raw[key] = value

    def convert(key: str, conv):
        val = raw[key]
        try:
            return conv(val)
        except ValueError:
            raise ConfigError(f"key '{key}': cannot parse {val!r}") from None

    for req in ("command",):
        if req not in raw:
            raise ConfigError(f"missing required key '{req}'")
    command = raw["command"].lower()
    if command not in COMMANDS:
        raise ConfigError(f"key 'command': unknown command {command!r}")
    model = raw.get("model", "cylinder").lower()
    if model not in MODELS:
        raise ConfigError(f"key 'model': unknown model {model!r}")
    exterior = raw.get("exterior", "kpp").lower()
    if exterior not in EXTERIORS:
        raise ConfigError(f"key 'exterior': unknown exterior {exterior!r}")

    if command != "diagram":
        missing = [k for k in ("D", "d", "gp", "mu", "nu", "R") if k not in raw]
        if exterior == "kpp" and "fp" not in raw:
            missing.append("fp")
        if exterior == "mortality" and "rho" not in raw:
            missing.append("rho")
        if missing:
            raise ConfigError(f"missing required key '{missing[0]}'")

    kwargs = dict(D=1.0, d=1.0, gp=1.0, mu=1.0, nu=1.0, R=1.0, S=1.0, N=2)
    for key in _PARAM_KEYS:
        if key in raw:
            kwargs[key] = convert(key, _TOP_KEYS[key])
    if exterior == "kpp":
        kwargs.setdefault("fp", 1.0)
        kwargs.pop("rho", None)
    else:
        kwargs.pop("fp", None)
        if "rho" not in kwargs:
            kwargs["rho"] = 1.0
    try:
        params = Params(**kwargs)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None

    sweep = None
    if any(k.startswith("sweep.") for k in raw):
        for k in ("sweep.var", "sweep.start", "sweep.stop", "sweep.count"):
            if k not in raw:
                raise ConfigError(f"missing required key '{k}'")
        var = raw["sweep.var"]
        if var not in SWEEP_VARS:
            raise ConfigError(f"key 'sweep.var': unknown variable {var!r}")
        if var == "fp" and exterior == "mortality":
            raise ConfigError("key 'sweep.var': fp is not a mortality parameter")
        if var == "rho" and exterior == "kpp":
            raise ConfigError("key 'sweep.var': rho is not a kpp parameter")
        scale = raw.get("sweep.scale", "linear")
        if scale not in ("linear", "log"):
            raise ConfigError(f"key 'sweep.scale': must be linear or log, got {scale!r}")
        count = convert("sweep.count", int)
        if count < 2:
            raise ConfigError("key 'sweep.count': need at least 2 points")
        sweep = SweepSpec(
            var=var,
            start=convert("sweep.start", float),
            stop=convert("sweep.stop", float),
            count=count,
            scale=scale,
        )

    sim = {}
    for key, conv in _SIM_KEYS.items():
        if key in raw:
            sim[key.removeprefix("sim.")] = convert(key, conv)

    return RunConfig(
        command=command,
        model=model,
        exterior=exterior,
        params=params,
        sweep=sweep,
        sim=sim,
        out=raw.get("out"),
    )


def render_config(cfg: RunConfig) -> str:
    """Inverse of parse_config for round-trip tests."""
    lines = [f"command = {cfg.command}", f"model = {cfg.model}", f"exterior = {cfg.exterior}"]
    p = cfg.params
    for key in _PARAM_KEYS:
        val = getattr(p, key)
        if val is None:
            continue
        lines.append(f"{key} = {val:.17g}" if key != "N" else f"N = {val}")
    if cfg.sweep is not None:
        s = cfg.sweep
        lines += [
            f"sweep.var = {s.var}",
            f"sweep.start = {s.start:.17g}",
            f"sweep.stop = {s.stop:.17g}",
            f"sweep.count = {s.count}",
            f"sweep.scale = {s.scale}",
        ]
    for key, val in cfg.sim.items():
        lines.append(f"sim.{key} = {val}")
    if cfg.out is not None:
        lines.append(f"out = {cfg.out}")
    return "\n".join(lines) + "\n"


def _fmt(value) -> str:
    if value is None:
        return "nan"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _param_cells(p: Params) -> list[str]:
    return [_fmt(getattr(p, key)) for key in _PARAM_KEYS]


def _speed_for(model: str, p: Params):
    if model == "halfspace":
        if p.mortality:
            r = halfspace.speed_halfspace_mortality(p)
        else:
            r = halfspace.speed_halfspace(p)
        beta, alpha = r.witness if r.witness else (math.nan, math.nan)
        return r.c, r.regime.value, beta, alpha, False
    if model == "roadfield":
        r = cylinder.road_field_speed(p)
        beta, alpha = r.witness if r.witness else (math.nan, math.nan)
        return r.c, r.regime.value, beta, alpha, r.regime is not Regime.FISHER
    if p.mortality:
        rm: TangencyResult = mortality.speed_cylinder_mortality(p)
        return rm.c_star, "mortality", rm.beta_star, rm.alpha_star, False
    rc = cylinder.speed_cylinder(p)
    regime = "anomalous" if rc.enhanced else "fisher"
    return rc.c_star, regime, rc.beta_star, rc.alpha_star, rc.enhanced


SPEED_HEADER = (
    ",".join(_PARAM_KEYS) + ",model,exterior,regime,c_star,beta_star,alpha_star,enhanced,status"
)


def _speed_row(model: str, exterior: str, p: Params) -> tuple[str, bool]:
    cells = _param_cells(p) + [model, exterior]
    try:
        c, regime, beta, alpha, enhanced = _speed_for(model, p)
        cells += [regime, _fmt(c), _fmt(beta), _fmt(alpha), _fmt(enhanced), "ok"]
        return ",".join(cells), True
    except InfeasibleError:
        cells += ["none", "nan", "nan", "nan", "false", "extinct"]
        return ",".join(cells), False
    except (DomainError, UnsupportedDimensionError):
        cells += ["none", "nan", "nan", "nan", "false", "unsupported"]
        return ",".join(cells), False


def _vary(p: Params, var: str, value: float) -> Params:
    fields = dict(
        D=p.D, d=p.d, gp=p.gp, fp=p.fp, rho=p.rho, mu=p.mu, nu=p.nu, R=p.R, S=p.S, N=p.N
    )
    fields[var] = int(round(value)) if var == "N" else value
    if fields.get("fp") is None:
        fields.pop("fp", None)
    if fields.get("rho") is None:
        fields.pop("rho", None)
    return Params(**fields)


def _worker_count(n_jobs: int) -> int:
    env = os.environ.get("KPPSPEEDS_THREADS")
    if env:
        try:
            cap = max(1, int(env))
        except ValueError:
            raise ConfigError(f"KPPSPEEDS_THREADS must be an integer, got {env!r}") from None
    else:
        cap = min(4, os.cpu_count() or 1)
    return max(1, min(cap, n_jobs))


def _cmd_speed(cfg: RunConfig) -> tuple[list[str], int]:
    row, ok = _speed_row(cfg.model, cfg.exterior, cfg.params)
    return [SPEED_HEADER, row], EXIT_OK if ok else EXIT_INFEASIBLE


def _cmd_sweep(cfg: RunConfig) -> tuple[list[str], int]:
    if cfg.sweep is None:
        raise ConfigError("sweep command requires sweep.* keys")
    points = cfg.sweep.values()
    jobs = [_vary(cfg.params, cfg.sweep.var, v) for v in points]
    workers = _worker_count(len(jobs))
    if workers == 1:
        results = [_speed_row(cfg.model, cfg.exterior, p) for p in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda p: _speed_row(cfg.model, cfg.exterior, p), jobs))
    lines = [SPEED_HEADER] + [row for row, _ in results]
    code = EXIT_OK if all(ok for _, ok in results) else EXIT_INFEASIBLE
    return lines, code


def _cmd_diagram(cfg: RunConfig) -> tuple[list[str], int]:
    n = cfg.sweep.count if cfg.sweep is not None else 50
    xs = np.linspace(0.1, 5.0, n)
    ys = np.linspace(0.1, 3.0, n)
    rows, _ = halfspace.regime_diagram(xs, ys)
    lines = ["x,y,regime"]
    lines += [f"{_fmt(x)},{_fmt(y)},{regime.value}" for x, y, regime in rows]
    return lines, EXIT_OK


def _cmd_steady(cfg: RunConfig) -> tuple[list[str], int]:
    p = cfg.params
    header = ",".join(_PARAM_KEYS) + ",model,exterior,branch,U0,V0,dU0,residual,status"
    cells = _param_cells(p) + [cfg.model, cfg.exterior]
    try:
        if cfg.model == "cylinder" and p.mortality:
            st = mortality.radial_steady_mortality(p)
            cells += [
                "radial",
                _fmt(st.a0),
                _fmt(float(st.psi[0])),
                _fmt(st.gamma_ext),
                _fmt(st.robin_residual),
                "ok",
            ]
        else:
            prof = halfspace.steady_state_halfspace(p)
            cells += [
                prof.branch,
                _fmt(prof.U0),
                _fmt(prof.V0),
                _fmt(prof.dU0),
                _fmt(prof.flux_residual),
                "ok",
            ]
        return [header, ",".join(cells)], EXIT_OK
    except InfeasibleError:
        cells += ["none", "nan", "nan", "nan", "nan", "extinct"]
        return [header, ",".join(cells)], EXIT_INFEASIBLE


def _cmd_eigen(cfg: RunConfig) -> tuple[list[str], int]:
    p = cfg.params
    if not p.mortality:
        raise ConfigError("eigen requires exterior = mortality")
    eig = mortality.robin_eigenvalue(p)
    header = ",".join(_PARAM_KEYS) + ",beta0,kappa,survives,residual,status"
    row = _param_cells(p) + [
        _fmt(eig.beta0),
        _fmt(eig.kappa),
        _fmt(eig.survives),
        _fmt(eig.residual),
        "ok",
    ]
    return [header, ",".join(row)], EXIT_OK


def _cmd_threshold(cfg: RunConfig) -> tuple[list[str], int]:
    p = cfg.params
    if not p.mortality:
        raise ConfigError("threshold requires exterior = mortality")
    R0 = mortality.survival_threshold_R(p)
    D0 = mortality.survival_threshold_D(p)
    header = ",".join(_PARAM_KEYS) + ",R0,D0,all_D,status"
    row = _param_cells(p) + [_fmt(R0), _fmt(D0), _fmt(math.isinf(D0)), "ok"]
    return [header, ",".join(row)], EXIT_OK


def _sim_config(cfg: RunConfig, defaults: dict | None = None) -> SimConfig:
    opts = dict(defaults or {})
    opts.update(cfg.sim)
    geometry = opts.pop("geometry", "strip" if not cfg.params.mortality else "radial")
    init_kind = opts.pop("init", "bump")
    init = InitSpec(
        kind=init_kind,
        center=opts.pop("init.center", 0.0),
        radius=opts.pop("init.radius", 5.0),
        height=opts.pop("init.height", 0.5),
        level=opts.pop("init.level", 1e-2),
    )
    known = {"nx", "ny", "dx", "dy", "dr", "r_out", "dt", "T", "outer_bc"}
    bad = set(opts) - known
    if bad:
        raise ConfigError(f"unknown sim key 'sim.{sorted(bad)[0]}'")
    return SimConfig(geometry=geometry, p=cfg.params, init=init, **opts)


def _cmd_simulate(cfg: RunConfig) -> tuple[list[str], int]:
    sim_cfg = _sim_config(cfg)
    result = run_strip(sim_cfg) if sim_cfg.geometry == "strip" else run_radial(sim_cfg)
    header = (
        ",".join(_PARAM_KEYS)
        + ",geometry,fitted_speed,speed_stderr,extinct,steady_residual,final_mass,status"
    )
    row = _param_cells(cfg.params) + [
        sim_cfg.geometry,
        _fmt(result.fitted_speed),
        _fmt(result.speed_stderr),
        _fmt(result.extinct),
        _fmt(result.steady_residual),
        _fmt(float(result.mass_history[-1, 1])),
        "ok",
    ]
    return [header, ",".join(row)], EXIT_OK


# Desk-scale verification run matched to the solver cross-check case.
XCHECK_SIM_DEFAULTS = {"nx": 600, "ny": 190, "dx": 0.25, "dy": 0.1, "T": 40.0}


def _cmd_xcheck(cfg: RunConfig) -> tuple[list[str], int]:
    p = cfg.params
    if p.mortality or cfg.model != "cylinder":
        raise ConfigError("xcheck compares the strip simulation against the cylinder solver")
    c_solver = cylinder.speed_cylinder(p).c_star
    sim_cfg = _sim_config(cfg, defaults=dict(XCHECK_SIM_DEFAULTS, geometry="strip"))
    result = run_strip(sim_cfg)
    rel_err = abs(result.fitted_speed - c_solver) / c_solver
    header = ",".join(_PARAM_KEYS) + ",c_star_solver,speed_sim,rel_err,status"
    row = _param_cells(p) + [
        _fmt(c_solver),
        _fmt(result.fitted_speed),
        _fmt(rel_err),
        "ok",
    ]
    return [header, ",".join(row)], EXIT_OK


def run(cfg: RunConfig) -> tuple[str, int]:
    """Dispatch a parsed configuration; returns (csv text, exit code)."""
    dispatch = {
        "speed": _cmd_speed,
        "sweep": _cmd_sweep,
        "diagram": _cmd_diagram,
        "steady": _cmd_steady,
        "eigen": _cmd_eigen,
        "threshold": _cmd_threshold,
        "simulate": _cmd_simulate,
        "xcheck": _cmd_xcheck,
    }
    lines, code = dispatch[cfg.command](cfg)
    return "\n".join(lines) + "\n", code


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="kppspeeds",
        description="Spreading speeds and steady states of interface-coupled KPP systems",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="path to a key=value config file")
    parser.add_argument("--out", default=None, help="CSV output path (default: config 'out' or stdout)")
    parser.add_argument(
        "--no-plot", action="store_true", help="skip figure rendering for report commands"
    )
    args = parser.parse_args(argv)

    try:
        cfg = parse_config(Path(args.config).read_text())
        if cfg.command != args.command:
            raise ConfigError(
                f"config declares command={cfg.command!r} but {args.command!r} was requested"
            )
        if args.out is not None:
            cfg = replace(cfg, out=args.out)
        csv_text, code = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InfeasibleError, DomainError, UnsupportedDimensionError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except InstabilityError as exc:
        print(f"simulation instability: {exc}", file=sys.stderr)
        return EXIT_INSTABILITY

    if cfg.out:
        out_path = Path(cfg.out)
        if out_path.parent != Path(""):
            out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text(csv_text)
        if not args.no_plot and cfg.command in ("diagram", "sweep", "xcheck"):
            from . import plots

            try:
                figs = plots.render_report(cfg.command, csv_text, out_path)
                for fig_path in figs:
                    print(f"wrote {fig_path}", file=sys.stderr)
            except Exception as exc:  # figures are best-effort companions
                print(f"figure rendering failed: {exc}", file=sys.stderr)
    else:
        sys.stdout.write(csv_text)
    return code


if __name__ == "__main__":
    sys.exit(main())
