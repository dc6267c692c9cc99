"""Experiment orchestration: config parsing, run modes, sweeps, file output.

Config files are line-oriented key = value text with sections ([params],
[stefan], [initial], [numerics], [run], [sweep]); results are written as a
self-describing results.json plus CSV data files with 12-significant-digit
floats.  Everything is deterministic given the config.
"""
from __future__ import annotations

import argparse
import configparser
import dataclasses
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .dynamics import dichotomy_predicates
from .errors import (
    ConfigError,
    DomainError,
    NonConvergence,
    SpreadfrontError,
    UndecidedAtHorizon,
)
from .model_core import CompetitionParams, equilibria
from .semiwave import (
    NoNontrivialSolution,
    SemiWaveConfig,
    critical_speed,
    solve_semiwave,
    speed_for_gamma,
)
from .stefan_sim import (
    InitialData,
    StefanConfig,
    classify_threshold_gamma,
    make_initial_data,
    simulate,
)

__all__ = ["ExperimentConfig", "load_config", "run", "sweep", "main"]

MODES = (
    "semiwave", "critical-speed", "speed-for-gamma", "simulate",
    "gamma-star", "crosscheck", "sweep",
)
SWEEPABLE = ("gamma", "g0", "c", "d", "r", "h", "k")


@dataclasses.dataclass
class ExperimentConfig:
    mode: str
    params: CompetitionParams
    gamma: float = 1.0
    g0: float = 3.0
    c: float = 0.0
    horizon: float = 300.0
    T_cls: float = 150.0
    gamma_tol: float = 0.05
    initial_kind: str = "bump"
    amplitude: float = 0.5
    v_inf: float = 1.0
    table_file: str | None = None
    semiwave_cfg: SemiWaveConfig = dataclasses.field(default_factory=SemiWaveConfig)
    stefan_cfg: StefanConfig = dataclasses.field(default_factory=StefanConfig)
    out_dir: str = "out"
    snapshot_times: tuple[float, ...] = ()
    sweep_axes: tuple[tuple[str, tuple[float, ...]], ...] = ()
    jobs: int = 1

    def resolved(self) -> dict:
        d = dataclasses.asdict(self)
        d["params"] = dataclasses.asdict(self.params)
        d["semiwave_cfg"] = dataclasses.asdict(self.semiwave_cfg)
        d["stefan_cfg"] = dataclasses.asdict(self.stefan_cfg)
        return d


def _coerce(dc_type, section: dict, **extra):
    """Build a dataclass from a config section, type-coercing strings."""
    kwargs = dict(extra)
    fields = {f.name: f for f in dataclasses.fields(dc_type)}
    for key, raw in section.items():
        if key not in fields:
            raise ConfigError(f"unknown key {key!r} for {dc_type.__name__}")
        ftype = fields[key].type
        if "bool" in str(ftype):
            kwargs[key] = raw.strip().lower() in ("1", "true", "yes", "on")
        elif "int" in str(ftype):
            kwargs[key] = int(raw)
        else:
            kwargs[key] = float(raw)
    return dc_type(**kwargs)


def load_config(path: str | Path, mode_override: str | None = None,
                out_override: str | None = None, jobs: int = 1) -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    read = cp.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    try:
        pd = dict(cp["params"]) if "params" in cp else {}
        scalar_mode = pd.pop("scalar_mode", "false").strip().lower() in (
            "1", "true", "yes", "on")
        params = CompetitionParams(
            d=float(pd.get("d", 1.0)), r=float(pd.get("r", 1.0)),
            h=float(pd.get("h", 0.5)), k=float(pd.get("k", 0.5)),
            scalar_mode=scalar_mode,
        )
    except (ValueError, DomainError) as exc:
        raise ConfigError(f"bad [params]: {exc}") from exc

    run_sec = dict(cp["run"]) if "run" in cp else {}
    mode = mode_override or run_sec.get("mode")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")

    num = dict(cp["numerics"]) if "numerics" in cp else {}
    sw_keys = {f.name for f in dataclasses.fields(SemiWaveConfig)}
    st_keys = {f.name for f in dataclasses.fields(StefanConfig)}
    sw_sec = {k: v for k, v in num.items() if k in sw_keys}
    st_sec = {k: v for k, v in num.items() if k in st_keys}
    leftover = set(num) - sw_keys - st_keys
    if leftover:
        raise ConfigError(f"unknown [numerics] keys: {sorted(leftover)}")
    try:
        sw_cfg = _coerce(SemiWaveConfig, sw_sec)
        st_cfg = _coerce(StefanConfig, st_sec)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad [numerics]: {exc}") from exc
    if sw_cfg.n < 16 or st_cfg.n_u < 16:
        raise ConfigError("grid sizes must be at least 16")
    for tol_name in ("fp_tol", "c_tol", "residual_tol"):
        if getattr(sw_cfg, tol_name) <= 0:
            raise ConfigError(f"{tol_name} must be positive")

    st = dict(cp["stefan"]) if "stefan" in cp else {}
    ini = dict(cp["initial"]) if "initial" in cp else {}
    sweep_axes: list[tuple[str, tuple[float, ...]]] = []
    if "sweep" in cp:
        for axis, values in cp["sweep"].items():
            if axis not in SWEEPABLE:
                raise ConfigError(f"cannot sweep {axis!r}; choose from {SWEEPABLE}")
            vals = tuple(float(v) for v in values.replace(",", " ").split())
            if not vals:
                raise ConfigError(f"empty sweep range for {axis!r}")
            sweep_axes.append((axis, vals))
        if len(sweep_axes) > 2:
            raise ConfigError("at most two sweep axes supported")

    try:
        cfg = ExperimentConfig(
            mode=mode,
            params=params,
            gamma=float(st.get("gamma", 1.0)),
            g0=float(st.get("g0", 3.0)),
            c=float(run_sec.get("c", 0.0)),
            horizon=float(run_sec.get("horizon", 300.0)),
            T_cls=float(run_sec.get("t_cls", 150.0)),
            gamma_tol=float(run_sec.get("gamma_tol", 0.05)),
            initial_kind=ini.get("kind", "bump"),
            amplitude=float(ini.get("amplitude", 0.5)),
            v_inf=float(ini.get("v_inf", 1.0)),
            table_file=ini.get("table") or None,
            semiwave_cfg=sw_cfg,
            stefan_cfg=st_cfg,
            out_dir=out_override or run_sec.get("out", "out"),
            snapshot_times=tuple(
                float(v) for v in run_sec.get("snapshot_times", "").replace(
                    ",", " ").split()
            ),
            sweep_axes=tuple(sweep_axes),
            jobs=jobs,
        )
    except ValueError as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    if cfg.horizon <= 0 or cfg.gamma <= 0:
        raise ConfigError("horizon and gamma must be positive")
    return cfg


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(_fmt(float(v)) for v in row) + "\n")


def _make_init(cfg: ExperimentConfig) -> InitialData:
    u_table = None
    if cfg.initial_kind == "table":
        if not cfg.table_file:
            raise ConfigError("initial kind=table requires table = <csv path>")
        u_table = np.loadtxt(cfg.table_file, delimiter=",")
    return make_initial_data(
        g0=cfg.g0, amplitude=cfg.amplitude, v_inf=cfg.v_inf,
        kind=cfg.initial_kind, cfg=cfg.stefan_cfg, p=cfg.params, u_table=u_table,
    )


def _cell_summary(cfg: ExperimentConfig) -> dict:
    """Scalars for one (non-sweep) mode evaluation; used by run and sweep."""
    p = cfg.params
    out: dict = {}
    if cfg.mode == "semiwave":
        sol = solve_semiwave(p, cfg.c, cfg.semiwave_cfg)
        if isinstance(sol, NoNontrivialSolution):
            out.update(c=cfg.c, nontrivial=False, sup_phi=sol.sup_phi)
        else:
            from .oracle import residual
            rep = residual(sol, p, cfg.c)
            out.update(
                c=cfg.c, nontrivial=True,
                phi_slope_at_0=sol.phi_slope_at_0,
                decay_rate=sol.decay_rate,
                sup_residual=rep.sup_residual,
                sweeps=sol.sweeps,
            )
            out["_profile"] = sol
    elif cfg.mode == "critical-speed":
        c_star = critical_speed(p, cfg.semiwave_cfg)
        lo = 2.0 * math.sqrt(1.0 - p.k)
        out.update(
            c_star=c_star,
            bracket_low=lo,
            bracket_high=2.0 * math.sqrt(equilibria(p).u_star),
            at_lower_bound=bool(c_star - lo <= 2.0 * cfg.semiwave_cfg.c_tol),
        )
    elif cfg.mode == "speed-for-gamma":
        c_gamma, prof = speed_for_gamma(p, cfg.gamma, cfg.semiwave_cfg)
        out.update(
            gamma=cfg.gamma, c_gamma=c_gamma,
            phi_slope_at_0=prof.phi_slope_at_0,
            decay_rate=prof.decay_rate,
        )
        out["_profile"] = prof
    elif cfg.mode == "simulate":
        res = simulate(p, cfg.gamma, _make_init(cfg), cfg.horizon, cfg.stefan_cfg)
        out.update(
            classification=res.classification,
            g_final=float(res.g_series[-1, 1]),
            speed_estimate=res.speed_estimate,
            u_sup_final=float(res.u_sup_series[-1]),
        )
        out["_sim"] = res
    elif cfg.mode == "gamma-star":
        out["gamma_star"] = classify_threshold_gamma(
            p, _make_init(cfg), cfg.stefan_cfg, cfg.T_cls, cfg.gamma_tol)
    elif cfg.mode == "crosscheck":
        c_gamma, prof = speed_for_gamma(p, cfg.gamma, cfg.semiwave_cfg)
        res = simulate(p, cfg.gamma, _make_init(cfg), cfg.horizon, cfg.stefan_cfg)
        out.update(
            gamma=cfg.gamma, c_gamma=c_gamma,
            classification=res.classification,
            speed_estimate=res.speed_estimate,
            rel_discrepancy=abs(res.speed_estimate - c_gamma) / c_gamma,
        )
        out["_profile"] = prof
        out["_sim"] = res
    else:
        raise ConfigError(f"mode {cfg.mode!r} is not a single-cell mode")
    return out


def _write_outputs(cfg: ExperimentConfig, summary: dict) -> None:
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    prof = summary.pop("_profile", None)
    sim = summary.pop("_sim", None)
    if prof is not None:
        _write_csv(out_dir / "profile.csv", ["s", "phi", "psi"],
                   [prof.s_grid, prof.phi, prof.psi])
    if sim is not None:
        s = sim.series
        _write_csv(out_dir / "trajectory.csv",
                   ["t", "g", "g_dot", "u_sup", "u_at_0", "v_at_0"],
                   [s["t"], s["g"], s["g_dot"], s["u_sup"], s["u_at_0"], s["v_at_0"]])
        fs = sim.final_state
        x_u = np.linspace(0.0, 1.0, fs.u_hat.size) * fs.g
        u_final = fs.u_hat
        x_v = fs.dx_v * np.arange(fs.v.size)
        v_on_u = np.interp(x_u, x_v, fs.v)
        _write_csv(out_dir / "snapshot_final.csv", ["x", "u", "v"],
                   [x_u, u_final, v_on_u])
    result = {"config": cfg.resolved(), "results": summary}
    with open(out_dir / "results.json", "w") as fh:
        json.dump(result, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _sweep_cell(args: tuple) -> dict:
    cfg, assignment = args
    cell_cfg = dataclasses.replace(cfg)
    p_kwargs = dict(d=cfg.params.d, r=cfg.params.r, h=cfg.params.h,
                    k=cfg.params.k, scalar_mode=cfg.params.scalar_mode)
    for axis, value in assignment:
        if axis in ("d", "r", "h", "k"):
            p_kwargs[axis] = value
        else:
            cell_cfg = dataclasses.replace(cell_cfg, **{axis: value})
    row = {axis: value for axis, value in assignment}
    try:
        cell_cfg = dataclasses.replace(cell_cfg, params=CompetitionParams(**p_kwargs))
        summary = _cell_summary(cell_cfg)
        summary.pop("_profile", None)
        summary.pop("_sim", None)
        row.update(summary)
        row["error"] = ""
    except SpreadfrontError as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def sweep(cfg: ExperimentConfig) -> list[dict]:
    """Cartesian product over the swept axes (lexicographic row order)."""
    if not cfg.sweep_axes:
        raise ConfigError("sweep mode requires a [sweep] section with ranges")
    # the swept quantity decides the underlying mode: c -> semiwave,
    # anything with g0 -> simulate, otherwise speed-for-gamma
    axes = [a for a, _ in cfg.sweep_axes]
    if "c" in axes:
        inner_mode = "semiwave"
    elif "g0" in axes:
        inner_mode = "simulate"
    else:
        inner_mode = "speed-for-gamma"
    cells = []
    if len(cfg.sweep_axes) == 1:
        a1, vals1 = cfg.sweep_axes[0]
        for v1 in vals1:
            cells.append(((a1, v1),))
    else:
        (a1, vals1), (a2, vals2) = cfg.sweep_axes
        for v1 in vals1:
            for v2 in vals2:
                cells.append(((a1, v1), (a2, v2)))
    base = dataclasses.replace(cfg, mode=inner_mode)
    work = [(base, cell) for cell in cells]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            rows = list(ex.map(_sweep_cell, work))
    else:
        rows = [_sweep_cell(w) for w in work]
    return rows


def run(cfg: ExperimentConfig) -> int:
    """Dispatch a config; writes results.json (+CSVs); returns exit code."""
    try:
        if cfg.mode == "sweep":
            rows = sweep(cfg)
            out_dir = Path(cfg.out_dir)
            out_dir.mkdir(parents=True, exist_ok=True)
            keys: list[str] = []
            for row in rows:
                for key in row:
                    if key not in keys:
                        keys.append(key)
            with open(out_dir / "results_table.csv", "w") as fh:
                fh.write(",".join(keys) + "\n")
                for row in rows:
                    fh.write(",".join(_fmt(row.get(k, "")) for k in keys) + "\n")
            with open(out_dir / "results.json", "w") as fh:
                json.dump({"config": cfg.resolved(), "rows": rows}, fh,
                          indent=2, sort_keys=True, default=str)
                fh.write("\n")
        else:
            summary = _cell_summary(cfg)
            _write_outputs(cfg, summary)
    except UndecidedAtHorizon as exc:
        print(f"error (UndecidedAtHorizon): {exc}", file=sys.stderr)
        return 3
    except NonConvergence as exc:
        print(f"error (NonConvergence): {exc}", file=sys.stderr)
        return 2
    return 0


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(
        prog="spreadfront",
        description="Semi-wave speeds and free-boundary simulation "
                    "for two-species weak competition",
    )
    ap.add_argument("--config", required=True, help="key = value config file")
    ap.add_argument("--mode", default=None, choices=MODES,
                    help="override the mode in the config file")
    ap.add_argument("--jobs", type=int, default=1,
                    help="concurrent sweep cells (default 1)")
    ap.add_argument("--out", default=None, help="output directory override")
    ns = ap.parse_args(argv)
    try:
        cfg = load_config(ns.config, mode_override=ns.mode,
                          out_override=ns.out, jobs=ns.jobs)
    except ConfigError as exc:
        print(f"error (ConfigError): {exc}", file=sys.stderr)
        return 1
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
