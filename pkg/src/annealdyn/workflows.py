"""Run, sweep, oracle and fit workflows behind the command line.

Every function takes a validated :class:`RunConfig`, writes its outputs into
``config.output_dir`` and returns a small dict describing what it did.
"""
from __future__ import annotations

import logging
import math
import time
from pathlib import Path

import numpy as np

from .analysis import fit_power_law
from .config import RunConfig, SweepPoint, required_bytes
from .errors import ConfigError, MemoryCapError, NumericalBlowUp
from .io import read_csv, write_csv, write_json
from .keldysh import keldysh_solve
from .langevin import langevin_solve
from .oracle import finite_n_spec, oracle_run
from .schedule import ScheduleKind, TimeGrid

log = logging.getLogger(__name__)

# pointwise allowance for the oracle comparison: max(ABS, SIGMAS * stderr)
ORACLE_ABS_TOL = 0.02
ORACLE_SIGMAS = 3.0


def solve(cfg: RunConfig, tau: float, dt: float, s0: float | None = None):
    """One solve of the configured model and protocol at runtime ``tau``."""
    sched = cfg.schedule(tau, s0)
    grid = TimeGrid.for_tau(tau, dt)
    fn = keldysh_solve if cfg.solver == "keldysh" else langevin_solve
    return fn(cfg.model, sched, grid, cfg.memory_cap_bytes)


def _out(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _tag(tau, s0=None) -> str:
    tag = f"tau{tau:g}"
    return tag if s0 is None else f"{tag}_s0{s0:g}"


def dump_kernels(path, C, R) -> Path:
    """Packed lower triangles of ``C`` and ``R`` (row-major, ``k >= j``)."""
    np.savez_compressed(path, C=C.triangle(), R=R.triangle(), n=C.n)
    return Path(path)


def cmd_run(cfg: RunConfig) -> dict:
    out = _out(cfg)
    s0 = cfg.s0_values[0] if len(cfg.s0_values) == 1 else None
    t0 = time.perf_counter()
    C, R, trace = solve(cfg, cfg.tau, cfg.dt, s0)
    runtime = time.perf_counter() - t0
    write_csv(out / "trace.csv", trace.columns(), cfg.config_hash)
    summary = {
        "epsilon_final": trace.energy_final,
        "runtime_seconds": runtime,
        "dt": cfg.dt,
        "tau": cfg.tau,
        "solver": cfg.solver,
    }
    # keldysh leaves z(tau) undefined for the anneal; omit rather than write null
    if trace.z_final is not None:
        summary["z_final"] = trace.z_final
    write_json(out / "summary.json", summary, cfg.config_hash)
    if cfg.dump_kernels:
        dump_kernels(out / "kernels.npz", C, R)
    log.info("run: tau=%g dt=%g epsilon=%.10g (%.1fs)", cfg.tau, cfg.dt, trace.energy_final, runtime)
    return summary


def sweep_points(cfg: RunConfig) -> tuple[SweepPoint, ...]:
    if cfg.sweep is None:
        raise ConfigError("sweep: missing (a sweep needs a list of at least 4 taus)")
    if len(cfg.sweep) < 4:
        raise ConfigError(f"sweep: need at least 4 taus for a power-law fit, got {len(cfg.sweep)}")
    return cfg.sweep


def fit_groups(tau, eps, s0, cfg_fit: dict):
    """Power-law fit per ``s0`` group (a single group when ``s0`` is all nan)."""
    fits = []
    keys = [math.nan] if np.all(np.isnan(s0)) else sorted(set(s0[~np.isnan(s0)].tolist()))
    for key in keys:
        mask = np.isnan(s0) if math.isnan(key) else s0 == key
        order = np.argsort(tau[mask])
        pts = np.column_stack([tau[mask][order], eps[mask][order]])
        fit = fit_power_law(pts, int(cfg_fit.get("min_points", 4)),
                            cfg_fit.get("tau_min"), cfg_fit.get("tau_max"))
        fits.append((None if math.isnan(key) else key, fit))
    return fits


def fit_report(fits, threshold: float) -> dict:
    """Fit JSON: the best fit at top level, every ``s0`` fit under ``scan``."""
    best_s0, best = min(fits, key=lambda kv: kv[1].epsilon_inf)
    doc = best.to_json()
    doc["threshold_energy"] = threshold
    doc["epsilon_inf_minus_threshold"] = best.epsilon_inf - threshold
    if best_s0 is not None:
        doc["s0"] = best_s0
        doc["scan"] = [dict(fit.to_json(), s0=s0) for s0, fit in fits]
    return doc


def comparison_line(doc: dict) -> str:
    side = "below" if doc["epsilon_inf_minus_threshold"] < 0 else "above"
    extra = f" (best s0={doc['s0']:g})" if "s0" in doc else ""
    return (f"epsilon_inf={doc['epsilon_inf']:.6f} alpha={doc['alpha']:.4f}{extra}; "
            f"threshold={doc['threshold_energy']:.6f}; {side} threshold by "
            f"{abs(doc['epsilon_inf_minus_threshold']):.6f}")


def cmd_sweep(cfg: RunConfig) -> dict:
    points = sweep_points(cfg)
    need = required_bytes(points)
    if need > cfg.memory_cap_bytes:
        raise MemoryCapError(need, cfg.memory_cap_bytes)
    out = _out(cfg)
    s0_list = list(cfg.s0_values) if cfg.schedule_kind is ScheduleKind.TWO_STAGE else [None]
    rows = []
    # largest runtime first: the most expensive and most fragile run fails fast
    for p in sorted(points, key=lambda p: -p.tau):
        for s0 in s0_list:
            t0 = time.perf_counter()
            try:
                _, _, trace = solve(cfg, p.tau, p.dt, s0)
            except NumericalBlowUp as exc:
                raise NumericalBlowUp(exc.t, exc.dt, f"{exc.solver} at tau={p.tau:g}") from exc
            write_csv(out / f"trace_{_tag(p.tau, s0)}.csv", trace.columns(), cfg.config_hash)
            log.info("sweep: tau=%g dt=%g s0=%s epsilon=%.10g (%.1fs)", p.tau, p.dt, s0,
                     trace.energy_final, time.perf_counter() - t0)
            rows.append((math.nan if s0 is None else s0, p.tau, p.dt, trace.energy_final))
    rows.sort()
    s0_col = np.array([r[0] for r in rows])
    cols = {"tau": [r[1] for r in rows], "dt": [r[2] for r in rows],
            "epsilon": [r[3] for r in rows]}
    if s0_list != [None]:
        cols["s0"] = s0_col
    write_csv(out / "energies.csv", cols, cfg.config_hash)
    fits = fit_groups(np.array(cols["tau"]), np.array(cols["epsilon"]), s0_col, cfg.fit)
    doc = fit_report(fits, cfg.model.threshold_energy())
    write_json(out / "fit.json", doc, cfg.config_hash)
    return doc


def cmd_fit(csv_path, out_path=None, min_points=4, tau_min=None, tau_max=None) -> dict:
    """Fit an existing energies CSV (columns ``tau, epsilon`` and optionally ``s0``)."""
    try:
        data = read_csv(csv_path)
    except FileNotFoundError:
        raise ConfigError(f"{csv_path}: no such file") from None
    if "tau" not in data or "epsilon" not in data:
        raise ConfigError(f"{csv_path}: needs 'tau' and 'epsilon' columns")
    tau, eps = data["tau"], data["epsilon"]
    s0 = data.get("s0", np.full(tau.size, np.nan))
    fits = fit_groups(tau, eps, s0, {"min_points": min_points, "tau_min": tau_min,
                                     "tau_max": tau_max})
    doc = {k: v for k, v in fit_report(fits, math.nan).items()
           if not k.startswith(("threshold", "epsilon_inf_minus"))}
    # never clobber the fit.json a sweep wrote next to the CSV
    out_path = Path(csv_path).with_name("refit.json") if out_path is None else Path(out_path)
    write_json(out_path, doc)
    return doc


def cmd_oracle(cfg: RunConfig) -> dict:
    """Finite-N Monte Carlo against the mean-field solver on shared grid times."""
    if cfg.oracle is None:
        raise ConfigError("oracle: missing oracle parameters")
    o = cfg.oracle
    if cfg.solver != "langevin":
        raise ConfigError("oracle: the finite-N check compares against the langevin solver")
    ratio = cfg.dt / o.dt
    stride = round(ratio)
    if stride < 1 or abs(ratio - stride) > 1e-9 * ratio:
        raise ConfigError(f"grid.dt={cfg.dt} must be an integer multiple of oracle.dt={o.dt}")
    sched = cfg.schedule()
    res = oracle_run(cfg.model, sched, int(o.n_spins), o.dt, o.t_max, int(o.n_samples),
                     int(o.base_seed))
    C, _, trace = langevin_solve(cfg.model, sched, TimeGrid.for_tau(o.t_max, cfg.dt),
                                 cfg.memory_cap_bytes)
    out = _out(cfg)
    write_csv(out / "oracle.csv", res.columns(), cfg.config_hash)
    write_csv(out / "solver.csv", trace.columns(), cfg.config_hash)
    report = compare_oracle(res, trace, C.data[:, 0].copy(), stride)
    # same comparison against the mean-field model with the sample's ordered-tuple variance
    spec_n = finite_n_spec(cfg.model, int(o.n_spins))
    Cn, _, trace_n = langevin_solve(spec_n, sched, TimeGrid.for_tau(o.t_max, cfg.dt),
                                    cfg.memory_cap_bytes)
    corrected = compare_oracle(res, trace_n, Cn.data[:, 0].copy(), stride)
    report["finite_n_corrected"] = {
        "coefficients": spec_n.to_pairs(),
        **{k: corrected[k] for k in ("max_abs_delta_epsilon", "t_at_max_delta_epsilon",
                                     "n_violations", "epsilon_within_allowance",
                                     "max_abs_delta_c_t0")},
    }
    write_csv(out / "solver_finite_n.csv", trace_n.columns(), cfg.config_hash)
    write_json(out / "comparison.json", report, cfg.config_hash)
    return report


def compare_oracle(res, trace, c_t0, stride: int) -> dict:
    """Deviation statistics on the solver's grid times; ``c_t0`` is the solver ``C(t, 0)``."""
    eps_o = res.epsilon_mean[::stride]
    se_o = res.epsilon_stderr[::stride]
    c_o = res.c_t0_mean[::stride]
    c_se = res.c_t0_stderr[::stride]
    n = min(eps_o.size, trace.energy.size)
    t = trace.times[:n]
    d_eps = np.abs(eps_o[:n] - trace.energy[:n])
    allow = np.maximum(ORACLE_ABS_TOL, ORACLE_SIGMAS * se_o[:n])
    k = int(np.argmax(d_eps))
    report = {
        "n_samples": res.n_samples,
        "max_abs_delta_epsilon": float(d_eps[k]),
        "t_at_max_delta_epsilon": float(t[k]),
        "allowance_at_max": float(allow[k]),
        "max_excess_over_allowance": float(np.max(d_eps - allow)),
        "n_points": int(n),
        "n_violations": int(np.sum(d_eps > allow)),
        "epsilon_within_allowance": bool(np.all(d_eps <= allow)),
        "max_abs_delta_c_t0": float(np.max(np.abs(c_o[:n] - c_t0[:n]))),
    }
    # the free case also has a closed form to check against
    if np.all(trace.s[:n] == 0.0):
        exact = np.exp(-t)
        d_c = np.abs(c_o[:n] - exact)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(c_se[:n] > 0, d_c / c_se[:n], np.where(d_c > 0, np.inf, 0.0))
        report["max_abs_delta_c_exact"] = float(d_c.max())
        report["max_sigma_c_exact"] = float(z.max())
        report["c_within_3_stderr"] = bool(z.max() <= 3.0)
    return report
