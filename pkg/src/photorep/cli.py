"""Command line front end.

    simulate <kind> --config <path> --out <dir> [--seed N] [--threads N]

Exit status 0 when every gate passes, 2 for configuration errors and 3 when
a convergence or validation gate fails.  Each run writes ``result.json``
(schema version, config echo, results, gates) plus per-kind CSV tables.
Nothing time dependent is written, so a rerun reproduces every byte.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .analytic import branch_probabilities, monochromatic_work, susceptibility, transition_probability
from .chain import base_probabilities, ensemble_stats, expected_success
from .config import KINDS, ExperimentConfig, expand_sweep, load_config, point_objects
from .dynamics import (
    TimeGrid,
    accumulate_probability,
    branch_detuning,
    conservation_residual,
    da_residual,
    evolve_branch,
    work_breakdown,
)
from .exceptions import ConfigError, ConvergenceError, GridError, IntegrationError
from .modes import build_mode_grid, compare_with_reduced, integrate_full, ww_discrepancy
from .pulses import ExponentialPulse, VacuumPulse

SCHEMA_VERSION = "1.0"
EXIT_OK, EXIT_CONFIG, EXIT_GATE = 0, 2, 3
MAX_CSV_ROWS = 4000


def _num(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    return f"{float(x):.16e}"


def write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema_version={SCHEMA_VERSION}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([v if isinstance(v, str) else _num(v) for v in row])


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


class Gates:
    """Residuals compared with thresholds; any failure makes the run exit with status 3."""

    def __init__(self):
        self.items = {}

    def add(self, name, value, threshold, mode="max"):
        ok = bool(value < threshold) if mode == "max" else bool(value >= threshold)
        self.items[name] = {"value": value, "threshold": threshold, "passed": ok}

    def flag(self, name, ok, detail=None):
        self.items[name] = {"passed": bool(ok), **({"detail": detail} if detail else {})}

    @property
    def passed(self):
        return all(g["passed"] for g in self.items.values())


def _record_step(n_nodes, requested):
    return requested or max(1, math.ceil(n_nodes / MAX_CSV_ROWS))


def _branch_keys(branch):
    return ("p_rep", "p_fail") if branch == "A" else ("p_mut", "p_dorm")


def run_dynamics_branch(cfg: ExperimentConfig, params, pulse, branch, gates: Gates, out=None, prefix=""):
    grid = TimeGrid(t_max=cfg.grid.t_max, dt=cfg.grid.dt)
    series = evolve_branch(params, pulse, branch, grid)
    curve = accumulate_probability(series)
    residual = conservation_residual(series, pulse, params)
    yes, no = _branch_keys(branch)
    res = {
        yes: curve.p_inf,
        no: 1.0 - curve.p_inf if not isinstance(pulse, VacuumPulse) else 0.0,
        "p_final": curve.p_final,
        "tail": curve.tail,
        "detuning": branch_detuning(params, branch),
        "dt": series.dt,
        "t_max": series.t_max,
        "conservation_max": float(np.max(residual)),
    }
    gates.add(f"{prefix}conservation_{branch}", res["conservation_max"], cfg.gates.conservation)
    if isinstance(pulse, ExponentialPulse):
        res["p_closed_form"] = transition_probability(pulse.linewidth, res["detuning"], params.gamma)
    if not isinstance(pulse, VacuumPulse):
        check = da_residual(params, pulse, branch=branch, series=series)
        work = work_breakdown(series, pulse, params)
        res.update(
            da_residual=check.residual,
            w_abs=work.w_abs,
            w_reac=work.w_reac,
            w_in=work.w_in,
            w_in_direct=work.w_in_direct,
            work_identity_residual=work.identity_residual,
        )
        gates.add(f"{prefix}da_residual_{branch}", check.residual, cfg.gates.da_residual)
        gates.add(f"{prefix}work_identity_{branch}", work.identity_residual, cfg.gates.work_identity)
    if out is not None:
        step = _record_step(series.t.size, cfg.grid.record_every)
        idx = np.arange(0, series.t.size, step)
        rows = zip(
            series.t[idx],
            series.amp.real[idx],
            series.amp.imag[idx],
            np.abs(series.amp[idx]) ** 2,
            curve.p[idx],
            residual[idx],
        )
        write_csv(os.path.join(out, f"dynamics_{branch}.csv"), ["t", "re_x", "im_x", "excited", "p_emitted", "conservation_residual"], rows)
    return res


def run_analytic(cfg, out, gates):
    params, pulse = cfg.model_params(), cfg.pulse_spec()
    delta = pulse.linewidth
    probs = branch_probabilities(params, delta)
    chi = susceptibility(branch_detuning(params, "A"), params.gamma)
    res = {
        "delta_pulse": delta,
        "detuning_LbJ": branch_detuning(params, "A"),
        "detuning_Lb": branch_detuning(params, "B"),
        **probs.as_dict(),
        "chi_re": chi.chi_re,
        "chi_im": chi.chi_im,
    }
    if delta <= params.gamma / 10:
        res["monochromatic_work"] = monochromatic_work(params, delta).as_dict()
    for name in ("p_rep", "p_mut"):
        gates.flag(f"{name}_in_unit_interval", 0.0 <= res[name] <= 1.0)
    write_csv(
        os.path.join(out, "analytic.csv"),
        ["branch", "delta_pulse", "detuning", "P"],
        [["A", delta, res["detuning_LbJ"], probs.p_rep], ["B", delta, res["detuning_Lb"], probs.p_mut]],
    )
    return res


def run_dynamics(cfg, out, gates):
    params, pulse = cfg.model_params(), cfg.pulse_spec()
    return {b: run_dynamics_branch(cfg, params, pulse, b, gates, out) for b in cfg.branches}


def run_oracle(cfg, out, gates):
    params, pulse = cfg.model_params(), cfg.pulse_spec()
    oc = cfg.oracle
    res = {}
    for branch in cfg.branches:
        grid = build_mode_grid(params.gamma, params.omega_L, oc.halfwidth, oc.n_modes, pulse)
        traj = integrate_full(grid, params, pulse, branch, dt=oc.dt, t_max=oc.t_max, record_every=oc.record_every)
        cmp = compare_with_reduced(traj, params, pulse, branch)
        yes, no = _branch_keys(branch)
        rel = abs(cmp.p_oracle - cmp.p_reduced) / cmp.p_reduced if cmp.p_reduced > 0 else abs(cmp.p_oracle)
        r = {
            "n_modes": grid.n_modes,
            "halfwidth": grid.halfwidth,
            "rho": grid.rho,
            "g": grid.g,
            "recurrence_time": grid.recurrence_time,
            "dt": traj.dt,
            "t_max": float(traj.t[-1]),
            "captured_norm": traj.captured_norm,
            "norm_drift": traj.norm_drift,
            yes: cmp.p_oracle,
            no: float(traj.p_b[-1]),
            "p_reduced": cmp.p_reduced,
            "p_relative_deviation": rel,
            "max_amp_deviation": cmp.max_amp_deviation,
            "peak_relative_deviation": cmp.peak_relative_deviation,
        }
        if isinstance(pulse, ExponentialPulse):
            r["p_closed_form"] = transition_probability(pulse.linewidth, branch_detuning(params, branch), params.gamma)
        gates.add(f"oracle_norm_{branch}", traj.norm_drift, cfg.gates.oracle_norm)
        gates.add(f"oracle_p_relative_{branch}", rel, cfg.gates.oracle_p_relative)
        write_csv(
            os.path.join(out, f"oracle_{branch}.csv"),
            ["t", "re_x", "im_x", "p_a_modes", "p_b_modes", "excited", "norm"],
            traj.rows(),
        )
        if oc.resolutions:
            table = ww_discrepancy(params, pulse, oc.resolutions, branch, dt=oc.dt, t_max=oc.t_max)
            r["discrepancy"] = table.to_dict()
            gates.flag(f"oracle_convergent_{branch}", table.convergent)
        res[branch] = r
    return res


def run_chain(cfg, out, gates, threads):
    params = cfg.model_params()
    ch = cfg.chain
    gene, profile, disorder = ch.gene_string(), ch.profile(), cfg.disorder()
    log = os.path.join(out, "chain_trials.csv") if ch.trial_log else None
    stats = ensemble_stats(
        gene, profile, disorder, params, ch.trials, cfg.master_seed, threads=threads,
        accounting=ch.accounting,
        trial_log=log,
        log_header=f"schema_version={SCHEMA_VERSION}",
    )
    res = stats.to_dict()
    res["gene"] = str(gene)
    if disorder.family == "fixed":
        success = expected_success(gene, profile, params, disorder.delta)
        res["expected_fidelity"] = float(success.mean())
        res["expected_exact_copy"] = float(np.prod(success))
        res["base_probabilities"] = [
            base_probabilities(b, r, disorder.delta, params, profile.J0, profile.r0) for b, r in zip(str(gene), profile.distances)
        ]
    gates.flag("histogram_mass", sum(stats.mutation_histogram) == stats.trials)
    gates.flag("fidelity_range", 0.0 <= stats.fidelity_mean <= 1.0)
    return res


def _sweep_point(cfg, point):
    params, pulse = point_objects(cfg, point)
    if cfg.sweep.base == "analytic":
        probs = branch_probabilities(params, pulse.linewidth)
        return {"P": probs.p_rep, "p_mut": probs.p_mut}, None
    gates = Gates()
    res = run_dynamics_branch(cfg, params, pulse, "A", gates)
    row = {
        "p_rep": res["p_rep"],
        "P": res.get("p_closed_form"),
        "da_residual": res.get("da_residual"),
        "conservation_max": res["conservation_max"],
        "w_abs": res.get("w_abs"),
        "w_reac": res.get("w_reac"),
    }
    return row, gates


def run_sweep(cfg, out, gates, threads):
    points = expand_sweep(cfg)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda p: _sweep_point(cfg, p), points))
    else:
        results = [_sweep_point(cfg, p) for p in points]
    axes = list(cfg.sweep.axes)
    cols = list(results[0][0])
    rows = [[i, *p.values(), *r.values()] for i, (p, (r, _)) in enumerate(zip(points, results))]
    write_csv(os.path.join(out, "sweep.csv"), ["index", *axes, *cols], rows)
    if cfg.sweep.base == "dynamics":
        worst = {}
        for _, g in results:
            for name, item in g.items.items():
                if name not in worst or item["value"] > worst[name]["value"]:
                    worst[name] = item
        for name, item in worst.items():
            gates.add(f"max_{name}", item["value"], item["threshold"])
    else:
        gates.flag("P_in_unit_interval", all(0.0 <= r["P"] <= 1.0 for r, _ in results))
    return {"n_points": len(points), "axes": axes, "columns": cols}


def run_experiment(cfg: ExperimentConfig, out_dir) -> int:
    """Run one configured experiment, write its artifacts and return the exit status."""
    os.makedirs(out_dir, exist_ok=True)
    gates = Gates()
    status = EXIT_OK
    error = None
    try:
        if cfg.kind == "analytic":
            results = run_analytic(cfg, out_dir, gates)
        elif cfg.kind == "dynamics":
            results = run_dynamics(cfg, out_dir, gates)
        elif cfg.kind == "oracle":
            results = run_oracle(cfg, out_dir, gates)
        elif cfg.kind == "chain":
            results = run_chain(cfg, out_dir, gates, cfg.threads)
        elif cfg.kind == "sweep":
            results = run_sweep(cfg, out_dir, gates, cfg.threads)
        else:
            raise ConfigError(f"unknown experiment kind {cfg.kind!r}")
    except (ConvergenceError, IntegrationError, GridError) as exc:
        results, error = {}, f"{type(exc).__name__}: {exc}"
        gates.flag("run_completed", False, error)
    if not gates.passed:
        status = EXIT_GATE
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": cfg.kind,
        "config": cfg.echo(),
        "results": results,
        "gates": gates.items,
        "passed": gates.passed,
        "metadata": {"package_version": __version__},
    }
    with open(os.path.join(out_dir, "result.json"), "w") as fh:
        json.dump(_clean(doc), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return status


def build_parser():
    p = argparse.ArgumentParser(prog="simulate", description="Single-photon replication simulator")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("--config", required=True, help="YAML experiment configuration")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="master seed (overrides the config)")
    p.add_argument("--threads", type=int, default=None, help="worker threads (overrides the config)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.kind)
        updates = {}
        if args.seed is not None:
            updates["master_seed"] = args.seed
        if args.threads is not None:
            if args.threads < 1:
                raise ConfigError("--threads must be >= 1")
            updates["threads"] = args.threads
        if updates:
            cfg = cfg.model_copy(update=updates)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    status = run_experiment(cfg, args.out)
    if status == EXIT_GATE:
        print(f"gate failure; see {os.path.join(args.out, 'result.json')}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
