"""Command-line front end.

Exit codes: 0 success, 2 configuration or I/O error, 3 model-domain error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import experiments as exps
from . import model
from .config import ConfigError, RunConfig, apply_override, load_config
from .erosion import run_simulation
from .model import ModelError, NoImbalanceError
from .optimizer import ScheduleState, anneal, energy, relative_gain
from .reporting import write_csv, write_dicts, write_manifest, write_records, write_sim_result

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN = 0, 2, 3


def _emit(args, summary: dict, line: str) -> None:
    if args.json:
        print(json.dumps(summary, sort_keys=True))
    else:
        print(line)


def _outputs(args, cfg: RunConfig, name: str) -> tuple[Path, Path]:
    stem = f"{name}_{cfg.seed()}"
    return Path(args.out) / f"{stem}.csv", Path(args.out) / f"{stem}.json"


def _manifest(args, cfg: RunConfig, command: str, **extra) -> dict:
    return {"command": command, "config": cfg.resolved(), "config_file": cfg.source, **extra}


def _seeds(cfg: RunConfig, default_count: int) -> list[int]:
    base = cfg.seed()
    return [base + k for k in range(cfg.get("run", "n_seeds", default_count))]


def cmd_bounds(args, cfg: RunConfig) -> None:
    inst = cfg.instance()
    s_minus = model.sigma_minus(inst, 0)
    s_plus = model.sigma_plus(inst, 0)
    tau = s_plus - s_minus
    summary = {
        "sigma_minus": s_minus,
        "sigma_plus": s_plus,
        "tau_root": model.upper_bound_root(inst, 0),
        "tau_menon": model.menon_interval(inst),
        "tau": tau,
        "cost_imbalance_s": model.cost_imbalance(inst, tau),
        "cost_overhead_s": model.cost_overhead(inst, 0, tau),
        "lb_cost_s": inst.c_seconds,
    }
    _emit(args, summary, " ".join(f"{k}={v}" for k, v in summary.items()))


def cmd_schedule(args, cfg: RunConfig) -> None:
    inst = cfg.instance()
    free = cfg.get("run", "free_initial_balance", False)
    sched = model.sigma_plus_schedule(inst)
    rows = []
    for k, (p, n) in enumerate(sched.intervals()):
        charge = not (free and k == 0)
        rows.append((k, p, n, model.interval_time(inst, "ulba", p, n, charge),
                     model.interval_time(inst, "standard", p, n, charge)))
    csv_path, json_path = _outputs(args, cfg, "schedule")
    write_csv(csv_path, ("interval", "lb_p", "lb_n", "ulba_time_s", "standard_time_s"), rows)
    summary = {
        "calls": list(sched),
        "ulba_total_s": model.t_total(inst, "ulba", sched, free),
        "standard_total_s": model.t_total(inst, "standard", sched, free),
    }
    write_manifest(json_path, _manifest(args, cfg, "schedule", summary=summary))
    _emit(args, summary, f"lb_calls={len(sched)} ulba_total_s={summary['ulba_total_s']!r} "
                         f"standard_total_s={summary['standard_total_s']!r}")


def cmd_anneal(args, cfg: RunConfig) -> None:
    inst = cfg.instance()
    policy = cfg.get("run", "policy", "ulba")
    bound = ScheduleState.from_calls(model.sigma_plus_schedule(inst), inst.gamma)
    bound_energy = energy(inst, policy, bound)
    best, best_energy = anneal(inst, policy, cfg.anneal(), initial=bound)
    csv_path, json_path = _outputs(args, cfg, "anneal")
    write_csv(csv_path, ("iteration", "bound_call", "annealed_call"),
              ((i, int(b), int(a)) for i, (b, a) in enumerate(zip(bound.decisions, best.decisions))))
    summary = {
        "policy": policy,
        "bound_energy_s": bound_energy,
        "annealed_energy_s": best_energy,
        "gain_pct": relative_gain(best_energy, bound_energy),
        "annealed_calls": list(best.calls),
    }
    write_manifest(json_path, _manifest(args, cfg, "anneal", summary=summary))
    _emit(args, summary, f"bound_s={bound_energy!r} annealed_s={best_energy!r} "
                         f"gain_pct={summary['gain_pct']:.4f}")


def cmd_mc_anneal(args, cfg: RunConfig) -> None:
    records, summary = exps.exp_bound_vs_anneal(cfg.sampling(), cfg.anneal(), jobs=args.jobs,
                                                bins=cfg.get("run", "bins", 20))
    csv_path, json_path = _outputs(args, cfg, "mc-anneal")
    write_records(csv_path, records)
    write_manifest(json_path, _manifest(args, cfg, "mc-anneal", summary=summary))
    _emit(args, summary, f"instances={summary['count']} min_gain={summary['min']:.3f}% "
                         f"mean_gain={summary['mean']:.3f}% max_gain={summary['max']:.3f}%")


def cmd_mc_gain(args, cfg: RunConfig) -> None:
    fractions = cfg.get("run", "fractions", exps.DEFAULT_FRACTIONS)
    records, per_fraction = exps.exp_gain_vs_overload(
        cfg.sampling(), fractions, cfg.get("run", "alpha_grid_size", exps.ALPHA_GRID_SIZE), jobs=args.jobs)
    csv_path, json_path = _outputs(args, cfg, "mc-gain")
    write_records(csv_path, records)
    summary = {str(f): s for f, s in per_fraction.items()}
    write_manifest(json_path, _manifest(args, cfg, "mc-gain", summary=summary))
    _emit(args, summary, " ".join(f"frac={f}:median={s['median']:.3f}%,max={s['max']:.3f}%"
                                  for f, s in summary.items()))


def cmd_sim(args, cfg: RunConfig) -> None:
    result = run_simulation(cfg.sim(), cfg.get("run", "policy", "ulba"),
                            cfg.get("run", "alpha", 0.4), cfg.seed())
    csv_path, json_path = _outputs(args, cfg, "sim")
    write_sim_result(csv_path, result)
    write_manifest(json_path, _manifest(args, cfg, "sim", result=result.manifest()))
    summary = result.summary()
    _emit(args, summary, f"total_time_s={summary['total_time_s']!r} lb_calls={summary['lb_calls']} "
                         f"mean_pe_usage_pct={summary['mean_pe_usage_pct']:.3f}")


def cmd_sim_compare(args, cfg: RunConfig) -> None:
    base = cfg.sim()
    configs = [base.__class__(**{**asdict(base), "P": P, "strong_count": s})
               for P in cfg.get("run", "p_grid", (8, 16, 32))
               for s in cfg.get("run", "strong_grid", (1, 2, 3))]
    rows = exps.exp_sim_compare(configs, _seeds(cfg, 5), cfg.get("run", "alpha", 0.4), jobs=args.jobs)
    csv_path, json_path = _outputs(args, cfg, "sim-compare")
    write_dicts(csv_path, rows)
    write_manifest(json_path, _manifest(args, cfg, "sim-compare", seeds=_seeds(cfg, 5), rows=rows))
    _emit(args, {"rows": rows}, " ".join(f"P={r['P']},strong={r['strong_count']}:gain={r['gain_pct']:.3f}%"
                                         for r in rows))


def cmd_alpha_sweep(args, cfg: RunConfig) -> None:
    grid = cfg.get("run", "alpha_grid", tuple(np.round(np.linspace(0.0, 1.0, 11), 10).tolist()))
    rows = exps.exp_alpha_sweep(cfg.sim(), grid, _seeds(cfg, 5), jobs=args.jobs)
    csv_path, json_path = _outputs(args, cfg, "alpha-sweep")
    write_dicts(csv_path, rows)
    write_manifest(json_path, _manifest(args, cfg, "alpha-sweep", seeds=_seeds(cfg, 5), rows=rows))
    best = min(rows, key=lambda r: r["median_total_time_s"])
    _emit(args, {"rows": rows}, f"best_alpha={best['alpha']} median_total_time_s={best['median_total_time_s']!r}")


COMMANDS = {
    "bounds": (cmd_bounds, "lower/upper LB bounds and cost terms of one instance"),
    "schedule": (cmd_schedule, "upper-bound LB schedule and its modelled time"),
    "anneal": (cmd_anneal, "simulated-annealing LB schedule of one instance"),
    "mc-anneal": (cmd_mc_anneal, "upper bound against annealing on sampled instances"),
    "mc-gain": (cmd_mc_gain, "ULBA gain over the standard method per overloading fraction"),
    "sim": (cmd_sim, "one erosion simulation"),
    "sim-compare": (cmd_sim_compare, "standard against ULBA over P and strong-rock grids"),
    "alpha-sweep": (cmd_alpha_sweep, "erosion simulation time per alpha"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value configuration file")
    common.add_argument("--seed", type=int, help="master seed (default: $LBA_SEED, then 0)")
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("--json", action="store_true", help="print the summary as JSON")
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override one configuration value (repeatable)")
    parser = argparse.ArgumentParser(prog="ulba", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        for assignment in args.set:
            apply_override(cfg, assignment)
        if args.seed is not None:
            cfg.values["run"]["seed"] = args.seed
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        COMMANDS[args.command][0](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NoImbalanceError as exc:
        print(f"no-imbalance: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (ModelError, ValueError) as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except TypeError as exc:  # e.g. a config value of the wrong kind reaching a constructor
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
