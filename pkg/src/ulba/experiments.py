"""Monte-Carlo studies on the analytical model and on the erosion simulator.

Every instance draws from its own child generator keyed by (seed, instance
id), so serial and pooled runs give identical, id-ordered results.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .erosion import SimConfig, run_simulation
from .model import AppInstance, sigma_plus_schedule, t_total
from .optimizer import AnnealParams, anneal, relative_gain
from .sampling import SamplingSpec, child_rng, sample_instance

DEFAULT_FRACTIONS = (0.01, 0.05, 0.10, 0.20)
ALPHA_GRID_SIZE = 100


@dataclass(frozen=True)
class GainRecord:
    instance_id: int
    baseline_time: float
    test_time: float
    gain_pct: float
    alpha: float | None = None
    fraction: float | None = None


def _map(fn: Callable, items: Sequence, jobs: int) -> list:
    if jobs <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def summarize(gains: Iterable[float]) -> dict:
    g = np.asarray(list(gains), dtype=float)
    q1, median, q3 = np.percentile(g, [25, 50, 75])
    return {"count": int(g.size), "min": float(g.min()), "q1": float(q1), "median": float(median),
            "q3": float(q3), "max": float(g.max()), "mean": float(g.mean())}


# --- upper bound versus simulated annealing -------------------------------------

def _bound_vs_anneal_one(args) -> GainRecord:
    spec, params, k = args
    inst = sample_instance(spec, child_rng(spec.seed, k))
    bound_time = t_total(inst, "ulba", sigma_plus_schedule(inst))
    _, annealed_time = anneal(inst, "ulba", replace(params, seed=params.seed + k))
    # negative when the upper-bound schedule is slower than the annealed one
    return GainRecord(k, annealed_time, bound_time, relative_gain(annealed_time, bound_time), inst.alpha)


def exp_bound_vs_anneal(spec: SamplingSpec, params: AnnealParams = AnnealParams(),
                        jobs: int = 1, bins: int = 20) -> tuple[list[GainRecord], dict]:
    """Compare the upper-bound schedule with annealed schedules on sampled instances.

    ``gain_pct`` is the upper-bound schedule's gain over the annealed one, so
    a negative value means annealing found a faster schedule; the summary also
    reports the opposite sign.
    """
    records = _map(_bound_vs_anneal_one, [(spec, params, k) for k in range(spec.count)], jobs)
    gains = [r.gain_pct for r in records]
    summary = summarize(gains)
    reversed_gains = [relative_gain(r.test_time, r.baseline_time) for r in records]
    summary["anneal_over_bound"] = summarize(reversed_gains)
    counts, edges = np.histogram(gains, bins=bins)
    summary["histogram"] = {"counts": counts.tolist(), "edges": edges.tolist()}
    return records, summary


# --- ULBA versus the standard method over the overloading fraction -------------

def best_alpha(inst: AppInstance, alpha_grid: Sequence[float]) -> tuple[float, float]:
    """Lowest ULBA total time over ``alpha_grid``, each run on its own upper-bound schedule."""
    best_time, best = np.inf, 0.0
    for alpha in alpha_grid:
        candidate = replace(inst, alpha=float(alpha))
        time = t_total(candidate, "ulba", sigma_plus_schedule(candidate))
        if time < best_time:
            best_time, best = time, float(alpha)
    return best_time, best


def _gain_vs_overload_one(args) -> GainRecord:
    spec, fraction, cell, k, alpha_grid = args
    # instances of a cell share nothing with other cells
    inst = sample_instance(spec, child_rng(spec.seed, cell * spec.count + k), fraction=fraction, alpha=0.0)
    standard = t_total(inst, "standard", sigma_plus_schedule(inst))
    ulba_time, alpha = best_alpha(inst, alpha_grid)
    return GainRecord(k, standard, ulba_time, relative_gain(standard, ulba_time), alpha, fraction)


def exp_gain_vs_overload(spec: SamplingSpec, fractions: Sequence[float] = DEFAULT_FRACTIONS,
                         alpha_grid_size: int = ALPHA_GRID_SIZE,
                         jobs: int = 1) -> tuple[list[GainRecord], dict]:
    """ULBA (best alpha of a uniform grid on [0, 1]) against the standard method.

    ``spec.count`` instances per fraction; ``P`` is still drawn from ``spec``.
    """
    for f in fractions:
        if not 0 < f < 0.5:
            raise ValueError(f"overloading fractions must lie in (0, 0.5) (got {f})")
    alpha_grid = np.linspace(0.0, 1.0, alpha_grid_size)
    tasks = [(spec, f, c, k, alpha_grid) for c, f in enumerate(fractions) for k in range(spec.count)]
    records = _map(_gain_vs_overload_one, tasks, jobs)
    per_fraction = {}
    for f in fractions:
        cell = [r for r in records if r.fraction == f]
        per_fraction[f] = summarize(r.gain_pct for r in cell)
        per_fraction[f]["mean_best_alpha"] = float(np.mean([r.alpha for r in cell]))
    return records, per_fraction


# --- erosion simulator ------------------------------------------------------------

def _sim_one(args) -> dict:
    config, policy, alpha, seed = args
    return run_simulation(config, policy, alpha, seed).summary()


def exp_alpha_sweep(config: SimConfig, alpha_grid: Sequence[float], seeds: Sequence[int],
                    jobs: int = 1) -> list[dict]:
    """Median total modelled time per alpha over ``seeds``."""
    for a in alpha_grid:
        if not 0 <= a <= 1:
            raise ValueError(f"alpha values must lie in [0, 1] (got {a})")
    tasks = [(config, "ulba", float(a), int(s)) for a in alpha_grid for s in seeds]
    runs = _map(_sim_one, tasks, jobs)
    rows = []
    for a in alpha_grid:
        mine = [r for r in runs if r["alpha"] == float(a)]
        rows.append({
            "alpha": float(a),
            "median_total_time_s": float(np.median([r["total_time_s"] for r in mine])),
            "median_lb_calls": float(np.median([r["lb_calls"] for r in mine])),
            "median_pe_usage_pct": float(np.median([r["mean_pe_usage_pct"] for r in mine])),
        })
    return rows


def exp_sim_compare(configs: Sequence[SimConfig], seeds: Sequence[int], alpha: float = 0.4,
                    jobs: int = 1) -> list[dict]:
    """Standard against ULBA per configuration: median time, LB calls and PE usage."""
    tasks = [(cfg, pol, alpha, int(s)) for cfg in configs for pol in ("standard", "ulba") for s in seeds]
    runs = _map(_sim_one, tasks, jobs)
    rows, n = [], len(seeds)
    for c, cfg in enumerate(configs):
        std = runs[2 * c * n: (2 * c + 1) * n]
        ulba = runs[(2 * c + 1) * n: (2 * c + 2) * n]
        row = {"P": cfg.P, "strong_count": cfg.strong_count}
        for name, group in (("standard", std), ("ulba", ulba)):
            row[f"{name}_median_time_s"] = float(np.median([r["total_time_s"] for r in group]))
            row[f"{name}_median_lb_calls"] = float(np.median([r["lb_calls"] for r in group]))
            row[f"{name}_median_pe_usage_pct"] = float(np.median([r["mean_pe_usage_pct"] for r in group]))
        row["gain_pct"] = relative_gain(row["standard_median_time_s"], row["ulba_median_time_s"])
        rows.append(row)
    return rows
