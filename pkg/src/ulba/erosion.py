"""Emulated-parallel fluid/rock erosion mini-app with stripe load balancing.

The domain is a ``sy x (P * sx)`` grid of cells. Fluid cells cost one work
unit per iteration (four once refined); rock cells cost nothing. Rocks are
disks, one per PE stripe, eroded by neighbouring fluid with a per-disk
probability. ``P`` virtual PEs each own a contiguous range of columns and an
iteration lasts as long as the most loaded PE needs (bulk-synchronous model,
communication ignored).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Literal

import numpy as np

from . import policy as lbp

ROCK_WEIGHT = 0
FLUID_WEIGHT = 1
REFINED_WEIGHT = 4


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    """Geometry, erosion, cost and policy knobs of one simulation.

    ``omega`` is in work units per second, ``c0`` in seconds and ``c1`` in
    seconds per migrated work unit. ``lb_cost_prior`` seeds the average LB
    cost before the first rebalance.
    """

    P: int = 16
    sx: int = 128
    sy: int = 128
    radius: float = 28.0
    strong_count: int = 1
    p_weak: float = 0.02
    p_strong: float = 0.4
    iterations: int = 500
    omega: float = 1e7
    c0: float = 4e-4
    c1: float = 2e-8
    lb_cost_prior: float = 4e-4
    wir_window: int = lbp.DEFAULT_WIR_WINDOW
    z_threshold: float = lbp.DEFAULT_Z_THRESHOLD

    def __post_init__(self) -> None:
        if self.P < 2:
            raise ConfigError(f"P must be >= 2 (got {self.P})")
        if self.sx < 1 or self.sy < 1:
            raise ConfigError("sx and sy must be >= 1")
        if not self.radius > 0:
            raise ConfigError(f"radius must be > 0 (got {self.radius})")
        if not self.sx > 2 * self.radius or not self.sy > 2 * self.radius:
            raise ConfigError(f"a disk of radius {self.radius} overflows a {self.sx}x{self.sy} stripe")
        if not 0 <= self.strong_count <= self.P:
            raise ConfigError(f"strong_count must lie in [0, P] (got {self.strong_count})")
        for name in ("p_weak", "p_strong"):
            if not 0 <= getattr(self, name) <= 1:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1")
        if not self.omega > 0:
            raise ConfigError("omega must be > 0")
        if min(self.c0, self.c1, self.lb_cost_prior) < 0:
            raise ConfigError("c0, c1 and lb_cost_prior must be >= 0")
        if self.wir_window < 2:
            raise ConfigError("wir_window must be >= 2")

    @property
    def width(self) -> int:
        return self.P * self.sx


@dataclass(frozen=True)
class RockDisk:
    center_col: float
    center_row: float
    radius: float
    probability: float


@dataclass
class ErosionGrid:
    """Per-cell work weight (0 for rock) and erosion probability (0 for fluid)."""

    weight: np.ndarray
    rock_prob: np.ndarray

    @property
    def rock(self) -> np.ndarray:
        return self.weight == ROCK_WEIGHT

    @property
    def shape(self) -> tuple[int, int]:
        return self.weight.shape

    def copy(self) -> "ErosionGrid":
        return ErosionGrid(self.weight.copy(), self.rock_prob.copy())


def disk_mask(shape: tuple[int, int], disk: RockDisk) -> np.ndarray:
    """Cells whose centre lies within ``disk``."""
    rows, cols = np.ogrid[: shape[0], : shape[1]]
    d2 = (cols + 0.5 - disk.center_col) ** 2 + (rows + 0.5 - disk.center_row) ** 2
    return d2 <= disk.radius**2


def init_grid(config: SimConfig, seed: int) -> tuple[ErosionGrid, list[RockDisk]]:
    """All-fluid domain with one rock disk centred in each PE stripe.

    ``strong_count`` disks, picked at random, erode with ``p_strong``; the
    rest with ``p_weak``.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))
    strong = set(rng.choice(config.P, size=config.strong_count, replace=False).tolist())
    shape = (config.sy, config.width)
    weight = np.full(shape, FLUID_WEIGHT, dtype=np.int64)
    rock_prob = np.zeros(shape)
    disks = []
    for p in range(config.P):
        disk = RockDisk(
            center_col=(p + 0.5) * config.sx,
            center_row=config.sy / 2,
            radius=config.radius,
            probability=config.p_strong if p in strong else config.p_weak,
        )
        mask = disk_mask(shape, disk)
        weight[mask] = ROCK_WEIGHT
        rock_prob[mask] = disk.probability
        disks.append(disk)
    return ErosionGrid(weight, rock_prob), disks


def fluid_neighbor_counts(grid: ErosionGrid) -> np.ndarray:
    """Number of fluid 4-neighbours of every cell; cells outside the domain do not count."""
    fluid = (~grid.rock).astype(np.int8)
    counts = np.zeros(grid.shape, dtype=np.int8)
    counts[1:, :] += fluid[:-1, :]
    counts[:-1, :] += fluid[1:, :]
    counts[:, 1:] += fluid[:, :-1]
    counts[:, :-1] += fluid[:, 1:]
    return counts


def erosion_step(grid: ErosionGrid, rng: np.random.Generator) -> ErosionGrid:
    """Erode rock cells exposed to fluid; conversions apply simultaneously.

    Each (rock cell, fluid neighbour) pair is an independent trial with the
    rock's probability, so a cell with ``k`` fluid neighbours survives with
    probability ``(1 - p) ** k``. One uniform draw per exposed rock cell
    decides that outcome.
    """
    counts = fluid_neighbor_counts(grid)
    rows, cols = np.nonzero(grid.rock & (counts > 0))
    survive = (1.0 - grid.rock_prob[rows, cols]) ** counts[rows, cols]
    eroded = rng.random(rows.size) >= survive
    out = grid.copy()
    out.weight[rows[eroded], cols[eroded]] = REFINED_WEIGHT
    out.rock_prob[rows[eroded], cols[eroded]] = 0.0
    return out


def column_workloads(grid: ErosionGrid) -> np.ndarray:
    return grid.weight.sum(axis=0)


@dataclass(frozen=True)
class StripePartition:
    """Column cuts ``cut_0 = 0 < cut_1 < ... < cut_P = width``; PE ``p`` owns ``[cut_p, cut_p+1)``."""

    cuts: tuple[int, ...]

    def __post_init__(self) -> None:
        c = self.cuts
        if len(c) < 2 or c[0] != 0 or any(b <= a for a, b in zip(c, c[1:])):
            raise ValueError(f"invalid stripe cuts {c}")

    @property
    def P(self) -> int:
        return len(self.cuts) - 1

    @property
    def width(self) -> int:
        return self.cuts[-1]

    def owners(self) -> np.ndarray:
        """PE index of every column."""
        return np.searchsorted(np.asarray(self.cuts), np.arange(self.width), side="right") - 1


def even_partition(width: int, P: int) -> StripePartition:
    if width < P:
        raise ValueError(f"cannot split {width} columns into {P} non-empty stripes")
    return StripePartition(tuple(int(round(k * width / P)) for k in range(P + 1)))


def stripe_partition(col_workloads, targets) -> StripePartition:
    """Greedy prefix-sum cuts approaching the per-PE target workloads.

    Cut ``p + 1`` is the first column at which the prefix sum reaches the
    cumulative target of stripes ``0..p``, moved back one column when that
    lands closer to the target. Each cumulative error is then at most half a
    column, so a stripe misses its own target by at most one column weight.
    Cuts are clamped so that every stripe keeps at least one column; after a
    clamp the remaining targets are rescaled to the remaining weight, so the
    forced surplus or deficit is shared instead of landing on one neighbour.
    """
    col_workloads = np.asarray(col_workloads, dtype=float)
    targets = np.asarray(targets, dtype=float)
    width, P = col_workloads.size, targets.size
    if width < P:
        raise ValueError(f"cannot split {width} columns into {P} non-empty stripes")
    prefix = np.concatenate(([0.0], np.cumsum(col_workloads)))
    goals = np.cumsum(targets)
    cuts = [0]
    for p in range(P - 1):
        goal = goals[p]
        c = int(np.searchsorted(prefix, goal, side="left"))
        if 0 < c <= width and goal - prefix[c - 1] < prefix[c] - goal:
            c -= 1
        clamped = min(max(c, cuts[-1] + 1), width - (P - 1 - p))
        cuts.append(clamped)
        if clamped != c:
            base, rest = prefix[clamped], targets[p + 1:]
            if rest.sum() > 0:
                goals[p + 1:] = base + np.cumsum(rest) * (prefix[-1] - base) / rest.sum()
    cuts.append(width)
    return StripePartition(tuple(cuts))


def stripe_workloads(partition: StripePartition, col_workloads) -> np.ndarray:
    prefix = np.concatenate(([0], np.cumsum(col_workloads)))
    cuts = np.asarray(partition.cuts)
    return prefix[cuts[1:]] - prefix[cuts[:-1]]


def modeled_iteration_time(partition: StripePartition, col_workloads, omega: float) -> float:
    return float(stripe_workloads(partition, col_workloads).max()) / omega


def migrated_weight(old: StripePartition, new: StripePartition, col_workloads) -> float:
    """Work units whose owning PE changes between two partitions."""
    moved = old.owners() != new.owners()
    return float(np.asarray(col_workloads)[moved].sum())


def modeled_lb_cost(migrated: float, c0: float, c1: float) -> float:
    if min(migrated, c0, c1) < 0:
        raise ValueError("LB cost parameters must be >= 0")
    return c0 + c1 * migrated


@dataclass
class LBEvent:
    iteration: int
    mode: str  # "standard" or "ulba": whether any PE was actually underloaded
    alphas: list[float]
    migrated_weight: float
    cost: float


@dataclass
class SimResult:
    config: SimConfig
    policy: str
    alpha: float
    seed: int
    iteration_times: np.ndarray
    pe_workloads: np.ndarray  # (iterations, P)
    lb_fired: np.ndarray
    migrated: np.ndarray
    events: list[LBEvent] = field(default_factory=list)

    @property
    def avg_pe_usage(self) -> np.ndarray:
        """Mean over max per-PE workload, in percent, per iteration."""
        w = self.pe_workloads
        return 100.0 * w.mean(axis=1) / w.max(axis=1)

    @property
    def lb_cost_total(self) -> float:
        return float(sum(e.cost for e in self.events))

    @property
    def total_time(self) -> float:
        return float(self.iteration_times.sum()) + self.lb_cost_total

    @property
    def lb_calls(self) -> int:
        return len(self.events)

    def summary(self) -> dict:
        return {
            "policy": self.policy,
            "alpha": self.alpha,
            "seed": self.seed,
            "total_time_s": self.total_time,
            "compute_time_s": float(self.iteration_times.sum()),
            "lb_cost_s": self.lb_cost_total,
            "lb_calls": self.lb_calls,
            "mean_pe_usage_pct": float(self.avg_pe_usage.mean()),
        }

    def manifest(self) -> dict:
        return {
            "config": asdict(self.config),
            **self.summary(),
            "events": [asdict(e) for e in self.events],
        }


def run_simulation(config: SimConfig, policy: Literal["standard", "ulba"],
                   alpha: float = 0.0, seed: int = 0) -> SimResult:
    """Run the erosion application under adaptive load balancing.

    Per iteration: erode, measure per-PE workloads and the iteration time,
    refresh the local WIR estimates, run one gossip round, accumulate the
    degradation and rebalance once it reaches the average LB cost (plus the
    underloading overhead estimate under ``"ulba"``).
    """
    if policy not in ("standard", "ulba"):
        raise ConfigError(f"unknown policy {policy!r}")
    if not 0 <= alpha <= 1:
        raise ConfigError(f"alpha must lie in [0, 1] (got {alpha})")
    if policy == "standard":
        alpha = 0.0
    P, omega = config.P, config.omega
    grid, _ = init_grid(config, seed)
    erosion_rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1,)))
    gossip_rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2,)))

    partition = even_partition(config.width, P)
    databases = [lbp.WirDatabase() for _ in range(P)]
    histories: list[list[float]] = [[] for _ in range(P)]
    tracker = lbp.DegradationTracker()
    lb_costs: list[float] = []

    n = config.iterations
    times = np.zeros(n)
    loads = np.zeros((n, P))
    fired = np.zeros(n, dtype=bool)
    migrated = np.zeros(n)
    events: list[LBEvent] = []

    for i in range(n):
        grid = erosion_step(grid, erosion_rng)
        cols = column_workloads(grid)
        pe_load = stripe_workloads(partition, cols)
        loads[i] = pe_load
        times[i] = pe_load.max() / omega

        for p in range(P):
            histories[p].append(float(pe_load[p]))
            if len(histories[p]) >= 2:
                databases[p].record(p, lbp.estimate_wir(histories[p], config.wir_window), i)
        databases = lbp.gossip_round(databases, i, gossip_rng)
        lbp.update_degradation(tracker, times[i])

        w_tot = float(cols.sum())
        threshold = float(np.mean(lb_costs)) if lb_costs else config.lb_cost_prior
        if alpha > 0:
            census = lbp.overloading_census(databases[0], config.z_threshold)
            threshold += lbp.lb_overhead_estimate(alpha, census, P, w_tot, omega)
        if not lbp.should_balance(tracker, threshold):
            continue

        alphas = np.zeros(P)
        if alpha > 0:
            for p in range(P):
                db = databases[p]
                if p in db.entries and len(db) >= 2 and lbp.detect_overloading(db, p, config.z_threshold):
                    alphas[p] = alpha
        alphas = lbp.majority_rule(alphas)
        new_partition = stripe_partition(cols, lbp.partition_weights(alphas, w_tot))
        moved = migrated_weight(partition, new_partition, cols)
        cost = modeled_lb_cost(moved, config.c0, config.c1)
        events.append(LBEvent(i, "ulba" if alphas.any() else "standard",
                              alphas.tolist(), moved, cost))
        lb_costs.append(cost)
        fired[i] = True
        migrated[i] = moved
        partition = new_partition
        tracker.reset()
        for h in histories:
            h.clear()

    return SimResult(config, policy, alpha, seed, times, loads, fired, migrated, events)
