"""Runtime side of underloading load balancing.

Each PE estimates its workload increase rate (WIR), spreads the rates it
knows through push gossip, flags itself as overloading when its rate is a
z-score outlier, and the load balancer fires once the accumulated
performance degradation exceeds the average LB cost.
"""

from __future__ import annotations

import statistics
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

DEFAULT_WIR_WINDOW = 5
DEFAULT_Z_THRESHOLD = 3.0


class InsufficientHistoryError(ValueError):
    pass


def estimate_wir(workload_history: Sequence[float], k: int = DEFAULT_WIR_WINDOW) -> float:
    """Least-squares slope of the last ``k`` per-iteration workloads."""
    if k < 2:
        raise InsufficientHistoryError(f"window must hold at least 2 points (got k={k})")
    y = np.asarray(workload_history, dtype=float)[-k:]
    if y.size < 2:
        raise InsufficientHistoryError(f"need at least 2 workloads, got {y.size}")
    x = np.arange(y.size, dtype=float)
    x -= x.mean()
    return float(np.dot(x, y - y.mean()) / np.dot(x, x))


@dataclass
class WirDatabase:
    """Known WIR per rank, each stamped with the iteration it was measured at."""

    entries: dict[int, tuple[float, int]] = field(default_factory=dict)

    def record(self, rank: int, wir: float, stamp: int) -> None:
        self.merge_entry(rank, wir, stamp)

    def merge_entry(self, rank: int, wir: float, stamp: int) -> None:
        old = self.entries.get(rank)
        # (stamp, wir) ordering makes the merge a semilattice join
        if old is None or (stamp, wir) > (old[1], old[0]):
            self.entries[rank] = (wir, stamp)

    def merge(self, other: "WirDatabase") -> None:
        for rank, (wir, stamp) in other.entries.items():
            self.merge_entry(rank, wir, stamp)

    def copy(self) -> "WirDatabase":
        return WirDatabase(dict(self.entries))

    def rates(self) -> dict[int, float]:
        return {rank: wir for rank, (wir, _) in self.entries.items()}

    def __len__(self) -> int:
        return len(self.entries)


def gossip_round(databases: Sequence[WirDatabase], iteration: int,
                 rng: np.random.Generator) -> list[WirDatabase]:
    """One synchronous push-gossip round.

    Every PE sends a snapshot of its database to one uniformly chosen other
    PE; receivers keep the freshest stamp per rank. ``iteration`` is only
    used to reject stamps from the future.
    """
    P = len(databases)
    if P < 2:
        raise ValueError("gossip needs at least 2 PEs")
    for db in databases:
        if any(stamp > iteration for _, stamp in db.entries.values()):
            raise ValueError(f"database holds a stamp newer than iteration {iteration}")
    peers = rng.integers(0, P - 1, size=P)
    peers += peers >= np.arange(P)  # skip self
    updated = [db.copy() for db in databases]
    for sender, receiver in enumerate(peers.tolist()):
        updated[receiver].merge(databases[sender])
    return updated


def detect_overloading(db: WirDatabase, rank: int, threshold: float = DEFAULT_Z_THRESHOLD) -> bool:
    """Whether ``rank``'s WIR z-score within ``db`` exceeds ``threshold``."""
    if rank not in db.entries:
        raise KeyError(f"rank {rank} has no entry in its own WIR database")
    if len(db) < 2:
        raise ValueError("z-score needs at least 2 WIR entries")
    rates = list(db.rates().values())
    std = statistics.pstdev(rates)
    if std == 0:
        return False
    return (db.entries[rank][0] - statistics.fmean(rates)) / std > threshold


def overloading_census(db: WirDatabase, threshold: float = DEFAULT_Z_THRESHOLD) -> int:
    """Number of ranks in ``db`` that look overloading."""
    if len(db) < 2:
        return 0
    return sum(detect_overloading(db, rank, threshold) for rank in db.entries)


@dataclass
class DegradationTracker:
    """Performance degradation since the last LB step.

    ``ref_time`` is the first iteration time seen after a reset; the running
    sum is signed, so iterations faster than the reference pay it back.
    """

    ref_time: Optional[float] = None
    recent_times: deque = field(default_factory=lambda: deque(maxlen=3))
    degradation: float = 0.0

    def reset(self) -> None:
        self.ref_time = None
        self.recent_times.clear()
        self.degradation = 0.0


def update_degradation(tracker: DegradationTracker, time_i: float) -> DegradationTracker:
    """Add the median of the last (up to) 3 iteration times minus the reference."""
    if tracker.ref_time is None:
        tracker.ref_time = time_i
    tracker.recent_times.append(time_i)
    tracker.degradation += statistics.median(tracker.recent_times) - tracker.ref_time
    return tracker


def should_balance(tracker: DegradationTracker, avg_lb_cost: float) -> bool:
    if avg_lb_cost < 0:
        raise ValueError(f"average LB cost must be >= 0 (got {avg_lb_cost})")
    return tracker.degradation >= avg_lb_cost


def majority_rule(alphas: Sequence[float]) -> np.ndarray:
    """Fall back to an even rebalance when at least half the PEs want to unload."""
    alphas = np.asarray(alphas, dtype=float)
    if np.count_nonzero(alphas > 0) >= alphas.size / 2:
        return np.zeros_like(alphas)
    return alphas.copy()


def partition_weights(alphas: Sequence[float], w_tot: float) -> np.ndarray:
    """Target workload per PE for the given per-PE underloading fractions.

    PE ``p`` with ``alpha_p > 0`` keeps ``(1 - alpha_p) * w_tot / P``; the
    shed work is split evenly over the PEs with ``alpha_p == 0``. The last
    PE absorbs the rounding residue so the targets sum to ``w_tot``.
    """
    alphas = np.asarray(alphas, dtype=float)
    P = alphas.size
    if np.any((alphas < 0) | (alphas > 1)):
        raise ValueError("alpha values must lie in [0, 1]")
    if not w_tot > 0:
        raise ValueError(f"total workload must be > 0 (got {w_tot})")
    over = alphas > 0
    n_over = int(np.count_nonzero(over))
    if n_over == P:
        raise ValueError("every PE is overloading; no PE can absorb the shed work")
    share = w_tot / P
    targets = np.where(over, (1 - alphas) * share, share)
    shed = float(np.sum(alphas[over])) * share
    targets[~over] += shed / (P - n_over)
    targets[-1] = w_tot - float(np.sum(targets[:-1]))
    return targets


def lb_overhead_estimate(alpha: float, n_over: int, P: int, w_tot: float, omega: float) -> float:
    """Time lost by non-overloading PEs absorbing ``alpha`` of ``n_over`` shares."""
    if n_over == 0 or n_over >= P / 2:  # majority rule turns ULBA off
        return 0.0
    return (alpha * n_over / (P - n_over)) * w_tot / (omega * P)
