"""Search over LB schedules: simulated annealing and exhaustive enumeration.

A schedule is a vector of ``gamma`` booleans, ``True`` at index ``i`` meaning
that the load balancer fires at iteration ``i``. Index 0 is always on.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import AppInstance, LBSchedule, ModelError, Policy, interval_time, sigma_plus_schedule, t_total

EXHAUSTIVE_MAX_GAMMA = 20


@dataclass(frozen=True)
class ScheduleState:
    decisions: tuple[bool, ...]

    def __post_init__(self) -> None:
        if not self.decisions:
            raise ModelError("a schedule state needs at least one iteration")
        if not self.decisions[0]:
            raise ModelError("index 0 must be on: an interval has to open the run")

    @classmethod
    def from_calls(cls, calls, gamma: int) -> "ScheduleState":
        flags = [False] * gamma
        for c in calls:
            flags[c] = True
        return cls(tuple(flags))

    @property
    def gamma(self) -> int:
        return len(self.decisions)

    @property
    def calls(self) -> LBSchedule:
        return LBSchedule((i for i, on in enumerate(self.decisions) if on), self.gamma)


@dataclass(frozen=True)
class AnnealParams:
    """Annealing budget and cooling schedule.

    Temperatures are expressed as fractions of the initial state's energy, so
    one parameter set fits instances of any magnitude. The temperature is
    lowered geometrically from ``t_initial`` to ``t_final`` over ``steps``
    levels, with ``moves_per_temp`` proposals per level.
    """

    t_initial: float = 3e-3
    t_final: float = 1e-6
    steps: int = 400
    moves_per_temp: int = 100
    seed: int = 0

    def __post_init__(self) -> None:
        if not (self.t_initial > 0 and self.t_final > 0):
            raise ModelError("annealing temperatures must be > 0")
        if not self.t_initial > self.t_final:
            raise ModelError("initial temperature must exceed the final temperature")
        if self.steps < 1:
            raise ModelError("annealing needs at least one temperature step")
        if self.moves_per_temp < 0:
            raise ModelError("moves_per_temp must be >= 0")

    def temperatures(self) -> np.ndarray:
        if self.steps == 1:
            return np.array([self.t_initial])
        return np.geomspace(self.t_initial, self.t_final, self.steps)


def energy(inst: AppInstance, policy: Policy, state: ScheduleState) -> float:
    """Total modelled time of the schedule encoded by ``state``."""
    return t_total(inst, policy, state.calls)


def neighbor(state: ScheduleState, rng: np.random.Generator) -> ScheduleState:
    """Flip one uniformly chosen decision in ``[1, gamma)``."""
    if state.gamma < 2:
        raise ModelError("no flippable iteration when gamma < 2")
    j = int(rng.integers(1, state.gamma))
    flags = list(state.decisions)
    flags[j] = not flags[j]
    return ScheduleState(tuple(flags))


class _IncrementalSchedule:
    """Sorted LB calls with O(log gamma) energy deltas for single flips."""

    def __init__(self, inst: AppInstance, policy: Policy, calls) -> None:
        self.inst = inst
        self.policy = policy
        self.calls = list(calls)
        self.gamma = inst.gamma

    def _cost(self, lb_p: int, lb_n: int) -> float:
        return interval_time(self.inst, self.policy, lb_p, lb_n)

    def flip_delta(self, j: int) -> float:
        k = bisect.bisect_left(self.calls, j)
        if k < len(self.calls) and self.calls[k] == j:
            prev = self.calls[k - 1]
            nxt = self.calls[k + 1] if k + 1 < len(self.calls) else self.gamma
            return self._cost(prev, nxt) - self._cost(prev, j) - self._cost(j, nxt)
        prev = self.calls[k - 1]
        nxt = self.calls[k] if k < len(self.calls) else self.gamma
        return self._cost(prev, j) + self._cost(j, nxt) - self._cost(prev, nxt)

    def flip(self, j: int) -> None:
        k = bisect.bisect_left(self.calls, j)
        if k < len(self.calls) and self.calls[k] == j:
            del self.calls[k]
        else:
            self.calls.insert(k, j)


def anneal(inst: AppInstance, policy: Policy, params: AnnealParams,
           initial: Optional[ScheduleState] = None) -> tuple[ScheduleState, float]:
    """Minimise the total modelled time by simulated annealing.

    Starts from ``initial`` (default: the upper-bound schedule), proposes
    single-iteration flips, accepts uphill moves with probability
    ``exp(-delta / T)`` and returns the best state ever visited with its energy.
    """
    if initial is None:
        initial = ScheduleState.from_calls(sigma_plus_schedule(inst), inst.gamma)
    if initial.gamma != inst.gamma:
        raise ModelError("initial state length differs from gamma")
    rng = np.random.default_rng(params.seed)
    start_energy = energy(inst, policy, initial)
    if inst.gamma < 2 or params.moves_per_temp == 0:
        return initial, start_energy

    current = _IncrementalSchedule(inst, policy, initial.calls)
    e_cur = start_energy
    e_best, best_calls = e_cur, list(current.calls)
    scale = abs(start_energy) or 1.0
    for temp in params.temperatures() * scale:
        flips = rng.integers(1, inst.gamma, size=params.moves_per_temp)
        draws = rng.random(params.moves_per_temp)
        for j, u in zip(flips.tolist(), draws.tolist()):
            delta = current.flip_delta(j)
            if delta <= 0 or u < math.exp(-delta / temp):
                current.flip(j)
                e_cur += delta
                if e_cur < e_best:
                    e_best, best_calls = e_cur, list(current.calls)

    best = ScheduleState.from_calls(best_calls, inst.gamma)
    e_final = energy(inst, policy, best)
    if e_final > start_energy:
        # drift in the running sum picked a state that is not actually better
        return initial, start_energy
    return best, e_final


def exhaustive_best(inst: AppInstance, policy: Policy) -> tuple[ScheduleState, float]:
    """Global optimum by enumerating all ``2**(gamma-1)`` schedules.

    Ties go to the lexicographically smallest decision vector.
    """
    gamma = inst.gamma
    if gamma > EXHAUSTIVE_MAX_GAMMA:
        raise ModelError(f"exhaustive search refuses gamma > {EXHAUSTIVE_MAX_GAMMA} (got {gamma})")
    cost = [[0.0] * (gamma + 1) for _ in range(gamma)]
    for p in range(gamma):
        for n in range(p + 1, gamma + 1):
            cost[p][n] = interval_time(inst, policy, p, n)

    free = gamma - 1
    best_mask, best_e = 0, math.inf
    # bit (free-1) is iteration 1, so numeric order equals lexicographic order
    for mask in range(1 << free):
        e, prev = 0.0, 0
        for i in range(1, gamma):
            if mask >> (free - i) & 1:
                e += cost[prev][i]
                prev = i
        e += cost[prev][gamma]
        if e < best_e:
            best_mask, best_e = mask, e

    flags = [True] + [bool(best_mask >> (free - i) & 1) for i in range(1, gamma)]
    state = ScheduleState(tuple(flags))
    return state, energy(inst, policy, state)


def dp_best(inst: AppInstance, policy: Policy) -> tuple[ScheduleState, float]:
    """Global optimum by dynamic programming over interval end points.

    Intervals contribute independently to the total, so the optimum over
    ``[0, n)`` extends the optimum over ``[0, p)`` by the interval ``[p, n)``.
    Runs in O(gamma**2) and serves as a cross-check for larger horizons.
    """
    gamma = inst.gamma
    best = [math.inf] * (gamma + 1)
    choice = [0] * (gamma + 1)
    best[0] = 0.0
    for n in range(1, gamma + 1):
        for p in range(n):
            e = best[p] + interval_time(inst, policy, p, n)
            if e < best[n]:
                best[n], choice[n] = e, p
    calls, n = [], gamma
    while n > 0:
        n = choice[n]
        calls.append(n)
    state = ScheduleState.from_calls(sorted(calls), gamma)
    return state, energy(inst, policy, state)


def relative_gain(e_ref: float, e_test: float) -> float:
    """Percent by which ``e_test`` is faster than ``e_ref``."""
    if not e_ref > 0:
        raise ModelError(f"reference energy must be > 0 (got {e_ref})")
    return 100.0 * (e_ref - e_test) / e_ref
