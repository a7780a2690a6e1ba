"""Analytical cost model of an iterative application under periodic load balancing.

Two rebalancing policies are modelled:

* ``"standard"``: every LB step spreads the whole workload evenly over the PEs.
* ``"ulba"``: every LB step leaves each overloading PE with only ``1 - alpha``
  of the even share and hands the shed work to the non-overloading PEs, so
  that the application's own growth re-levels the load.

Workloads are kept in work units; seconds only appear once a quantity is
divided by the PE speed ``omega``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

Policy = Literal["standard", "ulba"]
POLICIES: tuple[str, ...] = ("standard", "ulba")


class ModelError(ValueError):
    """An instance or argument violates a model invariant."""


class NoImbalanceError(ModelError):
    """The imbalance growth rate is zero, so an LB interval is undefined."""


@dataclass(frozen=True)
class AppInstance:
    """Parameter set of one synthetic application.

    Attributes
    ----------
    P : number of processing elements.
    N : number of overloading PEs.
    gamma : number of iterations of the run.
    w0 : initial total workload (work units).
    a : workload added to every PE at each iteration.
    m : extra workload added to each overloading PE at each iteration.
    alpha : fraction of the even share removed from overloading PEs at an LB step.
    omega : PE speed (work units per second).
    c_seconds : average cost of one LB step (seconds).
    """

    P: int
    N: int
    gamma: int
    w0: float
    a: float
    m: float
    alpha: float = 0.0
    omega: float = 1.0
    c_seconds: float = 0.0

    def __post_init__(self) -> None:
        if self.P < 2:
            raise ModelError(f"P must be >= 2 (got {self.P})")
        if not 0 <= self.N <= self.P:
            raise ModelError(f"N must lie in [0, P] (got N={self.N}, P={self.P})")
        if self.gamma < 1:
            raise ModelError(f"gamma must be >= 1 (got {self.gamma})")
        if self.w0 < 0:
            raise ModelError(f"w0 must be >= 0 (got {self.w0})")
        if self.a < 0 or self.m < 0:
            raise ModelError(f"a and m must be >= 0 (got a={self.a}, m={self.m})")
        if not self.omega > 0:
            raise ModelError(f"omega must be > 0 (got {self.omega})")
        if self.c_seconds < 0:
            raise ModelError(f"c_seconds must be >= 0 (got {self.c_seconds})")
        if not 0 <= self.alpha <= 1:
            raise ModelError(f"alpha must lie in [0, 1] (got {self.alpha})")
        if self.N == 0 and self.alpha != 0:
            raise ModelError("alpha must be 0 when there is no overloading PE (N=0)")

    @property
    def delta_w(self) -> float:
        """Total workload added per iteration, ``a*P + m*N``."""
        return self.a * self.P + self.m * self.N

    @property
    def a_hat(self) -> float:
        """Average per-PE growth rate."""
        return self.a + self.m * self.N / self.P

    @property
    def m_hat(self) -> float:
        """Growth rate of the most loaded PEs beyond the average."""
        return self.m * (self.P - self.N) / self.P


@dataclass(frozen=True)
class PostLBWorkloads:
    """Per-PE workloads right after a ULBA step."""

    w_star: float  # one overloading PE
    w: float  # one non-overloading PE


class LBSchedule(tuple):
    """Strictly increasing iteration indices at which the load balancer fires.

    Index 0 always opens the first interval; the last interval ends at ``gamma``.
    """

    def __new__(cls, calls: Iterable[int], gamma: int) -> "LBSchedule":
        calls = tuple(int(c) for c in calls)
        if not calls or calls[0] != 0:
            raise ModelError("an LB schedule must start at iteration 0")
        for prev, nxt in zip(calls, calls[1:]):
            if nxt <= prev:
                raise ModelError(f"LB calls must be strictly increasing ({prev} then {nxt})")
        if calls[-1] >= gamma:
            raise ModelError(f"LB call {calls[-1]} lies outside [0, {gamma})")
        self = super().__new__(cls, calls)
        self.gamma = gamma
        return self

    def intervals(self) -> list[tuple[int, int]]:
        ends = self[1:] + (self.gamma,)
        return list(zip(self, ends))

    def __repr__(self) -> str:
        return f"LBSchedule({list(self)}, gamma={self.gamma})"


def _check_ulba(inst: AppInstance) -> None:
    if inst.N >= inst.P:
        raise ModelError("ULBA needs N < P: the overhead factor alpha*N/(P-N) is undefined")


def workload_at(inst: AppInstance, i: int) -> float:
    """Total workload at iteration ``i``."""
    if i < 0:
        raise ModelError(f"iteration must be >= 0 (got {i})")
    return inst.w0 + i * inst.delta_w


def t_par_std(inst: AppInstance, lb_p: int, t: int) -> float:
    """Time of the ``t``-th iteration after an even rebalance at ``lb_p``."""
    return (workload_at(inst, lb_p) / inst.P + (inst.m + inst.a) * t) / inst.omega


def workload_after_lb(inst: AppInstance, lb_p: int) -> PostLBWorkloads:
    _check_ulba(inst)
    share = workload_at(inst, lb_p) / inst.P
    overhead = inst.alpha * inst.N / (inst.P - inst.N)
    return PostLBWorkloads(w_star=(1 - inst.alpha) * share, w=(1 + overhead) * share)


def sigma_minus(inst: AppInstance, i: int) -> int:
    """Iterations after an LB step at ``i`` before overloaders catch up.

    Up to and including this offset the non-overloading PEs dominate the
    iteration time.
    """
    if inst.alpha == 0:
        return 0
    _check_ulba(inst)
    if inst.m == 0:
        raise NoImbalanceError("m = 0: overloading PEs never catch up, lower bound undefined")
    P, N = inst.P, inst.N
    return math.floor((1 + N / (P - N)) * inst.alpha * workload_at(inst, i) / (inst.m * P))


def t_par_ulba(inst: AppInstance, lb_p: int, t: int) -> float:
    """Time of the ``t``-th iteration after an underloading rebalance at ``lb_p``."""
    if inst.alpha == 0:
        # degenerates to the even split
        return t_par_std(inst, lb_p, t)
    post = workload_after_lb(inst, lb_p)
    if t <= sigma_minus(inst, lb_p):
        return (post.w + inst.a * t) / inst.omega
    return (post.w_star + (inst.m + inst.a) * t) / inst.omega


def cost_imbalance(inst: AppInstance, tau: float) -> float:
    """Imbalance cost accumulated over ``tau`` iterations (continuous form)."""
    if tau < 0:
        raise ModelError(f"tau must be >= 0 (got {tau})")
    return inst.m_hat * tau * tau / (2 * inst.omega)


def cost_imbalance_discrete(inst: AppInstance, tau: int) -> float:
    """Discrete counterpart of :func:`cost_imbalance`, ``sum(m_hat * t for t < tau)``."""
    return sum(inst.m_hat * t for t in range(int(tau))) / inst.omega


def cost_overhead(inst: AppInstance, lb_p: int, tau: float) -> float:
    """Extra time paid by non-overloading PEs for the work they absorbed."""
    _check_ulba(inst)
    if inst.alpha == 0:
        return 0.0
    P, N = inst.P, inst.N
    horizon = lb_p + sigma_minus(inst, lb_p) + tau
    return (inst.alpha * N / (P - N)) * workload_at(inst, horizon) / (inst.omega * P)


def upper_bound_coefficients(inst: AppInstance, i: int) -> tuple[float, float, float]:
    """Coefficients ``(A, B, K)`` of ``A*tau**2 + B*tau + K = 0`` for the LB upper bound.

    The positive root balances the imbalance cost against the LB cost plus the
    underloading overhead.
    """
    P, N, omega = inst.P, inst.N, inst.omega
    if N < P:
        share = inst.alpha * N / ((P - N) * omega * P)
    else:
        share = 0.0
    s_minus = sigma_minus(inst, i)
    A = inst.m_hat / (2 * omega)
    B = -share * inst.delta_w
    K = -(share * (workload_at(inst, i) + s_minus * inst.delta_w) + inst.c_seconds)
    return A, B, K


def menon_interval(inst: AppInstance) -> float:
    """Optimal even-rebalance period ``sqrt(2*omega*C / m_hat)``."""
    if inst.m_hat == 0:
        raise NoImbalanceError("m_hat = 0: imbalance never builds up")
    return math.sqrt(2 * inst.omega * inst.c_seconds / inst.m_hat)


def upper_bound_root(inst: AppInstance, i: int) -> float:
    """Unfloored largest root ``tau`` of the upper-bound quadratic."""
    if inst.m_hat == 0:
        raise NoImbalanceError("m_hat = 0: imbalance never builds up")
    if inst.alpha == 0:
        return menon_interval(inst)
    A, B, K = upper_bound_coefficients(inst, i)
    disc = B * B - 4 * A * K
    assert disc >= 0, "constant term is negative, a real root must exist"
    return (-B + math.sqrt(disc)) / (2 * A)


def sigma_plus(inst: AppInstance, i: int) -> int:
    """Iteration offset of the next LB call after one at ``i``."""
    s_minus = sigma_minus(inst, i)
    tau = math.floor(upper_bound_root(inst, i))
    return s_minus + max(tau, 1)


def sigma_plus_schedule(inst: AppInstance) -> LBSchedule:
    """Schedule that calls the load balancer every ``sigma_plus`` iterations."""
    calls = [0]
    while True:
        nxt = calls[-1] + sigma_plus(inst, calls[-1])
        if nxt >= inst.gamma:
            break
        calls.append(nxt)
    return LBSchedule(calls, inst.gamma)


def interval_time(inst: AppInstance, policy: Policy, lb_p: int, lb_n: int,
                  charge: bool = True) -> float:
    """Time of the interval ``[lb_p, lb_n)`` including the LB cost when ``charge``.

    Closed-form sum of the per-iteration times.
    """
    length = lb_n - lb_p
    if length < 1:
        raise ModelError(f"empty LB interval [{lb_p}, {lb_n})")
    cost = inst.c_seconds if charge else 0.0
    if policy == "standard" or inst.alpha == 0:
        work = length * (workload_at(inst, lb_p) / inst.P) + (inst.m + inst.a) * (length * (length - 1) / 2)
        return cost + work / inst.omega
    if policy != "ulba":
        raise ModelError(f"unknown policy {policy!r}")
    post = workload_after_lb(inst, lb_p)
    n1 = min(sigma_minus(inst, lb_p) + 1, length)
    n2 = length - n1
    work = n1 * post.w + inst.a * (n1 * (n1 - 1) / 2)
    if n2:
        work += n2 * post.w_star + (inst.m + inst.a) * ((n1 + length - 1) * n2 / 2)
    return cost + work / inst.omega


def t_total(inst: AppInstance, policy: Policy, schedule: Sequence[int],
            free_initial_balance: bool = False) -> float:
    """Total modelled time of a run under ``policy`` with LB calls at ``schedule``.

    Every interval pays the LB cost once; ``free_initial_balance`` waives it for
    the interval opened at iteration 0.
    """
    if policy not in POLICIES:
        raise ModelError(f"unknown policy {policy!r}")
    if not isinstance(schedule, LBSchedule):
        schedule = LBSchedule(schedule, inst.gamma)
    total = 0.0
    for k, (lb_p, lb_n) in enumerate(schedule.intervals()):
        total += interval_time(inst, policy, lb_p, lb_n, charge=not (free_initial_balance and k == 0))
    return total
