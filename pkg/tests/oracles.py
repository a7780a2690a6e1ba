"""Reference computations that avoid the closed forms under test."""

import numpy as np


def per_pe_loads(inst, lb_p, alpha):
    """Per-PE loads right after a rebalance at ``lb_p``: overloaders first.

    Uses only conservation: overloaders keep ``(1 - alpha)`` of the even share,
    the remainder is spread over the others.
    """
    P, N = inst.P, inst.N
    total = inst.w0
    for _ in range(lb_p):
        total += inst.a * P + inst.m * N
    loads = np.empty(P)
    over = (1 - alpha) * total / P
    loads[:N] = over
    loads[N:] = (total - N * over) / (P - N)
    return loads


def step_times(inst, lb_p, length, alpha):
    """Iteration times of ``length`` steps after a rebalance, from a per-PE simulation."""
    loads = per_pe_loads(inst, lb_p, alpha)
    growth = np.full(inst.P, float(inst.a))
    growth[: inst.N] += inst.m
    out = []
    for _ in range(length):
        out.append(loads.max() / inst.omega)
        loads = loads + growth
    return out


def total_time_loop(inst, policy, calls):
    alpha = inst.alpha if policy == "ulba" else 0.0
    ends = list(calls[1:]) + [inst.gamma]
    total = 0.0
    for p, n in zip(calls, ends):
        total += inst.c_seconds + sum(step_times(inst, p, n - p, alpha))
    return total


def catch_up_offset(inst, i, chunk=4096):
    """Last offset at which an underloaded overloader still carries no more work than the others.

    Direct search over offsets ``0, 1, 2, ...``; never divides by ``m``.
    """
    P, N, alpha = inst.P, inst.N, inst.alpha
    total = inst.w0 + i * (inst.a * P + inst.m * N)
    over0 = (1 - alpha) * total / P
    rest0 = (total - N * over0) / (P - N)
    start = 0
    while True:
        t = np.arange(start, start + chunk, dtype=float)
        over = over0 + (inst.m + inst.a) * t
        rest = rest0 + inst.a * t
        exceeded = np.nonzero(over - rest > 1e-12 * rest)[0]
        if exceeded.size:
            return start + int(exceeded[0]) - 1
        start += chunk


def trigger_gap(inst, i, tau):
    """Imbalance cost minus overhead minus LB cost, each written from its definition."""
    P, N, omega = inst.P, inst.N, inst.omega
    dw = inst.a * P + inst.m * N
    w_i = inst.w0 + i * dw
    s_minus = catch_up_offset(inst, i)
    imbalance = inst.m * (P - N) / P * tau**2 / (2 * omega)
    overhead = inst.alpha * N / (P - N) * (w_i + (s_minus + tau) * dw) / (omega * P)
    return imbalance - overhead - inst.c_seconds, max(abs(imbalance), abs(overhead), inst.c_seconds)


def quadratic_residual(inst, i, tau):
    """Relative residual of the upper-bound balance written from its three cost terms."""
    gap, scale = trigger_gap(inst, i, tau)
    return abs(gap) / scale


def disk_cell_count(sx, sy, radius, cx, cy):
    count = 0
    for r in range(sy):
        for c in range(sx):
            if (c + 0.5 - cx) ** 2 + (r + 0.5 - cy) ** 2 <= radius**2:
                count += 1
    return count
