from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chi2

from oracles import disk_cell_count
from ulba.erosion import (
    FLUID_WEIGHT,
    REFINED_WEIGHT,
    ConfigError,
    ErosionGrid,
    SimConfig,
    StripePartition,
    column_workloads,
    erosion_step,
    even_partition,
    fluid_neighbor_counts,
    init_grid,
    migrated_weight,
    modeled_iteration_time,
    modeled_lb_cost,
    run_simulation,
    stripe_partition,
    stripe_workloads,
)
from ulba.policy import partition_weights

SMALL = SimConfig(P=4, sx=32, sy=32, radius=7.0, iterations=120)


# --- grid initialisation ------------------------------------------------------------

def test_disk_cell_count_matches_rasterisation():
    cfg = SimConfig(P=2, sx=100, sy=100, radius=10, strong_count=0)
    grid, disks = init_grid(cfg, 0)
    assert len(disks) == 2
    assert all(d.probability == cfg.p_weak for d in disks)
    for p, disk in enumerate(disks):
        stripe = grid.rock[:, p * 100:(p + 1) * 100]
        expected = disk_cell_count(100, 100, 10, 50, 50)
        assert stripe.sum() == expected
        assert abs(expected - np.pi * 100) < 15


def test_strong_count():
    grid, disks = init_grid(replace(SMALL, strong_count=4), 0)
    assert all(d.probability == SMALL.p_strong for d in disks)
    _, disks = init_grid(replace(SMALL, strong_count=1), 5)
    assert sum(d.probability == SMALL.p_strong for d in disks) == 1


def test_init_deterministic():
    a, _ = init_grid(SMALL, 9)
    b, _ = init_grid(SMALL, 9)
    assert np.array_equal(a.weight, b.weight) and np.array_equal(a.rock_prob, b.rock_prob)


def test_config_rejects_overflowing_disk():
    with pytest.raises(ConfigError):
        SimConfig(sx=20, sy=128, radius=10)
    with pytest.raises(ConfigError):
        SimConfig(P=4, strong_count=5)


# --- erosion ------------------------------------------------------------------------

def test_shielded_interior_survives():
    weight = np.ones((5, 5), dtype=np.int64)
    weight[1:4, 1:4] = 0
    prob = np.where(weight == 0, 1.0, 0.0)
    out = erosion_step(ErosionGrid(weight, prob), np.random.default_rng(0))
    assert out.weight[2, 2] == 0
    # every exposed rock cell has probability 1
    ring = np.ones((5, 5), dtype=bool)
    ring[2, 2] = False
    assert np.all(out.weight[1:4, 1:4][ring[1:4, 1:4]] == REFINED_WEIGHT)


def test_conversions_are_simultaneous():
    weight = np.array([[1, 0, 0, 0]], dtype=np.int64)
    prob = np.array([[0.0, 1.0, 1.0, 1.0]])
    out = erosion_step(ErosionGrid(weight, prob), np.random.default_rng(0))
    assert out.weight.tolist() == [[1, 4, 0, 0]]


def test_survival_frequency_chi_square():
    cfg = SimConfig(P=2, sx=40, sy=40, radius=12, strong_count=0)
    grid, _ = init_grid(cfg, 0)
    # erode a bit so that exposed cells with 1, 2 and 3 fluid neighbours exist
    rng = np.random.default_rng(1)
    for _ in range(30):
        grid = erosion_step(grid, rng)
    counts = fluid_neighbor_counts(grid)
    exposed = grid.rock & (counts > 0)
    trials = 400
    survived = np.zeros(grid.shape)
    for t in range(trials):
        out = erosion_step(grid, np.random.default_rng(100 + t))
        survived += out.rock
    stat, dof = 0.0, 0
    for k in range(1, 5):
        cells = exposed & (counts == k)
        n = int(cells.sum()) * trials
        if n == 0:
            continue
        expected = n * (1 - cfg.p_weak) ** k
        observed = survived[cells].sum()
        stat += (observed - expected) ** 2 / expected + (observed - expected) ** 2 / (n - expected)
        dof += 1
    assert dof >= 2
    assert stat < chi2.ppf(0.99, dof)


def test_weight_monotone_and_plus_four_per_event():
    grid, _ = init_grid(replace(SMALL, strong_count=2), 3)
    rng = np.random.default_rng(3)
    prev_rock = grid.rock.sum()
    prev_cols = column_workloads(grid)
    for _ in range(60):
        grid = erosion_step(grid, rng)
        rock, cols = grid.rock.sum(), column_workloads(grid)
        assert rock <= prev_rock
        assert np.all(cols >= prev_cols)
        assert cols.sum() - prev_cols.sum() == 4 * (prev_rock - rock)
        assert set(np.unique(grid.weight)) <= {0, FLUID_WEIGHT, REFINED_WEIGHT}
        prev_rock, prev_cols = rock, cols


def test_weak_disk_shrinks():
    cfg = SimConfig(P=2, sx=40, sy=40, radius=12, strong_count=0)
    grid, _ = init_grid(cfg, 0)
    rng = np.random.default_rng(0)
    sizes = []
    for _ in range(200):
        grid = erosion_step(grid, rng)
        sizes.append(int(grid.rock.sum()))
    assert sizes == sorted(sizes, reverse=True)
    assert sizes[-1] < sizes[0]


# --- workloads and stripes ----------------------------------------------------------

def test_column_workloads():
    weight = np.ones((100, 3), dtype=np.int64)
    weight[:10, 1] = REFINED_WEIGHT
    weight[:, 2] = 0
    cols = column_workloads(ErosionGrid(weight, np.zeros((100, 3))))
    assert cols.tolist() == [100, 130, 0]


def test_stripe_cut_example():
    assert stripe_partition([4, 4, 4, 4], [8, 8]).cuts == (0, 2, 4)


def test_uniform_stripes_equal_width():
    part = stripe_partition(np.full(64, 3.0), np.full(8, 24.0))
    widths = np.diff(part.cuts)
    assert widths.max() - widths.min() <= 1


def test_stripe_rejects_narrow_domain():
    with pytest.raises(ValueError):
        stripe_partition([1, 1], [1, 1, 0])
    with pytest.raises(ValueError):
        StripePartition((0, 2, 2))


def test_underloaded_stripe_target():
    cols = np.full(160, 10.0)
    targets = partition_weights([0.5] + [0.0] * 15, cols.sum())
    w = stripe_workloads(stripe_partition(cols, targets), cols)
    assert w[0] == pytest.approx(0.5 * cols.sum() / 16, abs=cols.max())
    assert w.sum() == cols.sum()


@given(st.integers(2, 12), st.data())
@settings(max_examples=500)
def test_stripe_deviation_bounded(P, data):
    # with a single column per stripe every cut is forced and no bound holds
    width = data.draw(st.integers(4 * P, 12 * P))
    cols = np.array(data.draw(st.lists(st.integers(0, 50), min_size=width, max_size=width)), dtype=float)
    if cols.sum() == 0:
        cols[0] = 1
    alphas = data.draw(st.lists(st.sampled_from([0.0, 0.2, 0.5]), min_size=P, max_size=P))
    if sum(a > 0 for a in alphas) == P:
        alphas[0] = 0.0
    targets = partition_weights(alphas, cols.sum())
    part = stripe_partition(cols, targets)
    assert part.cuts[0] == 0 and part.cuts[-1] == width
    assert np.all(np.diff(part.cuts) >= 1)
    dev = np.abs(stripe_workloads(part, cols) - targets)
    assert np.all(dev <= cols.max() + 1e-9 * cols.sum())


def test_modeled_time():
    cols = np.array([1.0, 1, 1, 1])
    assert modeled_iteration_time(even_partition(4, 2), cols, 2.0) == 1.0
    cols = np.array([2.0, 2, 1, 1, 1, 1])
    part = StripePartition((0, 2, 4, 6))
    assert modeled_iteration_time(part, cols, 1.0) == 4.0
    assert modeled_iteration_time(part, cols, 1.0) >= cols.sum() / 3


def test_modeled_lb_cost():
    assert modeled_lb_cost(0, 0.5, 1e-3) == 0.5
    assert modeled_lb_cost(1000, 0.5, 0) == 0.5
    assert modeled_lb_cost(1000, 0.5, 1e-3) == pytest.approx(1.5)
    with pytest.raises(ValueError):
        modeled_lb_cost(1, -1, 0)


def test_migrated_weight_set_difference():
    cols = np.array([5.0, 1, 2, 7, 3, 4])
    old, new = StripePartition((0, 2, 6)), StripePartition((0, 4, 6))
    moved = sum(cols[c] for p in range(2)
                for c in set(range(*new.cuts[p:p + 2])) - set(range(*old.cuts[p:p + 2])))
    assert migrated_weight(old, new, cols) == moved == 9
    # never below half the total change of per-PE weight
    delta = stripe_workloads(new, cols) - stripe_workloads(old, cols)
    assert migrated_weight(old, new, cols) >= np.abs(delta).sum() / 2
    assert migrated_weight(old, old, cols) == 0


def test_migrated_weight_equal_stripe_exchange():
    # two equal halves; shifting ownership by the whole stripe moves one stripe's weight per PE
    cols = np.ones(8)
    old = StripePartition((0, 4, 8))
    new = StripePartition((0, 1, 8))
    assert migrated_weight(old, new, cols) == 3
    assert np.abs(stripe_workloads(new, cols) - stripe_workloads(old, cols)).sum() / 2 == 3


# --- simulation ---------------------------------------------------------------------

def test_simulation_deterministic():
    a = run_simulation(SMALL, "ulba", 0.4, 7)
    b = run_simulation(SMALL, "ulba", 0.4, 7)
    assert np.array_equal(a.iteration_times, b.iteration_times)
    assert np.array_equal(a.pe_workloads, b.pe_workloads)
    assert a.events == b.events


def test_alpha_zero_ulba_equals_standard():
    a = run_simulation(SMALL, "ulba", 0.0, 2)
    b = run_simulation(SMALL, "standard", 0.0, 2)
    assert np.array_equal(a.iteration_times, b.iteration_times)
    assert np.array_equal(a.lb_fired, b.lb_fired)
    assert a.total_time == b.total_time


def test_standard_ignores_alpha():
    a = run_simulation(SMALL, "standard", 0.7, 2)
    assert all(e.mode == "standard" for e in a.events)
    assert all(not any(e.alphas) for e in a.events)


def test_no_strong_rock_same_call_count():
    cfg = replace(SMALL, strong_count=0)
    for seed in range(3):
        std = run_simulation(cfg, "standard", 0.0, seed)
        ulba = run_simulation(cfg, "ulba", 0.4, seed)
        assert std.lb_calls == ulba.lb_calls


def test_result_invariants():
    res = run_simulation(replace(SMALL, strong_count=1), "ulba", 0.4, 1)
    assert res.total_time == pytest.approx(res.iteration_times.sum() + sum(e.cost for e in res.events))
    assert res.lb_calls == int(res.lb_fired.sum())
    means = res.pe_workloads.mean(axis=1)
    assert np.all(res.iteration_times >= means / SMALL.omega - 1e-15)
    assert np.all((res.avg_pe_usage > 0) & (res.avg_pe_usage <= 100))
    for e in res.events:
        assert e.cost == pytest.approx(SMALL.c0 + SMALL.c1 * e.migrated_weight)


def test_bad_policy_and_alpha():
    with pytest.raises(ConfigError):
        run_simulation(SMALL, "greedy", 0.0, 0)
    with pytest.raises(ConfigError):
        run_simulation(SMALL, "ulba", 1.5, 0)
