import itertools
import math

import numpy as np
import pytest

from fracmax.errors import InsufficientScales, ResolutionInsufficient
from fracmax.geometry import (
    box_dimension_estimate,
    build_cantor,
    build_gap_set,
    covering_number,
    gap_intervals,
    holder_radius,
    porosity_check,
)
from fracmax.grid import DomainMask, NodeSet, boundary_distance, interval_grid


class TestGapSet:
    def test_level_one_intervals_for_m2(self):
        assert gap_intervals(2, 1) == ((0.5, 0.75), (0.75, 1.0))

    def test_node_exact_membership(self):
        grid = interval_grid(-8.0, 9.0, 2.0**-6)
        gap = build_gap_set(2, 2, grid)
        x = grid.axis(0)
        member = gap.nodes.member
        # everything at or below zero survives
        assert member[x <= 0.0].all()
        # midpoints of removed intervals are out
        for N in (1, 2):
            mid = 2.0**-N + 2.0 ** (-2 * N) / 2.0
            idx = int(round((mid - (-8.0)) / grid.h))
            if abs(x[idx] - mid) < 1e-12:
                assert not member[idx]
        # interval endpoints survive (the removed intervals are open)
        endpoint = 0.75
        idx = int(round((endpoint - (-8.0)) / grid.h))
        assert member[idx]

    def test_resolution_guard(self):
        grid = interval_grid(-8.0, 9.0, 0.25)
        with pytest.raises(ResolutionInsufficient):
            build_gap_set(2, 3, grid)

    def test_holder_radius_invariant_and_constant(self):
        h = 2.0**-8
        grid = interval_grid(-8.0, 9.0, h)
        mask = DomainMask(grid, np.ones(grid.shape, dtype=bool))
        gap = build_gap_set(2, 3, grid)
        alpha = 0.5
        R, n_clipped = holder_radius(gap.nodes, mask, alpha)
        bdist = boundary_distance(mask).values
        assert np.all(R.values <= bdist + 1e-9)
        assert n_clipped == 0  # the ambient interval is wide enough
        # Hoelder constant at most 2^(2 alpha + 1) within 5%
        x = grid.axis(0)
        sel = (x > -1.0) & (x < 2.0)
        xs, rs = x[sel], R.values[sel]
        i = np.arange(0, xs.size, 7)
        pairs = [(a, b) for a in i for b in i if a < b]
        worst = max(abs(rs[a] - rs[b]) / abs(xs[a] - xs[b]) ** alpha for a, b in pairs)
        assert worst <= 2.0 ** (2 * alpha + 1) * 1.05


class TestCantor:
    def test_level_one(self):
        grid = interval_grid(0.0, 1.0, 1.0 / 9)
        ns = build_cantor(1, grid, (0.0, 1.0))
        x = grid.axis(0)
        expected = (x <= 1.0 / 3 + 1e-12) | (x >= 2.0 / 3 - 1e-12)
        assert np.array_equal(ns.member, expected)

    def test_component_count(self):
        level = 4
        grid = interval_grid(0.0, 1.0, 3.0**-6)
        ns = build_cantor(level, grid, (0.0, 1.0))
        member = ns.member.astype(int)
        components = int(np.sum((np.diff(member) == 1)) + member[0])
        assert components == 2**level

    def test_resolution_guard(self):
        grid = interval_grid(0.0, 1.0, 0.2)
        with pytest.raises(ResolutionInsufficient):
            build_cantor(3, grid, (0.0, 1.0))


def minimal_cover_oracle(coords, r, max_size=4):
    """Exhaustive minimal open-ball cover with centers in the set (tiny sets)."""
    coords = np.asarray(coords).ravel()
    for size in range(1, max_size + 1):
        for centers in itertools.combinations(coords, size):
            covered = np.zeros(coords.size, dtype=bool)
            for c in centers:
                covered |= np.abs(coords - c) < r
            if covered.all():
                return size
    return max_size + 1


class TestCoveringNumber:
    def test_singleton(self):
        grid = interval_grid(0.0, 1.0, 0.1)
        ns = NodeSet.from_coords(grid, [[0.5]])
        assert covering_number(ns, 0.07) == 1

    def test_collinear_17_nodes_matches_exhaustive(self):
        grid = interval_grid(0.0, 1.6, 0.1)
        ns = NodeSet(grid, np.ones(grid.shape, dtype=bool))
        got = covering_number(ns, 0.5)
        oracle = minimal_cover_oracle(ns.coords(), 0.5)
        assert got == oracle == 2

    def test_sweep_greedy_matches_exhaustive_on_random_sets(self, rng):
        grid = interval_grid(0.0, 1.8, 0.1)
        for _ in range(10):
            member = np.zeros(grid.shape, dtype=bool)
            member[rng.choice(grid.shape[0], size=9, replace=False)] = True
            ns = NodeSet(grid, member)
            r = float(rng.uniform(0.15, 0.8))
            assert covering_number(ns, r) == minimal_cover_oracle(ns.coords(), r, max_size=6)

    def test_nonincreasing_in_radius(self):
        grid = interval_grid(0.0, 1.0, 3.0**-5)
        ns = build_cantor(3, grid, (0.0, 1.0))
        counts = [covering_number(ns, r) for r in (0.04, 0.08, 0.16, 0.32)]
        assert all(a >= b for a, b in zip(counts[:-1], counts[1:]))

    def test_cantor_level5_at_third_scale(self):
        grid = interval_grid(0.0, 1.0, 3.0**-6)
        ns = build_cantor(5, grid, (0.0, 1.0))
        assert abs(covering_number(ns, 3.0**-3) - 8) <= 1


class TestPorosity:
    def test_single_node_attains_one_half(self):
        # a kappa-ball inside B(x, r) avoiding the center x needs
        # kappa r <= |y - x| <= (1 - kappa) r, so kappa = 1/2 is the exact
        # supremum for a singleton (attained at |y - x| = r/2)
        grid = interval_grid(-1.0, 1.0, 0.01)
        ns = NodeSet.from_coords(grid, [[0.0]])
        rep = porosity_check(ns, 0.5, scales=[0.5])
        assert rep.passed
        assert 0.45 <= rep.kappa_estimate <= 0.5 + 1e-9

    def test_full_interval_has_no_porosity(self):
        grid = interval_grid(-1.0, 1.0, 0.02)
        x = grid.axis(0)
        ns = NodeSet(grid, (x >= -0.5) & (x <= 0.5))
        rep = porosity_check(ns, 0.3, scales=[0.25])
        assert not rep.passed
        assert rep.kappa_estimate <= 0.01

    def test_cantor_level6(self):
        grid = interval_grid(-0.5, 1.5, 3.0**-7)
        ns = build_cantor(6, grid, (0.0, 1.0))
        rep = porosity_check(ns, 1.0 / 6.0, scales=[3.0**-k for k in (1, 2, 3, 4)])
        assert rep.passed
        assert rep.kappa_estimate >= 1.0 / 6.0

    def test_witness_failures_reported(self):
        grid = interval_grid(-1.0, 1.0, 0.02)
        x = grid.axis(0)
        ns = NodeSet(grid, (x >= -0.5) & (x <= 0.5))
        rep = porosity_check(ns, 0.3, scales=[0.25])
        assert len(rep.witness_failures) > 0


class TestBoxDimension:
    def test_full_interval_is_one_dimensional(self):
        grid = interval_grid(0.0, 1.0, 1.0 / 512)
        ns = NodeSet(grid, np.ones(grid.shape, dtype=bool))
        slope = box_dimension_estimate(ns, [2.0**-k for k in (3, 4, 5, 6, 7)])
        assert slope == pytest.approx(1.0, abs=0.1)

    def test_singleton_is_zero_dimensional(self):
        grid = interval_grid(0.0, 1.0, 1.0 / 64)
        ns = NodeSet.from_coords(grid, [[0.5]])
        slope = box_dimension_estimate(ns, [0.05, 0.1, 0.2, 0.4])
        assert slope == pytest.approx(0.0, abs=0.05)

    def test_cantor_level7(self):
        grid = interval_grid(0.0, 1.0, 3.0**-8)
        ns = build_cantor(7, grid, (0.0, 1.0))
        slope = box_dimension_estimate(ns, [3.0**-k for k in (2, 3, 4, 5)])
        assert slope == pytest.approx(math.log(2.0) / math.log(3.0), abs=0.08)

    def test_insufficient_scales(self):
        grid = interval_grid(0.0, 1.0, 1.0 / 64)
        ns = NodeSet(grid, np.ones(grid.shape, dtype=bool))
        with pytest.raises(InsufficientScales):
            box_dimension_estimate(ns, [0.1, 0.12, 0.15, 0.2])


def test_porosity_implies_dimension_below_one():
    grid = interval_grid(-0.5, 1.5, 3.0**-7)
    ns = build_cantor(6, grid, (0.0, 1.0))
    rep = porosity_check(ns, 0.1, scales=[3.0**-k for k in (1, 2, 3)])
    assert rep.passed
    sub = interval_grid(0.0, 1.0, 3.0**-7)
    ns_unit = build_cantor(6, sub, (0.0, 1.0))
    slope = box_dimension_estimate(ns_unit, [3.0**-k for k in (2, 3, 4)] + [3.0**-5 * 2])
    assert slope < 1.0
