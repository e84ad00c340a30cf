import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracmax.errors import EmptyTarget, MaskMismatch
from fracmax.grid import (
    DomainMask,
    NodeSet,
    RadiusField,
    ScalarField,
    boundary_distance,
    distance_to_set,
    field_from_json,
    field_to_json,
    interval_grid,
    interval_mask,
    square_mask,
    sublevel_mask,
)


def brute_boundary_distance(mask):
    """Oracle: scan all outside nodes including the one-node virtual frame."""
    g = mask.grid
    coords = g.coords()
    inside = mask.inside.ravel()
    outside = [c for c, flag in zip(coords, inside) if not flag]
    # virtual frame nodes
    if g.dim == 1:
        xs = g.axis(0)
        outside.append(np.array([xs[0] - g.h]))
        outside.append(np.array([xs[-1] + g.h]))
    else:
        xs, ys = g.axis(0), g.axis(1)
        fx = np.concatenate([[xs[0] - g.h], xs, [xs[-1] + g.h]])
        fy = np.concatenate([[ys[0] - g.h], ys, [ys[-1] + g.h]])
        for x in fx:
            outside.append(np.array([x, fy[0]]))
            outside.append(np.array([x, fy[-1]]))
        for y in ys:
            outside.append(np.array([fx[0], y]))
            outside.append(np.array([fx[-1], y]))
    out = np.asarray(outside)
    vals = np.zeros(g.shape).ravel()
    for i, c in enumerate(coords):
        if inside[i]:
            vals[i] = np.min(np.linalg.norm(out - c, axis=1))
    return vals.reshape(g.shape)


class TestBoundaryDistance:
    def test_interval_matches_brute_force(self):
        mask = interval_mask(0.0, 1.0, 0.1)
        d = boundary_distance(mask).values
        assert d[5] == pytest.approx(0.6, abs=1e-12)
        assert np.allclose(d, brute_boundary_distance(mask), atol=1e-12)

    def test_whole_space_is_infinite(self):
        mask = interval_mask(0.0, 1.0, 0.1, whole_space=True)
        assert np.all(np.isinf(boundary_distance(mask).values))

    def test_adjacent_to_outside_is_h(self):
        mask = interval_mask(0.0, 1.0, 0.1)
        assert boundary_distance(mask).values[0] == pytest.approx(0.1, abs=1e-14)

    def test_2d_holed_mask_matches_brute_force(self, rng):
        base = square_mask(0.0, 1.0, 0.125)
        inside = np.array(base.inside)
        inside[2:4, 3:6] = False
        mask = DomainMask(base.grid, inside)
        d = boundary_distance(mask).values
        assert np.allclose(d, brute_boundary_distance(mask), atol=1e-12)

    def test_one_lipschitz_between_adjacent_nodes(self):
        mask = interval_mask(0.0, 2.0, 0.05)
        d = boundary_distance(mask).values
        assert np.all(np.abs(np.diff(d)) <= 0.05 + 1e-12)


class TestDistanceToSet:
    def test_singleton(self):
        mask = interval_mask(0.0, 1.0, 0.1)
        target = NodeSet.from_coords(mask.grid, [[0.0]])
        d = distance_to_set(mask, target).values
        assert d[3] == pytest.approx(0.3, abs=1e-12)

    def test_two_endpoints(self):
        mask = interval_mask(0.0, 1.0, 0.1)
        target = NodeSet.from_coords(mask.grid, [[0.0], [1.0]])
        assert distance_to_set(mask, target).values[4] == pytest.approx(0.4, abs=1e-12)

    def test_cantor_level3_matches_linear_scan(self, rng):
        from fracmax.geometry import build_cantor

        mask = interval_mask(0.0, 1.0, 1.0 / 243)
        target = build_cantor(3, mask.grid, (0.0, 1.0))
        d = distance_to_set(mask, target).values
        pts = target.coords()
        xs = mask.grid.coords()
        for i in rng.choice(len(xs), size=25, replace=False):
            brute = np.min(np.linalg.norm(pts - xs[i], axis=1))
            assert d.ravel()[i] == pytest.approx(brute, abs=1e-12)

    def test_empty_target_raises(self):
        mask = interval_mask(0.0, 1.0, 0.1)
        empty = NodeSet(mask.grid, np.zeros(mask.grid.shape, dtype=bool))
        with pytest.raises(EmptyTarget):
            distance_to_set(mask, empty)

    def test_union_is_pointwise_min(self):
        mask = interval_mask(0.0, 1.0, 0.05)
        a = NodeSet.from_coords(mask.grid, [[0.2]])
        b = NodeSet.from_coords(mask.grid, [[0.8], [0.5]])
        du = distance_to_set(mask, a.union(b)).values
        dm = np.minimum(distance_to_set(mask, a).values, distance_to_set(mask, b).values)
        assert np.allclose(du, dm, atol=1e-14)


class TestSublevelMask:
    def test_constant_below_threshold(self):
        mask = interval_mask(0.0, 1.0, 0.1)
        f = ScalarField(mask, np.ones(mask.grid.shape))
        assert sublevel_mask(f, 2.0).count == mask.n_inside

    def test_strict_inequality(self):
        mask = interval_mask(0.0, 1.0, 0.1)
        f = ScalarField(mask, np.ones(mask.grid.shape))
        assert sublevel_mask(f, 1.0).count == 0

    def test_distance_sublevel_is_open_interval(self):
        mask = interval_mask(0.0, 1.0, 0.01)
        target = NodeSet.from_coords(mask.grid, [[0.5]])
        d = distance_to_set(mask, target)
        e_t = sublevel_mask(d, 0.2)
        xs = mask.grid.axis(0)
        expected = (xs > 0.3) & (xs < 0.7)
        assert np.array_equal(e_t.member, expected)

    def test_monotone_in_threshold(self):
        mask = interval_mask(0.0, 1.0, 0.02)
        target = NodeSet.from_coords(mask.grid, [[0.5]])
        d = distance_to_set(mask, target)
        assert sublevel_mask(d, 0.1).issubset(sublevel_mask(d, 0.3))


@settings(max_examples=25, deadline=None)
@given(st.lists(st.booleans(), min_size=4, max_size=40).filter(any))
def test_boundary_distance_lipschitz_property(flags):
    grid = interval_grid(0.0, (len(flags) - 1) * 0.1, 0.1)
    mask = DomainMask(grid, np.array(flags, dtype=bool))
    d = boundary_distance(mask).values
    x = grid.axis(0)
    ins = np.flatnonzero(mask.inside)
    for i in ins:
        for j in ins:
            assert abs(d[i] - d[j]) <= abs(x[i] - x[j]) + 1e-12


class TestTypes:
    def test_radius_field_rejects_excess(self):
        mask = interval_mask(0.0, 1.0, 0.1)
        with pytest.raises(ValueError):
            RadiusField(mask, np.full(mask.grid.shape, 10.0))

    def test_radius_field_accepts_boundary_distance(self):
        mask = interval_mask(0.0, 1.0, 0.1)
        RadiusField(mask, boundary_distance(mask).values)

    def test_scalar_field_rejects_nan(self):
        mask = interval_mask(0.0, 1.0, 0.1)
        vals = np.zeros(mask.grid.shape)
        vals[3] = np.nan
        with pytest.raises(ValueError):
            ScalarField(mask, vals)

    def test_mask_mismatch_detected(self):
        a = interval_mask(0.0, 1.0, 0.1)
        b = interval_mask(0.0, 1.0, 0.05)
        with pytest.raises(MaskMismatch):
            a.require_compatible(b)

    def test_whole_space_mask_forces_all_inside(self):
        grid = interval_grid(0.0, 1.0, 0.1)
        partial = np.zeros(grid.shape, dtype=bool)
        partial[2] = True
        mask = DomainMask(grid, partial, represents_whole_space=True)
        assert mask.n_inside == grid.n_nodes


def test_field_json_round_trip_is_bit_identical(rng):
    mask = interval_mask(-1.0, 1.0, 0.125)
    f = ScalarField(mask, rng.standard_normal(mask.grid.shape))
    g = field_from_json(field_to_json(f))
    assert np.array_equal(f.values, g.values)
    assert g.mask.compatible(f.mask)
