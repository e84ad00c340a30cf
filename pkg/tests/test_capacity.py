import numpy as np
import pytest

from fracmax.capacity import (
    CapacityProblem,
    capacity_energy,
    capacity_subadditivity_check,
    neighbourhood_family,
    solve_capacity,
    stationarity_residual,
)
from fracmax.errors import InstanceTooLarge
from fracmax.grid import (
    DomainMask,
    NodeSet,
    RadiusField,
    ScalarField,
    distance_to_set,
    interval_mask,
    sublevel_mask,
)
from fracmax.weights import Weight, reflect


def make_problem(n=16, s=0.5, p=2.0, weight=None, lp=False, e_idx=(3, 4), h_idx=None):
    mask = interval_mask(0.0, 1.0, 1.0 / (n - 1))
    member = np.zeros(mask.grid.shape, dtype=bool)
    for i in e_idx:
        member[i] = True
    E = NodeSet(mask.grid, member)
    H = None
    if h_idx is not None:
        hm = np.zeros(mask.grid.shape, dtype=bool)
        for i in h_idx:
            hm[i] = True
        H = NodeSet(mask.grid, hm)
    return CapacityProblem(
        G=mask,
        E=E,
        H=H,
        R=None,
        s=s,
        p=p,
        weight=weight or Weight.constant(1.0),
        include_lp_term=lp,
    )


class TestEnergy:
    def test_zero_field(self):
        prob = make_problem()
        z = ScalarField(prob.G, np.zeros(prob.G.grid.shape))
        assert capacity_energy(z, prob) == 0.0
        prob_lp = make_problem(lp=True)
        assert capacity_energy(z, prob_lp) == 0.0

    def test_indicator_brute_force(self):
        prob = make_problem(n=16, e_idx=(3, 9))
        phi_vals = np.where(prob.E.member, 1.0, 0.0)
        got = capacity_energy(ScalarField(prob.G, phi_vals), prob)
        x = prob.G.grid.axis(0)
        h = prob.G.grid.h
        total = 0.0
        for i in range(16):
            for j in range(16):
                if i == j:
                    continue
                total += abs(phi_vals[i] - phi_vals[j]) ** 2 / abs(x[i] - x[j]) ** 1.0 * h * h
        assert got == pytest.approx(total, rel=1e-12)

    def test_truncation_never_increases(self, rng):
        prob = make_problem(n=14, weight=Weight.power_origin(0.5), lp=True, p=2.0)
        for _ in range(200):
            raw = 2.0 * rng.standard_normal(prob.G.grid.shape)
            truncated = np.minimum(1.0, np.abs(raw))
            e_raw = capacity_energy(ScalarField(prob.G, raw), prob)
            e_tr = capacity_energy(ScalarField(prob.G, truncated), prob)
            assert e_tr <= e_raw + 1e-12


class TestSolve:
    def test_all_nodes_constrained(self):
        n = 12
        prob = make_problem(n=n, e_idx=tuple(range(n)))
        sol = solve_capacity(prob)
        assert np.allclose(sol.minimizer.values, 1.0)
        assert sol.value == pytest.approx(0.0, abs=1e-12)
        prob_lp = make_problem(n=n, e_idx=tuple(range(n)), lp=True)
        sol_lp = solve_capacity(prob_lp)
        h = prob_lp.G.grid.h
        assert sol_lp.value == pytest.approx(n * h, rel=1e-10)

    def test_dual_route_pgd_matches_linear(self):
        prob = make_problem(n=12, e_idx=(5, 6), h_idx=(3, 4, 5, 6, 7, 8))
        exact = solve_capacity(prob)
        iterative = solve_capacity(prob, force_pgd=True)
        assert iterative.value == pytest.approx(exact.value, rel=1e-6)

    def test_monotone_in_h(self, rng):
        vals = []
        for h_idx in ((4, 5, 6, 7), (3, 4, 5, 6, 7, 8), tuple(range(2, 12))):
            prob = make_problem(n=14, e_idx=(5, 6), h_idx=h_idx)
            vals.append(solve_capacity(prob).value)
        assert vals[0] >= vals[1] >= vals[2] - 1e-12

    def test_monotone_in_e(self):
        small = solve_capacity(make_problem(n=14, e_idx=(5,))).value
        large = solve_capacity(make_problem(n=14, e_idx=(5, 6, 7))).value
        assert small <= large + 1e-10

    def test_value_equals_energy_of_minimizer(self):
        for p, lp in ((2.0, False), (2.0, True), (1.5, False), (3.0, True)):
            prob = make_problem(n=14, p=p, lp=lp, weight=Weight.power_origin(0.5))
            sol = solve_capacity(prob)
            direct = capacity_energy(sol.minimizer, prob)
            assert sol.value == pytest.approx(direct, rel=1e-10)

    def test_minimizer_in_unit_interval_and_constraints(self):
        prob = make_problem(n=20, e_idx=(8, 9), h_idx=tuple(range(5, 14)))
        sol = solve_capacity(prob)
        v = sol.minimizer.values
        assert np.all(v >= -1e-15) and np.all(v <= 1.0 + 1e-15)
        assert np.all(v[list(prob.E.member.nonzero()[0])] == 1.0)
        outside_h = prob.G.inside & ~prob.H.member
        assert np.all(v[outside_h] == 0.0)

    def test_stationarity_residual_small(self):
        prob = make_problem(n=24, e_idx=(10, 11), h_idx=tuple(range(6, 18)))
        sol = solve_capacity(prob)
        assert stationarity_residual(prob, sol) < 1e-10

    def test_reflect_invariance(self):
        w = Weight.power_dist(0.6, [[-0.2], [0.4]])
        prob = make_problem(n=18, weight=w)
        a = solve_capacity(prob).value
        prob_r = CapacityProblem(prob.G, prob.E, prob.H, prob.R, prob.s, prob.p, reflect(w), False)
        b = solve_capacity(prob_r).value
        assert a == pytest.approx(b, rel=1e-8)

    def test_instance_cap(self):
        mask = interval_mask(0.0, 1.0, 1.0 / 5000)
        member = np.zeros(mask.grid.shape, dtype=bool)
        member[0] = True
        prob = CapacityProblem(mask, NodeSet(mask.grid, member), None, None, 0.5, 2.0, Weight.constant(1.0), False)
        with pytest.raises(InstanceTooLarge):
            solve_capacity(prob)

    def test_zero_radius_equals_no_radius(self):
        base = make_problem(n=14, e_idx=(5, 6), h_idx=tuple(range(3, 10)))
        with_zero = CapacityProblem(
            base.G,
            base.E,
            base.H,
            RadiusField(base.G, np.zeros(base.G.grid.shape)),
            base.s,
            base.p,
            base.weight,
            False,
        )
        a = solve_capacity(base).value
        b = solve_capacity(with_zero).value
        assert a == pytest.approx(b, rel=1e-12)


class TestSubadditivity:
    def test_identical_sets(self):
        base = make_problem(n=16, lp=True, p=2.0)
        rep = capacity_subadditivity_check(base.E, base.E, base)
        assert rep["subadditive"]

    def test_disjoint_singletons(self):
        mask = interval_mask(0.0, 1.0, 1.0 / 15)
        e1 = np.zeros(mask.grid.shape, dtype=bool)
        e1[2] = True
        e2 = np.zeros(mask.grid.shape, dtype=bool)
        e2[13] = True
        base = CapacityProblem(
            mask, NodeSet(mask.grid, e1), None, None, 0.5, 2.0, Weight.constant(1.0), True
        )
        rep = capacity_subadditivity_check(NodeSet(mask.grid, e1), NodeSet(mask.grid, e2), base)
        assert rep["subadditive"]
        assert rep["slack"] >= -1e-9

    def test_nested_sets(self):
        mask = interval_mask(0.0, 1.0, 1.0 / 15)
        small = np.zeros(mask.grid.shape, dtype=bool)
        small[6] = True
        big = np.array(small)
        big[5] = big[7] = True
        base = CapacityProblem(
            mask, NodeSet(mask.grid, small), None, None, 0.5, 2.0, Weight.constant(1.0), True
        )
        rep = capacity_subadditivity_check(NodeSet(mask.grid, small), NodeSet(mask.grid, big), base)
        assert rep["subadditive"]


class TestNeighbourhoods:
    def test_distance_radius_coincide(self):
        # whole-space window: R = dist(., E) is admissible unclipped, and the
        # two neighborhood constructions agree node-exactly by definition
        mask = interval_mask(0.0, 1.0, 1.0 / 64, whole_space=True)
        E = NodeSet.from_coords(mask.grid, [[0.5]])
        R = RadiusField(mask, distance_to_set(mask, E).values)
        e_t, e_tr = neighbourhood_family(E, mask, R, 0.125)
        assert np.array_equal(e_t.member, e_tr.member)

    def test_large_t_covers_everything(self):
        mask = interval_mask(0.0, 1.0, 1.0 / 32)
        E = NodeSet.from_coords(mask.grid, [[0.5]])
        R = RadiusField(mask, np.zeros(mask.grid.shape))
        e_t, e_tr = neighbourhood_family(E, mask, R, 10.0)
        assert e_t.count == mask.n_inside
        assert e_tr.count == mask.n_inside

    def test_power_radius_rescales_threshold(self):
        from fracmax.geometry import build_cantor, holder_radius

        mask = interval_mask(-0.5, 1.5, 1.0 / 729, whole_space=True)
        E = build_cantor(3, mask.grid, (0.0, 1.0))
        alpha = 0.5
        R, _ = holder_radius(E, mask, alpha, scale=1.0)
        t = 0.2
        e_tr = neighbourhood_family(E, mask, R, t)[1]
        e_pow = sublevel_mask(distance_to_set(mask, E), t ** (1.0 / alpha))
        # on a whole-space window the clip never activates, so the threshold
        # rescaling R < t iff dist < t^(1/alpha) is node-exact
        assert np.array_equal(e_tr.member, e_pow.member)
