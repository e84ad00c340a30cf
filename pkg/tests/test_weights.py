import math

import numpy as np
import pytest
from scipy import integrate

from fracmax.errors import SingularPoint
from fracmax.grid import interval_grid, square_grid
from fracmax.weights import (
    Weight,
    ap_constant_estimate,
    evaluate,
    reflect,
    tail_integrability,
    weight_from_spec,
)


class TestEvaluate:
    def test_constant(self):
        w = Weight.constant(1.0)
        assert evaluate(w, 0.7) == 1.0

    def test_power_origin_1d(self):
        w = Weight.power_origin(0.5, dim=1)
        assert evaluate(w, 2.0) == pytest.approx(2.0**-0.5, rel=1e-14)

    def test_power_dist(self):
        w = Weight.power_dist(0.5, [[0.0], [1.0]], dim=1)
        assert evaluate(w, 3.0) == pytest.approx(2.0**-0.5, rel=1e-14)

    def test_singular_point_raises(self):
        w = Weight.power_origin(0.5, dim=1)
        with pytest.raises(SingularPoint):
            evaluate(w, 0.0)

    def test_positive_power_defined_on_singular_set(self):
        w = Weight.power_origin(1.5, dim=1)
        assert evaluate(w, 0.0) == 0.0


def numeric_cube_product(eps, p, lo, hi):
    """Oracle: A_p product of |x|^(eps-1) on [lo, hi] via adaptive quadrature."""
    q1 = eps - 1.0
    q2 = -q1 / (p - 1.0)

    def power_int(q):
        pieces = []
        if lo < 0 < hi:
            pieces = [(lo, 0.0), (0.0, hi)]
        else:
            pieces = [(lo, hi)]
        total = 0.0
        for a, b in pieces:
            val, _ = integrate.quad(lambda u: abs(u) ** q, a, b, limit=400, points=[0.0] if a <= 0 <= b else None)
            total += val
        return total

    vol = hi - lo
    return (power_int(q1) / vol) * (power_int(q2) / vol) ** (p - 1.0)


def dyadic_sup_oracle(eps, p, a, max_level):
    best = 0.0
    for level in range(max_level + 1):
        n = 2**level
        side = 2.0 * a / n
        for i in range(n):
            lo = -a + i * side
            best = max(best, numeric_cube_product(eps, p, lo, lo + side))
    return best


class TestApEstimate:
    def test_constant_is_exactly_one(self):
        g = interval_grid(-1.0, 1.0, 0.1)
        for p in (1.5, 2.0, 3.0):
            for c in (0.5, 1.0, 7.0):
                assert ap_constant_estimate(Weight.constant(c), p, g, 3).value == 1.0

    def test_power_origin_matches_quadrature_oracle(self):
        g = interval_grid(-1.0, 1.0, 0.1)
        for eps in (0.3, 0.5, 0.8):
            est = ap_constant_estimate(Weight.power_origin(eps), 2.0, g, 3)
            oracle = dyadic_sup_oracle(eps, 2.0, 1.0, 3)
            assert est.value == pytest.approx(oracle, rel=1e-7)

    def test_symmetric_window_closed_form(self):
        # cubes pinned at the origin dominate: product = 1/(eps (2 - eps)) at p=2
        g = interval_grid(-2.0, 2.0, 0.1)
        for eps in (0.5, 1.5):
            est = ap_constant_estimate(Weight.power_origin(eps), 2.0, g, 6)
            assert est.value == pytest.approx(1.0 / (eps * (2.0 - eps)), rel=1e-12)

    def test_divergence_beyond_ap_range(self):
        # |x|^(eps-n) is A_p iff eps < n p; at and beyond that the conjugate
        # cube integral diverges and the estimate reports +inf
        g = interval_grid(-1.0, 1.0, 0.1)
        assert math.isinf(ap_constant_estimate(Weight.power_origin(2.5), 2.0, g, 3).value)
        assert math.isinf(ap_constant_estimate(Weight.power_origin(1.5), 1.5, g, 3).value)

    def test_value_at_least_one_and_monotone_in_level(self):
        g = interval_grid(-1.0, 1.0, 0.1)
        prev = 0.0
        for level in range(6):
            est = ap_constant_estimate(Weight.power_dist(0.6, [[-0.3], [0.4]]), 2.5, g, level)
            assert est.value >= 1.0 - 1e-12
            assert est.value >= prev - 1e-12
            prev = est.value

    def test_stabilizes_for_subcritical_power(self):
        g = interval_grid(-1.0, 1.0, 0.05)
        vals = [ap_constant_estimate(Weight.power_origin(0.5), 2.0, g, lv).value for lv in (6, 7)]
        assert abs(vals[1] - vals[0]) <= 0.05 * vals[0]

    def test_reflection_invariance(self):
        g = interval_grid(-1.0, 1.0, 0.1)
        w = Weight.power_dist(0.6, [[-0.25], [0.5]])
        a = ap_constant_estimate(w, 2.0, g, 4).value
        b = ap_constant_estimate(reflect(w), 2.0, g, 4).value
        assert a == pytest.approx(b, rel=1e-10)

    def test_2d_constant_and_power(self):
        g = square_grid(-1.0, 1.0, 0.25)
        assert ap_constant_estimate(Weight.constant(2.0, dim=2), 2.0, g, 2).value == 1.0
        vals = [
            ap_constant_estimate(Weight.power_origin(1.0, dim=2), 2.0, g, lv).value
            for lv in (2, 3)
        ]
        assert vals[0] >= 1.0
        # homogeneous weight: origin cubes dominate at every level
        assert vals[1] == pytest.approx(vals[0], rel=0.05)


class TestReflect:
    def test_constant_and_origin_fixed(self):
        assert reflect(Weight.constant(2.0)).c == 2.0
        w = Weight.power_origin(0.5)
        z = np.linspace(0.1, 2.0, 7).reshape(-1, 1)
        assert np.allclose(evaluate(reflect(w), z), evaluate(w, z))

    def test_symmetric_point_set_pointwise_equal(self):
        w = Weight.power_dist(0.5, [[-1.0], [1.0]])
        z = np.linspace(-3.0, 3.0, 41).reshape(-1, 1)
        z = z[np.abs(np.abs(z[:, 0]) - 1.0) > 1e-9]
        assert np.allclose(evaluate(reflect(w), z), evaluate(w, z), rtol=1e-13)


class TestTailIntegrability:
    WINDOWS = [2.0, 4.0, 8.0, 16.0, 32.0]

    def test_matches_analytic_criterion_on_sweep(self):
        # |x|^(eps-1-sp) is integrable at infinity iff eps < sp
        cases = [
            (eps, 0.5, 2.0)  # sp = 1.0
            for eps in (0.2, 0.35, 0.5, 0.65, 0.75, 1.3, 1.5, 1.7, 1.9, 2.1)
        ] + [
            (eps, 0.75, 2.0)  # sp = 1.5
            for eps in (0.2, 0.45, 0.7, 0.95, 1.2, 1.8, 2.0, 2.2, 2.4, 2.6)
        ]
        assert len(cases) == 20
        for eps, s, p in cases:
            got = tail_integrability(Weight.power_origin(eps), s, p, 1.0, self.WINDOWS)
            want = "finite" if eps < s * p else "infinite"
            assert got == want, (eps, s, p)

    def test_harmonic_tail_is_infinite(self):
        assert tail_integrability(Weight.constant(1.0), 0.5, 2.0, 1.0, self.WINDOWS) == "infinite"

    def test_constant_with_integrable_tail(self):
        assert tail_integrability(Weight.constant(1.0), 0.75, 2.0, 1.0, self.WINDOWS) == "finite"

    def test_power_dist_numeric_branch(self):
        w = Weight.power_dist(0.3, [[0.0], [0.5]], dim=1)
        assert tail_integrability(w, 0.5, 2.0, 1.0, self.WINDOWS) == "finite"


def test_weight_spec_parsing():
    w = weight_from_spec("const:2.5")
    assert w.kind == "constant" and w.c == 2.5
    w = weight_from_spec("pow:eps=0.5")
    assert w.kind == "power_origin" and w.eps == 0.5
    w = weight_from_spec("powdist:eps=0.4,set=somefile", loader=lambda path: [[0.0], [1.0]])
    assert w.kind == "power_dist" and w.points.shape == (2, 1)
