import math

import numpy as np
import pytest

from conftest import (SUITE_SIZE, analytic_sphere_margin, random_sphere_cases, separated_conjunction,
                      sphere_conjunction)
from ellipsoid_margin.constants import MarginMethod
from ellipsoid_margin.errors import CoincidentIterates, DegenerateDirection
from ellipsoid_margin.frank_wolfe import FwOptions, duality_gap, line_search_alpha, lmo, solve_fw
from ellipsoid_margin.geometry import Conjunction, Ellipsoid, contains, is_feasible_pair, miss_distance
from ellipsoid_margin.oracle import solve_oracle


class TestLmo:
    def test_sphere_support_points(self, unit_spheres_3km):
        pair = lmo(unit_spheres_3km, [0.0, 0.0, 0.0], [3.0, 0.0, 0.0])
        np.testing.assert_allclose(pair.s1, [1.0, 0.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(pair.s2, [2.0, 0.0, 0.0], atol=1e-12)

    def test_points_on_boundary(self, rng):
        for i in range(20):
            c = separated_conjunction(rng, i)
            pair = lmo(c, c.chaser.center, c.target.center)
            assert c.chaser.quadratic_form(pair.s1) == pytest.approx(1.0, abs=1e-9)
            assert c.target.quadratic_form(pair.s2) == pytest.approx(1.0, abs=1e-9)

    def test_coincident_iterates(self, unit_spheres_3km):
        with pytest.raises(CoincidentIterates):
            lmo(unit_spheres_3km, [1.0, 0.0, 0.0], [1.0, 0.0, 0.0])


class TestLineSearch:
    def test_clipped_to_one(self):
        # 球ペアでは1ステップで境界点に到達
        assert line_search_alpha([0.0, 0.0, 0.0], [3.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]) == 1.0

    def test_interior_step(self):
        # r = (−4,0,0), p = (−1,0,0): α = 12/9 → 1 でクリップされない例
        alpha = line_search_alpha([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, -1.0, 0.0])
        assert 0.0 <= alpha <= 1.0

    def test_degenerate_direction(self):
        with pytest.raises(DegenerateDirection):
            line_search_alpha([1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0])


class TestSolveFw:
    def test_unit_spheres(self, unit_spheres_3km):
        result = solve_fw(unit_spheres_3km)
        assert result.method is MarginMethod.FRANK_WOLFE
        assert result.margin == pytest.approx(1.0, abs=1e-9)
        assert result.converged
        assert not result.overlap
        np.testing.assert_allclose(result.x_star, [1.0, 0.0, 0.0], atol=1e-9)
        np.testing.assert_allclose(result.y_star, [2.0, 0.0, 0.0], atol=1e-9)

    def test_random_spheres_match_closed_form(self, rng):
        for c, r1, r2 in random_sphere_cases(rng, 100):
            result = solve_fw(c)
            assert result.margin == pytest.approx(analytic_sphere_margin(c, r1, r2), abs=1e-9)

    def test_overlap_returns_shared_point(self):
        c = sphere_conjunction(1.0)
        result = solve_fw(c)
        assert result.overlap
        assert result.margin == 0.0
        assert result.duality_gap == 0.0
        assert result.x_star == result.y_star
        assert contains(c.chaser, result.x_star, 1e-9) and contains(c.target, result.x_star, 1e-9)

    def test_tangent_spheres(self):
        result = solve_fw(sphere_conjunction(2.0))
        assert result.overlap and result.margin == 0.0

    def test_iterates_feasible_and_descending(self, rng):
        for i in range(10):
            c = separated_conjunction(rng, i)
            states = []
            solve_fw(c, FwOptions(tol_step=1e-9), on_iterate=states.append)
            assert states[0].k == 0
            np.testing.assert_array_equal(states[0].x, c.chaser.center)
            for prev, state in zip(states, states[1:]):
                assert is_feasible_pair(c, state.x, state.y)
                assert state.objective <= prev.objective + 1e-12 * (1.0 + prev.objective)

    def test_gap_bounds_suboptimality(self, rng):
        for i in range(10):
            c = separated_conjunction(rng, i)
            truth = solve_oracle(c).margin
            states = []
            solve_fw(c, FwOptions(tol_step=1e-9), on_iterate=states.append)
            for state in states[::max(1, len(states) // 10)]:
                gap = duality_gap(state.x, state.y, lmo(c, state.x, state.y))
                assert gap >= state.objective - truth ** 2 - 1e-7

    def test_agrees_with_oracle(self, rng):
        for i in range(20):
            c = separated_conjunction(rng, i)
            result = solve_fw(c, FwOptions(tol_step=1e-9))
            assert result.converged
            assert result.margin == pytest.approx(solve_oracle(c).margin, abs=1e-4)
            assert result.duality_gap >= -1e-9

    def test_max_iter_reported(self, unit_spheres_3km):
        result = solve_fw(unit_spheres_3km, FwOptions(tol_step=1e-3, max_iter=1))
        assert not result.converged
        assert result.iterations == 1
        assert "max_iter" in result.message
        assert math.isfinite(result.margin)


class TestRandomSuite:
    def test_agrees_with_oracle(self, acceptance_suite, fw_suite_run):
        errors = [abs(result.margin - case.oracle.margin)
                  for case, result in zip(acceptance_suite, fw_suite_run.results) if not case.near_tangent]
        assert len(errors) >= 0.99 * len(acceptance_suite)
        assert max(errors) <= 1e-3

    def test_margin_never_exceeds_miss_distance(self, acceptance_suite, fw_suite_run):
        for case, result in zip(acceptance_suite, fw_suite_run.results):
            assert result.margin <= miss_distance(case.conjunction) + 1e-9

    def test_gap_certifies_convergence(self, acceptance_suite, fw_suite_run):
        for case, result in zip(acceptance_suite, fw_suite_run.results):
            if result.converged and not result.overlap and not case.near_tangent:
                assert -1e-9 <= result.duality_gap <= 1e-6

    def test_converges_at_default_options(self, acceptance_suite, fw_suite_run):
        disjoint = [result for case, result in zip(acceptance_suite, fw_suite_run.results)
                    if not case.near_tangent and not result.overlap]
        assert disjoint
        assert sum(result.converged for result in disjoint) >= 0.99 * len(disjoint)

    def test_throughput(self, fw_suite_run):
        assert len(fw_suite_run.results) == SUITE_SIZE
        assert fw_suite_run.elapsed <= 10.0

    def test_descent_and_feasibility(self, acceptance_suite):
        checked = 0
        for case in acceptance_suite[:100]:
            if case.report.overlapping:
                continue
            c = case.conjunction
            states = []
            solve_fw(c, on_iterate=states.append)
            for prev, state in zip(states, states[1:]):
                assert is_feasible_pair(c, state.x, state.y)
                assert state.objective <= prev.objective + 1e-12 * (1.0 + prev.objective)
            checked += 1
        assert checked > 0


def test_converged_result_is_gap_certified():
    # 細長い楕円体がわずかに傾いて近接するペア
    tilt = np.radians(5.0)
    rot = np.array([[np.cos(tilt), 0.0, np.sin(tilt)], [0.0, 1.0, 0.0], [-np.sin(tilt), 0.0, np.cos(tilt)]])
    cigar = np.diag([100.0, 0.01, 0.01])
    c = Conjunction(id="cigars",
                    chaser=Ellipsoid.from_covariance([0.0, 0.0, 0.0], cigar),
                    target=Ellipsoid.from_covariance([0.0, 0.5, 0.0], rot @ cigar @ rot.T))
    states = []
    result = solve_fw(c, on_iterate=states.append)
    assert not result.overlap
    assert result.converged
    assert result.duality_gap <= FwOptions().tol_gap
    assert states[-1].duality_gap == result.duality_gap
    assert result.margin == pytest.approx(solve_oracle(c).margin, abs=1e-3)
