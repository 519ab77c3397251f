import numpy as np
import pytest

from conftest import analytic_sphere_margin, random_sphere_cases, separated_conjunction, sphere_conjunction
from ellipsoid_margin.constants import MarginMethod
from ellipsoid_margin.geometry import contains, miss_distance
from ellipsoid_margin.oracle import OracleOptions, is_near_tangent, relative_error, solve_oracle
from ellipsoid_margin.overlap import overlap_test


class TestSolveOracle:
    def test_unit_spheres(self, unit_spheres_3km):
        result = solve_oracle(unit_spheres_3km)
        assert result.method is MarginMethod.ORACLE
        assert result.converged
        assert result.margin == pytest.approx(1.0, abs=1e-12)

    def test_random_spheres(self, rng):
        for c, r1, r2 in random_sphere_cases(rng, 100):
            assert solve_oracle(c).margin == pytest.approx(analytic_sphere_margin(c, r1, r2), abs=1e-9)

    def test_overlap(self):
        result = solve_oracle(sphere_conjunction(0.5, 2.0, 1.0))
        assert result.overlap
        assert result.margin == 0.0

    def test_closest_points_are_mutual_projections(self, rng):
        checked = 0
        for i in range(50):
            c = separated_conjunction(rng, i)
            result = solve_oracle(c)
            if result.overlap:
                continue
            checked += 1
            x, y = np.array(result.x_star), np.array(result.y_star)
            assert c.chaser.quadratic_form(x) == pytest.approx(1.0, abs=1e-8)
            assert c.target.quadratic_form(y) == pytest.approx(1.0, abs=1e-8)
            # x − y は chaser の外向き法線と逆向き
            normal = c.chaser.shape @ (x - c.chaser.center)
            cosine = (y - x) @ normal / (np.linalg.norm(y - x) * np.linalg.norm(normal))
            assert cosine == pytest.approx(1.0, abs=1e-4)
        assert checked > 0

    def test_max_iter(self, rng):
        c = separated_conjunction(rng, 0)
        result = solve_oracle(c, OracleOptions(tol=0.0, max_iter=2))
        assert not result.converged
        assert result.iterations == 2
        assert "max_iter" in result.message


class TestHelpers:
    def test_relative_error_is_signed(self):
        assert relative_error(1.5, 1.0) == pytest.approx(0.5)
        assert relative_error(1.0, 1.5) == pytest.approx(-0.5)

    def test_near_tangent(self):
        assert is_near_tangent(overlap_test(sphere_conjunction(2.0)))
        assert not is_near_tangent(overlap_test(sphere_conjunction(3.0)))
        assert not is_near_tangent(overlap_test(sphere_conjunction(1.0)))


class TestRandomSuite:
    def test_margin_never_exceeds_miss_distance(self, acceptance_suite):
        for case in acceptance_suite:
            if case.oracle is not None:
                assert case.oracle.margin <= miss_distance(case.conjunction) + 1e-9

    def test_closest_points_feasible(self, acceptance_suite):
        for case in acceptance_suite:
            if case.oracle is not None and not case.oracle.overlap:
                assert contains(case.conjunction.chaser, case.oracle.x_star, 1e-9)
                assert contains(case.conjunction.target, case.oracle.y_star, 1e-9)
