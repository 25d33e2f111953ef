import math

import numpy as np
import pytest

from conftest import ball_grid, grid_min_distance, sphere_grid
from linklab.catalog import bounding_balls, build_family, cap_upper_half
from linklab.distance import min_distance
from linklab.geometry import EmbeddedSphere

# analytic minima for default coefficients (2, 3, 1, 4), any valid (i, j, n):
#   ball 1 vs component 2:  c2 - c1 = 1
#   ball 2 vs component 3:  sqrt(c3^2 a^2 + (c2 - c4 sqrt(1-a^2))^2) minimized
#                           at sqrt(1-a^2) = c2 c4/(c4^2-c3^2) -> sqrt(0.4)
#   ball 3 vs component 1:  c1 - c3 = 1
BALL2_VS_ELL = math.sqrt(0.4)


class TestAnalyticValues:
    def test_ball1_vs_component2(self, link13):
        balls = bounding_balls(link13)
        res = min_distance(balls[0], link13.component(2), seed=1)
        assert abs(res.distance - 1.0) < 1e-6
        assert res.converged
        wa, wb = res.witness
        # witness at (0, +-2, 0) and (0, +-3, 0), up to sign symmetry
        assert abs(abs(wa[1]) - 2.0) < 1e-6 and abs(wa[0]) < 1e-6
        assert abs(abs(wb[1]) - 3.0) < 1e-6

    @pytest.mark.parametrize("family", [(1, 0, 3), (2, 0, 4), (3, 0, 5), (2, 1, 5)])
    def test_all_split_distances(self, family):
        i, j, n = family
        link = build_family(i, j, n)
        balls = bounding_balls(link)
        d12 = min_distance(balls[0], link.component(2), seed=1).distance
        d23 = min_distance(balls[1], link.component(3), seed=1).distance
        d31 = min_distance(balls[2], link.component(1), seed=1).distance
        assert abs(d12 - 1.0) < 1e-6
        assert abs(d23 - BALL2_VS_ELL) < 1e-6
        assert abs(d31 - 1.0) < 1e-6

    def test_parallel_translates(self):
        a = EmbeddedSphere(np.zeros(3), np.eye(3)[:2], np.array([1.0, 1.0]))
        b = EmbeddedSphere(np.array([0, 0, 5.0]), np.eye(3)[:2],
                           np.array([1.0, 1.0]))
        assert abs(min_distance(a, b).distance - 5.0) < 1e-9

    def test_component1_vs_ball3(self, link13):
        balls = bounding_balls(link13)
        res = min_distance(link13.component(1), balls[2], seed=3)
        assert abs(res.distance - 1.0) < 1e-6


class TestIndependentOracles:
    def test_ball1_vs_component2_grid(self, link13):
        # dense structured grid: 10^6 pairs over (disk radius, disk angle)
        # x (circle angle)
        balls = bounding_balls(link13)
        r = np.linspace(0.0, 1.0, 50)
        th = np.linspace(0.0, 2 * np.pi, 200, endpoint=False)
        R, T = np.meshgrid(r, th)
        V = np.column_stack([(R * np.cos(T)).ravel(), (R * np.sin(T)).ravel()])
        pa = balls[0].points(V)
        ph = np.linspace(0.0, 2 * np.pi, 100, endpoint=False)
        pb = link13.component(2).points(np.column_stack([np.cos(ph), np.sin(ph)]))
        oracle = grid_min_distance(pa, pb)
        opt = min_distance(balls[0], link13.component(2), seed=2).distance
        assert opt <= oracle + 1e-9
        assert oracle - opt < 5e-3

    def test_ball1_vs_component2_global_optimizer(self, link13):
        # independent route: scipy differential evolution on the raw
        # three-parameter distance
        from scipy.optimize import differential_evolution

        def f(z):
            r, t, p = z
            a = np.array([2.0 * r * np.cos(t), 2.0 * r * np.sin(t), 0.0])
            b = np.array([0.0, 3.0 * np.cos(p), 3.0 * np.sin(p)])
            return float(np.sum((a - b) ** 2))

        res = differential_evolution(
            f, [(0, 1), (0, 2 * np.pi), (0, 2 * np.pi)], seed=3, tol=1e-12,
            polish=True,
        )
        opt = min_distance(bounding_balls(link13)[0], link13.component(2),
                           seed=2).distance
        assert abs(np.sqrt(res.fun) - opt) < 1e-6
        assert abs(opt - 1.0) < 1e-6

    def test_capped_vs_axis_sphere(self, link13, capped13):
        # the closest pair sits on the upper half of the ellipsoid at
        # (0.6, 0, 3.2) against (0, 0, 3): distance sqrt(0.4)
        capped, _ = capped13
        opt = min_distance(capped, link13.component(2), seed=2)
        assert abs(opt.distance - BALL2_VS_ELL) < 1e-6
        wa, wb = opt.witness
        assert abs(abs(wa[0]) - 0.6) < 1e-5 and abs(wa[2] - 3.2) < 1e-5
        assert abs(wb[2] - 3.0) < 1e-5

        from scipy.optimize import differential_evolution

        def f(z):
            t, p = z  # upper-half ellipse angle, circle angle
            a = np.array([np.cos(t), 0.0, 4.0 * np.sin(t)])
            b = np.array([0.0, 3.0 * np.cos(p), 3.0 * np.sin(p)])
            return float(np.sum((a - b) ** 2))

        res = differential_evolution(f, [(0, np.pi), (0, 2 * np.pi)], seed=3,
                                     tol=1e-12, polish=True)
        assert abs(np.sqrt(res.fun) - opt.distance) < 1e-6


class TestOptimizerContract:
    def test_symmetry(self, link13):
        balls = bounding_balls(link13)
        d_ab = min_distance(balls[0], link13.component(2), seed=5).distance
        d_ba = min_distance(link13.component(2), balls[0], seed=6).distance
        assert abs(d_ab - d_ba) < 1e-9

    def test_monotone_in_budget(self, link24):
        d_small = min_distance(link24.component(1), link24.component(3),
                               budget=4, seed=9).distance
        d_large = min_distance(link24.component(1), link24.component(3),
                               budget=64, seed=9).distance
        assert d_large <= d_small + 1e-12

    def test_triangle_sanity(self, link13):
        c1, c2, c3 = (link13.component(m) for m in (1, 2, 3))
        d12 = min_distance(c1, c2, seed=1).distance
        d13 = min_distance(c1, c3, seed=1).distance
        d23 = min_distance(c2, c3, seed=1).distance
        diam3 = 2.0 * float(np.max(c3.radii))
        assert d12 <= d13 + d23 + diam3 + 1e-9

    def test_gradient_tolerance_reported(self, link13):
        res = min_distance(link13.component(1), link13.component(2), seed=7)
        assert res.converged and res.grad_norm < 1e-10

    def test_intersecting_sets_give_zero(self, link13):
        # the ellipsoid meets ball 1 (it pierces the equatorial disk)
        balls = bounding_balls(link13)
        res = min_distance(balls[0], link13.component(3), seed=1)
        assert res.distance < 1e-8
