import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linklab.geometry import (
    DomainError,
    EmbeddedSphere,
    SingularInputError,
    ball_volume,
    embed,
    embed_jacobian,
    oriented_tangent_basis,
    reflect_abs,
    retract_complement,
    sample_param,
    sphere_volume,
    stereographic_lift,
    stereographic_project,
)


def unit_circle(n=2):
    return EmbeddedSphere(np.zeros(n), np.eye(n)[:2], np.array([1.0, 1.0]))


class TestEmbed:
    def test_axis_sphere_top(self, link13):
        # (0, 1) parametrizes the topmost point of the second component
        pt = embed(link13.component(2), np.array([0.0, 1.0]))
        assert np.allclose(pt, [0.0, 0.0, 3.0], atol=1e-12)

    def test_first_frame_direction(self, link24):
        for m in (1, 2, 3):
            s = link24.component(m)
            u = np.zeros(s.sphere_dim + 1)
            u[0] = 1.0
            assert np.allclose(embed(s, u), s.center + s.radii[0] * s.frame[0])

    def test_ellipsoid_top(self, link13):
        pt = embed(link13.component(3), np.array([0.0, 1.0]))
        assert np.allclose(pt, [0.0, 0.0, 4.0], atol=1e-12)
        assert link13.component(3).implicit_residual(pt[None, :])[0] < 1e-12

    def test_rejects_non_unit(self, link13):
        with pytest.raises(DomainError):
            embed(link13.component(2), np.array([0.5, 0.5]))

    def test_rejects_bad_dim(self, link13):
        with pytest.raises(DomainError):
            embed(link13.component(2), np.array([0.0, 0.0, 1.0]))

    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_residual_random_params(self, link24, m):
        s = link24.component(m)
        U = sample_param(3, s.sphere_dim, 10_000)
        assert float(np.max(s.implicit_residual(s.points(U)))) < 1e-10


class TestJacobian:
    def test_unit_circle_tangent(self):
        J = embed_jacobian(unit_circle(), np.array([1.0, 0.0]))
        assert J.shape == (2, 1)
        assert abs(abs(J[1, 0]) - 1.0) < 1e-12 and abs(J[0, 0]) < 1e-12

    def test_ellipsoid_semi_axis_scaling(self, link13):
        J = embed_jacobian(link13.component(3), np.array([1.0, 0.0]))
        # tangent at the short-axis point runs along the long axis, length 4
        assert np.allclose(np.abs(J[:, 0]), [0.0, 0.0, 4.0], atol=1e-12)

    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_matches_finite_differences(self, link24, m):
        s = link24.component(m)
        U = sample_param(11, s.sphere_dim, 50)
        h = 1e-5
        for u in U:
            J = embed_jacobian(s, u)
            T = oriented_tangent_basis(u)
            for col in range(T.shape[1]):
                up = u + h * T[:, col]
                um = u - h * T[:, col]
                fd = (s.points(up / np.linalg.norm(up))
                      - s.points(um / np.linalg.norm(um))) / (2 * h)
                denom = max(np.linalg.norm(J[:, col]), 1.0)
                assert np.linalg.norm(fd - J[:, col]) / denom < 1e-6

    def test_columns_orthogonal_to_quadric_gradient(self, link24):
        s = link24.component(3)
        U = sample_param(13, s.sphere_dim, 200)
        for u in U[:50]:
            x = s.points(u)
            grad = 2 * ((s.frame.T / s.radii**2) @ ((x - s.center) @ s.frame.T))
            J = embed_jacobian(s, u)
            assert float(np.max(np.abs(grad @ J))) < 1e-9


class TestTangentOrientation:
    @pytest.mark.parametrize("k", [1, 2, 3, 4])
    def test_positive_determinant(self, k):
        U = sample_param(7, k, 200)
        for u in U:
            T = oriented_tangent_basis(u)
            M = np.column_stack([u, T])
            assert abs(np.linalg.det(M) - 1.0) < 1e-10


class TestSampleParam:
    def test_deterministic(self):
        a = sample_param(7, 1, 4)
        b = sample_param(7, 1, 4)
        assert a.shape == (4, 2)
        assert np.array_equal(a, b)

    def test_unit_norm(self):
        U = sample_param(3, 4, 10_000)
        assert float(np.max(np.abs(np.linalg.norm(U, axis=1) - 1.0))) < 1e-12

    def test_mean_norm_law_of_large_numbers(self):
        U = sample_param(5, 2, 100_000)
        assert np.linalg.norm(U.mean(axis=0)) < 0.02

    def test_rejects_bad_args(self):
        with pytest.raises(DomainError):
            sample_param(0, -1, 5)
        with pytest.raises(DomainError):
            sample_param(0, 1, 0)


class TestStereographic:
    def test_equator_fixed(self):
        assert np.allclose(
            stereographic_lift(np.array([3.0, 0.0, 0.0]), 3.0), [3, 0, 0, 0]
        )

    def test_origin_to_south_pole(self):
        assert np.allclose(stereographic_lift(np.zeros(3), 3.0), [0, 0, 0, -3])

    def test_norm_and_collinearity(self):
        rng = np.random.default_rng(2)
        X = rng.standard_normal((10_000, 4)) * 3.0
        L = stereographic_lift(X, 3.0)
        assert float(np.max(np.abs(np.linalg.norm(L, axis=1) - 3.0))) < 1e-10
        # pole, (x, 0) and p(x) are collinear
        pole = np.zeros(5)
        pole[-1] = 3.0
        X0 = np.concatenate([X, np.zeros((X.shape[0], 1))], axis=1)
        v1 = X0 - pole
        v2 = L - pole
        cross = v1 * np.linalg.norm(v2, axis=1)[:, None] - v2 * (
            np.einsum("ij,ij->i", v1, v2) / np.linalg.norm(v2, axis=1)
        )[:, None]
        assert float(np.max(np.linalg.norm(cross, axis=1))) < 1e-9

    def test_far_points_approach_pole(self):
        big = stereographic_lift(np.array([1e9, 0.0, 0.0]), 3.0)
        assert np.allclose(big, [0, 0, 0, 3], atol=1e-6)

    def test_round_trip(self):
        rng = np.random.default_rng(8)
        X = rng.standard_normal((500, 3)) * 2.0
        back = stereographic_project(stereographic_lift(X, 3.0), 3.0)
        assert np.allclose(back, X, atol=1e-9)

    def test_project_rejects_pole(self):
        with pytest.raises(SingularInputError):
            stereographic_project(np.array([0.0, 0.0, 0.0, 3.0]), 3.0)


class TestReflect:
    def test_example(self):
        assert np.allclose(reflect_abs(np.array([1.0, 2.0, -3.0])), [1, 2, 3])

    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_preserves_components(self, link24, m):
        s = link24.component(m)
        X = s.points(sample_param(17, s.sphere_dim, 10_000))
        assert float(np.max(s.implicit_residual(reflect_abs(X)))) < 1e-10

    @given(st.lists(st.floats(-10, 10), min_size=1, max_size=6))
    @settings(max_examples=200, deadline=None)
    def test_idempotent(self, coords):
        x = np.array(coords)
        once = reflect_abs(x)
        assert np.array_equal(reflect_abs(once), once)


class TestRetract:
    def test_fixes_target(self):
        x = np.array([0.0, 0.0, 1.0])
        out = retract_complement(x, np.eye(3)[:2])
        assert np.allclose(out, x)

    def test_projects_and_renormalizes(self):
        out = retract_complement(np.array([0.6, 0.0, 0.8]), np.eye(3)[:2])
        assert np.allclose(out, [0, 0, 1], atol=1e-12)

    def test_singular_on_deleted_sphere(self):
        with pytest.raises(SingularInputError):
            retract_complement(np.array([1.0, 0.0, 0.0]), np.eye(3)[:2])

    def test_idempotent_and_in_target(self):
        rng = np.random.default_rng(4)
        V = np.eye(5)[:2]
        for _ in range(200):
            x = rng.standard_normal(5)
            x *= 3.0 / np.linalg.norm(x)
            try:
                y = retract_complement(x, V)
            except SingularInputError:
                continue
            assert np.linalg.norm(retract_complement(y, V) - y) < 1e-10
            assert abs(np.linalg.norm(y) - 3.0) < 1e-10
            assert float(np.max(np.abs(V @ y))) < 1e-10


class TestVolumes:
    def test_known_values(self):
        assert abs(sphere_volume(1) - 2 * np.pi) < 1e-12
        assert abs(sphere_volume(2) - 4 * np.pi) < 1e-12
        assert abs(ball_volume(2) - np.pi) < 1e-12
        assert abs(ball_volume(3) - 4 * np.pi / 3) < 1e-12


class TestSphereValidation:
    def test_rejects_non_orthonormal_frame(self):
        with pytest.raises(DomainError):
            EmbeddedSphere(np.zeros(3), np.array([[1.0, 0, 0], [1.0, 0, 0]]),
                           np.array([1.0, 1.0]))

    def test_rejects_nonpositive_radii(self):
        with pytest.raises(DomainError):
            EmbeddedSphere(np.zeros(3), np.eye(3)[:2], np.array([1.0, 0.0]))

    def test_zero_sphere_supported(self):
        s = EmbeddedSphere(np.zeros(3), np.eye(3)[:1], np.array([2.0]))
        assert s.sphere_dim == 0
        pts = s.points(np.array([[1.0], [-1.0]]))
        assert np.allclose(pts, [[2, 0, 0], [-2, 0, 0]])

    def test_reversed_same_point_set(self, link13):
        for m in (1, 2, 3):
            s = link13.component(m)
            r = s.reversed()
            X = s.points(sample_param(9, s.sphere_dim, 500))
            assert float(np.max(r.implicit_residual(X))) < 1e-10
