import math

import numpy as np
import pytest
from scipy import integrate

from spherecalib.errors import DomainError, InvalidSpec, SingularPoint
from spherecalib.sphere import (
    BallSpec,
    GeodesicRay,
    SpherePoint,
    TangentVector,
    dist,
    dist_many,
    exp_map,
    gamma_of,
    grad_dist,
    law_of_cosines_residuals,
    make_spec,
    sin_power_integral,
    tangent_toward,
    unit_sphere_area,
    vol_ball,
)

RNG = np.random.default_rng(1234)


def random_point(d=6):
    v = RNG.standard_normal(d)
    return SpherePoint(v / np.linalg.norm(v))


class TestSinPowerIntegral:
    def test_base_cases(self):
        r = np.linspace(0.0, math.pi, 50)
        assert np.allclose(sin_power_integral(2, r), 1.0 - np.cos(r), atol=1e-14)
        assert np.allclose(
            sin_power_integral(3, r), (r - np.sin(r) * np.cos(r)) / 2.0, atol=1e-14
        )

    def test_pinned_values(self):
        assert sin_power_integral(4, math.pi / 3) == pytest.approx(5.0 / 24.0, abs=1e-14)
        assert sin_power_integral(4, math.pi) == pytest.approx(4.0 / 3.0, abs=1e-14)
        assert sin_power_integral(6, math.pi) == pytest.approx(16.0 / 15.0, abs=1e-14)

    def test_against_quadrature(self):
        for k in range(2, 11):
            for r in np.linspace(0.05, math.pi, 23):
                ref, _ = integrate.quad(lambda t: math.sin(t) ** (k - 1), 0.0, r)
                assert sin_power_integral(k, r) == pytest.approx(ref, abs=1e-12)

    def test_reduction_identity(self):
        # I_k = -cos(r) sin^(k-2)(r)/(k-1) + (k-2)/(k-1) I_(k-2)
        r = np.linspace(1e-3, math.pi, 50)
        for k in range(4, 11):
            lhs = sin_power_integral(k, r)
            rhs = (-np.cos(r) * np.sin(r) ** (k - 2) / (k - 1)
                   + (k - 2) / (k - 1) * sin_power_integral(k - 2, r))
            assert np.max(np.abs(lhs - rhs)) < 1e-14

    def test_reduction_coefficient_is_one_over_k_minus_one(self):
        # the 1/(k-2) variant of the reduction is wrong by a finite amount
        k, r = 4, 1.2
        good = (-math.cos(r) * math.sin(r) ** 2 / (k - 1)
                + (k - 2) / (k - 1) * sin_power_integral(2, r))
        bad = (-math.cos(r) * math.sin(r) ** 2 / (k - 2)
               + (k - 2) / (k - 1) * sin_power_integral(2, r))
        exact = sin_power_integral(4, r)
        assert good == pytest.approx(exact, abs=1e-14)
        assert abs(bad - exact) > 1e-3

    def test_small_radius_relative_accuracy(self):
        # leading order I_k(r) = r^k / k
        for k in (2, 4, 6, 8):
            r = 1e-5
            assert sin_power_integral(k, r) == pytest.approx(r**k / k, rel=1e-9)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            sin_power_integral(1, 0.5)
        with pytest.raises(DomainError):
            sin_power_integral(4, 3.5)
        with pytest.raises(DomainError):
            sin_power_integral(4, -0.1)


class TestVolumes:
    def test_unit_sphere_area(self):
        assert unit_sphere_area(1) == pytest.approx(2 * math.pi, abs=1e-14)
        assert unit_sphere_area(2) == pytest.approx(4 * math.pi, abs=1e-14)
        assert unit_sphere_area(3) == pytest.approx(2 * math.pi**2, abs=1e-13)
        assert unit_sphere_area(0) == pytest.approx(2.0, abs=1e-14)

    def test_vol_ball_full_sphere(self):
        assert vol_ball(2, math.pi) == pytest.approx(4 * math.pi, rel=1e-13)
        assert vol_ball(3, math.pi) == pytest.approx(2 * math.pi**2, rel=1e-13)

    def test_vol_ball_small_radius_flat_limit(self):
        # geodesic balls look euclidean at small radius
        r = 1e-4
        assert vol_ball(2, r) == pytest.approx(math.pi * r**2, rel=1e-6)
        assert vol_ball(3, r) == pytest.approx(4.0 / 3.0 * math.pi * r**3, rel=1e-6)


class TestPointsAndDistances:
    def test_unit_norm_enforced(self):
        with pytest.raises(InvalidSpec):
            SpherePoint(np.array([1.0, 1.0, 0.0]))

    def test_dist_symmetry_and_range(self):
        for _ in range(20):
            a, b = random_point(), random_point()
            d = dist(a, b)
            assert d == pytest.approx(dist(b, a), abs=1e-15)
            assert 0.0 <= d <= math.pi

    def test_dist_small_separation_accuracy(self):
        a = random_point()
        v = tangent_toward(a, random_point())
        for t in (1e-3, 1e-5, 1e-7):
            b = exp_map(a, v, t)
            assert dist(a, b) == pytest.approx(t, rel=1e-10)

    def test_dist_many_matches_dist(self):
        q = random_point()
        pts = np.array([random_point().coords for _ in range(30)])
        r = dist_many(q.coords, pts)
        for i in range(30):
            assert r[i] == pytest.approx(dist(q, SpherePoint(pts[i])), abs=1e-14)

    def test_exp_map_inverts_distance(self):
        a = random_point()
        b = random_point()
        v = tangent_toward(a, b)
        d = dist(a, b)
        c = exp_map(a, v, d)
        assert dist(b, c) < 1e-12

    def test_grad_dist_directional_derivative(self):
        center = random_point()
        q = random_point()
        g = grad_dist(center, q)
        eps = 1e-6
        forward = dist(center, exp_map(q, g, eps))
        back = dist(center, exp_map(q, g, -eps))
        assert (forward - back) / (2 * eps) == pytest.approx(1.0, abs=1e-8)

    def test_grad_dist_is_tangent_unit(self):
        center, q = random_point(), random_point()
        g = grad_dist(center, q)
        assert abs(g.vec @ q.coords) < 1e-12
        assert np.linalg.norm(g.vec) == pytest.approx(1.0, abs=1e-12)

    def test_grad_dist_singular_at_center(self):
        a = random_point()
        with pytest.raises(SingularPoint):
            grad_dist(a, a)
        with pytest.raises(SingularPoint):
            grad_dist(a, a.antipode())


class TestSpecAndRay:
    def test_make_spec_defaults(self):
        spec = make_spec(4, 0.9)
        assert spec.n == 5
        assert spec.k == 4
        assert dist(spec.p, spec.y) == pytest.approx(0.9, abs=1e-12)

    def test_make_spec_rejects_bad_input(self):
        with pytest.raises(InvalidSpec):
            make_spec(4, 0.0)
        with pytest.raises(InvalidSpec):
            make_spec(4, math.pi / 2 + 0.1)
        with pytest.raises(InvalidSpec):
            make_spec(1, 0.5)
        with pytest.raises(InvalidSpec):
            make_spec(4, 0.5, n=3)  # k > n

    def test_gamma_endpoints(self):
        spec = make_spec(6, 0.7)
        ray = gamma_of(spec)
        assert dist(ray.point(spec.R), spec.y) < 1e-12
        assert dist(ray.point(math.pi), spec.p.antipode()) < 1e-12
        assert dist(ray.point(0.0), spec.p) < 1e-12

    def test_ray_points_vectorized(self):
        spec = make_spec(4, 1.1)
        ray = gamma_of(spec)
        s = np.linspace(0.2, 3.0, 17)
        pts = ray.points(s)
        for i, si in enumerate(s):
            assert np.allclose(pts[i], ray.point(si).coords, atol=1e-14)

    def test_law_of_cosines_residuals(self):
        # the triangle identities hold for x on the boundary sphere
        spec = make_spec(4, 0.8)
        x = exp_map(spec.p, tangent_toward(spec.p, random_point(6)), spec.R)
        for s in (1.0, 1.7, 2.5):
            res = law_of_cosines_residuals(spec, x, s)
            assert max(abs(t) for t in res) < 1e-12

    def test_tangent_vector_orthogonality_enforced(self):
        a = random_point()
        with pytest.raises(InvalidSpec):
            TangentVector(a, a.coords.copy())

    def test_ray_direction_must_be_unit(self):
        a = random_point()
        v = tangent_toward(a, random_point())
        with pytest.raises(InvalidSpec):
            GeodesicRay(a, TangentVector(a, 2.0 * v.vec))
