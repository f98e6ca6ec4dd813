"""Tests for the divergence-bound scan and the area-balance check."""

import math

import numpy as np
import pytest

from spherecalib.composite import build_W
from spherecalib.errors import SignViolation
from spherecalib.sphere import exp_map, make_spec, tangent_toward, vol_ball
from spherecalib.verify import (
    area_balance,
    div_bound_scan,
    equality_plane_divergence,
    extrapolate_flux,
    flagged_windows,
    sign_scan,
)


class TestDivergenceScan:
    def test_bound_holds_k4(self):
        field = build_W(make_spec(4, 0.9))
        report = div_bound_scan(field, n_points=100, seed=5)
        assert report.passed
        assert report.min_margin >= -1e-6
        assert len(report.records) == 100

    def test_deterministic(self):
        field = build_W(make_spec(4, 0.7))
        a = div_bound_scan(field, n_points=40, seed=5)
        b = div_bound_scan(field, n_points=40, seed=5)
        assert a.min_margin == b.min_margin
        assert a.argmin == b.argmin

    def test_refuses_negative_density(self):
        field = build_W(make_spec(8, 0.5))
        with pytest.raises(SignViolation):
            div_bound_scan(field, n_points=10)

    def test_k8_large_radius_certified(self):
        # The k = 8 construction only fails at small radii.
        field = build_W(make_spec(8, 1.4))
        report = div_bound_scan(field, n_points=60, seed=2)
        assert report.passed

    def test_equality_on_geodesic_sphere(self):
        # div W = 1 identically on the totally geodesic S^k through p and y.
        spec = make_spec(4, 0.9)
        field = build_W(spec)
        for t in [0.2, 0.5, 0.8]:
            q = exp_map(spec.p, tangent_toward(spec.p, spec.y), t)
            assert equality_plane_divergence(field, q) == pytest.approx(1.0, abs=1e-9)


class TestAreaBalance:
    def test_flux_converges_to_ball_volume(self):
        spec = make_spec(4, 0.9)
        field = build_W(spec)
        coarse = area_balance(field, eps=0.05)
        fine = area_balance(field, eps=0.025)
        target = vol_ball(4, 0.9)
        assert fine.flux_target == pytest.approx(target, rel=1e-12)
        flux = extrapolate_flux(coarse, fine)
        assert abs(flux - target) / target < 0.01
        # the singular-model residual shrinks with the excised radius
        assert fine.model_residual < coarse.model_residual

    def test_interior_with_exact_divergence(self):
        # div W = 1 on the geodesic sphere, so the interior integral equals
        # the area of the region (ball minus the excised neighborhood of y).
        spec = make_spec(4, 0.9)
        field = build_W(spec)
        rep = area_balance(field, eps=0.05)
        assert rep.interior == pytest.approx(rep.region_area, rel=1e-6)
        # flux balance: interior = boundary flux + small-sphere flux, up to
        # quadrature noise reported as the exact residual
        assert rep.residual < 1e-6

    def test_k2_area_balance(self):
        field = build_W(make_spec(2, 0.8))
        rep = area_balance(field, eps=0.05, n_rho=96, n_tau=80)
        assert rep.residual < 1e-6


class TestSignScan:
    def test_k8_flags(self):
        rows = sign_scan(8, [0.3, 0.6, 1.2])
        assert [r["flag"] for r in rows] == [True, True, False]

    def test_k4_clean(self):
        rows = sign_scan(4, [0.3, 0.6, 1.2])
        assert not any(r["flag"] for r in rows)

    def test_flagged_windows(self):
        rows = [
            {"R": 0.1, "flag": True},
            {"R": 0.2, "flag": True},
            {"R": 0.3, "flag": False},
            {"R": 0.4, "flag": True},
            {"R": 0.5, "flag": False},
        ]
        assert flagged_windows(rows) == [(0.1, 0.2), (0.4, 0.4)]

    def test_no_windows(self):
        rows = [{"R": 0.1, "flag": False}]
        assert flagged_windows(rows) == []
