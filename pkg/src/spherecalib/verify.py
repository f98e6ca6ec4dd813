"""Monte Carlo and quadrature checks on the assembled calibration field.

Two checks matter:

* div_bound_scan samples the interior of the ball with the volume measure
  and confirms sup-over-k-planes div W <= 1 up to a small margin tolerance.
  The scan refuses to certify anything when the line-density h dips
  negative (which happens for k = 8 at small radii), since nonnegativity of
  h is what makes the pointwise bound a sum of calibrated pieces.

* area_balance integrates div W over a totally geodesic k-ball through p
  and y and matches it against the boundary flux plus the flux through a
  small sphere around y, which converges to the volume of the geodesic
  k-ball of radius R as the small sphere shrinks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from .composite import (
    CompositeField,
    div_W_along_plane,
    eval_W,
    sup_div_W,
)
from .errors import SignViolation
from .fields import PlaneBasis
from .hsystem import h_min_scan
from .sphere import (
    BallSpec,
    SpherePoint,
    dist,
    grad_dist,
    sin_power_integral,
    unit_sphere_area,
    vol_ball,
)


@dataclass(frozen=True)
class DivergenceReport:
    spec: BallSpec
    seed: int
    exclusion: float
    margin_tol: float
    records: list[dict]
    min_margin: float
    argmin: dict

    @property
    def passed(self) -> bool:
        return self.min_margin >= -self.margin_tol


def _interior_samples(spec: BallSpec, count: int, seed: int,
                      exclusion: float) -> list[SpherePoint]:
    """Seeded draws from the volume measure of B_R, excluding a ball at y.

    Radius density is proportional to sin^(n-1) r on [0, R], realized by
    rejection under the constant envelope sin^(n-1) R (valid for R <= pi/2).
    """
    rng = np.random.default_rng(seed)
    p = spec.p.coords
    env = math.sin(spec.R) ** (spec.n - 1)
    out: list[SpherePoint] = []
    while len(out) < count:
        r = rng.uniform(0.0, spec.R)
        if rng.uniform(0.0, env) > math.sin(r) ** (spec.n - 1):
            continue
        v = rng.standard_normal(p.size)
        v -= (v @ p) * p
        v /= np.linalg.norm(v)
        q = SpherePoint(math.cos(r) * p + math.sin(r) * v)
        if dist(q, spec.y) >= exclusion:
            out.append(q)
    return out


def div_bound_scan(field: CompositeField, n_points: int = 500, seed: int = 42,
                   exclusion: float = 1e-3,
                   margin_tol: float = 1e-6) -> DivergenceReport:
    """Sample sup-plane divergence of W over the interior; margins vs 1."""
    if field.h is not None and field.h.min_h < -1e-10:
        raise SignViolation(
            "line density h is negative (min %.3e at s = %.6f); "
            "the divergence bound is not certified for k = %d, R = %.6f"
            % (field.h.min_h, field.h.argmin, field.k, field.spec.R))
    spec = field.spec
    records = []
    for q in _interior_samples(spec, n_points, seed, exclusion):
        sup = sup_div_W(field, q, exclusion=exclusion)
        records.append({
            "dist_p": dist(spec.p, q),
            "dist_y": dist(spec.y, q),
            "sup_div": sup,
            "margin": 1.0 - sup,
        })
    i = int(np.argmin([rec["margin"] for rec in records]))
    return DivergenceReport(
        spec=spec, seed=seed, exclusion=exclusion, margin_tol=margin_tol,
        records=records, min_margin=records[i]["margin"], argmin=records[i],
    )


def equality_plane_divergence(field: CompositeField, q: SpherePoint,
                              exclusion: float = 1e-3) -> float:
    """div W along the tangent plane of the totally geodesic S^k through
    p and y at a point q of that sphere; equals 1 in exact arithmetic."""
    plane = _geodesic_sphere_plane(field.spec, q)
    return div_W_along_plane(field, plane, exclusion=exclusion)


# ---------------------------------------------------------------------------
# Area balance on the totally geodesic k-ball.


@dataclass(frozen=True)
class AreaBalanceReport:
    spec: BallSpec
    eps: float
    interior: float
    boundary_flux: float
    small_flux: float
    small_area: float
    region_area: float
    residual: float
    model_residual: float
    flux_target: float

    @property
    def flux_coefficient(self) -> float:
        return self.small_flux


def _sk_basis(spec: BallSpec) -> np.ndarray:
    """Orthonormal ambient basis (k+1 vectors) of the totally geodesic S^k
    through p and y, rows [p, e, ...]."""
    p = spec.p.coords
    e = (spec.y.coords - math.cos(spec.R) * p) / math.sin(spec.R)
    d = p.size
    cols = [p, e]
    for i in range(d):
        if len(cols) == spec.k + 1:
            break
        v = np.zeros(d)
        v[i] = 1.0
        for c in cols:
            v -= (v @ c) * c
        nrm = np.linalg.norm(v)
        if nrm > 1e-8:
            cols.append(v / nrm)
    return np.array(cols)


def _geodesic_sphere_plane(spec: BallSpec, q: SpherePoint) -> PlaneBasis:
    basis = _sk_basis(spec)
    mat = basis - np.outer(basis @ q.coords, q.coords)
    # QR keeps the k independent rows; the row closest to q drops out.
    u, s, vt = np.linalg.svd(mat, full_matrices=False)
    return PlaneBasis(q, vt[:spec.k])


def _gauss_legendre(a: float, b: float, m: int):
    x, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def _alpha0(R: float, rho: float) -> float:
    return math.cos(R) * (1.0 - math.cos(rho)) / (math.sin(R) * math.sin(rho))


def area_balance(field: CompositeField, eps: float, n_rho: int = 48,
                 n_tau: int = 40) -> AreaBalanceReport:
    """Divergence theorem on Sigma = (geodesic k-ball about p) minus B_eps(y).

    Sigma lies in the totally geodesic S^k through p and y; rotational
    symmetry about the p-y axis reduces everything to one or two dimensional
    quadratures times the area of S^(k-2).

    residual is the exact divergence-theorem defect (pure quadrature error).
    model_residual replaces the small-sphere flux by its leading singular
    model 2 I_k(R) eps^(1-k) area(Sigma cap dB_eps) and decays like O(eps).
    """
    spec = field.spec
    k, R = spec.k, spec.R
    basis = _sk_basis(spec)
    y = spec.y.coords
    t_vec = (spec.p.coords - math.cos(R) * y) / math.sin(R)
    omega = basis[2]  # any direction orthogonal to the p-y plane inside S^k
    shell = unit_sphere_area(k - 2)

    def point(rho: float, tau: float) -> SpherePoint:
        v = math.cos(tau) * t_vec + math.sin(tau) * omega
        return SpherePoint(math.cos(rho) * y + math.sin(rho) * v)

    # Interior: polar coordinates about y, rho in [eps, 2R],
    # tau in [0, arccos(alpha0(rho))].
    rho_nodes, rho_w = _gauss_legendre(eps, 2.0 * R, n_rho)
    interior = 0.0
    region_area = 0.0
    for rho, wr in zip(rho_nodes, rho_w):
        tau_max = math.acos(min(1.0, _alpha0(R, rho)))
        tau_nodes, tau_w = _gauss_legendre(0.0, tau_max, n_tau)
        for tau, wt in zip(tau_nodes, tau_w):
            q = point(rho, tau)
            div = div_W_along_plane(field, _geodesic_sphere_plane(spec, q),
                                    exclusion=0.5 * eps)
            meas = wr * wt * math.sin(rho) ** (k - 1) * math.sin(tau) ** (k - 2)
            interior += div * meas
            region_area += meas
    interior *= shell
    region_area *= shell

    # Outer boundary: theta parametrizes the distance-R sphere about p,
    # theta = 0 pointing toward y; drop theta < theta_min(eps).
    cos_theta_min = (math.cos(eps) - math.cos(R) ** 2) / math.sin(R) ** 2
    theta_min = math.acos(np.clip(cos_theta_min, -1.0, 1.0))
    e_vec = (y - math.cos(R) * spec.p.coords) / math.sin(R)
    theta_nodes, theta_w = _gauss_legendre(theta_min, math.pi, n_rho)
    boundary_flux = 0.0
    for theta, wv in zip(theta_nodes, theta_w):
        v = math.cos(theta) * e_vec + math.sin(theta) * omega
        x = SpherePoint(math.cos(R) * spec.p.coords + math.sin(R) * v)
        w = eval_W(field, x, exclusion=0.5 * eps).vec
        flux = float(w @ grad_dist(spec.p, x).vec)
        boundary_flux += flux * wv * math.sin(theta) ** (k - 2)
    boundary_flux *= shell * math.sin(R) ** (k - 1)

    # Small sphere about y: outward normal for Sigma is -grad d_y.
    tau_max = math.acos(min(1.0, _alpha0(R, eps)))
    tau_nodes, tau_w = _gauss_legendre(0.0, tau_max, n_tau)
    small_flux = 0.0
    small_area = 0.0
    for tau, wt in zip(tau_nodes, tau_w):
        q = point(eps, tau)
        w = eval_W(field, q, exclusion=0.5 * eps).vec
        flux = -float(w @ grad_dist(spec.y, q).vec)
        meas = wt * math.sin(tau) ** (k - 2)
        small_flux += flux * meas
        small_area += meas
    small_flux *= shell * math.sin(eps) ** (k - 1)
    small_area *= shell * math.sin(eps) ** (k - 1)

    model_small = 2.0 * sin_power_integral(k, R) * eps ** (1 - k) * small_area
    return AreaBalanceReport(
        spec=spec, eps=eps, interior=interior, boundary_flux=boundary_flux,
        small_flux=small_flux, small_area=small_area, region_area=region_area,
        residual=abs(interior - boundary_flux - small_flux),
        model_residual=abs(interior - boundary_flux - model_small),
        flux_target=vol_ball(k, R),
    )


def extrapolate_flux(coarse: AreaBalanceReport, fine: AreaBalanceReport) -> float:
    """Richardson step for the eps -> 0 small-sphere flux; assumes the fine
    report halves eps."""
    return 2.0 * fine.small_flux - coarse.small_flux


# ---------------------------------------------------------------------------
# Radius scans of the line density.

def sign_scan(k: int, R_grid: Sequence[float], tol: float = 1e-9) -> list[dict]:
    """min over s of h for each R; flag radii where h dips below -1e-10."""
    return h_min_scan(k, list(R_grid), tol=tol)


def flagged_windows(rows: Sequence[dict]) -> list[tuple[float, float]]:
    """Contiguous R-intervals of flagged rows in a sign_scan output."""
    windows: list[tuple[float, float]] = []
    start = None
    prev = None
    for row in rows:
        if row["flag"]:
            if start is None:
                start = row["R"]
            prev = row["R"]
        elif start is not None:
            windows.append((start, prev))
            start = None
    if start is not None:
        windows.append((start, prev))
    return windows
