"""Assembly and evaluation of the composite calibration field W.

W combines a radial field about the ball center with a singular field about
the marked boundary point y and a line integral of singular fields along
the geodesic from y to the antipode of the center:

  W = pw * Phi_p + zw * (Psi_y + integral over s of h(s) Psi_gamma(s)),

  pw = cos(R) sin^(k-2)(R) / ((k-2) I_(k-2)(R)),
  zw = 2 I_k(R) / I_k(pi).

pw has the equivalent form 1 - (k-1)/(k-2) I_k(R)/I_(k-2)(R); both are
computed and must agree, which pins the 1/(k-1) coefficient of the
reduction I_k(R) = -cos R sin^(k-2)(R)/(k-1) + (k-2)/(k-1) I_(k-2)(R).

For k = 2 there is no line term and W = cos(R) Phi_p + (1-cos R) Psi_y.

The line integral is discretized per evaluation point by adaptive panels
refined around the parameter where gamma passes closest to the point, then
folded into the same radial-atom batches as the explicit terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from ._backend import KIND_PHI, KIND_PSI, accumulate
from .errors import InvalidSpec, SingularPoint, UnsupportedDimension
from .fields import PlaneBasis, a_coeffs, psi_closed_even, tangent_basis
from .hsystem import HSolution, require_even_k, solve_h_for
from .quadrature import QuadratureSpec, adaptive_nodes
from .sphere import (
    BallSpec,
    GeodesicRay,
    SpherePoint,
    TangentVector,
    dist,
    dist_many,
    exp_map,
    gamma_of,
    grad_dist,
    sin_power_integral,
    tangent_toward,
)

DEFAULT_EXCLUSION = 1e-3


@dataclass(frozen=True, eq=False)
class CompositeField:
    spec: BallSpec
    phi_weight: float
    phi_weight_alt: float
    z_weight: float
    h: HSolution | None  # None for k = 2
    gamma: GeodesicRay
    quad: QuadratureSpec

    @property
    def k(self) -> int:
        return self.spec.k

    @property
    def h_integral(self) -> float:
        return self.h.integral if self.h is not None else 0.0

    def with_quad(self, quad: QuadratureSpec) -> "CompositeField":
        return replace(self, quad=quad)


def build_W(spec: BallSpec, ode_tol: float = 1e-11,
            quad: QuadratureSpec | None = None) -> CompositeField:
    """Construct the composite field for even k (k = 2 has no line term)."""
    k, R = spec.k, spec.R
    if k % 2 != 0:
        require_even_k(k)  # raises UnsupportedDimension
    quad = quad or QuadratureSpec()
    if k == 2:
        pw = math.cos(R)
        pw_alt = pw
        zw = 1.0 - math.cos(R)
        h = None
    else:
        ik = sin_power_integral(k, R)
        ikm2 = sin_power_integral(k - 2, R)
        pw = math.cos(R) * math.sin(R) ** (k - 2) / ((k - 2) * ikm2)
        pw_alt = 1.0 - (k - 1) / (k - 2) * ik / ikm2
        if abs(pw - pw_alt) > 1e-12:
            raise InvalidSpec("the two weight formulas disagree beyond roundoff")
        zw = 2.0 * ik / sin_power_integral(k, math.pi)
        h = solve_h_for(k, R, tol=ode_tol)
    return CompositeField(
        spec=spec, phi_weight=pw, phi_weight_alt=pw_alt, z_weight=zw,
        h=h, gamma=gamma_of(spec), quad=quad,
    )


def _closest_gamma_parameter(field: CompositeField, q: np.ndarray) -> float:
    # <q, gamma(s)> = A cos(s - s0) is maximized at s0.
    cp = float(q @ field.gamma.origin.coords)
    ce = float(q @ field.gamma.direction.vec)
    return math.atan2(ce, cp) % (2.0 * math.pi)


def _line_nodes(field: CompositeField, q: np.ndarray):
    """Adaptive quadrature nodes/weights for the line term at point q.

    Panels refine on the two scalar coefficient functions that drive both
    the field value and the divergence matrix:
      h(s) psi(r(s))   and   h(s) (1 - k psi(r(s)) cot(r(s))).
    """
    h = field.h
    assert h is not None
    k = field.k
    a = R = h.R
    b = math.pi - h.delta_end

    def coeffs(s: np.ndarray) -> np.ndarray:
        pts = field.gamma.points(s)
        r = dist_many(q, pts)
        hv = h.h_fun(s)
        psi = psi_closed_even(k, r)
        cot = np.cos(r) / np.sin(r)
        return np.stack([hv * psi, hv * (1.0 - k * psi * cot)], axis=1)

    anchor = _closest_gamma_parameter(field, q)
    if not a < anchor < b:
        anchor = None
    nodes, weights, _ = adaptive_nodes(coeffs, a, b, field.quad, anchor=anchor)
    return nodes, weights


def _assemble_arrays(field: CompositeField, q: np.ndarray):
    """Atom batch (centers, weights, kinds) representing W at point q."""
    centers = [field.spec.p.coords, field.spec.y.coords]
    weights = [field.phi_weight, field.z_weight]
    kinds = [KIND_PHI, KIND_PSI]
    if field.h is not None:
        nodes, wts = _line_nodes(field, q)
        line_centers = field.gamma.points(nodes)
        line_weights = field.z_weight * field.h.h_fun(nodes) * wts
        centers = np.concatenate([np.array(centers), line_centers])
        weights = np.concatenate([np.array(weights), line_weights])
        kinds = np.concatenate([np.array(kinds, dtype=np.int8),
                                np.full(len(nodes), KIND_PSI, dtype=np.int8)])
    else:
        centers = np.array(centers)
        weights = np.array(weights)
        kinds = np.array(kinds, dtype=np.int8)
    return centers, weights, kinds


def _guard(field: CompositeField, q: SpherePoint, exclusion: float):
    if dist(q, field.spec.y) < exclusion:
        raise SingularPoint("evaluation point within the exclusion radius of y")


def eval_W(field: CompositeField, q: SpherePoint,
           exclusion: float = DEFAULT_EXCLUSION) -> TangentVector:
    """Value of W at q."""
    _guard(field, q, exclusion)
    centers, weights, kinds = _assemble_arrays(field, q.coords)
    vec, _, _ = accumulate(q.coords, centers, weights, kinds, field.k, a_coeffs(field.k // 2))
    return TangentVector(q, vec)


def sup_div_W(field: CompositeField, q: SpherePoint,
              exclusion: float = DEFAULT_EXCLUSION) -> float:
    """Exact supremum of the divergence of W over all k-planes at q."""
    _guard(field, q, exclusion)
    centers, weights, kinds = _assemble_arrays(field, q.coords)
    _, trace, mat = accumulate(q.coords, centers, weights, kinds, field.k, a_coeffs(field.k // 2))
    basis = tangent_basis(q.coords)
    eigs = np.linalg.eigvalsh(basis @ mat @ basis.T)
    return trace + float(np.sum(np.sort(eigs)[-field.k:]))


def div_W_along_plane(field: CompositeField, plane: PlaneBasis,
                      exclusion: float = DEFAULT_EXCLUSION) -> float:
    """Divergence of W along a specific k-plane."""
    _guard(field, plane.base, exclusion)
    q = plane.base.coords
    centers, weights, kinds = _assemble_arrays(field, q)
    _, trace, mat = accumulate(q, centers, weights, kinds, field.k, a_coeffs(field.k // 2))
    return trace + float(np.trace(plane.vectors @ mat @ plane.vectors.T))


def boundary_samples(spec: BallSpec, count: int, min_dist_y: float = 0.05,
                     seed: int = 0) -> list[SpherePoint]:
    """Seeded boundary points of B_R at least min_dist_y away from y."""
    rng = np.random.default_rng(seed)
    p = spec.p.coords
    out: list[SpherePoint] = []
    while len(out) < count:
        v = rng.standard_normal(p.size)
        v -= (v @ p) * p
        v /= np.linalg.norm(v)
        x = SpherePoint(math.cos(spec.R) * p + math.sin(spec.R) * v)
        if dist(x, spec.y) >= min_dist_y:
            out.append(x)
    return out


def tangency_residual(field: CompositeField, samples: Sequence[SpherePoint]) -> dict:
    """Max |<W, grad d_p>| over boundary samples, with the Z-identity residual.

    The intermediate identity is -(k-1) tan(R) <Z, grad d_p> = 1 + integral(h),
    constant along the boundary away from y.
    """
    spec = field.spec
    k, R = field.k, spec.R
    phi_R = sin_power_integral(k, R) * math.sin(R) ** (1 - k)
    one_plus_int = 1.0 + field.h_integral
    max_res = 0.0
    max_ident = 0.0
    for x in samples:
        centers, weights, kinds = _assemble_arrays(field, x.coords)
        # Z alone: drop the Phi_p atom and the z_weight scaling.
        z_weights = weights.copy()
        z_weights[0] = 0.0
        z_weights /= field.z_weight
        vec, _, _ = accumulate(x.coords, centers, z_weights, kinds, k, a_coeffs(k // 2))
        z_dot = float(vec @ grad_dist(spec.p, x).vec)
        w_dot = field.phi_weight * phi_R + field.z_weight * z_dot
        max_res = max(max_res, abs(w_dot))
        max_ident = max(max_ident, abs(-(k - 1) * math.tan(R) * z_dot - one_plus_int))
    return {
        "max_residual": max_res,
        "max_identity_residual": max_ident,
        "samples": len(samples),
    }


def singularity_scaling(field: CompositeField, radii: Sequence[float]) -> list[dict]:
    """Approach y radially and extract the d_y^(1-k) coefficient of W.

    Rows report r^(k-1)|W|, the scaled deviation from -2 I_k(R) d_y^(1-k)
    grad d_y, and the scaled magnitude of the line-integral term alone.
    """
    spec = field.spec
    k = field.k
    toward_p = tangent_toward(spec.y, spec.p)
    coeff = 2.0 * sin_power_integral(k, spec.R)
    rows = []
    for r in radii:
        q = exp_map(spec.y, toward_p, r)
        w = eval_W(field, q, exclusion=min(DEFAULT_EXCLUSION, 0.5 * r)).vec
        grad_y = grad_dist(spec.y, q).vec
        target = -coeff * r ** (1 - k) * grad_y
        line_mag = 0.0
        if field.h is not None:
            centers, weights, kinds = _assemble_arrays(field, q.coords)
            weights = weights.copy()
            weights[:2] = 0.0  # keep only the line term
            vec, _, _ = accumulate(q.coords, centers, weights, kinds, k, a_coeffs(k // 2))
            line_mag = float(np.linalg.norm(vec))
        rows.append({
            "r": float(r),
            "scaled_deviation": float(r ** (k - 1) * np.linalg.norm(w - target)),
            "scaled_magnitude": float(r ** (k - 1) * np.linalg.norm(w)),
            "coefficient_target": coeff,
            "scaled_line_term": float(r ** (k - 1) * line_mag),
        })
    return rows


# ---------------------------------------------------------------------------
# Euclidean limit.

def euclid_limit_field(k: int, y: np.ndarray, quad: QuadratureSpec | None = None):
    """The flat-ball limit field x/k - (2/k)(x-y)/|x-y|^k - ((k-2)/k) J(x),
    J(x) = integral over t in [0,1] of (tx-y)/|tx-y|^k."""
    quad = quad or QuadratureSpec()

    def w0(x: np.ndarray) -> np.ndarray:
        out = x / k - (2.0 / k) * (x - y) / np.linalg.norm(x - y) ** k
        if k > 2:
            def f(t: np.ndarray) -> np.ndarray:
                seg = t[:, None] * x[None, :] - y[None, :]
                return seg / np.linalg.norm(seg, axis=1)[:, None] ** k

            xx = float(x @ x)
            anchor = float(x @ y) / xx if xx > 0 else None
            if anchor is not None and not 0.0 < anchor < 1.0:
                anchor = None
            _, _, j_int = adaptive_nodes(f, 0.0, 1.0, quad, anchor=anchor)
            out = out - (k - 2.0) / k * j_int
        return out

    return w0


def pull_back_field(field: CompositeField, x: np.ndarray,
                    exclusion: float) -> np.ndarray:
    """W at exp_p(R x), pulled back to the unit flat ball in T_p.

    x is an ambient vector orthogonal to p with |x| <= 1; the pullback uses
    the exact differential of the exponential map (radial part isometric,
    transverse part scaled by sin(rho)/rho) and the 1/R metric rescaling.
    """
    spec = field.spec
    R = spec.R
    p = spec.p.coords
    rho = R * float(np.linalg.norm(x))
    u = x / np.linalg.norm(x)
    q = SpherePoint(math.cos(rho) * p + math.sin(rho) * u)
    w = eval_W(field, q, exclusion=exclusion).vec
    radial_dir = -math.sin(rho) * p + math.cos(rho) * u
    w_rad = float(w @ radial_dir)
    w_perp = w - w_rad * radial_dir
    return (w_rad * u + (rho / math.sin(rho)) * w_perp) / R


def euclid_limit_compare(k: int, R_seq: Sequence[float], n_samples: int = 24,
                         seed: int = 7, ode_tol: float = 1e-11,
                         quad: QuadratureSpec | None = None) -> dict:
    """Max pullback error against the flat limit field, per R, plus slope.

    Sample points live in the unit flat ball with 0.1 <= |x| <= 0.85 and
    |x - y| >= 0.05.
    """
    if k not in (2, 4, 6):
        raise UnsupportedDimension("euclidean comparison supports k in {2, 4, 6}")
    # Chart: p = E0, y_chart = E1 in the standard axis-aligned instance.
    from .sphere import make_spec

    rng = np.random.default_rng(seed)
    d = k + 2  # ambient vectors for n = k + 1
    y_chart = np.zeros(d)
    y_chart[1] = 1.0
    samples = []
    while len(samples) < n_samples:
        v = rng.standard_normal(d)
        v[0] = 0.0
        v /= np.linalg.norm(v)
        x = v * rng.uniform(0.1, 0.85)
        if np.linalg.norm(x - y_chart) >= 0.05:
            samples.append(x)

    w0 = euclid_limit_field(k, y_chart, quad=quad)
    targets = [w0(x) for x in samples]

    errors = []
    for R in R_seq:
        spec = make_spec(k, R)
        field = build_W(spec, ode_tol=ode_tol, quad=quad)
        max_err = 0.0
        for x, target in zip(samples, targets):
            pb = pull_back_field(field, x, exclusion=0.04 * R)
            max_err = max(max_err, float(np.linalg.norm(pb - target)))
        errors.append(max_err)

    logs_r = np.log(np.asarray(R_seq, dtype=float))
    logs_e = np.log(np.asarray(errors))
    slope = float(np.polyfit(logs_r, logs_e, 1)[0])
    return {"k": k, "R_seq": list(map(float, R_seq)), "max_errors": errors, "slope": slope}
