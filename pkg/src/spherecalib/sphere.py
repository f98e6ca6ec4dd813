"""Exact-formula geometry of the round unit sphere S^n.

Points live in ambient R^(n+1); tangent vectors are ambient vectors
orthogonal to their base point.  Everything here is closed form: distances,
distance gradients, great-circle rays, the incomplete powers-of-sine
integrals I_k, and geodesic ball volumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidSpec, SingularPoint

# Evaluation closer than this to a pole of a distance function is rejected.
POLE_TOL = 1e-9


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


@dataclass(frozen=True, eq=False)
class SpherePoint:
    """A point of S^n as a unit vector in R^(n+1)."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        object.__setattr__(self, "coords", c)
        if c.ndim != 1 or c.size < 3:
            raise InvalidSpec("point must be a vector in R^(n+1), n >= 2")
        if abs(np.linalg.norm(c) - 1.0) > 1e-12:
            raise InvalidSpec("point is not on the unit sphere")

    @classmethod
    def from_vector(cls, v) -> "SpherePoint":
        return cls(_unit(np.asarray(v, dtype=float)))

    def antipode(self) -> "SpherePoint":
        return SpherePoint(-self.coords)


@dataclass(frozen=True, eq=False)
class TangentVector:
    """An ambient vector attached to, and orthogonal to, a base point."""

    base: SpherePoint
    vec: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vec, dtype=float)
        object.__setattr__(self, "vec", v)
        if abs(float(v @ self.base.coords)) > 1e-10 * max(1.0, np.linalg.norm(v)):
            raise InvalidSpec("vector is not tangent to the sphere at its base")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vec))


@dataclass(frozen=True, eq=False)
class GeodesicRay:
    """Unit-speed great circle s -> cos(s) origin + sin(s) direction."""

    origin: SpherePoint
    direction: TangentVector

    def __post_init__(self):
        if abs(self.direction.norm - 1.0) > 1e-10:
            raise InvalidSpec("ray direction must be a unit tangent vector")
        if self.direction.base is not self.origin and (
            np.linalg.norm(self.direction.base.coords - self.origin.coords) > 1e-12
        ):
            raise InvalidSpec("ray direction must be based at the origin")

    def point(self, s: float) -> SpherePoint:
        c = math.cos(s) * self.origin.coords + math.sin(s) * self.direction.vec
        return SpherePoint(_unit(c))

    def points(self, s: np.ndarray) -> np.ndarray:
        """Vectorized point coordinates, shape (len(s), n+1)."""
        s = np.asarray(s, dtype=float)
        return np.cos(s)[:, None] * self.origin.coords + np.sin(s)[:, None] * self.direction.vec


@dataclass(frozen=True, eq=False)
class BallSpec:
    """A problem instance: B^n_R(p) in S^n with marked boundary point y."""

    n: int
    k: int
    R: float
    p: SpherePoint
    y: SpherePoint

    def __post_init__(self):
        if self.n < 2:
            raise InvalidSpec("ambient dimension n must be >= 2")
        if not 2 <= self.k <= self.n:
            raise InvalidSpec("need 2 <= k <= n")
        if not 0.0 < self.R <= math.pi / 2 + 1e-12:
            raise InvalidSpec("radius must lie in (0, pi/2]")
        if self.p.coords.size != self.n + 1 or self.y.coords.size != self.n + 1:
            raise InvalidSpec("points must live in R^(n+1)")
        if abs(dist(self.p, self.y) - self.R) > 1e-10:
            raise InvalidSpec("y must lie on the boundary sphere of radius R about p")

    @property
    def j(self) -> int:
        return self.k // 2


def make_spec(k: int, R: float, n: int | None = None) -> BallSpec:
    """Standard axis-aligned instance: p = e_0, y = cos(R) e_0 + sin(R) e_1.

    n defaults to k + 1.
    """
    if n is None:
        n = k + 1
    p = np.zeros(n + 1)
    p[0] = 1.0
    y = np.zeros(n + 1)
    y[0] = math.cos(R)
    y[1] = math.sin(R)
    return BallSpec(n=n, k=k, R=R, p=SpherePoint(p), y=SpherePoint(_unit(y)))


def dist(a: SpherePoint, b: SpherePoint) -> float:
    """Geodesic distance.

    Small separations go through the chord (2 asin of the half chord)
    because arccos of an inner product near 1 loses half the digits.
    """
    ip = min(1.0, max(-1.0, float(a.coords @ b.coords)))
    if ip > 0.5:
        chord = float(np.linalg.norm(a.coords - b.coords))
        return 2.0 * math.asin(0.5 * chord)
    return math.acos(ip)


def dist_many(q: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Geodesic distances from ambient unit vector q to rows of points,
    with the same chord-based small-separation handling as dist."""
    ips = np.clip(points @ q, -1.0, 1.0)
    r = np.arccos(ips)
    near = ips > 0.5
    if np.any(near):
        chord = np.linalg.norm(points[near] - q[None, :], axis=1)
        r[near] = 2.0 * np.arcsin(0.5 * chord)
    return r


def grad_dist(center: SpherePoint, q: SpherePoint) -> TangentVector:
    """Unit gradient of the distance-to-center function at q.

    Points away from center; the directional derivative of d_center along
    it is +1.  Undefined within POLE_TOL of center and its antipode.
    """
    r = dist(center, q)
    if r < POLE_TOL or r > math.pi - POLE_TOL:
        raise SingularPoint(f"distance gradient undefined at r = {r:.3e}")
    # <c,q> q - c = (q - c) - (1 - <c,q>) q with 1 - <c,q> = |q - c|^2 / 2
    omip = 0.5 * float(np.sum((q.coords - center.coords) ** 2))
    v = ((q.coords - center.coords) - omip * q.coords) / math.sin(r)
    return TangentVector(q, v)


def exp_map(base: SpherePoint, v: TangentVector, t: float) -> SpherePoint:
    """Geodesic step: exp_base(t v) for a unit tangent v."""
    return SpherePoint(_unit(math.cos(t) * base.coords + math.sin(t) * v.vec))


def tangent_toward(a: SpherePoint, b: SpherePoint) -> TangentVector:
    """Unit tangent at a pointing toward b along the minimizing geodesic."""
    r = dist(a, b)
    if r < POLE_TOL or r > math.pi - POLE_TOL:
        raise SingularPoint("direction undefined for coincident or antipodal points")
    v = (b.coords - math.cos(r) * a.coords) / math.sin(r)
    return TangentVector(a, _unit(v))


def gamma_of(spec: BallSpec) -> GeodesicRay:
    """The ray through p and y; point(s) for s in [R, pi] runs from y to -p."""
    e = tangent_toward(spec.p, spec.y)
    ray = GeodesicRay(spec.p, e)
    if dist(ray.point(spec.R), spec.y) > 1e-10:
        raise InvalidSpec("inconsistent spec: gamma(R) != y")
    return ray


_GL64 = np.polynomial.legendre.leggauss(64)


def sin_power_integral(k: int, r) -> float | np.ndarray:
    """I_k(r) = integral of sin^(k-1) over [0, r].

    Satisfies the reduction
    I_k(r) = -cos(r) sin^(k-2)(r)/(k-1) + (k-2)/(k-1) I_(k-2)(r),
    with I_2(r) = 1 - cos(r) and I_3(r) = (r - sin r cos r)/2, but is
    evaluated by fixed Gauss-Legendre quadrature: the positive integrand
    keeps full relative precision for small r where the recursion cancels
    catastrophically.
    """
    if k < 2:
        raise DomainError("need k >= 2")
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < -1e-15) or np.any(r_arr > math.pi + 1e-15):
        raise DomainError("r must lie in [0, pi]")
    half = 0.5 * r_arr
    t = half[..., None] * (_GL64[0] + 1.0)
    val = half * np.sum(_GL64[1] * np.sin(t) ** (k - 1), axis=-1)
    if np.isscalar(r):
        return float(val)
    return val


def unit_sphere_area(d: int) -> float:
    """Euclidean area of the unit d-sphere: 2 pi^((d+1)/2) / Gamma((d+1)/2)."""
    return 2.0 * math.pi ** ((d + 1) / 2) / math.gamma((d + 1) / 2)


def vol_ball(k: int, r) -> float | np.ndarray:
    """Volume of a geodesic k-ball of radius r in the unit sphere."""
    out = unit_sphere_area(k - 1) * sin_power_integral(k, r)
    return float(out) if np.isscalar(r) else out


def law_of_cosines_residuals(spec: BallSpec, x: SpherePoint, s: float) -> tuple[float, float, float]:
    """Residuals of the three geodesic-triangle identities for (p, x, gamma(s)).

    All three vanish identically; the third uses the analytic s-derivative
    of cos(d_x(gamma(s))) obtained from the gradient of d_x.
    """
    gamma = gamma_of(spec)
    g = gamma.point(s)
    if dist(x, g) < POLE_TOL:
        raise SingularPoint("x coincides with gamma(s)")
    R = spec.R
    d_xg = dist(x, g)

    lhs1 = math.sin(R) * math.sin(d_xg) * float(grad_dist(g, x).vec @ grad_dist(spec.p, x).vec)
    res1 = lhs1 - (math.cos(s) - math.cos(R) * math.cos(d_xg))

    lhs2 = math.sin(s) * math.sin(d_xg) * float(grad_dist(x, g).vec @ grad_dist(spec.p, g).vec)
    res2 = lhs2 - (math.cos(R) - math.cos(s) * math.cos(d_xg))

    gprime = -math.sin(s) * gamma.origin.coords + math.cos(s) * gamma.direction.vec
    ddist_ds = float(grad_dist(x, g).vec @ gprime)
    res3 = math.sin(s) * math.sin(d_xg) * ddist_ds - (
        math.cos(R) - math.cos(s) + math.cos(s) * (1.0 - math.cos(d_xg))
    )
    return res1, res2, res3
