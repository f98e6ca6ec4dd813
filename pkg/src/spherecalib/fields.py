"""Radial vector fields on the sphere and their divergence along k-planes.

A radial atom is a field (f o d_c) grad d_c for a center c and scalar
profile f.  The two profiles used throughout are

  phi(t) = I_k(t) sin^(1-k)(t),      phi(0) = 0,
  psi(r) = (I_k(r) - I_k(pi)) sin^(1-k)(r),

both solving f' = 1 - (k-1) f cot.  For even k, psi also has the
partial-fraction form -sum_i a_i sin(r)/(1-cos r)^i with coefficients from
the a-recursion; the two forms are exposed separately for cross-checking.

The divergence of an atom along a k-plane with orthogonal projection P is

  w [ f'(r) |P grad r|^2 + f(r) cot(r) (k - |P grad r|^2) ],

which is affine in P.  Its supremum over all k-planes in the tangent space
is therefore exact: a trace term plus the sum of the k largest eigenvalues
of the associated symmetric matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._backend import KIND_PHI, KIND_PSI, accumulate
from .errors import DomainError, SingularPoint
from .sphere import POLE_TOL, SpherePoint, TangentVector, dist, grad_dist, sin_power_integral


def a_coeffs(j: int) -> np.ndarray:
    """a_1 = 1/(2j-1), a_(i+1) = 2(j-i)/(2j-(i+1)) a_i, for i = 1..j-1."""
    if j < 1:
        raise DomainError("need j >= 1")
    a = np.empty(j)
    a[0] = 1.0 / (2 * j - 1)
    for i in range(1, j):
        a[i] = 2.0 * (j - i) / (2 * j - (i + 1)) * a[i - 1]
    return a


@dataclass(frozen=True)
class RadialProfile:
    k: int
    value: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    kind: str  # 'phi' or 'psi'


def _phi_value(k: int, t):
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr >= math.pi - 1e-15):
        raise DomainError("phi is singular at t = pi")
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(
            t_arr == 0.0, 0.0, sin_power_integral(k, t_arr) * np.sin(t_arr) ** (1 - k)
        )
    return float(out) if np.isscalar(t) else out


def psi_general_value(k: int, r):
    """psi from the quotient definition; valid for any k >= 2, r in (0, pi]."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0.0):
        raise SingularPoint("psi is singular at r = 0")
    i_pi = sin_power_integral(k, math.pi)
    out = (sin_power_integral(k, r_arr) - i_pi) * np.sin(r_arr) ** (1 - k)
    # 0/0 at r = pi; the limit is 0 for every k.
    out = np.where(r_arr >= math.pi - 1e-15, 0.0, out)
    return float(out) if np.isscalar(r) else out


def psi_closed_even(k: int, r):
    """Even-k partial-fraction form: -sum_i a_i sin(r)/(1-cos r)^i."""
    if k % 2 != 0:
        raise DomainError("the partial-fraction form requires even k")
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0.0):
        raise SingularPoint("psi is singular at r = 0")
    a = a_coeffs(k // 2)
    omc = 2.0 * np.sin(0.5 * r_arr) ** 2  # 1 - cos(r) without cancellation
    acc = np.zeros_like(np.asarray(omc, dtype=float))
    for i in range(len(a), 0, -1):
        acc = (acc + a[i - 1]) / omc
    out = -np.sin(r_arr) * acc
    return float(out) if np.isscalar(r) else out


def _ode_deriv(k: int, value_fn: Callable, t):
    # Both profiles satisfy f' = 1 - (k-1) f cot; exact, no differencing.
    t_arr = np.asarray(t, dtype=float)
    out = 1.0 - (k - 1) * value_fn(t_arr) / np.tan(t_arr)
    return float(out) if np.isscalar(t) else out


def phi_profile(k: int) -> RadialProfile:
    if k < 2:
        raise DomainError("need k >= 2")
    return RadialProfile(
        k=k,
        value=lambda t: _phi_value(k, t),
        deriv=lambda t: _ode_deriv(k, lambda s: _phi_value(k, s), t),
        kind="phi",
    )


def psi_profile(k: int) -> RadialProfile:
    if k < 2:
        raise DomainError("need k >= 2")
    if k % 2 == 0:
        value = lambda r: psi_closed_even(k, r)  # noqa: E731
    else:
        value = lambda r: psi_general_value(k, r)  # noqa: E731
    return RadialProfile(
        k=k,
        value=value,
        deriv=lambda r: _ode_deriv(k, value, r),
        kind="psi",
    )


@dataclass(frozen=True, eq=False)
class RadialAtom:
    center: SpherePoint
    profile: RadialProfile
    weight: float = 1.0


@dataclass(frozen=True, eq=False)
class PlaneBasis:
    """k orthonormal tangent vectors at a common base point."""

    base: SpherePoint
    vectors: np.ndarray  # shape (k, n+1), rows orthonormal and orthogonal to base

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=float)
        object.__setattr__(self, "vectors", v)
        gram = v @ v.T
        if np.max(np.abs(gram - np.eye(v.shape[0]))) > 1e-10:
            raise DomainError("plane basis is not orthonormal")
        if np.max(np.abs(v @ self.base.coords)) > 1e-10:
            raise DomainError("plane basis is not tangent to its base point")

    @property
    def k(self) -> int:
        return self.vectors.shape[0]


def atom_arrays(atoms: Sequence[RadialAtom]):
    """Flatten an atom list into the kernel's array form (centers, weights, kinds)."""
    if not atoms:
        raise DomainError("empty atom batch")
    k = atoms[0].profile.k
    if any(a.profile.k != k for a in atoms):
        raise DomainError("all atoms in a batch must share the profile dimension k")
    kinds = np.array(
        [KIND_PHI if a.profile.kind == "phi" else KIND_PSI for a in atoms], dtype=np.int8
    )
    if k % 2 != 0 and np.any(kinds == KIND_PSI):
        raise DomainError("batched psi atoms require even k")
    centers = np.array([a.center.coords for a in atoms])
    weights = np.array([a.weight for a in atoms])
    return centers, weights, kinds


def _check_nonsingular(centers: np.ndarray, kinds: np.ndarray, q: np.ndarray,
                       exclusion: float = POLE_TOL):
    ips = np.clip(centers @ q, -1.0, 1.0)
    r = np.arccos(ips)
    if np.any(r < exclusion) or np.any(r > math.pi - exclusion):
        raise SingularPoint("evaluation point too close to an atom center or antipode")
    phi_far = r[kinds == KIND_PHI]
    if phi_far.size and np.any(phi_far > math.pi - 1e-6):
        raise SingularPoint("phi atom evaluated too close to its antipodal singularity")


def eval_atom(atom: RadialAtom, q: SpherePoint) -> TangentVector:
    """weight * f(d(center, q)) * grad_dist(center, q)."""
    if atom.weight == 0.0:
        return TangentVector(q, np.zeros_like(q.coords))
    g = grad_dist(atom.center, q)
    r = dist(atom.center, q)
    return TangentVector(q, atom.weight * float(atom.profile.value(r)) * g.vec)


def eval_atoms(atoms: Sequence[RadialAtom], q: SpherePoint) -> TangentVector:
    """Summed field of an atom batch, through the kernel backend."""
    centers, weights, kinds = atom_arrays(atoms)
    k = atoms[0].profile.k
    _check_nonsingular(centers, kinds, q.coords)
    acoef = a_coeffs(k // 2) if k % 2 == 0 else np.empty(0)
    fld, _, _ = accumulate(q.coords, centers, weights, kinds, k, acoef)
    return TangentVector(q, fld)


def div_along_plane(atom: RadialAtom, plane: PlaneBasis) -> float:
    """Divergence of the atom field along the given k-plane at plane.base."""
    q = plane.base
    r = dist(atom.center, q)
    if r < POLE_TOL or r > math.pi - POLE_TOL:
        raise SingularPoint("plane base point is singular for this atom")
    u = grad_dist(atom.center, q).vec
    proj_sq = float(np.sum((plane.vectors @ u) ** 2))
    k = plane.k
    f = float(atom.profile.value(r))
    fp = float(atom.profile.deriv(r))
    cot = math.cos(r) / math.sin(r)
    return atom.weight * (fp * proj_sq + f * cot * (k - proj_sq))


def div_atoms_along_plane(atoms: Sequence[RadialAtom], plane: PlaneBasis) -> float:
    """Divergence of a summed atom batch along a k-plane, via the kernel."""
    centers, weights, kinds = atom_arrays(atoms)
    k_dim = atoms[0].profile.k
    q = plane.base.coords
    _check_nonsingular(centers, kinds, q)
    acoef = a_coeffs(k_dim // 2) if k_dim % 2 == 0 else np.empty(0)
    _, trace, mat = accumulate(q, centers, weights, kinds, k_dim, acoef)
    # The kernel's trace term uses the ambient k = profile dimension, which
    # must match the plane dimension for the divergence formula.
    if plane.k != k_dim:
        raise DomainError("plane dimension must equal the profile dimension k")
    return trace + float(np.trace(plane.vectors @ mat @ plane.vectors.T))


def tangent_basis(q: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the tangent space at q, shape (d-1, d)."""
    d = q.size
    mat = np.concatenate([q[None, :], np.eye(d)], axis=0)
    qmat, _ = np.linalg.qr(mat.T)
    basis = qmat[:, 1:d].T
    return basis


def sup_div(atoms: Sequence[RadialAtom], q: SpherePoint, k: int) -> float:
    """Exact supremum over all k-planes at q of the summed divergence.

    The divergence is trace + tr(P M); restricted to the tangent space the
    supremum over rank-k orthogonal projections is the sum of the k largest
    eigenvalues of M.
    """
    centers, weights, kinds = atom_arrays(atoms)
    _check_nonsingular(centers, kinds, q.coords)
    k_dim = atoms[0].profile.k
    if k != k_dim:
        raise DomainError("plane dimension must equal the profile dimension k")
    acoef = a_coeffs(k_dim // 2) if k_dim % 2 == 0 else np.empty(0)
    _, trace, mat = accumulate(q.coords, centers, weights, kinds, k_dim, acoef)
    basis = tangent_basis(q.coords)
    eigs = np.linalg.eigvalsh(basis @ mat @ basis.T)
    return trace + float(np.sum(np.sort(eigs)[-k:]))


def random_plane(q: SpherePoint, k: int, rng: np.random.Generator) -> PlaneBasis:
    """Haar-random k-plane in the tangent space at q."""
    d = q.coords.size
    g = rng.standard_normal((d, k))
    g -= np.outer(q.coords, q.coords @ g)
    basis, _ = np.linalg.qr(g)
    return PlaneBasis(q, basis.T)
