"""Pure-numpy radial-atom accumulation kernel.

A batch of radial atoms (center, weight, profile kind) is reduced at a
single evaluation point q into the three quantities every field/divergence
computation needs:

  field  = sum_c w_c f_c(r_c) u_c
  trace  = sum_c w_c k f_c(r_c) cot(r_c)
  M      = sum_c w_c (f_c'(r_c) - f_c(r_c) cot(r_c)) u_c u_c^T

where r_c is the distance from q to the atom center, u_c the unit distance
gradient at q, and f_c is either the phi profile (kind 0) or the psi
profile (kind 1) for dimension k.  The divergence of the atom sum along a
k-plane with projection P is trace + tr(P M).

Distances are recovered from the chord for small separations (2 asin of
the half chord) because arccos of an inner product near 1 forfeits half
the significant digits, which the r^(1-k) profiles amplify.  For the same
reason 1 - cos(r) is evaluated as 2 sin^2(r/2) and I_k by fixed
Gauss-Legendre quadrature rather than the downward recursion.

The compiled extension (spherecalib._kernels) implements the same
signature; this module is the fallback.
"""

from __future__ import annotations

import numpy as np

KIND_PHI = 0
KIND_PSI = 1

_GL64 = np.polynomial.legendre.leggauss(64)


def _incomplete_sine(k: int, r: np.ndarray) -> np.ndarray:
    # integral of sin^(k-1) over [0, r]; positive integrand, no cancellation
    half = 0.5 * np.asarray(r, dtype=float)
    t = half[..., None] * (_GL64[0] + 1.0)
    return half * np.sum(_GL64[1] * np.sin(t) ** (k - 1), axis=-1)


def _chord_distance(q: np.ndarray, centers: np.ndarray):
    ips = np.clip(centers @ q, -1.0, 1.0)
    r = np.arccos(ips)
    omip = 1.0 - ips  # equals |q - c|^2 / 2 for unit vectors
    near = ips > 0.5
    if np.any(near):
        chord2 = np.sum((centers[near] - q[None, :]) ** 2, axis=1)
        r[near] = 2.0 * np.arcsin(0.5 * np.sqrt(chord2))
        omip[near] = 0.5 * chord2
    return r, omip


def profile_batch(r: np.ndarray, kinds: np.ndarray, k: int, acoef: np.ndarray):
    """Profile values and derivatives at distances r.

    phi(r) = I_k(r) sin^(1-k)(r); psi via the even-k partial-fraction form
    -sum_i a_i sin(r)/(1-cos r)^i.  Both satisfy f' = 1 - (k-1) f cot(r).
    """
    r = np.asarray(r, dtype=float)
    val = np.empty_like(r)
    phi_mask = kinds == KIND_PHI
    psi_mask = ~phi_mask
    sr = np.sin(r)
    cr = np.cos(r)
    if np.any(phi_mask):
        rp = r[phi_mask]
        val[phi_mask] = _incomplete_sine(k, rp) * np.sin(rp) ** (1 - k)
    if np.any(psi_mask):
        one_m_c = 2.0 * np.sin(0.5 * r[psi_mask]) ** 2
        acc = np.zeros_like(one_m_c)
        for i in range(len(acoef), 0, -1):
            acc = (acc + acoef[i - 1]) / one_m_c
        val[psi_mask] = -sr[psi_mask] * acc
    cot = cr / sr
    deriv = 1.0 - (k - 1) * val * cot
    return val, deriv, cot


def accumulate(q: np.ndarray, centers: np.ndarray, weights: np.ndarray,
               kinds: np.ndarray, k: int, acoef: np.ndarray):
    """Reduce an atom batch at q; see module docstring."""
    r, omip = _chord_distance(q, centers)
    sr = np.sin(r)
    # u = (<c,q> q - c)/sin r, grouped so nearby centers do not cancel:
    # <c,q> q - c = (q - c) - (1 - <c,q>) q, with 1 - <c,q> = |q - c|^2 / 2
    u = ((q[None, :] - centers) - omip[:, None] * q[None, :]) / sr[:, None]
    val, deriv, cot = profile_batch(r, kinds, k, acoef)
    wf = weights * val
    field = wf @ u
    trace = float(k * np.sum(wf * cot))
    coef = weights * (deriv - val * cot)
    mat = (u * coef[:, None]).T @ u
    return field, trace, mat
