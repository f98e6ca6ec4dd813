"""The first-order linear system defining h(s) for even k = 2j.

The unknown is f = (f_1, ..., f_(j-1)) with f' = A(s) f on [R, pi),
initial data f(R) = cos(R) sin^(2-k)(R) (1, ..., 1), and

    h(s) = (j-1) f_(j-1)(s) sin^(k-3)(s).

Row i of A comes from matching partial-fraction coefficients:

    a_i (cos s + (1-i) c_i cos R)(j-1) f_(j-1)
        = a_(i+1) (f_i' sin s + (k-2-i) f_i cos s)
          - a_i (i-1) f_(i-1) (cos R - cos s),

with f_0 = 0 and c_i = 1/(2j - i - 1).  The k = 6 case has a closed-form
solution (exposed below) used as an oracle; k = 4 collapses to constant
f_1, i.e. h(s) = (cos R / sin^2 R) sin s.

The system is singular at s = pi (A ~ 1/sin s); integration stops at
pi - delta_end and the integral of h carries a frozen-coefficient tail
estimate, justified by the decay f_i sin^(k-2) -> 0 monitored alongside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from .errors import DomainError, StiffnessFailure, UnsupportedDimension
from .fields import a_coeffs
from .sphere import sin_power_integral


@dataclass(frozen=True)
class OdeSpec:
    j: int
    R: float
    A: Callable[[float], np.ndarray]
    f0: np.ndarray

    @property
    def k(self) -> int:
        return 2 * self.j


@dataclass(frozen=True, eq=False)
class HSolution:
    j: int
    R: float
    grid: np.ndarray
    f_values: np.ndarray  # shape (len(grid), j-1)
    h_values: np.ndarray
    integral: float
    min_h: float
    argmin: float
    delta_end: float
    h_fun: Callable[[np.ndarray], np.ndarray]
    f_fun: Callable[[np.ndarray], np.ndarray]
    tail_decay: np.ndarray  # max_i |f_i(pi - 10^-m)| sin^(k-2), m = 2..6

    @property
    def k(self) -> int:
        return 2 * self.j


def require_even_k(k: int) -> int:
    if k % 2 != 0:
        raise UnsupportedDimension(
            f"k = {k}: the line-integral profile h is only constructed for even k"
        )
    return k // 2


def assemble_system(j: int, R: float) -> OdeSpec:
    """Coefficient matrix A(s) and initial data for dimension k = 2j."""
    if j < 2:
        raise DomainError("need j >= 2 (k >= 4)")
    if not 0.0 < R <= math.pi / 2 + 1e-12:
        raise DomainError("R must lie in (0, pi/2]")
    k = 2 * j
    a = a_coeffs(j)
    cos_R = math.cos(R)
    c = np.array([1.0 / (2 * j - i - 1) for i in range(1, j)])  # c_1..c_(j-1)

    def A(s: float) -> np.ndarray:
        cs = math.cos(s)
        ss = math.sin(s)
        mat = np.zeros((j - 1, j - 1))
        for i in range(1, j):
            row = i - 1
            # f_(j-1) source term
            mat[row, j - 2] += (j - 1) * a[i - 1] * (cs + (1 - i) * c[i - 1] * cos_R) / (a[i] * ss)
            # f_(i-1) coupling (absent for i = 1 since f_0 = 0)
            if i >= 2:
                mat[row, i - 2] += a[i - 1] * (i - 1) * (cos_R - cs) / (a[i] * ss)
            # f_i diagonal term
            mat[row, i - 1] += -(k - 2 - i) * cs / ss
        return mat

    f0 = cos_R * math.sin(R) ** (2 - k) * np.ones(j - 1)
    return OdeSpec(j=j, R=R, A=A, f0=f0)


def solve_h(spec: OdeSpec, tol: float = 1e-10, grid_size: int = 2000,
            delta_end: float = 1e-6) -> HSolution:
    """Integrate the system and assemble h, its integral and its minimum."""
    if tol < 1e-13:
        raise DomainError("tolerance below 1e-13 is not resolvable")
    j, R, k = spec.j, spec.R, spec.k
    s_end = math.pi - delta_end
    scale = max(1.0, float(np.max(np.abs(spec.f0))))
    sol = integrate.solve_ivp(
        lambda s, f: spec.A(s) @ f,
        (R, s_end),
        spec.f0,
        method="DOP853",
        dense_output=True,
        rtol=tol,
        atol=tol * 1e-2 * scale,
    )
    if not sol.success:
        raise StiffnessFailure(f"ODE integration failed: {sol.message}")

    def f_fun(s):
        return sol.sol(np.minimum(np.asarray(s, dtype=float), s_end))

    def h_fun(s):
        s_arr = np.asarray(s, dtype=float)
        return (j - 1) * f_fun(s_arr)[j - 2] * np.sin(s_arr) ** (k - 3)

    grid = np.linspace(R, s_end, grid_size)
    f_values = f_fun(grid).T
    h_values = (j - 1) * f_values[:, j - 2] * np.sin(grid) ** (k - 3)

    integral, _ = integrate.quad(
        lambda s: float(h_fun(s)), R, s_end, limit=400, epsabs=1e-13, epsrel=1e-12
    )
    # Frozen-coefficient tail over [pi - delta_end, pi].  The remaining
    # sine integral equals I_(k-2)(delta_end) by the s -> pi - s symmetry;
    # evaluating it directly avoids cancellation against the large f_end.
    f_end = sol.sol(s_end)
    tail = (j - 1) * f_end[j - 2] * sin_power_integral(k - 2, delta_end)
    integral += tail

    idx = int(np.argmin(h_values))
    lo = grid[max(idx - 1, 0)]
    hi = grid[min(idx + 1, grid_size - 1)]
    min_h = float(h_values[idx])
    argmin = float(grid[idx])
    if hi > lo:
        res = optimize.minimize_scalar(
            lambda s: float(h_fun(s)), bounds=(lo, hi), method="bounded",
            options={"xatol": 1e-10},
        )
        if res.fun < min_h:
            min_h = float(res.fun)
            argmin = float(res.x)

    decay_pts = np.array([math.pi - 10.0 ** (-m) for m in range(2, 7)])
    decay_pts = decay_pts[decay_pts > R]
    tail_decay = np.array(
        [float(np.max(np.abs(sol.sol(min(s, s_end))))) * math.sin(s) ** (k - 2) for s in decay_pts]
    )

    return HSolution(
        j=j, R=R, grid=grid, f_values=f_values, h_values=h_values,
        integral=float(integral), min_h=min_h, argmin=argmin,
        delta_end=delta_end, h_fun=h_fun, f_fun=f_fun, tail_decay=tail_decay,
    )


def solve_h_for(k: int, R: float, tol: float = 1e-10, **kw) -> HSolution:
    """Assemble and solve for dimension k (even, >= 4)."""
    j = require_even_k(k)
    if j < 2:
        raise DomainError("need k >= 4")
    return solve_h(assemble_system(j, R), tol=tol, **kw)


# ---------------------------------------------------------------------------
# k = 6 closed forms (used as oracles and for the Wronskian identity).

def k6_constant(R: float) -> float:
    """The prefactor cos R csc^2 R / (1 + sin^2 R / 3); 0 at R = pi/2.

    The denominator is the Wronskian constant 1 + sin^2(R)/3 of the
    fundamental matrix, which fixes the normalization of the data.
    """
    sin_sq = math.sin(R) ** 2
    return math.cos(R) / (sin_sq * (1.0 + sin_sq / 3.0))


def h_k6_closed(R: float) -> Callable[[np.ndarray], np.ndarray]:
    """Closed-form h for k = 6."""
    if not 0.0 < R <= math.pi / 2 + 1e-12:
        raise DomainError("R must lie in (0, pi/2]")
    c = k6_constant(R)
    csc_sq_R = 1.0 / math.sin(R) ** 2
    cos_R = math.cos(R)
    cot_half_R = 1.0 / math.tan(R / 2.0)

    def h(s):
        s_arr = np.asarray(s, dtype=float)
        sin_s = np.sin(s_arr)
        cos_s = np.cos(s_arr)
        ratio = np.tan(s_arr / 2.0) * cot_half_R  # cot(s/2)/cot(R/2) inverted below
        bracket = cos_s**2 - cos_R * cos_s - math.sin(R) ** 2 / 3.0
        out = c * ((1.0 + 2.0 * csc_sq_R) * sin_s**3
                   + bracket * sin_s * ratio ** (-cos_R))
        return float(out) if np.isscalar(s) else out

    return h


def k6_solution_matrix(R: float) -> Callable[[float], np.ndarray]:
    """Fundamental matrix for the k = 6 system in its (f_1, f_2) normalization.

    Columns are solutions; the first is the constant vector (1, 1).
    """
    cos_R = math.cos(R)

    def phi(s: float) -> np.ndarray:
        cs = math.cos(s)
        csc_sq = 1.0 / math.sin(s) ** 2
        pw = (1.0 / math.tan(s / 2.0)) ** cos_R
        g1 = (1.0 - cos_R * cs + cs * cs) * csc_sq * pw
        g2 = (cs * cs - cos_R * cs - math.sin(R) ** 2 / 3.0) * csc_sq * pw
        return np.array([[1.0, g1], [1.0, g2]])

    return phi


def k6_f_closed(R: float) -> Callable[[float], np.ndarray]:
    """Closed-form (f_1, f_2) with f(R) sin^4 R = cos R (3, 2)."""
    c = k6_constant(R)
    cos_R = math.cos(R)
    phi = k6_solution_matrix(R)
    coeffs = np.array([1.0 + 2.0 / math.sin(R) ** 2, math.tan(R / 2.0) ** cos_R])

    def f(s: float) -> np.ndarray:
        return c * phi(s) @ coeffs

    return f


def k6_state_matrix(R: float) -> Callable[[float], np.ndarray]:
    """The k = 6 coefficient matrix in its (f_1, f_2) normalization."""
    cos_R = math.cos(R)

    def A(s: float) -> np.ndarray:
        cs = math.cos(s)
        ss = math.sin(s)
        return np.array([[-3.0 * cs, 3.0 * cs], [cos_R - cs, cs - cos_R]]) / ss

    return A


def wronskian_check(R: float, s_grid: np.ndarray) -> np.ndarray:
    """Residual of det(fundamental matrix) against the Liouville closed form.

    det = C csc^2(s) (cot(s/2))^cos(R) with C = -1 - sin^2(R)/3.
    """
    phi = k6_solution_matrix(R)
    C = -1.0 - math.sin(R) ** 2 / 3.0
    cos_R = math.cos(R)
    out = np.empty(len(s_grid))
    for i, s in enumerate(np.asarray(s_grid, dtype=float)):
        det = float(np.linalg.det(phi(s)))
        rhs = C / math.sin(s) ** 2 * (1.0 / math.tan(s / 2.0)) ** cos_R
        out[i] = det - rhs
    return out


# ---------------------------------------------------------------------------
# Analysis entry points.

def constraint_check(k: int, R: float, tol: float = 1e-10) -> dict:
    """Residuals of 1 + integral(h) against its two closed forms in I."""
    hsol = solve_h_for(k, R, tol=tol)
    lhs = 1.0 + hsol.integral
    rhs = sin_power_integral(k - 2, math.pi / 2) / sin_power_integral(k - 2, R)
    rhs_middle = ((k - 1) / (k - 2)) * (sin_power_integral(k, math.pi) / 2.0) / sin_power_integral(k - 2, R)
    return {
        "k": k,
        "R": R,
        "one_plus_integral": lhs,
        "target": rhs,
        "residual": abs(lhs - rhs),
        "residual_middle_form": abs(lhs - rhs_middle),
    }


def monotonicity_check(R: float, tol: float = 1e-10, grid_size: int = 1000) -> dict:
    """k = 6 sign structure: f_1 - f_2 > 0 and f_2 strictly increasing.

    Components are reported in the (f_1, f_2) normalization with data
    cos(R) (3, 2); f_2' is evaluated through the identity
    (sin s) f_2' = (cos R - cos s)(f_1 - f_2).
    """
    hsol = solve_h_for(6, R, tol=tol)
    grid = np.linspace(R + 1e-4, math.pi - 1e-3, grid_size)
    f = hsol.f_fun(grid)
    f1 = 15.0 * a_coeffs(3)[1] * f[0]  # = 3 f_1
    f2 = 15.0 * a_coeffs(3)[2] * f[1]  # = 2 f_2
    diff = f1 - f2
    f2_prime = (math.cos(R) - np.cos(grid)) * diff / np.sin(grid)
    return {
        "R": R,
        "min_f1_minus_f2": float(np.min(diff)),
        "min_f2_prime": float(np.min(f2_prime)),
        "f1_at_R": 3.0 * math.cos(R) / math.sin(R) ** 4,
        "f2_at_R": 2.0 * math.cos(R) / math.sin(R) ** 4,
    }


def h_min_scan(k: int, R_grid: np.ndarray, tol: float = 1e-9) -> list[dict]:
    """Per-R minimum of h over [R, pi]; negative minima are flagged."""
    require_even_k(k)
    rows = []
    for R in np.asarray(R_grid, dtype=float):
        if abs(R - math.pi / 2) < 1e-12:
            rows.append({"R": float(R), "min_h": 0.0, "argmin": float(R), "flag": False})
            continue
        hsol = solve_h_for(k, float(R), tol=tol)
        rows.append({
            "R": float(R),
            "min_h": hsol.min_h,
            "argmin": hsol.argmin,
            "flag": bool(hsol.min_h < -1e-10),
        })
    return rows
