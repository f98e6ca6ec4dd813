import math

import numpy as np
import pytest

from spherecalib.errors import DomainError, SingularPoint
from spherecalib.fields import (
    PlaneBasis,
    RadialAtom,
    a_coeffs,
    div_along_plane,
    div_atoms_along_plane,
    eval_atom,
    eval_atoms,
    phi_profile,
    psi_closed_even,
    psi_general_value,
    psi_profile,
    random_plane,
    sup_div,
    tangent_basis,
)
from spherecalib.sphere import SpherePoint, dist, exp_map, grad_dist, tangent_toward

RNG = np.random.default_rng(99)


def random_point(d=6):
    v = RNG.standard_normal(d)
    return SpherePoint(v / np.linalg.norm(v))


class TestCoefficients:
    def test_a_coeffs_values(self):
        assert np.allclose(a_coeffs(1), [1.0])
        assert np.allclose(a_coeffs(2), [1.0 / 3.0, 1.0 / 3.0])
        assert np.allclose(a_coeffs(3), [0.2, 0.2, 2.0 / 15.0])
        assert np.allclose(a_coeffs(4), [1.0 / 7.0, 1.0 / 7.0, 4.0 / 35.0, 2.0 / 35.0])

    def test_recursion(self):
        # a_1 = 1/(2j-1), a_(i+1) = 2(j-i)/(2j-(i+1)) a_i
        for j in (2, 3, 4, 5):
            a = a_coeffs(j)
            assert a[0] == pytest.approx(1.0 / (2 * j - 1), abs=1e-15)
            for i in range(1, j):
                assert a[i] == pytest.approx(
                    2.0 * (j - i) / (2 * j - (i + 1)) * a[i - 1], abs=1e-15
                )


class TestProfiles:
    @pytest.mark.parametrize("k", [2, 3, 4, 5, 6, 8])
    def test_phi_ode_identity(self, k):
        # phi' = 1 - (k-1) phi cot, checked by central differences
        phi = phi_profile(k)
        eps = 1e-6
        for r in np.linspace(0.2, 2.8, 9):
            fd = (phi.value(r + eps) - phi.value(r - eps)) / (2 * eps)
            assert phi.deriv(r) == pytest.approx(fd, rel=1e-5, abs=1e-7)

    @pytest.mark.parametrize("k", [2, 4, 6, 8])
    def test_psi_ode_identity(self, k):
        psi = psi_profile(k)
        eps = 1e-6
        for r in np.linspace(0.3, 3.0, 9):
            fd = (psi.value(r + eps) - psi.value(r - eps)) / (2 * eps)
            assert psi.deriv(r) == pytest.approx(fd, abs=1e-6 * max(1, abs(psi.value(r))))

    def test_phi_at_origin(self):
        for k in (2, 4, 6):
            assert phi_profile(k).value(1e-14) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("k", [2, 4, 6, 8])
    def test_psi_vanishes_at_pi(self, k):
        assert abs(psi_profile(k).value(math.pi)) < 1e-12

    @pytest.mark.parametrize("k", [4, 6, 8])
    def test_closed_form_matches_quotient(self, k):
        # stop short of pi, where the quotient form is 0/0 and noisy
        r = np.linspace(0.05, 3.0, 200)
        closed = psi_closed_even(k, r)
        general = psi_general_value(k, r)
        scale = np.maximum(1.0, np.abs(closed))
        assert np.max(np.abs(closed - general) / scale) < 1e-9

    def test_k2_psi_is_minus_half_cot(self):
        r = np.linspace(0.1, 3.0, 50)
        assert np.allclose(psi_closed_even(2, r), -1.0 / np.tan(r / 2.0), atol=1e-12)

    def test_psi_singular_at_zero(self):
        with pytest.raises(SingularPoint):
            psi_closed_even(4, 0.0)

    def test_odd_k_closed_form_rejected(self):
        with pytest.raises(DomainError):
            psi_closed_even(5, 1.0)

    def test_psi_leading_singularity(self):
        # psi(r) -> -I_k(pi) r^(1-k) as r -> 0
        from spherecalib.sphere import sin_power_integral

        for k in (4, 6, 8):
            r = 1e-4
            lead = -sin_power_integral(k, math.pi) * r ** (1 - k)
            assert psi_closed_even(k, r) == pytest.approx(lead, rel=1e-6)


class TestAtoms:
    def test_eval_atom_matches_batch(self):
        k = 4
        q = random_point()
        atoms = [
            RadialAtom(random_point(), phi_profile(k), 0.7),
            RadialAtom(random_point(), psi_profile(k), -0.3),
            RadialAtom(random_point(), psi_profile(k), 1.1),
        ]
        total = eval_atoms(atoms, q)
        manual = sum(eval_atom(a, q).vec for a in atoms)
        assert np.allclose(total.vec, manual, atol=1e-12)

    def test_zero_weight_atom(self):
        a = RadialAtom(random_point(), phi_profile(4), 0.0)
        assert np.allclose(eval_atom(a, random_point()).vec, 0.0)

    def test_batch_requires_uniform_k(self):
        atoms = [
            RadialAtom(random_point(), phi_profile(4), 1.0),
            RadialAtom(random_point(), phi_profile(6), 1.0),
        ]
        with pytest.raises(DomainError):
            eval_atoms(atoms, random_point())

    def test_empty_batch_rejected(self):
        with pytest.raises(DomainError):
            eval_atoms([], random_point())

    def test_field_is_tangent(self):
        q = random_point()
        atoms = [RadialAtom(random_point(), psi_profile(6), 0.5) for _ in range(4)]
        v = eval_atoms(atoms, q)
        assert abs(v.vec @ q.coords) < 1e-10


class TestPlanesAndDivergence:
    def test_tangent_basis_orthonormal(self):
        q = random_point()
        basis = tangent_basis(q.coords)
        assert basis.shape == (5, 6)
        assert np.allclose(basis @ basis.T, np.eye(5), atol=1e-12)
        assert np.allclose(basis @ q.coords, 0.0, atol=1e-12)

    def test_plane_validation(self):
        q = random_point()
        with pytest.raises(DomainError):
            PlaneBasis(q, np.eye(6)[:3])  # not tangent to q in general

    def test_radial_plane_divergence_is_weight(self):
        # a plane containing grad d_c sees divergence w (f' + (k-1) f cot) = w
        k = 4
        center = random_point()
        q = random_point()
        u = grad_dist(center, q).vec
        basis = tangent_basis(q.coords)
        # rotate the basis so its first vector is u, keep k rows
        proj = basis @ u
        rot = np.linalg.qr(
            np.column_stack([proj, RNG.standard_normal((5, 4))])
        )[0].T
        vectors = (rot @ basis)[:k]
        if vectors[0] @ u < 0:
            vectors[0] = -vectors[0]
        plane = PlaneBasis(q, vectors)
        for profile in (phi_profile(k), psi_profile(k)):
            atom = RadialAtom(center, profile, 0.83)
            assert div_along_plane(atom, plane) == pytest.approx(0.83, abs=1e-10)

    def test_batch_divergence_matches_singles(self):
        # k = 6 planes need an ambient sphere of dimension at least 6
        k = 6
        q = random_point(8)
        atoms = [RadialAtom(random_point(8), psi_profile(k), RNG.uniform(-1, 1))
                 for _ in range(5)]
        atoms.append(RadialAtom(random_point(8), phi_profile(k), 0.4))
        plane = random_plane(q, k, RNG)
        total = div_atoms_along_plane(atoms, plane)
        manual = sum(div_along_plane(a, plane) for a in atoms)
        assert total == pytest.approx(manual, abs=1e-10)

    def test_sup_div_dominates_random_planes(self):
        k = 4
        q = random_point()
        atoms = [RadialAtom(random_point(), psi_profile(k), RNG.uniform(-1, 1))
                 for _ in range(6)]
        sup = sup_div(atoms, q, k)
        worst = max(
            div_atoms_along_plane(atoms, random_plane(q, k, RNG))
            for _ in range(2000)
        )
        assert worst <= sup + 1e-10

    def test_sup_div_attained_by_eigenplane(self):
        # the maximizing plane is spanned by the top-k eigenvectors of the
        # tangent-restricted coefficient matrix; the sup is attained exactly
        from spherecalib._backend import accumulate
        from spherecalib.fields import atom_arrays

        k = 4
        q = random_point()
        atoms = [RadialAtom(random_point(), psi_profile(k), RNG.uniform(-1, 1))
                 for _ in range(6)]
        centers, weights, kinds = atom_arrays(atoms)
        _, trace, mat = accumulate(q.coords, centers, weights, kinds, k, a_coeffs(2))
        basis = tangent_basis(q.coords)
        evals, evecs = np.linalg.eigh(basis @ mat @ basis.T)
        top = (evecs[:, -k:]).T @ basis
        plane = PlaneBasis(q, top)
        sup = sup_div(atoms, q, k)
        assert div_atoms_along_plane(atoms, plane) == pytest.approx(sup, abs=1e-10)

    def test_single_phi_atom_sup_is_one(self):
        # sup over planes of div Phi_p is exactly 1 for any point
        k = 4
        p = random_point()
        q = exp_map(p, tangent_toward(p, random_point()), 0.8)
        atoms = [RadialAtom(p, phi_profile(k), 1.0)]
        assert sup_div(atoms, q, k) == pytest.approx(1.0, abs=1e-12)
