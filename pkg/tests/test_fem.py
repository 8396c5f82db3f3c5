import numpy as np
import pytest
from hypothesis import given, strategies as st

from embedcell.errors import ResolutionError, ShapeError, SolverError
from embedcell.fem import (DisplacementField, RhsFunctional, boundary_force_2d, energy_residual,
                           h1_diff, h1_norm, h1_seminorm, integral_div, mean_partial2_u2,
                           nodal_field, solve_tensile_2d, tensile_force_2d, zero_field)
from embedcell.materials import MaterialField2D, homogeneous_field_2d
from embedcell.mesh import (GAUSS_WEIGHTS, REF_K_LAMBDA, REF_K_MU, REF_MASS, Mesh2D,
                            build_mesh, shape_values)

from oracles import homogeneous_force, u0_nodal

METHODS = ["saddle", "pinned", "cg"]


class TestMesh:
    def test_too_coarse(self):
        with pytest.raises(ResolutionError):
            build_mesh(1)

    def test_counts_and_ordering(self):
        m = build_mesh(3)
        assert m.n_nodes == 16 and m.n_elements == 9
        assert np.allclose(m.nodes[5], [1 / 3, 1 / 3])
        assert list(m.elements[0]) == [0, 1, 5, 4]
        assert list(m.bottom_nodes) == [0, 1, 2, 3]
        assert list(m.top_nodes) == [12, 13, 14, 15]

    def test_partition_of_unity(self):
        for xi, eta in [(0.2, 0.7), (0.0, 1.0), (0.5, 0.5)]:
            assert np.isclose(shape_values(xi, eta).sum(), 1.0)
        assert np.isclose(GAUSS_WEIGHTS.sum(), 1.0)

    def test_mass_and_weights(self):
        m = build_mesh(5)
        one = np.ones(m.n_nodes)
        assert np.isclose(one @ m.scalar_mass @ one, 1.0)
        assert np.isclose(m.node_weights.sum(), 1.0)
        assert np.allclose(m.scalar_laplace @ one, 0.0)
        assert np.isclose(REF_MASS.sum(), 1.0)

    def test_reference_stiffness_symmetric(self):
        for k in (REF_K_LAMBDA, REF_K_MU):
            assert np.allclose(k, k.T)
            assert np.min(np.linalg.eigvalsh(k)) > -1e-12

    def test_rigid_motions_in_kernel(self):
        m = build_mesh(4)
        K = m.assemble_elasticity(2.0, 1.0)
        x, y = m.nodes[:, 0], m.nodes[:, 1]
        for u1, u2 in [(np.ones_like(x), 0 * x), (0 * x, np.ones_like(x)), (-y, x)]:
            assert np.allclose(K @ np.concatenate([u1, u2]), 0.0, atol=1e-13)

    def test_elementwise_coefficients(self):
        m = build_mesh(4)
        lam = np.arange(m.n_elements, dtype=float)
        mu = np.ones(m.n_elements)
        K = m.assemble_elasticity(lam, mu)
        assert abs(K - K.T).max() < 1e-13
        with pytest.raises(ShapeError):
            m.assemble_elasticity(lam[:-1], 1.0)


class TestAffineExactness:
    @pytest.mark.parametrize("method", METHODS)
    @pytest.mark.parametrize("n", [2, 8])
    def test_homogeneous(self, n, method):
        m = build_mesh(n)
        fld = homogeneous_field_2d(m, 2.0, 1.0)
        u = solve_tensile_2d(m, fld, 0.01, method=method)
        a, b = u0_nodal(n, 2.0, 1.0, 0.01)
        assert h1_diff(u, DisplacementField(m, a, b, 0.01)) < 1e-10
        assert np.isclose(tensile_force_2d(fld, u), homogeneous_force(2.0, 1.0, 0.01), rtol=1e-10)

    @given(lam=st.floats(0.0, 20.0), mu=st.floats(0.1, 10.0), l=st.floats(-0.1, 0.1))
    def test_affine_property(self, lam, mu, l):
        m = build_mesh(4)
        fld = homogeneous_field_2d(m, lam, mu)
        u = solve_tensile_2d(m, fld, l)
        a, b = u0_nodal(4, lam, mu, l)
        scale = max(abs(l), 1e-12)
        assert np.max(np.abs(u.u1 - a)) <= 1e-9 * scale
        assert np.max(np.abs(u.u2 - b)) <= 1e-9 * scale

    def test_boundary_force_matches_volume_force(self):
        m = build_mesh(6)
        fld = homogeneous_field_2d(m, 2.0, 1.0)
        u = solve_tensile_2d(m, fld, 0.01)
        assert np.isclose(boundary_force_2d(fld, u), tensile_force_2d(fld, u), rtol=1e-12)


class TestHeterogeneous:
    @pytest.fixture
    def setup(self):
        m = build_mesh(8)
        rng = np.random.default_rng(3)
        fld = MaterialField2D(m, rng.uniform(0.5, 3.0, m.n_elements), 1.0)
        return m, fld

    def test_methods_agree(self, setup):
        m, fld = setup
        us = [solve_tensile_2d(m, fld, 0.02, method=k) for k in METHODS]
        assert h1_diff(us[0], us[1]) < 1e-12
        assert h1_diff(us[0], us[2]) < 1e-8

    def test_constraints(self, setup):
        m, fld = setup
        u, info = solve_tensile_2d(m, fld, 0.02, return_info=True)
        assert info.residual < 1e-10
        assert abs(u.mean_u1()) < 1e-15
        assert np.all(u.u2[m.bottom_nodes] == 0.0)
        assert np.all(u.u2[m.top_nodes] == 0.02)
        assert np.max(np.abs(energy_residual(m, fld, u))) < 1e-12
        assert abs(mean_partial2_u2(u) - 0.02) < 1e-15

    def test_force_bounded_by_phases(self, setup):
        m, fld = setup
        f = tensile_force_2d(fld, solve_tensile_2d(m, fld, 0.01))
        assert homogeneous_force(0.5, 1.0, 0.01) <= f <= homogeneous_force(3.0, 1.0, 0.01)

    def test_cg_failure_is_reported(self, setup):
        m, fld = setup
        with pytest.raises(SolverError) as exc:
            solve_tensile_2d(m, fld, 0.01, method="cg", maxiter=2)
        assert exc.value.residual > 1e-10

    def test_unknown_method(self, setup):
        m, fld = setup
        with pytest.raises(ValueError):
            solve_tensile_2d(m, fld, 0.01, method="magic")

    def test_mesh_mismatch(self, setup):
        _, fld = setup
        with pytest.raises(ShapeError):
            solve_tensile_2d(build_mesh(4), fld, 0.01)


class TestRhsFunctional:
    def test_shift_invariance_and_linearity(self):
        m = build_mesh(5)
        rng = np.random.default_rng(0)
        lam = rng.uniform(-1, 1, m.n_elements)
        src = DisplacementField(m, rng.normal(size=m.n_nodes), rng.normal(size=m.n_nodes), 0.0)
        rhs = RhsFunctional(lam, src)
        v = DisplacementField(m, rng.normal(size=m.n_nodes), rng.normal(size=m.n_nodes), 0.0)
        shift = nodal_field(m, lambda x, y: (1.0 + 0 * x, 0 * y))
        assert abs(rhs(v + shift) - rhs(v)) < 1e-12
        assert np.isclose(rhs(v.scaled(3.0)), 3.0 * rhs(v))

    def test_zero_source_gives_zero_solution(self):
        m = build_mesh(4)
        rhs = RhsFunctional(np.ones(m.n_elements), zero_field(m))
        u = solve_tensile_2d(m, homogeneous_field_2d(m, 1.0, 1.0), 0.0, rhs=rhs)
        assert h1_norm(u) == 0.0


class TestDisplacementField:
    def test_roundtrip(self):
        m = build_mesh(3)
        u = nodal_field(m, lambda x, y: (x * y, x - y), 0.5)
        v = DisplacementField.from_json(u.to_json())
        assert np.array_equal(u.u1, v.u1) and np.array_equal(u.u2, v.u2) and v.l == 0.5

    def test_vtk(self):
        m = build_mesh(2)
        text = nodal_field(m, lambda x, y: (x, y)).to_vtk()
        assert "DIMENSIONS 3 3 1" in text
        assert len(text.strip().splitlines()) == 9 + 9

    def test_shape_check(self):
        with pytest.raises(ShapeError):
            DisplacementField(build_mesh(2), np.zeros(3), np.zeros(9), 0.0)

    def test_norms_of_linear_field(self):
        m = build_mesh(4)
        u = nodal_field(m, lambda x, y: (x, 0 * y))
        assert np.isclose(h1_seminorm(u), 1.0)
        assert np.isclose(h1_norm(u) ** 2, 1.0 + 1.0 / 3.0)
        assert np.isclose(integral_div(u), 1.0)
