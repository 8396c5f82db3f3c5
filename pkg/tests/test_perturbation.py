import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from embedcell.fem import (DisplacementField, h1_diff, h1_norm, h1_seminorm,
                           integral_partial1_u1, mean_partial2_u2, solve_tensile_2d,
                           tensile_force_2d)
from embedcell.materials import MaterialField2D, PhaseParams, homogeneous_field_2d
from embedcell.mesh import build_mesh
from embedcell.perturbation import (PerturbationSweep, cascade_step_norm,
                                    ecm_first_iteration_perturbation, error_order_fit,
                                    first_order_force, series_terms, solve_u1, u0_exact,
                                    u1_hom_exact)

from oracles import homogeneous_force, u0_nodal


@pytest.fixture(scope="module")
def random_pert():
    m = build_mesh(12)
    return m, np.random.default_rng(5).uniform(-1.0, 1.0, m.n_elements)


class TestU0:
    def test_matches_oracle(self):
        m = build_mesh(6)
        u = u0_exact(m, 2.0, 1.0, 0.01)
        a, b = u0_nodal(6, 2.0, 1.0, 0.01)
        assert np.allclose(u.u1, a, atol=1e-18) and np.allclose(u.u2, b, atol=1e-18)

    def test_zero_lambda(self):
        u = u0_exact(build_mesh(4), 0.0, 1.0, 0.3)
        assert np.all(u.u1 == 0.0)

    def test_half_poisson(self):
        u = u0_exact(build_mesh(4), 2.0, 1.0, 1.0)
        assert math.isclose(u.u1[0], 0.25)

    def test_zero_mean(self):
        assert abs(u0_exact(build_mesh(5), 3.0, 0.7, 0.1).mean_u1()) < 1e-17

    def test_is_discrete_solution(self):
        m = build_mesh(8)
        u = solve_tensile_2d(m, homogeneous_field_2d(m, 2.0, 1.0), 0.01)
        assert h1_diff(u, u0_exact(m, 2.0, 1.0, 0.01)) < 1e-12


class TestU1:
    def test_zero_perturbation(self):
        m = build_mesh(6)
        u = solve_u1(m, 0.0, 0.0, 2.0, 1.0, u0_exact(m, 2.0, 1.0, 0.01))
        assert h1_norm(u) == 0.0

    def test_hom_example(self):
        m = build_mesh(4)
        u = u1_hom_exact(1.0, 0.0, 2.0, 1.0, 0.01, m)
        assert math.isclose(u.u1[1] - u.u1[0], -1.25e-3 * m.h, rel_tol=1e-12)
        assert np.all(u.u2 == 0.0) and abs(u.mean_u1()) < 1e-18
        assert h1_norm(u1_hom_exact(0.0, 0.0, 2.0, 1.0, 0.01, m)) == 0.0

    @given(lb=st.floats(-2.0, 2.0), mb=st.floats(-0.5, 0.5), lam0=st.floats(0.0, 5.0),
           mu0=st.floats(0.5, 3.0))
    def test_constant_perturbation(self, lb, mb, lam0, mu0):
        m = build_mesh(4)
        u1 = solve_u1(m, lb, mb, lam0, mu0, u0_exact(m, lam0, mu0, 0.01))
        ref = u1_hom_exact(lb, mb, lam0, mu0, 0.01, m)
        scale = (abs(lb) + abs(mb)) * 0.01 / (lam0 + 2 * mu0)
        assert h1_seminorm(u1 - ref) <= 1e-9 * scale + 1e-16
        assert abs(u1.mean_u1()) < 1e-15

    def test_partial1_integral(self, random_pert):
        m, lp = random_pert
        u1 = solve_u1(m, lp, None, 1.5, 1.0, u0_exact(m, 1.5, 1.0, 0.01))
        nu = 1.5 / 3.5
        expected = -(1 - nu) * 0.01 / 3.5 * lp.sum() * m.h ** 2
        assert math.isclose(integral_partial1_u1(u1), expected, rel_tol=1e-9)

    def test_first_order_force(self, random_pert):
        m, lp = random_pert
        lam0, mu0, l, eps = 1.5, 1.0, 0.01, 0.01
        u0 = u0_exact(m, lam0, mu0, l)
        u1 = solve_u1(m, lp, None, lam0, mu0, u0)
        f = {s: tensile_force_2d(MaterialField2D(m, lam0 + s * eps * lp, mu0),
                                 u0 + u1.scaled(s * eps)) for s in (1, -1)}
        central = (f[1] - f[-1]) / (2 * eps)
        assert math.isclose(central, first_order_force(m, lp, lam0, mu0, l), rel_tol=1e-6)

    def test_force_monotony(self):
        m = build_mesh(8)
        rng = np.random.default_rng(11)
        lam0, mu0, l, eps = 1.0, 1.0, 0.01, 0.01
        for _ in range(10):
            p1 = rng.uniform(-1, 1, m.n_elements)
            p2 = p1 + rng.uniform(0.0, 1.0, m.n_elements)
            f1, f2 = (tensile_force_2d(fld, solve_tensile_2d(m, fld, l)) for fld in
                      (MaterialField2D(m, lam0 + eps * p, mu0) for p in (p1, p2)))
            assert f2 - f1 > 0


class TestSeries:
    def test_order_zero(self, random_pert):
        m, lp = random_pert
        s = series_terms(m, lp, 1.0, 1.0, 0.01, 0)
        assert s.order == 0 and len(s.terms) == 1

    def test_corrector_spaces(self, random_pert):
        m, lp = random_pert
        s = series_terms(m, lp, 1.0, 1.0, 0.01, 4)
        assert s.terms[0].l == 0.01
        for u in s.terms[1:]:
            assert u.l == 0.0
            assert np.all(u.u2[m.bottom_nodes] == 0) and np.all(u.u2[m.top_nodes] == 0)
            assert abs(u.mean_u1()) < 1e-12 and abs(mean_partial2_u2(u)) < 1e-12

    def test_partial_sums_converge(self, random_pert):
        m, lp = random_pert
        s = series_terms(m, lp, 1.0, 1.0, 0.01, 5, eps=0.05)
        u = solve_tensile_2d(m, MaterialField2D(m, 1.0 + 0.05 * lp, 1.0), 0.01)
        errs = [h1_diff(u, s.partial_sum(k)) for k in range(6)]
        assert all(b < a for a, b in zip(errs, errs[1:]))

    def test_growth_bounded_by_step_norm(self, random_pert):
        m, lp = random_pert
        s = series_terms(m, lp, 1.0, 1.0, 0.01, 6)
        c = cascade_step_norm(m, lp, 1.0, 1.0)
        assert max(s.growth_ratios()[1:]) <= c * (1 + 1e-6)

    def test_step_norm_is_an_upper_bound(self):
        m = build_mesh(4)
        rng = np.random.default_rng(2)
        lp = rng.uniform(-1, 1, m.n_elements)
        c = cascade_step_norm(m, lp, 2.0, 1.0)
        fixed = np.r_[m.bottom_nodes, m.top_nodes]
        for _ in range(50):
            u2 = rng.normal(size=m.n_nodes)
            u2[fixed] = 0.0
            x = DisplacementField(m, rng.normal(size=m.n_nodes), u2, 0.0)
            y = solve_u1(m, lp, None, 2.0, 1.0, x)
            assert h1_norm(y) <= c * np.abs(lp).max() * h1_norm(x) * (1 + 1e-6)


class TestOrderFit:
    def test_exact_power(self):
        eps = [0.02, 0.04, 0.08]
        assert math.isclose(error_order_fit(eps, [3 * e ** 2 for e in eps]).slope, 2.0)

    def test_floor_flagged(self):
        with warnings.catch_warnings(record=True):
            warnings.simplefilter("always")
            fit = error_order_fit([0.1, 0.2, 0.4], [0.0, 1e-3, 4e-3])
        assert fit.flagged == (0,)

    def test_needs_three(self):
        with pytest.raises(ValueError):
            error_order_fit([0.1, 0.2], [1.0, 2.0])

    @given(c=st.floats(1e-6, 1e3), p=st.floats(0.5, 4.0))
    def test_recovers_slope(self, c, p):
        eps = np.array([0.01, 0.02, 0.05, 0.1])
        assert math.isclose(error_order_fit(eps, c * eps ** p).slope, p, rel_tol=1e-9)


class TestEcmPerturbation:
    def test_integral(self):
        m = build_mesh(32)
        p = PhaseParams.perturbed(1.0, 1.0, 2.0, vol_cer=0.4)
        lp = ecm_first_iteration_perturbation(m, p)
        # ceramic disk carries d_c, the dummy region vol_cer * d_c
        dummy = 1.0 - math.pi * 0.01
        expected = 2.0 * (0.4 * math.pi * 0.01 + 0.4 * dummy)
        assert math.isclose(lp.sum() * m.h ** 2, expected, rel_tol=1e-12)

    def test_sweep_csv(self):
        sw = PerturbationSweep([0.1, 0.2, 0.4], [1.0, 2.0, 4.0], [0.1, 0.4, 1.6])
        back = PerturbationSweep.from_csv(sw.to_csv())
        assert back.eps == sw.eps and back.err_order1 == sw.err_order1
