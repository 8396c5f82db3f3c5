import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from embedcell.ecm import run_ecm_1d
from embedcell.errors import ModelRangeError
from embedcell.materials import PhaseParams
from embedcell.plasticity import (PlasticMetalLaw, curve_from_csv, curve_to_csv,
                                  elastic_modulus, metal_force, metal_strain,
                                  mixture_displacement, run_ecm_plastic, solve_stress_strain,
                                  stress_strain_curve)

from oracles import ssr2_displacement

LAW = PlasticMetalLaw(1.0, 1.0, 1.0)
laws = st.builds(PlasticMetalLaw, st.floats(0.2, 5.0), st.floats(0.2, 5.0), st.floats(0.05, 2.0))


class TestMetalLaw:
    def test_examples(self):
        assert metal_force(2.0, LAW) == 2.0
        assert metal_force(0.0, LAW) == 0.0
        assert metal_force(1.0, LAW) == 1.0

    def test_negative_strain(self):
        with pytest.raises(ValueError):
            metal_force(-0.1, LAW)

    def test_invalid_law(self):
        with pytest.raises(ValueError):
            PlasticMetalLaw(1.0, 0.0, 1.0)

    @given(law=laws, s=st.floats(0.0, 20.0), ds=st.floats(0.0, 5.0))
    def test_monotone_and_inverse(self, law, s, ds):
        assert metal_force(s + ds, law) >= metal_force(s, law)
        assert math.isclose(metal_strain(metal_force(s, law), law), s, rel_tol=1e-9,
                            abs_tol=1e-12)

    def test_continuity(self):
        below = metal_force(1.0 - 1e-12, LAW)
        above = metal_force(1.0 + 1e-12, LAW)
        assert abs(above - below) < 1e-5


class TestStressStrain:
    def test_reference_example(self):
        assert math.isclose(ssr2_displacement(1.0, 2.0, 1.0, 1.0, 1.0), 0.75)
        assert math.isclose(solve_stress_strain(0.75, 2.0, LAW), 1.0, abs_tol=1e-11)

    def test_elastic(self):
        assert math.isclose(solve_stress_strain(0.3, 2.0, LAW), 0.3 / (0.25 + 0.5))

    @given(law=laws, kc=st.floats(0.5, 10.0), l=st.floats(1e-3, 10.0))
    def test_inverse_consistency(self, law, kc, l):
        f = solve_stress_strain(l, kc, law)
        assert math.isclose(mixture_displacement(f, kc, law), l, rel_tol=1e-10, abs_tol=1e-10)

    def test_oracle_relation(self):
        for l in [0.8, 1.5, 4.0]:
            f = solve_stress_strain(l, 2.0, LAW)
            assert math.isclose(ssr2_displacement(f, 2.0, 1.0, 1.0, 1.0), l, rel_tol=1e-10)

    def test_bad_input(self):
        with pytest.raises(ValueError):
            solve_stress_strain(0.0, 2.0, LAW)

    def test_no_bracket(self):
        with pytest.raises(ModelRangeError):
            solve_stress_strain(1e300, 2.0, PlasticMetalLaw(1.0, 1e300, 1.0))


class TestPlasticEcm:
    def test_elastic_limit(self):
        ks = [run_ecm_plastic(2.0, LAW, l, tol=1e-13, max_iter=500).limit for l in (0.05, 0.5)]
        assert math.isclose(ks[0], elastic_modulus(2.0, LAW), rel_tol=1e-10)
        assert math.isclose(ks[0], ks[1], rel_tol=1e-10)

    def test_matches_linear_ecm_without_yield(self):
        law = PlasticMetalLaw(1.5, 1.0, 1e9)
        t = run_ecm_plastic(4.0, law, 0.7, tol=1e-12)
        lin = run_ecm_1d(PhaseParams(kappa_met=1.5, kappa_cer=4.0, vol_cer=0.5), 0.7, tol=1e-12)
        assert np.allclose(t.dummy_values, lin.dummy_values, rtol=1e-12)

    def test_plastic_force_satisfies_relation(self):
        t = run_ecm_plastic(2.0, LAW, 2.0, tol=1e-13, max_iter=500)
        assert t.converged
        assert math.isclose(mixture_displacement(t.force, 2.0, LAW), 2.0, rel_tol=1e-9)

    def test_curve(self):
        grid = np.linspace(0.1, 3.0, 12)
        pts = stress_strain_curve(grid, 2.0, LAW)
        assert {p.regime for p in pts} == {"elastic", "plastic"}
        assert all(abs(p.F_direct - p.F_ecm) <= 1e-8 for p in pts)
        assert all(b.F_direct > a.F_direct for a, b in zip(pts, pts[1:]))
        assert curve_from_csv(curve_to_csv(pts)) == pts
        with pytest.raises(ValueError):
            stress_strain_curve([0.2, 0.1], 2.0, LAW)
