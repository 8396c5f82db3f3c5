"""Stress-strain curve of a 1/1 ceramic-metal rod with a hardening metal."""

import numpy as np

from embedcell.plasticity import PlasticMetalLaw, stress_strain_curve

law = PlasticMetalLaw(alpha=1.0, beta=1.0, u_crit=1.0)
for p in stress_strain_curve(np.linspace(0.25, 3.0, 12), kappa_cer=2.0, law=law):
    print(f"l={p.l:5.2f}  F={p.F_direct:.6f}  F_ecm-F={p.F_ecm - p.F_direct:+.1e}  {p.regime}")
