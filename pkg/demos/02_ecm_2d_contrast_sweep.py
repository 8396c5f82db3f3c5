"""Plane-stress embedded cell for growing phase contrast.

The limit departs from the first-order effective value quadratically in
the contrast scale.
"""

from embedcell import PhaseParams, error_order_fit, lambda_hom_first_order, run_ecm_2d

eps_list = [0.02, 0.04, 0.08]
gaps = []
for eps in eps_list:
    p = PhaseParams.perturbed(lambda_met=1.0, eps=eps, d_c=1.0, mu=1.0, vol_cer=0.5)
    trace = run_ecm_2d(p, mesh_n=64, l=0.01, max_iter=1000)
    gap = abs(trace.limit - lambda_hom_first_order(p))
    gaps.append(gap)
    print(f"eps={eps:.2f}  lambda_dummy={trace.limit:.10f}  gap={gap:.3e}  "
          f"steps={trace.iterations}")

print(f"fitted order: {error_order_fit(eps_list, gaps).slope:.3f}")
