"""Accuracy of the affine solution and of its first correction."""

from embedcell.perturbation import perturbation_sweep

sweep = perturbation_sweep(lambda_met=1.0, mu=1.0, d_c=1.0, vol_cer=0.5, l=0.01, mesh_n=64)
for eps, e0, e1 in zip(sweep.eps, sweep.err_order0, sweep.err_order1):
    print(f"eps={eps:.2f}  |u - u0|={e0:.3e}  |u - (u0 + eps u1)|={e1:.3e}")
print(f"slopes: u0 {sweep.fits['order0'].slope:.3f}, "
      f"u0 + eps u1 {sweep.fits['order1'].slope:.3f}")
