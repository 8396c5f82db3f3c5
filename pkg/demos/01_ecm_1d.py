"""Embedded cell iteration on a rod, compared with the harmonic mean."""

from embedcell import PhaseParams, check_monotone, kappa_hom, run_ecm_1d

params = PhaseParams(kappa_met=2.0, kappa_cer=6.0, vol_cer=0.5)
trace = run_ecm_1d(params, l=1.0, tol=1e-12)

print("first iterates:", [round(k, 6) for k in trace.dummy_values[:5]])
print(f"limit {trace.limit:.12f} after {trace.iterations} steps")
print(f"harmonic mean {kappa_hom(params):.12f}")
print("shape of the sequence:", check_monotone(trace).kind)
