"""Reference values for the embedded cell limits.

In 1D the effective modulus is the harmonic mean. In 2D the effective first
Lame parameter is known to first order in the contrast; beyond that it is
estimated numerically from periodic microstructures of shrinking period.
"""

import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .ecm import lambda_equiv, run_ecm_1d
from .elastic1d import kappa_hom, solve_tensile_1d, tensile_force_1d
from .fem import solve_tensile_2d, tensile_force_2d
from .materials import build_periodic_kappa_1d, build_periodic_lambda_2d
from .mesh import build_mesh
from .perturbation import error_order_fit, poisson_number


def lambda_hom_first_order(params):
    """``lambda_met + eps * vol_cer * d_c``."""
    return params.lambda_met + params.eps * params.vol_cer * params.d_c


def homogeneous_force(lam, mu, l):
    """Tensile force of a homogeneous plate."""
    return ((1.0 - poisson_number(lam, mu)) * lam + 2.0 * mu) * l


@dataclass
class HomogenizationReport:
    deltas: list
    forces: list
    extrapolated_force: float
    lambda_hom_first_order: float
    lambda_hom_estimate: float
    ecm_limit: float = None
    gap: float = None

    def __post_init__(self):
        d = np.asarray(self.deltas, dtype=float)
        if d.size == 0 or np.any(np.diff(d) >= 0):
            raise ValueError("deltas must be strictly decreasing")
        if not np.all(np.isfinite(self.forces)):
            raise ValueError("forces must be finite")

    def differences(self):
        """``|F(delta_i) - F(delta_{i+1})|`` along the sweep."""
        return np.abs(np.diff(self.forces)).tolist()

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["delta", "F_delta"])
        for d, f in zip(self.deltas, self.forces):
            w.writerow([repr(float(d)), repr(float(f))])
        return buf.getvalue()


def richardson(deltas, forces):
    """Limit of the last two forces assuming an error linear in delta."""
    if len(forces) < 2:
        return float(forces[-1])
    d0, d1 = deltas[-2], deltas[-1]
    f0, f1 = forces[-2], forces[-1]
    return float((d0 * f1 - d1 * f0) / (d0 - d1))


def delta_sweep_2d(params, l=0.01, deltas=(1.0, 0.5, 0.25), mesh_per_period=16,
                   inclusion_vol=None, assignment="area", method="pinned"):
    """Tensile forces of periodic disk composites with shrinking period.

    Each period holds one centred ceramic disk of area ``inclusion_vol``
    (defaults to ``vol_cer``) in metal; the mesh has ``mesh_per_period``
    elements per period and direction.
    """
    vol = params.vol_cer if inclusion_vol is None else inclusion_vol
    forces = []
    for delta in deltas:
        k = round(1.0 / delta)
        mesh = build_mesh(k * mesh_per_period)
        fld = build_periodic_lambda_2d(mesh, params, delta, vol, assignment)
        forces.append(tensile_force_2d(fld, solve_tensile_2d(mesh, fld, l, method=method)))
    f_hom = richardson(list(deltas), forces)
    return HomogenizationReport(
        deltas=[float(d) for d in deltas], forces=forces, extrapolated_force=f_hom,
        lambda_hom_first_order=lambda_hom_first_order(params),
        lambda_hom_estimate=lambda_equiv(f_hom, params.mu, l))


@dataclass
class GapRecord:
    eps: float
    lambda_dummy: float
    lambda_hom_first_order: float
    lambda_hom_estimate: float = None
    gap_first_order: float = None
    gap_estimate: float = None
    force_gap: float = None


def compare_ecm_vs_hom(ecm, report=None, params=None, mu=None):
    """Gaps between the ECM limit and the homogenization references.

    ``gap_first_order`` compares with the first-order formula (needs
    ``params``), ``gap_estimate`` and ``force_gap`` with the delta-sweep
    estimate (needs ``report`` and ``mu``).
    """
    if report is None and params is None:
        raise ValueError("need a report or params")
    lam_d = float(ecm.limit)
    first = lambda_hom_first_order(params) if params is not None else report.lambda_hom_first_order
    rec = GapRecord(eps=None if params is None else params.eps, lambda_dummy=lam_d,
                    lambda_hom_first_order=first, gap_first_order=abs(lam_d - first))
    if report is not None:
        report.ecm_limit = lam_d
        report.gap = abs(report.lambda_hom_estimate - lam_d)
        rec.lambda_hom_estimate = report.lambda_hom_estimate
        rec.gap_estimate = report.gap
        if mu is not None:
            rec.force_gap = abs(homogeneous_force(report.lambda_hom_estimate, mu, ecm.l)
                                - homogeneous_force(lam_d, mu, ecm.l))
    return rec


@dataclass
class GapSweep:
    eps: list
    gaps: list
    floor: float = 0.0
    fit: object = field(default=None)

    def __post_init__(self):
        if self.fit is None and len(self.eps) >= 3:
            corrected = [abs(g - self.floor) for g in self.gaps]
            self.fit = error_order_fit(self.eps, corrected)

    @property
    def slope(self):
        return None if self.fit is None else self.fit.slope

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eps", "gap", "fitted_slope"])
        s = "" if self.slope is None else repr(float(self.slope))
        for e, g in zip(self.eps, self.gaps):
            w.writerow([repr(float(e)), repr(float(g)), s])
        return buf.getvalue()


def homogenize_1d(params, l=1.0, n_periods=(1, 4, 16), tol=1e-12, max_iter=500):
    """1D references: harmonic mean, periodic forces and the ECM limit."""
    k_hom = kappa_hom(params)
    forces = [float(tensile_force_1d(solve_tensile_1d(build_periodic_kappa_1d(params, n), l)))
              for n in n_periods]
    trace = run_ecm_1d(params, l, tol=tol, max_iter=max_iter)
    return {"kappa_hom": k_hom, "ecm_limit": float(trace.limit), "ecm_iterations": trace.iterations,
            "ecm_converged": trace.converged, "gap": float(abs(trace.limit - k_hom)),
            "n_periods": list(n_periods), "periodic_forces": forces,
            "F_hom": float(k_hom * l)}
