"""Elasto-plastic 1/1 ceramic-metal rod.

The ceramic stays linear. The metal is linear up to a critical strain and
then hardens like a square root. Force balance in series makes the force
equal in every phase, so all relations are scalar equations in the force.
"""

import csv
import io
import math
from dataclasses import dataclass

from .ecm import EcmTrace, TOL_1D
from .errors import ModelRangeError

F_ATOL = 1e-12
MAX_BRACKET_DOUBLINGS = 200
# embedded cell layout: ceramic and metal take 1/10 each, dummy the rest
PHASE_LENGTH = 0.1
DUMMY_LENGTH = 0.8


@dataclass(frozen=True)
class PlasticMetalLaw:
    alpha: float
    beta: float
    u_crit: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0 and self.u_crit > 0):
            raise ValueError("alpha, beta and u_crit must be positive")

    @property
    def yield_force(self):
        return self.alpha * self.u_crit


def metal_force(strain, law):
    """Force carried by the metal at the given strain."""
    if strain < 0:
        raise ValueError(f"strain must be non-negative, got {strain}")
    if strain <= law.u_crit:
        return law.alpha * strain
    return law.yield_force + law.beta * math.sqrt(strain - law.u_crit)


def metal_strain(force, law):
    """Inverse of :func:`metal_force` for ``force >= 0``."""
    if force < 0:
        raise ValueError(f"force must be non-negative, got {force}")
    if force <= law.yield_force:
        return force / law.alpha
    return law.u_crit + ((force - law.yield_force) / law.beta) ** 2


def mixture_displacement(force, kappa_cer, law):
    """Displacement of the 1/1 mixture carrying ``force``."""
    return 0.5 * (force / kappa_cer + metal_strain(force, law))


def elastic_modulus(kappa_cer, law):
    return 1.0 / (0.5 / kappa_cer + 0.5 / law.alpha)


def _bisect(g, lo, target):
    """Root of the increasing ``g(F) = target`` on ``F >= lo`` by bisection."""
    hi = max(2.0 * lo, 1.0)
    for _ in range(MAX_BRACKET_DOUBLINGS):
        if g(hi) >= target:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise ModelRangeError(f"no bracket found for target {target}")
    while hi - lo > F_ATOL:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if g(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_stress_strain(l, kappa_cer, law):
    """Force of the 1/1 mixture at displacement ``l``."""
    if l <= 0:
        raise ValueError("l must be positive")
    if kappa_cer <= 0:
        raise ValueError("kappa_cer must be positive")
    force = l * elastic_modulus(kappa_cer, law)
    if force <= law.yield_force:
        return force
    return _bisect(lambda f: mixture_displacement(f, kappa_cer, law), law.yield_force, l)


def regime(l, kappa_cer, law):
    f = l * elastic_modulus(kappa_cer, law)
    return "elastic" if f <= law.yield_force else "plastic"


def cell_displacement(force, kappa_dummy, kappa_cer, law):
    """Displacement of the embedded cell rod carrying ``force``."""
    return (PHASE_LENGTH * (force / kappa_cer + metal_strain(force, law))
            + DUMMY_LENGTH * force / kappa_dummy)


def _cell_force(l, kappa_dummy, kappa_cer, law):
    def g(f):
        return cell_displacement(f, kappa_dummy, kappa_cer, law)

    # in the linear range the cell is a series of three springs
    f = l / (PHASE_LENGTH / kappa_cer + PHASE_LENGTH / law.alpha + DUMMY_LENGTH / kappa_dummy)
    if f <= law.yield_force:
        return f
    return _bisect(g, law.yield_force, l)


def run_ecm_plastic(kappa_cer, law, l, tol=TOL_1D, max_iter=200):
    """Embedded cell iteration with the nonlinear metal.

    Each step finds the force balancing the cell at displacement ``l`` and
    sets the dummy modulus to ``F / l``. Returns the trace; its last force
    is the ECM force.
    """
    if l <= 0:
        raise ValueError("l must be positive")
    d0 = 0.5 * (kappa_cer + law.alpha)
    trace = EcmTrace([d0], l=float(l), phase_values=(law.alpha, kappa_cer))
    d = d0
    for _ in range(max_iter):
        f = _cell_force(l, d, kappa_cer, law)
        d_new = f / l
        trace.forces.append(float(f))
        trace.dummy_values.append(float(d_new))
        if abs(d_new - d) <= tol * abs(d):
            trace.converged = True
            trace.stop_reason = "tolerance"
            break
        d = d_new
    return trace


@dataclass(frozen=True)
class CurvePoint:
    l: float
    F_direct: float
    F_ecm: float
    regime: str


def stress_strain_curve(l_grid, kappa_cer, law, tol=1e-13, max_iter=500):
    """Direct and embedded cell forces on a positive ascending grid."""
    grid = [float(x) for x in l_grid]
    if any(x <= 0 for x in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("l_grid must be positive and strictly ascending")
    out = []
    for l in grid:
        tr = run_ecm_plastic(kappa_cer, law, l, tol=tol, max_iter=max_iter)
        out.append(CurvePoint(l, solve_stress_strain(l, kappa_cer, law), tr.force,
                              regime(l, kappa_cer, law)))
    return out


def curve_to_csv(points):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["l", "F_direct", "F_ecm", "regime"])
    for p in points:
        w.writerow([repr(p.l), repr(p.F_direct), repr(p.F_ecm), p.regime])
    return buf.getvalue()


def curve_from_csv(text):
    return [CurvePoint(float(r["l"]), float(r["F_direct"]), float(r["F_ecm"]), r["regime"])
            for r in csv.DictReader(io.StringIO(text))]
