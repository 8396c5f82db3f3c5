"""Embedded cell fixed-point iterations in one and two dimensions."""

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .elastic1d import kappa_equiv, solve_tensile_1d, tensile_force_1d
from .errors import ExtractionError
from .fem import solve_tensile_2d, tensile_force_2d
from .materials import (EmbeddedCellGeometry2D, MaterialField2D, build_ecm_kappa_1d,
                        disk_element_fractions, ecm_phase_fractions, solve_ecm_radii)
from .mesh import build_mesh

TOL_1D = 1e-10
TOL_2D = 1e-8
MAX_ITER = 200
ROUNDOFF = 1e-12  # rounding floor added to the containment slack


@dataclass
class EcmTrace:
    """Iterates of the dummy parameter.

    ``forces[n]`` is the tensile force computed with dummy value
    ``dummy_values[n]``; hence ``len(forces) == len(dummy_values) - 1``.
    """

    dummy_values: list
    forces: list = field(default_factory=list)
    converged: bool = False
    stop_reason: str = "max_iter"
    l: float = 1.0
    phase_values: tuple = None

    @property
    def iterations(self):
        return len(self.forces)

    @property
    def limit(self):
        return self.dummy_values[-1]

    @property
    def force(self):
        """Last computed force, the approximation of the limit force."""
        return self.forces[-1] if self.forces else None

    def rel_changes(self):
        d = np.asarray(self.dummy_values)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.abs(np.diff(d)) / np.abs(d[:-1])

    def summary(self):
        return {"limit": float(self.limit), "force": None if self.force is None else float(self.force),
                "iterations": self.iterations, "converged": bool(self.converged),
                "stop_reason": self.stop_reason}

    def summary_json(self):
        return json.dumps(self.summary(), indent=2, sort_keys=True)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "dummy_value", "force", "rel_change"])
        rc = self.rel_changes()
        for n, d in enumerate(self.dummy_values):
            f = repr(float(self.forces[n])) if n < len(self.forces) else ""
            r = repr(float(rc[n - 1])) if n > 0 else ""
            w.writerow([n, repr(float(d)), f, r])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text, **kw):
        dummy, forces = [], []
        for rec in csv.DictReader(io.StringIO(text)):
            dummy.append(float(rec["dummy_value"]))
            if rec["force"]:
                forces.append(float(rec["force"]))
        return cls(dummy, forces, **kw)


def _iterate(d0, step, tol, max_iter, trace):
    d = d0
    for _ in range(max_iter):
        force, d_new = step(d)
        force, d_new = float(force), float(d_new)
        trace.forces.append(force)
        trace.dummy_values.append(d_new)
        if abs(d_new - d) <= tol * abs(d):
            trace.converged = True
            trace.stop_reason = "tolerance"
            break
        d = d_new
    return trace


def run_ecm_1d(params, l=1.0, tol=TOL_1D, max_iter=MAX_ITER):
    """Embedded cell iteration for the longitudinal modulus.

    Each step solves the three-phase rod exactly and takes the equivalent
    modulus of the resulting force as the next dummy value.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if l == 0:
        raise ValueError("l must be nonzero")
    d0 = float(params.vol_cer * params.kappa_cer + params.vol_met * params.kappa_met)

    def step(kd):
        sol = solve_tensile_1d(build_ecm_kappa_1d(params, kd), l)
        force = tensile_force_1d(sol)
        return force, kappa_equiv(force, l)

    trace = EcmTrace([d0], l=float(l), phase_values=(params.kappa_met, params.kappa_cer))
    return _iterate(d0, step, tol, max_iter, trace)


def lambda_equiv(force, mu, l):
    """First Lame parameter of the homogeneous body that carries ``force``."""
    if l == 0:
        raise ExtractionError("equivalent parameter undefined for l = 0")
    den = 2.0 * l - force / (2.0 * mu)
    if den == 0:
        raise ExtractionError(f"force {force!r} leaves a zero denominator")
    return (force - 2.0 * mu * l) / den


def ecm_cell_fractions(mesh, vol_cer, assignment="area"):
    """(ceramic, metal, dummy) fractions per element for the 2D embedded cell.

    For a pure phase the whole r = 0.1 disk carries that phase.
    """
    if 0.0 < vol_cer < 1.0:
        return ecm_phase_fractions(mesh, solve_ecm_radii(vol_cer), assignment)
    geo = EmbeddedCellGeometry2D(r1=0.1, r2=0.1)
    if assignment == "area":
        disk = disk_element_fractions(mesh, geo.center, geo.r2)
    else:
        disk = ecm_phase_fractions(mesh, geo, assignment)[:, 0]
    zero = np.zeros(mesh.n_elements)
    cer, met = (disk, zero) if vol_cer == 1.0 else (zero, disk)
    return np.column_stack([cer, met, 1.0 - disk])


def run_ecm_2d(params, mesh_n=64, l=0.01, tol=TOL_2D, max_iter=MAX_ITER,
               assignment="area", method="pinned"):
    """Embedded cell iteration for the first Lame parameter at constant shear modulus."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    mesh = build_mesh(mesh_n)
    frac = ecm_cell_fractions(mesh, params.vol_cer, assignment)
    d0 = float(params.vol_cer * params.lambda_cer + params.vol_met * params.lambda_met)

    def step(ld):
        lam = frac @ np.array([params.lambda_cer, params.lambda_met, ld])
        fld = MaterialField2D(mesh, lam, params.mu)
        u = solve_tensile_2d(mesh, fld, l, method=method)
        force = tensile_force_2d(fld, u)
        return force, lambda_equiv(force, params.mu, l)

    trace = EcmTrace([d0], l=float(l), phase_values=(params.lambda_met, params.lambda_cer))
    return _iterate(d0, step, tol, max_iter, trace)


@dataclass(frozen=True)
class MonotoneReport:
    kind: str  # "monotone_increasing" | "monotone_decreasing" | "constant" | "violated"
    index: int = None
    contained: bool = True

    @property
    def ok(self):
        return self.kind != "violated" and self.contained


def check_monotone(trace, atol=0.0, bounds=None, slack=0.0):
    """Classify a sequence (or trace) as monotone, constant or violated.

    Steps of size <= ``atol`` count as flat. ``index`` marks the first value
    that moves against the established direction. With ``bounds`` the values
    must also lie in ``[min(bounds) - slack, max(bounds) + slack]``, widened
    by a relative rounding floor; a
    trace's phase values are used when ``bounds`` is omitted.
    """
    values = np.asarray(getattr(trace, "dummy_values", trace), dtype=float)
    if len(values) < 2:
        raise ValueError("need at least two iterates")
    if bounds is None:
        bounds = getattr(trace, "phase_values", None)
    contained = True
    if bounds is not None:
        lo, hi = min(bounds), max(bounds)
        pad = slack + ROUNDOFF * max(abs(lo), abs(hi), 1.0)
        lo, hi = lo - pad, hi + pad
        contained = bool(np.all((values >= lo) & (values <= hi)))
    steps = np.diff(values)
    direction = 0
    for i, s in enumerate(steps):
        if abs(s) <= atol:
            continue
        sign = 1 if s > 0 else -1
        if direction == 0:
            direction = sign
        elif sign != direction:
            return MonotoneReport("violated", i + 1, contained)
    kind = {0: "constant", 1: "monotone_increasing", -1: "monotone_decreasing"}[direction]
    return MonotoneReport(kind, None, contained)
