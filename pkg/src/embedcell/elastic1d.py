"""Closed-form 1D tensile test for step-function longitudinal moduli."""

import csv
import io
from dataclasses import dataclass

import numpy as np

from .materials import MaterialField1D


@dataclass(frozen=True)
class Solution1D:
    """Piecewise-linear displacement of a rod pulled to ``u(1) = l``.

    ``alpha`` is the constant flux kappa(x) u'(x); ``node_values`` holds u at
    the field's breakpoints.
    """

    field: MaterialField1D
    l: float
    alpha: float
    node_values: np.ndarray

    @property
    def slopes(self):
        return self.alpha / self.field.values

    def __call__(self, x):
        return np.interp(x, self.field.breakpoints, self.node_values)


def compliance(field):
    """sum_i length_i / kappa_i."""
    return float(np.sum(field.lengths / field.values))


def solve_tensile_1d(field, l):
    alpha = l / compliance(field)
    u = np.concatenate([[0.0], np.cumsum(field.lengths * (alpha / field.values))])
    # pin the end exactly; cumulative rounding would leave u(1) = l +- ulp
    u[-1] = l
    return Solution1D(field=field, l=float(l), alpha=float(alpha), node_values=u)


def tensile_force_1d(sol):
    """kappa(1) u'(1), which equals the constant flux."""
    return sol.field.values[-1] * sol.slopes[-1]


def kappa_equiv(force, l):
    """Modulus of the homogeneous rod carrying ``force`` at displacement ``l``."""
    if l == 0:
        raise ZeroDivisionError("equivalent modulus undefined for l = 0")
    return force / l


def kappa_hom(params):
    """Volume-weighted harmonic mean of the two moduli."""
    return 1.0 / (params.vol_met / params.kappa_met + params.vol_cer / params.kappa_cer)


def _sample_rng(seed, n_cells, index):
    # keyed per (seed, n_cells, sample); draws do not depend on evaluation order
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, n_cells, index])))


def random_phases(p_cer, n_cells, seed, index=0):
    """Boolean ceramic indicator for ``n_cells`` independent unit cells."""
    if not 0.0 <= p_cer <= 1.0:
        raise ValueError("p_cer must lie in [0, 1]")
    if n_cells < 1:
        raise ValueError("n_cells must be >= 1")
    return _sample_rng(seed, n_cells, index).random(n_cells) < p_cer


def sample_random_material(p_cer, n_cells, seed, kappa_met=1.0, kappa_cer=2.0, index=0):
    """Random two-phase field with ``n_cells`` cells of length 1/n_cells."""
    cer = random_phases(p_cer, n_cells, seed, index)
    values = np.where(cer, kappa_cer, kappa_met)
    # merging equal neighbours keeps the field small for large n_cells
    change = np.flatnonzero(np.diff(values) != 0) + 1
    starts = np.concatenate([[0], change])
    bps = np.concatenate([starts / n_cells, [1.0]])
    return MaterialField1D(bps, values[starts])


@dataclass(frozen=True)
class StochasticRow:
    n_cells: int
    samples: int
    mean_F: float
    std_F: float
    F_hom: float
    abs_err: float
    mean_abs_dev: float


def stochastic_force_experiment(params, l, n_cells_list, samples, seed):
    """Monte-Carlo statistics of the tensile force on random layouts.

    Each cell is ceramic with probability ``params.vol_cer``. ``abs_err`` is
    |mean F - F_hom|; ``mean_abs_dev`` is the sample mean of |F - F_hom|.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    f_hom = l * kappa_hom(params)
    rows = []
    for n in n_cells_list:
        forces = np.empty(samples)
        for s in range(samples):
            fld = sample_random_material(params.vol_cer, n, seed, params.kappa_met,
                                         params.kappa_cer, index=s)
            forces[s] = tensile_force_1d(solve_tensile_1d(fld, l))
        rows.append(StochasticRow(
            n_cells=int(n), samples=int(samples),
            mean_F=float(forces.mean()), std_F=float(forces.std()),
            F_hom=float(f_hom), abs_err=float(abs(forces.mean() - f_hom)),
            mean_abs_dev=float(np.mean(np.abs(forces - f_hom))),
        ))
    return rows


STOCHASTIC_COLUMNS = ["n_cells", "samples", "mean_F", "std_F", "F_hom", "abs_err", "mean_abs_dev"]


def stochastic_to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(STOCHASTIC_COLUMNS)
    for r in rows:
        w.writerow([r.n_cells, r.samples, repr(r.mean_F), repr(r.std_F),
                    repr(r.F_hom), repr(r.abs_err), repr(r.mean_abs_dev)])
    return buf.getvalue()


def stochastic_from_csv(text):
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        rows.append(StochasticRow(
            n_cells=int(rec["n_cells"]), samples=int(rec["samples"]),
            **{k: float(rec[k]) for k in STOCHASTIC_COLUMNS[2:]}))
    return rows
