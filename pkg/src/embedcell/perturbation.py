"""Expansion of the tensile test in a small perturbation of the first Lame parameter.

With ``lam = lam0 + eps * lam_pert`` the displacement is expanded as
``u0 + eps u1 + eps^2 u2 + ...``. The leading term is affine and known in
closed form; each correction solves the constant-coefficient problem with
zero boundary data, loaded by the previous term.
"""

import csv
import io
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .ecm import ecm_cell_fractions
from .fem import (RhsFunctional, h1_diff, h1_norm, nodal_field, solve_tensile_2d)
from .materials import MaterialField2D, homogeneous_field_2d
from .mesh import build_mesh

SOLVER_FLOOR = 1e-14


def poisson_number(lambda0, mu0):
    return lambda0 / (lambda0 + 2.0 * mu0)


def u0_exact(mesh, lambda0, mu0, l):
    """Affine solution of the homogeneous tensile test."""
    if lambda0 < 0 or mu0 <= 0:
        raise ValueError("need lambda0 >= 0 and mu0 > 0")
    nu = poisson_number(lambda0, mu0)
    return nodal_field(mesh, lambda x1, x2: (-nu * l * x1 + 0.5 * nu * l, l * x2), l)


def u1_hom_exact(lambda_bar, mu_bar, lambda0, mu0, l, mesh):
    """First corrector for a constant perturbation (lambda_bar, mu_bar).

    Only ``u1`` is nonzero; its gradient is ``-2 P`` with
    ``P = (lambda_bar (1 - nu0) l - 2 mu_bar nu0 l) / (2 (lambda0 + 2 mu0))``,
    and the constant is chosen so that the mean of ``u1`` vanishes.
    """
    nu = poisson_number(lambda0, mu0)
    pref = (lambda_bar * (1.0 - nu) * l - 2.0 * mu_bar * nu * l) / (2.0 * (lambda0 + 2.0 * mu0))
    return nodal_field(mesh, lambda x1, x2: (pref * (1.0 - 2.0 * x1), 0.0 * x2), 0.0)


def _per_element(mesh, values):
    a = np.asarray(values, dtype=float)
    if a.ndim == 0:
        return np.full(mesh.n_elements, float(a))
    if a.shape != (mesh.n_elements,):
        raise ValueError(f"expected {mesh.n_elements} element values, got shape {a.shape}")
    return a


def solve_u1(mesh, lambda_pert, mu_pert, lambda0, mu0, u_prev, method="pinned"):
    """Corrector loaded by ``-int lam_pert tr e(u_prev) tr e(v) + 2 mu_pert e(u_prev):e(v)``."""
    lam = _per_element(mesh, lambda_pert)
    mu = None if mu_pert is None else _per_element(mesh, mu_pert)
    rhs = RhsFunctional(lam, u_prev, mu)
    return solve_tensile_2d(mesh, homogeneous_field_2d(mesh, lambda0, mu0), 0.0,
                            rhs=rhs, method=method)


def first_order_force(mesh, lambda_pert, lambda0, mu0, l):
    """Force coefficient of eps: ``(1 - nu0)^2 l int lam_pert``."""
    nu = poisson_number(lambda0, mu0)
    return (1.0 - nu) ** 2 * l * float(np.sum(_per_element(mesh, lambda_pert))) * mesh.h ** 2


@dataclass
class SeriesExpansion:
    terms: list
    eps: float = None
    lambda_pert: np.ndarray = None

    @property
    def order(self):
        return len(self.terms) - 1

    def partial_sum(self, m=None, eps=None):
        m = self.order if m is None else m
        eps = self.eps if eps is None else eps
        if eps is None:
            raise ValueError("eps is required")
        total = self.terms[0]
        for k in range(1, m + 1):
            total = total + self.terms[k].scaled(eps ** k)
        return total

    def growth_ratios(self):
        """``|u_{k+1}| / (|lam_pert|_inf |u_k|)`` in H1, for k = 0..m-1."""
        scale = float(np.max(np.abs(self.lambda_pert)))
        norms = [h1_norm(u) for u in self.terms]
        return [norms[k + 1] / (scale * norms[k]) for k in range(len(norms) - 1)]


def series_terms(mesh, lambda_pert, lambda0, mu0, l, m, eps=None, method="pinned"):
    """u0..u_m of the cascade at constant shear modulus."""
    if m < 0:
        raise ValueError("order must be non-negative")
    lam = _per_element(mesh, lambda_pert)
    terms = [u0_exact(mesh, lambda0, mu0, l)]
    for _ in range(m):
        terms.append(solve_u1(mesh, lam, None, lambda0, mu0, terms[-1], method))
    return SeriesExpansion(terms, eps, lam)


@dataclass(frozen=True)
class OrderFit:
    slope: float
    intercept: float
    flagged: tuple = ()

    def __float__(self):
        return self.slope


def error_order_fit(eps_list, errors):
    """Least-squares slope of log(error) against log(eps).

    Entries that are zero or negative are replaced by a solver floor and
    their indices reported in ``flagged``.
    """
    eps = np.asarray(eps_list, dtype=float)
    err = np.asarray(errors, dtype=float)
    if eps.shape != err.shape or eps.size < 3:
        raise ValueError("need at least three (eps, error) pairs")
    if np.any(eps <= 0):
        raise ValueError("eps values must be positive")
    bad = tuple(int(i) for i in np.flatnonzero(~(err > 0)))
    if bad:
        warnings.warn(f"non-positive errors at {bad} replaced by {SOLVER_FLOOR:g}")
        err = np.where(err > 0, err, SOLVER_FLOOR)
    slope, intercept = np.polyfit(np.log(eps), np.log(err), 1)
    return OrderFit(float(slope), float(intercept), bad)


def ecm_first_iteration_perturbation(mesh, params, assignment="area"):
    """``lam_pert`` of the first embedded cell material, relative to ``lambda_met``.

    Ceramic carries ``d_c``, the dummy region the initial guess
    ``vol_cer * d_c`` and metal nothing.
    """
    frac = ecm_cell_fractions(mesh, params.vol_cer, assignment)
    return params.d_c * (frac[:, 0] + params.vol_cer * frac[:, 2])


@dataclass
class PerturbationSweep:
    eps: list
    err_order0: list
    err_order1: list
    fits: dict = field(default_factory=dict)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eps", "h1_error_order0", "h1_error_order1"])
        for row in zip(self.eps, self.err_order0, self.err_order1):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        rows = list(csv.DictReader(io.StringIO(text)))
        return cls([float(r["eps"]) for r in rows],
                   [float(r["h1_error_order0"]) for r in rows],
                   [float(r["h1_error_order1"]) for r in rows])

    def slopes_json(self):
        return json.dumps({"order0": self.fits["order0"].slope,
                           "order1": self.fits["order1"].slope}, indent=2, sort_keys=True)


def perturbation_sweep(lambda_met, mu, d_c, vol_cer, l=0.01, mesh_n=64,
                       eps_list=(0.02, 0.04, 0.08), method="pinned"):
    """H1 errors of u0 and u0 + eps u1 against direct solves on the first ECM material."""
    from .materials import PhaseParams

    mesh = build_mesh(mesh_n)
    shape = PhaseParams.perturbed(lambda_met, 1.0, d_c, mu=mu, vol_cer=vol_cer)
    lam_pert = ecm_first_iteration_perturbation(mesh, shape)
    u0 = u0_exact(mesh, lambda_met, mu, l)
    u1 = solve_u1(mesh, lam_pert, None, lambda_met, mu, u0, method)
    e0, e1 = [], []
    for eps in eps_list:
        fld = MaterialField2D(mesh, lambda_met + eps * lam_pert, mu)
        u = solve_tensile_2d(mesh, fld, l, method=method)
        e0.append(h1_diff(u, u0))
        e1.append(h1_diff(u, u0 + u1.scaled(eps)))
    sweep = PerturbationSweep(list(map(float, eps_list)), e0, e1)
    sweep.fits = {"order0": error_order_fit(eps_list, e0), "order1": error_order_fit(eps_list, e1)}
    return sweep


def cascade_step_norm(mesh, lambda_pert, lambda0, mu0):
    """H1 operator norm of one cascade step, divided by ``|lam_pert|_inf``.

    The step maps ``u_k`` (zero vertical boundary data) to ``u_{k+1}``. The
    returned constant ``C`` gives ``|u_{k+1}| <= C |lam_pert|_inf |u_k|``
    for every admissible ``u_k`` on this mesh. It is the largest generalized
    eigenvalue of ``T^T H T x = s^2 H x``, with ``H`` the H1 Gram matrix.
    """
    import scipy.sparse as sp
    import scipy.sparse.linalg as spla

    from .fem import _dirichlet

    lam = _per_element(mesh, lambda_pert)
    n = mesh.n_nodes
    _, _, free = _dirichlet(mesh, 0.0)
    pinned = free[1:]  # free dofs start with u1 at node 0
    K0 = mesh.assemble_elasticity(float(lambda0), float(mu0)).tocsc()
    Kp = mesh.assemble_elasticity(lam, np.zeros(mesh.n_elements)).tocsr()
    lu = spla.splu(K0[pinned][:, pinned].tocsc())
    w = mesh.node_weights / mesh.node_weights.sum()
    g = mesh.scalar_mass + mesh.scalar_laplace
    H = sp.block_diag([g, g]).tocsr()
    HF = H[free][:, free].tocsc()

    def T(x):
        full = np.zeros(2 * n)
        full[free] = x
        u = np.zeros(2 * n)
        u[pinned] = lu.solve(-(Kp @ full)[pinned])
        u[:n] -= w @ u[:n]
        return u

    def T_t(y):
        y = np.array(y, dtype=float)
        y[:n] -= w * y[:n].sum()
        z = np.zeros(2 * n)
        z[pinned] = lu.solve(y[pinned], trans="T")
        return -(Kp @ z)[free]

    op = spla.LinearOperator((free.size, free.size), matvec=lambda x: T_t(H @ T(x)),
                             dtype=float)
    s2 = spla.eigsh(op, k=1, M=HF, which="LA", tol=1e-8, return_eigenvectors=False)[0]
    return float(np.sqrt(max(s2, 0.0)) / np.max(np.abs(lam)))
