"""Bilinear finite elements for the plane-stress tensile test.

Unknowns are nodal displacements (u1, u2). The vertical displacement is
prescribed on the bottom (0) and top (l) edges; tangential motion is free
everywhere, and the horizontal rigid translation is removed by requiring
the mean of u1 to vanish.
"""

import json
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ShapeError, SolverError
from .materials import MaterialField2D
from .mesh import REF_GRAD_INT, Mesh2D, build_mesh, shape_gradients  # noqa: F401

RTOL = 1e-10


@dataclass(frozen=True)
class DisplacementField:
    mesh: Mesh2D
    u1: np.ndarray
    u2: np.ndarray
    l: float

    def __post_init__(self):
        for name in ("u1", "u2"):
            a = np.asarray(getattr(self, name), dtype=float)
            if a.shape != (self.mesh.n_nodes,):
                raise ShapeError(f"{name} must have {self.mesh.n_nodes} nodal values")
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def vector(self):
        return np.concatenate([self.u1, self.u2])

    @classmethod
    def from_vector(cls, mesh, x, l):
        n = mesh.n_nodes
        return cls(mesh, x[:n].copy(), x[n:].copy(), float(l))

    def __add__(self, other):
        _check_same_mesh(self, other)
        return DisplacementField(self.mesh, self.u1 + other.u1, self.u2 + other.u2,
                                 self.l + other.l)

    def __sub__(self, other):
        _check_same_mesh(self, other)
        return DisplacementField(self.mesh, self.u1 - other.u1, self.u2 - other.u2,
                                 self.l - other.l)

    def scaled(self, c):
        return DisplacementField(self.mesh, c * self.u1, c * self.u2, c * self.l)

    def mean_u1(self):
        return float(self.mesh.node_weights @ self.u1)

    def to_dict(self):
        return {"mesh_n": int(self.mesh.n), "l": float(self.l),
                "u1": self.u1.tolist(), "u2": self.u2.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(Mesh2D(int(d["mesh_n"])), np.asarray(d["u1"]), np.asarray(d["u2"]),
                   float(d["l"]))

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def to_vtk(self, title="displacement"):
        """Legacy VTK structured-points text with a point vector field."""
        m = self.mesh
        lines = [
            "# vtk DataFile Version 3.0",
            title,
            "ASCII",
            "DATASET STRUCTURED_POINTS",
            f"DIMENSIONS {m.n + 1} {m.n + 1} 1",
            "ORIGIN 0 0 0",
            f"SPACING {m.h!r} {m.h!r} 1",
            f"POINT_DATA {m.n_nodes}",
            "VECTORS displacement double",
        ]
        lines += [f"{a!r} {b!r} 0.0" for a, b in zip(self.u1, self.u2)]
        return "\n".join(lines) + "\n"


def _check_same_mesh(u, v):
    if u.mesh.n != v.mesh.n:
        raise ShapeError(f"mesh mismatch: n={u.mesh.n} vs n={v.mesh.n}")


def zero_field(mesh):
    z = np.zeros(mesh.n_nodes)
    return DisplacementField(mesh, z, z, 0.0)


def nodal_field(mesh, func, l=0.0):
    """Sample ``func(x1, x2) -> (u1, u2)`` at the mesh nodes."""
    x = mesh.nodes
    a, b = func(x[:, 0], x[:, 1])
    return DisplacementField(mesh, np.broadcast_to(a, (mesh.n_nodes,)).astype(float),
                             np.broadcast_to(b, (mesh.n_nodes,)).astype(float), l)


@dataclass(frozen=True)
class RhsFunctional:
    """v -> -int lam_src tr(e(u_src)) tr(e(v)) + 2 mu_src e(u_src) : e(v) dx.

    Stored through its per-element coefficients; the load vector is
    ``-K(lam_src, mu_src) u_src``. Rigid translations have zero strain, so
    the functional ignores constant shifts of v1.
    """

    lambda_src: np.ndarray
    u_src: DisplacementField
    mu_src: np.ndarray = None

    def load_vector(self, mesh):
        if self.u_src.mesh.n != mesh.n:
            raise ShapeError("rhs source field lives on a different mesh")
        lam = np.asarray(self.lambda_src, dtype=float)
        mu = np.zeros(mesh.n_elements) if self.mu_src is None else self.mu_src
        return -(mesh.assemble_elasticity(lam, mu) @ self.u_src.vector)

    def __call__(self, v):
        return float(self.load_vector(v.mesh) @ v.vector)


def _dirichlet(mesh, l):
    n = mesh.n_nodes
    fixed = np.concatenate([n + mesh.bottom_nodes, n + mesh.top_nodes])
    values = np.concatenate([np.zeros(mesh.n + 1), np.full(mesh.n + 1, float(l))])
    free = np.setdiff1d(np.arange(2 * n), fixed)
    return fixed, values, free


@dataclass
class SolveInfo:
    method: str
    residual: float
    iterations: int = 0


def _check_field(mesh, field):
    if field.mesh.n != mesh.n:
        raise ShapeError(f"material lives on n={field.mesh.n}, mesh has n={mesh.n}")


def solve_tensile_2d(mesh, field, l, rhs=None, method="saddle", rtol=RTOL,
                     maxiter=None, return_info=False):
    """Galerkin solution of the tensile test with an optional extra load.

    Methods:

    ``"saddle"``
        sparse LU of the system bordered by the mean-value multiplier row;
    ``"pinned"``
        sparse LU of the SPD system with u1 fixed at node 0, then u1 is
        shifted to zero mean;
    ``"cg"``
        the pinned system solved by Jacobi-preconditioned CG, then shifted.

    The shift is exact because neither the operator nor an admissible load
    sees constant u1 offsets. Every method checks the relative residual of
    the system it solved against ``rtol`` and raises ``SolverError`` otherwise.
    """
    _check_field(mesh, field)
    K = mesh.assemble_elasticity(field.lambda_per_element, field.mu)
    b = np.zeros(2 * mesh.n_nodes) if rhs is None else rhs.load_vector(mesh)
    x, info = _solve_system(mesh, K, b, l, method, rtol, maxiter)
    u = DisplacementField.from_vector(mesh, x, l)
    return (u, info) if return_info else u


def _relative_residual(A, sol, rhs):
    res = np.linalg.norm(A @ sol - rhs)
    scale = np.linalg.norm(rhs)
    return res / scale if scale else res


def _solve_system(mesh, K, b, l, method, rtol, maxiter):
    fixed, values, free = _dirichlet(mesh, l)
    n = mesh.n_nodes
    x = np.zeros(2 * n)
    x[fixed] = values
    K = K.tocsr()
    K_free = K[free]
    K_ff = K_free[:, free]
    r_f = b[free] - K_free[:, fixed] @ values
    # free dofs start with all u1 dofs (0..n-1) in order
    its = 0
    if method == "saddle":
        c = sp.hstack([sp.csr_matrix(mesh.node_weights.reshape(1, -1)),
                       sp.csr_matrix((1, len(free) - n))])
        A = sp.bmat([[K_ff, c.T], [c, None]], format="csc")
        rhs = np.concatenate([r_f, [0.0]])
        sol = spla.splu(A).solve(rhs) if np.any(rhs) else np.zeros(len(rhs))
        res = _relative_residual(A, sol, rhs)
        x[free] = sol[:-1]
    elif method in ("pinned", "cg"):
        keep = np.arange(1, len(free))  # u1 at node 0 held at zero
        A = K_ff[keep][:, keep]
        rhs = r_f[keep]
        if not np.any(rhs):
            sol = np.zeros(len(keep))
        elif method == "pinned":
            lu = spla.splu(A.tocsc(), permc_spec="MMD_AT_PLUS_A",
                           diag_pivot_thresh=0.0, options={"SymmetricMode": True})
            sol = lu.solve(rhs)
        else:
            M = sp.diags(1.0 / A.diagonal())

            def count(_):
                nonlocal its
                its += 1

            limit = maxiter if maxiter is not None else 10 * len(keep)
            sol, _ = spla.cg(A.tocsr(), rhs, rtol=rtol, atol=0.0, maxiter=limit, M=M,
                             callback=count)
        res = _relative_residual(A, sol, rhs)
        full = np.zeros(len(free))
        full[keep] = sol
        x[free] = full
        x[:n] -= (mesh.node_weights @ x[:n]) / mesh.node_weights.sum()
    else:
        raise ValueError(f"unknown method {method!r}")
    # CG's own stopping test uses the preconditioned-free residual as well
    if res > rtol * (1.0 + 1e-6):
        raise SolverError(f"{method} solve left relative residual {res:.3e} "
                          f"(tolerance {rtol:.1e}, {its} iterations)", residual=res)
    return x, SolveInfo(method, float(res), its)


def _element_gradient_integrals(mesh, u):
    """Per-element integrals of du1/dx1, du1/dx2, du2/dx1, du2/dx2."""
    h = mesh.h
    e = mesh.elements
    g = REF_GRAD_INT * h  # integral of physical gradient = ref_int * h^2 / h
    u1 = u.u1[e]
    u2 = u.u2[e]
    return u1 @ g[0], u1 @ g[1], u2 @ g[0], u2 @ g[1]


def tensile_force_2d(field, u):
    """Volume integral of P22 = lam (d1 u1 + d2 u2) + 2 mu d2 u2."""
    _check_field(u.mesh, field)
    d11, _, _, d22 = _element_gradient_integrals(u.mesh, u)
    lam = field.lambda_per_element
    return float(np.sum(lam * (d11 + d22) + 2.0 * field.mu * d22))


def boundary_force_2d(field, u):
    """Integral of P22 along the top edge, evaluated from the top element row."""
    _check_field(u.mesh, field)
    m = u.mesh
    h = m.h
    top = np.arange(m.n * (m.n - 1), m.n * m.n)
    e = m.elements[top]
    total = 0.0
    for xi, w in zip((0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)), (0.5, 0.5)):
        g = shape_gradients(xi, 1.0) / h
        d11 = u.u1[e] @ g[0]
        d22 = u.u2[e] @ g[1]
        lam = field.lambda_per_element[top]
        total += w * h * np.sum(lam * (d11 + d22) + 2.0 * field.mu * d22)
    return float(total)


def h1_norm(u):
    m = u.mesh
    A = m.scalar_mass + m.scalar_laplace
    return float(np.sqrt(max(u.u1 @ (A @ u.u1) + u.u2 @ (A @ u.u2), 0.0)))


def h1_seminorm(u):
    L = u.mesh.scalar_laplace
    return float(np.sqrt(max(u.u1 @ (L @ u.u1) + u.u2 @ (L @ u.u2), 0.0)))


def h1_diff(u, v):
    _check_same_mesh(u, v)
    return h1_norm(u - v)


def mean_partial2_u2(u):
    """Integral of du2/dx2 over the unit square."""
    return float(np.sum(_element_gradient_integrals(u.mesh, u)[3]))


def integral_div(u):
    """Integral of tr(grad^s u)."""
    d11, _, _, d22 = _element_gradient_integrals(u.mesh, u)
    return float(np.sum(d11 + d22))


def integral_partial1_u1(u):
    return float(np.sum(_element_gradient_integrals(u.mesh, u)[0]))


def energy_residual(mesh, field, u, rhs=None):
    """Free-dof residual of K u - b, ignoring the mean-value multiplier."""
    K = mesh.assemble_elasticity(field.lambda_per_element, field.mu)
    b = np.zeros(2 * mesh.n_nodes) if rhs is None else rhs.load_vector(mesh)
    _, _, free = _dirichlet(mesh, u.l)
    return (K @ u.vector - b)[free]
