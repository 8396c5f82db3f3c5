"""Uniform quadrilateral grid on the unit square and bilinear element data."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import ResolutionError, ShapeError

# 2x2 Gauss rule on the reference square [0, 1]^2
_GP = np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)])
GAUSS_POINTS = np.array([(a, b) for b in _GP for a in _GP])
GAUSS_WEIGHTS = np.full(4, 0.25)

# local node order: (0,0), (1,0), (1,1), (0,1)
_LOCAL = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def shape_values(xi, eta):
    """Bilinear shape functions on the unit reference square."""
    sx = np.where(_LOCAL[:, 0] == 1.0, xi, 1.0 - xi)
    sy = np.where(_LOCAL[:, 1] == 1.0, eta, 1.0 - eta)
    return sx * sy


def shape_gradients(xi, eta):
    """Reference gradients, shape (2, 4): row 0 is d/dxi, row 1 is d/deta."""
    sx = np.where(_LOCAL[:, 0] == 1.0, xi, 1.0 - xi)
    sy = np.where(_LOCAL[:, 1] == 1.0, eta, 1.0 - eta)
    dx = np.where(_LOCAL[:, 0] == 1.0, 1.0, -1.0)
    dy = np.where(_LOCAL[:, 1] == 1.0, 1.0, -1.0)
    return np.vstack([dx * sy, sx * dy])


def _reference_matrices():
    # On a square element of side h the physical gradient is grad_ref / h and
    # the Jacobian is h^2, so stiffness-type integrals are independent of h.
    k_lam = np.zeros((8, 8))
    k_mu = np.zeros((8, 8))
    lap = np.zeros((4, 4))
    mass = np.zeros((4, 4))
    grad_int = np.zeros((2, 4))
    for (xi, eta), w in zip(GAUSS_POINTS, GAUSS_WEIGHTS):
        g = shape_gradients(xi, eta)
        n = shape_values(xi, eta)
        tr = np.concatenate([g[0], g[1]])
        e11 = np.concatenate([g[0], np.zeros(4)])
        e22 = np.concatenate([np.zeros(4), g[1]])
        e12 = 0.5 * np.concatenate([g[1], g[0]])
        k_lam += w * np.outer(tr, tr)
        k_mu += w * 2.0 * (np.outer(e11, e11) + np.outer(e22, e22) + 2.0 * np.outer(e12, e12))
        lap += w * (np.outer(g[0], g[0]) + np.outer(g[1], g[1]))
        mass += w * np.outer(n, n)
        grad_int += w * g
    return k_lam, k_mu, lap, mass, grad_int


REF_K_LAMBDA, REF_K_MU, REF_LAPLACE, REF_MASS, REF_GRAD_INT = _reference_matrices()


@dataclass(frozen=True)
class Mesh2D:
    """n x n grid of square bilinear elements on (0, 1)^2.

    Nodes are numbered row-major with x1 running fastest; node (i, j) sits at
    (i h, j h) and has index ``j * (n + 1) + i``. Element (i, j) has index
    ``j * n + i``.
    """

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ResolutionError(f"mesh needs n >= 2 elements per side, got {self.n}")

    @property
    def h(self):
        return 1.0 / self.n

    @property
    def n_nodes(self):
        return (self.n + 1) ** 2

    @property
    def n_elements(self):
        return self.n * self.n

    @cached_property
    def nodes(self):
        t = np.linspace(0.0, 1.0, self.n + 1)
        x1, x2 = np.meshgrid(t, t, indexing="xy")
        return np.column_stack([x1.ravel(), x2.ravel()])

    @cached_property
    def elements(self):
        n = self.n
        i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="xy")
        i, j = i.ravel(), j.ravel()
        a = j * (n + 1) + i
        return np.column_stack([a, a + 1, a + n + 2, a + n + 1])

    @cached_property
    def centroids(self):
        return self.nodes[self.elements].mean(axis=1)

    @cached_property
    def element_dofs(self):
        """Global dof indices per element: u1 block first, then u2 block."""
        e = self.elements
        return np.hstack([e, e + self.n_nodes])

    @cached_property
    def bottom_nodes(self):
        return np.arange(self.n + 1)

    @cached_property
    def top_nodes(self):
        return self.n * (self.n + 1) + np.arange(self.n + 1)

    @cached_property
    def node_weights(self):
        """Integrals of the nodal basis functions, i.e. lumped mass."""
        w = np.zeros(self.n_nodes)
        np.add.at(w, self.elements.ravel(), 0.25 * self.h**2)
        return w

    @cached_property
    def scalar_mass(self):
        return self._assemble_scalar(REF_MASS * self.h**2)

    @cached_property
    def scalar_laplace(self):
        return self._assemble_scalar(REF_LAPLACE)

    def _assemble_scalar(self, ke):
        e = self.elements
        rows = np.repeat(e, 4, axis=1).ravel()
        cols = np.tile(e, (1, 4)).ravel()
        data = np.tile(ke.ravel(), self.n_elements)
        return sp.csr_matrix((data, (rows, cols)), shape=(self.n_nodes, self.n_nodes))

    @cached_property
    def _vector_pattern(self):
        d = self.element_dofs
        rows = np.repeat(d, 8, axis=1).ravel()
        cols = np.tile(d, (1, 8)).ravel()
        return rows, cols

    def _per_element(self, values, name):
        a = np.asarray(values, dtype=float)
        if a.ndim and a.shape != (self.n_elements,):
            raise ShapeError(f"{name}: expected {self.n_elements} element values, got {a.shape}")
        return np.broadcast_to(a, (self.n_elements,))

    def assemble_elasticity(self, lam, mu):
        """Global stiffness of sum_e lam_e K_lambda + mu_e K_mu.

        ``lam`` and ``mu`` are scalars or per-element arrays.
        """
        lam = self._per_element(lam, "lam")
        mu = self._per_element(mu, "mu")
        data = lam[:, None, None] * REF_K_LAMBDA + mu[:, None, None] * REF_K_MU
        rows, cols = self._vector_pattern
        ndof = 2 * self.n_nodes
        return sp.csr_matrix((data.ravel(), (rows, cols)), shape=(ndof, ndof))


def build_mesh(n):
    """Uniform quad grid with ``n`` elements per side."""
    return Mesh2D(n)
