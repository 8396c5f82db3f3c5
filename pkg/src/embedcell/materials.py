"""Phase parameters, embedded-cell geometry and piecewise-constant material fields."""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError, ResolutionError, ShapeError
from .mesh import Mesh2D

CELL_CENTER = (0.5, 0.5)
MAX_OUTER_RADIUS = 0.1

# 1D embedded cell occupies [CELL_LEFT, CELL_RIGHT)
CELL_LEFT = 0.4
CELL_RIGHT = 0.6


@dataclass(frozen=True)
class PhaseParams:
    """Material constants of the two phases.

    ``d_c`` is derived from the first Lame parameters so that
    ``lambda_cer == lambda_met + eps * d_c``; with ``eps == 0`` it is unused
    and stored as 0.
    """

    kappa_met: float = 1.0
    kappa_cer: float = 1.0
    lambda_met: float = 0.0
    lambda_cer: float = 0.0
    mu: float = 1.0
    vol_cer: float = 0.5
    eps: float = 0.0
    d_c: float = field(default=0.0)

    def __post_init__(self):
        if self.kappa_met <= 0 or self.kappa_cer <= 0:
            raise ValueError("longitudinal moduli must be positive")
        if self.mu <= 0:
            raise ValueError("shear modulus must be positive")
        if self.lambda_met < 0 or self.lambda_cer < 0:
            raise ValueError("first Lame parameters must be non-negative")
        if not 0.0 <= self.vol_cer <= 1.0:
            raise ValueError(f"vol_cer must lie in [0, 1], got {self.vol_cer}")
        if self.eps < 0:
            raise ValueError("eps must be non-negative")
        if self.lambda_met + self.eps * self.d_c != self.lambda_cer:
            raise ValueError(
                "lambda_cer must equal lambda_met + eps * d_c; "
                "use PhaseParams.perturbed() to build consistent values"
            )

    @property
    def vol_met(self):
        return 1.0 - self.vol_cer

    @classmethod
    def perturbed(cls, lambda_met, eps, d_c, mu=1.0, vol_cer=0.5, **kw):
        """Parameters with ``lambda_cer = lambda_met + eps * d_c``."""
        return cls(lambda_met=lambda_met, lambda_cer=lambda_met + eps * d_c,
                   mu=mu, vol_cer=vol_cer, eps=eps, d_c=d_c, **kw)

    @classmethod
    def from_lambdas(cls, lambda_met, lambda_cer, mu=1.0, vol_cer=0.5, eps=None, **kw):
        """Parameters from two Lame values; ``eps`` defaults to their gap."""
        diff = lambda_cer - lambda_met
        if eps is None:
            eps = abs(diff)
        d_c = diff / eps if eps > 0 else 0.0
        # keep the exact identity lambda_cer = lambda_met + eps * d_c
        lambda_cer = lambda_met + eps * d_c
        return cls(lambda_met=lambda_met, lambda_cer=lambda_cer, mu=mu,
                   vol_cer=vol_cer, eps=eps, d_c=d_c, **kw)


@dataclass(frozen=True)
class MaterialField1D:
    """Step function on (0, 1): ``values[i]`` on ``[breakpoints[i], breakpoints[i+1])``."""

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if b.ndim != 1 or v.ndim != 1 or len(b) != len(v) + 1:
            raise ShapeError("need len(breakpoints) == len(values) + 1")
        if b[0] != 0.0 or b[-1] != 1.0 or np.any(np.diff(b) <= 0):
            raise ValueError("breakpoints must increase strictly from 0 to 1")
        if np.any(v <= 0):
            raise ValueError("moduli must be positive")
        b.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", v)

    @property
    def lengths(self):
        return np.diff(self.breakpoints)

    def __call__(self, x):
        idx = np.searchsorted(self.breakpoints, x, side="right") - 1
        idx = np.clip(idx, 0, len(self.values) - 1)
        return self.values[idx]

    def to_dict(self):
        return {"breakpoints": self.breakpoints.tolist(), "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["breakpoints"]), np.asarray(d["values"]))

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def step_field(intervals):
    """Build a 1D field from ``[(length, value), ...]``, merging equal neighbours
    and dropping empty intervals."""
    pts = [0.0]
    vals = []
    for length, value in intervals:
        # skip intervals that are empty or vanish in floating point
        if length <= 0 or pts[-1] + length == pts[-1]:
            continue
        if vals and vals[-1] == value:
            pts[-1] += length
        else:
            pts.append(pts[-1] + length)
            vals.append(value)
    pts[-1] = 1.0
    return MaterialField1D(np.array(pts), np.array(vals))


@dataclass(frozen=True)
class EmbeddedCellGeometry2D:
    r1: float
    r2: float
    center: tuple = CELL_CENTER

    def __post_init__(self):
        if not 0.0 < self.r1 <= self.r2 <= MAX_OUTER_RADIUS:
            raise GeometryError(f"need 0 < r1 <= r2 <= 0.1, got r1={self.r1}, r2={self.r2}")

    @property
    def area_ratio(self):
        """|ceramic disk| / |metal annulus|."""
        return self.r1**2 / (self.r2**2 - self.r1**2)


@dataclass(frozen=True)
class MaterialField2D:
    """Element-wise first Lame parameter with a constant shear modulus."""

    mesh: Mesh2D
    lambda_per_element: np.ndarray
    mu: float

    def __post_init__(self):
        lam = np.asarray(self.lambda_per_element, dtype=float)
        if lam.shape != (self.mesh.n_elements,):
            raise ShapeError(
                f"expected {self.mesh.n_elements} element values, got shape {lam.shape}")
        if np.any(lam < 0):
            raise ValueError("first Lame parameter must be non-negative")
        if self.mu <= 0:
            raise ValueError("shear modulus must be positive")
        lam.setflags(write=False)
        object.__setattr__(self, "lambda_per_element", lam)

    def to_dict(self):
        return {"mesh_n": int(self.mesh.n),
                "lambda_per_element": self.lambda_per_element.tolist(),
                "mu": float(self.mu)}

    @classmethod
    def from_dict(cls, d):
        return cls(Mesh2D(int(d["mesh_n"])), np.asarray(d["lambda_per_element"]), float(d["mu"]))

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def homogeneous_field_2d(mesh, lam, mu):
    return MaterialField2D(mesh, np.full(mesh.n_elements, float(lam)), mu)


# --------------------------------------------------------------------------- 1D


def solve_ecm_radii(vol_cer):
    """Radii of the ceramic disk and metal annulus for a given ceramic fraction.

    The outer radius is pinned to its largest admissible value 0.1.
    """
    if not 0.0 < vol_cer < 1.0:
        raise GeometryError(f"embedded cell needs 0 < vol_cer < 1, got {vol_cer}")
    r2 = MAX_OUTER_RADIUS
    return EmbeddedCellGeometry2D(r1=r2 * math.sqrt(vol_cer), r2=r2)


def build_ecm_kappa_1d(params, kappa_dummy):
    """Three-phase 1D layout: ceramic centred in [0.4, 0.6), metal around it,
    dummy material outside."""
    if kappa_dummy <= 0:
        raise ValueError("kappa_dummy must be positive")
    half = params.vol_cer / 10.0
    lo, hi = 0.5 - half, 0.5 + half
    return step_field([
        (CELL_LEFT, kappa_dummy),
        (lo - CELL_LEFT, params.kappa_met),
        (hi - lo, params.kappa_cer),
        (CELL_RIGHT - hi, params.kappa_met),
        (1.0 - CELL_RIGHT, kappa_dummy),
    ])


def build_periodic_kappa_1d(params, n_periods):
    """Metal then ceramic in each of ``n_periods`` equal periods."""
    if n_periods < 1:
        raise ValueError("n_periods must be >= 1")
    p = 1.0 / n_periods
    cells = []
    for _ in range(n_periods):
        cells.append((params.vol_met * p, params.kappa_met))
        cells.append((params.vol_cer * p, params.kappa_cer))
    return step_field(cells)


# --------------------------------------------------------------------------- 2D


def _int_sqrt(t, r):
    """Antiderivative of sqrt(r^2 - t^2)."""
    t = min(max(t, -r), r)
    # factored root and atan2 stay accurate near t = +-r, unlike asin(t / r)
    w = math.sqrt((r - t) * (r + t))
    return 0.5 * (t * w + r * r * math.atan2(t, w))


def disk_rect_area(cx, cy, r, x0, x1, y0, y1):
    """Exact area of the disk B_r(cx, cy) intersected with [x0,x1] x [y0,y1]."""
    if r <= 0 or x1 <= x0 or y1 <= y0:
        return 0.0
    # work relative to the centre so the chord ends +-r stay exact; asin is
    # ill-conditioned near +-1
    a0, a1, b0, b1 = x0 - cx, x1 - cx, y0 - cy, y1 - cy
    pts = {a0, a1, -r, r}
    for b in (b0, b1):
        if abs(b) < r:
            s = math.sqrt(r * r - b * b)
            pts.update((-s, s))
    ts = sorted(t for t in pts if a0 <= t <= a1)
    area = 0.0
    for a, b in zip(ts[:-1], ts[1:]):
        if b <= a:
            continue
        # no crossing lies strictly inside (a, b), so the midpoint classifies
        # the interval; ties only occur at tangency, where the arc is the
        # boundary
        m = 0.5 * (a + b)
        if abs(m) >= r:
            continue
        s = math.sqrt(r * r - m * m)
        if s <= b0 or -s >= b1:
            continue
        upper_is_arc = s <= b1
        lower_is_arc = -s >= b0
        arc = _int_sqrt(b, r) - _int_sqrt(a, r)
        width = b - a
        area += (arc if upper_is_arc else b1 * width) + (arc if lower_is_arc else -b0 * width)
    return area


def disk_element_fractions(mesh, center, r):
    """Fraction of each element's area covered by the closed disk B_r(center)."""
    cx, cy = center
    h = mesh.h
    frac = np.zeros(mesh.n_elements)
    corners = mesh.nodes[mesh.elements]
    d = np.hypot(corners[..., 0] - cx, corners[..., 1] - cy)
    inside = np.all(d <= r, axis=1)
    frac[inside] = 1.0
    # an element is cut only if its nearest point lies within r
    lo = corners[:, 0, :]
    near = np.column_stack([np.clip(cx, lo[:, 0], lo[:, 0] + h),
                            np.clip(cy, lo[:, 1], lo[:, 1] + h)])
    touched = np.hypot(near[:, 0] - cx, near[:, 1] - cy) < r
    for e in np.flatnonzero(touched & ~inside):
        x0, y0 = lo[e]
        frac[e] = disk_rect_area(cx, cy, r, x0, x0 + h, y0, y0 + h) / h**2
    return np.clip(frac, 0.0, 1.0)


def ecm_phase_fractions(mesh, geometry, assignment="centroid"):
    """Per-element (ceramic, metal, dummy) area fractions of the embedded cell.

    ``"centroid"`` assigns every element wholly to the phase containing its
    centroid; ``"area"`` uses the exact intersection areas with the disks.
    """
    if mesh.h > geometry.r1:
        raise ResolutionError(
            f"element size {mesh.h:.4g} exceeds ceramic radius {geometry.r1:.4g}")
    if assignment == "centroid":
        c = mesh.centroids
        d = np.hypot(c[:, 0] - geometry.center[0], c[:, 1] - geometry.center[1])
        f_c = (d <= geometry.r1).astype(float)
        f_cm = (d <= geometry.r2).astype(float)
    elif assignment == "area":
        f_c = disk_element_fractions(mesh, geometry.center, geometry.r1)
        f_cm = disk_element_fractions(mesh, geometry.center, geometry.r2)
    else:
        raise ValueError(f"unknown assignment {assignment!r}")
    if not np.any(f_c > 0):
        raise ResolutionError("mesh contains no ceramic element")
    return np.column_stack([f_c, f_cm - f_c, 1.0 - f_cm])


def build_ecm_lambda_2d(mesh, params, geometry, lambda_dummy, assignment="centroid"):
    """Embedded-cell first Lame parameter: ceramic disk, metal annulus, dummy outside."""
    if lambda_dummy < 0:
        raise ValueError("lambda_dummy must be non-negative")
    frac = ecm_phase_fractions(mesh, geometry, assignment)
    lam = frac @ np.array([params.lambda_cer, params.lambda_met, lambda_dummy])
    return MaterialField2D(mesh, lam, params.mu)


def periodic_inclusion_fractions(mesh, delta, inclusion_vol, assignment="area"):
    """Per-element ceramic fraction for a square array of centred disks with period ``delta``."""
    k = round(1.0 / delta)
    if k < 1 or not math.isclose(k * delta, 1.0, rel_tol=1e-12):
        raise ResolutionError(f"delta must be 1/k for an integer k, got {delta}")
    if mesh.n % k or mesh.n // k < 8:
        raise ResolutionError(
            f"mesh n={mesh.n} must be a multiple of {k} with >= 8 elements per period")
    if not 0.0 <= inclusion_vol <= math.pi / 4:
        raise GeometryError("a centred disk covers at most pi/4 of its period cell")
    m = mesh.n // k
    if inclusion_vol == 0.0:
        return np.zeros(mesh.n_elements)
    r = math.sqrt(inclusion_vol / math.pi)
    # one period on its own m x m grid, scaled to the unit cell
    cell_mesh = Mesh2D(m)
    if assignment == "area":
        cell = disk_element_fractions(cell_mesh, (0.5, 0.5), r)
    elif assignment == "centroid":
        c = cell_mesh.centroids
        cell = (np.hypot(c[:, 0] - 0.5, c[:, 1] - 0.5) <= r).astype(float)
    else:
        raise ValueError(f"unknown assignment {assignment!r}")
    cell = cell.reshape(m, m)
    return np.tile(cell, (k, k)).ravel()


def build_periodic_lambda_2d(mesh, params, delta, inclusion_vol, assignment="area"):
    """Periodic disks of ``lambda_cer`` in a ``lambda_met`` matrix."""
    f = periodic_inclusion_fractions(mesh, delta, inclusion_vol, assignment)
    lam = params.lambda_met + f * (params.lambda_cer - params.lambda_met)
    return MaterialField2D(mesh, lam, params.mu)


def volume_fractions(field):
    """Measure of each distinct material value, keyed by value."""
    if isinstance(field, MaterialField1D):
        values, lengths = field.values, field.lengths
    elif isinstance(field, MaterialField2D):
        values = field.lambda_per_element
        lengths = np.full(values.shape, field.mesh.h**2)
    else:
        raise TypeError(f"not a material field: {type(field).__name__}")
    out = {}
    for v, w in zip(values.tolist(), lengths.tolist()):
        out[v] = out.get(v, 0.0) + w
    return out
