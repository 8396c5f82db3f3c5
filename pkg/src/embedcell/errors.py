"""Exception types raised by the solvers."""


class GeometryError(ValueError):
    """Degenerate phase layout (e.g. no metal phase left)."""


class ResolutionError(ValueError):
    """Mesh too coarse for the requested microstructure."""


class ShapeError(ValueError):
    """Fields defined on incompatible meshes or with wrong lengths."""


class SolverError(RuntimeError):
    """Linear solver failed to reach the requested residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ExtractionError(ZeroDivisionError):
    """Equivalent parameter cannot be extracted from a force."""


class ModelRangeError(ValueError):
    """Input outside the range where a constitutive relation is solvable."""
