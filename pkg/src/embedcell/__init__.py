"""Embedded cell method for two-phase linear elastic composites."""

from .ecm import (EcmTrace, MonotoneReport, check_monotone, lambda_equiv, run_ecm_1d,
                  run_ecm_2d)
from .elastic1d import (kappa_equiv, kappa_hom, sample_random_material, solve_tensile_1d,
                        stochastic_force_experiment, tensile_force_1d)
from .errors import (ExtractionError, GeometryError, ModelRangeError, ResolutionError,
                     ShapeError, SolverError)
from .fem import (DisplacementField, RhsFunctional, h1_norm, mean_partial2_u2,
                  solve_tensile_2d, tensile_force_2d)
from .homogenization import (HomogenizationReport, compare_ecm_vs_hom, delta_sweep_2d,
                             lambda_hom_first_order)
from .materials import (EmbeddedCellGeometry2D, MaterialField1D, MaterialField2D, PhaseParams,
                        solve_ecm_radii)
from .mesh import Mesh2D, build_mesh
from .perturbation import (SeriesExpansion, error_order_fit, series_terms, solve_u1, u0_exact,
                           u1_hom_exact)
from .plasticity import (PlasticMetalLaw, metal_force, run_ecm_plastic, solve_stress_strain,
                         stress_strain_curve)

__version__ = "0.1.0"

__all__ = [
    "DisplacementField", "EcmTrace", "EmbeddedCellGeometry2D", "ExtractionError",
    "GeometryError", "HomogenizationReport", "MaterialField1D", "MaterialField2D", "Mesh2D",
    "ModelRangeError", "MonotoneReport", "PhaseParams", "PlasticMetalLaw", "ResolutionError",
    "RhsFunctional", "SeriesExpansion", "ShapeError", "SolverError", "build_mesh",
    "check_monotone", "compare_ecm_vs_hom", "delta_sweep_2d", "error_order_fit", "h1_norm",
    "kappa_equiv", "kappa_hom", "lambda_equiv", "lambda_hom_first_order", "mean_partial2_u2",
    "metal_force", "run_ecm_1d", "run_ecm_2d", "run_ecm_plastic", "sample_random_material",
    "series_terms", "solve_ecm_radii", "solve_stress_strain", "solve_tensile_1d",
    "solve_tensile_2d", "solve_u1", "stochastic_force_experiment", "stress_strain_curve",
    "tensile_force_1d", "tensile_force_2d", "u0_exact", "u1_hom_exact",
]
