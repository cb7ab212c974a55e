"""Bound states of a quantum particle on the surface of a bent nanotube.

The library solves the constrained-surface eigenproblem for a finite tube
whose axis follows a hyperbolic-cosine bend, optionally decorated with
periodic attractive point sites, by expanding in a separable trial basis
orthonormalized under the curved-surface inner product.
"""

from .analysis import (CoefficientTerm, StateReport, angular_peak_count,
                       coefficient_terms, density, density_profile_at,
                       format_state_table, parity_classify, state_report,
                       surface_density_grid, wavefunction)
from .assembly import (DeltaSiteLattice, HamiltonianMatrix, armchair_lattice,
                       assemble, delta_matrix, kinetic_distortion_matrix)
from .basis import (BasisIndex, BasisSpec, eval_H_xi, eval_xi, flat_index,
                    index_map, reflection_matrix, to_real_coefficients)
from .geometry import (DEFAULT_HBAR2_OVER_2ME, SurfacePoint, TubeGeometry,
                       arclength_of_u, axis_curvature,
                       axis_curvature_derivative, axis_point,
                       distortion_potential, embed, lambda_factor,
                       mean_gauss_curvature, principal_curvatures,
                       shape_profile, surface_normal, u_of_arclength)
from .linalg import (IllConditionedBasisError, OrthonormalBasis, OverlapMatrix,
                     SpectralResult, cholesky, eigh_hermitian, generalized_eigh,
                     gram_schmidt, jacobi_eigh, overlap_matrix,
                     solve_self_adjoint)
from .quadrature import (QuadratureGrid, build_grid, measure_weights,
                         surface_inner_product)
from .solve import SurfaceSolution, solve_surface_spectrum, straight_spectrum

__version__ = "0.1.0"

__all__ = [
    "BasisIndex", "BasisSpec", "CoefficientTerm", "DEFAULT_HBAR2_OVER_2ME",
    "DeltaSiteLattice", "HamiltonianMatrix", "IllConditionedBasisError",
    "OrthonormalBasis", "OverlapMatrix", "QuadratureGrid", "SpectralResult",
    "StateReport", "SurfacePoint", "SurfaceSolution", "TubeGeometry",
    "angular_peak_count", "arclength_of_u", "armchair_lattice", "assemble",
    "axis_curvature", "axis_curvature_derivative", "axis_point",
    "build_grid", "cholesky", "coefficient_terms", "delta_matrix", "density",
    "density_profile_at", "distortion_potential", "eigh_hermitian", "embed",
    "eval_H_xi", "eval_xi", "flat_index", "format_state_table",
    "generalized_eigh", "gram_schmidt", "index_map", "jacobi_eigh",
    "kinetic_distortion_matrix", "lambda_factor", "mean_gauss_curvature",
    "measure_weights", "overlap_matrix", "parity_classify",
    "principal_curvatures", "reflection_matrix", "shape_profile",
    "solve_self_adjoint", "solve_surface_spectrum", "state_report",
    "straight_spectrum", "surface_density_grid", "surface_inner_product",
    "surface_normal", "to_real_coefficients", "u_of_arclength",
    "wavefunction",
]
