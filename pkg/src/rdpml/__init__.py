"""Reflectionless discrete perfectly matched layers for the wave equation."""
from .stencil import Closure, StencilCoeffs, apply_laplacian_1d, apply_laplacian_2d, stencil_coefficients
from .dispersion import (CharPoly, DampingProfile, char_poly, char_poly_coefficients, decay_factor,
                         discrete_wavenumbers, dispersion_map, optimal_sigma)
from ._family import InvalidConfigurationError, UnsupportedOrderError
from .rdpml1d import Grid1D, RDPML1D, State1D, plain_rhs_1d, rhs_1d
from .rdpml2d import Grid2D, RDPML2D, State2D, plain_rhs_2d
from .timeint import ButcherTableau, DivergenceError, dop853, rk4, rk_final, rk_integrate
from .helmholtz import (ComplexSparseMatrix, HelmholtzSolution, SingularFrequencyError, SolverError,
                        assemble_full, assemble_reduced, c_inverse, solve, solve_reduced, sparsity_report)

__version__ = "0.1.0"
