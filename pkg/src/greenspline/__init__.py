"""Green's functions of the 1-D Laplace operator, first-derivative smoothing
splines built from them, and the matching Gaussian-process view."""

from .errors import DomainError, GreensplineError, NumericalError, ValidationError
from .gp import (
    GaussianVector,
    GpPrior,
    condition,
    condition_on_increment,
    finite_dim,
    map_estimate,
    sample_bm_increments,
    sample_paths,
    transform_paths,
)
from .kernels import CATALOG, Kernel, check_constraints, get_kernel, gram, offdiag_laplacian_check
from .numerics import RandomSource, SpdMatrix, gaussian_draws, second_difference, simpson, spd_solve
from .series import SeriesSpec, apply_kernel, cosine_series_closed, fourier_coeffs, truncated_green
from .spline import DataSet, SplineFit, fit

__version__ = "0.1.0"
