"""Multiscale higher-order total variation (MHOTV) reconstruction toolkit."""

from .errors import (ConfigError, DimensionMismatch, GeometryMismatch, InvalidOrder,
                     LengthMismatch, MhotvError, NonSymmetricSpectrum, NumericalFailure,
                     ShapeMismatch, StencilTooLong, UnsupportedOrder)
from .spectral import circular_convolve, dft, idft
from .operators import (CoefficientStack, FilterSpectrum, Stencil, adjoint_transform,
                        adjoint_transform_2d, apply_direct, apply_pchain, build_stencil,
                        circulant_matrix, count_flops, filter_spectrum, filter_values,
                        flops, level_weights, transform_2d, transform_decomposition,
                        transform_fourier)
from .wavelets import (FrameStack, WaveletFilters, daubechies_filters, frame_multipliers,
                       ti_wavelet_adjoint, ti_wavelet_adjoint_2d, ti_wavelet_transform,
                       ti_wavelet_transform_2d, wavelet_level_weights)
from .forward import (LinearOperator, SinogramGeometry, adjoint_check, cgls,
                      filtered_backprojection, gaussian_sensing, identity_operator,
                      radon_operator, random_sensing, sinogram_to_vector,
                      vector_to_sinogram)
from .reporting import SolverReport
from .solvers import (RegularizerSpec, SolverOptions, admm_l1, constrained_l1,
                      project_nonneg, shrink)
from .experiments import (PiecewisePolySpec, RecoveryConfig, SuccessConfig, SuccessCurve,
                          SweepResult, Table1Config, TomoConfig, add_noise,
                          default_lambda_grid, gen_piecewise_poly, lambda_sweep,
                          method_label, phantom2d, rel_error, run_recovery_study,
                          run_success_study, run_table1, run_tomo_study, sparsity_count)

__version__ = "0.1.0"
