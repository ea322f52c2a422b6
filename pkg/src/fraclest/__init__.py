"""fraclest: fractional subgrid-scale closure toolkit for periodic-box turbulence."""

from .errors import (BlowupError, DegenerateCorrelationError,
                     DegenerateFieldError, DegenerateStatisticsError,
                     DegenerateTruthError, FileFormatError, GridMismatchError,
                     NonzeroMeanError, ParameterError, RepresentationError,
                     SpectrumError, SurrogateDataError, SurrogateFitError,
                     ToolkitError, UnsupportedFilterWidthError)
from .grid import (PHYSICAL, SPECTRAL, GridSpec, ScalarField,
                   SymmetricTensorField, VectorField, apply_dealias,
                   dealias_mask, divergence, gradient, laplacian,
                   project_solenoidal, set_num_threads, get_num_threads,
                   strain_rate, tensor_divergence, transform)
from .filtering import (BoxFilterSpec, FilteredPair, box_filter,
                        filter_velocity, true_sgs_divergence, true_sgs_stress)
from .fractional import (EntropyBound, FsgsCoefficients, FsgsParams,
                         entropy_bound, equivalent_sgs_stress,
                         fractional_laplacian, fsgs_coefficient,
                         fsgs_divergence, riesz_potential, riesz_transform)
from .smagorinsky import (SmagorinskyParams, smagorinsky_divergence,
                          smagorinsky_stress)
from .solver import (FlowStats, LowShellForcing, SolverConfig, compute_stats,
                     generate_ic, run_decaying, run_forced, shell_spectrum,
                     step)
from .apriori import (AlphaSweepResult, CorrelationResult, PdfHistogram,
                      ScatterSample, correlation, evaluate_fsgs,
                      evaluate_smagorinsky, pdf_compare, scatter_export,
                      sweep_alpha, sweep_alpha_against)
from . import kriging, vfld

__version__ = "0.1.0"
