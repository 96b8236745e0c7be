"""Multiple orthogonal polynomial ensembles: finite-n correlation kernels,
universal limit kernels, vector equilibrium problems and samplers."""

__version__ = "0.1.0"

from .equilibrium import (
    DiscreteMeasure,
    EquilibriumProblem,
    Grid,
    energy,
    make_single_ep,
    make_source_ep,
    make_twomatrix_ep,
    minimize,
    support_gap,
)
from .limits import (
    PearceyParams,
    airy_kernel,
    pearcey_kernel_int,
    pearcey_kernel_ode,
    pearcey_pq,
    sine_kernel,
    tracy_widom_cdf,
)
from .mop import (
    KernelEvaluator,
    MultiIndex,
    build_kernel,
    compute_mop,
    correlation,
    eval_kernel,
    mean_density,
    mop_residuals,
)
from .sampling import (
    Histogram,
    SpectralSample,
    empirical_density,
    largest_eigenvalue_cdf,
    sample_gue,
    sample_nibm_positions,
    sample_source,
)
from .weights import WeightFamily, eval_weight, kmg_density

__all__ = [
    "DiscreteMeasure", "EquilibriumProblem", "Grid", "Histogram", "KernelEvaluator", "MultiIndex",
    "PearceyParams", "SpectralSample", "WeightFamily", "airy_kernel", "build_kernel", "compute_mop",
    "correlation", "empirical_density", "energy", "eval_kernel", "eval_weight", "kmg_density",
    "largest_eigenvalue_cdf", "make_single_ep", "make_source_ep", "make_twomatrix_ep", "mean_density",
    "minimize", "mop_residuals", "pearcey_kernel_int", "pearcey_kernel_ode", "pearcey_pq", "sample_gue",
    "sample_nibm_positions", "sample_source", "sine_kernel", "support_gap", "tracy_widom_cdf",
]
