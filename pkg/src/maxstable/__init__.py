"""Simulation and numerics for max-stable and generalized Pareto processes on [0, 1].

The package models bounded functions on the unit interval on a finite grid,
evaluates the weighted-sup norms induced by generator processes, samples
max-stable and Pareto-type paths exactly, and reproduces the surrounding
distribution theory numerically: domain-of-attraction experiments,
convergence-rate recovery for perturbed radial laws, and the distributional
calculus of conditional laws, increments, and derivatives.
"""

from .calculus import (
    DerivativeLaw,
    DerivativeMeans,
    QuadratureConvergenceError,
    QuadratureSpec,
    conditional_fdf,
    derivative_df,
    derivative_law,
    derivative_mean,
    increment_df,
    sample_zeta,
    zeta_df,
)
from .dnorm import DnormEstimate, dnorm, dnorm_exact, dnorm_mc, variation
from .doa import (
    DoaReport,
    ExpGumbel,
    FAMILIES,
    MarginFamily,
    UniformNegExp,
    apply_margins,
    condition3_discrepancy,
    copula_from_sgpp,
    doa_experiment,
)
from .function_space import (
    EFunction,
    Grid,
    NONPOSITIVE,
    UNRESTRICTED,
    efun_embed_fidis,
    efun_sup_weighted,
    efun_sup_weighted_excluding,
)
from .generators import (
    Constant,
    DiscreteSimplex,
    FiniteSpectral,
    GeneratorSample,
    GeneratorSpec,
    LogisticFidis,
    RandomCosine,
    finite_spectral_atoms,
    generator_bound,
    sample_generator,
    sample_generator_matrix,
)
from .neighborhoods import (
    RateFitReport,
    default_test_family,
    fit_delta,
    rate_curve,
    remainder_integral,
    spectral_df,
    sup_diff,
    unit_sphere,
    von_mises_remainder,
)
from .sampler import (
    PathEnsemble,
    PerturbedRadialSpec,
    ProcessPath,
    eta_functional,
    eta_functional_ensemble,
    fdf_empirical,
    sample_gpp,
    sample_gpp_ensemble,
    sample_perturbed_sgpp,
    sample_perturbed_sgpp_ensemble,
    sample_sgpp,
    sample_sgpp_ensemble,
    sample_smsp,
    sample_smsp_ensemble,
)
from .streams import Stream

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
