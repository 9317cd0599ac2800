"""Multivariate extreme-value copulas: estimation, evaluation, and sampling.

The package is organised around the Pickands dependence function A, the
convex function on the unit simplex that determines an extreme-value copula:

* :mod:`evcopula.core` - simplex and GEV utilities, analytic A families,
  copula evaluation, constraint diagnostics.
* :mod:`evcopula.pipeline` - block maxima, marginal fits, uniformization,
  the reflection transform, and the exponential Z statistic.
* :mod:`evcopula.estimators` - Pickands, CFG (plain and endpoint-corrected),
  and rank-integral (BDV) estimators of A, including the envelope-projected
  minimum-distance variant.
* :mod:`evcopula.icnn` - an input-convex network model of A trained by
  exponential maximum likelihood, with its own reverse-mode gradients.
* :mod:`evcopula.survival` - joint survival probabilities through the
  reflection trick, plus exact bivariate references.
* :mod:`evcopula.sampling` - exact logistic-family samplers and a learned
  spectral generator with a heuristic max-stable sampler.
* :mod:`evcopula.cli` - command line front end; see ``evcopula --help``.
"""

from .core import (
    AsymmetricLogistic,
    BoundsReport,
    CompleteDependence,
    ConstantPickands,
    DomainError,
    GevParams,
    ParameterError,
    PickandsModel,
    SymmetricLogistic,
    as_simplex,
    check_pickands_bounds,
    copula_from_pickands,
    gev_cdf,
    gev_ppf,
    independence_model,
    random_asymmetric_logistic,
    sample_simplex_uniform,
)
from .estimators import (
    METHODS,
    EmpiricalPickands,
    empirical_pickands,
    estimate_bdv,
    estimate_bdv_mm,
    estimate_cfg,
    estimate_pickands,
)
from .icnn import (
    IcnnParams,
    IcnnPickands,
    ModelFormatError,
    TrainConfig,
    TrainingDivergedError,
    load_model,
    pickands_from_icnn,
    save_model,
    train_pickands_icnn,
)
from .pipeline import (
    BlockMaxima,
    PipelineError,
    RawDataset,
    Uniformized,
    block_maxima,
    fit_gev_lmoments,
    fit_gev_marginals,
    fit_gev_mle,
    ingest_csv,
    reflect_transform,
    uniformize,
    use_rank_marginals,
    z_statistic,
    z_statistics,
)
from .sampling import (
    GeneratorParams,
    GenTrainConfig,
    generator_forward,
    generator_loss,
    load_generator,
    sample_asymmetric_logistic,
    sample_mev,
    sample_mev_heuristic,
    sample_positive_stable,
    sample_symmetric_logistic,
    save_generator,
    train_generator,
)
from .survival import (
    ProvenanceError,
    ThresholdVector,
    empirical_accuracy,
    exact_survival_bivariate,
    survival_probability,
    threshold_grid,
)

__version__ = "0.1.0"
