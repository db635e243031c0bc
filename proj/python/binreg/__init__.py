"""Bayesian binary regression toolkit: fast Gaussian approximations
(Laplace family, EP), exact samplers (IS/RQMC, MCMC, tempering SMC),
variable selection, and the evaluation metrics used to compare them."""

from binreg._core import (  # noqa: F401
    ChainTrace,
    Dataset,
    GaussianApprox,
    MapResult,
    NumericalError,
    ParseError,
    ParticleSystem,
    PosteriorTarget,
    SobolSequence,
    ValidationError,
    WeightedSample,
    binary_smc_varsel,
    builtin_dataset,
    enumerate_varsel,
    ep_fit,
    gibbs_probit,
    hmc,
    importance_sample,
    improved_laplace_marginal,
    ingest_csv,
    iris,
    laplace,
    laplace_em,
    marginal_accuracy,
    newton_map,
    rqmc_importance_sample,
    rwmh,
    standardize,
    synth_dataset,
    temper_smc,
)

__all__ = [name for name in dir() if not name.startswith("_")]
