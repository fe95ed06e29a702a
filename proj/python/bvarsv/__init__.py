"""Bayesian VARs with stochastic volatility under global-local shrinkage priors."""

import json as _json

import numpy as _np

from . import _core
from ._core import (ConfigError, DataError, DimensionError, DomainError, Error, NumericalError, config_hash, dma,
                    hoyer, load_dataset, run, simulate, study_priors)

__all__ = [
    "ConfigError", "DataError", "DimensionError", "DomainError", "Error", "NumericalError",
    "config_hash", "dma", "estimate", "hoyer", "load_dataset", "log_marginal_density", "marginal_density",
    "prior_hoyer", "run", "simulate", "study_priors",
]


def _prior(p):
    return p if isinstance(p, str) else _json.dumps(p or {})


def marginal_density(prior, phi):
    """Univariate marginal prior density; `prior` uses the config schema of `model.prior`."""
    return _core.marginal_density(_prior(prior), _np.atleast_1d(_np.asarray(phi, dtype=float)))


def log_marginal_density(prior, phi):
    return _core.log_marginal_density(_prior(prior), _np.atleast_1d(_np.asarray(phi, dtype=float)))


def prior_hoyer(prior, n, sims, seed=42, threads=1):
    return _np.asarray(_core.prior_hoyer(_prior(prior), n, sims, seed, threads))


def estimate(Y, p=1, intercept=True, prior=None, l_prior=None, draws=10000, burnin=5000, thin=10, seed=42,
             names=None):
    """Gibbs sampler on a T x M array. Returns retained draws as arrays (one row per draw)."""
    Y = _np.ascontiguousarray(_np.asarray(Y, dtype=float))
    return _core.estimate(Y, p, intercept, _prior(prior), _prior(l_prior), draws, burnin, thin, seed,
                          list(names or []))
