"""Mixing models, dependent streams and mixing-coefficient estimation."""

from .empirical import PhiEstimate, estimate_phi_empirical, estimate_phi_profile
from .markov import (
    exact_phi_finite_chain,
    is_primitive,
    stationary_distribution,
    subsample_kernel,
)
from .models import Algebraic, Geometric, Iid, MixingModel, Tabulated, eval_phi, tail_sum
from .streams import (
    DEFAULT_MAX_HOLD,
    FiniteChainSpec,
    HoldDurationLaw,
    HoldTimeUniformSpec,
    IidUniformSpec,
    Stream,
    StreamSpec,
    WrappedSpec,
    hold_duration_law,
    make_stream,
    next_sample,
    spec_from_config_block,
    spec_to_config_block,
    tuned_hold_exponent,
    tuned_hold_spec,
)

__all__ = [
    "MixingModel", "Geometric", "Algebraic", "Tabulated", "Iid",
    "eval_phi", "tail_sum",
    "StreamSpec", "IidUniformSpec", "HoldTimeUniformSpec", "FiniteChainSpec",
    "WrappedSpec", "Stream", "make_stream", "next_sample",
    "HoldDurationLaw", "hold_duration_law",
    "tuned_hold_exponent", "tuned_hold_spec", "DEFAULT_MAX_HOLD",
    "spec_to_config_block", "spec_from_config_block",
    "stationary_distribution", "exact_phi_finite_chain", "subsample_kernel",
    "is_primitive",
    "PhiEstimate", "estimate_phi_empirical", "estimate_phi_profile",
]
