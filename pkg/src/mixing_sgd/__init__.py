"""Online SGD over phi-mixing data streams.

A stochastic-optimization laboratory: generators of dependent data with
controllable mixing rates, three online SGD sampling schemes (plain,
periodically subsampled, mini-batch), Monte-Carlo estimators of mixing
coefficients and dependence-induced bias with exact finite-chain oracles,
and arithmetic evaluators of the corresponding high-probability guarantees.
"""

from . import bounds, mixing, objective, optim
from .errors import ConfigError, NumericalError
from .mixing import (
    Algebraic,
    FiniteChainSpec,
    Geometric,
    HoldTimeUniformSpec,
    Iid,
    IidUniformSpec,
    MixingModel,
    PhiEstimate,
    Tabulated,
    WrappedSpec,
    estimate_phi_empirical,
    estimate_phi_profile,
    eval_phi,
    exact_phi_finite_chain,
    make_stream,
    next_sample,
    stationary_distribution,
    tail_sum,
    tuned_hold_spec,
)
from .objective import (
    ProblemBundle,
    QuadraticProblem,
    default_experiment_problem,
    minimizer,
    population_loss,
    project,
    sample_grad,
    sample_loss,
    uniform_quadratic,
)
from .optim import (
    Constant,
    InvSqrt,
    MiniBatch,
    Plain,
    Subsampled,
    TheoryMiniBatch,
    Trajectory,
    estimate_bias,
    exact_bias_finite_chain,
    regret,
    run,
)
from .bounds import (
    BoundParams,
    ComplexityOrder,
    azuma_tail_bound,
    dependent_bernstein_tail,
    gradient_variance_bound,
    minibatch_bias_bound,
    minibatch_error_bound,
    minibatch_regret_bound,
    sample_complexity_order,
    sgd_error_bound,
    subsampled_error_bound,
    suggested_step_size,
)

__version__ = "0.1.0"
