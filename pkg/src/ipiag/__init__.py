"""Inertial proximal incremental aggregated gradient methods.

A deterministic simulator for asynchronous aggregated-gradient descent on
composite objectives, with step-size certificates that guarantee linear
convergence under bounded staleness and quadratic growth, plus verifiers
that replay those guarantees against recorded runs.
"""

from .core import (
    CompositeProblem,
    DivergenceError,
    IterateState,
    NumericError,
    evaluate_objective,
    full_gradient,
    gradient_consistency_check,
    load_problem,
    problem_from_document,
    problem_to_document,
)
from .prox import ProxSpec, prox_l1, prox_nonneg_l1, prox_zero
from .rates import (
    BoundReport,
    DescentReport,
    RateCertificate,
    RateInputs,
    RecurrenceReport,
    TwoTermRecurrence,
    certificate_for,
    ipiag_certificate,
    lyapunov_value,
    momentum_certificate,
    nesterov_certificate,
    one_term_condition,
    verify_descent,
    verify_linear_bound,
    verify_one_term,
    verify_two_term,
)
from .rng import SplitMix64
from .schedules import (
    DelaySchedule,
    ScheduleError,
    max_observed_staleness,
    schedule_synchronous,
    schedule_uniform_single,
)
from .solver import (
    GradientTable,
    SolverParams,
    StateError,
    Trace,
    aggregate,
    contiguous_partition,
    ipiag_step,
    iterations_to_threshold,
    run,
)
from .problems import (
    LassoSpec,
    ToySpec,
    lasso_arrays,
    lasso_document,
    make_lasso,
    make_toy,
    reference_solution,
    spectral_norm_sq,
    toy_document,
)

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "CompositeProblem",
    "DelaySchedule",
    "DescentReport",
    "DivergenceError",
    "GradientTable",
    "IterateState",
    "LassoSpec",
    "NumericError",
    "ProxSpec",
    "RateCertificate",
    "RateInputs",
    "RecurrenceReport",
    "ScheduleError",
    "SolverParams",
    "SplitMix64",
    "StateError",
    "ToySpec",
    "Trace",
    "TwoTermRecurrence",
    "aggregate",
    "certificate_for",
    "contiguous_partition",
    "evaluate_objective",
    "full_gradient",
    "gradient_consistency_check",
    "ipiag_certificate",
    "ipiag_step",
    "iterations_to_threshold",
    "lasso_arrays",
    "lasso_document",
    "load_problem",
    "lyapunov_value",
    "make_lasso",
    "make_toy",
    "max_observed_staleness",
    "momentum_certificate",
    "nesterov_certificate",
    "one_term_condition",
    "problem_from_document",
    "problem_to_document",
    "prox_l1",
    "prox_nonneg_l1",
    "prox_zero",
    "reference_solution",
    "run",
    "schedule_synchronous",
    "schedule_uniform_single",
    "spectral_norm_sq",
    "toy_document",
    "verify_descent",
    "verify_linear_bound",
    "verify_one_term",
    "verify_two_term",
]
