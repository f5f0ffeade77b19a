"""Optimal delegation of information provision.

A provider persuades a decision maker by choosing how much to reveal about a
one-dimensional state; a designer caps the provider's informativeness with a
restriction the provider may garble but not exceed. This package solves the
unrestricted persuasion benchmark, constructs the family of maximal
self-enforcing double-censorship restrictions, certifies them with convex
price functions, optimizes the designer's choice within the family, and
cross-validates everything against a discretized linear program.
"""

from .certificates import (
    CertificateReport,
    PriceFunction,
    SampledFunction,
    canonical_price_function,
    certificate_curve,
    implementing_restriction,
    point_mass_price_function,
    restriction_integral_gap,
    verify_ic,
    virtual_value,
)
from .delegation import (
    DelegationSolution,
    DesignerObjective,
    censorship_designer_payoff,
    designer_payoff,
    optimize,
    perturbation_derivative,
    validate_objective,
)
from .distributions import (
    AssumptionReport,
    BetaDistribution,
    Distribution,
    PiecewisePolynomialDistribution,
    TabulatedDistribution,
    UniformDistribution,
    check_assumptions,
    conditional_mean,
    distribution_from_config,
    inverse_interval_conditional_mean,
    inverse_upper_conditional_mean,
)
from .errors import (
    AssumptionError,
    CertificateError,
    ConfigError,
    DomainError,
    InfeasibleError,
    InfoDelegationError,
    InvalidExperimentError,
    NumericsError,
)
from .experiments import (
    Atom,
    DoubleCensorship,
    Experiment,
    FollowsPrior,
    as_double_censorship,
    censorship_experiment,
    expected_payoff,
    experiment_from_record,
    experiment_to_record,
    full_revelation,
    is_mpc,
    make_double_censorship,
    point_mass,
    sample_curve,
    upper_censorship,
)
from .mic import (
    MicFamily,
    build_mic_family,
    feasibility_scan,
    feasible_y_range,
    is_mic,
    mic_from_top_atom,
)
from .oracle import (
    DiscreteExperiment,
    DiscreteInstance,
    IcCheck,
    ScenarioReport,
    StructureReport,
    TransportPlan,
    bipooling_structure,
    discrete_icdf,
    discretize_experiment,
    ic_check_discrete,
    lp_best_reply,
    m_shaped_payoff,
    make_instance,
    scenario_m_shaped,
    scenario_uninformed_dm,
    step_payoff,
)
from .persuasion import TangencyPair, rho, solve_full_delegation, solve_x_given_y

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
