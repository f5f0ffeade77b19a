"""The family of maximal self-enforcing double-censorship experiments.

A restriction is self-enforcing (incentive compatible) when the provider,
allowed any garbling of it, keeps it as is. Among double censorships with an
S-shaped provider payoff, the self-enforcing maximal ones form a
one-parameter family indexed by the top atom y: given y,

    x solves the tangency condition rho(x, y) = 0,
    t solves E[ω | ω >= t] = y,
    s solves E[ω | ω in [s, t]] = x,

and the family runs from y at the full-delegation atom (where s = t = x
collapse to the full-delegation threshold) up to the largest y for which the
three equations stay solvable with s >= 0 and x > 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import (
    Distribution,
    conditional_mean,
    inverse_interval_conditional_mean,
    inverse_upper_conditional_mean,
)
from .errors import DomainError, InfeasibleError
from .experiments import (
    DoubleCensorship,
    Experiment,
    as_double_censorship,
    make_double_censorship,
)
from .persuasion import TangencyPair, _rho_value, solve_full_delegation, solve_x_given_y

_RANGE_TOL = 1e-9
_PARAM_SLACK = 1e-9


@dataclass(frozen=True)
class MicFamily:
    """Solved context: primitives, full-delegation pair, and feasible y-range."""

    prior: Distribution
    g_dist: Distribution
    full_delegation: TangencyPair
    y_min: float
    y_max: float
    binding_constraint: str


def _construct(prior: Distribution, g_dist: Distribution, pair: TangencyPair,
               y: float) -> tuple[DoubleCensorship, Experiment]:
    """Solve the three defining equations at a given top atom y.

    Raises InfeasibleError naming the first violated condition.
    """
    if y >= 1.0 - 1e-12:
        raise InfeasibleError("top atom must satisfy y < 1", constraint="y < 1")
    x = solve_x_given_y(g_dist, y)  # InfeasibleError("x > 0") when rho(0, y) < 0
    if x <= 1e-12:
        raise InfeasibleError(
            f"tangency partner collapses to zero at y={y:.12g}", constraint="x > 0")
    if x > pair.x + _PARAM_SLACK:
        raise InfeasibleError(
            f"pooled atom x={x:.12g} exceeds the full-delegation threshold"
            f" {pair.x:.12g}", constraint="x <= x_star")
    t = inverse_upper_conditional_mean(prior, y)
    if t < x - _PARAM_SLACK:
        raise InfeasibleError(
            f"upper threshold t={t:.12g} fell below the pooled atom x={x:.12g}",
            constraint="x <= t")
    t = max(t, x)
    s = inverse_interval_conditional_mean(prior, t, x)  # InfeasibleError("s >= 0")
    if s > pair.x + _PARAM_SLACK:
        raise InfeasibleError(
            f"lower threshold s={s:.12g} exceeds the full-delegation threshold",
            constraint="s <= x_star")
    dc, experiment = make_double_censorship(prior, s, t)
    return dc, experiment


def feasible_y_range(prior: Distribution, g_dist: Distribution,
                     pair: TangencyPair) -> tuple[float, float, str]:
    """Largest interval [y*, y_max] of constructible top atoms.

    The lower endpoint is the full-delegation atom. The upper endpoint is
    located by bisection on the feasibility predicate, starting just below
    one; the constraint that stops growth is recorded. The range may collapse
    to the single point y*.
    """
    y_min = pair.y

    def feasible(y: float) -> bool:
        try:
            _construct(prior, g_dist, pair, y)
            return True
        except InfeasibleError:
            return False

    cap = 1.0 - 1e-9
    if y_min >= cap:
        return y_min, y_min, "y < 1"
    if feasible(cap):
        return y_min, cap, "y < 1"
    lo, hi = y_min, cap
    while hi - lo > _RANGE_TOL:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    binding = "unknown"
    try:
        _construct(prior, g_dist, pair, min(hi + 5.0 * _RANGE_TOL, cap))
    except InfeasibleError as exc:
        binding = exc.constraint or "unknown"
    return y_min, lo, binding


def build_mic_family(prior: Distribution, g_dist: Distribution) -> MicFamily:
    pair, _ = solve_full_delegation(prior, g_dist)
    y_min, y_max, binding = feasible_y_range(prior, g_dist, pair)
    return MicFamily(prior=prior, g_dist=g_dist, full_delegation=pair,
                     y_min=y_min, y_max=y_max, binding_constraint=binding)


def mic_from_top_atom(family: MicFamily, y: float) -> tuple[DoubleCensorship, Experiment]:
    """Family member at top atom y in [y_min, y_max]."""
    if y < family.y_min - _PARAM_SLACK or y > family.y_max + _PARAM_SLACK:
        raise DomainError(
            f"top atom {y:.12g} outside the feasible range"
            f" [{family.y_min:.12g}, {family.y_max:.12g}]")
    y = min(max(y, family.y_min), max(family.y_max, family.y_min))
    return _construct(family.prior, family.g_dist, family.full_delegation, y)


def feasibility_scan(family: MicFamily, points: int = 10_000) -> dict:
    """Dense diagnostic scan of the feasibility predicate above y_min.

    The range search assumes feasibility is an interval in y; this scan
    reports any feasible points beyond the bisected endpoint, which would
    contradict that structure.
    """
    grid = np.linspace(family.y_min, 1.0 - 1e-9, points)
    beyond = []
    for v in grid:
        y = float(v)
        if y <= family.y_max + _RANGE_TOL:
            continue
        try:
            _construct(family.prior, family.g_dist, family.full_delegation, y)
            beyond.append(y)
        except InfeasibleError:
            pass
    return {"interval_ok": not beyond, "feasible_beyond_range": beyond[:16]}


def is_mic(family: MicFamily, exp: Experiment, tol: float = 1e-8) -> bool:
    """Membership test against the family characterization.

    Recognizes canonical double-censorship segment form, then requires the
    tangency condition within ``tol``, thresholds straddling the
    full-delegation threshold, nondegenerate atoms 0 < x < y < 1, and
    conditional-mean consistency.
    """
    if not (exp.prior is family.prior or exp.prior.config() == family.prior.config()):
        raise DomainError("experiment built over a different prior")
    dc = as_double_censorship(exp, tol=tol)
    if dc is None:
        return False
    if not (dc.x > 1e-10 and dc.y < 1.0 - 1e-10 and dc.y - dc.x > 1e-10):
        return False
    x_star = family.full_delegation.x
    if not (dc.s <= x_star + _PARAM_SLACK and dc.t >= x_star - _PARAM_SLACK):
        return False
    r0 = family.g_dist.mode
    if not (dc.x <= r0 + _PARAM_SLACK and dc.y >= r0 - _PARAM_SLACK):
        return False
    if abs(_rho_value(family.g_dist, dc.x, dc.y)) > tol:
        return False
    try:
        dc.validate(family.prior, tol=tol)
    except DomainError:
        return False
    # conditional-mean consistency of the recognized parameters
    if abs(conditional_mean(family.prior, dc.t, 1.0) - dc.y) > tol:
        return False
    return True
