"""Full-delegation benchmark for an S-shaped provider payoff.

Without restrictions the provider's unique best reply is upper censorship:
reveal states below a threshold x and pool the rest to the tail conditional
mean y. The pair (x, y) is pinned down by a tangency condition on the payoff
CDF G: the tangent to G at y passes through (x, G(x)), i.e.

    rho(x, y) = G(x) + g(y)(y − x) − G(y) = 0,

with x in the convex region [0, r0] and y in the concave region [r0, 1].
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .distributions import Distribution, check_assumptions, conditional_mean
from .errors import AssumptionError, DomainError, InfeasibleError, NumericsError
from .experiments import Experiment, upper_censorship
from .numerics import bisect_root

RHO_RESIDUAL = 1e-10
_BAND_SLACK = 1e-9


@dataclass(frozen=True)
class TangencyPair:
    """Tangency solution (x, y): x in the convex part, y in the concave part."""

    x: float
    y: float


def _rho_value(g_dist: Distribution, x: float, y: float) -> float:
    return g_dist.cdf(x) + g_dist.pdf(y) * (y - x) - g_dist.cdf(y)


def rho(g_dist: Distribution, x: float, y: float) -> float:
    """Tangency gap G(x) + g(y)(y − x) − G(y) on the band x <= r0 <= y."""
    r0 = g_dist.mode
    if not (-_BAND_SLACK <= x <= r0 + _BAND_SLACK):
        raise DomainError(f"x={x} outside [0, r0={r0:.6g}]")
    if not (r0 - _BAND_SLACK <= y <= 1.0 + _BAND_SLACK):
        raise DomainError(f"y={y} outside [r0={r0:.6g}, 1]")
    return _rho_value(g_dist, x, y)


def solve_x_given_y(g_dist: Distribution, y: float) -> float:
    """The x in [0, r0] paired with a given top atom y by the tangency condition.

    rho(·, y) crosses zero from above exactly once on [0, r0] when a root
    exists; bisection is therefore exact. Infeasibility (no sign change)
    reports rho(0, y), the value at the most generous x.
    """
    r0 = g_dist.mode
    if not (r0 - _BAND_SLACK <= y <= 1.0 + _BAND_SLACK):
        raise DomainError(f"top atom y={y} outside [r0={r0:.6g}, 1]")
    y = min(max(y, r0), 1.0)
    if y <= r0:
        return r0
    at_zero = _rho_value(g_dist, 0.0, y)
    if at_zero < 0.0:
        raise InfeasibleError(
            f"no tangency partner for y={y:.12g}: rho(0, y)={at_zero:.6e} < 0",
            constraint="x > 0", boundary_value=at_zero)
    if at_zero == 0.0:
        return 0.0
    x = bisect_root(lambda x: _rho_value(g_dist, x, y), 0.0, r0)
    residual = abs(_rho_value(g_dist, x, y))
    if residual > RHO_RESIDUAL:
        raise NumericsError(f"tangency residual {residual:.3e}", residual=residual)
    return x


def solve_full_delegation(prior: Distribution,
                          g_dist: Distribution) -> tuple[TangencyPair, Experiment]:
    """Threshold and atom of the provider's unrestricted optimum.

    Solves rho(x, E[ω | ω >= x]) = 0 on (0, r0) by bisection. With the
    informativeness margin positive the value at x = 0 is exactly that margin
    (> 0) while concavity forces a negative value at r0, so a root exists.
    A 257-point sign scan guards against multiple brackets, which the shape
    assumptions rule out but which we verify rather than assume; if several
    appear, the smallest root is used and a warning is emitted.
    """
    report = check_assumptions(prior, g_dist)
    if not report.informativeness_ok:
        raise AssumptionError(
            "informativeness assumption fails:"
            f" g(mu)*mu - G(mu) = {report.margin:.6e} <= 0;"
            " the uninformative experiment is the unique best reply",
            report=report)
    r0 = report.r0

    def phi(x: float) -> float:
        return _rho_value(g_dist, x, conditional_mean(prior, x, 1.0))

    eps = 1e-9
    lo, hi = eps, r0 - eps
    phi_lo, phi_hi = phi(lo), phi(hi)
    if phi_lo <= 0.0 or phi_hi >= 0.0:
        raise NumericsError(
            f"tangency bracket failed: phi({lo:.3g})={phi_lo:.3e},"
            f" phi({hi:.3g})={phi_hi:.3e}")
    grid = np.linspace(lo, hi, 257)
    signs = np.sign([phi(float(v)) for v in grid])
    crossings = int(np.sum(signs[:-1] * signs[1:] < 0))
    if crossings > 1:
        warnings.warn(
            f"tangency equation has {crossings} sign changes on the diagnostic grid;"
            " using the smallest root", RuntimeWarning, stacklevel=2)
        hi = float(grid[int(np.argmax(signs[:-1] * signs[1:] < 0)) + 1])
    x_star = bisect_root(phi, lo, hi)
    y_star = conditional_mean(prior, x_star, 1.0)
    residual = abs(_rho_value(g_dist, x_star, y_star))
    if residual > 1e-9:
        raise NumericsError(f"full-delegation residual {residual:.3e}", residual=residual)
    pair = TangencyPair(x=x_star, y=y_star)
    return pair, upper_censorship(prior, x_star)
