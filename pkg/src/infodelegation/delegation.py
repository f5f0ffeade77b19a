"""Designer's problem over the self-enforcing censorship family.

The designer values a posterior mean m at u_D(m). Three objectives ship:
the decision maker's value I_G(m) = ∫_0^m G (strictly convex), a welfare
blend λ·I_G + (1−λ)·G, and arbitrary user payoffs. The optimizer scans the
feasible top-atom range on a coarse grid and refines the best bracket by
golden section; a boundary optimum is flagged because it is the typical
outcome rather than an edge case.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .distributions import Distribution
from .errors import ConfigError, DomainError
from .experiments import DoubleCensorship, Experiment, expected_payoff
from .mic import MicFamily, mic_from_top_atom
from .numerics import adaptive_simpson, golden_section_max

_FD_STEP = 1e-6
_CONVEXITY_GRID = 1024


@dataclass(frozen=True)
class DesignerObjective:
    """Posterior-mean payoff of the designer.

    ``dm_value`` is the decision maker's expected gain I_G; ``welfare_weighted``
    mixes it with the provider's payoff G using weight ``lam`` on the decision
    maker; ``custom`` wraps a user callable (optionally with its derivative).
    Convexity is verified for dm_value and custom objectives; welfare blends
    may be non-convex and are exempt.
    """

    kind: str
    lam: float = 1.0
    fn: Callable[[float], float] | None = None
    dfn: Callable[[float], float] | None = None
    bounded_derivative: bool = True

    @staticmethod
    def dm_value() -> "DesignerObjective":
        return DesignerObjective(kind="dm_value")

    @staticmethod
    def welfare_weighted(lam: float) -> "DesignerObjective":
        if not (0.0 <= lam <= 1.0):
            raise ConfigError(f"welfare weight must lie in [0, 1], got {lam}")
        return DesignerObjective(kind="welfare_weighted", lam=lam)

    @staticmethod
    def custom(fn: Callable[[float], float],
               dfn: Callable[[float], float] | None = None,
               bounded_derivative: bool = True) -> "DesignerObjective":
        return DesignerObjective(kind="custom", fn=fn, dfn=dfn,
                                 bounded_derivative=bounded_derivative)

    def utility(self, g_dist: Distribution) -> Callable[[float], float]:
        if self.kind == "dm_value":
            return g_dist.integrated_cdf
        if self.kind == "welfare_weighted":
            lam = self.lam
            return lambda m: lam * g_dist.integrated_cdf(m) + (1.0 - lam) * g_dist.cdf(m)
        if self.kind == "custom":
            if self.fn is None:
                raise ConfigError("custom objective needs a payoff callable")
            return self.fn
        raise ConfigError(f"unknown objective kind {self.kind!r}")

    def utility_derivative(self, g_dist: Distribution) -> Callable[[float], float]:
        if self.kind == "dm_value":
            return g_dist.cdf
        if self.kind == "welfare_weighted":
            lam = self.lam
            return lambda m: lam * g_dist.cdf(m) + (1.0 - lam) * g_dist.pdf(m)
        if self.dfn is not None:
            return self.dfn
        fn = self.utility(g_dist)

        def central(m: float) -> float:
            lo = max(m - _FD_STEP, 0.0)
            hi = min(m + _FD_STEP, 1.0)
            return (fn(hi) - fn(lo)) / (hi - lo)

        return central


def validate_objective(objective: DesignerObjective, g_dist: Distribution) -> None:
    """Convexity grid check (second differences) for objectives that promise it."""
    if objective.kind == "welfare_weighted":
        return
    u = objective.utility(g_dist)
    grid = np.linspace(0.0, 1.0, _CONVEXITY_GRID + 1)
    vals = np.array([u(float(m)) for m in grid])
    second = np.diff(vals, 2)
    scale = max(float(np.abs(vals).max()), 1.0)
    if len(second) and float(second.min()) < -1e-10 * scale:
        raise ConfigError(
            f"objective {objective.kind!r} is not convex on the validation grid")


def designer_payoff(objective: DesignerObjective, family: MicFamily, y: float) -> float:
    """Designer value of the family member with top atom y."""
    _, experiment = mic_from_top_atom(family, y)
    return expected_payoff(experiment, objective.utility(family.g_dist))


def censorship_designer_payoff(objective: DesignerObjective, family: MicFamily,
                               dc: DoubleCensorship) -> float:
    """Three-term censorship formula, an independent path from the segment sum.

    ∫_0^s u dH + (H(t) − H(s))·u(x) + (1 − H(t))·u(y).
    """
    prior = family.prior
    u = objective.utility(family.g_dist)
    revealed = adaptive_simpson(lambda w: u(w) * prior.pdf(w), 0.0, dc.s)
    return (revealed
            + (prior.cdf(dc.t) - prior.cdf(dc.s)) * u(dc.x)
            + (1.0 - prior.cdf(dc.t)) * u(dc.y))


@dataclass(frozen=True)
class DelegationSolution:
    y_opt: float
    censorship: DoubleCensorship
    experiment: Experiment
    payoff: float
    binding_at_y_max: bool
    binding_at_y_min: bool
    objective_kind: str


def optimize(objective: DesignerObjective, family: MicFamily, *,
             grid_points: int = 257, xtol: float = 1e-9) -> DelegationSolution:
    """Maximize the designer payoff over the feasible top-atom range.

    Coarse 257-point scan guards against local maxima (smoothness is known,
    unimodality is not), then golden-section refinement on the bracket around
    the best grid point. Ties break toward the smaller top atom, i.e. toward
    less intermediate pooling.
    """
    validate_objective(objective, family.g_dist)
    y_lo, y_hi = family.y_min, family.y_max
    if y_hi - y_lo <= xtol:
        y_opt = y_lo
    else:
        grid = np.linspace(y_lo, y_hi, grid_points)
        values = np.array([designer_payoff(objective, family, float(v)) for v in grid])
        best = int(np.argmax(values))  # first index wins ties: smaller y
        lo = float(grid[max(best - 1, 0)])
        hi = float(grid[min(best + 1, grid_points - 1)])
        y_ref, f_ref = golden_section_max(
            lambda y: designer_payoff(objective, family, y), lo, hi, xtol=xtol)
        y_opt, f_opt = y_ref, f_ref
        if values[best] > f_opt or (values[best] == f_opt and grid[best] < y_opt):
            y_opt = float(grid[best])
    dc, experiment = mic_from_top_atom(family, y_opt)
    payoff = expected_payoff(experiment, objective.utility(family.g_dist))
    return DelegationSolution(
        y_opt=y_opt,
        censorship=dc,
        experiment=experiment,
        payoff=payoff,
        binding_at_y_max=(family.y_max - y_opt) <= 1e-7,
        binding_at_y_min=(y_opt - family.y_min) <= 1e-7,
        objective_kind=objective.kind,
    )


def perturbation_derivative(objective: DesignerObjective, family: MicFamily) -> float:
    """Right-derivative of the designer value in the top atom, at full delegation.

        (u'(y*) − (u(y*) − u(x*)) / (y* − x*)) · (1 − H(x*))

    Strictly positive for strictly convex u, which is exactly why the
    full-delegation experiment is never designer-optimal.
    """
    pair = family.full_delegation
    if pair.y <= pair.x:
        raise DomainError("degenerate full-delegation pair")
    u = objective.utility(family.g_dist)
    du = objective.utility_derivative(family.g_dist)
    chord = (u(pair.y) - u(pair.x)) / (pair.y - pair.x)
    return (du(pair.y) - chord) * (1.0 - family.prior.cdf(pair.x))
