"""Price-function certificates of incentive compatibility.

A continuous convex function p that dominates the provider payoff G and
touches it on the support of an experiment certifies that the provider would
not garble that experiment. For a double censorship with atoms (x, y)
satisfying the tangency condition the canonical certificate is G itself up
to x, continued by the tangent line to G at y.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .distributions import Distribution
from .errors import CertificateError, DomainError
from .experiments import (
    Atom,
    DoubleCensorship,
    Experiment,
    FollowsPrior,
    Segment,
    as_double_censorship,
    censorship_experiment,
    expected_payoff,
    is_mpc,
)
from .persuasion import TangencyPair, _rho_value, solve_x_given_y

CHECK_GRID = 2048
CHECK_TOL = 1e-8
_SLOPE_STEP = 1e-7


@dataclass(frozen=True)
class AffinePiece:
    lo: float
    hi: float
    value_at_lo: float
    slope: float

    def __call__(self, m: float) -> float:
        return self.value_at_lo + self.slope * (m - self.lo)


@dataclass(frozen=True)
class CurvePiece:
    lo: float
    hi: float
    fn: Callable[[float], float]
    label: str = "curve"

    def __call__(self, m: float) -> float:
        return self.fn(m)


PricePiece = AffinePiece | CurvePiece


@dataclass(frozen=True)
class PriceFunction:
    """Continuous convex piecewise function used as an optimality certificate."""

    pieces: tuple[PricePiece, ...]

    def __post_init__(self):
        if not self.pieces:
            raise CertificateError("price function needs at least one piece")
        for left, right in zip(self.pieces, self.pieces[1:]):
            if abs(left.hi - right.lo) > 1e-12:
                raise CertificateError(f"pieces leave a gap at {left.hi}")
            if abs(left(left.hi) - right(right.lo)) > 1e-10:
                raise CertificateError(
                    f"discontinuity {abs(left(left.hi) - right(right.lo)):.3e}"
                    f" at breakpoint {left.hi}")

    def __call__(self, m: float) -> float:
        m = min(max(m, 0.0), 1.0)
        for piece in self.pieces:
            if m <= piece.hi or piece is self.pieces[-1]:
                return piece(m)
        return self.pieces[-1](m)

    def breakpoints(self) -> tuple[float, ...]:
        points = [self.pieces[0].lo]
        points.extend(piece.hi for piece in self.pieces)
        return tuple(points)

    def _one_sided_slopes(self, piece: PricePiece) -> tuple[float, float]:
        if isinstance(piece, AffinePiece):
            return piece.slope, piece.slope
        width = piece.hi - piece.lo
        h = min(_SLOPE_STEP, 0.25 * width)
        left = (piece(piece.lo + h) - piece(piece.lo)) / h
        right = (piece(piece.hi) - piece(piece.hi - h)) / h
        return left, right

    def convexity_violation(self, samples: int = 256) -> float:
        """Worst convexity defect: negative slope increments across and within pieces."""
        worst = 0.0
        slopes = [self._one_sided_slopes(p) for p in self.pieces]
        for (_, left_out), (right_in, _) in zip(slopes, slopes[1:]):
            worst = max(worst, left_out - right_in)
        # within pieces: nonnegative second differences on a local grid
        for piece in self.pieces:
            if isinstance(piece, AffinePiece) or piece.hi - piece.lo < 1e-12:
                continue
            grid = np.linspace(piece.lo, piece.hi, samples)
            vals = np.array([piece(float(v)) for v in grid])
            second = np.diff(vals, 2)
            if len(second):
                worst = max(worst, float(-second.min()) / max((grid[1] - grid[0]), 1e-12))
        return worst

    def domination_violation(self, g_dist: Distribution, grid_n: int = CHECK_GRID) -> float:
        """Worst amount by which the certificate dips below the payoff G."""
        points = sorted(set(np.linspace(0.0, 1.0, grid_n).tolist())
                        | set(self.breakpoints()))
        worst = 0.0
        for m in points:
            worst = max(worst, g_dist.cdf(m) - self(m))
        return worst


@dataclass(frozen=True)
class CertificateReport:
    convex_ok: bool
    dominates_ok: bool
    support_contact_ok: bool
    max_violations: dict

    @property
    def ok(self) -> bool:
        return self.convex_ok and self.dominates_ok and self.support_contact_ok


def canonical_price_function(g_dist: Distribution, pair: TangencyPair) -> PriceFunction:
    """Certificate for a tangency pair: G on [0, x], then the tangent at y.

    Requires the tangency residual below 1e-8; convexity and domination are
    validated on the standard grid and failures raise, since they indicate
    either a bad pair or a payoff that is not S-shaped.
    """
    residual = abs(_rho_value(g_dist, pair.x, pair.y))
    if residual > 1e-8:
        raise CertificateError(
            f"tangency residual {residual:.3e} too large for a canonical certificate")
    pieces: list[PricePiece] = []
    if pair.x > 1e-12:
        pieces.append(CurvePiece(0.0, pair.x, g_dist.cdf, label="payoff_cdf"))
    pieces.append(AffinePiece(pair.x, 1.0, g_dist.cdf(pair.x), g_dist.pdf(pair.y)))
    price = PriceFunction(tuple(pieces))
    convex = price.convexity_violation()
    dominate = price.domination_violation(g_dist)
    if convex > CHECK_TOL or dominate > 1e-9:
        raise CertificateError(
            f"canonical certificate failed validation: convexity defect {convex:.3e},"
            f" domination defect {dominate:.3e}")
    contact = abs(price(pair.y) - g_dist.cdf(pair.y))
    if contact > 1e-9:
        raise CertificateError(f"certificate misses the payoff at y: gap {contact:.3e}")
    return price


def point_mass_price_function(g_dist: Distribution, mu: float) -> PriceFunction:
    """Certificate for the uninformative experiment (all mass at mu).

    For mu at or above the payoff mode the tangent at mu, continued back to
    its intersection with G, is the certificate; below the mode the convex
    stretch of G through mu with the tangent at the mode works.
    """
    r0 = g_dist.mode
    if mu >= r0:
        x = solve_x_given_y(g_dist, mu)
        return canonical_price_function(g_dist, TangencyPair(x=x, y=mu))
    return canonical_price_function(g_dist, TangencyPair(x=r0, y=r0))


def _segment_probes(seg: Segment, interior: int = 64) -> list[float]:
    if isinstance(seg, Atom):
        return [seg.location]
    return np.linspace(seg.lo, seg.hi, interior + 2).tolist()


def verify_ic(g_dist: Distribution, exp: Experiment,
              price: PriceFunction) -> CertificateReport:
    """Check the three certificate conditions against an experiment.

    Support contact demands |p − G| <= 1e-8 at every atom and throughout
    every revealed stretch (endpoints plus 64 interior probes). All failures
    are reported, none raised.
    """
    convex = price.convexity_violation()
    dominate = price.domination_violation(g_dist)
    contact = 0.0
    for seg in exp.segments:
        for m in _segment_probes(seg):
            contact = max(contact, abs(price(m) - g_dist.cdf(m)))
    return CertificateReport(
        convex_ok=convex <= CHECK_TOL,
        dominates_ok=dominate <= CHECK_TOL,
        support_contact_ok=contact <= CHECK_TOL,
        max_violations={"convexity": convex, "domination": dominate, "contact": contact},
    )


def implementing_restriction(prior: Distribution, dc: DoubleCensorship) -> Experiment:
    """The coarse restriction whose best reply is the given censorship.

    Pools [s, t] to x and reveals everything else; the censorship experiment
    itself is a garbling (mean-preserving contraction) of it, which is
    asserted here.
    """
    segments: list[Segment] = []
    if dc.s > 0.0:
        segments.append(FollowsPrior(0.0, dc.s))
    segments.append(Atom(dc.x, prior.cdf(dc.t) - prior.cdf(dc.s)))
    if dc.t < 1.0:
        segments.append(FollowsPrior(dc.t, 1.0))
    restriction = Experiment.from_segments(prior, segments)
    full = censorship_experiment(prior, dc)
    if not is_mpc(full, restriction):
        raise CertificateError(
            "censorship experiment is not a contraction of its implementing restriction")
    return restriction


@dataclass(frozen=True)
class SampledFunction:
    """Function known on a grid; evaluation interpolates linearly."""

    grid: np.ndarray
    values: np.ndarray

    def __call__(self, m: float) -> float:
        return float(np.interp(m, self.grid, self.values))


def virtual_value(g_dist: Distribution, u_designer: Callable[[float], float],
                  exp: Experiment, p_star: PriceFunction, epsilon: float = 1e-3,
                  *, grid: np.ndarray | None = None) -> SampledFunction:
    """Synthetic provider payoff under which ``exp`` is the persuasion optimum.

    Builds the designer envelope p_F (the designer payoff outside pooling
    intervals, its chord across each one) and discounts it by epsilon times
    the certificate slack p* − G. By construction the result never exceeds
    p_F and meets it exactly on the support of the experiment.
    """
    if epsilon <= 0.0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    report = verify_ic(g_dist, exp, p_star)
    if not report.ok:
        raise CertificateError(
            f"certificate does not certify the experiment: {report.max_violations}")
    dc = as_double_censorship(exp)
    if dc is None:
        raise DomainError("virtual values are built from censorship experiments")
    pooling: list[tuple[float, float]] = []
    if dc.t > dc.s:
        pooling.append((dc.s, dc.t))
    if dc.t < 1.0:
        pooling.append((dc.t, 1.0))

    def envelope(m: float) -> float:
        for lo, hi in pooling:
            if lo <= m <= hi and hi > lo:
                w = (m - lo) / (hi - lo)
                return (1.0 - w) * u_designer(lo) + w * u_designer(hi)
        return u_designer(m)

    if grid is None:
        grid = np.linspace(0.0, 1.0, 2049)
    grid = np.asarray(grid, dtype=float)
    env = np.array([envelope(float(m)) for m in grid])
    # chords of a non-convex designer payoff could undercut the envelope shape
    second = np.diff(env, 2)
    if len(second) and float(second.min()) < -1e-8:
        raise CertificateError("designer envelope is not convex; payoff must be convex")
    slack = np.array([p_star(float(m)) - g_dist.cdf(float(m)) for m in grid])
    if float(slack.min()) < -1e-9:
        raise CertificateError("certificate slack is negative somewhere")
    values = env - epsilon * np.maximum(slack, 0.0)
    # equality with the envelope on the support is exactly zero certificate
    # slack there; checked on the functions, not their grid samples
    for seg in exp.segments:
        for m in _segment_probes(seg, interior=8):
            gap = epsilon * max(p_star(m) - g_dist.cdf(m), 0.0)
            if gap > epsilon * CHECK_TOL:
                raise CertificateError(
                    f"virtual value separates from the envelope on the support at {m:.6g}")
    return SampledFunction(grid=grid, values=values)


def certificate_curve(g_dist: Distribution, price: PriceFunction,
                      points: int = 513) -> np.ndarray:
    """Rows (m, G(m), p(m)) for plotting."""
    grid = sorted(set(np.linspace(0.0, 1.0, points).tolist()) | set(price.breakpoints()))
    return np.array([[m, g_dist.cdf(m), price(m)] for m in grid])


def restriction_integral_gap(g_dist: Distribution, price: PriceFunction,
                             exp: Experiment, restriction: Experiment) -> float:
    """|∫ p dF − ∫ p d(restriction)|, the transfer-neutrality part of optimality."""
    return abs(expected_payoff(exp, price) - expected_payoff(restriction, price))
