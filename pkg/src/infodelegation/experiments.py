"""Experiments as distributions of posterior means.

An experiment is stored as ordered segments over [0, 1]: point masses
(``Atom``) and stretches where the posterior-mean law coincides with the
prior (``FollowsPrior``). Every experiment here is a mean-preserving
contraction of its reference prior; that is enforced at construction via the
integrated-CDF sandwich max(0, m − μ) <= I_F(m) <= I_H(m).

The integrated CDF I_F(m) = ∫_0^m F is the workhorse: it is convex,
1-Lipschitz, and the pointwise order of integrated CDFs (with equal means)
is exactly the mean-preserving-contraction order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .distributions import (
    Distribution,
    conditional_mean,
    distribution_from_config,
    inverse_upper_conditional_mean,
)
from .errors import DomainError, InvalidExperimentError, NumericsError
from .numerics import adaptive_simpson

MASS_TOL = 1e-10
MEAN_TOL = 1e-10
MPC_TOL = 1e-9
_ZERO_MASS = 1e-14
_MPC_GRID = 1024


@dataclass(frozen=True)
class Atom:
    """Point mass at ``location``."""

    location: float
    mass: float


@dataclass(frozen=True)
class FollowsPrior:
    """On [lo, hi] the experiment reveals the state: F = H there."""

    lo: float
    hi: float


Segment = Union[Atom, FollowsPrior]


def _span(seg: Segment) -> tuple[float, float]:
    if isinstance(seg, Atom):
        return seg.location, seg.location
    return seg.lo, seg.hi


@dataclass(frozen=True)
class Experiment:
    """Canonical segment form of a posterior-mean distribution.

    Canonical means: segments sorted by position, atoms at identical
    locations merged, zero-mass atoms and empty intervals dropped. Equality
    of canonical forms is therefore meaningful.
    """

    prior: Distribution
    segments: tuple[Segment, ...]

    @staticmethod
    def from_segments(prior: Distribution, segments: Sequence[Segment], *,
                      validate: bool = True) -> "Experiment":
        cleaned: list[Segment] = []
        for seg in segments:
            if isinstance(seg, Atom):
                if not (0.0 <= seg.location <= 1.0):
                    raise InvalidExperimentError(f"atom location {seg.location} outside [0, 1]")
                if seg.mass < -_ZERO_MASS:
                    raise InvalidExperimentError(f"negative atom mass {seg.mass}")
                if seg.mass > _ZERO_MASS:
                    cleaned.append(Atom(float(seg.location), float(seg.mass)))
            elif isinstance(seg, FollowsPrior):
                if not (0.0 <= seg.lo <= seg.hi <= 1.0):
                    raise InvalidExperimentError(f"interval [{seg.lo}, {seg.hi}] invalid")
                if seg.hi > seg.lo:
                    cleaned.append(FollowsPrior(float(seg.lo), float(seg.hi)))
            else:
                raise InvalidExperimentError(f"unknown segment type {type(seg).__name__}")
        cleaned.sort(key=_span)
        merged: list[Segment] = []
        for seg in cleaned:
            if (merged and isinstance(seg, Atom) and isinstance(merged[-1], Atom)
                    and merged[-1].location == seg.location):
                merged[-1] = Atom(seg.location, merged[-1].mass + seg.mass)
            else:
                merged.append(seg)
        exp = Experiment(prior=prior, segments=tuple(merged))
        if validate:
            exp._check_invariants()
        return exp

    def _check_invariants(self) -> None:
        last_end = -1e-12
        for seg in self.segments:
            lo, hi = _span(seg)
            if lo < last_end - 1e-12:
                raise InvalidExperimentError(
                    f"segments overlap near {lo:.12g} (previous end {last_end:.12g})")
            last_end = max(last_end, hi)
        mass = self.total_mass()
        if abs(mass - 1.0) > MASS_TOL:
            raise InvalidExperimentError(f"total mass {mass!r} differs from 1")
        mean = self.mean()
        if abs(mean - self.prior.mean) > MEAN_TOL:
            raise InvalidExperimentError(
                f"mean {mean!r} differs from prior mean {self.prior.mean!r}")
        mu = self.prior.mean
        for m in np.linspace(0.0, 1.0, 257):
            m = float(m)
            val = self.icdf(m)
            if val < max(0.0, m - mu) - 1e-9 or val > self.prior.integrated_cdf(m) + 1e-9:
                raise InvalidExperimentError(
                    f"integrated CDF escapes the contraction envelope at m={m:.6g}")

    def total_mass(self) -> float:
        total = 0.0
        for seg in self.segments:
            if isinstance(seg, Atom):
                total += seg.mass
            else:
                total += self.prior.cdf(seg.hi) - self.prior.cdf(seg.lo)
        return total

    def mean(self) -> float:
        total = 0.0
        for seg in self.segments:
            if isinstance(seg, Atom):
                total += seg.location * seg.mass
            else:
                total += self.prior.partial_expectation(seg.lo, seg.hi)
        return total

    def cdf(self, m: float) -> float:
        value = 0.0
        for seg in self.segments:
            if isinstance(seg, Atom):
                if seg.location <= m:
                    value += seg.mass
            elif m >= seg.lo:
                value += self.prior.cdf(min(m, seg.hi)) - self.prior.cdf(seg.lo)
        return value

    def icdf(self, m: float) -> float:
        """Exact ∫_0^m F; atoms contribute kinked-linear terms, no quadrature."""
        if not (0.0 <= m <= 1.0 + 1e-12):
            raise DomainError(f"icdf argument {m} outside [0, 1]")
        prior = self.prior
        value = 0.0
        for seg in self.segments:
            if isinstance(seg, Atom):
                if m > seg.location:
                    value += seg.mass * (m - seg.location)
            else:
                a, b = seg.lo, seg.hi
                if m <= a:
                    continue
                Ha = prior.cdf(a)
                if m <= b:
                    value += prior.integrated_cdf(m) - prior.integrated_cdf(a) - Ha * (m - a)
                else:
                    value += (prior.integrated_cdf(b) - prior.integrated_cdf(a)
                              - Ha * (b - a)
                              + (prior.cdf(b) - Ha) * (m - b))
        return value

    def breakpoints(self) -> tuple[float, ...]:
        points = {0.0, 1.0}
        for seg in self.segments:
            lo, hi = _span(seg)
            points.add(lo)
            points.add(hi)
        return tuple(sorted(points))

    def atoms(self) -> tuple[Atom, ...]:
        return tuple(s for s in self.segments if isinstance(s, Atom))

    def intervals(self) -> tuple[FollowsPrior, ...]:
        return tuple(s for s in self.segments if isinstance(s, FollowsPrior))


def full_revelation(prior: Distribution) -> Experiment:
    return Experiment.from_segments(prior, [FollowsPrior(0.0, 1.0)])


def point_mass(prior: Distribution) -> Experiment:
    """The uninformative experiment: all mass at the prior mean."""
    return Experiment.from_segments(prior, [Atom(prior.mean, 1.0)])


@dataclass(frozen=True)
class DoubleCensorship:
    """Parameters (s, t, x, y): reveal below s, pool [s, t] to x, pool [t, 1] to y.

    Consistency requires x and y to be the prior conditional means of their
    pooling intervals; ``validate`` checks that to 1e-9.
    """

    s: float
    t: float
    x: float
    y: float

    def __post_init__(self):
        if not (-1e-12 <= self.s <= self.x + 1e-9 and self.x <= self.t + 1e-9
                and self.t <= self.y + 1e-9 and self.y <= 1.0 + 1e-12):
            raise DomainError(
                f"censorship parameters out of order: s={self.s}, x={self.x},"
                f" t={self.t}, y={self.y}")

    def validate(self, prior: Distribution, tol: float = 1e-9) -> None:
        x_ref = conditional_mean(prior, self.s, self.t)
        y_ref = conditional_mean(prior, self.t, 1.0)
        if abs(x_ref - self.x) > tol or abs(y_ref - self.y) > tol:
            raise DomainError(
                f"atoms ({self.x:.12g}, {self.y:.12g}) are not the conditional means"
                f" ({x_ref:.12g}, {y_ref:.12g})")


def make_double_censorship(prior: Distribution, s: float,
                           t: float) -> tuple[DoubleCensorship, Experiment]:
    """Censor [s, t] to its conditional mean and [t, 1] to its conditional mean.

    s = t degenerates to upper censorship (the intermediate atom has zero
    mass and is dropped); s = t = 1 degenerates to full revelation.
    """
    if not (0.0 <= s <= t <= 1.0):
        raise DomainError(f"need 0 <= s <= t <= 1, got s={s}, t={t}")
    x = conditional_mean(prior, s, t)
    y = conditional_mean(prior, t, 1.0)
    segments: list[Segment] = []
    if s > 0.0:
        segments.append(FollowsPrior(0.0, s))
    segments.append(Atom(x, prior.cdf(t) - prior.cdf(s)))
    segments.append(Atom(y, 1.0 - prior.cdf(t)))
    dc = DoubleCensorship(s=s, t=t, x=x, y=y)
    return dc, Experiment.from_segments(prior, segments)


def upper_censorship(prior: Distribution, x: float) -> Experiment:
    """Reveal below x, pool [x, 1] to its conditional mean."""
    return make_double_censorship(prior, x, x)[1]


def censorship_experiment(prior: Distribution, dc: DoubleCensorship) -> Experiment:
    """Experiment with the exact atoms stored in ``dc`` (validated against prior)."""
    dc.validate(prior)
    segments: list[Segment] = []
    if dc.s > 0.0:
        segments.append(FollowsPrior(0.0, dc.s))
    segments.append(Atom(dc.x, prior.cdf(dc.t) - prior.cdf(dc.s)))
    segments.append(Atom(dc.y, 1.0 - prior.cdf(dc.t)))
    return Experiment.from_segments(prior, segments)


def _same_prior(f: Experiment, fbar: Experiment) -> bool:
    return f.prior is fbar.prior or f.prior.config() == fbar.prior.config()


def is_mpc(f: Experiment, fbar: Experiment, tol: float = MPC_TOL) -> bool:
    """True iff f is a mean-preserving contraction of fbar.

    Checked as I_f <= I_fbar + tol on the union of both segment breakpoint
    sets and a uniform grid; with piecewise structure any violation shows up
    at or between breakpoints at this resolution.
    """
    if not _same_prior(f, fbar):
        raise DomainError("experiments compare only over the same reference prior")
    if abs(f.mean() - fbar.mean()) > tol:
        return False
    points = sorted(set(f.breakpoints()) | set(fbar.breakpoints())
                    | set(np.linspace(0.0, 1.0, _MPC_GRID).tolist()))
    return all(f.icdf(m) <= fbar.icdf(m) + tol for m in points)


def expected_payoff(exp: Experiment, u: Callable[[float], float]) -> float:
    """``∫ u dF``: atoms exactly, revealed stretches by quadrature of u·h."""
    prior = exp.prior
    total = 0.0
    for seg in exp.segments:
        if isinstance(seg, Atom):
            total += u(seg.location) * seg.mass
        else:
            total += adaptive_simpson(lambda w: u(w) * prior.pdf(w), seg.lo, seg.hi)
    return total


def as_double_censorship(exp: Experiment, tol: float = 1e-8) -> DoubleCensorship | None:
    """Recognize the canonical segment layout of a double censorship.

    Accepted layouts: [reveal(0,s)?, atom(x), atom(y)] and the degenerate
    forms with s = t (upper censorship; the zero-mass intermediate atom was
    canonically dropped) and full revelation ([reveal(0,1)], read as
    s = t = 1). Returns None for anything else.
    """
    prior = exp.prior
    segs = exp.segments
    intervals = exp.intervals()
    atoms = exp.atoms()
    if len(intervals) > 1 or len(atoms) > 2 or len(atoms) + len(intervals) == 0:
        return None
    if intervals:
        iv = intervals[0]
        if iv.lo > tol:
            return None
        if segs[0] is not iv:
            return None
        s = iv.hi
    else:
        s = 0.0
    if not atoms:
        # pure revelation: s = t = 1, both atoms degenerate
        if intervals and abs(intervals[0].hi - 1.0) <= tol:
            return DoubleCensorship(s=1.0, t=1.0, x=1.0, y=1.0)
        return None
    if len(atoms) == 1:
        # upper censorship with threshold s (or the uninformative experiment)
        y = atoms[0].location
        t = s
        x = s
        if abs(conditional_mean(prior, t, 1.0) - y) > tol:
            return None
        if abs(atoms[0].mass - (1.0 - prior.cdf(t))) > tol:
            return None
        return DoubleCensorship(s=s, t=t, x=x, y=y)
    lowx, topy = atoms
    if lowx.location > topy.location:
        return None
    y = topy.location
    try:
        t = inverse_upper_conditional_mean(prior, y)
    except (DomainError, NumericsError):
        return None
    if abs(topy.mass - (1.0 - prior.cdf(t))) > tol:
        return None
    if abs(lowx.mass - (prior.cdf(t) - prior.cdf(s))) > tol:
        return None
    if abs(conditional_mean(prior, s, t) - lowx.location) > tol:
        return None
    return DoubleCensorship(s=s, t=t, x=lowx.location, y=y)


# ---------------------------------------------------------------------------
# serialization and sampling
# ---------------------------------------------------------------------------

def experiment_to_record(exp: Experiment) -> dict:
    segments = []
    for seg in exp.segments:
        if isinstance(seg, Atom):
            segments.append({"type": "atom", "location": seg.location, "mass": seg.mass})
        else:
            segments.append({"type": "follows_prior", "lo": seg.lo, "hi": seg.hi})
    return {"segments": segments, "prior": exp.prior.config()}


def experiment_from_record(record: dict) -> Experiment:
    prior = distribution_from_config(record["prior"])
    segments: list[Segment] = []
    for seg in record["segments"]:
        if seg["type"] == "atom":
            segments.append(Atom(seg["location"], seg["mass"]))
        elif seg["type"] == "follows_prior":
            segments.append(FollowsPrior(seg["lo"], seg["hi"]))
        else:
            raise InvalidExperimentError(f"unknown segment type {seg['type']!r}")
    return Experiment.from_segments(prior, segments)


def experiment_to_json(exp: Experiment) -> str:
    return json.dumps(experiment_to_record(exp), sort_keys=True)


def sample_curve(exp: Experiment, points: int = 513) -> np.ndarray:
    """Rows (m, F(m), I_F(m)) on a uniform grid merged with all breakpoints."""
    grid = sorted(set(np.linspace(0.0, 1.0, points).tolist()) | set(exp.breakpoints()))
    return np.array([[m, exp.cdf(m), exp.icdf(m)] for m in grid])
