"""Brute-force cross-check: discretized persuasion as a transport LP.

States and posterior labels share one uniform grid. A feasible garbling of a
restriction is a nonnegative matrix q where row i spreads the restriction
mass of state i over posterior labels, subject to one martingale constraint
per label: the mass a label receives must average to that label. The
provider's best reply maximizes the label-weighted payoff over such plans;
a candidate restriction is self-enforcing when best-replying to it gains
nothing beyond grid error.

The LP is solved by a dense revised simplex written here: the constraint
matrix has two (or three, with a value-pinning row) nonzeros per column, so
pricing vectorizes over the full variable grid while the basis inverse is
maintained by product-form updates. Largest-coefficient pricing with
smallest-index tie-breaking keeps runs deterministic; the rule switches to
smallest-index (anti-cycling) selection if the objective stalls.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .distributions import Distribution
from .errors import ConfigError, DomainError, NumericsError
from .experiments import Atom, Experiment

IC_TOL_SCALE = 5.0  # self-enforcement tolerance is IC_TOL_SCALE / n
_SUPPORT_TOL = 1e-9
_RESIDUAL_TOL = 1e-8
_PIVOT_EPS = 1e-9
_REFACTOR_EVERY = 256


@dataclass(frozen=True, eq=False)
class DiscreteInstance:
    """Uniform grid, prior mass by CDF differences between cell midpoints."""

    grid: np.ndarray
    prior_mass: np.ndarray
    payoff: np.ndarray

    @property
    def n(self) -> int:
        return len(self.grid)

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def mean(self) -> float:
        return float(self.grid @ self.prior_mass)

    def validate(self) -> None:
        if abs(float(self.prior_mass.sum()) - 1.0) > 1e-12:
            raise ConfigError("grid prior mass does not sum to one")
        if float(self.prior_mass.min()) < 0.0:
            raise ConfigError("grid prior mass has negative entries")
        if abs(self.mean - 0.0) > 1.0:
            raise ConfigError("grid mean escaped [0, 1]")


def make_instance(prior: Distribution, payoff: Callable[[float], float] | Sequence[float],
                  n: int) -> DiscreteInstance:
    if n < 3:
        raise ConfigError(f"grid needs at least 3 points, got {n}")
    grid = np.linspace(0.0, 1.0, n)
    mids = 0.5 * (grid[:-1] + grid[1:])
    cuts = np.concatenate(([0.0], [prior.cdf(float(v)) for v in mids], [1.0]))
    mass = np.diff(cuts)
    if callable(payoff):
        pay = np.array([payoff(float(v)) for v in grid])
    else:
        pay = np.asarray(payoff, dtype=float)
        if pay.shape != grid.shape:
            raise ConfigError("payoff vector length must match the grid")
    instance = DiscreteInstance(grid=grid, prior_mass=mass, payoff=pay)
    instance.validate()
    return instance


def discretize_experiment(exp: Experiment, instance: DiscreteInstance) -> np.ndarray:
    """Grid mass vector for an analytic experiment.

    Revealed stretches discretize like the prior (midpoint CDF differences
    restricted to the stretch); atoms split between the two bracketing grid
    points so the mean is preserved exactly.
    """
    grid = instance.grid
    n = instance.n
    step = instance.step
    prior = exp.prior
    mass = np.zeros(n)
    for seg in exp.segments:
        if isinstance(seg, Atom):
            pos = seg.location / step
            k = int(min(max(np.floor(pos), 0), n - 2))
            w_hi = pos - k
            mass[k] += seg.mass * (1.0 - w_hi)
            mass[k + 1] += seg.mass * w_hi
        else:
            for k in range(n):
                cell_lo = max(grid[k] - 0.5 * step, 0.0)
                cell_hi = min(grid[k] + 0.5 * step, 1.0)
                a = max(cell_lo, seg.lo)
                b = min(cell_hi, seg.hi)
                if b > a:
                    mass[k] += prior.cdf(b) - prior.cdf(a)
    return mass


def discrete_icdf(grid: np.ndarray, mass: np.ndarray) -> np.ndarray:
    """Integrated CDF at grid points: I(m) = Σ_j mass_j · max(0, m − m_j)."""
    return np.maximum(grid[:, None] - grid[None, :], 0.0) @ mass


@dataclass(frozen=True, eq=False)
class TransportPlan:
    """q[i, j]: mass of grid state i assigned to posterior label j."""

    q: np.ndarray

    def row_sums(self) -> np.ndarray:
        return self.q.sum(axis=1)

    def posterior_mass(self) -> np.ndarray:
        return self.q.sum(axis=0)

    def validate(self, grid: np.ndarray, restriction_mass: np.ndarray,
                 tol: float = _RESIDUAL_TOL) -> None:
        if float(self.q.min()) < -1e-10:
            raise NumericsError(f"transport plan has negative mass {float(self.q.min()):.3e}")
        row_gap = float(np.abs(self.row_sums() - restriction_mass).max())
        if row_gap > tol:
            raise NumericsError(f"row-sum residual {row_gap:.3e}", residual=row_gap)
        col = self.posterior_mass()
        moment = grid @ self.q  # Σ_i q[i, j]·ω_i per label j
        mart = float(np.abs(moment - grid * col).max())
        if mart > tol:
            raise NumericsError(f"martingale residual {mart:.3e}", residual=mart)


@dataclass(frozen=True, eq=False)
class DiscreteExperiment:
    """Posterior-label distribution induced by a transport plan."""

    grid: np.ndarray
    mass: np.ndarray

    def support(self, tol: float = _SUPPORT_TOL) -> np.ndarray:
        return np.flatnonzero(self.mass > tol)


def _max_transport_lp(grid: np.ndarray, restriction: np.ndarray, objective: np.ndarray,
                      *, pin_payoff: np.ndarray | None = None,
                      pin_value: float | None = None,
                      warm_basic: np.ndarray | None = None, tol: float = 1e-9,
                      max_iter: int = 200_000) -> tuple[np.ndarray, float, np.ndarray]:
    """Maximize Σ objective[j]·(column mass j) over feasible transport plans.

    Returns (full plan, value, basic variable ids). With ``pin_payoff`` /
    ``pin_value`` an extra equality row fixes the pinned payoff at the given
    value (tie-breaking among optima); callers must then also pass
    ``warm_basic``, the optimal basis of the unpinned solve, from which the
    pinned problem starts on its optimal face.
    """
    n = len(grid)
    support = np.flatnonzero(restriction > 0.0)
    n_s = len(support)
    if n_s == 0:
        raise DomainError("restriction carries no mass")
    tau = restriction[support].astype(float)
    w = grid[support]
    c = np.asarray(objective, dtype=float)

    # martingale rows with no nonzero coefficient (single-state restriction at
    # its own label) are dropped to keep the basis nonsingular
    if n_s == 1:
        active = np.flatnonzero(grid != w[0])
    else:
        active = np.arange(n)
    n_m = len(active)
    mrow_of = -np.ones(n, dtype=int)
    mrow_of[active] = np.arange(n_m)

    has_pin = pin_value is not None
    if has_pin and warm_basic is None:
        raise DomainError("pinned solves need the warm basis of the unpinned stage")
    nrows = n_s + n_m + (1 if has_pin else 0)
    pin_row = nrows - 1
    ART = -1

    def column(v: int) -> np.ndarray:
        col = np.zeros(nrows)
        if v == ART:
            col[pin_row] = 1.0
            return col
        r, j = divmod(v, n)
        col[r] = 1.0
        mr = mrow_of[j]
        if mr >= 0:
            col[n_s + mr] = w[r] - grid[j]
        if has_pin:
            col[pin_row] = pin_payoff[j]
        return col

    b = np.zeros(nrows)
    b[:n_s] = tau
    if has_pin:
        b[pin_row] = pin_value

    if warm_basic is not None:
        basic = np.concatenate([warm_basic, [ART]]) if has_pin else warm_basic.copy()
        basic = basic.astype(np.int64)
    else:
        # full revelation of the restriction: diagonal variables carry the
        # mass, one zero-level variable per martingale row completes the basis
        basic = np.empty(nrows, dtype=np.int64)
        for r in range(n_s):
            basic[r] = r * n + support[r]
        for k, j in enumerate(active):
            r_j = 0 if support[0] != j else 1
            basic[n_s + k] = r_j * n + j

    def refactor() -> tuple[np.ndarray, np.ndarray]:
        B = np.column_stack([column(int(v)) for v in basic])
        try:
            inv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:
            raise NumericsError("simplex basis became singular") from exc
        xb = inv @ b
        np.maximum(xb, 0.0, out=xb)
        return inv, xb

    B_inv, x = refactor()
    is_basic = np.zeros(n_s * n, dtype=bool)
    is_basic[basic[basic >= 0]] = True

    def entering_direction(var: int) -> np.ndarray:
        r_e, j_e = divmod(var, n)
        direction = B_inv[:, r_e].copy()
        mr_e = mrow_of[j_e]
        if mr_e >= 0:
            direction += (w[r_e] - grid[j_e]) * B_inv[:, n_s + mr_e]
        if has_pin:
            direction += pin_payoff[j_e] * B_inv[:, pin_row]
        return direction

    def pivot_update(enter: int, leave: int, direction: np.ndarray,
                     theta: float) -> None:
        nonlocal B_inv
        x[:] = x - theta * direction
        x[leave] = theta
        np.maximum(x, 0.0, out=x)
        new_row = B_inv[leave] / direction[leave]
        B_inv -= np.outer(direction, new_row)
        B_inv[leave] = new_row
        leaving_var = int(basic[leave])
        if leaving_var >= 0:
            is_basic[leaving_var] = False
        basic[leave] = enter
        is_basic[enter] = True

    if has_pin:
        # the artificial sits at level zero (the warm basis attains the pinned
        # value exactly); swap it for the variable with the largest pin-row
        # direction component, a degenerate pivot that keeps feasibility and
        # removes the artificial before any big-M machinery is needed.
        # d_pin(v) = B_inv[pin_row] · column(v) for v = (r, j):
        row_pin = B_inv[pin_row]
        rp_m = np.zeros(n)
        rp_m[active] = row_pin[n_s:n_s + n_m]
        d_pin = (row_pin[:n_s][:, None]
                 + (w[:, None] - grid[None, :]) * rp_m[None, :]
                 + row_pin[pin_row] * pin_payoff[None, :])
        d_flat = np.abs(d_pin).ravel()
        d_flat[is_basic] = -np.inf
        swap = int(np.argmax(d_flat))
        if d_flat[swap] > 1e-9:
            pivot_update(swap, pin_row, entering_direction(swap), 0.0)
        # else: the pin row is numerically redundant on this basis; the
        # artificial stays basic at zero (cost 0) and the exit residual check
        # still enforces the pinned value
    bland = False
    best_obj = -np.inf
    last_progress = 0
    iteration = 0
    while True:
        if iteration >= max_iter:
            raise NumericsError(f"simplex pivot limit {max_iter} exceeded")
        cost_basic = np.where(basic == ART, 0.0, c[np.mod(basic, n)])
        ydual = cost_basic @ B_inv
        y_r = ydual[:n_s]
        y_m = np.zeros(n)
        y_m[active] = ydual[n_s:n_s + n_m]
        reduced = c[None, :] - y_r[:, None] - (w[:, None] - grid[None, :]) * y_m[None, :]
        if has_pin:
            reduced -= ydual[pin_row] * pin_payoff[None, :]
        flat = reduced.ravel()
        flat[is_basic] = -np.inf
        if bland:
            candidates = np.flatnonzero(flat > tol)
            if candidates.size == 0:
                break
            enter = int(candidates[0])
        else:
            enter = int(np.argmax(flat))
            if flat[enter] <= tol:
                break
        direction = entering_direction(enter)
        blocking = direction > _PIVOT_EPS
        if not blocking.any():
            raise NumericsError("transport LP reported unbounded; plan mass is bounded,"
                                " so the basis degenerated")
        rows = np.flatnonzero(blocking)
        ratios = x[rows] / direction[rows]
        theta = float(ratios.min())
        ties = rows[ratios <= theta + 1e-12]
        if bland:
            leave = int(ties[np.argmin(basic[ties])])
        else:
            # among tied rows take the largest pivot element: degenerate
            # vertices make ties common and small pivots poison the inverse
            leave = int(ties[np.argmax(direction[ties])])
        pivot_update(enter, leave, direction, theta)
        iteration += 1
        if iteration % _REFACTOR_EVERY == 0:
            B_inv, x = refactor()
        obj = float(np.where(basic == ART, 0.0, c[np.mod(basic, n)]) @ x)
        if obj > best_obj + 1e-12:
            best_obj = obj
            last_progress = iteration
        elif iteration - last_progress > max(200, 4 * nrows):
            bland = True

    B_inv, x = refactor()
    q_small = np.zeros((n_s, n))
    for k, v in enumerate(basic):
        v = int(v)
        if v == ART:
            if x[k] > _RESIDUAL_TOL:
                raise NumericsError(
                    f"tie-breaking stage could not keep the pinned value: slack {x[k]:.3e}")
            continue
        r, j = divmod(v, n)
        q_small[r, j] += x[k]
    q_full = np.zeros((n, n))
    q_full[support, :] = q_small
    value = float(c @ q_small.sum(axis=0))
    return q_full, value, basic


def lp_best_reply(instance: DiscreteInstance, restriction_mass: np.ndarray,
                  payoff: np.ndarray | None = None, *,
                  designer_payoff: np.ndarray | None = None,
                  ) -> tuple[TransportPlan, DiscreteExperiment, float]:
    """Provider's best garbling of a restriction on the grid.

    When ``designer_payoff`` is given, a second LP maximizes it over the
    provider-optimal face (ties break in the designer's favor); the reported
    value is still the provider's optimum.
    """
    pay = instance.payoff if payoff is None else np.asarray(payoff, dtype=float)
    restriction = np.asarray(restriction_mass, dtype=float)
    if restriction.shape != instance.grid.shape:
        raise DomainError("restriction must live on the instance grid")
    if float(restriction.min()) < -1e-12:
        raise DomainError("restriction mass must be nonnegative")
    restriction = np.maximum(restriction, 0.0)
    total = float(restriction.sum())
    if abs(total - 1.0) > 1e-9:
        raise DomainError(f"restriction mass sums to {total!r}, expected 1")
    mean_gap = abs(float(instance.grid @ restriction) - instance.mean)
    if mean_gap > instance.step + 1e-9:
        raise DomainError(
            f"restriction mean differs from the grid prior mean by {mean_gap:.3e},"
            f" more than one grid step {instance.step:.3e}")
    q, value, basis = _max_transport_lp(instance.grid, restriction, pay)
    if designer_payoff is not None:
        q, _, _ = _max_transport_lp(instance.grid, restriction,
                                    np.asarray(designer_payoff, dtype=float),
                                    pin_payoff=pay, pin_value=value,
                                    warm_basic=basis)
    plan = TransportPlan(q=q)
    plan.validate(instance.grid, restriction)
    posterior = DiscreteExperiment(grid=instance.grid, mass=plan.posterior_mass())
    return plan, posterior, float(pay @ posterior.mass)


@dataclass(frozen=True)
class IcCheck:
    is_ic: bool
    improvement: float
    best_reply_value: float
    candidate_value: float
    tolerance: float


def ic_check_discrete(instance: DiscreteInstance,
                      candidate_mass: np.ndarray) -> IcCheck:
    """Self-enforcement test: best-replying to the candidate should not gain.

    The tolerance 5/n absorbs the O(1/n) payoff perturbation of the grid
    while still refuting genuinely garblable candidates.
    """
    candidate = np.asarray(candidate_mass, dtype=float)
    _, _, br_value = lp_best_reply(instance, candidate)
    current = float(instance.payoff @ candidate)
    improvement = max(0.0, br_value - current)
    tolerance = IC_TOL_SCALE / instance.n
    return IcCheck(is_ic=improvement <= tolerance, improvement=improvement,
                   best_reply_value=br_value, candidate_value=current,
                   tolerance=tolerance)


# ---------------------------------------------------------------------------
# structure of solutions
# ---------------------------------------------------------------------------

def _clusters(indices: np.ndarray) -> list[tuple[int, int]]:
    """Group sorted indices into maximal runs of consecutive integers."""
    if len(indices) == 0:
        return []
    runs = []
    start = prev = int(indices[0])
    for k in indices[1:]:
        k = int(k)
        if k == prev + 1:
            prev = k
        else:
            runs.append((start, prev))
            start = prev = k
    runs.append((start, prev))
    return runs


@dataclass(frozen=True, eq=False)
class PoolingInterval:
    lo_index: int
    hi_index: int
    lo: float
    hi: float
    support_indices: tuple[int, ...]
    n_atoms: int


@dataclass(frozen=True, eq=False)
class StructureReport:
    """Pooling intervals of a grid distribution against the grid prior.

    Support points that occupy adjacent grid cells are counted as a single
    atom: an off-grid atom necessarily discretizes to two neighboring cells,
    and two genuinely distinct atoms in a pooling interval are separated at
    any usable grid resolution.
    """

    grid: np.ndarray
    mass: np.ndarray
    intervals: tuple[PoolingInterval, ...]
    max_atoms_per_interval: int
    flagged: bool

    def atom_clusters_above(self, threshold: float,
                            support_tol: float = _SUPPORT_TOL) -> int:
        idx = np.flatnonzero((self.mass > support_tol)
                             & (self.grid > threshold + 1e-12))
        return len(_clusters(idx))


def bipooling_structure(result: DiscreteExperiment | np.ndarray,
                        instance: DiscreteInstance, *,
                        slack_tol: float | None = None,
                        support_tol: float = _SUPPORT_TOL) -> StructureReport:
    """Locate maximal intervals where the result is strictly less informative
    than the prior (integrated-CDF slack above ``2/n**2``) and count the atoms
    inside each; more than two atoms in one interval is flagged.
    """
    mass = result.mass if isinstance(result, DiscreteExperiment) else np.asarray(result)
    n = instance.n
    if slack_tol is None:
        slack_tol = 2.0 / (n * n)
    slack = discrete_icdf(instance.grid, instance.prior_mass) - discrete_icdf(instance.grid, mass)
    below = np.flatnonzero(slack > slack_tol)
    intervals = []
    worst = 0
    for lo_k, hi_k in _clusters(below):
        inside = np.flatnonzero(mass[lo_k:hi_k + 1] > support_tol) + lo_k
        n_atoms = len(_clusters(inside))
        worst = max(worst, n_atoms)
        intervals.append(PoolingInterval(
            lo_index=lo_k, hi_index=hi_k,
            lo=float(instance.grid[lo_k]), hi=float(instance.grid[hi_k]),
            support_indices=tuple(int(i) for i in inside), n_atoms=n_atoms))
    return StructureReport(grid=instance.grid, mass=np.asarray(mass),
                           intervals=tuple(intervals),
                           max_atoms_per_interval=worst, flagged=worst > 2)


# ---------------------------------------------------------------------------
# scenario fixtures beyond the S-shaped baseline
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ScenarioReport:
    name: str
    value: float
    max_support: float
    bound_ok: bool
    support_count: int
    details: dict


def step_payoff(r0: float) -> Callable[[float], float]:
    """Payoff of a provider facing a known outside option: act iff m >= r0."""
    return lambda m: 1.0 if m >= r0 - 1e-12 else 0.0


def scenario_uninformed_dm(instance: DiscreteInstance, r0: float) -> ScenarioReport:
    """Step-payoff scenario: the decision maker has no private information.

    With the grid mean above the step the provider secures action with
    probability one via the uninformative experiment; otherwise every best
    reply is supported at or below the step (up to one grid cell).
    """
    expected = np.array([step_payoff(r0)(float(v)) for v in instance.grid])
    if not np.array_equal(expected, instance.payoff):
        raise DomainError("instance payoff is not the step payoff at the given r0")
    _, result, value = lp_best_reply(instance, instance.prior_mass)
    support = result.support()
    max_support = float(instance.grid[int(support[-1])]) if len(support) else 0.0
    mu = instance.mean
    if mu >= r0:
        bound_ok = abs(value - 1.0) <= 1e-9
    else:
        bound_ok = max_support <= r0 + instance.step + 1e-12
    return ScenarioReport(
        name="uninformed_dm", value=value, max_support=max_support,
        bound_ok=bound_ok, support_count=len(support),
        details={"r0": r0, "mu": mu, "mode": "high_mean" if mu >= r0 else "pooled"})


def m_shaped_payoff(peaks: tuple[float, float] = (0.3, 0.75),
                    pinch: float = 2.0) -> Callable[[float], float]:
    """Increasing payoff that is concave, then convex, then concave.

    m − pinch·(m − p1)²·(m − p2)², rescaled to run from 0 to 1. An affine
    line touches it exactly at the two peaks, so a prior dispersed enough to
    support the binary experiment on the peaks makes that experiment the
    provider's unique best reply.
    """
    p1, p2 = peaks
    if not (0.0 < p1 < p2 < 1.0):
        raise ConfigError(f"peaks must be interior and ordered, got {peaks}")
    if pinch <= 0.0:
        raise ConfigError("pinch must be positive")

    def raw(mm: float) -> float:
        return mm - pinch * (mm - p1) ** 2 * (mm - p2) ** 2

    probe = np.linspace(0.0, 1.0, 4096)
    vals = np.array([raw(float(v)) for v in probe])
    if np.any(np.diff(vals) <= 0.0):
        raise ConfigError("pinch too large: template payoff is not increasing")
    lo, hi = raw(0.0), raw(1.0)

    return lambda mm: (raw(mm) - lo) / (hi - lo)


def scenario_m_shaped(prior: Distribution, n: int,
                      peaks: tuple[float, float] = (0.3, 0.75),
                      pinch: float = 2.0) -> ScenarioReport:
    """Two-peak payoff scenario where the binary experiment on the peaks is feasible."""
    instance = make_instance(prior, m_shaped_payoff(peaks, pinch), n)
    _, result, value = lp_best_reply(instance, instance.prior_mass)
    support = result.support()
    clusters = _clusters(support)
    structure = bipooling_structure(result, instance)
    max_support = float(instance.grid[int(support[-1])]) if len(support) else 0.0
    locations = [float(instance.grid[(a + b) // 2]) for a, b in clusters]
    near_peaks = (len(clusters) == 2
                  and abs(locations[0] - peaks[0]) <= 2 * instance.step
                  and abs(locations[1] - peaks[1]) <= 2 * instance.step)
    return ScenarioReport(
        name="m_shaped", value=value, max_support=max_support,
        bound_ok=near_peaks, support_count=len(clusters),
        details={"peaks": list(peaks), "pinch": pinch,
                 "atom_locations": locations,
                 "pooling_intervals": len(structure.intervals),
                 "max_atoms_per_interval": structure.max_atoms_per_interval})
