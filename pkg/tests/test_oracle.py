import numpy as np
import pytest
from scipy.optimize import linprog

import infodelegation as d
from infodelegation.oracle import _max_transport_lp


def scipy_reference(grid, restriction, payoff, pin_payoff=None, pin_value=None):
    """Independent LP oracle built on scipy's HiGHS solver."""
    n = len(grid)
    support = np.flatnonzero(restriction > 0)
    n_s = len(support)
    nv = n_s * n
    rows, rhs = [], []
    for r in range(n_s):
        row = np.zeros(nv)
        row[r * n:(r + 1) * n] = 1.0
        rows.append(row)
        rhs.append(restriction[support][r])
    for j in range(n):
        row = np.zeros(nv)
        for r in range(n_s):
            row[r * n + j] = grid[support][r] - grid[j]
        if np.any(row != 0):
            rows.append(row)
            rhs.append(0.0)
    if pin_value is not None:
        row = np.tile(pin_payoff, n_s)
        rows.append(row)
        rhs.append(pin_value)
    res = linprog(-np.tile(payoff, n_s), A_eq=np.array(rows), b_eq=np.array(rhs),
                  bounds=(0, None), method="highs")
    assert res.status == 0, res.message
    return -res.fun


def test_instance_invariants(uniform, beta22):
    for n in (51, 101, 201):
        inst = d.make_instance(uniform, beta22.cdf, n)
        assert inst.prior_mass.sum() == pytest.approx(1.0, abs=1e-12)
        assert inst.prior_mass.min() >= 0.0
        assert abs(inst.mean - uniform.mean) <= inst.step


def test_instance_mean_nonuniform(squared_prior, beta22):
    inst = d.make_instance(squared_prior, beta22.cdf, 101)
    assert abs(inst.mean - squared_prior.mean) <= inst.step


def test_discretize_experiment_preserves_mass_and_mean(uniform, family, instance101):
    for y in (family.y_min, 0.65, family.y_max):
        _, exp = d.mic_from_top_atom(family, float(y))
        mass = d.discretize_experiment(exp, instance101)
        assert mass.sum() == pytest.approx(1.0, abs=1e-10)
        assert float(instance101.grid @ mass) == pytest.approx(exp.mean(), abs=1e-10)
        assert mass.min() >= 0.0


def test_simplex_matches_scipy_random():
    rng = np.random.default_rng(0)
    grid = np.linspace(0.0, 1.0, 9)
    for trial in range(15):
        mass = rng.random(9)
        if trial % 3 == 0:
            mass[rng.integers(0, 9, size=3)] = 0.0  # sparse support
        if mass.sum() == 0:
            continue
        mass /= mass.sum()
        payoff = rng.random(9)
        q, value, _ = _max_transport_lp(grid, mass, payoff)
        assert value == pytest.approx(
            scipy_reference(grid, mass, payoff), abs=1e-8)
        assert np.abs(q.sum(axis=1) - mass).max() < 1e-9


def test_simplex_single_state_restriction():
    grid = np.linspace(0.0, 1.0, 11)
    mass = np.zeros(11)
    mass[4] = 1.0
    payoff = np.linspace(0.0, 1.0, 11) ** 2
    q, value, _ = _max_transport_lp(grid, mass, payoff)
    assert value == pytest.approx(payoff[4], abs=1e-12)
    assert q[4, 4] == pytest.approx(1.0, abs=1e-12)


def test_simplex_pinned_stage_matches_scipy():
    rng = np.random.default_rng(4)
    grid = np.linspace(0.0, 1.0, 9)
    for _ in range(6):
        mass = rng.random(9)
        mass /= mass.sum()
        payoff = rng.random(9)
        designer = rng.random(9)
        _, v1, basis = _max_transport_lp(grid, mass, payoff)
        q2, _, _ = _max_transport_lp(grid, mass, designer,
                                     pin_payoff=payoff, pin_value=v1,
                                     warm_basic=basis)
        designer_value = designer @ q2.sum(axis=0)
        reference = scipy_reference(grid, mass, designer,
                                    pin_payoff=payoff, pin_value=v1)
        assert designer_value == pytest.approx(reference, abs=1e-7)
        assert payoff @ q2.sum(axis=0) == pytest.approx(v1, abs=1e-8)


def test_lp_point_mass_restriction(instance101, uniform, beta22):
    delta = d.discretize_experiment(d.point_mass(uniform), instance101)
    plan, result, value = d.lp_best_reply(instance101, delta)
    assert value == pytest.approx(beta22.cdf(0.5), abs=1e-10)
    assert result.support().tolist() == [50]


def test_lp_best_reply_to_prior(instance101, uniform, beta22):
    plan, result, value = d.lp_best_reply(instance101, instance101.prior_mass)
    assert value == pytest.approx(539 / 1024, abs=0.01)
    plan.validate(instance101.grid, instance101.prior_mass)
    # structure: revealed low states plus one pooled atom near 5/8
    report = d.bipooling_structure(result, instance101)
    assert len(report.intervals) == 1
    assert report.max_atoms_per_interval == 1
    assert report.atom_clusters_above(beta22.mode) == 1


def test_lp_best_reply_to_implementing_restriction(instance101, uniform, beta22, family):
    dc, exp = d.mic_from_top_atom(family, family.y_max)
    restriction = d.implementing_restriction(uniform, dc)
    restriction_mass = d.discretize_experiment(restriction, instance101)
    _, result, value = d.lp_best_reply(instance101, restriction_mass)
    analytic = d.expected_payoff(exp, beta22.cdf)  # 14/27 at the optimum
    assert analytic == pytest.approx(14 / 27, abs=1e-6)
    assert value == pytest.approx(analytic, abs=0.01)
    # posteriors concentrate at grid neighbors of the censorship atoms
    support = result.support(tol=1e-6)
    locations = instance101.grid[support]
    near_x = np.abs(locations - dc.x) <= 2 * instance101.step
    near_y = np.abs(locations - dc.y) <= 2 * instance101.step
    assert np.all(near_x | near_y)


def test_restriction_mean_mismatch_rejected(instance101):
    bad = np.zeros(instance101.n)
    bad[-1] = 1.0  # point mass at 1: mean far from 1/2
    with pytest.raises(d.DomainError):
        d.lp_best_reply(instance101, bad)


def test_ic_checks(instance101, uniform, family):
    star_mass = d.discretize_experiment(
        d.upper_censorship(uniform, family.full_delegation.x), instance101)
    assert d.ic_check_discrete(instance101, star_mass).is_ic
    delta_mass = d.discretize_experiment(d.point_mass(uniform), instance101)
    assert d.ic_check_discrete(instance101, delta_mass).is_ic


def test_full_revelation_refuted_at_calibrated_grid(uniform, beta22):
    # the 5/n tolerance is calibrated so the 0.026 full-revelation gap is
    # refuted at n = 201 (5/201 ≈ 0.0249) but not at coarser grids
    inst = d.make_instance(uniform, beta22.cdf, 201)
    frev = d.ic_check_discrete(inst, inst.prior_mass)
    assert not frev.is_ic
    assert frev.improvement == pytest.approx(539 / 1024 - 0.5, abs=0.01)
    assert frev.improvement >= 0.02


def test_ic_across_family(instance101, family):
    for y in np.linspace(family.y_min, family.y_max, 5):
        mass = d.discretize_experiment(
            d.mic_from_top_atom(family, float(y))[1], instance101)
        check = d.ic_check_discrete(instance101, mass)
        assert check.is_ic, (float(y), check.improvement)


def test_value_sandwich(instance101, family, beta22):
    # LP optimum dominates every discretized censorship payoff and exceeds
    # the analytic optimum by at most grid error
    _, _, lp_value = d.lp_best_reply(instance101, instance101.prior_mass)
    best_disc = -np.inf
    for y in np.linspace(family.y_min, family.y_max, 7):
        mass = d.discretize_experiment(
            d.mic_from_top_atom(family, float(y))[1], instance101)
        best_disc = max(best_disc, float(instance101.payoff @ mass))
    assert lp_value >= best_disc - 1e-9
    assert lp_value <= 539 / 1024 + 5.0 / instance101.n


def test_monotone_refinement(uniform, beta22):
    values = {}
    for n in (51, 101):
        inst = d.make_instance(uniform, beta22.cdf, n)
        _, _, values[n] = d.lp_best_reply(inst, inst.prior_mass)
    assert abs(values[101] - values[51]) <= 5.0 / 51


def test_bipooling_structures(instance101, uniform, family):
    # discretized optimal censorship: two pooling intervals, one atom each
    _, exp = d.mic_from_top_atom(family, family.y_max)
    mass = d.discretize_experiment(exp, instance101)
    report = d.bipooling_structure(mass, instance101)
    assert len(report.intervals) == 2
    assert all(iv.n_atoms == 1 for iv in report.intervals)
    assert not report.flagged
    assert report.atom_clusters_above(0.5) == 1
    # full revelation: no pooling anywhere
    frev = d.bipooling_structure(instance101.prior_mass, instance101)
    assert len(frev.intervals) == 0


def test_transport_plan_invariants(instance101, uniform, family):
    dc, _ = d.mic_from_top_atom(family, 0.65)
    restriction = d.discretize_experiment(
        d.implementing_restriction(uniform, dc), instance101)
    plan, result, _ = d.lp_best_reply(instance101, restriction)
    plan.validate(instance101.grid, restriction)
    assert result.mass.sum() == pytest.approx(1.0, abs=1e-9)


def test_designer_tie_break(uniform, beta22):
    # step payoff leaves the provider indifferent below the step; the
    # second-stage designer LP must reveal those states
    n = 101
    r0 = 0.7
    inst = d.make_instance(uniform, d.step_payoff(r0), n)
    designer = np.array([beta22.integrated_cdf(float(v)) for v in inst.grid])
    _, plain, v1 = d.lp_best_reply(inst, inst.prior_mass)
    _, broken, v2 = d.lp_best_reply(inst, inst.prior_mass, designer_payoff=designer)
    assert v2 == pytest.approx(v1, abs=1e-8)
    assert designer @ broken.mass >= designer @ plain.mass - 1e-9
    # with ties broken for the designer, low states are fully revealed
    low = inst.grid < 0.35
    assert np.abs(broken.mass[low] - inst.prior_mass[low]).max() < 1e-8


def test_scenario_uninformed_dm_bounds(uniform):
    inst_low = d.make_instance(uniform, d.step_payoff(0.7), 101)
    rep = d.scenario_uninformed_dm(inst_low, 0.7)
    assert rep.bound_ok
    assert rep.max_support <= 0.7 + inst_low.step + 1e-12
    assert rep.value == pytest.approx(0.6, abs=0.02)
    inst_high = d.make_instance(uniform, d.step_payoff(0.4), 101)
    rep2 = d.scenario_uninformed_dm(inst_high, 0.4)
    assert rep2.bound_ok
    assert rep2.value == pytest.approx(1.0, abs=1e-9)
    inst_zero = d.make_instance(uniform, d.step_payoff(0.0), 101)
    rep3 = d.scenario_uninformed_dm(inst_zero, 0.0)
    assert rep3.value == pytest.approx(1.0, abs=1e-9)


def test_scenario_m_shaped(uniform):
    rep = d.scenario_m_shaped(uniform, 101)
    assert rep.bound_ok
    assert rep.support_count == 2
    assert rep.details["pooling_intervals"] == 1
    assert rep.details["max_atoms_per_interval"] == 2
    # value equals the touching line at the prior mean: peaks (0.3, 0.75),
    # pinch 2 normalize to (m + 0.10125) / 1.04 on the line
    assert rep.value == pytest.approx((0.5 + 0.10125) / 1.04, abs=1e-9)


def test_m_shaped_payoff_validation():
    with pytest.raises(d.ConfigError):
        d.m_shaped_payoff(peaks=(0.75, 0.3))
    with pytest.raises(d.ConfigError):
        d.m_shaped_payoff(pinch=50.0)  # not increasing
    u = d.m_shaped_payoff()
    assert u(0.0) == pytest.approx(0.0, abs=1e-12)
    assert u(1.0) == pytest.approx(1.0, abs=1e-12)


def test_discrete_icdf_matches_analytic(instance101, uniform, family):
    _, exp = d.mic_from_top_atom(family, 0.65)
    mass = d.discretize_experiment(exp, instance101)
    icdf = d.discrete_icdf(instance101.grid, mass)
    for k in range(0, instance101.n, 10):
        assert icdf[k] == pytest.approx(
            exp.icdf(float(instance101.grid[k])), abs=2e-4)
