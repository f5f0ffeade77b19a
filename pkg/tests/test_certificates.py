import numpy as np
import pytest

import infodelegation as d


def test_canonical_certificate_slopes(beta22, family):
    p = d.canonical_price_function(beta22, family.full_delegation)
    assert p.pieces[-1].slope == pytest.approx(45 / 32, abs=1e-9)  # g(5/8)
    p_opt = d.canonical_price_function(beta22, d.TangencyPair(x=1 / 6, y=2 / 3))
    assert p_opt.pieces[-1].slope == pytest.approx(4 / 3, abs=1e-12)  # g(2/3)


def test_canonical_certificate_touches_at_y(beta22, family):
    pair = family.full_delegation
    p = d.canonical_price_function(beta22, pair)
    assert p(pair.y) == pytest.approx(beta22.cdf(pair.y), abs=1e-9)
    # on the payoff up to x, affine beyond
    assert p(0.1) == pytest.approx(beta22.cdf(0.1), abs=1e-12)


def test_degenerate_pair_certificate(beta22):
    r0 = beta22.mode
    p = d.canonical_price_function(beta22, d.TangencyPair(x=r0, y=r0))
    assert p(r0) == pytest.approx(beta22.cdf(r0), abs=1e-12)
    assert p.domination_violation(beta22) <= 1e-9
    assert p.convexity_violation() <= 1e-8


def test_certificate_rejects_bad_pair(beta22):
    with pytest.raises(d.CertificateError):
        d.canonical_price_function(beta22, d.TangencyPair(x=0.1, y=0.6))


def test_certificate_slack_profile(beta22, family):
    # slack p* - G vanishes exactly on [0, x] and at y, positive elsewhere
    pair = family.full_delegation
    p = d.canonical_price_function(beta22, pair)
    for m in np.linspace(0.0, pair.x, 16):
        assert abs(p(float(m)) - beta22.cdf(float(m))) <= 1e-8
    assert abs(p(pair.y) - beta22.cdf(pair.y)) <= 1e-8
    # frozen interior value: slack at 0.5 is 65/128 - 64/128 = 1/128
    assert p(0.5) - beta22.cdf(0.5) == pytest.approx(1 / 128, abs=1e-9)
    for m in (0.3, 0.45, 0.55, 0.8, 0.95):
        if abs(m - pair.y) > 1e-3:
            assert p(m) - beta22.cdf(m) > 1e-6


def test_verify_ic_family_and_counterexamples(beta22, family, uniform):
    pair = family.full_delegation
    p = d.canonical_price_function(beta22, pair)
    star = d.upper_censorship(uniform, pair.x)
    assert d.verify_ic(beta22, star, p).ok
    # the uninformative experiment with its own certificate
    pm = d.point_mass_price_function(beta22, uniform.mean)
    assert d.verify_ic(beta22, d.point_mass(uniform), pm).ok
    # full revelation cannot contact any convex certificate on all of [r0, 1]
    rep = d.verify_ic(beta22, d.full_revelation(uniform), p)
    assert not rep.support_contact_ok
    assert rep.convex_ok and rep.dominates_ok
    # grid search over the whole canonical family: contact always fails
    for y in np.linspace(0.51, 0.74, 12):
        cand = d.canonical_price_function(
            beta22, d.TangencyPair(x=d.solve_x_given_y(beta22, float(y)), y=float(y)))
        assert not d.verify_ic(beta22, d.full_revelation(uniform), cand).support_contact_ok


def test_point_mass_certificate_low_mean(beta22):
    # prior mean below the payoff mode: convex stretch of G plus the tangent
    prior = d.BetaDistribution(1, 2)  # mean 1/3 < r0 = 1/2
    p = d.point_mass_price_function(beta22, prior.mean)
    assert d.verify_ic(beta22, d.point_mass(prior), p).ok


def test_implementing_restriction_optimal(uniform, family):
    dc, exp = d.mic_from_top_atom(family, 2 / 3)
    restriction = d.implementing_restriction(uniform, dc)
    atoms = restriction.atoms()
    # pool [0, 1/3] to 1/6, reveal the rest (the bisected range endpoint sits
    # within 1e-8 of 2/3, so a sliver of [0, s] revelation may survive)
    intervals = [iv for iv in restriction.intervals() if iv.hi - iv.lo > 1e-6]
    assert len(atoms) == 1 and atoms[0].location == pytest.approx(1 / 6, abs=1e-8)
    assert atoms[0].mass == pytest.approx(1 / 3, abs=1e-7)
    assert len(intervals) == 1
    assert intervals[0].lo == pytest.approx(1 / 3, abs=1e-8)
    assert intervals[0].hi == 1.0
    assert d.is_mpc(exp, restriction)
    assert restriction.mean() == pytest.approx(uniform.mean, abs=1e-10)


def test_implementing_restriction_upper_censorship(uniform, family):
    # s = t: empty pooling region, restriction is full revelation
    dc, _ = d.mic_from_top_atom(family, family.y_min)
    restriction = d.implementing_restriction(uniform, dc)
    assert not restriction.atoms() or restriction.atoms()[0].mass < 1e-6
    total_interval = sum(iv.hi - iv.lo for iv in restriction.intervals())
    assert total_interval == pytest.approx(1.0, abs=1e-6)


def test_implementing_restriction_squared_prior(squared_family):
    dc, exp = d.mic_from_top_atom(
        squared_family, 0.5 * (squared_family.y_min + squared_family.y_max))
    restriction = d.implementing_restriction(squared_family.prior, dc)
    assert d.is_mpc(exp, restriction)


def test_transfer_neutrality_of_restriction(beta22, family, uniform):
    # ∫ p dF equals ∫ p d(restriction): they differ only across the top pool,
    # where p is affine and the pooling preserves the mean
    dc, exp = d.mic_from_top_atom(family, 0.65)
    p = d.canonical_price_function(beta22, d.TangencyPair(x=dc.x, y=dc.y))
    restriction = d.implementing_restriction(uniform, dc)
    assert d.restriction_integral_gap(beta22, p, exp, restriction) <= 1e-8


def test_certificates_across_family(beta22, family):
    for y in np.linspace(family.y_min, family.y_max, 15):
        dc, exp = d.mic_from_top_atom(family, float(y))
        p = d.canonical_price_function(beta22, d.TangencyPair(x=dc.x, y=dc.y))
        rep = d.verify_ic(beta22, exp, p)
        assert rep.ok, (float(y), rep.max_violations)
        assert p.domination_violation(beta22) >= -1e-12


def test_virtual_value_contact_and_discount(beta22, family, uniform):
    pair = family.full_delegation
    p = d.canonical_price_function(beta22, pair)
    star = d.upper_censorship(uniform, pair.x)
    vf = d.virtual_value(beta22, beta22.integrated_cdf, star, p, epsilon=1e-3)
    # on the revealed region the virtual value equals the designer payoff
    for m in (0.0, 0.1, 0.2, pair.x):
        assert vf(m) == pytest.approx(beta22.integrated_cdf(m), abs=1e-7)
    # inside the pooled region: envelope chord minus epsilon times the slack
    ig = beta22.integrated_cdf
    w = (0.5 - pair.x) / (1.0 - pair.x)
    envelope = (1 - w) * ig(pair.x) + w * ig(1.0)
    assert vf(0.5) == pytest.approx(envelope - 1e-3 * (1 / 128), abs=1e-7)
    # never above the envelope
    grid = np.linspace(0.0, 1.0, 257)
    for m in grid:
        m = float(m)
        seg_env = ((1 - (m - pair.x) / (1 - pair.x)) * ig(pair.x)
                   + (m - pair.x) / (1 - pair.x) * ig(1.0)) if m >= pair.x else ig(m)
        assert vf(m) <= seg_env + 1e-9


def test_virtual_value_requires_certified_experiment(beta22, family, uniform):
    p = d.canonical_price_function(beta22, family.full_delegation)
    with pytest.raises(d.CertificateError):
        d.virtual_value(beta22, beta22.integrated_cdf, d.full_revelation(uniform), p)


def test_virtual_value_lp_recovery(beta22, family, uniform):
    # maximizing the virtual value over all garblings of the prior recovers
    # the certified experiment's payoff within grid tolerance
    dc, exp = d.mic_from_top_atom(family, 0.65)
    p = d.canonical_price_function(beta22, d.TangencyPair(x=dc.x, y=dc.y))
    n = 101
    instance = d.make_instance(uniform, beta22.cdf, n)
    vf = d.virtual_value(beta22, beta22.integrated_cdf, exp, p,
                         epsilon=1e-3, grid=instance.grid)
    _, _, lp_value = d.lp_best_reply(instance, instance.prior_mass, payoff=vf.values)
    exp_mass = d.discretize_experiment(exp, instance)
    exp_value = float(vf.values @ exp_mass)
    assert lp_value >= exp_value - 1e-9
    assert lp_value - exp_value <= 2.0 / n


def test_certificate_curve_export(beta22, family):
    p = d.canonical_price_function(beta22, family.full_delegation)
    curve = d.certificate_curve(beta22, p, points=129)
    assert curve.shape[1] == 3
    assert np.all(curve[:, 2] >= curve[:, 1] - 1e-9)  # p >= G
