import numpy as np
import pytest

import infodelegation as d

# frozen oracle values for the uniform prior / Beta(2,2) outside option with
# the decision-maker objective u(m) = I_G(m) = m^3 - m^4/2:
#   U_D(2/3) = (1/3)·I_G(1/6) + (2/3)·I_G(2/3)                = 1035/7776
#   U_D(5/8) = ∫_0^{1/4} I_G + (3/4)·I_G(5/8)                 = 20769/163840
#   derivative at (1/4, 5/8):
#     (G(5/8) - (I_G(5/8) - I_G(1/4))/(3/8))·(3/4)            = 837/4096
UD_OPT = 1035 / 7776
UD_STAR = 20769 / 163840
DERIV_STAR = 837 / 4096


def test_designer_payoff_closed_forms(family):
    obj = d.DesignerObjective.dm_value()
    assert d.designer_payoff(obj, family, family.y_max) == pytest.approx(UD_OPT, abs=1e-8)
    assert d.designer_payoff(obj, family, family.y_min) == pytest.approx(UD_STAR, abs=1e-9)


def test_designer_payoff_quadrature_oracle(family, beta22_forms):
    # independent oracle at y = 0.65 with (s, t, x) = (0.1, 0.3, 0.2):
    # ∫_0^s I_G dH + (H(t) - H(s))·I_G(x) + (1 - H(t))·I_G(y)
    ig, int_ig = beta22_forms["IG"], beta22_forms["intIG"]
    expected = int_ig(0.1) + 0.2 * ig(0.2) + 0.7 * ig(0.65)
    value = d.designer_payoff(d.DesignerObjective.dm_value(), family, 0.65)
    assert value == pytest.approx(expected, abs=1e-9)


def test_three_term_formula_matches_segments(family):
    obj = d.DesignerObjective.dm_value()
    rng = np.random.default_rng(5)
    span = family.y_max - family.y_min
    for _ in range(100):
        y = float(family.y_min + span * rng.random())
        dc, exp = d.mic_from_top_atom(family, y)
        by_formula = d.censorship_designer_payoff(obj, family, dc)
        by_segments = d.expected_payoff(exp, obj.utility(family.g_dist))
        assert by_formula == pytest.approx(by_segments, abs=1e-9)


def test_welfare_zero_is_provider_payoff(family, beta22):
    obj = d.DesignerObjective.welfare_weighted(0.0)
    value = d.designer_payoff(obj, family, family.y_min)
    _, exp = d.mic_from_top_atom(family, family.y_min)
    assert value == pytest.approx(d.expected_payoff(exp, beta22.cdf), abs=1e-12)


def test_optimize_dm_value(family):
    solution = d.optimize(d.DesignerObjective.dm_value(), family)
    assert solution.y_opt == pytest.approx(2 / 3, abs=1e-8)
    assert solution.binding_at_y_max
    dc = solution.censorship
    assert dc.s == pytest.approx(0.0, abs=1e-8)
    assert dc.x == pytest.approx(1 / 6, abs=1e-8)
    assert dc.t == pytest.approx(1 / 3, abs=1e-8)
    assert solution.payoff == pytest.approx(UD_OPT, abs=1e-8)
    assert solution.payoff - UD_STAR > 0.006


def test_optimize_deterministic(family):
    a = d.optimize(d.DesignerObjective.dm_value(), family)
    b = d.optimize(d.DesignerObjective.dm_value(), family)
    assert a.y_opt == b.y_opt
    assert a.payoff == b.payoff


def test_optimize_provider_aligned(family):
    solution = d.optimize(d.DesignerObjective.welfare_weighted(0.0), family)
    assert solution.y_opt == pytest.approx(family.y_min, abs=1e-8)
    assert solution.binding_at_y_min


def test_optimize_welfare_one_equals_dm_value(family):
    lam1 = d.optimize(d.DesignerObjective.welfare_weighted(1.0), family)
    assert lam1.y_opt == pytest.approx(2 / 3, abs=1e-8)


def test_optimize_welfare_interior_optimum(family):
    # an even blend trades the provider-aligned term against the value of
    # information and peaks strictly inside the range; the refined optimum
    # must dominate a dense independent scan
    obj = d.DesignerObjective.welfare_weighted(0.5)
    solution = d.optimize(obj, family)
    assert not solution.binding_at_y_min and not solution.binding_at_y_max
    ys = np.linspace(family.y_min, family.y_max, 801)
    dense_best = max(d.designer_payoff(obj, family, float(y)) for y in ys)
    assert solution.payoff >= dense_best - 1e-12


def test_payoff_increasing_on_range(family):
    obj = d.DesignerObjective.dm_value()
    ys = np.linspace(family.y_min, family.y_max, 41)
    values = [d.designer_payoff(obj, family, float(y)) for y in ys]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_perturbation_derivative_value(family):
    deriv = d.perturbation_derivative(d.DesignerObjective.dm_value(), family)
    assert deriv == pytest.approx(DERIV_STAR, abs=1e-6)
    assert deriv > 0


def test_perturbation_derivative_difference_quotient(family):
    obj = d.DesignerObjective.dm_value()
    deriv = d.perturbation_derivative(obj, family)
    base = d.designer_payoff(obj, family, family.y_min)
    previous_gap = None
    for delta in (1e-2, 1e-3, 1e-4):
        quotient = (d.designer_payoff(obj, family, family.y_min + delta) - base) / delta
        assert quotient > 0
        gap = abs(quotient - deriv)
        if previous_gap is not None:
            assert gap < previous_gap  # quotient converges to the derivative
        previous_gap = gap
    assert abs(quotient - deriv) / deriv < 1e-2


def test_welfare_derivative_identity(family, beta22, beta22_forms):
    # with g(y*) = (G(y*) - G(x*))/(y* - x*), the derivative reduces to
    # lam·(G(y*) - (I_G(y*) - I_G(x*))/(y* - x*))·(1 - H(x*))
    pair = family.full_delegation
    G, ig = beta22_forms["G"], beta22_forms["IG"]
    for lam in (0.0, 0.3, 0.5, 1.0):
        direct = d.perturbation_derivative(
            d.DesignerObjective.welfare_weighted(lam), family)
        simplified = lam * (G(pair.y) - (ig(pair.y) - ig(pair.x)) / (pair.y - pair.x)) \
            * (1.0 - pair.x)
        assert direct == pytest.approx(simplified, abs=1e-9)


def test_welfare_derivative_linear_in_lambda(family):
    values = {lam: d.perturbation_derivative(
        d.DesignerObjective.welfare_weighted(lam), family)
        for lam in (0.0, 0.5, 1.0)}
    assert abs(values[0.0]) <= 1e-9
    assert values[0.5] == pytest.approx(0.5 * (values[0.0] + values[1.0]), abs=1e-9)


def test_custom_objective(family):
    # strictly convex m^2 with finite-difference derivative
    obj = d.DesignerObjective.custom(lambda m: m * m)
    d.validate_objective(obj, family.g_dist)
    deriv = d.perturbation_derivative(obj, family)
    pair = family.full_delegation
    expected = (2 * pair.y - (pair.y**2 - pair.x**2) / (pair.y - pair.x)) * (1 - pair.x)
    assert deriv == pytest.approx(expected, abs=1e-5)
    assert deriv > 0
    solution = d.optimize(obj, family)
    assert family.y_min <= solution.y_opt <= family.y_max
    # strictly convex objectives strictly gain over full delegation
    assert solution.payoff > d.designer_payoff(obj, family, family.y_min)


def test_non_convex_custom_rejected(family):
    import math
    obj = d.DesignerObjective.custom(lambda m: math.sin(4 * m))
    with pytest.raises(d.ConfigError):
        d.validate_objective(obj, family.g_dist)


def test_squared_prior_optimum_beats_full_delegation(squared_family):
    obj = d.DesignerObjective.dm_value()
    solution = d.optimize(obj, squared_family)
    base = d.designer_payoff(obj, squared_family, squared_family.y_min)
    assert solution.payoff > base
    assert d.perturbation_derivative(obj, squared_family) > 0
