import pytest

import infodelegation as d


@pytest.fixture(scope="session")
def uniform():
    return d.UniformDistribution()


@pytest.fixture(scope="session")
def beta22():
    return d.BetaDistribution(2, 2)


@pytest.fixture(scope="session")
def squared_prior():
    # h(w) = 2w, H(w) = w^2
    return d.PiecewisePolynomialDistribution([(0.0, 1.0, [0.0, 2.0])])


@pytest.fixture(scope="session")
def family(uniform, beta22):
    return d.build_mic_family(uniform, beta22)


@pytest.fixture(scope="session")
def squared_family(squared_prior, beta22):
    return d.build_mic_family(squared_prior, beta22)


@pytest.fixture(scope="session")
def instance101(uniform, beta22):
    return d.make_instance(uniform, beta22.cdf, 101)


# closed forms for the Beta(2, 2) outside option, used as test oracles
def g_cdf(r):
    return 3 * r**2 - 2 * r**3


def g_pdf(r):
    return 6 * r * (1 - r)


def ig(m):
    # I_G(m) = ∫_0^m G = m^3 - m^4 / 2
    return m**3 - m**4 / 2


def int_ig(m):
    # ∫_0^m I_G = m^4/4 - m^5/10
    return m**4 / 4 - m**5 / 10


@pytest.fixture(scope="session")
def beta22_forms():
    return {"G": g_cdf, "g": g_pdf, "IG": ig, "intIG": int_ig}
