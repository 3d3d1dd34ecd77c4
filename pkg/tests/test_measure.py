import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inhomog.carpet import box_dim, assouad_dim, carpet_from_counts, hausdorff_dim, new_carpet
from inhomog.errors import BadWeights
from inhomog.measure import (
    alpha_mean,
    bernoulli,
    column_uniform,
    cumulant,
    cumulant_derivatives,
    fibre_moments,
    max_entropy,
    mcmullen,
)


@st.composite
def measures(draw):
    m = draw(st.integers(2, 4))
    n = draw(st.integers(m + 1, 6))
    cells = list(itertools.product(range(m), range(n)))
    digits = draw(st.sets(st.sampled_from(cells), min_size=2, max_size=len(cells)))
    c = new_carpet(m, n, digits)
    raw = draw(st.lists(st.floats(0.05, 1.0), min_size=c.n_digits, max_size=c.n_digits))
    total = math.fsum(raw)
    return bernoulli(c, [w / total for w in raw])


def test_max_entropy_left(left23):
    mu = max_entropy(left23)
    assert mu.weights == pytest.approx((1 / 3,) * 3)
    assert mu.projected[0] == pytest.approx(2 / 3)
    assert mu.projected[1] == pytest.approx(1 / 3)


def test_max_entropy_right_example():
    # |D| = 4 with column counts (2, 1, 1)
    mu = max_entropy(new_carpet(3, 4, [(0, 0), (0, 3), (1, 1), (2, 2)]))
    assert mu.weights == pytest.approx((0.25,) * 4)
    assert [mu.projected[i] for i in range(3)] == pytest.approx([0.5, 0.25, 0.25])


def test_column_uniform_left(left23):
    mu = column_uniform(left23)
    assert mu.weight((0, 0)) == pytest.approx(0.25)
    assert mu.weight((0, 2)) == pytest.approx(0.25)
    assert mu.weight((1, 1)) == pytest.approx(0.5)


def test_column_uniform_projection(c322):
    mu = column_uniform(c322)
    assert [mu.projected[i] for i in range(3)] == pytest.approx([1 / 3] * 3)


@pytest.mark.parametrize("weights", [(0.0, 0.5, 0.5), (0.3, 0.3, 0.3), (-0.1, 0.6, 0.5), (1.0, 0.0)])
def test_bad_weights(left23, weights):
    with pytest.raises(BadWeights):
        bernoulli(left23, weights)


def test_bernoulli_mapping_keys(left23):
    mu = bernoulli(left23, {(1, 1): 0.5, (0, 0): 0.2, (0, 2): 0.3})
    assert mu.weights == pytest.approx((0.2, 0.3, 0.5))
    with pytest.raises(BadWeights):
        bernoulli(left23, {(1, 1): 0.5, (0, 0): 0.5})
    with pytest.raises(BadWeights):
        bernoulli(left23, {(1, 1): 0.5, (0, 0): 0.2, (0, 1): 0.3})


def test_mcmullen_322(c322):
    mu = mcmullen(c322)
    s = hausdorff_dim(c322)
    e = math.log(3) / math.log(4) - 1
    assert mu.weight((0, 0)) == pytest.approx(3**e / 3**s, rel=1e-12)
    assert math.fsum(mu.weights) == pytest.approx(1.0, abs=1e-12)


def test_mcmullen_uniform_fibres_is_max_entropy():
    c = carpet_from_counts(3, 4, (2, 2, 2))
    assert mcmullen(c).weights == pytest.approx(max_entropy(c).weights, rel=1e-12)


def test_mcmullen_full_grid():
    c = new_carpet(2, 3, list(itertools.product(range(2), range(3))))
    assert mcmullen(c).weights == pytest.approx((1 / 6,) * 6, rel=1e-12)


def test_alpha_322(c322):
    mu = column_uniform(c322)
    assert alpha_mean(mu) == pytest.approx(1 + (math.log(12) / 3) / math.log(4), abs=1e-12)
    assert alpha_mean(mu) == pytest.approx(1.5975, abs=1e-4)


def test_alpha_411(c411):
    assert alpha_mean(column_uniform(c411)) == pytest.approx(4 / 3, abs=1e-12)


def test_alpha_uniform_fibres():
    c = carpet_from_counts(3, 4, (2, 2, 2))
    mu = max_entropy(c)
    assert alpha_mean(mu) == pytest.approx(box_dim(c))
    assert alpha_mean(mu) == pytest.approx(assouad_dim(c))


def test_fibre_moments_322(c322):
    c, sigma = fibre_moments(column_uniform(c322))
    assert c == pytest.approx(math.log(12) / 3, abs=1e-12)
    assert c == pytest.approx(0.82830, abs=1e-5)
    expected = (math.log(3) - c) ** 2 / 3 + 2 * (math.log(2) - c) ** 2 / 3
    assert sigma == pytest.approx(expected, rel=1e-12)
    assert sigma == pytest.approx(0.03654, abs=1e-5)


def test_fibre_moments_411(c411):
    c, sigma = fibre_moments(column_uniform(c411))
    assert c == pytest.approx(math.log(4) / 3)
    assert sigma == pytest.approx((math.log(4) - c) ** 2 / 3 + 2 * c**2 / 3)


def test_fibre_moments_uniform():
    _, sigma = fibre_moments(max_entropy(carpet_from_counts(3, 4, (2, 2, 2))))
    assert sigma == 0.0


def test_cumulant_values(c322):
    mu = column_uniform(c322)
    assert cumulant(mu, 0.0) == 0.0
    assert cumulant(mu, 1.0) == pytest.approx(math.log(7 / 3), abs=1e-14)
    # slope at large theta tends to log C_max; the offset is log of its mass
    corrected = math.log(3) + math.log(1 / 3) / 50
    assert abs(cumulant(mu, 50.0) / 50 - corrected) < 1e-2
    assert cumulant(mu, 50.0) / 50 == pytest.approx(corrected, abs=1e-9)


def test_cumulant_no_overflow(c322):
    mu = column_uniform(c322)
    assert math.isfinite(cumulant(mu, 1e6))
    assert cumulant_derivatives(mu, 1e6)[0] == pytest.approx(math.log(3))


@settings(max_examples=40, deadline=None)
@given(measures(), st.floats(-5, 20))
def test_cumulant_derivatives_against_mpmath(mu, theta):
    logc, p = mu.column_distribution()

    def lam(t):
        return mpmath.log(sum(mpmath.mpf(pi) * mpmath.e ** (t * mpmath.mpf(li)) for li, pi in zip(logc, p)))

    d1, d2 = cumulant_derivatives(mu, theta)
    with mpmath.workdps(40):
        assert d1 == pytest.approx(float(mpmath.diff(lam, theta)), abs=1e-10)
        assert d2 == pytest.approx(float(mpmath.diff(lam, theta, 2)), abs=1e-10)
        assert cumulant(mu, theta) == pytest.approx(float(lam(theta)), abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(measures())
def test_projection_sums(mu):
    c = mu.carpet
    assert math.fsum(mu.projected.values()) == pytest.approx(1.0, abs=1e-12)
    for i in c.columns:
        expected = math.fsum(w for (col, _), w in zip(c.digits, mu.weights) if col == i)
        assert mu.projected[i] == pytest.approx(expected, abs=1e-15)
    values, masses = mu.value_distribution()
    assert np.all(np.diff(values) > 0)
    assert math.fsum(masses) == pytest.approx(1.0, abs=1e-12)
