from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from anglemetric.lie.algebra import bundled
from anglemetric.lie.bch import bch_product
from anglemetric.lie.gauge import (Gauge, GaugeValue, SearchExhausted, gauge, rescale_norms, sample_pairs,
                                   scale_grid, validate_scales)

fracs = st.fractions(min_value=-20, max_value=20, max_denominator=12)


def vectors(alg):
    return st.lists(fracs, min_size=alg.dim, max_size=alg.dim).map(lambda c: np.array(c, dtype=object))


def test_gauge_examples():
    alg = bundled("h3")
    e1, e3 = alg.unit(0), alg.unit(2)
    assert gauge(alg, e3) == GaugeValue.of(1)
    assert gauge(alg, 4 * e3) == GaugeValue.of(2)
    x = e1 + e3
    gx = gauge(alg, x)
    assert gauge(alg, alg.dilate(2, x)) == GaugeValue(gx.radicand * 2 ** gx.degree, gx.degree)


def test_gauge_value_ordering_is_exact():
    # 2^(1/2) = 1.4142... < 3^(1/3) = 1.4422...
    a, b = GaugeValue(F(2), 2), GaugeValue(F(3), 3)
    assert a < b and not b < a
    assert GaugeValue(F(4), 2) == GaugeValue(F(8), 3) == GaugeValue.of(2)
    assert float(GaugeValue(F(9, 4), 2)) == pytest.approx(1.5)


def test_scales_enter_each_layer():
    alg = bundled("h3")
    g = Gauge(alg, [1, F(1, 4)])
    assert g.value(alg.unit(2) * 16) == GaugeValue.of(2)
    with pytest.raises(ValueError):
        Gauge(alg, [1])
    with pytest.raises(ValueError):
        Gauge(alg, [1, 0])


@pytest.mark.parametrize("name", ["h3", "h5", "free3"])
def test_gauge_properties(name):
    alg = bundled(name)
    g = Gauge(alg)

    @given(vectors(alg), vectors(alg), st.fractions(min_value=1, max_value=50, max_denominator=7))
    def check(x, y, t):
        assert g.value(-x) == g.value(x)
        assert g(x + y) <= (g(x) + g(y)) * (1 + 1e-12)
        if any(x):
            n = alg.depth(x)
            assert g(t * x) <= float(t) ** (1 / n) * g(x) * (1 + 1e-12)
            assert g(x / t) <= float(1 / t) ** (1 / alg.c) * g(x) * (1 + 1e-12)
        gt = g.value(alg.dilate(t, x))
        gx = g.value(x)
        assert gt == GaugeValue(gx.radicand * t ** gx.degree, gx.degree)

    check()


def test_batch_agrees_with_exact_values():
    alg = bundled("free3")
    X = alg.random_vector(np.random.default_rng(0), 50)
    b = Gauge(alg).batch(X)
    assert np.allclose(b, [Gauge(alg)(x) for x in X], rtol=1e-13, atol=0)


def test_scale_grid_starts_at_unit_scales():
    grid = list(scale_grid(3, depth=2))
    assert grid[0] == (1, 1, 1)
    assert len(grid) == 9
    assert all(s[0] == 1 for s in grid)


def test_abelian_unit_scales_pass_exactly():
    res = rescale_norms(bundled("abelian2"), 1.0, samples=2000)
    assert res.gauge.scales == (1,)
    assert res.tried == 1
    assert res.max_slack <= -1 + 1e-12


@pytest.mark.parametrize("name", ["h3", "h5", "free3", "free2r3"])
def test_rescaled_triangle_on_fresh_samples(name):
    alg = bundled(name)
    res = rescale_norms(alg, 1.0, samples=10_000, seed=0)
    assert res.gauge.alpha == 1.0
    worst, _ = validate_scales(alg, res.gauge.scales, 1.0, samples=10_000, seed=12345)
    assert worst <= 0


def test_heisenberg_accepted_scales_are_reported():
    res = rescale_norms(bundled("h3"), 1.0, samples=10_000, seed=0)
    assert res.gauge.scales == (1, 1)
    assert res.max_slack <= 0


def test_huge_central_scale_is_rejected_with_witness():
    alg = bundled("h3")
    e1, e2 = alg.unit(0), alg.unit(1)
    pairs = (np.array([e1], dtype=object), np.array([e2], dtype=object))
    worst, (x, y) = validate_scales(alg, (1, 1000), 1.0, pairs=pairs)
    assert worst > 0
    # |e1 e2| has the term (1000 * 1/2) ** (1/2), far above |e1| + |e2| + 1 = 3
    assert Gauge(alg, (1, 1000))(bch_product(alg, x, y)) == pytest.approx(500 ** 0.5)


def test_search_exhausted_reports_violation():
    alg = bundled("h3")
    with pytest.raises(SearchExhausted) as info:
        rescale_norms(alg, alpha=-1.0, samples=200, depth=1)
    assert info.value.violation[0] > 0


def test_sample_pairs_are_seeded():
    alg = bundled("h3")
    a, b = sample_pairs(alg, 100, 3), sample_pairs(alg, 100, 3)
    assert (a[0] == b[0]).all() and (a[1] == b[1]).all()
    assert len(a[0]) == 100 + alg.dim ** 2
