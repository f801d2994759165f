import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from anglemetric.cone import (ConeParams, DistanceEstimate, QuasiIsometry, TailWindow, UndecidableAtHorizon,
                              cone_contains, growth_constant_check, inner_ratio, neighborhood_contains,
                              orbit_growth_check, pushforward, s_estimate, s_plus_estimate, t_estimate,
                              triangle_report, weak_triangle_check)
from anglemetric.euclidean import LatticeRay, LatticeSpace, l1_ray_s_exact, primitive_directions, whole_lattice
from anglemetric.heisenberg import (HeisenbergGaugeSpace, HeisenbergWordSpace, comparison_constant, orbit, swap,
                                    word_table)
from anglemetric.spaces import EmptyWindow

L1 = LatticeSpace(2, 1)
L2 = LatticeSpace(2, 2)
W = TailWindow(100, 1000)


def line(space, v):
    return LatticeRay(space, v, "line")


def half(space, v):
    return LatticeRay(space, v, "halfline")


def brute_ratio(space, y, v, m_max):
    return min(space.distance(y, np.multiply(m, v)) / space.norm(np.multiply(m, v)) for m in range(1, m_max + 1))


# ---------------------------------------------------------------------------
# parameter types


def test_parameter_validation():
    with pytest.raises(ValueError):
        ConeParams(-0.1)
    with pytest.raises(ValueError):
        TailWindow(10, 10)
    with pytest.raises(ValueError):
        TailWindow(1, 10, K=1.5)
    with pytest.raises(ValueError):
        DistanceEstimate(1.2)
    with pytest.raises(ValueError):
        DistanceEstimate(0.5, "exact", TailWindow(1, 2))
    assert DistanceEstimate.exact(0.25).window is None


# ---------------------------------------------------------------------------
# cones


def test_cone_contains_reflexive():
    R = half(L1, (1, 0))
    assert cone_contains(R, R, ConeParams(0, 0), 200)


def test_cone_contains_wide_cone_covers_plane():
    assert cone_contains(whole_lattice(L1), half(L1, (1, 0)), ConeParams(1.5, 0), 50)


def test_cone_contains_rejects_orthogonal_axis():
    assert not cone_contains(half(L1, (0, 1)), half(L1, (1, 0)), ConeParams(0.5, 0), 50)


def _orbit_cases(h3_word, h3_gauge):
    cases = []
    for space in (LatticeSpace(2, 1), LatticeSpace(2, 2), LatticeSpace(2, "inf")):
        for v in ((1, 0), (2, 1), (-1, 3)):
            cases.append((whole_lattice(space), half(space, v), 30, 20))
    for g in ((1, 0, 0), (0, 1, 0), (1, 1, 0)):
        cases.append((_word_ball(h3_word, 2), orbit(g, space=h3_word), 2, 11))
        cases.append((_gauge_ball(h3_gauge, 5), orbit(g, space=h3_gauge), 5, 20))
    return cases


class _Ball:
    def __init__(self, space, pts):
        self.space = space
        self.pts = pts

    def slice_with_norms(self, r):
        n = self.space.norms(self.pts)
        return self.pts[n <= r], n[n <= r]


def _word_ball(space, r):
    T = space.table
    idx = np.argwhere((T.table >= 0) & (T.table <= r))
    return _Ball(space, np.stack([idx[:, 0] - T.A, idx[:, 1] - T.B, idx[:, 2] - T.C], axis=1))


def _gauge_ball(space, r):
    g = np.stack(np.meshgrid(*[np.arange(-r, r + 1)] * 2, np.arange(-r * r, r * r + 1), indexing="ij"), -1)
    return _Ball(space, g.reshape(-1, 3))


def test_slightly_wide_cones_cover_every_bundled_space(h3_word, h3_gauge):
    for X, R, horizon, K in _orbit_cases(h3_word, h3_gauge):
        assert cone_contains(X, R, ConeParams(1.1, 0), horizon, K=K), (R, horizon)


# ---------------------------------------------------------------------------
# inner ratios


def test_inner_ratio_on_the_set_is_zero():
    assert inner_ratio((4, 0), half(L1, (1, 0))) == 0.0


def test_inner_ratio_diagonal_point_against_axis_matches_brute_force():
    v, sat = inner_ratio((3, 3), half(L1, (1, 0)), K=10, with_flag=True)
    assert v == brute_ratio(L1, (3, 3), (1, 0), 60) == 1.0
    assert sat


def test_inner_ratio_axis_point_against_diagonal_matches_brute_force():
    v, sat = inner_ratio((6, 0), half(L1, (1, 1)), K=10, with_flag=True)
    assert v == brute_ratio(L1, (6, 0), (1, 1), 30) == 0.5
    assert not sat


@pytest.mark.parametrize("n", [1, 7, 40])
def test_inner_ratio_orthogonal_l2_is_saturated(n):
    v, sat = inner_ratio((0, n), half(L2, (1, 0)), K=10, with_flag=True)
    assert v >= 1 - 1 / 10
    assert sat


@given(st.integers(-30, 30), st.integers(-30, 30), st.sampled_from(primitive_directions(3)))
def test_inner_ratio_matches_unpruned_brute_force(a, b, v):
    if a == 0 and b == 0:
        return
    y = (a, b)
    got = inner_ratio(y, half(L1, v), K=10)
    cap = 10 * L1.norm(y)
    m_max = int(cap // L1.norm(v))
    assert got == pytest.approx(brute_ratio(L1, y, v, m_max), abs=1e-12)


def test_inner_ratio_needs_positive_norm():
    with pytest.raises(ValueError):
        inner_ratio((0, 0), half(L1, (1, 0)))


def test_empty_window_raises():
    with pytest.raises(EmptyWindow):
        s_plus_estimate(half(L1, (1, 0)), half(L1, (7, 7)), TailWindow(15, 15.5))


# ---------------------------------------------------------------------------
# estimators


def test_s_plus_of_a_set_with_itself_is_zero():
    R = half(L1, (2, 1))
    assert s_plus_estimate(R, R, W).value == 0.0


def test_example_lines_l1_estimates():
    assert s_estimate(line(L1, (1, 0)), line(L1, (2, 1)), W).value == pytest.approx(0.5, abs=0.02)
    assert s_estimate(line(L1, (2, 1)), line(L1, (1, 1)), W).value == pytest.approx(1 / 3, abs=0.02)
    e = s_estimate(line(L1, (1, 0)), line(L1, (1, 1)), W)
    assert e.value == pytest.approx(1.0, abs=0.02)


def test_subsemigroup_is_linearly_inside(h3_word):
    R, S = orbit((1, 0, 0), space=h3_word), orbit((2, 0, 0), space=h3_word)
    assert s_plus_estimate(R, S, TailWindow(10, 22)).value == 0.0


def test_t_of_a_set_with_itself_is_zero():
    R = line(L2, (3, 1))
    assert t_estimate(R, R, W).value == 0.0


def test_l2_half_lines_at_45_degrees():
    e = s_estimate(half(L2, (1, 0)), half(L2, (1, 1)), W)
    assert e.value == pytest.approx(math.sin(math.pi / 4), abs=0.01)
    assert t_estimate(half(L2, (1, 0)), half(L2, (1, 1)), W).value == pytest.approx(math.sqrt(e.value))


def test_larger_cap_never_increases_the_estimate():
    for u, v in (((1, 0), (2, 1)), ((1, 1), (-1, 2)), ((3, 1), (0, 1))):
        a = s_plus_estimate(half(L1, u), half(L1, v), TailWindow(50, 500, 10)).value
        b = s_plus_estimate(half(L1, u), half(L1, v), TailWindow(50, 500, 20)).value
        assert b <= a + 1e-12


def test_estimate_is_deterministic_across_workers():
    R, S = line(L1, (3, 1)), line(L1, (1, 2))
    a = s_plus_estimate(R, S, W, workers=1)
    b = s_plus_estimate(R, S, W, workers=3)
    assert (a.value, a.spread, a.witness) == (b.value, b.spread, b.witness)


def test_subset_sandwich_gives_equal_estimates():
    # <(2,0)>+ is inside <(1,0)>+, which lies within distance 1 of it
    S, T = half(L1, (2, 0)), half(L1, (1, 0))
    for v in ((1, 1), (2, 1), (0, 1)):
        R = half(L1, v)
        a, b = s_plus_estimate(R, S, W), s_plus_estimate(R, T, W)
        assert abs(a.value - b.value) <= a.spread + b.spread + 0.01
        a, b = s_plus_estimate(S, R, W), s_plus_estimate(T, R, W)
        assert abs(a.value - b.value) <= a.spread + b.spread + 0.01


def test_shifted_reference_point_agrees_within_window_error():
    shifted = LatticeSpace(2, 1, reference=(7, -4))
    for u, v in (((1, 0), (2, 1)), ((2, 1), (1, 1))):
        a = s_estimate(line(L1, u), line(L1, v), W)
        b = s_estimate(line(shifted, u), line(shifted, v), W)
        assert abs(a.value - b.value) <= a.spread + b.spread + 0.02


# ---------------------------------------------------------------------------
# triangle inequalities


def test_example_lines_break_the_plain_triangle_only():
    rep = triangle_report(0.5, 1 / 3, 1.0)
    assert not rep.plain
    assert rep.weak
    assert rep.t_triangle
    assert bool(rep)


def test_weak_triangle_trivial_for_equal_sets():
    R = line(L1, (1, 2))
    assert weak_triangle_check(R, R, R, W)


def test_weak_triangle_on_random_l1_triples_exact():
    rng = np.random.default_rng(5)
    dirs = primitive_directions(6)
    for _ in range(50):
        a, b, c = (dirs[i] for i in rng.choice(len(dirs), 3, replace=False))
        rep = triangle_report(l1_ray_s_exact(a, b), l1_ray_s_exact(b, c), l1_ray_s_exact(a, c))
        assert rep.weak and rep.t_triangle


# ---------------------------------------------------------------------------
# quasi-isometries


def test_identity_quasi_isometry_l1_to_l2():
    f = QuasiIsometry(lambda X: X, math.sqrt(2), L1, L2)
    assert f.check(np.random.default_rng(0).integers(-30, 31, size=(200, 2)))


def test_identity_map_with_q_one_keeps_estimates():
    f = QuasiIsometry(lambda X: X, 1.0, L1, L1)
    R, S = half(L1, (1, 0)), half(L1, (2, 1))
    assert s_plus_estimate(pushforward(f, R), pushforward(f, S), W).value == s_plus_estimate(R, S, W).value


def test_generator_swap_is_an_isometry_of_the_word_metric(h3_word, word_table):
    idx = np.argwhere((word_table.table >= 0) & (word_table.table <= 10))
    G = np.stack([idx[:, 0] - word_table.A, idx[:, 1] - word_table.B, idx[:, 2] - word_table.C], axis=1)
    G = G[np.random.default_rng(1).choice(len(G), 300, replace=False)]
    f = QuasiIsometry(swap, 1.0, h3_word, h3_word)
    assert np.array_equal(h3_word.pairwise(G, G), h3_word.pairwise(swap(G), swap(G)))
    assert f.check(G)


def test_quasi_isometry_rejects_q_below_one():
    with pytest.raises(ValueError):
        QuasiIsometry(lambda X: X, 0.5, L1, L1)


# ---------------------------------------------------------------------------
# neighbourhoods


def test_neighbourhood_contains_points_of_the_set():
    R = half(L2, (1, 0))
    assert neighborhood_contains(R, 0.5, 10, (40, 0), W)
    assert not neighborhood_contains(R, 0.5, 50, (40, 0), W)


def test_neighbourhood_set_probes():
    xi, zeta = half(L2, (1, 0)), half(L2, (1, 1))
    assert not neighborhood_contains(xi, 0.5, 0, zeta, W)
    assert neighborhood_contains(xi, 0.8, 0, zeta, W)


def test_neighbourhood_undecidable_near_threshold():
    xi, zeta = half(L1, (1, 0)), half(L1, (2, 1))
    e = s_plus_estimate(xi, zeta, W)
    with pytest.raises(UndecidableAtHorizon):
        neighborhood_contains(xi, e.value + e.spread / 2, 0, zeta, W)


# ---------------------------------------------------------------------------
# growth constants


def test_growth_constant_horizontal_generator():
    T = word_table(50)
    space = HeisenbergWordSpace(T)
    assert orbit_growth_check(orbit((1, 0, 0), space=space), 1.0, 50)


def test_growth_constant_integers():
    assert growth_constant_check(lambda ns: np.abs(ns).astype(float), 1.0, 200)


def test_growth_constant_central_generator_with_measured_q(h3_gauge):
    T = word_table(50)
    q = comparison_constant(T, h3_gauge)
    assert orbit_growth_check(orbit((0, 0, 1), space=HeisenbergWordSpace(T)), q * q, 30)
