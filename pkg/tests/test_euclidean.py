import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from anglemetric.cone import TailWindow, s_estimate
from anglemetric.euclidean import (LatticeDirection, LatticeRay, LatticeSpace, ZeroVector, angle, brute_force_s_plus,
                                   connecting_threshold, even_directions, l1_ray_s_exact, l1_s_plus_exact,
                                   l2_line_s_exact, l2_s_plus_exact, lattice_boundary_check, primitive_directions,
                                   single_linkage, zigzag_ray)

L1 = LatticeSpace(2, 1)
W = TailWindow(100, 1000)
vec = st.tuples(st.integers(-6, 6), st.integers(-6, 6)).filter(any)


def test_l2_closed_form_examples():
    assert l2_line_s_exact((1, 0), (0, 1), "line") == 1.0
    assert l2_line_s_exact((1, 0), (1, 1), "halfline") == pytest.approx(math.sqrt(2) / 2, abs=1e-15)
    assert l2_line_s_exact((1, 0), (-1, 0), "halfline") == 1.0
    assert l2_line_s_exact((1, 0), (-1, 0), "line") == 0.0


def test_l1_oracle_reproduces_the_three_line_values():
    assert l1_ray_s_exact((1, 0), (2, 1)) == Fraction(1, 2)
    assert l1_ray_s_exact((2, 1), (1, 1)) == Fraction(1, 3)
    assert l1_ray_s_exact((1, 0), (1, 1)) == Fraction(1)


def test_zero_vectors_rejected():
    with pytest.raises(ZeroVector):
        l1_ray_s_exact((0, 0), (1, 0))
    with pytest.raises(ZeroVector):
        l2_line_s_exact((1, 0), (0, 0))
    with pytest.raises(ZeroVector):
        LatticeDirection((0, 0))


def test_direction_reduction():
    d = LatticeDirection((4, -6), "line")
    assert d.v == (4, -6) and d.reduced == (2, -3)


@pytest.mark.parametrize("u,v", [((1, 0), (2, 1)), ((2, 1), (1, 1)), ((1, 0), (1, 1)), ((3, -1), (1, 2)),
                                 ((1, 3), (-2, 1)), ((5, 2), (2, 5))])
@pytest.mark.parametrize("sense", ["halfline", "line"])
def test_l1_oracle_matches_brute_force_grid(u, v, sense):
    # the grid minimum over m can only sit above the infimum, by the lattice step
    brute = brute_force_s_plus(L1, u, v, n_max=200, m_max=2000, sense=sense)
    exact = float(l1_s_plus_exact(u, v, sense))
    assert exact - 1e-12 <= brute <= exact + 0.02


@given(vec, vec)
def test_l1_oracle_bounds_and_symmetry(u, v):
    s = l1_ray_s_exact(u, v)
    assert 0 <= s <= 1
    assert s == l1_ray_s_exact(v, u)
    assert l1_ray_s_exact(u, u) == 0


@given(vec, vec)
def test_l1_oracle_is_scale_invariant(u, v):
    assert l1_ray_s_exact(u, v) == l1_ray_s_exact(tuple(3 * t for t in u), tuple(2 * t for t in v))


@given(vec, vec)
def test_euclidean_angle_comparison_inequality(u, v):
    # for half-lines: s <= 2 sin(angle / 2) <= 4 s
    s = l2_s_plus_exact(u, v, "halfline")
    chord = 2 * math.sin(angle(u, v) / 2)
    assert s <= chord + 1e-12
    assert chord <= 4 * s + 1e-12


def test_estimator_matches_l1_oracle_on_random_pairs():
    rng = np.random.default_rng(11)
    dirs = primitive_directions(5)
    for _ in range(100):
        i, j = rng.choice(len(dirs), 2, replace=False)
        u, v = dirs[i], dirs[j]
        exact = float(l1_ray_s_exact(u, v, "halfline"))
        est = s_estimate(LatticeRay(L1, u), LatticeRay(L1, v), W).value
        assert abs(est - exact) <= 0.02, (u, v, est, exact)
        assert est >= exact - 0.02


def test_zigzag_ray_stays_away_from_every_half_line():
    Z = zigzag_ray(L1)
    for v in even_directions(32, 8):
        assert s_estimate(Z, LatticeRay(L1, v), W).value >= 0.1, v


def test_zigzag_vertices():
    Z = zigzag_ray(L1)
    assert [Z.vertex(m) for m in range(5)] == [(0, 0), (1, 0), (1, 1), (3, 1), (3, 3)]
    pts = Z.slice(12)
    assert np.all(np.abs(np.diff(pts, axis=0)).sum(axis=1) == 1)


def test_even_directions_are_primitive_and_antipodal():
    d = even_directions(16, 8)
    assert len(set(d)) == 16
    assert all(math.gcd(*map(abs, v)) == 1 for v in d)
    assert all(d[k + 8] == (-d[k][0], -d[k][1]) for k in range(8))


def test_single_linkage_and_threshold():
    M = np.array([[0, 0.1, 0.9], [0.1, 0, 0.5], [0.9, 0.5, 0]])
    assert single_linkage(M, 0.3) == [[0, 1], [2]]
    assert single_linkage(M, 0.5) == [[0, 1, 2]]
    assert connecting_threshold(M) == 0.5


def test_integer_boundary_has_two_points():
    rep = lattice_boundary_check(1, window=TailWindow(100, 1000))
    assert rep.classes == 2
    assert rep.t_hat[0, 1] == 1.0


def test_plane_boundary_matches_circle_metric():
    rep = lattice_boundary_check(2, 16, sense="halfline")
    assert rep.max_deviation <= 0.03
    assert rep.classes == 16
    # adjacent sampled directions sit about 22.5 degrees apart, so they join above sqrt(sin 22.5)
    assert rep.connecting_threshold == pytest.approx(math.sqrt(math.sin(math.pi / 8)), abs=0.03)


def test_projective_plane_boundary_identifies_antipodes():
    rep = lattice_boundary_check(2, 8, sense="line")
    for k in range(4):
        assert rep.t_hat[k, k + 4] <= 0.03
    assert rep.classes == 4
    assert rep.max_deviation <= 0.03
