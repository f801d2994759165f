import json
from fractions import Fraction as F

import numpy as np
import pytest

from anglemetric.lie.algebra import (AlgebraError, ConfigError, algebra_to_json, bundled, free_class2_rank3,
                                     heisenberg3, parse_algebra)


def vec(*xs):
    return np.array([F(x) for x in xs], dtype=object)


def test_heisenberg_bracket():
    alg = heisenberg3()
    assert list(alg.bracket(alg.unit(0), alg.unit(1))) == [0, 0, 1]
    assert list(alg.bracket(alg.unit(1), alg.unit(0))) == [0, 0, -1]


def test_bracket_with_itself_vanishes():
    rng = np.random.default_rng(0)
    for name in ("h3", "h5", "free3", "free2r3"):
        alg = bundled(name)
        for x in alg.random_vector(rng, 20):
            assert all(v == 0 for v in alg.bracket(x, x))


def test_free_class_two_bilinearity():
    alg = free_class2_rank3()
    got = alg.bracket(alg.unit(0), alg.unit(1) + alg.unit(2))
    assert list(got) == list(alg.named(e12=1, e13=1))


def test_batched_bracket_matches_rowwise():
    alg = bundled("free3")
    rng = np.random.default_rng(1)
    X, Y = alg.random_vector(rng, 10), alg.random_vector(rng, 10)
    B = alg.bracket(X, Y)
    for i in range(10):
        assert list(B[i]) == list(alg.bracket(X[i], Y[i]))


def test_float_bracket_agrees_with_exact():
    alg = bundled("h5")
    rng = np.random.default_rng(2)
    x, y = alg.random_vector(rng), alg.random_vector(rng)
    exact = np.array(alg.bracket(x, y), dtype=float)
    fl = alg.bracket(np.array(x, dtype=float), np.array(y, dtype=float))
    assert np.allclose(exact, fl, rtol=1e-14, atol=0)


def test_kfold_nests_from_the_right():
    alg = bundled("free3")
    e1, e2 = alg.unit(0), alg.unit(1)
    assert list(alg.kfold(e1, e1, e2)) == list(alg.bracket(e1, alg.bracket(e1, e2)))
    assert list(alg.kfold(e1, e1, e2)) == list(alg.named(e112=1))
    assert list(alg.kfold(e2)) == list(e2)


def test_bundled_algebras_are_valid():
    for name in ("abelian2", "h3", "h5", "free3", "free2r3"):
        alg = bundled(name)
        assert alg.jacobi_violation() is None
        assert alg.generation_violation() is None


def test_layers_and_dilation():
    alg = bundled("free3")
    assert alg.layers == (2, 1, 2) and alg.c == 3
    x = alg.named(e1=1, e12=1, e112=1)
    assert list(alg.dilate(2, x)) == [2, 0, 4, 8, 0]
    assert alg.depth(alg.named(e12=3)) == 2
    assert alg.in_layer(alg.named(e112=1, e212=2)) == 3
    assert alg.in_layer(x) is None


def test_projection_extracts_layer_blocks():
    alg = bundled("free3")
    x = alg.vector([1, 2, 3, 4, 5])
    assert list(alg.project(x, 2)) == [0, 0, 3, 0, 0]
    assert list(alg.block(x, 3)) == [4, 5]


def test_unknown_bundled_name():
    with pytest.raises(AlgebraError):
        bundled("sl2")


def test_config_round_trip():
    for name in ("h3", "h5", "free3", "free2r3"):
        alg = bundled(name)
        again = parse_algebra(algebra_to_json(alg))
        assert again.layers == alg.layers and again.table == alg.table


def test_config_accepts_labels_and_rational_constants():
    text = json.dumps({"layers": [2, 1], "basis": ["x", "y", "z"], "brackets": [["x", "y", "z", 3, 2]]})
    alg = parse_algebra(text)
    assert list(alg.bracket(alg.unit(0), alg.unit(1))) == [0, 0, F(3, 2)]


def test_config_rejects_jacobi_violation_with_triple():
    # [e1, [e2, e3]] = e5 while the other two Jacobi terms vanish
    text = json.dumps({"layers": [3, 1, 1],
                       "brackets": [[0, 1, 3, 1, 1], [1, 2, 3, 1, 1], [0, 3, 4, 1, 1]]})
    with pytest.raises(AlgebraError) as info:
        parse_algebra(text)
    assert info.value.triple == (0, 1, 2)
    assert "Jacobi" in str(info.value)


def test_config_rejects_grading_violation():
    text = json.dumps({"layers": [2, 1], "brackets": [[0, 1, 2, 1, 1], [0, 2, 1, 1, 1]]})
    with pytest.raises(AlgebraError) as info:
        parse_algebra(text)
    assert info.value.triple == (0, 2, 1)


def test_config_syntax_error_has_position():
    with pytest.raises(ConfigError) as info:
        parse_algebra('{"layers": [2, 1],\n "brackets": [[0, 1, 2, 1, 1]\n}')
    assert info.value.line == 3


def test_config_field_errors_name_the_field():
    with pytest.raises(ConfigError) as info:
        parse_algebra('{"layers": [2, 0]}')
    assert info.value.field == "layers"
    with pytest.raises(ConfigError) as info:
        parse_algebra('{"layers": [2, 1], "brackets": [[0, 1, 2, "1", 1]]}')
    assert info.value.field == "brackets[0]"
