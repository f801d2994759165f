"""The Baker-Campbell-Hausdorff group law, truncated at the nilpotency class.

Terms are right-nested brackets ``(w1, (w2, (..., wk)))`` over the letters
``x`` and ``y`` with exact rational coefficients, through degree 5.  The
table is validated by exact associativity on sampled triples and against
matrix exponentials of strictly upper triangular matrices, not trusted as
transcribed.
"""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction as F

import numpy as np

MAX_DEGREE = 5

# (coefficient, word); word letters are "x" or "y", nested from the right
BCH_TABLE = (
    (F(1), "x"),
    (F(1), "y"),
    (F(1, 2), "xy"),
    (F(1, 12), "xxy"),
    (F(1, 12), "yyx"),
    (F(-1, 24), "yxxy"),
    (F(-1, 720), "yyyyx"),
    (F(-1, 720), "xxxxy"),
    (F(1, 360), "xyyyx"),
    (F(1, 360), "yxxxy"),
    (F(1, 120), "yxyxy"),
    (F(1, 120), "xyxyx"),
)


class ClassExceedsTable(ValueError):
    pass


def _nested(word, values, bracket, cache):
    """Evaluate a right-nested word, memoising shared suffixes."""
    if word in cache:
        return cache[word]
    if len(word) == 1:
        v = values[word]
    else:
        v = bracket(values[word[0]], _nested(word[1:], values, bracket, cache))
    cache[word] = v
    return v


def bch_terms(x, y, bracket, degree: int):
    """Group the truncated series by bidegree.

    Returns {(p, q): vector} where p counts x letters and q counts y letters,
    so that BCH(s x, t y) = sum s^p t^q vector.
    """
    if degree > MAX_DEGREE:
        raise ClassExceedsTable(f"class {degree} exceeds the shipped degree-{MAX_DEGREE} table")
    values = {"x": x, "y": y}
    cache = {}
    out = {}
    for coef, word in BCH_TABLE:
        if len(word) > degree:
            continue
        key = (word.count("x"), word.count("y"))
        term = coef * _nested(word, values, bracket, cache)
        out[key] = term if key not in out else out[key] + term
    return out


def bch(x, y, bracket, degree: int):
    """log(exp(x) exp(y)) truncated at ``degree``, for any bracket."""
    total = None
    for term in bch_terms(x, y, bracket, degree).values():
        total = term if total is None else total + term
    return total


def bch_product(alg, x, y):
    """The group product x.y of the simply connected group with Lie algebra ``alg``."""
    return bch(np.asarray(x), np.asarray(y), alg.bracket, alg.c)


def inverse(x):
    return -x


def power(alg, x, n: int):
    """x^n; brackets of x with itself vanish so this is n x, computed by squaring to stay honest."""
    if n < 0:
        return power(alg, -x, -n)
    result = np.zeros_like(x)
    base = x
    while n:
        if n & 1:
            result = bch_product(alg, result, base)
        base = bch_product(alg, base, base)
        n >>= 1
    return result


def product(alg, *xs):
    """Left-to-right product x1 x2 ... xk."""
    out = np.zeros_like(xs[0])
    for x in xs:
        out = bch_product(alg, out, x)
    return out


def conjugate_expansion(c: int):
    """Expansion of (-y)(y + z) as right-nested words over {y, z}.

    Substitutes x -> -y and y -> y + z into the table, expands
    multilinearly, combines identical words and drops words that vanish
    formally (equal innermost letters, or no z at all).  Words longer than
    ``c`` are dropped.  Returns {word: coefficient} with nonzero entries.
    """
    if c > MAX_DEGREE:
        raise ClassExceedsTable(f"class {c} exceeds the shipped degree-{MAX_DEGREE} table")
    acc = defaultdict(F)
    for coef, word in BCH_TABLE:
        if len(word) > c:
            continue
        partial = {"": coef}
        for letter in word:
            nxt = defaultdict(F)
            for w, q in partial.items():
                if letter == "x":
                    nxt[w + "y"] += -q
                else:
                    nxt[w + "y"] += q
                    nxt[w + "z"] += q
            partial = nxt
        for w, q in partial.items():
            acc[w] += q
    out = {}
    for w, q in acc.items():
        if q == 0 or "z" not in w:
            continue
        if len(w) >= 2 and w[-1] == w[-2]:
            continue
        out[w] = q
    return dict(sorted(out.items(), key=lambda kv: (len(kv[0]), kv[0])))


def expansion_constant(c: int) -> F:
    """Sum of max(1, |q|) over the coefficients of the (-y)(y + z) expansion."""
    return sum((max(F(1), abs(q)) for q in conjugate_expansion(c).values()), F(0))
