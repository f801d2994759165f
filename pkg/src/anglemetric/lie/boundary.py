"""Angle distances between one-parameter subgroups of a nilpotent Lie group.

Two flavours compare the rays {n x} and {n y}:

* additive: distances |v - u| in the vector space, with closed forms;
* multiplicative: distances |u^-1 v| through the group law, estimated on a
  tail window of exponents.

The inequality checks below bound products y^-n x^n for nearby x, y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..cone import DistanceEstimate, TailWindow
from .bch import bch_product, bch_terms, expansion_constant
from .gauge import Gauge


class CaseNotCovered(ValueError):
    pass


# ---------------------------------------------------------------------------
# additive closed form


def _layer_sine(u, v, sense):
    """sin of the angle between two blocks; sin^2 is rational, so only the final root is inexact."""
    u = [Fraction(t) for t in u]
    v = [Fraction(t) for t in v]
    dot = sum(a * b for a, b in zip(u, v))
    if sense == "halfline" and dot <= 0:
        return 1.0
    sin2 = 1 - dot * dot / (sum(a * a for a in u) * sum(b * b for b in v))
    return math.sqrt(sin2)


def additive_case(alg, x, y) -> str:
    """Which closed form applies to the pair: coset, deeper, same-layer or none."""
    i, j = alg.depth(x), alg.depth(y)
    if i > alg.c or j > alg.c:
        raise ValueError("vectors must be nonzero")
    if j > i:
        return "deeper"
    if i == j:
        d = x - y
        if all(v == 0 for v in alg.block(d, i)):
            return "coset"
        return "same-layer"
    return "none"


def s_plus_additive_exact(alg, x, y, sense: str = "halfline") -> DistanceEstimate:
    """Exact s+ between the additive rays through x and y.

    Let x lie in g_i but not g_{i+1}.  If y has the same leading block the
    value is 0; if y lies deeper it is 1; if y has a different leading block
    in the same layer it is sin(angle between the leading blocks) ** (1/i),
    with the angle capped at a right angle for half-lines.  Anything else
    raises CaseNotCovered.
    """
    case = additive_case(alg, x, y)
    if case == "coset":
        return DistanceEstimate.exact(0.0)
    if case == "deeper":
        return DistanceEstimate.exact(1.0)
    if case == "same-layer":
        i = alg.depth(x)
        s = _layer_sine(alg.block(x, i), alg.block(y, i), sense)
        return DistanceEstimate.exact(s ** (1.0 / i))
    raise CaseNotCovered("x lies deeper than y; no closed form is provided for this order")


# ---------------------------------------------------------------------------
# multiplicative estimate


def _poly_grid(terms, ns, ms, scale):
    """Integer coordinates of sum_{p,q} n^p m^q V_pq on the (n, m) grid.

    ``terms`` maps (p, q) to integer vectors (already multiplied by
    ``scale``).  Uses int64 when the magnitudes provably fit, Python ints
    otherwise.
    """
    nmax, mmax = int(np.max(np.abs(ns))), int(np.max(np.abs(ms)))
    bound = sum(max(abs(int(c)) for c in v) * nmax ** p * mmax ** q for (p, q), v in terms.items())
    dtype = np.int64 if bound < 2 ** 62 else object
    N = np.asarray(ns, dtype=dtype)[:, None]
    M = np.asarray(ms, dtype=dtype)[None, :]
    dim = len(next(iter(terms.values())))
    out = [np.zeros((len(ns), len(ms)), dtype=dtype) for _ in range(dim)]
    for (p, q), v in terms.items():
        mono = (N ** p) * (M ** q)
        for k in range(dim):
            if v[k] != 0:
                out[k] = out[k] + int(v[k]) * mono
    return out


def s_plus_mult_estimate(alg, x, y, N: int, K: float = 10.0, gauge_obj: Gauge = None,
                         sense: str = "semigroup") -> DistanceEstimate:
    """Tail estimate of the multiplicative s+ between the subgroups through x and y.

    For n in [N/2, N] take the minimum over 1 <= m <= K N of
    |y^-n x^m| / |x^m|, then the maximum over n.  Group products are exact:
    the truncated series for (-n y)(m x) is a polynomial in n and m whose
    coefficients are computed once with rational arithmetic.  Only the final
    roots are taken in floating point.  In the group sense, negative n and m
    are included.
    """
    if gauge_obj is None:
        gauge_obj = Gauge(alg)
    x = np.asarray(x)
    y = np.asarray(y)
    if alg.depth(x) > alg.c or alg.depth(y) > alg.c:
        raise ValueError("vectors must be nonzero")
    terms = bch_terms(-y, x, alg.bracket, alg.c)
    den = 1
    for v in terms.values():
        for t in v:
            den = den * Fraction(t).denominator // math.gcd(den, Fraction(t).denominator)
    iterms = {k: [int(Fraction(t) * den) for t in v] for k, v in terms.items()}
    ns = np.arange((N + 1) // 2, N + 1)
    mtop = int(K * N)
    ms = np.arange(1, mtop + 1)
    if sense == "group":
        ns = np.concatenate([ns, -ns])
        ms = np.concatenate([ms, -ms])
    coords = _poly_grid(iterms, ns, ms, den)
    squares = []
    for n in range(1, alg.c + 1):
        blk = alg.blocks[n - 1]
        s = sum(np.asarray(coords[k], dtype=float) ** 2 for k in range(blk.start, blk.stop))
        squares.append(s / float(den) ** 2)
    num = gauge_obj.from_squares(squares)
    gx = gauge_obj.batch(np.array([x * int(m) for m in ms], dtype=object))
    ratio = num / gx[None, :]
    inner = ratio.min(axis=1)
    # beyond the cap |x^m| grows, so ratios there are at least 1 - (|y^n| + slack)/|x^cap|
    gy = gauge_obj.batch(np.array([y * int(n) for n in ns], dtype=object))
    slack = gauge_obj.alpha if gauge_obj.alpha is not None else 1.0
    level = 1.0 - (gy + slack) / gauge_obj(x * mtop)
    raw = float(inner.max())
    outer = np.abs(ns) >= N / math.sqrt(2)
    spread = max(0.0, min(raw, 1.0) - min(float(inner[outer].max()), 1.0))
    i = int(np.argmax(inner))
    j = int(np.argmin(ratio[i]))
    return DistanceEstimate(min(raw, 1.0), "estimate", TailWindow(N / 2, N, K), bool(np.any(inner >= level)),
                            spread, raw, (int(ns[i]), int(ms[j])))


# ---------------------------------------------------------------------------
# constants


def bracket_constant(alg, gauge_obj: Gauge) -> float:
    """A certified M >= 1 with ||(x, y)|| <= M ||x|| ||y|| for the max-layer norm.

    ||v|| = max_n lambda_n ||pi_n v||_2.  For each output layer k, the block
    of the bracket is a sum over i + j = k of bilinear maps on the rescaled
    blocks, each bounded by the Frobenius norm of its rescaled structure
    constants; summing those bounds over (i, j) bounds layer k.
    """
    lam = [float(s) for s in gauge_obj.scales]
    deg = alg.degree
    acc = {}
    for i, j, k, _, c in alg.table:
        a, b, t = int(deg[i]), int(deg[j]), int(deg[k])
        w = c * lam[t - 1] / (lam[a - 1] * lam[b - 1])
        # both orderings (e_i, e_j) and (e_j, e_i) carry this constant
        for key in ((a, b, t), (b, a, t)):
            acc[key] = acc.get(key, 0.0) + w * w
    per_layer = {}
    for (a, b, t), fro2 in acc.items():
        per_layer[t] = per_layer.get(t, 0.0) + math.sqrt(fro2)
    return max([1.0] + list(per_layer.values()))


def expansion_sum(alg) -> float:
    return float(expansion_constant(alg.c))


# ---------------------------------------------------------------------------
# inequality checks


@dataclass
class BoundReport:
    name: str
    holds: bool
    instances: int
    min_margin: float
    worst: tuple = field(default=None)

    def __bool__(self):
        return self.holds


def _power_products(alg, x, y, ns):
    """y^-n x^n for each n: the series for (-n y)(n x) is a polynomial in n.

    Exact for object input, float for float input.
    """
    by_degree = {}
    for (p, q), vec in bch_terms(-y, x, alg.bracket, alg.c).items():
        d = p + q
        by_degree[d] = vec if d not in by_degree else by_degree[d] + vec
    degrees = sorted(by_degree)
    exact = np.asarray(x).dtype == object
    W = np.array([by_degree[d] for d in degrees], dtype=object if exact else float)
    if exact:
        P = np.array([[int(n) ** d for d in degrees] for n in ns], dtype=object)
    else:
        P = np.asarray(ns, dtype=float)[:, None] ** np.array(degrees, dtype=float)[None, :]
    return P.dot(W)


def coset_power_check(alg, gauge_obj: Gauge, pairs, n_max: int = 500) -> BoundReport:
    """|y^-n x^n| <= 2^(c-1) Q (c|x| + c|y| + 2) n^((1 - 1/c)/i) for x, y with equal leading block.

    ``pairs`` is a list of (x, y) with x, y in g_i and x - y in g_{i+1}.
    Requires a gauge satisfying the rescaled triangle inequality with slack 1.
    """
    c = alg.c
    Q = expansion_sum(alg)
    ns = np.arange(0, n_max + 1)
    worst = None
    margin = math.inf
    for x, y in pairs:
        i = alg.depth(x)
        if alg.depth(y) != i or any(v != 0 for v in alg.block(x - y, i)):
            raise ValueError("pair does not share its leading block")
        lhs = gauge_obj.batch(_power_products(alg, x, y, ns))
        rhs = 2 ** (c - 1) * Q * (c * gauge_obj(x) + c * gauge_obj(y) + 2) * ns.astype(float) ** ((1 - 1 / c) / i)
        m = rhs - lhs
        k = int(np.argmin(m))
        if m[k] < margin:
            margin, worst = float(m[k]), (x, y, int(ns[k]))
    holds = margin >= -1e-9
    return BoundReport("coset-power", holds, len(pairs), margin, worst)


def proximity_power_check(alg, gauge_obj: Gauge, pairs, n_max: int = 500) -> BoundReport:
    """|y^-n x^n| <= M Q alpha^(i/c) |x^n| for x, y in V_i with |x| >= |y| = 1 and |x - y| = alpha |x|.

    Float evaluation (the normalisation |y| = 1 is irrational in general);
    the comparison allows a relative 1e-9.
    """
    c = alg.c
    M = bracket_constant(alg, gauge_obj)
    Q = expansion_sum(alg)
    ns = np.arange(0, n_max + 1, dtype=float)
    margin = math.inf
    worst = None
    for x, y in pairs:
        i = alg.in_layer(x)
        if i is None or alg.in_layer(y) != i:
            raise ValueError("pairs must lie in a common layer")
        gx = float(gauge_obj.batch(x[None, :])[0])
        alpha = float(gauge_obj.batch((x - y)[None, :])[0]) / gx
        lhs = gauge_obj.batch(_power_products(alg, x, y, ns))
        gxn = gauge_obj.batch(ns[:, None] * np.asarray(x, dtype=float)[None, :])
        rhs = M * Q * alpha ** (i / c) * gxn
        m = rhs - lhs
        tol = 1e-9 * np.maximum(1.0, rhs)
        k = int(np.argmin(m + tol))
        if m[k] + tol[k] < margin:
            margin, worst = float(m[k] + tol[k]), (x, y, int(ns[k]))
    return BoundReport("proximity-power", margin >= 0, len(pairs), margin, worst)


def sandwich_check(alg, gauge_obj: Gauge, pairs, N: int = 200, K: float = 10.0, sense: str = "halfline") -> BoundReport:
    """s_a <= estimated s_m <= M Q s_a^(i/c) for pairs in a common layer V_i.

    The lower bound is compared without tolerance: at every exponent the
    minimised ratio already dominates the additive value.
    """
    M = bracket_constant(alg, gauge_obj)
    Q = expansion_sum(alg)
    margin = math.inf
    worst = None
    for x, y in pairs:
        i = alg.in_layer(x)
        if i is None or alg.in_layer(y) != i:
            raise ValueError("pairs must lie in a common layer")
        sa = s_plus_additive_exact(alg, x, y, sense).value
        sm = s_plus_mult_estimate(alg, x, y, N, K, gauge_obj, "semigroup" if sense == "halfline" else "group").value
        upper = M * Q * sa ** (i / alg.c)
        m = min(sm - sa, upper - sm) + 1e-12
        if m < margin:
            margin, worst = m, (x, y, sa, sm, upper)
    return BoundReport("sandwich", margin >= 0, len(pairs), margin, worst)


def kfold_gauge_check(alg, gauge_obj: Gauge, tuples) -> BoundReport:
    """|(x1, ..., xk)| <= 2^(k-1) (|x1| + ... + |xk|) + 2^k on sampled tuples."""
    margin = math.inf
    worst = None
    for xs in tuples:
        k = len(xs)
        lhs = gauge_obj(alg.kfold(*xs))
        rhs = 2 ** (k - 1) * sum(gauge_obj(x) for x in xs) + 2 ** k
        if rhs - lhs < margin:
            margin, worst = rhs - lhs, xs
    return BoundReport("kfold", margin >= -1e-12, len(tuples), margin, worst)


def inequality_check(which: str, alg, gauge_obj: Gauge, sample, **kw) -> BoundReport:
    checks = {"coset-power": coset_power_check, "proximity-power": proximity_power_check,
              "sandwich": sandwich_check, "kfold": kfold_gauge_check}
    if which not in checks:
        raise ValueError(f"unknown check {which!r}; choose from {', '.join(checks)}")
    return checks[which](alg, gauge_obj, sample, **kw)
