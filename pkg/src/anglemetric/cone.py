"""Cones around unbounded sets and the angle distances built from them.

For unbounded sets R, S of a pointed space, ``s_plus(R, S)`` is the least
linear factor alpha such that S eventually lies in the cone
``alpha R + a``, i.e. in the union of balls ``B(x, alpha * |x| + a)`` over
``x`` in R.  It equals the limsup over ``y`` in S of

    inner_ratio(y, R) = inf_{x in R, |x| > 0} d(y, x) / |x|,

which is what the estimators below evaluate on a finite tail window.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .spaces import EmptyWindow, HorizonExceeded, PointedSpace, UnboundedSet, unique_rows


class UndecidableAtHorizon(RuntimeError):
    """The finite-window estimate is too close to the threshold to decide."""


@dataclass(frozen=True)
class ConeParams:
    alpha: float
    a: float = 0.0

    def __post_init__(self):
        if self.alpha < 0 or self.a < 0:
            raise ValueError("cone parameters must be nonnegative")


@dataclass(frozen=True)
class TailWindow:
    r_min: float
    r_max: float
    K: float = 10.0

    def __post_init__(self):
        if not (0 <= self.r_min < self.r_max):
            raise ValueError(f"need 0 <= r_min < r_max, got [{self.r_min}, {self.r_max}]")
        if self.K < 2:
            raise ValueError("cap factor K must be at least 2")

    @classmethod
    def default(cls, r: float, K: float = 10.0) -> "TailWindow":
        return cls(r, 10 * r, K)

    def outer(self) -> "TailWindow":
        """The upper half of the window on a logarithmic scale."""
        lo = math.sqrt(self.r_min * self.r_max) if self.r_min > 0 else self.r_max / 2
        return TailWindow(lo, self.r_max, self.K)


@dataclass
class DistanceEstimate:
    """A value of s+, s or t, either exact (closed form) or a tail estimate.

    ``spread`` is the window error: how much the tail maximum drops when the
    window is shrunk to its outer half.  It is zero for exact values.
    """

    value: float
    kind: str = "estimate"
    window: Optional[TailWindow] = None
    saturated: bool = False
    spread: float = 0.0
    raw: float = float("nan")
    witness: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in ("exact", "estimate"):
            raise ValueError(self.kind)
        if self.kind == "exact" and self.window is not None:
            raise ValueError("exact values carry no window")
        if not (0.0 <= self.value <= 1.0):
            raise ValueError(f"value {self.value} outside [0, 1]")

    @classmethod
    def exact(cls, value) -> "DistanceEstimate":
        v = float(value)
        return cls(v, "exact", None, False, 0.0, v)

    def __float__(self):
        return float(self.value)


# ---------------------------------------------------------------------------
# inner ratios


def _ratio_row(space, y, X, nX):
    d = space.pairwise(y[None, :], X)[0]
    return d / nX


def min_ratios(space: PointedSpace, Y, nY, X, nX, caps, seed_width: int = 48):
    """For each row y of Y, the minimum of d(y, x)/|x| over x in X with 0 < |x| <= cap.

    X is taken in enumeration order; among minimisers the smallest index is
    returned.  When the space guarantees a triangle inequality with slack s,
    the bound ``d(y, x) >= | |x| - |y| | - s`` restricts the search to a norm
    band around |y| once a first candidate value is known.
    """
    order = np.argsort(nX, kind="stable")
    sn = nX[order]
    slack = space.triangle_slack
    lo_pos = int(np.searchsorted(sn, 0.0, side="right"))
    vals = np.full(len(Y), np.inf)
    wit = np.full(len(Y), -1, dtype=np.int64)
    for i in range(len(Y)):
        ny, cap = float(nY[i]), float(caps[i])
        hi_pos = int(np.searchsorted(sn, cap, side="right"))
        if hi_pos <= lo_pos:
            continue
        if slack is None or hi_pos - lo_pos <= 4 * seed_width:
            pos = np.arange(lo_pos, hi_pos)
        else:
            p = int(np.searchsorted(sn, ny))
            seed = np.arange(max(lo_pos, p - seed_width), min(hi_pos, p + seed_width))
            if len(seed) == 0:
                seed = np.arange(max(lo_pos, hi_pos - seed_width), hi_pos)
            v0 = float(np.min(_ratio_row(space, Y[i], X[order[seed]], sn[seed])))
            lo_n = (ny - slack) / (1.0 + v0)
            hi_n = (ny + slack) / (1.0 - v0) if v0 < 1.0 else cap
            a = max(lo_pos, int(np.searchsorted(sn, lo_n, side="left")))
            b = min(hi_pos, int(np.searchsorted(sn, hi_n, side="right")))
            pos = np.arange(a, b)
            if len(pos) == 0:
                pos = seed
        idx = order[pos]
        r = _ratio_row(space, Y[i], X[idx], nX[idx])
        m = float(np.min(r))
        vals[i] = m
        if np.isfinite(m):
            wit[i] = int(np.min(idx[r == m]))
    return vals, wit


def inner_ratio(y, R: UnboundedSet, K: float = 10.0, with_flag: bool = False):
    """min over x in R with 0 < |x| <= K|y| of d(y, x)/|x|.

    With ``with_flag`` the pair (value, saturated) is returned, where
    ``saturated`` means the value is at or above the level the cap can certify.
    """
    space = R.space
    y = np.asarray(y, dtype=space.reference.dtype)
    ny = space.norm(y)
    if not ny > 0:
        raise ValueError("inner_ratio needs a point with positive norm")
    cap = min(K * ny, R.horizon)
    X, nX = R.slice_with_norms(cap)
    if not np.any(nX > 0):
        raise EmptyWindow("empty slice")
    vals, _ = min_ratios(space, y[None, :], np.array([ny]), X, nX, np.array([cap]))
    v = float(vals[0])
    if with_flag:
        return v, bool(v >= saturation_level(space, ny, cap))
    return v


def saturation_level(space, ny, cap):
    """Ratios at or above this level may be artefacts of the search cap."""
    slack = space.triangle_slack or 0.0
    if cap <= 0:
        return 0.0
    return 1.0 - (ny + slack) / cap


# ---------------------------------------------------------------------------
# tail estimators


def _tail_ratios(R: UnboundedSet, S: UnboundedSet, w: TailWindow, workers: int = 1):
    space = S.space
    Y, nY = S.slice_with_norms(w.r_max)
    keep = (nY >= w.r_min) & (nY > 0)
    Y, nY = Y[keep], nY[keep]
    if len(Y) == 0:
        raise EmptyWindow(f"no points of {S.label or S!r} with norm in [{w.r_min}, {w.r_max}]")
    top = min(w.K * float(nY.max()), R.horizon)
    X, nX = R.slice_with_norms(top)
    caps = np.minimum(w.K * nY, R.horizon)
    if workers > 1 and len(Y) > 256:
        chunks = np.array_split(np.arange(len(Y)), workers)
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(lambda c: min_ratios(space, Y[c], nY[c], X, nX, caps[c]), chunks))
        vals = np.concatenate([p[0] for p in parts])
        wit = np.concatenate([p[1] for p in parts])
    else:
        vals, wit = min_ratios(space, Y, nY, X, nX, caps)
    levels = np.array([saturation_level(space, a, b) for a, b in zip(nY, caps)])
    return nY, vals, wit, levels, Y, X


def s_plus_estimate(R: UnboundedSet, S: UnboundedSet, w: TailWindow, workers: int = 1) -> DistanceEstimate:
    """Tail estimate of s+(R, S): how well R approximates S, linearly."""
    nY, vals, wit, levels, Y, X = _tail_ratios(R, S, w, workers)
    sat = vals >= levels
    raw = float(np.max(vals))
    i = int(np.argmax(vals))
    outer = nY >= w.outer().r_min
    raw_outer = float(np.max(vals[outer])) if np.any(outer) else raw
    spread = max(0.0, min(raw, 1.0) - min(raw_outer, 1.0))
    witness = (tuple(Y[i].tolist()), tuple(X[wit[i]].tolist()) if wit[i] >= 0 else None)
    return DistanceEstimate(min(raw, 1.0), "estimate", w, bool(np.any(sat)), spread, raw, witness)


def s_estimate(R, S, w: TailWindow, workers: int = 1) -> DistanceEstimate:
    a = s_plus_estimate(R, S, w, workers)
    b = s_plus_estimate(S, R, w, workers)
    top = a if a.value >= b.value else b
    return DistanceEstimate(max(a.value, b.value), "estimate", w, a.saturated or b.saturated,
                            max(a.spread, b.spread), max(a.raw, b.raw), top.witness)


def t_estimate(R, S, w: TailWindow, workers: int = 1) -> DistanceEstimate:
    s = s_estimate(R, S, w, workers)
    return sqrt_estimate(s)


def sqrt_estimate(s: DistanceEstimate) -> DistanceEstimate:
    spread = math.sqrt(s.value) - math.sqrt(max(0.0, s.value - s.spread))
    return DistanceEstimate(math.sqrt(s.value), s.kind, s.window, s.saturated, spread, s.raw, s.witness)


# ---------------------------------------------------------------------------
# triangle inequalities


@dataclass
class TriangleReport:
    s_rs: float
    s_st: float
    s_rt: float
    tol: float
    plain: bool = field(init=False)
    weak: bool = field(init=False)
    t_triangle: bool = field(init=False)

    def __post_init__(self):
        a, b, c, tol = self.s_rs, self.s_st, self.s_rt, self.tol
        self.plain = c <= a + b + tol
        self.weak = c <= a + a * b + b + tol
        self.t_triangle = math.sqrt(c) <= math.sqrt(a) + math.sqrt(b) + math.sqrt(tol)

    def __bool__(self):
        return self.weak and self.t_triangle


def triangle_report(s_rs, s_st, s_rt, tol: float = 0.0) -> TriangleReport:
    """Check the weak inequality s(R,T) <= s(R,S) + s(R,S)s(S,T) + s(S,T) and the t-triangle."""
    return TriangleReport(float(s_rs), float(s_st), float(s_rt), float(tol))


def weak_triangle_check(R, S, T, w: TailWindow, tol: float = 0.0, workers: int = 1) -> TriangleReport:
    """Estimate the three pairwise s values and check both triangle inequalities.

    The tolerance is widened by the sum of the three window errors.
    """
    e_rs = s_estimate(R, S, w, workers)
    e_st = s_estimate(S, T, w, workers)
    e_rt = s_estimate(R, T, w, workers)
    err = e_rs.spread + e_st.spread + e_rt.spread
    return triangle_report(e_rs.value, e_st.value, e_rt.value, tol + err)


# ---------------------------------------------------------------------------
# cone containment


def cone_contains(S: UnboundedSet, R: UnboundedSet, p: ConeParams, horizon: float, K: float = 10.0) -> bool:
    """Whether every point of S up to ``horizon`` lies in the cone ``alpha R + a``.

    Candidate centres are the points of R up to ``K * horizon``.
    """
    space = S.space
    Y, _ = S.slice_with_norms(horizon)
    top = min(K * horizon, R.horizon)
    X, nX = R.slice_with_norms(top)
    if len(X) == 0:
        return len(Y) == 0
    radius = p.alpha * nX + p.a
    for start in range(0, len(Y), 512):
        D = space.pairwise(Y[start:start + 512], X)
        if not np.all(np.any(D <= radius[None, :] + 1e-12, axis=1)):
            return False
    return True


# ---------------------------------------------------------------------------
# quasi-isometries


@dataclass
class QuasiIsometry:
    """A map between pointed spaces with q^-1 d - q <= d(f, f) <= q d + q."""

    map: Callable[[np.ndarray], np.ndarray]
    q: float
    source: PointedSpace
    target: PointedSpace

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("q must be at least 1")

    def __call__(self, X):
        return self.map(self.source.as_points(X))

    def check(self, X, tol: float = 1e-12) -> bool:
        """Verify both quasi-isometry bounds on all pairs of the sample X."""
        X = self.source.as_points(X)
        FX = self(X)
        d = self.source.pairwise(X, X)
        e = self.target.pairwise(FX, FX)
        return bool(np.all(e >= d / self.q - self.q - tol) and np.all(e <= self.q * d + self.q + tol))


class ImageSet(UnboundedSet):
    """f(R) for a quasi-isometry f, with slices pulled back through the q-bounds."""

    def __init__(self, f: QuasiIsometry, R: UnboundedSet, label: str = ""):
        super().__init__(f.target, label or f"f({R.label})")
        self.f = f
        self.R = R
        self._shift = f.target.distance(f.target.reference, f(f.source.reference[None, :])[0])
        self.horizon = R.horizon / f.q - self._shift - f.q if math.isfinite(R.horizon) else math.inf

    def slice_with_norms(self, r):
        self._check_horizon(r)
        q = self.f.q
        pre = min(q * (r + self._shift + q), self.R.horizon)
        X = self.R.slice(pre)
        FX = unique_rows(self.f(X))
        n = self.space.norms(FX)
        keep = n <= r
        return FX[keep], n[keep]


def pushforward(f: QuasiIsometry, R: UnboundedSet) -> UnboundedSet:
    return ImageSet(f, R)


# ---------------------------------------------------------------------------
# neighbourhoods and growth constants


def neighborhood_contains(xi_rep: UnboundedSet, alpha: float, r: float, probe, w: TailWindow,
                          margin: Optional[float] = None) -> bool:
    """Membership in the neighbourhood N(xi, alpha, r) of a boundary point.

    A point probe belongs when it lies in the interior of ``alpha R`` and has
    norm at least r.  In discrete spaces the interior is the set itself; in
    continuous samples ``margin`` makes the inequality strict.  A set probe
    zeta belongs when the estimate of s+(xi, zeta) is below alpha and not
    saturated.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    space = xi_rep.space
    if isinstance(probe, UnboundedSet):
        est = s_plus_estimate(xi_rep, probe, w)
        if abs(est.value - alpha) <= est.spread:
            raise UndecidableAtHorizon(f"estimate {est.value:.4f} within {est.spread:.4f} of {alpha}")
        return bool(est.value < alpha and not est.saturated)
    if margin is None:
        margin = 0.0 if space.discrete else 1.0
    p = np.asarray(probe, dtype=space.reference.dtype)
    npn = space.norm(p)
    if npn < r:
        return False
    # x with alpha |x| >= d(p, x) >= |p| - |x| needs |x| >= |p| / (1 + alpha)
    top = min(w.K * max(npn, 1.0), xi_rep.horizon)
    X, nX = xi_rep.slice_with_norms(top)
    d = space.pairwise(p[None, :], X)[0]
    if margin > 0:
        return bool(np.any(d < alpha * nX - margin))
    return bool(np.any(d <= alpha * nX))


def growth_constant_check(power_norms: Callable[[np.ndarray], np.ndarray], C: float, horizon: int) -> bool:
    """Whether |g^m| <= C |g^n| + C for all 0 <= m <= n <= horizon.

    ``power_norms`` maps exponents to norms.  Unresolvable norms raise.
    """
    ns = np.arange(horizon + 1)
    nr = np.asarray(power_norms(ns), dtype=float)
    if not np.all(np.isfinite(nr)):
        raise HorizonExceeded("power norms beyond the available horizon")
    running = np.maximum.accumulate(nr)
    return bool(np.all(running <= C * nr + C + 1e-12))


def orbit_growth_check(orbit, C: float, horizon: int) -> bool:
    """Growth-constant check for a cyclic orbit, through the norms of its powers."""
    return growth_constant_check(orbit.power_norms, C, horizon)
