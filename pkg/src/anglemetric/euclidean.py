"""Integer lattices with l1, l2 and l-infinity metrics, their rays, and exact oracles.

Lattice half-lines ``{n v : n >= 0}`` and lines ``{n v : n in Z}`` stand in
for half-lines and lines of R^d.  For them the angle distance has closed
forms: in l2 it is the sine of the angle (capped at a right angle), and in
l1 it is the minimum of a convex piecewise linear function, solved exactly
by enumerating breakpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np

from .cone import TailWindow, s_plus_estimate, s_estimate
from .spaces import CyclicOrbit, PointedSpace, UnboundedSet, WholeSpace


class ZeroVector(ValueError):
    pass


class LatticeSpace(PointedSpace):
    """Z^d with the l^p metric for p in {1, 2, inf}."""

    def __init__(self, dim: int, p, reference=None):
        if p not in (1, 2, math.inf, "inf"):
            raise ValueError(f"unsupported p={p!r}")
        self.p = math.inf if p == "inf" else p
        ref = np.zeros(dim, dtype=np.int64) if reference is None else np.asarray(reference, dtype=np.int64)
        super().__init__(ref)
        tag = {1: "l1", 2: "l2", math.inf: "linf"}[self.p]
        self.name = f"z{dim}-{tag}"

    def pairwise(self, Y, X):
        Y = np.asarray(Y, dtype=np.int64)
        X = np.asarray(X, dtype=np.int64)
        diff = np.abs(Y[:, None, :] - X[None, :, :]).astype(float)
        if self.p == 1:
            return diff.sum(axis=2)
        if self.p == 2:
            return np.sqrt((diff * diff).sum(axis=2))
        return diff.max(axis=2)

    def exact_distance(self, x, y):
        """Exact distance: an int for l1 and l-inf, a float for l2."""
        d = [abs(int(a) - int(b)) for a, b in zip(x, y)]
        if self.p == 1:
            return sum(d)
        if self.p == 2:
            return math.sqrt(sum(t * t for t in d))
        return max(d)

    def vector_norm(self, v) -> float:
        return self.exact_distance([0] * len(v), v)


@dataclass(frozen=True)
class LatticeDirection:
    v: tuple
    sense: str = "halfline"
    reduced: tuple = field(init=False)

    def __post_init__(self):
        if self.sense not in ("halfline", "line"):
            raise ValueError(self.sense)
        if not any(self.v):
            raise ZeroVector("direction must be nonzero")
        g = math.gcd(*(abs(int(t)) for t in self.v))
        object.__setattr__(self, "v", tuple(int(t) for t in self.v))
        object.__setattr__(self, "reduced", tuple(int(t) // g for t in self.v))


class LatticeRay(CyclicOrbit):
    """{n v : n >= 0} (halfline) or {n v : n in Z} (line) in a lattice space.

    Norms are homogeneous along the ray, so slices are computed directly.
    """

    def __init__(self, space: LatticeSpace, v, sense: str = "halfline", label: str = ""):
        v = np.asarray(v, dtype=np.int64)
        if not np.any(v):
            raise ZeroVector("direction must be nonzero")
        self.v = v
        self.direction = LatticeDirection(tuple(v.tolist()), sense)
        super().__init__(space, lambda ns: np.asarray(ns, dtype=np.int64)[:, None] * v[None, :],
                         "semigroup" if sense == "halfline" else "group",
                         label or f"{'H' if sense == 'halfline' else 'L'}{tuple(v.tolist())}")

    def exponents_with_norms(self, r):
        self._check_horizon(r)
        if not np.any(self.space.reference):
            top = int(math.floor(r / self.space.vector_norm(self.v.tolist()) + 1e-9))
            ns = np.arange(0, top + 1, dtype=np.int64)
            if self.sense == "group":
                ns = np.stack([ns, -ns], axis=1).ravel()[1:]
            return ns, self.power_norms(ns)
        return super().exponents_with_norms(r)


def ray(space: LatticeSpace, v, sense: str = "halfline") -> LatticeRay:
    return LatticeRay(space, v, sense)


def whole_lattice(space: LatticeSpace) -> WholeSpace:
    d = space.dim
    ref = space.reference

    def box(r):
        k = int(math.floor(r))
        axes = [np.arange(-k, k + 1, dtype=np.int64)] * d
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        return grid + ref[None, :]

    return WholeSpace(space, box, f"Z{d}")


class PathSet(UnboundedSet):
    """Lattice points of a path through given vertices, joined by monotone staircases.

    ``vertex(k)`` returns the k-th vertex; consecutive vertices are joined by
    moving along the first coordinate, then the second, and so on.  The
    slice stops once the l1 norm of a vertex exceeds the radius; this is
    exact for staircase paths leaving the origin monotonically.
    """

    def __init__(self, space: LatticeSpace, vertex, label: str = "path"):
        super().__init__(space, label)
        self.vertex = vertex

    def slice_with_norms(self, r):
        self._check_horizon(r)
        pts = [np.asarray(self.vertex(0), dtype=np.int64)]
        k = 0
        while True:
            a = pts[-1].copy()
            b = np.asarray(self.vertex(k + 1), dtype=np.int64)
            for axis in range(len(a)):
                step = 1 if b[axis] > a[axis] else -1
                while a[axis] != b[axis]:
                    a = a.copy()
                    a[axis] += step
                    pts.append(a)
            k += 1
            if self.space.norm(b) > r and np.abs(b).sum() > 2 * r:
                break
        P = np.array(pts)
        n = self.space.norms(P)
        keep = n <= r
        return P[keep], n[keep]


def zigzag_ray(space: LatticeSpace) -> PathSet:
    """A geodesic ray of the l1 plane alternating between two slopes at dyadic scales.

    Its vertices are (2^k - 1, 2^k - 1) and (2^(k+1) - 1, 2^k - 1).  It never
    settles on a direction, so it sits at positive distance from every
    half-line.
    """

    def vertex(m):
        k, odd = divmod(m, 2)
        if odd:
            return (2 ** (k + 1) - 1, 2 ** k - 1)
        return (2 ** k - 1, 2 ** k - 1)

    return PathSet(space, vertex, "zigzag")


# ---------------------------------------------------------------------------
# closed forms


def _check(x, y):
    if not any(x) or not any(y):
        raise ZeroVector("directions must be nonzero")


def l2_halfline_s_plus(x, y) -> float:
    """s+ between the half-lines through x and y in l2: sin of the angle, capped at 1."""
    return l2_line_s_exact(x, y, "halfline")


def l2_line_s_exact(x, y, sense: str = "line") -> float:
    """Angle distance s between lines (or half-lines) through x and y in Euclidean space.

    Lines: sine of the smaller angle between them.  Half-lines: sine of the
    angle, replaced by 1 once the angle is at least a right angle.
    """
    _check(x, y)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dot = float(x @ y)
    nx, ny = float(np.linalg.norm(x)), float(np.linalg.norm(y))
    cos = max(-1.0, min(1.0, dot / (nx * ny)))
    if sense == "halfline" and cos <= 0:
        return 1.0
    return math.sqrt(max(0.0, 1.0 - cos * cos))


def _l1_halfline_one_sided(vr, vs) -> Fraction:
    """s+(H_vr, H_vs) in l1: inf over u >= 0 of |u vs - vr|_1 / |vr|_1.

    Points y = n vs are approximated by x = m vr; with u = n/m the ratio
    d(y, x)/|x| is |u vs - vr|_1 / |vr|_1, convex and piecewise linear in u.
    Its infimum over u in [0, inf) is attained at u = 0 or at a breakpoint
    vr_i / vs_i > 0; the value at u -> inf diverges since vs != 0.
    """
    vr = [Fraction(int(t)) for t in vr]
    vs = [Fraction(int(t)) for t in vs]
    nr = sum(abs(t) for t in vr)
    cands = [Fraction(0)]
    for a, b in zip(vr, vs):
        if b != 0 and a / b > 0:
            cands.append(a / b)
    return min(sum(abs(u * b - a) for a, b in zip(vr, vs)) for u in cands) / nr


def l1_s_plus_exact(vr, vs, sense: str = "halfline") -> Fraction:
    """Exact s+(R, S) for lattice rays R through vr and S through vs under l1."""
    _check(vr, vs)
    if sense == "halfline":
        return min(_l1_halfline_one_sided(vr, vs), Fraction(1))
    neg = [-int(t) for t in vr]
    vals = []
    for ys in (vs, [-int(t) for t in vs]):
        vals.append(min(_l1_halfline_one_sided(vr, ys), _l1_halfline_one_sided(neg, ys)))
    return min(max(vals), Fraction(1))


def l1_ray_s_exact(x, y, sense: str = "line") -> Fraction:
    """Exact angle distance s between the l1 rays (or lines) through x and y."""
    return max(l1_s_plus_exact(x, y, sense), l1_s_plus_exact(y, x, sense))


def l2_s_plus_exact(vr, vs, sense: str = "halfline") -> float:
    """s+ in l2 is symmetric: it is the sine expression of :func:`l2_line_s_exact`."""
    return l2_line_s_exact(vr, vs, sense)


def brute_force_s_plus(space: LatticeSpace, vr, vs, n_max: int = 200, m_max: int = 4000,
                       sense: str = "halfline") -> float:
    """Direct grid minimisation over multiples, used to cross-check the closed forms.

    Returns max over n in [n_max/2, n_max] of min over 0 < |m| <= m_max of
    d(n vs, m vr)/|m vr| (negative m and n only in the line sense).
    """
    ns = np.arange(n_max // 2, n_max + 1)
    ms = np.arange(1, m_max + 1)
    if sense == "line":
        ns = np.concatenate([ns, -ns])
        ms = np.concatenate([ms, -ms])
    vr = np.asarray(vr, dtype=np.int64)
    vs = np.asarray(vs, dtype=np.int64)
    Y = ns[:, None] * vs[None, :]
    X = ms[:, None] * vr[None, :]
    D = space.pairwise(Y, X) / space.norms(X)[None, :]
    return float(min(1.0, D.min(axis=1).max()))


# ---------------------------------------------------------------------------
# direction samples


def primitive_directions(bound: int = 8, dim: int = 2):
    """Primitive integer vectors with coordinates in [-bound, bound], sorted by angle (2d)."""
    out = []
    for v in product(range(-bound, bound + 1), repeat=dim):
        if any(v) and math.gcd(*(abs(t) for t in v)) == 1:
            out.append(v)
    if dim == 2:
        out.sort(key=lambda v: math.atan2(v[1], v[0]) % (2 * math.pi))
    return out


def even_directions(count: int, bound: int = 8):
    """``count`` primitive planar directions closest to evenly spaced angles.

    Candidates come from the Farey-type set of primitive vectors with
    coordinates bounded by ``bound``.  For even counts the second half is
    the negative of the first, so antipodal pairs are exact.
    """
    cands = primitive_directions(bound, 2)
    ang = np.array([math.atan2(v[1], v[0]) for v in cands])
    chosen = []
    half = count // 2 if count % 2 == 0 else count
    for k in range(half):
        target = 2 * math.pi * k / count
        diff = np.abs((ang - target + math.pi) % (2 * math.pi) - math.pi)
        order = np.lexsort((np.array([abs(a) + abs(b) for a, b in cands]), diff))
        for j in order:
            if cands[j] not in chosen:
                chosen.append(cands[j])
                break
    if half < count:
        chosen += [(-a, -b) for a, b in chosen]
    return chosen


def angle(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    c = float(x @ y) / float(np.linalg.norm(x) * np.linalg.norm(y))
    return math.acos(max(-1.0, min(1.0, c)))


# ---------------------------------------------------------------------------
# boundary of a lattice


@dataclass
class BoundaryReport:
    directions: list
    t_hat: np.ndarray
    t_oracle: np.ndarray
    saturated: np.ndarray
    max_deviation: float
    components: list
    threshold: float
    connecting_threshold: float
    classes: int

    @property
    def connected(self) -> bool:
        return len(self.components) == 1


def single_linkage(M: np.ndarray, theta: float):
    """Connected components of the graph joining i, j whenever M[i, j] <= theta."""
    n = len(M)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if M[i, j] <= theta:
                parent[find(i)] = find(j)
    comps = {}
    for i in range(n):
        comps.setdefault(find(i), []).append(i)
    return sorted(comps.values(), key=lambda c: c[0])


def connecting_threshold(M: np.ndarray) -> float:
    """Smallest theta at which single linkage yields one component (largest MST edge)."""
    n = len(M)
    if n <= 1:
        return 0.0
    best = np.full(n, np.inf)
    used = np.zeros(n, dtype=bool)
    best[0] = 0.0
    top = 0.0
    for _ in range(n):
        i = int(np.argmin(np.where(used, np.inf, best)))
        used[i] = True
        top = max(top, float(best[i]))
        best = np.minimum(best, M[i])
    return top


def lattice_boundary_check(dim: int, n_dirs: int = 16, window: TailWindow = TailWindow(100, 1000),
                           sense: str = "halfline", p=2, theta: float = 0.3, bound: int = 8) -> BoundaryReport:
    """Compare the estimated t-matrix of sampled directions of Z^dim with the sphere metric.

    The oracle is sqrt(sin(min(pi/2, angle))) for half-lines and
    sqrt(sin(angle between lines)) for lines.  ``classes`` counts the
    directions up to t-distance zero (within 0.03).
    """
    space = LatticeSpace(dim, p)
    if dim == 1:
        dirs = [(1,), (-1,)]
    elif dim == 2:
        dirs = even_directions(n_dirs, bound)
    else:
        rng = np.random.default_rng(0)
        pool = primitive_directions(3, dim)
        dirs = [pool[i] for i in sorted(rng.choice(len(pool), size=n_dirs, replace=False))]
    sets = [LatticeRay(space, v, sense) for v in dirs]
    n = len(dirs)
    T = np.zeros((n, n))
    O = np.zeros((n, n))
    sat = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(i + 1, n):
            est = s_estimate(sets[i], sets[j], window)
            T[i, j] = T[j, i] = math.sqrt(est.value)
            sat[i, j] = sat[j, i] = est.saturated
            if dim == 1:
                o = 0.0 if (sense == "line" or dirs[i] == dirs[j]) else 1.0
            else:
                o = l2_line_s_exact(dirs[i], dirs[j], sense)
            O[i, j] = O[j, i] = math.sqrt(o)
    comps = single_linkage(T, theta)
    classes = len(single_linkage(T, 0.03))
    return BoundaryReport(dirs, T, O, sat, float(np.max(np.abs(T - O))) if n > 1 else 0.0,
                          comps, theta, connecting_threshold(T), classes)
