"""The discrete Heisenberg group in Mal'tsev coordinates.

Elements are integer triples (a, b, c) with

    (a, b, c) (a', b', c') = (a + a', b + b', c + c' + a b'),

the law of upper triangular integer 3x3 matrices.  Under
(a, b, c) -> a e1 + b e2 + (c - a b / 2) e3 it becomes the truncated
Baker-Campbell-Hausdorff law of the Heisenberg Lie algebra.

Word lengths come from a breadth-first search over a dense box.  Lengths
beyond the searched radius are unknown and reported as ``inf``.
"""

from __future__ import annotations

import hashlib
import math
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .cone import TailWindow, s_estimate
from .euclidean import connecting_threshold, l2_line_s_exact, single_linkage
from .lie.algebra import heisenberg3
from .lie.gauge import Gauge
from .spaces import CyclicOrbit, HorizonExceeded, PointedSpace

STANDARD_GENERATORS = ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0))
CACHE_ENV = "ANGLEMETRIC_CACHE"
MAGIC = b"AMWORDLEN"
FORMAT_VERSION = 1


class MemoryBudgetExceeded(MemoryError):
    pass


# ---------------------------------------------------------------------------
# group law (vectorised over rows)


def multiply(g, h):
    g = np.asarray(g, dtype=np.int64)
    h = np.asarray(h, dtype=np.int64)
    a = g[..., 0] + h[..., 0]
    b = g[..., 1] + h[..., 1]
    c = g[..., 2] + h[..., 2] + g[..., 0] * h[..., 1]
    return np.stack([a, b, c], axis=-1)


def inverse(g):
    g = np.asarray(g, dtype=np.int64)
    return np.stack([-g[..., 0], -g[..., 1], -g[..., 2] + g[..., 0] * g[..., 1]], axis=-1)


def power(g, n):
    """g^n = (n a, n b, n c + a b n (n - 1) / 2); ``n`` may be an array (result rows)."""
    g = np.asarray(g, dtype=np.int64)
    n = np.asarray(n, dtype=np.int64)
    a, b, c = int(g[0]), int(g[1]), int(g[2])
    return np.stack([n * a, n * b, n * c + a * b * (n * (n - 1) // 2)], axis=-1)


def relative(Y, X):
    """Matrix of y^-1 x for all rows y of Y and x of X, shape (len(Y), len(X), 3)."""
    Y = np.asarray(Y, dtype=np.int64)[:, None, :]
    X = np.asarray(X, dtype=np.int64)[None, :, :]
    da = X[..., 0] - Y[..., 0]
    db = X[..., 1] - Y[..., 1]
    dc = X[..., 2] - Y[..., 2] - Y[..., 0] * db
    return np.stack([da, db, dc], axis=-1)


def to_lie(g):
    """Log coordinates a e1 + b e2 + (c - a b / 2) e3 as exact Fractions."""
    a, b, c = (int(t) for t in g)
    return np.array([Fraction(a), Fraction(b), Fraction(c) - Fraction(a * b, 2)], dtype=object)


def from_lie(v):
    a, b, z = (Fraction(t) for t in v)
    c = z + a * b / 2
    if a.denominator != 1 or b.denominator != 1 or c.denominator != 1:
        raise ValueError("vector is not the logarithm of a lattice point")
    return np.array([int(a), int(b), int(c)], dtype=np.int64)


def swap(g):
    """The automorphism exchanging the two standard generators: (a, b, c) -> (b, a, ab - c)."""
    g = np.asarray(g, dtype=np.int64)
    return np.stack([g[..., 1], g[..., 0], g[..., 0] * g[..., 1] - g[..., 2]], axis=-1)


# ---------------------------------------------------------------------------
# word lengths


def _gens_key(gens) -> str:
    return hashlib.sha256(repr(tuple(tuple(int(t) for t in g) for g in gens)).encode()).hexdigest()[:16]


class WordMetricTable:
    """Word lengths |g| for all g with |g| <= radius, from breadth-first search.

    The table is a dense int16 array over the box |a| <= A, |b| <= B,
    |c| <= C that provably contains the ball; -1 marks elements outside the
    ball.  For the standard generators a word with p letters a^{+-1} and q
    letters b^{+-1} has |c| <= p q <= r^2 / 4, which sets C.
    """

    def __init__(self, radius: int = 22, gens: Sequence = STANDARD_GENERATORS,
                 memory_budget: int = 2 * 1024 ** 3, cache_dir: Optional[str] = None):
        self.radius = int(radius)
        self.gens = tuple(tuple(int(t) for t in g) for g in gens)
        gset = set(self.gens)
        if any((-a, -b, -c + a * b) not in gset for a, b, c in self.gens):
            raise ValueError("generating set must be symmetric")
        ma = max(abs(g[0]) for g in self.gens)
        mb = max(abs(g[1]) for g in self.gens)
        mc = max(abs(g[2]) for g in self.gens)
        r = self.radius
        self.A, self.B = r * ma, r * mb
        if self.gens == STANDARD_GENERATORS or set(self.gens) == set(STANDARD_GENERATORS):
            self.C = r * r // 4
        else:
            self.C = r * mc + r * r * ma * mb
        size = (2 * self.A + 1) * (2 * self.B + 1) * (2 * self.C + 1) * 2
        if size > memory_budget:
            raise MemoryBudgetExceeded(f"table of {size} bytes exceeds budget {memory_budget}")
        cache_dir = cache_dir if cache_dir is not None else os.environ.get(CACHE_ENV)
        self.table = self._load(cache_dir) if cache_dir else None
        if self.table is None:
            self.table = self._search()
            if cache_dir:
                self._save(cache_dir)
        self.table.setflags(write=False)

    # breadth-first search, one frontier at a time
    def _search(self):
        A, B, C = self.A, self.B, self.C
        dist = np.full((2 * A + 1, 2 * B + 1, 2 * C + 1), -1, dtype=np.int16)
        frontier = np.zeros(dist.shape, dtype=bool)
        frontier[A, B, C] = True
        dist[A, B, C] = 0
        a_vals = np.arange(-A, A + 1)
        for step in range(1, self.radius + 1):
            new = np.zeros_like(frontier)
            for ga, gb, gc in self.gens:
                # (a, b, c)(ga, gb, gc) = (a + ga, b + gb, c + gc + a gb): the c-shift depends on a
                for ai, a in enumerate(a_vals):
                    src = frontier[ai]
                    if not src.any():
                        continue
                    ti = ai + ga
                    if not 0 <= ti < 2 * A + 1:
                        continue
                    shift_b, shift_c = gb, gc + a * gb
                    _or_shifted(new[ti], src, shift_b, shift_c)
            new &= dist < 0
            dist[new] = step
            frontier = new
        return dist

    def _path(self, cache_dir):
        return Path(cache_dir) / f"wordlen_r{self.radius}_{_gens_key(self.gens)}.bin"

    def _header(self):
        return MAGIC + struct.pack("<HIIII", FORMAT_VERSION, self.radius, self.A, self.B, self.C)

    def _load(self, cache_dir):
        path = self._path(cache_dir)
        if not path.exists():
            return None
        blob = path.read_bytes()
        head = self._header()
        if not blob.startswith(head):
            return None
        arr = np.frombuffer(blob[len(head):], dtype="<i2")
        shape = (2 * self.A + 1, 2 * self.B + 1, 2 * self.C + 1)
        if arr.size != np.prod(shape):
            return None
        return arr.reshape(shape).copy()

    def _save(self, cache_dir):
        path = self._path(cache_dir)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_bytes(self._header() + self.table.astype("<i2").tobytes())
        tmp.replace(path)

    def lengths(self, G) -> np.ndarray:
        """Word lengths of the rows of G as floats; ``inf`` beyond the radius."""
        G = np.asarray(G, dtype=np.int64)
        a, b, c = G[..., 0], G[..., 1], G[..., 2]
        inside = (np.abs(a) <= self.A) & (np.abs(b) <= self.B) & (np.abs(c) <= self.C)
        out = np.full(a.shape, np.inf)
        d = self.table[np.where(inside, a + self.A, 0), np.where(inside, b + self.B, 0),
                       np.where(inside, c + self.C, 0)]
        ok = inside & (d >= 0)
        out[ok] = d[ok]
        return out

    def word_length(self, g) -> Optional[int]:
        v = float(self.lengths(np.asarray(g)[None, :])[0])
        return None if math.isinf(v) else int(v)

    def ball_sizes(self) -> np.ndarray:
        """|B(n)| for n = 0..radius."""
        counts = np.bincount(self.table[self.table >= 0].ravel(), minlength=self.radius + 1)
        return np.cumsum(counts)


def _or_shifted(dst, src, sb, sc):
    """dst[b + sb, c + sc] |= src[b, c], dropping what leaves the box."""
    nb, nc = src.shape
    b0, b1 = max(0, -sb), min(nb, nb - sb)
    c0, c1 = max(0, -sc), min(nc, nc - sc)
    if b0 >= b1 or c0 >= c1:
        return
    dst[b0 + sb:b1 + sb, c0 + sc:c1 + sc] |= src[b0:b1, c0:c1]


_TABLES = {}


def word_table(radius: int = 22, gens: Sequence = STANDARD_GENERATORS) -> WordMetricTable:
    """Shared, read-only table per (radius, generators)."""
    key = (int(radius), tuple(tuple(g) for g in gens))
    if key not in _TABLES:
        _TABLES[key] = WordMetricTable(radius, gens)
    return _TABLES[key]


def word_length(g, gens: Sequence = STANDARD_GENERATORS, max_radius: int = 22) -> Optional[int]:
    return word_table(max_radius, gens).word_length(g)


# ---------------------------------------------------------------------------
# spaces


class HeisenbergWordSpace(PointedSpace):
    """H3(Z) with a left-invariant word metric d(g, h) = |g^-1 h|."""

    name = "h3-word"
    triangle_slack = 0.0

    def __init__(self, table: Optional[WordMetricTable] = None, reference=(0, 0, 0)):
        self.table = table if table is not None else word_table()
        super().__init__(np.asarray(reference, dtype=np.int64))

    @property
    def radius(self):
        return self.table.radius

    def pairwise(self, Y, X):
        return self.table.lengths(relative(Y, X))


class HeisenbergGaugeSpace(PointedSpace):
    """H3(Z) with d(g, h) = |log(g^-1 h)|, the homogeneous gauge of the Lie algebra.

    With a gauge satisfying |uv| <= |u| + |v| + alpha this is a quasi-metric
    with additive slack alpha.
    """

    name = "h3-gauge"

    def __init__(self, gauge: Optional[Gauge] = None, reference=(0, 0, 0)):
        self.gauge = gauge if gauge is not None else Gauge(heisenberg3(), alpha=0.0)
        self.triangle_slack = self.gauge.alpha if self.gauge.alpha is not None else None
        self._l1 = float(self.gauge.scales[0])
        self._l2 = float(self.gauge.scales[1])
        super().__init__(np.asarray(reference, dtype=np.int64))

    def lengths(self, G):
        G = np.asarray(G, dtype=np.int64)
        a, b, c = G[..., 0].astype(float), G[..., 1].astype(float), G[..., 2]
        z = np.abs(2 * c - G[..., 0] * G[..., 1]).astype(float) / 2.0
        return np.maximum(self._l1 * np.sqrt(a * a + b * b), np.sqrt(self._l2 * z))

    def pairwise(self, Y, X):
        return self.lengths(relative(Y, X))


def comparison_constant(table: WordMetricTable, gauge_space: HeisenbergGaugeSpace) -> float:
    """Smallest q >= 1 with |g|_gauge / q <= |g|_word <= q |g|_gauge + q on the whole table."""
    idx = np.argwhere(table.table > 0)
    G = np.stack([idx[:, 0] - table.A, idx[:, 1] - table.B, idx[:, 2] - table.C], axis=1)
    w = table.table[table.table > 0].astype(float)
    gg = gauge_space.lengths(G)
    q_low = float(np.max(gg / w))
    q_up = float(np.max(w / (gg + 1.0)))
    return max(1.0, q_low, q_up)


def orbit(g, sense: str = "semigroup", space: Optional[PointedSpace] = None) -> CyclicOrbit:
    """{g^n : n >= 0} or {g^n : n in Z} as an enumerable set."""
    g = np.asarray(g, dtype=np.int64)
    if not np.any(g):
        raise ValueError("the identity does not generate an unbounded set")
    space = space if space is not None else HeisenbergWordSpace()
    horizon = float(space.radius) if isinstance(space, HeisenbergWordSpace) else math.inf
    label = f"<{tuple(g.tolist())}>{'+' if sense == 'semigroup' else ''}"
    return CyclicOrbit(space, lambda ns: power(g, ns), sense, label, horizon=horizon)


# ---------------------------------------------------------------------------
# boundary scans

STANDARD5 = ((1, 0, 0), (0, 1, 0), (1, 1, 0), (0, 0, 1), (0, 0, -1))


def horizontal_directions(count: int = 16, bound: int = 3):
    from .euclidean import even_directions

    return [(a, b, 0) for a, b in even_directions(count, bound)]


def layer_of(g) -> int:
    return 1 if (g[0] != 0 or g[1] != 0) else 2


@dataclass
class ScanReport:
    directions: list
    sense: str
    window: TailWindow
    t_hat: np.ndarray
    saturated: np.ndarray
    threshold: float
    components: list
    layer_partition: list
    connecting_threshold: float
    spearman: Optional[float]
    oracle: Optional[np.ndarray]

    @property
    def component_count(self):
        return len(self.components)

    def matches_layers(self) -> bool:
        return sorted(map(sorted, self.components)) == sorted(map(sorted, self.layer_partition))


def boundary_scan(directions, window: TailWindow = TailWindow(10, 22), sense: str = "semigroup",
                  theta: float = 0.3, space: Optional[PointedSpace] = None, workers: int = 1) -> ScanReport:
    """Pairwise t estimates between the orbits of the given directions.

    Reports single-linkage components at ``theta``, the partition by layer
    (horizontal versus central), and for the horizontal directions the
    Spearman correlation of t against the circle oracle
    sqrt(sin(min(pi/2, angle))) of their abelianised images (lines in the
    group sense).
    """
    from scipy.stats import spearmanr

    space = space if space is not None else HeisenbergWordSpace()
    dirs = [tuple(int(t) for t in d) for d in directions]
    sets = [orbit(d, sense, space) for d in dirs]
    n = len(dirs)
    T = np.zeros((n, n))
    S = np.zeros((n, n), dtype=bool)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    def job(p):
        i, j = p
        if sense == "group" and _same_group(dirs[i], dirs[j]):
            return p, 0.0, False
        e = s_estimate(sets[i], sets[j], window)
        return p, math.sqrt(e.value), e.saturated

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(job, pairs))
    else:
        results = [job(p) for p in pairs]
    for (i, j), t, sat in results:
        T[i, j] = T[j, i] = t
        S[i, j] = S[j, i] = sat
    comps = single_linkage(T, theta)
    layers = {}
    for i, d in enumerate(dirs):
        layers.setdefault(layer_of(d), []).append(i)
    partition = [layers[k] for k in sorted(layers)]
    horiz = layers.get(1, [])
    rho, oracle = None, None
    if len(horiz) >= 3:
        hs = "halfline" if sense == "semigroup" else "line"
        oracle = np.zeros((len(horiz), len(horiz)))
        est, orc = [], []
        for a, i in enumerate(horiz):
            for b, j in enumerate(horiz):
                if a < b:
                    o = math.sqrt(l2_line_s_exact(dirs[i][:2], dirs[j][:2], hs))
                    oracle[a, b] = oracle[b, a] = o
                    est.append(T[i, j])
                    orc.append(o)
        if len(set(orc)) > 1 and len(set(est)) > 1:
            rho = float(spearmanr(est, orc).correlation)
    return ScanReport(dirs, sense, window, T, S, theta, comps, partition, connecting_threshold(T), rho, oracle)


def _same_group(g, h) -> bool:
    """Whether <g> = <h>, i.e. h is g or its inverse."""
    return tuple(h) == tuple(g) or tuple(h) == tuple(inverse(np.asarray(g)).tolist())


def scan_csv(report: ScanReport) -> str:
    """Matrix CSV: one row per direction, t cells followed by saturation flags."""
    labels = [f"({a};{b};{c})" for a, b, c in report.directions]
    lines = ["direction," + ",".join(labels) + "," + ",".join(f"sat{l}" for l in labels)]
    for i, lab in enumerate(labels):
        cells = [f"{report.t_hat[i, j]:.6f}" for j in range(len(labels))]
        flags = [str(int(report.saturated[i, j])) for j in range(len(labels))]
        lines.append(lab + "," + ",".join(cells) + "," + ",".join(flags))
    return "\n".join(lines) + "\n"
