"""Random walks with drift on Z^d and the discrete Heisenberg group.

A walk S_k = X_1 X_2 ... X_k with i.i.d. steps whose law has nonzero mean
in the deepest layer containing its support should stay sublinearly close
to the cyclic semigroup of a drift element.  ``convergence_check``
measures that with the tail estimator on nested windows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import heisenberg as h3
from .cone import TailWindow, s_estimate
from .euclidean import LatticeRay, LatticeSpace
from .lie.algebra import heisenberg3
from .lie.gauge import Gauge
from .spaces import FinitePointSet, PointedSpace

RNG_ALGORITHM = "PCG64"


class NoDrift(ValueError):
    """The step law has zero expectation in its layer."""


# ---------------------------------------------------------------------------
# groups


class LatticeGroup:
    """Z^d, abelian, with the l1 word metric of the standard generators."""

    def __init__(self, dim: int):
        self.dim = dim
        self.name = f"z{dim}"

    def cumulative(self, steps):
        return np.cumsum(steps, axis=0)

    def layer(self, support) -> int:
        return 1

    def layer_image(self, support, n):
        return [tuple(Fraction(int(t)) for t in s) for s in support]

    def element(self, v, n):
        return np.asarray([int(t) for t in v], dtype=np.int64)

    def space(self) -> PointedSpace:
        return LatticeSpace(self.dim, 1)

    def orbit(self, g, space):
        return LatticeRay(space, g, "halfline")

    def in_table(self, points):
        return np.ones(len(points), dtype=bool)


class HeisenbergGroup:
    """H3(Z) in Mal'tsev coordinates.

    Walk distances use the homogeneous gauge of log(x^-1 y), a quasi-metric
    with additive slack 1; trajectories of useful length leave any word
    length table after a few dozen steps.  ``in_table`` flags the points
    whose word length is also known.
    """

    dim = 3
    name = "h3"

    def __init__(self, table: Optional[h3.WordMetricTable] = None):
        self._table = table

    def cumulative(self, steps):
        steps = np.asarray(steps, dtype=np.int64)
        a = np.cumsum(steps[:, 0])
        b = np.cumsum(steps[:, 1])
        a_before = np.concatenate([[0], a[:-1]])
        c = np.cumsum(steps[:, 2] + a_before * steps[:, 1])
        return np.stack([a, b, c], axis=1)

    def layer(self, support) -> int:
        return 2 if all(s[0] == 0 and s[1] == 0 for s in support) else 1

    def layer_image(self, support, n):
        if n == 1:
            return [(Fraction(int(s[0])), Fraction(int(s[1]))) for s in support]
        return [(Fraction(int(s[2])),) for s in support]

    def element(self, v, n):
        v = [int(t) for t in v]
        return np.asarray(v + [0] if n == 1 else [0, 0, v[0]], dtype=np.int64)

    def space(self) -> PointedSpace:
        return h3.HeisenbergGaugeSpace(Gauge(heisenberg3(), alpha=1.0))

    def orbit(self, g, space):
        return h3.orbit(g, "semigroup", space)

    def in_table(self, points):
        table = self._table if self._table is not None else h3.word_table()
        return np.isfinite(table.lengths(points))


GROUPS = {"z1": lambda: LatticeGroup(1), "z2": lambda: LatticeGroup(2), "h3": HeisenbergGroup}


def group(name: str):
    if name not in GROUPS:
        raise KeyError(f"unknown group {name!r}; known: {sorted(GROUPS)}")
    return GROUPS[name]()


# ---------------------------------------------------------------------------
# step laws and drift


@dataclass
class StepDistribution:
    group: object
    support: list
    probs: list

    def __post_init__(self):
        if not self.support:
            raise ValueError("support must be nonempty")
        if len(self.support) != len(self.probs):
            raise ValueError("one probability per support element")
        self.support = [tuple(int(t) for t in np.atleast_1d(s)) for s in self.support]
        self.probs = [Fraction(p) for p in self.probs]
        if any(p <= 0 for p in self.probs):
            raise ValueError("probabilities must be positive")
        if sum(self.probs) != 1:
            raise ValueError(f"probabilities sum to {sum(self.probs)}, not 1")

    @classmethod
    def deterministic(cls, grp, g) -> "StepDistribution":
        return cls(grp, [g], [1])

    @property
    def denominator(self) -> int:
        return math.lcm(*(p.denominator for p in self.probs))


@dataclass
class Drift:
    layer: int
    vector: tuple
    representative: np.ndarray
    scaling: int


def drift_element(dist: StepDistribution) -> Drift:
    """Layer, exact mean and an integer drift element of a step law.

    The representative is the mean scaled by the least common multiple of
    its denominators; scaling a direction does not change its boundary point.
    """
    grp = dist.group
    n = grp.layer(dist.support)
    images = grp.layer_image(dist.support, n)
    mean = tuple(sum((p * v[i] for p, v in zip(dist.probs, images)), Fraction(0)) for i in range(len(images[0])))
    if all(m == 0 for m in mean):
        raise NoDrift(f"zero mean in layer {n}: no drift")
    scale = math.lcm(*(m.denominator for m in mean))
    rep = grp.element([m * scale for m in mean], n)
    return Drift(n, mean, rep, scale)


# ---------------------------------------------------------------------------
# simulation


class Trajectory(FinitePointSet):
    """The points S_1, ..., S_L of one simulated walk, as a finite sample of an unbounded set."""

    def __init__(self, space, path, seed, in_table, label=""):
        super().__init__(space, path, label)
        self.path = path
        self.seed = seed
        self.rng_algorithm = RNG_ALGORITHM
        self.path_in_table = in_table

    @property
    def length(self) -> int:
        return len(self.path)


def sample_indices(dist: StepDistribution, L: int, rng) -> np.ndarray:
    """Exact sampling: uniform integers below the common denominator, cut at cumulative numerators."""
    den = dist.denominator
    cuts = np.cumsum([int(p * den) for p in dist.probs])
    u = rng.integers(0, den, size=L)
    return np.searchsorted(cuts, u, side="right")


def simulate(dist: StepDistribution, L: int, seed: int, space: Optional[PointedSpace] = None) -> Trajectory:
    if L < 1:
        raise ValueError("walk length must be at least 1")
    rng = np.random.default_rng(seed)
    idx = sample_indices(dist, L, rng)
    steps = np.asarray(dist.support, dtype=np.int64)[idx]
    path = dist.group.cumulative(steps)
    space = space if space is not None else dist.group.space()
    return Trajectory(space, path, seed, dist.group.in_table(path), f"walk(seed={seed})")


# ---------------------------------------------------------------------------
# convergence


def default_windows(R: float):
    return [TailWindow(R / 8, R / 4), TailWindow(R / 4, R / 2), TailWindow(R / 2, R)]


@dataclass
class WindowResult:
    window: TailWindow
    value: float
    spread: float
    saturated: bool


@dataclass
class ConvergenceReport:
    seed: int
    results: list
    threshold: float
    noise: float
    rng_algorithm: str = RNG_ALGORITHM

    @property
    def values(self):
        return [r.value for r in self.results]

    @property
    def nonincreasing(self) -> bool:
        v = self.values
        return all(b <= a + self.noise for a, b in zip(v, v[1:]))

    @property
    def final(self) -> float:
        return self.values[-1]

    @property
    def converged(self) -> bool:
        return self.nonincreasing and self.final <= self.threshold


def convergence_check(traj: Trajectory, drift: Drift, group_obj, windows: Optional[Sequence[TailWindow]] = None,
                      threshold: float = 0.15, noise: float = 0.02) -> ConvergenceReport:
    """s estimates between the trajectory and the drift semigroup on nested windows."""
    windows = list(windows) if windows is not None else default_windows(traj.horizon)
    target = group_obj.orbit(drift.representative, traj.space)
    out = []
    for w in windows:
        e = s_estimate(target, traj, w)
        out.append(WindowResult(w, e.value, e.spread, e.saturated))
    return ConvergenceReport(traj.seed, out, threshold, noise)


def walk_csv(reports: Sequence[ConvergenceReport]) -> str:
    lines = ["seed,rng,window_min,window_max,s_hat,spread,saturated"]
    for rep in reports:
        for r in rep.results:
            lines.append(f"{rep.seed},{rep.rng_algorithm},{r.window.r_min:.6f},{r.window.r_max:.6f},"
                         f"{r.value:.6f},{r.spread:.6f},{int(r.saturated)}")
    return "\n".join(lines) + "\n"
