"""Homogeneous gauges on graded nilpotent Lie algebras.

With scales lambda_n > 0 the gauge is

    |x| = max_n (lambda_n * ||pi_n x||_2) ** (1/n).

For rational scales and coordinates each term is the 2n-th root of a
rational number, so exact comparisons reduce to comparing integer powers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering
from itertools import product
from typing import Optional, Sequence

import numpy as np

from .bch import bch_product


@total_ordering
@dataclass(frozen=True)
class GaugeValue:
    """The number radicand ** (1 / degree), compared exactly by cross powering."""

    radicand: Fraction
    degree: int

    def __float__(self):
        if self.radicand == 0:
            return 0.0
        return math.exp((math.log(self.radicand.numerator) - math.log(self.radicand.denominator)) / self.degree)

    def __eq__(self, other):
        if isinstance(other, GaugeValue):
            return self.radicand ** other.degree == other.radicand ** self.degree
        return NotImplemented

    def __lt__(self, other):
        if isinstance(other, GaugeValue):
            return self.radicand ** other.degree < other.radicand ** self.degree
        return NotImplemented

    def __hash__(self):
        return hash(float(self))

    @classmethod
    def of(cls, value) -> "GaugeValue":
        return cls(Fraction(value), 1)


class Gauge:
    """The gauge of ``alg`` for given layer scales (default all 1)."""

    def __init__(self, alg, scales: Optional[Sequence] = None, alpha: Optional[float] = None):
        self.alg = alg
        # additive slack of the triangle inequality |xy| <= |x| + |y| + alpha, when validated
        self.alpha = alpha
        if scales is None:
            scales = [1] * alg.c
        if len(scales) != alg.c or any(Fraction(s) <= 0 for s in scales):
            raise ValueError("need one positive scale per layer")
        self.scales = tuple(Fraction(s) for s in scales)
        self._fscales = np.array([float(s) for s in self.scales])

    def layer_squares(self, x):
        """Exact squared l2 norms of the layer blocks (object) or float squares."""
        out = []
        for n in range(1, self.alg.c + 1):
            b = self.alg.block(x, n)
            out.append((b * b).sum(axis=-1))
        return out

    def value(self, x) -> GaugeValue:
        """Exact gauge of a single vector."""
        best = GaugeValue(Fraction(0), 1)
        for n, sq in enumerate(self.layer_squares(x), start=1):
            g = GaugeValue(self.scales[n - 1] ** 2 * Fraction(sq), 2 * n)
            if g > best:
                best = g
        return best

    def __call__(self, x) -> float:
        return float(self.value(x))

    def from_squares(self, squares) -> np.ndarray:
        """Float gauge from per-layer squared norms (arrays broadcast together)."""
        out = None
        for n, sq in enumerate(squares, start=1):
            sq = np.asarray(sq, dtype=float)
            t = (self._fscales[n - 1] * np.sqrt(sq)) ** (1.0 / n)
            out = t if out is None else np.maximum(out, t)
        return out

    def batch(self, X) -> np.ndarray:
        """Float gauges of a batch; squared norms are formed exactly for object input."""
        return self.from_squares([np.asarray(s, dtype=float) if np.ndim(s) else float(s)
                                  for s in self.layer_squares(X)])

    def dilate(self, t, x):
        return self.alg.dilate(t, x)

    def max_layer_norm(self, x) -> float:
        """max_n lambda_n ||pi_n x||, the norm the bracket constant refers to."""
        return max(float(s) * math.sqrt(float(q)) for s, q in zip(self.scales, self.layer_squares(x)))

    def __repr__(self):
        return f"Gauge({self.alg.name}, scales={[str(s) for s in self.scales]})"


def gauge(alg, x, scales=None) -> GaugeValue:
    return Gauge(alg, scales).value(x)


def dilate(alg, t, x):
    return alg.dilate(t, x)


# ---------------------------------------------------------------------------
# rescaling


class SearchExhausted(RuntimeError):
    def __init__(self, message, violation):
        super().__init__(message)
        self.violation = violation


@dataclass
class RescaleResult:
    gauge: Gauge
    alpha: float
    max_slack: float
    samples: int
    tried: int
    witness: Optional[tuple] = None


def sample_pairs(alg, n: int, seed: int, spread: int = 6):
    """Seeded rational pairs at many scales, plus all basis pairs.

    Each random vector is dilated by 2^k with k uniform in [-spread, 10] so
    both the small-scale regime (where the additive constant matters) and
    the large, homogeneous regime are covered.
    """
    rng = np.random.default_rng(seed)
    X = alg.random_vector(rng, n)
    Y = alg.random_vector(rng, n)
    kx = rng.integers(-spread, 11, size=n)
    ky = rng.integers(-spread, 11, size=n)
    for arr, ks in ((X, kx), (Y, ky)):
        for layer in range(1, alg.c + 1):
            f = np.array([Fraction(2) ** int(k * layer) for k in ks], dtype=object)
            arr[:, alg.blocks[layer - 1]] = arr[:, alg.blocks[layer - 1]] * f[:, None]
    E = np.array([alg.unit(i) for i in range(alg.dim)], dtype=object)
    ii, jj = np.meshgrid(np.arange(alg.dim), np.arange(alg.dim), indexing="ij")
    X = np.concatenate([X, E[ii.ravel()]])
    Y = np.concatenate([Y, E[jj.ravel()]])
    return X, Y


def _squares(alg, X):
    return np.stack([np.asarray((alg.block(X, n) * alg.block(X, n)).sum(axis=-1), dtype=float)
                     for n in range(1, alg.c + 1)], axis=-1)


def triangle_slack(gauge_obj: Gauge, sx, sy, sxy, alpha: float):
    """Per-sample value of |xy| - |x| - |y| - alpha from precomputed layer squares."""
    g = gauge_obj.from_squares
    gx = g(list(sx.T))
    gy = g(list(sy.T))
    gxy = g(list(sxy.T))
    return gxy - gx - gy - alpha, np.maximum(gxy, 1.0)


def scale_grid(c: int, depth: int = 10):
    """lambda_1 = 1 and lambda_n in {1, 1/2, ..., 2^-depth}, largest scales first."""
    ks = sorted(product(range(depth + 1), repeat=c - 1), key=lambda k: (sum(k), k))
    for k in ks:
        yield (Fraction(1),) + tuple(Fraction(1, 2 ** e) for e in k)


def validate_scales(alg, scales, alpha: float = 1.0, samples: int = 10_000, seed: int = 0, pairs=None):
    """Largest sampled violation of |xy| <= |x| + |y| + alpha and its witness.

    Returns (max_slack, witness_pair); max_slack <= 0 means the sample passes
    (up to a relative 1e-12 float allowance).
    """
    if pairs is None:
        X, Y = sample_pairs(alg, samples, seed)
    else:
        X, Y = pairs
    Z = bch_product(alg, X, Y)
    sx, sy, sz = _squares(alg, X), _squares(alg, Y), _squares(alg, Z)
    slack, scale = triangle_slack(Gauge(alg, scales), sx, sy, sz, alpha)
    rel = slack - 1e-12 * scale
    i = int(np.argmax(rel))
    return float(rel[i]), (X[i], Y[i])


def rescale_norms(alg, alpha: float = 1.0, samples: int = 10_000, seed: int = 0, depth: int = 10) -> RescaleResult:
    """Search geometric scale grids for a gauge with |xy| <= |x| + |y| + alpha.

    The product of each sampled pair is computed exactly once; candidate
    scales are then checked in floats with a relative 1e-12 allowance.  The
    result is validated by sampling only, not certified.
    """
    X, Y = sample_pairs(alg, samples, seed)
    Z = bch_product(alg, X, Y)
    sx, sy, sz = _squares(alg, X), _squares(alg, Y), _squares(alg, Z)
    worst = None
    tried = 0
    for scales in scale_grid(alg.c, depth):
        tried += 1
        g = Gauge(alg, scales)
        slack, scale = triangle_slack(g, sx, sy, sz, alpha)
        rel = slack - 1e-12 * scale
        i = int(np.argmax(rel))
        if rel[i] <= 0:
            g.alpha = alpha
            return RescaleResult(g, alpha, float(np.max(slack)), len(X), tried)
        if worst is None or rel[i] < worst[0]:
            worst = (float(rel[i]), scales, (X[i], Y[i]))
    raise SearchExhausted(f"no scales on the grid pass; smallest worst violation {worst[0]:.3g} at {worst[1]}",
                          worst)
