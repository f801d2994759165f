"""Pointed metric spaces and lazily enumerable unbounded subsets.

Points are numpy rows.  A space never mixes point kinds: lattices and the
discrete Heisenberg group use ``int64`` rows, Lie algebra vectors use
object rows holding :class:`fractions.Fraction` entries.

Distances that cannot be resolved (for instance a word length beyond a
precomputed BFS table) are reported as ``inf``; every caller treats that as
"larger than anything the space can certify".
"""

from __future__ import annotations

import copy
import math
from typing import Callable, Optional

import numpy as np


class HorizonExceeded(RuntimeError):
    """Raised when a set or space cannot enumerate up to the requested radius."""


class EmptyWindow(ValueError):
    """Raised when a tail window contains no points of the probed set."""


class PointedSpace:
    """A metric (or quasi-metric) space with a distinguished reference point.

    Subclasses implement :meth:`pairwise`.  ``triangle_slack`` is the additive
    constant ``s`` in ``d(x, z) <= d(x, y) + d(y, z) + s``; ``None`` means no
    such guarantee and disables norm-band pruning in the estimators.
    """

    name = "space"
    discrete = True
    triangle_slack: Optional[float] = 0.0

    def __init__(self, reference):
        self.reference = np.asarray(reference)

    @property
    def dim(self) -> int:
        return int(self.reference.shape[0])

    def pairwise(self, Y: np.ndarray, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def distance(self, x, y):
        return float(self.pairwise(np.asarray(x)[None, :], np.asarray(y)[None, :])[0, 0])

    def norms(self, X: np.ndarray) -> np.ndarray:
        X = self.as_points(X)
        if len(X) == 0:
            return np.zeros(0)
        return self.pairwise(self.reference[None, :], X)[0]

    def norm(self, x) -> float:
        return float(self.norms(np.asarray(x)[None, :])[0])

    def as_points(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=self.reference.dtype)
        if X.ndim == 1:
            X = X[None, :]
        return X

    def with_reference(self, point) -> "PointedSpace":
        other = copy.copy(self)
        other.reference = np.asarray(point, dtype=self.reference.dtype)
        return other

    def __repr__(self):
        return f"{type(self).__name__}({self.name})"


def norm(space: PointedSpace, x) -> float:
    """Distance from the reference point of ``space`` to ``x``."""
    return space.norm(x)


def unique_rows(points: np.ndarray) -> np.ndarray:
    """Drop repeated rows, keeping first occurrences in their original order."""
    if len(points) == 0:
        return points
    if points.dtype == object:
        seen = set()
        keep = []
        for i, row in enumerate(points):
            key = tuple(row)
            if key not in seen:
                seen.add(key)
                keep.append(i)
        return points[keep]
    _, first = np.unique(points, axis=0, return_index=True)
    return points[np.sort(first)]


class UnboundedSet:
    """An unbounded subset known through its finite radius slices.

    ``slice(r)`` returns the points with norm at most ``r`` in enumeration
    order (the order defines the "smallest index" witness convention of the
    estimators).  ``horizon`` is the largest radius the set can enumerate.
    """

    horizon = math.inf

    def __init__(self, space: PointedSpace, label: str = ""):
        self.space = space
        self.label = label

    def slice_with_norms(self, r: float):
        raise NotImplementedError

    def slice(self, r: float) -> np.ndarray:
        return self.slice_with_norms(r)[0]

    def _check_horizon(self, r):
        if r < 0:
            raise ValueError("radius must be nonnegative")
        if r > self.horizon:
            raise HorizonExceeded(f"{self.label or self!r}: radius {r} beyond horizon {self.horizon}")

    def __repr__(self):
        return f"{type(self).__name__}({self.label!r})"


def ball_points(S: UnboundedSet, r: float) -> np.ndarray:
    """All points of ``S`` with norm at most ``r``, without duplicates."""
    return S.slice(r)


class CyclicOrbit(UnboundedSet):
    """The cyclic semigroup ``{g^n : n >= 0}`` or group ``{g^n : n in Z}``.

    ``powers(ns)`` maps an integer array of exponents to the corresponding
    points.  Norms along an orbit need not be monotone in the exponent, so
    enumeration for radius ``r`` runs to ``overshoot`` times the first
    exponent whose norm exceeds ``2 r`` (or is unresolvable).
    """

    def __init__(self, space, powers: Callable[[np.ndarray], np.ndarray], sense: str = "semigroup",
                 label: str = "", overshoot: int = 4, horizon: float = math.inf):
        if sense not in ("semigroup", "group"):
            raise ValueError(f"unknown sense {sense!r}")
        super().__init__(space, label)
        self.powers = powers
        self.sense = sense
        self.overshoot = overshoot
        self.horizon = horizon

    def power_norms(self, ns) -> np.ndarray:
        ns = np.asarray(ns, dtype=np.int64)
        return self.space.norms(self.powers(ns))

    def _one_side(self, r, sign):
        first_far = None
        top = 0
        chunk = 64
        kept_n, kept_norm = [], []
        while True:
            ns = np.arange(top, top + chunk, dtype=np.int64)
            nrm = self.power_norms(sign * ns)
            kept_n.append(ns)
            kept_norm.append(nrm)
            if first_far is None:
                far = np.nonzero(nrm > 2 * r)[0]
                if len(far):
                    first_far = int(ns[far[0]])
            top += chunk
            if first_far is not None and top > self.overshoot * max(first_far, 1):
                break
            chunk = min(chunk * 2, 1 << 16)
        ns = np.concatenate(kept_n)
        nrm = np.concatenate(kept_norm)
        if first_far is not None:
            inside = ns <= self.overshoot * max(first_far, 1)
            ns, nrm = ns[inside], nrm[inside]
        keep = nrm <= r
        return sign * ns[keep], nrm[keep]

    def exponents_with_norms(self, r):
        """Exponents ``n`` with ``norm(g^n) <= r`` and their norms, in enumeration order."""
        self._check_horizon(r)
        ns, nrm = self._one_side(r, 1)
        if self.sense == "group":
            neg, nneg = self._one_side(r, -1)
            neg, nneg = neg[neg != 0], nneg[neg != 0]
            order = np.argsort(np.concatenate([2 * np.abs(ns), 2 * np.abs(neg) + 1]), kind="stable")
            ns = np.concatenate([ns, neg])[order]
            nrm = np.concatenate([nrm, nneg])[order]
        return ns, nrm

    def slice_with_norms(self, r):
        ns, nrm = self.exponents_with_norms(r)
        return self.powers(ns), nrm


class FinitePointSet(UnboundedSet):
    """A finite sample of an unbounded set, e.g. a simulated trajectory.

    It can only certify slices up to its largest norm, which is its horizon.
    """

    def __init__(self, space, points, label: str = ""):
        super().__init__(space, label)
        pts = unique_rows(space.as_points(points))
        self.points = pts
        self.point_norms = space.norms(pts)
        finite = self.point_norms[np.isfinite(self.point_norms)]
        self.horizon = float(finite.max()) if len(finite) else 0.0

    def slice_with_norms(self, r):
        self._check_horizon(r)
        keep = self.point_norms <= r
        return self.points[keep], self.point_norms[keep]


class WholeSpace(UnboundedSet):
    """Every point of a lattice-like space, enumerated from a bounding box.

    ``box(r)`` must return all candidate points that can have norm ``<= r``.
    """

    def __init__(self, space, box: Callable[[float], np.ndarray], label: str = "X"):
        super().__init__(space, label)
        self.box = box

    def slice_with_norms(self, r):
        self._check_horizon(r)
        pts = self.box(r)
        nrm = self.space.norms(pts)
        keep = nrm <= r
        return pts[keep], nrm[keep]
