"""Graded nilpotent Lie algebras with exact rational structure constants.

A vector is a 1-d numpy object array of Fractions over the full basis;
batches are 2-d arrays whose last axis is the basis.  Float arrays are
accepted everywhere a batch is, which the vectorised sampling code uses.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Optional, Sequence

import numpy as np


class AlgebraError(ValueError):
    """Invalid algebra data; ``triple`` names the offending basis indices."""

    def __init__(self, message, triple=None):
        super().__init__(message)
        self.triple = triple


def frac_array(values) -> np.ndarray:
    arr = np.empty(len(values), dtype=object)
    arr[:] = [Fraction(v) for v in values]
    return arr


class GradedLieAlgebra:
    """A Lie algebra V_1 + ... + V_c with [V_i, V_j] inside V_{i+j}.

    ``constants`` maps basis index pairs (i, j) with i < j to a dict
    {k: coefficient}, meaning [e_i, e_j] = sum_k coefficient * e_k.
    """

    def __init__(self, name: str, layers: Sequence[int], basis: Sequence[str], constants: dict,
                 validate: bool = True):
        self.name = name
        self.layers = tuple(int(n) for n in layers)
        self.basis = tuple(basis)
        if sum(self.layers) != len(self.basis):
            raise AlgebraError(f"layer dimensions {self.layers} do not add up to {len(self.basis)} basis vectors")
        self.dim = len(self.basis)
        self.c = len(self.layers)
        self.degree = np.concatenate([np.full(n, k + 1) for k, n in enumerate(self.layers)]).astype(int)
        starts = np.concatenate([[0], np.cumsum(self.layers)]).astype(int)
        self.blocks = [slice(int(starts[k]), int(starts[k + 1])) for k in range(self.c)]
        self.table = []
        for (i, j), out in sorted(constants.items()):
            for k, coef in sorted(out.items()):
                coef = Fraction(coef)
                if coef != 0:
                    self.table.append((i, j, k, coef, float(coef)))
        if validate:
            self.validate()

    # -- structure -----------------------------------------------------------

    def structure_tensor(self) -> np.ndarray:
        """Dense antisymmetric tensor C[i, j, k] of Fractions."""
        C = np.full((self.dim, self.dim, self.dim), Fraction(0), dtype=object)
        for i, j, k, coef, _ in self.table:
            C[i, j, k] += coef
            C[j, i, k] -= coef
        return C

    def validate(self):
        seen = set()
        for i, j, k, _, _ in self.table:
            if not (0 <= i < j < self.dim) or not (0 <= k < self.dim):
                raise AlgebraError(f"bad index triple ({i}, {j}, {k}); need 0 <= i < j < dim", (i, j, k))
            if (i, j, k) in seen:
                raise AlgebraError(f"duplicate structure constant ({i}, {j}, {k})", (i, j, k))
            seen.add((i, j, k))
            if self.degree[k] != self.degree[i] + self.degree[j]:
                raise AlgebraError(
                    f"grading violated: [{self.basis[i]}, {self.basis[j]}] has a component on "
                    f"{self.basis[k]} of degree {self.degree[k]}, expected {self.degree[i] + self.degree[j]}",
                    (i, j, k))
        bad = self.jacobi_violation()
        if bad is not None:
            i, j, k = bad
            raise AlgebraError(
                f"Jacobi identity fails on ({self.basis[i]}, {self.basis[j]}, {self.basis[k]})", bad)
        bad = self.generation_violation()
        if bad is not None:
            raise AlgebraError(
                f"layer {bad + 1} is not spanned by brackets of the first layer with layer {bad}", None)

    def jacobi_violation(self) -> Optional[tuple]:
        """First basis triple (i, j, k) violating the Jacobi identity, or None."""
        E = [self.unit(i) for i in range(self.dim)]
        for i, j, k in combinations(range(self.dim), 3):
            s = (self.bracket(E[i], self.bracket(E[j], E[k])) + self.bracket(E[j], self.bracket(E[k], E[i]))
                 + self.bracket(E[k], self.bracket(E[i], E[j])))
            if any(v != 0 for v in s):
                return (i, j, k)
        return None

    def generation_violation(self) -> Optional[int]:
        """Index n such that [V_1, V_n] does not span V_{n+1}, or None.

        Only when the first layer generates do the layers recover the
        descending central series.
        """
        for n in range(1, self.c):
            rows = []
            for i in range(self.blocks[0].start, self.blocks[0].stop):
                for j in range(self.blocks[n - 1].start, self.blocks[n - 1].stop):
                    v = self.bracket(self.unit(i), self.unit(j))
                    rows.append([v[k] for k in range(self.blocks[n].start, self.blocks[n].stop)])
            rank = _rank(rows)
            if rank < self.layers[n]:
                return n
        return None

    # -- vectors -------------------------------------------------------------

    def zero(self) -> np.ndarray:
        return frac_array([0] * self.dim)

    def unit(self, i: int) -> np.ndarray:
        v = self.zero()
        v[i] = Fraction(1)
        return v

    def vector(self, coords) -> np.ndarray:
        if len(coords) != self.dim:
            raise AlgebraError(f"expected {self.dim} coordinates, got {len(coords)}")
        return frac_array(coords)

    def named(self, **coeffs) -> np.ndarray:
        v = self.zero()
        for name, value in coeffs.items():
            v[self.basis.index(name)] = Fraction(value)
        return v

    def project(self, x, n: int):
        """pi_n(x) as a vector of the algebra (other layers zeroed)."""
        out = np.zeros_like(x)
        out[..., self.blocks[n - 1]] = x[..., self.blocks[n - 1]]
        return out

    def block(self, x, n: int):
        return x[..., self.blocks[n - 1]]

    def depth(self, x) -> int:
        """The i with x in g_i but not g_{i+1}; c + 1 for the zero vector."""
        for n in range(1, self.c + 1):
            if any(v != 0 for v in self.block(x, n)):
                return n
        return self.c + 1

    def in_layer(self, x) -> Optional[int]:
        """n if x is a nonzero element of V_n, else None."""
        n = self.depth(x)
        if n > self.c:
            return None
        rest = x.copy()
        rest[self.blocks[n - 1]] = 0
        return n if all(v == 0 for v in rest) else None

    def dilate(self, t, x):
        """delta_t: multiply the layer-n block by t^n."""
        out = x.copy()
        for n in range(1, self.c + 1):
            out[..., self.blocks[n - 1]] = out[..., self.blocks[n - 1]] * (t ** n)
        return out

    # -- bracket -------------------------------------------------------------

    def bracket(self, x, y):
        """Bilinear bracket; works on single vectors or batches, exact or float."""
        x = np.asarray(x)
        y = np.asarray(y)
        shape = np.broadcast_shapes(x.shape, y.shape)
        exact = x.dtype == object or y.dtype == object
        out = np.zeros(shape, dtype=object if exact else float)
        for i, j, k, coef, fcoef in self.table:
            term = x[..., i] * y[..., j] - x[..., j] * y[..., i]
            out[..., k] = out[..., k] + (coef if exact else fcoef) * term
        return out

    def kfold(self, *xs):
        """Right-nested bracket (x1, (x2, (..., xk)))."""
        if not xs:
            raise ValueError("kfold needs at least one argument")
        v = xs[-1]
        for x in reversed(xs[:-1]):
            v = self.bracket(x, v)
        return v

    # -- random samples -----------------------------------------------------

    def random_vector(self, rng, size=None, num: int = 9, den: int = 9, layers=None):
        """Random vectors with coordinates p/q, |p| <= num, 1 <= q <= den.

        ``layers`` restricts the support to the listed layers.
        """
        shape = (self.dim,) if size is None else (size, self.dim)
        p = rng.integers(-num, num + 1, size=shape)
        q = rng.integers(1, den + 1, size=shape)
        out = np.empty(shape, dtype=object)
        flat_p, flat_q = p.ravel(), q.ravel()
        out.ravel()[:] = [Fraction(int(a), int(b)) for a, b in zip(flat_p, flat_q)]
        if layers is not None:
            for n in range(1, self.c + 1):
                if n not in layers:
                    out[..., self.blocks[n - 1]] = Fraction(0)
        return out

    def __repr__(self):
        return f"GradedLieAlgebra({self.name!r}, layers={self.layers})"


def _rank(rows) -> int:
    """Rank of a small matrix of Fractions by Gaussian elimination."""
    m = [list(r) for r in rows]
    rank = 0
    cols = len(m[0]) if m else 0
    for col in range(cols):
        piv = next((r for r in range(rank, len(m)) if m[r][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for r in range(len(m)):
            if r != rank and m[r][col] != 0:
                f = m[r][col] / m[rank][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[rank])]
        rank += 1
    return rank


# ---------------------------------------------------------------------------
# bundled algebras


def abelian(d: int = 2) -> GradedLieAlgebra:
    return GradedLieAlgebra(f"abelian{d}", [d], [f"e{i + 1}" for i in range(d)], {})


def heisenberg3() -> GradedLieAlgebra:
    return GradedLieAlgebra("h3", [2, 1], ["e1", "e2", "e3"], {(0, 1): {2: 1}})


def heisenberg5() -> GradedLieAlgebra:
    return GradedLieAlgebra("h5", [4, 1], ["e1", "e2", "e3", "e4", "z"], {(0, 1): {4: 1}, (2, 3): {4: 1}})


def free_class3_rank2() -> GradedLieAlgebra:
    """Free nilpotent algebra of class 3 on two generators (dimensions 2, 1, 2)."""
    return GradedLieAlgebra("free3", [2, 1, 2], ["e1", "e2", "e12", "e112", "e212"],
                            {(0, 1): {2: 1}, (0, 2): {3: 1}, (1, 2): {4: 1}})


def free_class2_rank3() -> GradedLieAlgebra:
    """Free nilpotent algebra of class 2 on three generators (dimensions 3, 3)."""
    return GradedLieAlgebra("free2r3", [3, 3], ["e1", "e2", "e3", "e12", "e13", "e23"],
                            {(0, 1): {3: 1}, (0, 2): {4: 1}, (1, 2): {5: 1}})


BUNDLED = {
    "abelian2": lambda: abelian(2),
    "h3": heisenberg3,
    "h5": heisenberg5,
    "free3": free_class3_rank2,
    "free2r3": free_class2_rank3,
}


def bundled(name: str) -> GradedLieAlgebra:
    try:
        return BUNDLED[name]()
    except KeyError:
        raise AlgebraError(f"unknown algebra {name!r}; bundled: {', '.join(BUNDLED)}") from None


# ---------------------------------------------------------------------------
# config files


@dataclass
class ConfigError(ValueError):
    message: str
    line: Optional[int] = None
    column: Optional[int] = None
    field: Optional[str] = None

    def __str__(self):
        where = []
        if self.line is not None:
            where.append(f"line {self.line}, column {self.column}")
        if self.field is not None:
            where.append(f"field {self.field!r}")
        return f"{self.message} ({'; '.join(where)})" if where else self.message


def parse_algebra(text: str) -> GradedLieAlgebra:
    """Build an algebra from JSON text.

    Expected keys: ``name`` (optional), ``layers`` (list of dimensions),
    ``basis`` (list of labels, optional), and ``brackets``: a list of
    [i, j, k, numerator, denominator] entries meaning [e_i, e_j] has
    coefficient numerator/denominator on e_k.  Indices are 0-based integers
    or basis labels.  Raises ConfigError for malformed input and
    AlgebraError (with the offending triple) for invalid algebras.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(data, dict):
        raise ConfigError("top level must be an object")
    layers = data.get("layers")
    if not isinstance(layers, list) or not layers or not all(isinstance(n, int) and n > 0 for n in layers):
        raise ConfigError("must be a nonempty list of positive integers", field="layers")
    dim = sum(layers)
    basis = data.get("basis", [f"e{i + 1}" for i in range(dim)])
    if not isinstance(basis, list) or len(basis) != dim or len(set(basis)) != dim:
        raise ConfigError(f"must list {dim} distinct labels", field="basis")
    constants = {}
    entries = data.get("brackets", [])
    if not isinstance(entries, list):
        raise ConfigError("must be a list", field="brackets")

    def index(v, pos):
        if isinstance(v, str):
            if v not in basis:
                raise ConfigError(f"unknown basis label {v!r}", field=f"brackets[{pos}]")
            return basis.index(v)
        if isinstance(v, int) and not isinstance(v, bool) and 0 <= v < dim:
            return v
        raise ConfigError(f"bad basis index {v!r}", field=f"brackets[{pos}]")

    for pos, e in enumerate(entries):
        if not isinstance(e, list) or len(e) not in (4, 5):
            raise ConfigError("entry must be [i, j, k, numerator, denominator]", field=f"brackets[{pos}]")
        i, j, k = (index(v, pos) for v in e[:3])
        num = e[3]
        den = e[4] if len(e) == 5 else 1
        if not isinstance(num, int) or not isinstance(den, int) or den == 0:
            raise ConfigError("numerator and denominator must be integers, denominator nonzero",
                              field=f"brackets[{pos}]")
        coef = Fraction(num, den)
        if i == j:
            if coef != 0:
                raise AlgebraError(f"[{basis[i]}, {basis[i]}] must vanish", (i, j, k))
            continue
        if i > j:
            i, j, coef = j, i, -coef
        slot = constants.setdefault((i, j), {})
        if k in slot:
            raise AlgebraError(f"structure constant for ({basis[i]}, {basis[j]}) -> {basis[k]} given twice",
                               (i, j, k))
        slot[k] = coef
    return GradedLieAlgebra(str(data.get("name", "custom")), layers, basis, constants)


def load_algebra(path) -> GradedLieAlgebra:
    with open(path, encoding="utf-8") as fh:
        return parse_algebra(fh.read())


def algebra_to_json(alg: GradedLieAlgebra) -> str:
    entries = [[i, j, k, c.numerator, c.denominator] for i, j, k, c, _ in alg.table]
    return json.dumps({"name": alg.name, "layers": list(alg.layers), "basis": list(alg.basis),
                       "brackets": entries}, indent=2)
