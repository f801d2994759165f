"""Command line: verify, dist, scan, walk and lie-check.

Exit codes: 0 success, 1 a check failed, 2 configuration error, 3 a
resource budget was exceeded.  Tables are CSV (comma, dot decimal, header
row, LF line endings) or JSON; output depends only on the configuration and
seeds, never on the worker count.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import heisenberg as h3
from . import walks
from .cone import TailWindow, s_plus_estimate, triangle_report
from .euclidean import LatticeRay, LatticeSpace, even_directions, l1_s_plus_exact, l2_s_plus_exact, single_linkage
from .lie.algebra import AlgebraError, ConfigError, bundled, load_algebra
from .lie.bch import ClassExceedsTable, bch_product, expansion_constant
from .lie.boundary import bracket_constant, s_plus_additive_exact
from .lie.gauge import Gauge, GaugeValue, SearchExhausted, rescale_norms, sample_pairs, validate_scales
from .spaces import EmptyWindow, HorizonExceeded

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_BUDGET = 0, 1, 2, 3
SPACES = ("z2-l1", "z2-l2", "z2-linf", "h3-word", "h3-gauge")
DIRECTION_SETS = ("standard5", "horizontal16")


# ---------------------------------------------------------------------------
# configuration


def _parse_vector(text, name):
    if isinstance(text, (list, tuple)):
        vals = list(text)
    else:
        vals = [t for t in str(text).replace(" ", "").split(",") if t]
    try:
        return tuple(int(v) for v in vals)
    except (TypeError, ValueError):
        raise ConfigError(f"expected integers, got {text!r}", field=name) from None


def _parse_vectors(text, name):
    if isinstance(text, (list, tuple)):
        return tuple(_parse_vector(v, name) for v in text)
    return tuple(_parse_vector(part, name) for part in str(text).split(";") if part.strip())


def _parse_fracs(text, name):
    vals = list(text) if isinstance(text, (list, tuple)) else [t for t in str(text).split(",") if t.strip()]
    try:
        return tuple(str(Fraction(str(v).strip())) for v in vals)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"expected fractions, got {text!r}", field=name) from None


def _parse_ints(text, name):
    vals = list(text) if isinstance(text, (list, tuple)) else [t for t in str(text).split(",") if t.strip()]
    try:
        return tuple(int(v) for v in vals)
    except (TypeError, ValueError):
        raise ConfigError(f"expected integers, got {text!r}", field=name) from None


@dataclass
class RunConfig:
    """Everything a run depends on, in a canonical form.

    ``normalized()`` is idempotent: building a config from its own
    normalized dictionary gives back the same dictionary.
    """

    subcommand: str
    space: Optional[str] = None
    group: Optional[str] = None
    a: Optional[tuple] = None
    b: Optional[tuple] = None
    sense: Optional[str] = None
    r_min: Optional[float] = None
    r_max: Optional[float] = None
    K: float = 10.0
    dirs: Optional[object] = None
    theta: float = 0.3
    metric: str = "word"
    radius: int = 22
    steps: Optional[tuple] = None
    probs: Optional[tuple] = None
    length: int = 10_000
    seeds: tuple = (0,)
    threshold: float = 0.15
    suite: Optional[str] = None
    path: Optional[str] = None
    out: Optional[str] = None
    format: str = "csv"
    memory_budget: int = 2 * 1024 ** 3

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        for key in data:
            if key not in names:
                raise ConfigError("unknown field", field=key)
        if "subcommand" not in data:
            raise ConfigError("missing", field="subcommand")
        cfg = cls(**data)
        cfg._coerce()
        return cfg

    def _coerce(self):
        if self.subcommand not in ("verify", "dist", "scan", "walk", "lie-check"):
            raise ConfigError(f"unknown subcommand {self.subcommand!r}", field="subcommand")
        for name in ("a", "b"):
            if getattr(self, name) is not None:
                setattr(self, name, _parse_vector(getattr(self, name), name))
        if self.steps is not None:
            self.steps = _parse_vectors(self.steps, "steps")
        if self.probs is not None:
            self.probs = _parse_fracs(self.probs, "probs")
        self.seeds = _parse_ints(self.seeds, "seeds")
        if self.dirs is not None and not (isinstance(self.dirs, str) and self.dirs in DIRECTION_SETS):
            self.dirs = _parse_vectors(self.dirs, "dirs")
        for name in ("r_min", "r_max", "K", "theta", "threshold"):
            v = getattr(self, name)
            if v is not None:
                try:
                    setattr(self, name, float(v))
                except (TypeError, ValueError):
                    raise ConfigError(f"expected a number, got {v!r}", field=name) from None
        for name in ("radius", "length", "memory_budget"):
            try:
                setattr(self, name, int(getattr(self, name)))
            except (TypeError, ValueError):
                raise ConfigError(f"expected an integer, got {getattr(self, name)!r}", field=name) from None
        if self.space is not None and self.space not in SPACES:
            raise ConfigError(f"unknown space {self.space!r}; known: {', '.join(SPACES)}", field="space")
        if self.sense not in (None, "line", "halfline"):
            raise ConfigError("must be 'line' or 'halfline'", field="sense")
        if self.metric not in ("word", "gauge"):
            raise ConfigError("must be 'word' or 'gauge'", field="metric")
        if self.format not in ("csv", "json"):
            raise ConfigError("must be 'csv' or 'json'", field="format")
        if (self.r_min is None) != (self.r_max is None):
            raise ConfigError("give both ends of the window", field="r_min" if self.r_min is None else "r_max")
        if self.r_min is not None:
            try:
                TailWindow(self.r_min, self.r_max, self.K)
            except ValueError as exc:
                raise ConfigError(str(exc), field="r_max") from None

    def normalized(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = [list(t) if isinstance(t, tuple) else t for t in v]
            out[f.name] = v
        return dict(sorted(out.items()))

    def window(self, default: TailWindow) -> TailWindow:
        if self.r_min is None:
            return TailWindow(default.r_min, default.r_max, self.K)
        return TailWindow(self.r_min, self.r_max, self.K)


def load_config_file(path) -> dict:
    """Read a JSON config; syntax errors carry line and column."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", field="config") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object", 1, 1)
    return data


def _locate(text: str, key: str):
    needle = f'"{key}"'
    pos = text.find(needle)
    if pos < 0:
        return None, None
    line = text.count("\n", 0, pos) + 1
    return line, pos - (text.rfind("\n", 0, pos) + 1) + 1


# ---------------------------------------------------------------------------
# output


class Table:
    def __init__(self, header):
        self.header = list(header)
        self.rows = []

    def add(self, *row):
        self.rows.append([_cell(v) for v in row])

    def csv(self) -> str:
        buf = io.StringIO()
        for row in [self.header] + self.rows:
            buf.write(",".join(row) + "\n")
        return buf.getvalue()

    def records(self):
        return [dict(zip(self.header, r)) for r in self.rows]


def _cell(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return f"{v:.6f}"
    return str(v).replace(",", ";")


def _emit(text: str, cfg: RunConfig):
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def _render(table: Table, cfg: RunConfig, extra: Optional[dict] = None) -> str:
    if cfg.format == "json":
        payload = {"rows": table.records()}
        if extra:
            payload.update(extra)
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    return table.csv()


# ---------------------------------------------------------------------------
# verify


def _ell1_rows():
    space = LatticeSpace(2, 1)
    lines = {"L1": (1, 0), "L2": (2, 1), "L3": (1, 1)}
    pairs = [("L1", "L2", Fraction(1, 2)), ("L2", "L3", Fraction(1, 3)), ("L1", "L3", Fraction(1))]
    w = TailWindow(100, 1000)
    rows = []
    exact = {}
    for p, q, expected in pairs:
        u, v = lines[p], lines[q]
        val = max(l1_s_plus_exact(u, v, "line"), l1_s_plus_exact(v, u, "line"))
        exact[(p, q)] = val
        pair = f"{p}{_label(u)}~{q}{_label(v)}"
        rows.append(("ell1", f"{pair} exact", str(expected), str(val), "0", val == expected))
        R, S = LatticeRay(space, u, "line"), LatticeRay(space, v, "line")
        a, b = s_plus_estimate(R, S, w), s_plus_estimate(S, R, w)
        est = max(a.value, b.value)
        rows.append(("ell1", f"{pair} estimate [100;1000]", str(expected), f"{est:.6f}", "0.02",
                     abs(est - float(expected)) <= 0.02))
    rep = triangle_report(float(exact[("L1", "L2")]), float(exact[("L2", "L3")]), float(exact[("L1", "L3")]))
    rows.append(("ell1", "plain triangle L1 L2 L3", "fails", "fails" if not rep.plain else "holds", "0", not rep.plain))
    rows.append(("ell1", "weak triangle L1 L2 L3", "holds", "holds" if rep.weak else "fails", "0", rep.weak))
    rows.append(("ell1", "root triangle L1 L2 L3", "holds", "holds" if rep.t_triangle else "fails", "0",
                 rep.t_triangle))
    return rows


def _lie_rows():
    alg = bundled("h3")
    e1, e2, e3 = (alg.unit(i) for i in range(3))
    prod = bch_product(alg, e1, e2)
    want = e1 + e2 + Fraction(1, 2) * e3
    rows = [("lie", "h3 e1*e2", "(1;1;1/2)", "(" + ";".join(str(t) for t in prod) + ")", "0",
             all(p == q for p, q in zip(prod, want)))]
    for label, y, expected in (("e1 vs e1+e3", e1 + e3, 0.0), ("e1 vs e3", e3, 1.0), ("e1 vs e2", e2, 1.0)):
        v = s_plus_additive_exact(alg, e1, y).value
        rows.append(("lie", f"additive s+ {label}", f"{expected:g}", f"{v:.6f}", "0", v == expected))
    return rows


def _gauge_rows(seed: int = 0):
    rows = []
    alg = bundled("h3")
    g = Gauge(alg)
    e1, e3 = alg.unit(0), alg.unit(2)
    rows.append(("gauge", "h3 |e3|", "1", f"{g(e3):.6f}", "0", g.value(e3) == GaugeValue.of(1)))
    rows.append(("gauge", "h3 |4 e3|", "2", f"{g(4 * e3):.6f}", "0", g.value(4 * e3) == GaugeValue.of(2)))
    x = e1 + e3
    gx = g.value(x)
    ok = g.value(alg.dilate(2, x)) == GaugeValue(gx.radicand * 2 ** gx.degree, gx.degree)
    rows.append(("gauge", "h3 |dilate(2; e1+e3)| = 2|e1+e3|", "holds", "holds" if ok else "fails", "0", ok))
    for name in ("h3", "h5", "free3"):
        alg = bundled(name)
        rows.extend(_gauge_property_rows(alg, seed))
    return rows


def _gauge_property_rows(alg, seed, n=500):
    g = Gauge(alg)
    rng = np.random.default_rng(seed)
    X = alg.random_vector(rng, n)
    Y = alg.random_vector(rng, n)
    gx, gy = g.batch(X), g.batch(Y)
    tol = 1e-12
    out = []
    sym = bool(np.all(g.batch(-X) == gx))
    out.append((f"|-x| = |x| on {n}", sym))
    sub = bool(np.all(g.batch(X + Y) <= (gx + gy) * (1 + tol)))
    out.append((f"|x+y| <= |x|+|y| on {n}", sub))
    ts = rng.integers(1, 50, size=n)
    big = True
    for i in range(n):
        k = alg.depth(X[i])
        lhs = g(X[i] * ts[i])
        big &= lhs <= (ts[i] ** (1.0 / k)) * gx[i] * (1 + tol)
    out.append((f"|t x| <= t^(1/n)|x| for t >= 1 on {n}", bool(big)))
    small = True
    for i in range(n):
        t = Fraction(1, int(ts[i]))
        small &= g(X[i] * t) <= (float(t) ** (1.0 / alg.c)) * gx[i] * (1 + tol)
    out.append((f"|t x| <= t^(1/c)|x| for t <= 1 on {n}", bool(small)))
    res = rescale_norms(alg, 1.0, samples=10_000, seed=seed)
    fresh, _ = validate_scales(alg, res.gauge.scales, 1.0, samples=10_000, seed=seed + 1)
    out.append(("|xy| <= |x|+|y|+1 on 10000 fresh pairs", fresh <= 0))
    return [("gauge", f"{alg.name} {label}", "holds", "holds" if ok else "fails", "1e-12", ok) for label, ok in out]


SUITES = {"ell1": _ell1_rows, "lie": _lie_rows, "gauge": _gauge_rows}


def cmd_verify(cfg: RunConfig) -> int:
    table = Table(["suite", "case", "expected", "computed", "tolerance", "status"])
    selected = [cfg.suite] if cfg.suite else list(SUITES)
    failed = 0
    for name in selected:
        if name not in SUITES:
            continue
        try:
            rows = SUITES[name]()
        except Exception as exc:  # a broken suite is a failed row, never a crash
            rows = [(name, "suite error", "runs", f"{type(exc).__name__}: {exc}", "0", False)]
        for suite, case, expected, computed, tol, ok in rows:
            failed += not ok
            table.add(suite, case, expected, computed, tol, "PASS" if ok else "FAIL")
    _emit(_render(table, cfg, {"failed": failed}), cfg)
    return EXIT_FAIL if failed else EXIT_OK


# ---------------------------------------------------------------------------
# dist


def _space_and_sets(cfg: RunConfig, line_sense: str):
    name = cfg.space or "z2-l1"
    if name.startswith("z2"):
        p = {"z2-l1": 1, "z2-l2": 2, "z2-linf": math.inf}[name]
        space = LatticeSpace(2, p)
        mk = lambda v: LatticeRay(space, v, line_sense)
        return space, mk, TailWindow(100, 1000)
    sense = "group" if line_sense == "line" else "semigroup"
    if name == "h3-word":
        space = h3.HeisenbergWordSpace(h3.WordMetricTable(cfg.radius, memory_budget=cfg.memory_budget))
        return space, lambda v: h3.orbit(v, sense, space), TailWindow(cfg.radius / 2, cfg.radius)
    space = h3.HeisenbergGaugeSpace(Gauge(bundled("h3"), alpha=1.0))
    return space, lambda v: h3.orbit(v, sense, space), TailWindow(20, 200)


def cmd_dist(cfg: RunConfig) -> int:
    if cfg.a is None or cfg.b is None:
        raise ConfigError("dist needs both --a and --b", field="a" if cfg.a is None else "b")
    line_sense = cfg.sense or "line"
    space, mk, default = _space_and_sets(cfg, line_sense)
    w = cfg.window(default)
    if len(cfg.a) != space.dim or len(cfg.b) != space.dim:
        raise ConfigError(f"vectors must have {space.dim} coordinates", field="a")
    table = Table(["space", "a", "b", "sense", "window_min", "window_max", "s_plus_ab", "s_plus_ba", "s", "t",
                   "spread", "saturated", "exact", "status"])
    try:
        R, S = mk(cfg.a), mk(cfg.b)
    except ValueError as exc:
        raise ConfigError(str(exc), field="a") from None
    try:
        ab, ba = s_plus_estimate(R, S, w), s_plus_estimate(S, R, w)
        s = max(ab.value, ba.value)
        vals = (ab.value, ba.value, s, math.sqrt(s), max(ab.spread, ba.spread), ab.saturated or ba.saturated)
        status = "ok"
    except (HorizonExceeded, EmptyWindow) as exc:
        vals = (math.nan,) * 5 + (True,)
        status = "horizon"
    exact = math.nan
    if space.name == "z2-l1":
        exact = float(max(l1_s_plus_exact(cfg.a, cfg.b, line_sense), l1_s_plus_exact(cfg.b, cfg.a, line_sense)))
    elif space.name == "z2-l2":
        exact = max(l2_s_plus_exact(cfg.a, cfg.b, line_sense), l2_s_plus_exact(cfg.b, cfg.a, line_sense))
    table.add(space.name, "(" + ";".join(map(str, cfg.a)) + ")", "(" + ";".join(map(str, cfg.b)) + ")", line_sense,
              float(w.r_min), float(w.r_max), *vals, exact, status)
    _emit(_render(table, cfg), cfg)
    return EXIT_OK


# ---------------------------------------------------------------------------
# scan


def _directions(cfg: RunConfig, dim: int):
    d = cfg.dirs if cfg.dirs is not None else "standard5"
    if d == "standard5":
        return [g[:dim] for g in h3.STANDARD5] if dim == 3 else even_directions(5, 3)
    if d == "horizontal16":
        return h3.horizontal_directions(16) if dim == 3 else even_directions(16, 3)
    if any(len(v) != dim for v in d):
        raise ConfigError(f"directions must have {dim} coordinates", field="dirs")
    return list(d)


def cmd_scan(cfg: RunConfig) -> int:
    grp = cfg.group or "h3"
    # half-lines by default: lines identify g with its inverse
    line_sense = cfg.sense or "halfline"
    if grp == "h3":
        dirs = _directions(cfg, 3)
        if cfg.metric == "word":
            space = h3.HeisenbergWordSpace(h3.WordMetricTable(cfg.radius, memory_budget=cfg.memory_budget))
            default = TailWindow(10, cfg.radius)
        else:
            space = h3.HeisenbergGaugeSpace(Gauge(bundled("h3"), alpha=1.0))
            default = TailWindow(20, 200)
        scan_sense = "group" if line_sense == "line" else "semigroup"
        rep = h3.boundary_scan(dirs, cfg.window(default), scan_sense, cfg.theta, space, _workers())
        labels, T, sat = rep.directions, rep.t_hat, rep.saturated
        comps, extra = rep.components, {"spearman": rep.spearman, "layers": rep.layer_partition,
                                        "connecting_threshold": rep.connecting_threshold}
    elif grp in ("z2-l1", "z2-l2"):
        space = LatticeSpace(2, 1 if grp == "z2-l1" else 2)
        labels = _directions(cfg, 2)
        sets = [LatticeRay(space, v, line_sense) for v in labels]
        T, sat = _pairwise_t(sets, cfg.window(TailWindow(100, 1000)))
        comps, extra = single_linkage(T, cfg.theta), {}
    else:
        raise ConfigError(f"unknown group {grp!r}", field="group")
    table = Table(["direction"] + [_label(v) for v in labels] + [f"sat{_label(v)}" for v in labels])
    for i, v in enumerate(labels):
        table.add(_label(v), *[float(T[i, j]) for j in range(len(labels))],
                  *[bool(sat[i, j]) for j in range(len(labels))])
    summary = {"components": [[_label(labels[i]) for i in c] for c in comps], "theta": cfg.theta}
    summary.update({k: v for k, v in extra.items() if k != "layers"})
    if cfg.format == "json":
        _emit(_render(table, cfg, summary), cfg)
    else:
        _emit(table.csv(), cfg)
        sizes = "+".join(str(len(c)) for c in comps)
        sys.stderr.write(f"components at theta={cfg.theta:g}: {len(comps)} ({sizes})\n")
    return EXIT_OK


def _pairwise_t(sets, w):
    n = len(sets)
    T = np.zeros((n, n))
    sat = np.zeros((n, n), dtype=bool)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    def job(p):
        i, j = p
        a, b = s_plus_estimate(sets[i], sets[j], w), s_plus_estimate(sets[j], sets[i], w)
        return p, math.sqrt(max(a.value, b.value)), a.saturated or b.saturated

    with ThreadPoolExecutor(_workers()) as ex:
        for (i, j), t, s in ex.map(job, pairs):
            T[i, j] = T[j, i] = t
            sat[i, j] = sat[j, i] = s
    return T, sat


def _label(v) -> str:
    return "(" + ";".join(str(int(t)) for t in v) + ")"


# ---------------------------------------------------------------------------
# walk


def cmd_walk(cfg: RunConfig) -> int:
    grp_name = cfg.group or "h3"
    try:
        grp = walks.group(grp_name)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0]), field="group") from None
    if cfg.steps is None:
        raise ConfigError("walk needs --steps", field="steps")
    probs = cfg.probs if cfg.probs is not None else tuple(str(Fraction(1, len(cfg.steps))) for _ in cfg.steps)
    if any(len(s) != grp.dim for s in cfg.steps):
        raise ConfigError(f"steps must have {grp.dim} coordinates", field="steps")
    try:
        dist = walks.StepDistribution(grp, list(cfg.steps), list(probs))
    except ValueError as exc:
        raise ConfigError(str(exc), field="probs") from None
    try:
        drift = walks.drift_element(dist)
    except walks.NoDrift as exc:
        sys.stderr.write(f"rejected: {exc}\n")
        return EXIT_FAIL

    def run(seed):
        traj = walks.simulate(dist, cfg.length, seed)
        windows = None
        if cfg.r_min is not None:
            windows = [cfg.window(TailWindow(1, 2))]
        return walks.convergence_check(traj, drift, grp, windows, cfg.threshold)

    with ThreadPoolExecutor(_workers()) as ex:
        reports = list(ex.map(run, cfg.seeds))
    if cfg.format == "json":
        payload = {"layer": drift.layer, "drift": [str(d) for d in drift.vector],
                   "representative": [int(t) for t in drift.representative], "scaling": drift.scaling,
                   "rng": walks.RNG_ALGORITHM,
                   "seeds": [{"seed": r.seed, "values": [round(v, 6) for v in r.values],
                              "nonincreasing": r.nonincreasing, "converged": r.converged} for r in reports]}
        _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", cfg)
    else:
        _emit(walks.walk_csv(reports), cfg)
    return EXIT_OK


# ---------------------------------------------------------------------------
# lie-check


def cmd_lie_check(cfg: RunConfig) -> int:
    if not cfg.path:
        raise ConfigError("lie-check needs a path", field="path")
    try:
        alg = load_algebra(cfg.path)
    except OSError as exc:
        raise ConfigError(f"cannot read algebra: {exc.strerror}", field="path") from None
    except AlgebraError as exc:
        names = ", ".join(str(i) for i in exc.triple) if exc.triple else ""
        sys.stdout.write(f"invalid algebra: {exc}\nviolating triple: ({names})\n")
        return EXIT_FAIL
    table = Table(["check", "result"])
    table.add("name", alg.name)
    table.add("layers", "(" + ";".join(map(str, alg.layers)) + ")")
    table.add("jacobi", "ok")
    table.add("grading", "ok")
    try:
        res = rescale_norms(alg, 1.0, samples=10_000, seed=0)
        table.add("scales", "(" + ";".join(str(s) for s in res.gauge.scales) + ")")
        table.add("max_sampled_slack", float(res.max_slack))
        table.add("bracket_constant_M", bracket_constant(alg, res.gauge))
    except SearchExhausted as exc:
        table.add("scales", f"search exhausted: {exc}")
        _emit(_render(table, cfg), cfg)
        return EXIT_FAIL
    try:
        table.add("expansion_constant_Q", float(expansion_constant(alg.c)))
    except ClassExceedsTable as exc:
        table.add("expansion_constant_Q", str(exc))
    _emit(_render(table, cfg), cfg)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point

_WORKERS = [os.cpu_count() or 1]


def _workers() -> int:
    return _WORKERS[0]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with the same fields as the flags")
    common.add_argument("--out", help="write the table here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--workers", type=int, help="parallel workers (default: CPU count)")
    window = argparse.ArgumentParser(add_help=False)
    window.add_argument("--r-min", dest="r_min", type=float)
    window.add_argument("--r-max", dest="r_max", type=float)
    window.add_argument("--K", type=float)

    p = argparse.ArgumentParser(prog="anglemetric", description="Angle metrics on unbounded sets of groups.")
    sub = p.add_subparsers(dest="subcommand", required=True)
    v = sub.add_parser("verify", parents=[common], help="run the curated example suite")
    v.add_argument("--suite", help=f"only this suite ({', '.join(SUITES)})")
    d = sub.add_parser("dist", parents=[common, window], help="s and t between two cyclic sets")
    d.add_argument("--space", choices=SPACES)
    d.add_argument("--a", type=str)
    d.add_argument("--b", type=str)
    d.add_argument("--sense", choices=("line", "halfline"))
    d.add_argument("--radius", type=int)
    s = sub.add_parser("scan", parents=[common, window], help="pairwise t matrix of directions")
    s.add_argument("--group", choices=("h3", "z2-l1", "z2-l2"))
    s.add_argument("--dirs", help="standard5, horizontal16 or 'a,b,c;a,b,c;...'")
    s.add_argument("--metric", choices=("word", "gauge"))
    s.add_argument("--sense", choices=("line", "halfline"))
    s.add_argument("--theta", type=float)
    s.add_argument("--radius", type=int)
    w = sub.add_parser("walk", parents=[common, window], help="random walk convergence to its drift")
    w.add_argument("--group", choices=sorted(walks.GROUPS))
    w.add_argument("--steps", help="'a,b,c;a,b,c;...'")
    w.add_argument("--probs", help="'1/2,1/2'")
    w.add_argument("--length", type=int)
    w.add_argument("--seeds", help="'0,1,2'")
    w.add_argument("--threshold", type=float)
    lc = sub.add_parser("lie-check", parents=[common], help="validate a Lie algebra definition")
    lc.add_argument("path")
    return p


def config_from_args(args) -> RunConfig:
    data = {}
    text = None
    if args.config:
        data = load_config_file(args.config)
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
        if data.get("subcommand", args.subcommand) != args.subcommand:
            raise ConfigError("subcommand in config differs from the command line", field="subcommand")
    for key, val in vars(args).items():
        if key in ("config", "workers") or val is None:
            continue
        data[key] = val
    data["subcommand"] = args.subcommand
    try:
        return RunConfig.from_dict(data)
    except ConfigError as exc:
        if text is not None and exc.field and exc.line is None:
            exc.line, exc.column = _locate(text, exc.field.split("[")[0])
        raise
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


COMMANDS = {"verify": cmd_verify, "dist": cmd_dist, "scan": cmd_scan, "walk": cmd_walk, "lie-check": cmd_lie_check}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    if args.workers is not None:
        if args.workers < 1:
            sys.stderr.write("config error: --workers must be positive\n")
            return EXIT_CONFIG
        _WORKERS[0] = args.workers
    try:
        cfg = config_from_args(args)
        return COMMANDS[cfg.subcommand](cfg)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except (h3.MemoryBudgetExceeded, MemoryError) as exc:
        sys.stderr.write(f"budget exceeded: {exc}\n")
        return EXIT_BUDGET


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
