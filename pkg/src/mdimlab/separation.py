"""Bowen distances, separated/spanning counts, lap counts and rate estimates.

Counts below ``2**63`` are exact integers; larger ones are carried as natural
logs (``SepCount.log_count``) with ``count = None``.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import networkx as nx
import numpy as np

from .core import HORSESHOE, Block, IntervalMap, ProductMap, orbit_flagged
from .numeric import LOG, lg, logsumexp

INT_LIMIT = 2 ** 63
DEFAULT_BUDGET = 4_000_000
ORACLE_MAX_POINTS = 200
TIE_TOL = 1e-9

METHODS = ("greedy-grid", "itinerary-lower", "lipschitz-upper", "bins-upper", "exhaustive-oracle")
DIRECTIONS = ("lower-bound", "upper-bound", "empirical")


class BudgetError(ValueError):
    """Grid enumeration too large; ``suggested_step`` is the finest feasible step."""

    def __init__(self, msg: str, suggested_step: Fraction):
        super().__init__(msg)
        self.suggested_step = suggested_step


class ScaleError(ValueError):
    """Epsilon outside the range where a bound is certified."""


class InconsistencyError(ValueError):
    """Lower rate exceeds upper rate beyond tolerance."""


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(str(LOG.nstr(LOG.mpf(x), 60)))


@dataclass(frozen=True)
class BowenContext:
    map: Union[IntervalMap, ProductMap]
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")


@dataclass(frozen=True)
class SepCount:
    n: int
    epsilon: Fraction
    count: Optional[int]
    log_count: object
    method: str
    direction: str
    note: str = ""

    def __post_init__(self):
        if self.method == "itinerary-lower" and self.direction != "lower-bound":
            raise ValueError("itinerary counts are lower bounds")
        if self.method in ("lipschitz-upper", "bins-upper") and self.direction != "upper-bound":
            raise ValueError("lipschitz counts are upper bounds")

    @classmethod
    def of(cls, n, epsilon, log_count, method, direction, count=None, note=""):
        """Build from a log count; the integer is kept when it is small and known."""
        if count is None and log_count < math.log(INT_LIMIT) - 1:
            count = int(LOG.nint(LOG.exp(log_count)))
        if count is not None and count >= INT_LIMIT:
            count = None
        return cls(n, to_fraction(epsilon), count, LOG.mpf(log_count), method, direction, note)

    @classmethod
    def exact(cls, n, epsilon, count: int, method, direction, note=""):
        count = max(1, int(count))
        return cls.of(n, epsilon, lg(count), method, direction, count if count < INT_LIMIT else None,
                      note)

    def value(self) -> str:
        if self.count is not None:
            return str(self.count)
        return "log:" + LOG.nstr(self.log_count, 20)


def write_counts(counts: Sequence[SepCount]) -> str:
    """Columnar CSV: n, epsilon, count_or_logcount, method, direction."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "epsilon", "count_or_logcount", "method", "direction"])
    for c in counts:
        w.writerow([c.n, str(c.epsilon), c.value(), c.method, c.direction])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# orbits and distances
# ---------------------------------------------------------------------------

def _orbit_exact(fmap, x, n):
    if isinstance(fmap, ProductMap):
        pts = [tuple(fmap.arith.num(c) for c in x)]
        for _ in range(n - 1):
            pts.append(fmap.eval_flagged(pts[-1])[0])
        return pts
    return orbit_flagged(fmap, x, n)[0]


def _base(fmap, p, q):
    if isinstance(fmap, ProductMap):
        return ProductMap.distance(p, q)
    return abs(p - q)


def dn_distance(ctx: BowenContext, x, y):
    """max_{0<=i<n} d(f^i x, f^i y)."""
    ox = _orbit_exact(ctx.map, x, ctx.n)
    oy = _orbit_exact(ctx.map, y, ctx.n)
    return max(_base(ctx.map, p, q) for p, q in zip(ox, oy))


@dataclass
class GridOrbits:
    """Orbits of every grid point; ``approx`` has shape (N, n, dim)."""

    points: list
    exact: list
    approx: np.ndarray
    step: Fraction
    fmap: object = field(repr=False, default=None)

    def dist_exact(self, i: int, j: int):
        return max(_base(self.fmap, p, q) for p, q in zip(self.exact[i], self.exact[j]))

    def dist_row(self, i: int, idx: np.ndarray) -> np.ndarray:
        d = np.abs(self.approx[idx] - self.approx[i]).sum(axis=2)
        return d.max(axis=1)


def grid_points_1d(step: Fraction) -> list[Fraction]:
    m = int(1 / step)
    pts = [step * i for i in range(m + 1)]
    if pts[-1] != 1:
        pts.append(Fraction(1))
    return pts


def _dim(fmap) -> int:
    return fmap.dim if isinstance(fmap, ProductMap) else 1


def _grid_size(step: Fraction) -> int:
    m = int(1 / step)
    return m + 1 + (step * m != 1)


def _check_budget(fmap, n, step, budget):
    g = _grid_size(step)
    total = g ** _dim(fmap) * n
    if total > budget:
        per = (budget / n) ** (1 / _dim(fmap))
        suggestion = Fraction(1, max(1, int(per) - 1))
        raise BudgetError(f"grid of {g ** _dim(fmap)} points x n={n} exceeds budget {budget}; "
                          f"use grid_step >= {suggestion}", suggestion)


def _chunk_orbits(fmap, xs, n):
    return [orbit_flagged(fmap, fmap.arith.num(x), n)[0] for x in xs]


def grid_orbits(ctx: BowenContext, step, workers: int = 1,
                budget: int = DEFAULT_BUDGET) -> GridOrbits:
    step = to_fraction(step)
    if step <= 0:
        raise ValueError("grid_step must be positive")
    _check_budget(ctx.map, ctx.n, step, budget)
    fmap, n = ctx.map, ctx.n
    factors = fmap.factors if isinstance(fmap, ProductMap) else (fmap,)
    xs = grid_points_1d(step)
    per_factor = []
    for f in factors:
        # factors are often the same object; reuse their orbits
        cached = next((o for g, o in per_factor if g is f), None)
        if cached is None:
            if workers > 1 and len(xs) > 1:
                size = max(1, -(-len(xs) // workers))
                chunks = [xs[i:i + size] for i in range(0, len(xs), size)]
                with ThreadPoolExecutor(max_workers=workers) as ex:
                    parts = list(ex.map(lambda c, f=f: _chunk_orbits(f, c, n), chunks))
                cached = [o for part in parts for o in part]
            else:
                cached = _chunk_orbits(f, xs, n)
        per_factor.append((f, cached))
    orbs = [o for _, o in per_factor]
    if len(factors) == 1:
        points = xs
        exact = orbs[0]
        approx = np.array([[[float(v)] for v in o] for o in exact], dtype=np.float64)
    else:
        idx = np.indices([len(xs)] * len(factors)).reshape(len(factors), -1).T
        points = [tuple(xs[i] for i in row) for row in idx]
        exact = [[tuple(orbs[c][row[c]][t] for c in range(len(factors))) for t in range(n)]
                 for row in idx]
        arrs = [np.array([[float(v) for v in o] for o in orbs[c]]) for c in range(len(factors))]
        approx = np.stack([arrs[c][idx[:, c]] for c in range(len(factors))], axis=2)
    return GridOrbits(points, exact, approx, step, fmap)


def _exceeds(go: GridOrbits, i: int, idx: np.ndarray, eps, epsf: float) -> np.ndarray:
    """Boolean mask: d_n(point i, point j) > eps for j in idx, exact near ties."""
    d = go.dist_row(i, idx)
    out = d > epsf
    near = np.nonzero(np.abs(d - epsf) <= TIE_TOL * max(1.0, epsf))[0]
    for t in near:
        out[t] = go.dist_exact(i, int(idx[t])) > eps
    return out


def _within(go: GridOrbits, i: int, idx: np.ndarray, eps, epsf: float) -> np.ndarray:
    return ~_exceeds(go, i, idx, eps, epsf)


def greedy_separated(go: GridOrbits, eps) -> list[int]:
    """Ascending sweep keeping a point iff it is eps-separated from all kept ones."""
    epsf = float(eps)
    kept: list[int] = []
    for i in range(len(go.points)):
        if not kept or _exceeds(go, i, np.array(kept), eps, epsf).all():
            kept.append(i)
    return kept


def default_step(epsilon) -> Fraction:
    return to_fraction(epsilon) / 10


def sep_count_greedy(ctx: BowenContext, epsilon, grid_step=None, workers: int = 1,
                     budget: int = DEFAULT_BUDGET, orbits: Optional[GridOrbits] = None) -> SepCount:
    eps = to_fraction(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    step = default_step(eps) if grid_step is None else to_fraction(grid_step)
    if step > eps / 4:
        raise ValueError("grid_step must be <= epsilon/4")
    go = orbits or grid_orbits(ctx, step, workers, budget)
    kept = greedy_separated(go, eps)
    return SepCount.exact(ctx.n, eps, len(kept), "greedy-grid", "lower-bound",
                          note=f"grid_step={step}")


def _cover_matrix(go: GridOrbits, eps) -> np.ndarray:
    epsf = float(eps)
    N = len(go.points)
    all_idx = np.arange(N)
    return np.stack([_within(go, i, all_idx, eps, epsf) for i in range(N)])


def greedy_cover(go: GridOrbits, eps) -> list[int]:
    """Greedy set cover of the grid by closed d_n-balls of radius eps centred at grid points."""
    cover = _cover_matrix(go, eps)
    uncovered = np.ones(len(go.points), dtype=bool)
    centers = []
    while uncovered.any():
        gains = (cover & uncovered).sum(axis=1)
        c = int(np.argmax(gains))  # ties resolve to the lowest index
        centers.append(c)
        uncovered &= ~cover[c]
    return centers


def span_count_greedy(ctx: BowenContext, epsilon, grid_step=None, workers: int = 1,
                      budget: int = DEFAULT_BUDGET, orbits: Optional[GridOrbits] = None) -> SepCount:
    """Empirical spanning count of the grid.

    Balls are closed (``d_n <= eps``) and centred at grid points, so the grid slack
    is up to ``grid_step/2`` per coordinate for off-grid points. The result is the
    smaller of the set-cover greedy and the greedy separated set, which is itself
    a cover of the grid.
    """
    eps = to_fraction(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    step = default_step(eps) if grid_step is None else to_fraction(grid_step)
    if step > eps / 4:
        raise ValueError("grid_step must be <= epsilon/4")
    go = orbits or grid_orbits(ctx, step, workers, budget)
    count = min(len(greedy_cover(go, eps)), len(greedy_separated(go, eps)))
    return SepCount.exact(ctx.n, eps, count, "greedy-grid", "empirical",
                          note=f"grid_step={step};closed balls;slack={step / 2}")


def exhaustive_sep(ctx: BowenContext, epsilon, grid_step,
                   orbits: Optional[GridOrbits] = None) -> SepCount:
    """Maximum separated subset of the grid (max clique), grids of <= 200 points only."""
    eps = to_fraction(epsilon)
    step = to_fraction(grid_step)
    go = orbits or grid_orbits(ctx, step)
    N = len(go.points)
    if N > ORACLE_MAX_POINTS:
        raise BudgetError(f"oracle limited to {ORACLE_MAX_POINTS} grid points, got {N}",
                          Fraction(1, ORACLE_MAX_POINTS - 1))
    g = nx.Graph()
    g.add_nodes_from(range(N))
    epsf = float(eps)
    for i in range(N):
        idx = np.arange(i + 1, N)
        if len(idx):
            mask = _exceeds(go, i, idx, eps, epsf)
            g.add_edges_from((i, int(j)) for j in idx[mask])
    clique, _ = nx.max_weight_clique(g, weight=None)
    return SepCount.exact(ctx.n, eps, len(clique), "exhaustive-oracle", "empirical",
                          note=f"grid_step={step}")


# ---------------------------------------------------------------------------
# certified block bounds
# ---------------------------------------------------------------------------

def _horseshoe(block: Block):
    if block.kind != HORSESHOE:
        raise ValueError("block is not a horseshoe")


def sep_lower_itinerary(block: Block, n: int, epsilon) -> SepCount:
    """ceil(s/2)**n itineraries through pairwise non-adjacent legs, for eps < |I|/s."""
    _horseshoe(block)
    if n < 1:
        raise ValueError("n must be >= 1")
    eps = to_fraction(epsilon)
    if eps >= to_fraction(block.critical_scale):
        raise ScaleError("epsilon must be below the leg width |I|/s")
    return _itinerary(block, n, eps, 1)


def gap_for(log_eps, log_width) -> int:
    """Smallest m >= 1 with m * width > eps."""
    ratio = LOG.exp(LOG.mpf(log_eps) - LOG.mpf(log_width))
    return max(1, int(LOG.floor(ratio)) + 1)


def _itinerary(block: Block, n: int, eps, m: int) -> SepCount:
    if block.legs is not None:
        per = -(-block.legs // (m + 1))
        log_per = lg(per)
    else:
        log_per = block.log_legs - LOG.log(m + 1)
    return SepCount.of(n, eps, n * log_per, "itinerary-lower", "lower-bound",
                       count=per ** n if block.legs is not None and per ** n < INT_LIMIT else None,
                       note=f"gap={m}")


def sep_lower_spaced(block: Block, n: int, epsilon) -> SepCount:
    """ceil(s/(m+1))**n with m = floor(eps/w)+1, valid at any eps < |I|."""
    _horseshoe(block)
    eps = to_fraction(epsilon)
    m = gap_for(lg(eps), block.log_critical_scale)
    if m >= (block.legs or INT_LIMIT):
        return SepCount.exact(n, eps, 1, "itinerary-lower", "lower-bound", note=f"gap={m}")
    return _itinerary(block, n, eps, m)


def log_span_upper_lipschitz(log_slope, n: int, log_eps, log_length):
    return log_ceil_up(log_length + n * LOG.mpf(log_slope) - log_eps)


def log_ceil_up(logx):
    """log(ceil(x)); exact when small, otherwise the upper bound log(x+1)."""
    logx = LOG.mpf(logx)
    if logx < 150:
        return lg(max(1, int(LOG.ceil(LOG.exp(logx) * (1 - LOG.mpf(2) ** -200)))))
    return logx + LOG.exp(-logx)


def span_upper_lipschitz(slope, n: int, epsilon, interval_length=1, log_slope=None) -> SepCount:
    """ceil(L * slope**n / eps); bounds both span and sep for a slope-bounded map."""
    eps = to_fraction(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    ls = LOG.mpf(log_slope) if log_slope is not None else lg(slope)
    if ls < 0:
        raise ValueError("slope must be >= 1")
    lc = log_span_upper_lipschitz(ls, n, lg(eps), lg(to_fraction(interval_length)))
    return SepCount.of(n, eps, lc, "lipschitz-upper", "upper-bound")


def span_upper_bins(n: int, epsilon, interval_length=1) -> SepCount:
    """(floor(L/eps)+1)**n: orbits sharing a bin sequence stay eps-close."""
    eps = to_fraction(epsilon)
    M = int(to_fraction(interval_length) / eps) + 1
    return SepCount.of(n, eps, n * lg(M), "bins-upper", "upper-bound",
                       count=M ** n if M ** n < INT_LIMIT else None)


def block_upper(block: Block, n: int, epsilon) -> SepCount:
    """Smaller of the Lipschitz and bin bounds for one block."""
    if block.kind != HORSESHOE:
        return span_upper_bins(1, epsilon, to_fraction(block.length))
    a = span_upper_lipschitz(None, n, epsilon, to_fraction(block.length), log_slope=block.log_legs)
    b = span_upper_bins(n, epsilon, to_fraction(block.length))
    return a if a.log_count <= b.log_count else b


# ---------------------------------------------------------------------------
# laps and rates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LapCount:
    n: int
    count: Optional[int]
    log_count: object
    block_rates: tuple  # (index, (1/n) log laps of the block)


def lap_count(fmap: IntervalMap, n: int, depth: Optional[int] = None) -> LapCount:
    """Laps of f**n on the first ``depth`` blocks: sum of s_k**n plus identity segments."""
    if n < 1:
        raise ValueError("n must be >= 1")
    blocks = fmap.blocks(depth)
    logs, rates = [], []
    exact = 0
    small = True
    for b in blocks:
        if b.kind == HORSESHOE:
            logs.append(n * b.log_legs)
            rates.append((b.index, LOG.mpf(b.log_legs)))
            if b.legs is not None and small:
                exact += b.legs ** n
            else:
                small = False
        else:
            logs.append(LOG.zero)
            exact += 1
    total = logsumexp(logs) if logs else LOG.zero
    count = exact if small and exact < INT_LIMIT else None
    if count is not None:
        total = lg(count)
    return LapCount(n, count, total, tuple(rates))


@dataclass(frozen=True)
class RateEstimate:
    epsilon: Fraction
    lower_rate: object
    upper_rate: object
    n_used: tuple
    entropy_proxy: object = None


def rate_estimate(counts: Sequence[SepCount], n_min: int = 1, tol: float = 1e-9,
                  entropy_proxy=None) -> RateEstimate:
    """lower = max_n (1/n) log(lower counts); upper = min_{n>=n_min} (1/n) log(upper counts)."""
    ns = sorted({c.n for c in counts})
    if len(ns) < 3:
        raise ValueError("need at least 3 horizons")
    eps = {c.epsilon for c in counts}
    if len(eps) != 1:
        raise ValueError("counts must share one epsilon")
    lows = [c.log_count / c.n for c in counts if c.direction == "lower-bound"]
    ups = [c.log_count / c.n for c in counts if c.direction == "upper-bound" and c.n >= n_min]
    lower = max(lows) if lows else LOG.zero
    upper = min(ups) if ups else LOG.inf
    if lower > upper + tol:
        raise InconsistencyError(f"lower rate {lower} exceeds upper rate {upper}")
    return RateEstimate(eps.pop(), lower, upper, tuple(ns), entropy_proxy)
