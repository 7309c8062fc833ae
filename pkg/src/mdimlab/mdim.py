"""Finite-scale metric mean dimension curves, closed-form predictors and reports.

Every ratio is computed in natural-log space from schedule data, so blocks with
astronomically many legs (tower indices) cost nothing to evaluate.

Curve points are evaluated at ``eps -> eps_k`` from below: the itinerary bound
uses gap ``m = ceil(eps/w)`` legs, which at the critical scale gives ``ceil(s/2)``.
"""
from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .core import Chain, HORSESHOE, HostPiece, IntervalMap, LogBlock, ProductMap, Segments
from .numeric import LOG, lg

WINDOW = 5
FAR_LEVELS = 3
FAR_TOL = LOG.mpf(10) ** -30
SMALL_LOG = 150  # below this a log-count is turned back into an exact integer


class DegenerateError(ValueError):
    """Horseshoe data with log s = 0."""


class OrderingError(ValueError):
    """Report values violate ddf <= liminf <= limsup <= box bound."""


# ---------------------------------------------------------------------------
# log-space block data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PieceData:
    """Log-space view of one piece of a map: its chain schedule and width shift."""

    index: int
    chain: Optional[Chain]
    static: tuple  # LogBlocks of explicit horseshoe segments
    opaque: bool = False

    @property
    def shift(self):
        return lg(self.chain.width) if self.chain is not None else LOG.zero

    def horseshoes(self, depth: int) -> list[LogBlock]:
        if self.chain is None:
            return list(self.static[:depth])
        return self.chain.log_blocks(depth, self.index)

    def until(self, log_floor) -> list[LogBlock]:
        """All horseshoe blocks with log length >= log_floor (lengths are non-increasing)."""
        if self.chain is None:
            return [b for b in self.static if b.log_length >= log_floor]
        sch = self.chain.schedule
        out = []
        for k in sch.horseshoes():
            ll = sch.log_length(k) + self.shift
            if ll < log_floor:
                break
            out.append(LogBlock(k, ll, sch.log_legs(k), None, self.index))
        return out


def pieces_of(fmap: IntervalMap) -> list[PieceData]:
    out = []
    for i, p in enumerate(fmap.pieces):
        if isinstance(p, Chain):
            out.append(PieceData(i, p, ()))
        elif isinstance(p, Segments):
            hs = tuple(LogBlock(b.index, b.log_length, b.log_legs, b.legs, i)
                       for b in p.blocks() if b.kind == HORSESHOE)
            out.append(PieceData(i, None, hs))
        elif isinstance(p, HostPiece):
            out.append(PieceData(i, None, (), opaque=True))
    return out


def _ratio(log_length, log_legs):
    if log_legs == 0:
        raise DegenerateError("a horseshoe with one leg has no predictor")
    return LOG.mpf(log_length) / log_legs


def misiu_value(log_length, log_legs):
    """p = 1/|1 - log|I|/log s|."""
    return 1 / abs(1 - _ratio(log_length, log_legs))


def ddf_value(prev: LogBlock, cur: LogBlock):
    """(log s_{k-1}/log s_k) / (1 - log|I_k|/log s_k)."""
    return (LOG.mpf(prev.log_legs) / cur.log_legs) / (1 - _ratio(cur.log_length, cur.log_legs))


# ---------------------------------------------------------------------------
# predictors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Predictor:
    values: tuple  # (piece, k, p_k)
    limit: object  # None when the far-index evaluation does not settle
    piece_limits: tuple = ()
    diverging: bool = False

    def at(self, position: int, piece: Optional[int] = None):
        """Value at the ``position``-th horseshoe block (1-based) of a piece."""
        vals = [v for p, _, v in self.values if piece is None or p == piece]
        return vals[position - 1]

    def best_at(self, position: int):
        """Largest piece value at the given per-piece position."""
        pieces = sorted({p for p, _, _ in self.values})
        return max(self.at(position, p) for p in pieces)


def _far_limit(piece: PieceData):
    if piece.chain is None:
        return None
    sch = piece.chain.schedule
    vals = []
    for t in range(FAR_LEVELS):
        k = sch.far(t)
        if k is None:
            return None
        vals.append(misiu_value(sch.log_length(k) + piece.shift, sch.log_legs(k)))
    if abs(vals[-1] - vals[-2]) > FAR_TOL:
        return None
    return vals[-1]


def predictor_misiu(fmap, depth: int) -> Predictor:
    """p_k for the first ``depth`` horseshoe blocks of each piece, plus the far-index limit.

    For a product map the limit is the sum of the factor limits.
    """
    if isinstance(fmap, ProductMap):
        parts = [predictor_misiu(f, depth) for f in fmap.factors]
        lims = [p.limit for p in parts]
        total = None if any(x is None for x in lims) else LOG.fsum(lims)
        vals = tuple((i, k, v) for i, p in enumerate(parts) for _, k, v in p.values)
        return Predictor(vals, total, tuple(lims), total is None)
    values, limits = [], []
    for piece in pieces_of(fmap):
        hs = piece.horseshoes(depth)
        for b in hs:
            values.append((piece.index, b.index, misiu_value(b.log_length, b.log_legs)))
        if hs:
            limits.append(_far_limit(piece))
    if not limits:
        return Predictor(tuple(values), LOG.zero, (), False)
    lim = None if any(x is None for x in limits) else max(limits)
    return Predictor(tuple(values), lim, tuple(limits), lim is None)


def ddf_series(blocks: Sequence[LogBlock]) -> list:
    """Values of the lower-bound expression over consecutive horseshoe blocks."""
    return [ddf_value(a, b) for a, b in zip(blocks, blocks[1:])]


def ddf_lower(fmap: IntervalMap, depth: int, window: int = WINDOW):
    """Trailing-window minimum of the lower-bound expression, maximized over pieces."""
    best = LOG.zero
    for piece in pieces_of(fmap):
        series = ddf_series(piece.horseshoes(depth))
        if series:
            best = max(best, min(series[-window:]))
    return best


# ---------------------------------------------------------------------------
# finite-scale curve
# ---------------------------------------------------------------------------

def _log_exact_count(logx):
    """Integer-valued helper: floor(x) when x is moderate, else None."""
    if logx < SMALL_LOG:
        return int(LOG.floor(LOG.exp(logx) * (1 + LOG.mpf(2) ** -200)))
    return None


def lower_rate(block: LogBlock, log_eps):
    """log ceil(s/(m+1)) with m = ceil(eps/w), the itinerary rate as eps increases to eps."""
    log_q = LOG.mpf(log_eps) - block.log_critical_scale  # log(eps/w)
    if log_q >= block.log_legs:
        return LOG.zero
    s = block.legs if block.legs is not None else _log_exact_count(block.log_legs)
    if log_q < SMALL_LOG and s is not None:
        q = LOG.exp(log_q)
        m = max(1, int(LOG.ceil(q * (1 - LOG.mpf(2) ** -200))))
        if m >= s:
            return LOG.zero
        return lg(-(-s // (m + 1)))
    # ceil(s/(m+1)) >= s/(q+2)
    return max(LOG.zero, block.log_legs - LOG.log(LOG.exp(log_q) + 2))


def _log_floor_plus_one(logx):
    """log(floor(x) + 1), or the upper bound log(x + 1) for large x."""
    n = _log_exact_count(logx)
    if n is not None:
        return lg(n + 1)
    return logx + LOG.log(1 + LOG.exp(-logx))


def upper_rate(block: LogBlock, log_eps, n_max: int):
    """min over n <= n_max of (1/n) log min(ceil(L s^n/eps), M^n), M = floor(L/eps)+1."""
    log_l = LOG.mpf(block.log_length) - log_eps
    log_m = _log_floor_plus_one(log_l)
    best = log_m
    for n in range(1, n_max + 1):
        x = log_l + n * block.log_legs
        lip = _log_floor_plus_one(x)
        best = min(best, lip / n)
    return max(LOG.zero, best)


@dataclass(frozen=True)
class CurvePoint:
    k: int
    piece: int
    kind: str  # critical | bracket
    log_eps: object
    lower_ratio: object
    upper_ratio: object
    method_lower: str = "itinerary-lower"
    method_upper: str = "lipschitz-upper"

    @property
    def epsilon(self):
        return LOG.exp(self.log_eps)


@dataclass(frozen=True)
class MdimCurve:
    points: tuple
    schedule: str
    n_max: int
    depth: int
    map_id: str = ""

    def write_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "epsilon", "log_eps", "lower_ratio", "upper_ratio",
                    "method_lower", "method_upper"])
        for p in self.points:
            w.writerow([p.k, LOG.nstr(p.epsilon, 17), LOG.nstr(p.log_eps, 17),
                        LOG.nstr(p.lower_ratio, 17), LOG.nstr(p.upper_ratio, 17),
                        p.method_lower, p.method_upper])
        return buf.getvalue()


def _scales(pieces: list[PieceData], depth: int, schedule: str):
    out = []
    for piece in pieces:
        for b in piece.horseshoes(depth):
            out.append((b, "critical", b.log_critical_scale))
            if schedule == "bracket":
                out.append((b, "bracket", LOG.mpf(b.log_length)))
    # decreasing epsilon
    out.sort(key=lambda t: (-t[2], t[0].piece, t[0].index, t[1]))
    return out


def _point(pieces: list[PieceData], blk: LogBlock, kind: str, log_eps, n_max: int) -> CurvePoint:
    log_eps = LOG.mpf(log_eps)
    abs_log = abs(log_eps)
    if abs_log == 0:
        raise ValueError("curve scale must be below 1")
    low, up = LOG.zero, LOG.zero
    up_method = "lipschitz-upper"
    floor = log_eps - LOG.log(3)  # blocks shorter than eps/3 fall in the static cover
    for piece in pieces:
        if piece.opaque:
            up = max(up, abs_log)  # nothing is known: fall back to the box bound
            up_method = "box-bound"
            continue
        for b in piece.until(floor):
            low = max(low, lower_rate(b, log_eps))
            up = max(up, upper_rate(b, log_eps, n_max))
    return CurvePoint(blk.index, blk.piece, kind, log_eps, low / abs_log, up / abs_log,
                      "itinerary-lower", up_method)


def mdim_curve(fmap: IntervalMap, n_max: int = 8, depth: int = 10, schedule: str = "critical",
               workers: int = 1) -> MdimCurve:
    """Lower/upper ratios at the critical scale of each of the first ``depth`` horseshoe blocks.

    ``schedule="bracket"`` also evaluates at each block length ``|I_k|``.
    """
    if isinstance(fmap, ProductMap):
        raise TypeError("curves are computed for interval maps; use the predictors for products")
    if n_max < 3:
        raise ValueError("n_max must be >= 3")
    if schedule not in ("critical", "bracket"):
        raise ValueError(f"unknown schedule {schedule!r}")
    pieces = pieces_of(fmap)
    scales = _scales(pieces, depth, schedule)
    if not scales:
        # no horseshoe at all: dyadic scales, so the curve is still sampled
        l2 = LOG.log(2)
        scales = [(LogBlock(k, -k * l2, LOG.zero, 1), "dyadic", -k * l2) for k in range(1, depth + 1)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            pts = list(ex.map(lambda s: _point(pieces, s[0], s[1], s[2], n_max), scales))
    else:
        pts = [_point(pieces, b, kind, le, n_max) for b, kind, le in scales]
    return MdimCurve(tuple(pts), schedule, n_max, depth, fmap.name)


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MdimReport:
    liminf_est: object
    limsup_est: object
    predictor_misiu: object  # None flags divergence
    ddf_lower: object
    box_bound: int
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def fmt(x):
            return None if x is None else LOG.nstr(LOG.mpf(x), 17)
        d = {"liminf_est": fmt(self.liminf_est), "limsup_est": fmt(self.limsup_est),
             "predictor_misiu": fmt(self.predictor_misiu), "ddf_lower": fmt(self.ddf_lower),
             "box_bound": self.box_bound, "label": "finite-scale"}
        d.update({k: str(v) for k, v in self.provenance.items()})
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"


def mdim_report(curve: MdimCurve, predictor: Optional[Predictor] = None, ddf=None,
                box_bound: int = 1, window: int = WINDOW, tol: float = 1e-6,
                provenance: Optional[dict] = None) -> MdimReport:
    """Trailing-window min of lower ratios and max of upper ratios, with ordering checks."""
    if not curve.points:
        raise ValueError("empty curve")
    tail = curve.points[-window:]
    liminf = min(p.lower_ratio for p in tail)
    limsup = max(p.upper_ratio for p in tail)
    ddf = LOG.zero if ddf is None else LOG.mpf(ddf)
    chain = [("0", LOG.zero), ("ddf_lower", ddf), ("liminf_est", liminf),
             ("limsup_est", limsup), ("box_bound", LOG.mpf(box_bound))]
    for (na, a), (nb, b) in zip(chain, chain[1:]):
        if a > b + tol:
            raise OrderingError(f"{na}={LOG.nstr(a, 8)} exceeds {nb}={LOG.nstr(b, 8)}")
    prov = {"map": curve.map_id, "K": curve.depth, "n_max": curve.n_max,
            "schedule": curve.schedule}
    prov.update(provenance or {})
    return MdimReport(liminf, limsup, None if predictor is None else predictor.limit, ddf,
                      box_bound, prov)
