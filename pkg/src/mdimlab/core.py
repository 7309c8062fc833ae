"""Piecewise-affine interval maps built from uniform full-branch horseshoe blocks.

A map of [0,1] is a sorted tuple of *pieces*:

* :class:`Chain` -- a (possibly infinite) family of blocks generated on demand
  from a :class:`Schedule`, tiling ``[lo, hi]`` from one end and accumulating
  at the other;
* :class:`Segments` -- a finite explicit list of blocks;
* :class:`HostPiece` -- an arbitrary map evaluated (conjugated) on a sub-range.

A point lying exactly on a boundary is evaluated by the piece/block on its left.
"""
from __future__ import annotations

import bisect
import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Optional, Sequence

from .numeric import LOG, Arith, DomainError, Number, join, lg

K_MAX = 64
# leg counts with more bits than this are kept only as logarithms
EXACT_LEGS_BITS = 4096

HORSESHOE = "horseshoe"
IDENTITY = "identity"
AFFINE = "affine"


class ParityError(ValueError):
    """Horseshoe blocks need an odd number (>= 3) of legs."""


class GluingError(ValueError):
    pass


class FixedPointError(ValueError):
    pass


class GeometryError(ValueError):
    pass


# ---------------------------------------------------------------------------
# small value types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    left: Number
    right: Number

    def __post_init__(self):
        if self.right < self.left:
            raise GeometryError(f"empty interval [{self.left}, {self.right}]")

    @property
    def length(self) -> Number:
        return self.right - self.left

    def __contains__(self, x) -> bool:
        return self.left <= x <= self.right


@dataclass(frozen=True)
class AffineChart:
    """The increasing affine map sending ``domain`` onto [0,1]."""

    domain: Interval

    def __call__(self, x):
        return (x - self.domain.left) / self.domain.length

    def inverse(self, u):
        return self.domain.left + self.domain.length * u


def full_branch(u, legs: int):
    """The s-branch full map of [0,1]: branch j covers [j/s,(j+1)/s], first one increasing."""
    if u <= 0:
        return u * 0
    if u >= 1:
        return u * 0 + 1
    t = u * legs
    j = math.floor(t) if isinstance(t, Fraction) else int(t)  # mpf int() truncates, t > 0
    frac = t - j
    if frac == 0:
        # breakpoint: use the branch on the left
        j -= 1
        frac = frac + 1
    return frac if j % 2 == 0 else 1 - frac


@dataclass(frozen=True)
class Block:
    """One segment of an interval map.

    ``kind`` is ``horseshoe`` (``legs`` equal affine full branches),
    ``identity`` or ``affine`` (a single affine piece with endpoint values
    ``image``). ``legs`` is ``None`` when the count is only known through
    ``log_legs``.
    """

    index: int
    interval: Interval
    legs: Optional[int]
    log_legs: object
    kind: str = HORSESHOE
    image: Optional[tuple] = None

    @property
    def length(self):
        return self.interval.length

    @property
    def log_length(self):
        return lg(self.interval.length)

    @property
    def critical_scale(self):
        """Leg width |I|/s (the scale epsilon_k)."""
        if self.kind != HORSESHOE:
            return self.length
        if self.legs is None:
            return LOG.exp(self.log_critical_scale)
        return self.length / self.legs

    @property
    def log_critical_scale(self):
        return self.log_length - self.log_legs

    def evaluate(self, x):
        if self.kind == IDENTITY:
            return x
        a, L = self.interval.left, self.interval.length
        if self.kind == AFFINE:
            y0, y1 = self.image
            return y0 + (y1 - y0) * ((x - a) / L)
        if self.legs is None:
            raise OverflowError(f"block {self.index} has too many legs to evaluate")
        return a + L * full_branch((x - a) / L, self.legs)

    def leg(self, j: int) -> Interval:
        """The j-th leg (1-based, left to right)."""
        if self.legs is None:
            raise OverflowError("leg count not representable")
        w = self.length / self.legs
        a = self.interval.left
        return Interval(a + (j - 1) * w, a + j * w if j < self.legs else self.interval.right)

    def scaled(self, off, scale, arith: Arith) -> "Block":
        conv = arith.num
        iv = Interval(conv(off) + conv(scale) * conv(self.interval.left),
                      conv(off) + conv(scale) * conv(self.interval.right))
        image = None
        if self.image is not None:
            image = tuple(conv(off) + conv(scale) * conv(y) for y in self.image)
        return Block(self.index, iv, self.legs, self.log_legs, self.kind, image)


def make_block(index: int, interval: Interval, legs, kind: str = HORSESHOE) -> Block:
    """Build a block, validating the leg count. ``legs`` may be an int or a log value."""
    if kind != HORSESHOE:
        return Block(index, interval, 1, LOG.zero, kind)
    if interval.length <= 0:
        raise GeometryError("horseshoe block needs positive length")
    if isinstance(legs, int):
        if legs < 3 or legs % 2 == 0:
            raise ParityError(f"block {index}: legs={legs} must be odd and >= 3")
        return Block(index, interval, legs, lg(legs), kind)
    return Block(index, interval, None, LOG.mpf(legs), kind)


def uniform_block(interval: Interval, legs: int, index: int = 1) -> Block:
    """Horseshoe block T^-1 o (full legs-branch map) o T on ``interval``."""
    if not isinstance(legs, int):
        raise TypeError("legs must be an integer")
    return make_block(index, interval, legs)


def tent_eval(x):
    """g(x) = |1 - |3x - 1||."""
    if x < 0 or x > 1:
        raise DomainError(f"tent map argument {x} outside [0,1]")
    return abs(1 - abs(3 * x - 1))


@dataclass(frozen=True)
class TentIterate:
    """Piecewise-affine description of the n-fold tent iterate g^n."""

    n: int
    max_exact_bits: int = EXACT_LEGS_BITS

    @property
    def log_branches(self):
        return self.n * LOG.log(3)

    @property
    def branches(self) -> Optional[int]:
        if self.n * math.log2(3) > self.max_exact_bits:
            return None
        return 3 ** self.n

    @property
    def slope(self) -> Optional[int]:
        return self.branches

    def breakpoints(self) -> list[Fraction]:
        s = self.branches
        if s is None:
            raise OverflowError(f"3^{self.n} exceeds the exact range")
        return [Fraction(j, s) for j in range(s + 1)]

    def orientation(self, j: int) -> int:
        """+1 for increasing branch j (1-based), -1 for decreasing."""
        return 1 if j % 2 == 1 else -1

    def __call__(self, x):
        if x < 0 or x > 1:
            raise DomainError(f"argument {x} outside [0,1]")
        s = self.branches
        if s is None:
            raise OverflowError(f"3^{self.n} exceeds the exact range")
        return full_branch(x, s)


def tent_iterate(n: int, max_exact_bits: int = EXACT_LEGS_BITS) -> TentIterate:
    if n < 1:
        raise ValueError("n must be >= 1")
    return TentIterate(n, max_exact_bits)


# ---------------------------------------------------------------------------
# schedules and pieces
# ---------------------------------------------------------------------------

def _all_indices(start: int) -> Iterator[int]:
    k = start
    while True:
        yield k
        k += 1


@dataclass(frozen=True)
class Schedule:
    """Rule generating block k of a family on the unit interval.

    ``length(k, arith)`` is the unit-scale block length; ``legs(k)`` returns an
    int, or ``None`` for identity segments; ``log_legs(k)`` must work for every
    horseshoe index, including ones far too large to materialize.
    """

    length: Callable[[int, Arith], Number]
    log_length: Callable[[int], object]
    legs: Callable[[int], Optional[int]]
    log_legs: Callable[[int], object]
    is_horseshoe: Callable[[int], bool]
    start: int = 1
    stop: Optional[int] = None
    anchor: str = "left"
    horseshoe_indices: Optional[Callable[[], Iterator[int]]] = None
    label: str = ""
    # level t -> an astronomically large horseshoe index (an mpf), for limits
    far_index: Optional[Callable[[int], object]] = None

    def far(self, t: int):
        if self.far_index is not None:
            return self.far_index(t)
        if self.horseshoe_indices is None and self.stop is None:
            return LOG.mpf(10) ** (20 * 2 ** t)
        return None

    def horseshoes(self) -> Iterator[int]:
        it = self.horseshoe_indices() if self.horseshoe_indices else (
            k for k in _all_indices(self.start) if self.is_horseshoe(k))
        for k in it:
            if self.stop is not None and k > self.stop:
                return
            yield k


@dataclass(frozen=True)
class LogBlock:
    """Log-space data of one horseshoe block (no coordinates)."""

    index: int
    log_length: object
    log_legs: object
    legs: Optional[int]
    piece: int = 0

    @property
    def log_critical_scale(self):
        return self.log_length - self.log_legs


class Chain:
    """Lazily materialized blocks of a schedule tiling ``[lo, hi]``."""

    def __init__(self, schedule: Schedule, lo, hi, arith: Arith, k_max: int = K_MAX):
        self.schedule = schedule
        self.arith = arith
        self.lo = arith.num(lo)
        self.hi = arith.num(hi)
        self.k_max = k_max
        self._blocks: list[Block] = []
        self._keys: list = []
        self._front = self.lo if schedule.anchor == "left" else self.hi
        self._next = schedule.start
        self._lock = threading.Lock()

    # -- construction helpers
    @property
    def width(self):
        return self.hi - self.lo

    @property
    def finite(self) -> bool:
        return self.schedule.stop is not None

    def conjugated(self, off, scale, arith: Arith) -> "Chain":
        a = arith.num
        return Chain(self.schedule, a(off) + a(scale) * a(self.lo),
                     a(off) + a(scale) * a(self.hi), arith, self.k_max)

    def _exhausted(self) -> bool:
        return (self.finite and self._next > self.schedule.stop) or len(self._blocks) >= self.k_max

    def _grow(self) -> bool:
        if self._exhausted():
            return False
        k = self._next
        sch = self.schedule
        step = self.width * sch.length(k, self.arith)
        if step <= 0:
            raise GeometryError(f"block {k} has non-positive length")
        if sch.anchor == "left":
            iv = self._interval(self._front, self._front + step, k)
            self._front = iv.right
            key = iv.right
        else:
            iv = self._interval(self._front - step, self._front, k)
            self._front = iv.left
            key = -iv.left
        if sch.is_horseshoe(k):
            legs = sch.legs(k)
            blk = make_block(k, iv, legs if legs is not None else sch.log_legs(k))
        else:
            blk = make_block(k, iv, 1, IDENTITY)
        self._blocks.append(blk)
        self._keys.append(key)
        self._next = k + 1
        return True

    def _interval(self, a, b, k) -> Interval:
        if b <= a:
            raise GeometryError(f"block {k} is below the working precision "
                                f"({self.arith.label()}); use more bits or a smaller depth")
        return Interval(a, b)

    def materialize(self, count: int) -> list[Block]:
        with self._lock:
            while len(self._blocks) < count and self._grow():
                pass
            return list(self._blocks[:count])

    def blocks(self) -> list[Block]:
        with self._lock:
            return list(self._blocks)

    def materialize_all(self) -> list[Block]:
        return self.materialize(self.k_max)

    def locate(self, x):
        """Return ``(block or None, truncated)`` for a point of [lo, hi]."""
        left = self.schedule.anchor == "left"
        with self._lock:
            if not self._blocks:
                self._grow()
            while (x > self._front if left else x < self._front) and self._grow():
                pass
            beyond = x > self._front if left else x < self._front
            if beyond:
                if not self.finite and x == (self.hi if left else self.lo):
                    return None, False  # accumulation point, fixed
                return None, not self.finite
            if left:
                i = bisect.bisect_left(self._keys, x)
            else:
                i = bisect.bisect_right(self._keys, -x)
                if x == self.hi:
                    i = 0
            i = min(i, len(self._blocks) - 1)
            return self._blocks[i], False

    def eval_flagged(self, x):
        blk, trunc = self.locate(x)
        return (x if blk is None else blk.evaluate(x)), trunc

    def log_blocks(self, depth: int, piece: int = 0) -> list[LogBlock]:
        """First ``depth`` horseshoe blocks in log-space (no materialization)."""
        sch = self.schedule
        shift = lg(self.width)
        out = []
        for k in sch.horseshoes():
            if len(out) >= depth:
                break
            legs = sch.legs(k) if _small_log(sch.log_legs(k)) else None
            out.append(LogBlock(k, sch.log_length(k) + shift, sch.log_legs(k), legs, piece))
        return out


def _small_log(log_legs) -> bool:
    return log_legs < EXACT_LEGS_BITS * math.log(2)


class Segments:
    """Finite explicit list of blocks tiling ``[lo, hi]`` left to right."""

    def __init__(self, blocks: Sequence[Block], arith: Arith):
        self.arith = arith
        self._blocks = list(blocks)
        self.lo = self._blocks[0].interval.left
        self.hi = self._blocks[-1].interval.right
        self._keys = [b.interval.right for b in self._blocks]
        self.finite = True

    def conjugated(self, off, scale, arith: Arith) -> "Segments":
        return Segments([b.scaled(off, scale, arith) for b in self._blocks], arith)

    def blocks(self) -> list[Block]:
        return list(self._blocks)

    def materialize(self, count: int) -> list[Block]:
        return list(self._blocks[:count])

    def materialize_all(self) -> list[Block]:
        return self.blocks()

    def locate(self, x):
        i = min(bisect.bisect_left(self._keys, x), len(self._blocks) - 1)
        return self._blocks[i], False

    def eval_flagged(self, x):
        blk, _ = self.locate(x)
        return blk.evaluate(x), False

    def log_blocks(self, depth: int, piece: int = 0) -> list[LogBlock]:
        out = [LogBlock(b.index, b.log_length, b.log_legs, b.legs, piece)
               for b in self._blocks if b.kind == HORSESHOE]
        return out[:depth]


class HostPiece:
    """``x -> off + scale * host((x - off) / scale)`` on ``[lo, hi]``."""

    def __init__(self, lo, hi, host: "IntervalMap", arith: Arith, off=0, scale=1):
        a = arith.num
        self.lo, self.hi = a(lo), a(hi)
        self.host = host
        self.arith = arith
        self.off, self.scale = a(off), a(scale)
        self.finite = True

    def conjugated(self, off, scale, arith: Arith) -> "HostPiece":
        a = arith.num
        return HostPiece(a(off) + a(scale) * self.lo, a(off) + a(scale) * self.hi, self.host,
                         arith, a(off) + a(scale) * self.off, a(scale) * self.scale)

    def blocks(self) -> list[Block]:
        return []

    materialize_all = blocks

    def materialize(self, count: int) -> list[Block]:
        return []

    def eval_flagged(self, x):
        y, t = self.host.eval_flagged((x - self.off) / self.scale)
        return self.off + self.scale * y, t

    def log_blocks(self, depth: int, piece: int = 0) -> list[LogBlock]:
        return []


# ---------------------------------------------------------------------------
# maps
# ---------------------------------------------------------------------------

class IntervalMap:
    """An immutable self-map of [0,1] assembled from pieces."""

    def __init__(self, name: str, pieces: Sequence, arith: Arith, meta: Optional[dict] = None):
        self.name = name
        self.arith = arith
        self.pieces = tuple(pieces)
        self.meta = dict(meta or {})
        self._his = [p.hi for p in self.pieces]
        if self.pieces[0].lo != 0 or self.pieces[-1].hi != 1:
            raise GeometryError("pieces must tile [0,1]")

    def __repr__(self):
        return f"IntervalMap({self.name!r}, {len(self.pieces)} pieces, {self.arith.label()})"

    def piece_at(self, x):
        i = min(bisect.bisect_left(self._his, x), len(self.pieces) - 1)
        return self.pieces[i]

    def eval_flagged(self, x):
        """Return ``(value, truncated)``; truncated marks the unmaterialized tail."""
        x = self.arith.num(x)
        r = self.arith.radius
        if x < -r or x > 1 + r:
            raise DomainError(f"{x} outside [0,1]")
        x = min(max(x, x * 0), x * 0 + 1)
        return self.piece_at(x).eval_flagged(x)

    def __call__(self, x):
        return self.eval_flagged(x)[0]

    def blocks(self, depth: Optional[int] = None) -> list[Block]:
        """Materialized blocks of every piece in spatial order (up to ``depth`` per chain)."""
        out = []
        for p in self.pieces:
            bl = p.materialize(depth) if depth is not None else p.materialize_all()
            if isinstance(p, Chain) and p.schedule.anchor == "right":
                bl = bl[::-1]
            out.extend(bl)
        return out

    def horseshoe_blocks(self, depth: Optional[int] = None) -> list[Block]:
        return [b for b in self.blocks(depth) if b.kind == HORSESHOE]

    def boundaries(self, depth: Optional[int] = None) -> list:
        pts = set()
        for b in self.blocks(depth):
            pts.add(b.interval.left)
            pts.add(b.interval.right)
        for p in self.pieces:
            pts.add(p.lo)
            pts.add(p.hi)
        return sorted(pts)

    def log_blocks(self, depth: int) -> list[LogBlock]:
        """Horseshoe blocks in log-space, ``depth`` per piece, ordered by leg count."""
        groups = []
        for i, p in enumerate(self.pieces):
            g = p.log_blocks(depth, i)
            if g:
                groups.append((g, not p.finite))
        merged = [b for g, _ in groups for b in g]
        infinite = [g for g, inf in groups if inf]
        if len(infinite) > 1:
            # keep the merged ordering honest: stop where the shallowest chain stops
            cap = min(max(b.log_legs for b in g) for g in infinite)
            merged = [b for b in merged if b.log_legs <= cap]
        merged.sort(key=lambda b: (b.log_legs, b.piece, b.index))
        return merged

    @property
    def lazy(self) -> bool:
        return any(isinstance(p, Chain) and not p.finite for p in self.pieces)


def map_eval(fmap: IntervalMap, x):
    return fmap(x)


def orbit_flagged(fmap: IntervalMap, x, n: int):
    if n < 1:
        raise ValueError("n must be >= 1")
    pts = [fmap.arith.num(x)]
    trunc = False
    for _ in range(n - 1):
        y, t = fmap.eval_flagged(pts[-1])
        trunc = trunc or t
        pts.append(y)
    return pts, trunc


def orbit(fmap: IntervalMap, x, n: int) -> list:
    """(x, f(x), ..., f^{n-1}(x))."""
    return orbit_flagged(fmap, x, n)[0]


def identity_map(arith: Optional[Arith] = None) -> IntervalMap:
    arith = arith or Arith.rational()
    one = Interval(arith.num(0), arith.num(1))
    return IntervalMap("identity", [Segments([make_block(1, one, 1, IDENTITY)], arith)], arith,
                       {"family": "identity", "mdim": Fraction(0)})


def block_map(block: Block, arith: Optional[Arith] = None) -> IntervalMap:
    """A single block on [0,1] viewed as a map (the block must be [0,1])."""
    arith = arith or Arith.rational()
    return IntervalMap(f"block{block.legs}", [Segments([block], arith)], arith)


def _conj_pieces(fmap: IntervalMap, off, scale, arith: Arith):
    return [p.conjugated(off, scale, arith) for p in fmap.pieces]


def glue(left: IntervalMap, right: IntervalMap, name: Optional[str] = None) -> IntervalMap:
    """Left map conjugated into [0,1/2], right map into [1/2,1]."""
    arith = join(left.arith, right.arith)
    half = arith.num(Fraction(1, 2))
    lv = half * arith.num(left(left.arith.num(1)))
    rv = half + half * arith.num(right(right.arith.num(0)))
    if not arith.close(lv, rv):
        raise GluingError(f"values at 1/2 disagree: {lv} vs {rv}")
    pieces = _conj_pieces(left, 0, half, arith) + _conj_pieces(right, half, half, arith)
    return IntervalMap(name or f"glue({left.name},{right.name})", pieces, arith,
                       {"family": "glue", "left": left.meta, "right": right.meta})


def embed_near_fixed_point(host: IntervalMap, p_star, delta, inner: IntervalMap,
                           name: Optional[str] = None) -> IntervalMap:
    """Insert ``inner`` into ``host`` on [p*, p*+delta/2] plus an affine bridge."""
    arith = join(host.arith, inner.arith)
    p, d = arith.num(p_star), arith.num(delta)
    if d <= 0:
        raise GeometryError("delta must be positive")
    if p < 0 or p + d > 1:
        raise GeometryError("[p*, p*+delta] must lie in [0,1]")
    if not arith.close(arith.num(host(host.arith.num(p_star))), p):
        raise FixedPointError(f"host({p}) != {p}")
    mid, end = p + d / 2, p + d
    pieces = []
    if p > 0:
        pieces.append(HostPiece(0, p, host, arith))
    pieces += _conj_pieces(inner, p, d / 2, arith)
    bridge = Block(0, Interval(mid, end), 1, LOG.zero, AFFINE, (mid, arith.num(host(end))))
    pieces.append(Segments([bridge], arith))
    if end < 1:
        pieces.append(HostPiece(end, 1, host, arith))
    out = IntervalMap(name or f"embed({host.name},{inner.name})", pieces, arith,
                      {"family": "embed", "inner": inner.meta, "p_star": p, "delta": d})
    for b in (p, mid, end):
        lo_side = out.piece_at(b).eval_flagged(b)[0]
        hi_idx = min(bisect.bisect_right(out._his, b), len(out.pieces) - 1)
        hi_side = out.pieces[hi_idx].eval_flagged(b)[0]
        if not arith.close(lo_side, hi_side):
            raise GluingError(f"discontinuity at {b}: {lo_side} vs {hi_side}")
    return out


@dataclass(frozen=True)
class ProductMap:
    """Coordinatewise product with the sum metric d^n."""

    factors: tuple
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.factors)

    @property
    def arith(self) -> Arith:
        a = self.factors[0].arith
        for f in self.factors[1:]:
            a = join(a, f.arith)
        return a

    def __call__(self, point):
        if len(point) != self.dim:
            raise ValueError("dimension mismatch")
        return tuple(f(x) for f, x in zip(self.factors, point))

    def eval_flagged(self, point):
        vals = [f.eval_flagged(x) for f, x in zip(self.factors, point)]
        return tuple(v for v, _ in vals), any(t for _, t in vals)

    @staticmethod
    def distance(p, q):
        return sum(abs(a - b) for a, b in zip(p, q))


def product(factors: Sequence[IntervalMap]) -> ProductMap:
    if len(factors) < 1:
        raise ValueError("need at least one factor")
    return ProductMap(tuple(factors))


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def to_document(fmap: IntervalMap, depth: Optional[int] = None) -> dict:
    """Canonical document of the materialized segments."""
    a = fmap.arith
    segs = []
    for b in fmap.blocks(depth):
        seg = {"k": b.index, "left": a.to_str(b.interval.left), "right": a.to_str(b.interval.right),
               "kind": b.kind}
        if b.kind == HORSESHOE:
            if b.legs is not None and b.legs < 2 ** 63:
                seg["legs"] = b.legs
            else:
                seg["legs_log10"] = str(LOG.nstr(b.log_legs / LOG.log(10), 30))
        elif b.kind == AFFINE:
            seg["image"] = [a.to_str(y) for y in b.image]
        segs.append(seg)
    for p in fmap.pieces:
        if isinstance(p, HostPiece):
            raise ValueError("maps with host pieces are not serializable")
    return {"name": fmap.name, "mode": a.label(), "segments": segs}


def from_document(doc: dict) -> IntervalMap:
    """Rebuild a finite map; gaps between segments become identity segments."""
    arith = Arith.parse(doc["mode"])
    blocks = []
    cursor = arith.num(0)
    for seg in sorted(doc["segments"], key=lambda s: arith.num(s["left"])):
        left, right = arith.num(seg["left"]), arith.num(seg["right"])
        if left > cursor:
            blocks.append(make_block(0, Interval(cursor, left), 1, IDENTITY))
        iv = Interval(left, right)
        kind = seg["kind"]
        if kind == HORSESHOE:
            legs = seg.get("legs")
            if legs is None:
                legs = LOG.mpf(seg["legs_log10"]) * LOG.log(10)
            blocks.append(make_block(seg["k"], iv, legs))
        elif kind == AFFINE:
            img = tuple(arith.num(y) for y in seg["image"])
            blocks.append(Block(seg["k"], iv, 1, LOG.zero, AFFINE, img))
        else:
            blocks.append(make_block(seg["k"], iv, 1, IDENTITY))
        cursor = right
    if cursor < 1:
        blocks.append(make_block(0, Interval(cursor, arith.num(1)), 1, IDENTITY))
    return IntervalMap(doc["name"], [Segments(blocks, arith)], arith)
