"""Hoelder and modulus-of-continuity checks on structured sample plans.

The plan mirrors the configurations where extremal ratios occur for maps made
of affine full branches: pairs inside one leg, pairs straddling the shared
endpoint of adjacent blocks, pairs in blocks two or three apart, and pairs with
the fixed endpoint (0 or the accumulation point).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .core import HORSESHOE, Block, IntervalMap
from .numeric import LOG, DomainError, lmpf

PLAN_ID = "structured-v1"
SLOPE_TOL = 0.02
R2_MIN = 0.9
OMEGA_MAX = LOG.exp(-1)
GRID = 2000
GOLDEN_STEPS = 80


class IndistinguishableError(ValueError):
    """The two points coincide at working precision."""


class InconclusiveError(ValueError):
    """Fitted growth too close to zero with a poor fit."""


@dataclass(frozen=True)
class ModulusOfContinuity:
    kind: str  # "power" or "omega"
    alpha: Optional[Fraction] = None

    def __post_init__(self):
        if self.kind == "power":
            if self.alpha is None or not (0 < self.alpha <= 1):
                raise ValueError("power modulus needs 0 < alpha <= 1")
        elif self.kind != "omega":
            raise ValueError(f"unknown modulus kind {self.kind!r}")

    @classmethod
    def power(cls, alpha) -> "ModulusOfContinuity":
        return cls("power", Fraction(str(alpha)) if isinstance(alpha, float) else Fraction(alpha))

    @classmethod
    def omega(cls) -> "ModulusOfContinuity":
        return cls("omega")

    @property
    def limit(self):
        """Largest admissible argument."""
        return OMEGA_MAX if self.kind == "omega" else LOG.inf

    def __call__(self, t):
        t = lmpf(t)
        if t < 0:
            raise DomainError("modulus argument must be >= 0")
        if self.kind == "power":
            return LOG.power(t, lmpf(self.alpha)) if t > 0 else LOG.zero
        if t > OMEGA_MAX:
            raise DomainError("omega is only applied on arguments <= 1/e")
        return -t * LOG.log(t) if t > 0 else LOG.zero

    def label(self) -> str:
        return "omega" if self.kind == "omega" else f"power({self.alpha})"


def holder_ratio(fmap, x, y, modulus: ModulusOfContinuity):
    """|f(x) - f(y)| / modulus(|x - y|)."""
    a = fmap.arith
    x, y = a.num(x), a.num(y)
    if a.close(x, y):
        raise IndistinguishableError("points are indistinguishable")
    return lmpf(abs(fmap(x) - fmap(y))) / modulus(lmpf(abs(x - y)))


def _ratio_pts(block_x: Block, x, block_y: Block, y, modulus):
    t = lmpf(abs(x - y))
    if t == 0 or t > modulus.limit:
        return None
    return lmpf(abs(block_x.evaluate(x) - block_y.evaluate(y))) / modulus(t)


# ---------------------------------------------------------------------------
# closed forms for phi_a(r)
# ---------------------------------------------------------------------------

def _m(x):
    return lmpf(x) if isinstance(x, Fraction) else LOG.mpf(x)


def closed_within(r, C, alpha, n):
    """C^(1-a) 3^(r - a r) 3^(n(a - r + a r))."""
    r, C, a = _m(r), _m(C), _m(alpha)
    return C ** (1 - a) * LOG.power(3, r - a * r) * LOG.power(3, n * (a - r + a * r))


def closed_adjacent(r, C, alpha, m):
    """3^(m(a(r+1) - r)) 3^a (C(1 + 3^(r+1)))^(1-a)."""
    r, C, a = _m(r), _m(C), _m(alpha)
    return (LOG.power(3, m * (a * (r + 1) - r)) * LOG.power(3, a)
            * (C * (1 + LOG.power(3, r + 1))) ** (1 - a))


def closed_far(r, alpha, m, k_gap):
    """3^(n r(a-1)) (1-3^-r)^(a-1) [3^((k+1)r) - 1] / (3^(k r) - 1)^a with n = m + k."""
    if k_gap < 2:
        raise ValueError("k_gap must be >= 2")
    r, a = _m(r), _m(alpha)
    n = m + k_gap
    return (LOG.power(3, n * r * (a - 1)) * (1 - LOG.power(3, -r)) ** (a - 1)
            * (LOG.power(3, (k_gap + 1) * r) - 1) / (LOG.power(3, k_gap * r) - 1) ** a)


def closed_far_limit(r, alpha, m):
    """(1-3^-r)^(a-1) 3^(m(a-1)r + r), the k_gap -> infinity limit."""
    r, a = _m(r), _m(alpha)
    return (1 - LOG.power(3, -r)) ** (a - 1) * LOG.power(3, m * (a - 1) * r + r)


def zero_case_limit(r):
    """1/log(1/(1 - 3^-r)), the limit of the x = 0 bound under omega."""
    r = _m(r)
    return 1 / LOG.log(1 / (1 - LOG.power(3, -r)))


# ---------------------------------------------------------------------------
# structured sups
# ---------------------------------------------------------------------------

def _leg_width(block: Block):
    if block.kind == HORSESHOE:
        return lmpf(block.critical_scale)
    return lmpf(block.length)


def _slope(block: Block):
    if block.kind == HORSESHOE:
        return LOG.exp(block.log_legs)
    if block.image is not None:
        return lmpf(abs(block.image[1] - block.image[0]) / block.length)
    return LOG.one


def within_branch_sup(block: Block, modulus):
    """Exact same-leg sup s t / mod(t) at t = min(leg width, admissible limit).

    Accepts a modulus or a bare power exponent.
    """
    if not isinstance(modulus, ModulusOfContinuity):
        modulus = ModulusOfContinuity.power(modulus)
    if block.kind != HORSESHOE:
        raise ValueError("block is not a horseshoe")
    if modulus.kind == "power":
        a = lmpf(modulus.alpha)
        return LOG.exp(block.log_legs + (1 - a) * lmpf(block.log_critical_scale))
    t = min(_leg_width(block), OMEGA_MAX)
    return LOG.exp(block.log_legs) * t / modulus(t)


def _maximize(f, lo, hi):
    """Max of f on [lo, hi]: uniform grid then golden-section refinement of the best cell."""
    if hi <= lo:
        return f(hi)
    xs = [lo + (hi - lo) * i / GRID for i in range(GRID + 1)]
    vals = [f(x) for x in xs]
    i = max(range(len(vals)), key=lambda j: vals[j])
    a, b = xs[max(0, i - 1)], xs[min(GRID, i + 1)]
    g = (LOG.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(GOLDEN_STEPS):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return max(vals[i], fc, fd)


def adjacent_sup(left: Block, right: Block, modulus: ModulusOfContinuity):
    """Exact sup over x in the last leg of ``left`` and y in the first leg of ``right``.

    Both legs are increasing and fix the shared endpoint, so the ratio depends on
    t = |x - y| only after filling the steeper leg first.
    """
    sl, wl = _slope(left), _leg_width(left)
    sr, wr = _slope(right), _leg_width(right)
    (sb, wb), (ss, ws) = sorted([(sl, wl), (sr, wr)], key=lambda p: -p[0])
    top = min(wb + ws, modulus.limit)

    def f(t):
        u = min(t, wb)
        return (sb * u + ss * max(LOG.zero, t - wb)) / modulus(t)

    first = f(min(wb, top))
    if top <= wb:
        return first
    if modulus.kind == "power":
        a = lmpf(modulus.alpha)
        A = (sb - ss) * wb
        cands = [first, f(top)]
        if a < 1 and ss > 0:
            tc = a * A / (ss * (1 - a))
            if wb < tc < top:
                cands.append(f(tc))
        return max(cands)
    return max(first, _maximize(f, wb, top))


def identity_segment_sup(block: Block, modulus):
    """Sup of t / modulus(t) over pairs inside an identity segment (increasing in t)."""
    t = min(lmpf(block.interval.right - block.interval.left), modulus.limit)
    return t / modulus(t) if t > 0 else LOG.zero


def _samples(block: Block) -> list:
    iv = block.interval
    L, R = iv.left, iv.right
    if block.kind != HORSESHOE:
        return [L, (L + R) / 2, R]
    w = block.critical_scale
    pts = {L, L + w / 2, L + w, R - w, R - w / 2, R}
    if block.legs is None or block.legs > 2:
        pts |= {L + 2 * w, R - 2 * w}
    return sorted(pts)


def _pair_sup(bx: Block, by: Block, modulus) -> object:
    best = LOG.zero
    for x in _samples(bx):
        for y in _samples(by):
            v = _ratio_pts(bx, x, by, y, modulus)
            if v is not None and v > best:
                best = v
    return best


def _fixed_points(fmap: IntervalMap) -> list:
    a = fmap.arith
    pts = []
    for p in (a.num(0), a.num(1)):
        if a.close(fmap(p), p):
            pts.append(p)
    return pts


def _endpoint_sup(fmap, fixed, block: Block, modulus):
    best = LOG.zero
    for p in fixed:
        for y in _samples(block):
            t = lmpf(abs(p - y))
            if t == 0 or t > modulus.limit:
                continue
            v = lmpf(abs(p - block.evaluate(y))) / modulus(t)
            best = max(best, v)
    return best


@dataclass(frozen=True)
class HolderReport:
    modulus: ModulusOfContinuity
    per_block_sup: tuple  # (k, sup)
    cross_block_sup: tuple  # (m, bound)
    verdict: str
    growth_fit: float
    r_squared: float
    sample_plan: str = PLAN_ID
    components: dict = field(default_factory=dict)

    @property
    def sup(self):
        return max(v for _, v in self.per_block_sup)

    def to_dict(self) -> dict:
        f = lambda x: LOG.nstr(LOG.mpf(x), 15)
        return {
            "modulus": self.modulus.label(),
            "sample_plan": self.sample_plan,
            "verdict": self.verdict,
            "growth_fit": format(self.growth_fit, ".12g"),
            "r_squared": format(self.r_squared, ".12g"),
            "sup": f(self.sup),
            "per_block": [{"k": k, "sup": f(v)} for k, v in self.per_block_sup],
            "cross_block": [{"m": m, "bound": f(v)} for m, v in self.cross_block_sup],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"


def fit_growth(ks, sups):
    """Least squares of log sup on (1, k, log k, 1/k); returns (slope in k, R^2).

    The log k and 1/k columns absorb polynomial factors and transients, so the
    k coefficient measures exponential growth only.
    """
    k = np.asarray(ks, dtype=float)
    y = np.asarray([float(LOG.log(v)) for v in sups])
    cols = [np.ones_like(k), k, np.log(k), 1 / k]
    X = np.column_stack(cols[:max(2, min(len(cols), len(k) - 1))])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot <= 1e-20 * max(1.0, float((y ** 2).sum())):
        return 0.0, 1.0
    return float(coef[1]), 1.0 - float((resid ** 2).sum()) / ss_tot


def _adjacent_pairs(blocks: list[Block]):
    """Spatially consecutive blocks sharing an endpoint, keyed by the smaller index."""
    out = []
    for a, b in zip(blocks, blocks[1:]):
        if a.interval.right == b.interval.left:
            out.append((min(a.index, b.index), a, b))
    return out


def structured_sups(fmap: IntervalMap, modulus: ModulusOfContinuity, depth: int):
    """Per-block sup over the plan for the first ``depth`` blocks, plus each component.

    Three extra blocks are materialized so that the last reported blocks still
    have adjacent and far partners.
    """
    keep = {b.index for b in fmap.blocks(depth)}
    blocks = fmap.blocks(depth + 3)
    pos = {b.index: i for i, b in enumerate(blocks)}
    fixed = _fixed_points(fmap)
    comp = {"within": {}, "adjacent": {}, "far": {}, "endpoint": {}}
    for b in blocks:
        if b.index not in keep:
            continue
        if b.kind == HORSESHOE:
            comp["within"][b.index] = within_branch_sup(b, modulus)
        else:
            comp["within"][b.index] = identity_segment_sup(b, modulus)
        comp["endpoint"][b.index] = _endpoint_sup(fmap, fixed, b, modulus)
        best = LOG.zero
        for gap in (-3, -2, 2, 3):
            j = pos[b.index] + gap
            if 0 <= j < len(blocks):
                best = max(best, _pair_sup(b, blocks[j], modulus))
        comp["far"][b.index] = best
    for m, a, b in _adjacent_pairs(blocks):
        if m in keep:
            comp["adjacent"][m] = adjacent_sup(a, b, modulus)
    per = []
    for k in sorted(keep):
        vals = [c[k] for c in comp.values() if k in c]
        per.append((k, max(vals)))
    return per, comp


def modulus_check(fmap: IntervalMap, modulus: Optional[ModulusOfContinuity] = None,
                  depth: int = 30, tol: float = SLOPE_TOL) -> HolderReport:
    """Sup of the ratio against ``modulus`` (omega by default) on the structured plan."""
    modulus = modulus or ModulusOfContinuity.omega()
    return _report(fmap, modulus, depth, tol)


def _growing(values: dict, tol: float) -> bool:
    """True when the trailing half of a sequence exceeds its leading half."""
    seq = [v for _, v in sorted(values.items())]
    if len(seq) < 4:
        return False
    half = len(seq) // 2
    return max(seq[half:]) > max(seq[:half]) * (1 + tol)


def _report(fmap, modulus, depth, tol, cross=None):
    per, comp = structured_sups(fmap, modulus, depth)
    # growth is fitted on the block-local cases; far-block and endpoint
    # configurations only need to stay bounded
    local = {}
    for name in ("within", "adjacent"):
        for k, v in comp[name].items():
            local[k] = max(local.get(k, LOG.zero), v)
    nz = [(k, v) for k, v in sorted(local.items()) if v > 0]
    if not any(b.kind == HORSESHOE for b in fmap.blocks(depth)):
        # no branch structure to grow: the per-segment sups are the whole story
        nz = []
    if not nz:
        slope, r2 = 0.0, 1.0
    elif len(nz) < 3:
        raise InconclusiveError("fewer than 3 blocks with block-local samples")
    else:
        slope, r2 = fit_growth([k for k, _ in nz], [v for _, v in nz])
    if nz and -tol < slope < 2 * tol and r2 < R2_MIN:
        raise InconclusiveError(f"fitted slope {slope:.4g} with R^2 {r2:.3g}")
    growing = _growing(comp["far"], tol) or _growing(comp["endpoint"], tol)
    verdict = "bounded" if slope <= tol and not growing else "diverging"
    if cross is None:
        cross = tuple(sorted(comp["adjacent"].items()))
    return HolderReport(modulus, tuple(per), tuple(cross), verdict, slope, r2, PLAN_ID, comp)


def cross_block_bound(fmap: IntervalMap, m: int, alpha):
    """Adjacent-block bound: the closed form for phi_a, the exact leg-pair sup otherwise."""
    meta = fmap.meta
    if meta.get("family") == "phi_a":
        return closed_adjacent(meta["r"], meta["C"], alpha, m)
    blocks = fmap.blocks(m + 2)
    mod = ModulusOfContinuity.power(alpha)
    for k, a, b in _adjacent_pairs(blocks):
        if k == m:
            return adjacent_sup(a, b, mod)
    raise ValueError(f"blocks {m} and {m + 1} are not adjacent")


def far_block_bound(fmap_or_r, m: int, k_gap: int, alpha):
    """The displayed far-block bound and its k_gap -> infinity limit."""
    r = fmap_or_r.meta["r"] if isinstance(fmap_or_r, IntervalMap) else fmap_or_r
    return closed_far(r, alpha, m, k_gap), closed_far_limit(r, alpha, m)


def holder_verdict(fmap: IntervalMap, alpha, depth: int = 15, tol: float = SLOPE_TOL) -> HolderReport:
    """Fit log(per-block sup) on k; bounded iff the fitted slope is <= tol."""
    if depth < 5:
        raise ValueError("K must be >= 5")
    mod = ModulusOfContinuity.power(alpha)
    cross = None
    if fmap.meta.get("family") == "phi_a":
        cross = tuple((m, closed_adjacent(fmap.meta["r"], fmap.meta["C"], mod.alpha, m))
                      for m in range(1, depth))
    return _report(fmap, mod, depth, tol, cross)


def leg_pair_ratio(fmap: IntervalMap, n: int, alpha):
    """Ratio at x = left end of block n, y = x + leg width (the first full leg)."""
    blk = next(b for b in fmap.blocks(n) if b.index == n)
    x = blk.interval.left
    y = x + blk.critical_scale
    return holder_ratio(fmap, x, y, ModulusOfContinuity.power(alpha))


def evidence_table(entries) -> list[dict]:
    """Rows (family, hoelder exponent, mdim, 1 - alpha, mdim <= 1 - alpha) for the open problems.

    ``entries`` holds (family, alpha or None, mdim) with alpha None for non-Hoelder maps.
    """
    rows = []
    for family, alpha, mdim in entries:
        row = {"family": family, "alpha": None if alpha is None else str(alpha),
               "mdim": str(mdim)}
        if alpha is not None:
            row["one_minus_alpha"] = str(1 - alpha)
            row["mdim_le_one_minus_alpha"] = bool(mdim <= 1 - alpha)
        rows.append(row)
    return rows
