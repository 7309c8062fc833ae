"""Named constructors for the explicit horseshoe maps.

All families tile [0,1] by blocks ``I_k``; horseshoe blocks carry ``3**k`` legs
(``2k+1`` for the hazard map) and are conjugates of the tent iterate.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterator, Optional, Union

from .core import (K_MAX, Chain, IntervalMap, ProductMap, Schedule, glue, identity_map,
                   EXACT_LEGS_BITS)
from .numeric import LOG, Arith, lg

GALLERY_IDS = ("hazard", "phi01", "phi0b", "phi_beta", "phi_a", "varphi_ab", "psi_b_product")

Param = Union[int, Fraction, float, str]

LOG3 = LOG.log(3)


def as_param(x: Param):
    """Exact Fraction when the value is a finite decimal/rational, else float."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        return Fraction(str(x))
    return x


def is_tower(j: int) -> bool:
    """True iff j = n**n for some n >= 1."""
    n = 1
    while n ** n < j:
        n += 1
    return n ** n == j


def towers() -> Iterator[int]:
    n = 1
    while True:
        yield n ** n
        n += 1


def far_tower(t: int):
    n = LOG.mpf(10) ** (6 * 2 ** t)
    return LOG.power(n, n)


def _pow3(k: int) -> Optional[int]:
    return 3 ** k if k * math.log2(3) <= EXACT_LEGS_BITS else None


def _log_pow3(k: int):
    return k * LOG3


def _geometric_constant(r: Fraction, arith: Arith):
    three_r = arith.power(3, arith.num(r))
    return (three_r - 1) / three_r


def _geometric_schedule(r, arith: Arith, tower_only: bool, label: str) -> Schedule:
    C = _geometric_constant(r, arith)
    three_r = arith.power(3, arith.num(r))
    logC = lg(C)
    lr = LOG.mpf(r.numerator) / r.denominator if isinstance(r, Fraction) else LOG.mpf(r)
    cache: dict = {}

    def length(k, ar):
        if ar != arith:
            return ar.num(C if arith.exact else C) / ar.power(ar.power(3, ar.num(r)), k - 1)
        v = cache.get(k)
        if v is None:
            v = C / three_r ** (k - 1)
            cache[k] = v
        return v

    pred = is_tower if tower_only else (lambda k: True)
    return Schedule(
        length=length,
        log_length=lambda k: logC - (k - 1) * lr * LOG3,
        legs=_pow3,
        log_legs=_log_pow3,
        is_horseshoe=pred,
        horseshoe_indices=towers if tower_only else None,
        label=label,
        far_index=far_tower if tower_only else None,
    )


def _arith_for_r(r: Fraction, bits: int) -> Arith:
    if isinstance(r, Fraction) and r.denominator == 1:
        return Arith.rational()
    return Arith.floating(bits)


def hazard_map(k_max: int = K_MAX) -> IntervalMap:
    """I_n = [2^-n, 2^-n+1] with 2n+1 legs, accumulating at 0."""
    arith = Arith.rational()
    sch = Schedule(
        length=lambda k, ar: ar.num(Fraction(1, 2 ** k)),
        log_length=lambda k: -k * LOG.log(2),
        legs=lambda k: 2 * k + 1,
        log_legs=lambda k: LOG.log(2 * k + 1),
        is_horseshoe=lambda k: True,
        anchor="right",
        label="hazard",
    )
    return IntervalMap("hazard", [Chain(sch, 0, 1, arith, k_max)], arith,
                       {"family": "hazard", "mdim_lower": Fraction(0), "mdim_upper": Fraction(0),
                        "predictor_limit": Fraction(0), "modulus": "omega"})


def phi_zero_one(bits: int = 256, k_max: int = K_MAX) -> IntervalMap:
    """|I_j| = 6/(pi^2 j^2); 3^j-leg horseshoe exactly at tower indices j = n^n."""
    arith = Arith.floating(bits)
    c6 = 6 / arith.pi() ** 2
    log_c6 = lg(6) - 2 * LOG.log(LOG.pi)
    sch = Schedule(
        length=lambda k, ar: (c6 if ar == arith else 6 / ar.pi() ** 2) / (k * k),
        log_length=lambda k: log_c6 - 2 * LOG.log(k),
        legs=_pow3,
        log_legs=_log_pow3,
        is_horseshoe=is_tower,
        horseshoe_indices=towers,
        label="phi01",
        far_index=far_tower,
    )
    return IntervalMap("phi01", [Chain(sch, 0, 1, arith, k_max)], arith,
                       {"family": "phi01", "mdim_lower": Fraction(0), "mdim_upper": Fraction(1),
                        "predictor_limit": Fraction(1), "towers": True})


def phi_zero_b(r: Param, bits: int = 256, k_max: int = K_MAX) -> IntervalMap:
    """|I_j| = C/3^((j-1) r); horseshoes only at tower indices; upper mdim b = 1/(r+1)."""
    r = as_param(r)
    if r <= 0:
        raise ValueError("r must be positive")
    arith = _arith_for_r(r, bits)
    b = 1 / (1 + r)
    sch = _geometric_schedule(r, arith, True, "phi0b")
    return IntervalMap(f"phi0b:r={r}", [Chain(sch, 0, 1, arith, k_max)], arith,
                       {"family": "phi0b", "r": r, "b": b, "C": _geometric_constant(r, arith),
                        "mdim_lower": Fraction(0), "mdim_upper": b, "predictor_limit": b,
                        "towers": True})


def phi_a(r: Param, bits: int = 256, k_max: int = K_MAX) -> IntervalMap:
    """|I_n| = C/3^((n-1) r) with 3^n legs; mdim a = 1/(r+1), Hoelder exponent r/(r+1)."""
    r = as_param(r)
    if r <= 0:
        raise ValueError("r must be positive")
    arith = _arith_for_r(r, bits)
    a = 1 / (1 + r)
    sch = _geometric_schedule(r, arith, False, "phi_a")
    return IntervalMap(f"phi_a:r={r}", [Chain(sch, 0, 1, arith, k_max)], arith,
                       {"family": "phi_a", "r": r, "a": a, "alpha": r / (r + 1),
                        "C": _geometric_constant(r, arith), "mdim_lower": a, "mdim_upper": a,
                        "predictor_limit": a})


def phi_beta(beta: Param, bits: int = 256, k_max: int = K_MAX) -> IntervalMap:
    """|I_n| = C/n^beta with C = 1/zeta(beta) and 3^n legs on every block."""
    beta = as_param(beta)
    if beta <= 1:
        raise ValueError("beta must exceed 1")
    arith = Arith.floating(bits)
    fb = arith.num(beta)
    C = 1 / arith.ctx.zeta(fb)
    lb = LOG.mpf(beta.numerator) / beta.denominator
    logC = -LOG.log(LOG.zeta(lb))
    sch = Schedule(
        length=lambda k, ar: C / ar.ctx.power(k, fb) if ar == arith else
        (1 / ar.ctx.zeta(ar.num(beta))) / ar.ctx.power(k, ar.num(beta)),
        log_length=lambda k: logC - lb * LOG.log(k),
        legs=_pow3,
        log_legs=_log_pow3,
        is_horseshoe=lambda k: True,
        label="phi_beta",
    )
    return IntervalMap(f"phi_beta:beta={beta}", [Chain(sch, 0, 1, arith, k_max)], arith,
                       {"family": "phi_beta", "beta": beta, "C": C, "mdim_lower": Fraction(1),
                        "mdim_upper": Fraction(1), "predictor_limit": Fraction(1)})


def phi_a_for(a: Param, bits: int = 256) -> IntervalMap:
    """Map with lower = upper mdim a: identity for a=0, phi_a(r=(1-a)/a) for 0<a<1."""
    a = as_param(a)
    if a == 0:
        return identity_map()
    if a == 1:
        return phi_beta(2, bits)
    return phi_a((1 - a) / a, bits)


def _zero_b_for(b: Fraction, bits: int) -> IntervalMap:
    if b == 0:
        return identity_map()
    if b == 1:
        return phi_zero_one(bits)
    return phi_zero_b((1 - b) / b, bits)


def varphi_ab(a: Param, b: Param, bits: int = 256) -> IntervalMap:
    """Glue a (0, b) map on [0,1/2] to an (a, a) map on [1/2,1]."""
    a, b = as_param(a), as_param(b)
    if not (0 <= a <= b <= 1):
        raise ValueError("need 0 <= a <= b <= 1")
    m = glue(_zero_b_for(b, bits), phi_a_for(a, bits), name=f"varphi_ab:a={a},b={b}")
    m.meta.update({"family": "varphi_ab", "a": a, "b": b, "mdim_lower": a, "mdim_upper": b})
    return m


def psi_b_product(b: Param, n: int, bits: int = 256) -> ProductMap:
    """n-fold product of the mdim-(b/n) map; Hoelder exponent 1 - b/n."""
    b = as_param(b)
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (0 <= b <= n):
        raise ValueError("need 0 <= b <= n")
    a = b / n
    if a == 1:
        raise ValueError("b = n has no Hoelder representative")
    f = phi_a_for(a, bits)
    return ProductMap(tuple(f for _ in range(n)),
                      {"family": "psi_b", "b": b, "n": n, "a": a, "alpha": 1 - a,
                       "predictor_limit": b})


def parse_gallery_id(text: str, bits: int = 256):
    """Build a map from ``hazard``, ``phi01``, ``phi0b:r=1``, ``psi_b:b=1,n=2`` and so on."""
    name, _, args = text.strip().partition(":")
    kw = {}
    if args:
        for part in args.split(","):
            k, eq, v = part.partition("=")
            if not eq:
                raise ValueError(f"bad parameter {part!r} in {text!r}")
            kw[k.strip()] = v.strip()
    try:
        if name == "hazard" and not kw:
            return hazard_map()
        if name == "phi01" and not kw:
            return phi_zero_one(bits)
        if name == "phi0b" and set(kw) == {"r"}:
            return phi_zero_b(kw["r"], bits)
        if name == "phi_beta" and set(kw) == {"beta"}:
            return phi_beta(kw["beta"], bits)
        if name == "phi_a" and set(kw) == {"r"}:
            return phi_a(kw["r"], bits)
        if name == "varphi_ab" and set(kw) == {"a", "b"}:
            return varphi_ab(kw["a"], kw["b"], bits)
        if name in ("psi_b", "psi_b_product") and set(kw) == {"b", "n"}:
            return psi_b_product(kw["b"], int(kw["n"]), bits)
        if name == "identity" and not kw:
            return identity_map()
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"{text}: {exc}") from exc
    raise ValueError(f"unknown gallery id {text!r}")
