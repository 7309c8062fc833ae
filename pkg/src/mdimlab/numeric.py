"""Arithmetic modes and log-space helpers.

Two modes are supported. Rational mode works on :class:`fractions.Fraction`
and is exact. Float mode works on mpmath numbers held in a private context
with ``bits + GUARD_BITS`` of working precision; results are certified to
``2**(-bits + 2)``, which is the radius used by :meth:`Arith.compare`.
"""
from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

import mpmath

GUARD_BITS = 32
DEFAULT_BITS = 256
LOG_BITS = 256

Number = Union[Fraction, "mpmath.mpf"]

_contexts: dict[int, mpmath.ctx_mp.MPContext] = {}
_ctx_lock = threading.Lock()


def context(prec: int) -> mpmath.ctx_mp.MPContext:
    """Return a shared mpmath context with fixed precision ``prec`` bits."""
    with _ctx_lock:
        ctx = _contexts.get(prec)
        if ctx is None:
            ctx = mpmath.MPContext()
            ctx.prec = prec
            _contexts[prec] = ctx
        return ctx


# all log-space quantities live here
LOG = context(LOG_BITS)


class Ordering(enum.Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1
    INDISTINGUISHABLE = 2


class DomainError(ValueError):
    """Argument outside the domain of an operation."""


@dataclass(frozen=True)
class Arith:
    """Arithmetic mode: ``"rational"`` or ``"float"`` with ``bits`` of precision."""

    mode: str = "rational"
    bits: int = DEFAULT_BITS

    @classmethod
    def rational(cls) -> "Arith":
        return cls("rational", DEFAULT_BITS)

    @classmethod
    def floating(cls, bits: int = DEFAULT_BITS) -> "Arith":
        if bits < 16:
            raise ValueError("precision must be at least 16 bits")
        return cls("float", bits)

    @classmethod
    def parse(cls, text: str) -> "Arith":
        """Parse ``rational``, ``float`` or ``float:<bits>``."""
        text = text.strip()
        if text == "rational":
            return cls.rational()
        if text == "float":
            return cls.floating()
        if text.startswith("float:"):
            return cls.floating(int(text[6:]))
        raise ValueError(f"unknown arithmetic mode {text!r}")

    @property
    def exact(self) -> bool:
        return self.mode == "rational"

    @property
    def ctx(self):
        return context(self.bits + GUARD_BITS)

    @property
    def radius(self):
        if self.exact:
            return Fraction(0)
        return self.ctx.mpf(2) ** (2 - self.bits)

    def label(self) -> str:
        return "rational" if self.exact else f"float:{self.bits}"

    def num(self, x) -> Number:
        """Convert ``x`` (int, Fraction, str, float or mpf) into this mode."""
        if self.exact:
            if isinstance(x, Fraction):
                return x
            if isinstance(x, (int, str)):
                return Fraction(x)
            if isinstance(x, float):
                return Fraction(x)
            raise TypeError(f"cannot represent {x!r} exactly")
        ctx = self.ctx
        if isinstance(x, Fraction):
            return ctx.mpf(x.numerator) / x.denominator
        if isinstance(x, str) and "/" in x:
            p, q = x.split("/")
            return ctx.mpf(int(p)) / int(q)
        return ctx.mpf(x)

    def pi(self) -> Number:
        if self.exact:
            raise TypeError("pi is not representable in rational mode")
        return +self.ctx.pi

    def power(self, base: Number, exponent: Number) -> Number:
        if self.exact:
            if isinstance(exponent, Fraction) and exponent.denominator == 1:
                return Fraction(base) ** int(exponent)
            raise TypeError("non-integer power is not exact")
        return self.ctx.power(self.num(base), self.num(exponent))

    def compare(self, a: Number, b: Number) -> Ordering:
        """Compare; within the certified radius the answer is INDISTINGUISHABLE."""
        if self.exact:
            if a < b:
                return Ordering.LESS
            return Ordering.GREATER if a > b else Ordering.EQUAL
        d = self.num(a) - self.num(b)
        if abs(d) <= self.radius:
            return Ordering.INDISTINGUISHABLE
        return Ordering.LESS if d < 0 else Ordering.GREATER

    def close(self, a: Number, b: Number) -> bool:
        return self.compare(a, b) in (Ordering.EQUAL, Ordering.INDISTINGUISHABLE)

    def to_str(self, x: Number) -> str:
        """Serialize: ``p/q`` in rational mode, decimal digits otherwise."""
        if self.exact:
            x = Fraction(x)
            return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
        digits = int(self.bits * math.log10(2)) + 1
        return mpmath.nstr(self.num(x), digits, strip_zeros=False)


def join(a: Arith, b: Arith) -> Arith:
    """Weakest common mode of two maps (float wins, smaller precision wins)."""
    if a.exact and b.exact:
        return a
    bits = min(x.bits for x in (a, b) if not x.exact)
    return Arith.floating(bits)


# ---------------------------------------------------------------------------
# log-space helpers
# ---------------------------------------------------------------------------

def lg(x) -> "mpmath.mpf":
    """Natural log in the shared log context, accepting Fraction/int/mpf."""
    if isinstance(x, Fraction):
        return LOG.log(x.numerator) - LOG.log(x.denominator)
    if isinstance(x, int):
        return LOG.log(x)
    return LOG.log(LOG.mpf(x))


def lmpf(x) -> "mpmath.mpf":
    if isinstance(x, Fraction):
        return LOG.mpf(x.numerator) / x.denominator
    return LOG.mpf(x)


def logsumexp(values: Iterable) -> "mpmath.mpf":
    vals = [LOG.mpf(v) for v in values]
    if not vals:
        return LOG.ninf
    top = max(vals)
    if top == LOG.ninf:
        return top
    return top + LOG.log(LOG.fsum(LOG.exp(v - top) for v in vals))


def log_ceil(logx) -> "mpmath.mpf":
    """An upper bound for ``log(ceil(x))`` given ``log x``: ``log(x + 1)``."""
    logx = LOG.mpf(logx)
    if logx > 200:
        return logx + LOG.exp(-logx)
    return LOG.log(LOG.exp(logx) + 1)


def log_ceil_exact(logx) -> "mpmath.mpf":
    """``log(ceil(x))`` when x is moderate, else ``log x`` (a lower bound)."""
    logx = LOG.mpf(logx)
    if logx < 150:
        # shrink by a relative 2**-200 so rounding never rounds a count up
        return LOG.log(LOG.ceil(LOG.exp(logx) * (1 - LOG.mpf(2) ** (-200))))
    return logx


def fl(x) -> float:
    return float(x)
