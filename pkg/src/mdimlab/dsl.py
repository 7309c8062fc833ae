"""A small declarative language for horseshoe schedules (``.hsf`` files).

Example::

    family phi_a mode rational
    segments k = 1..inf : length (2/3)/3^(k-1)
    horseshoe where all : legs 3^k
    default : identity

An optional ``from right`` after the range anchors the blocks at the right end
of [0,1], so they accumulate at 0.
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .core import EXACT_LEGS_BITS, K_MAX, Chain, IntervalMap, Schedule
from .gallery import far_tower, is_tower, towers
from .numeric import LOG, Arith, lg

MAX_INPUT = 64 * 1024
MAX_DEPTH = 100
MAX_POW_BITS = 1 << 16  # exact powers larger than this are only evaluated in log space
CHECK_INDICES = 6
MAX_DIGITS = 1000
TAIL_START = 2000

KEYWORDS = {"family", "mode", "segments", "length", "horseshoe", "where", "legs", "default",
            "identity", "all", "tower", "inf", "pi", "from", "left", "right"}
RELS = ("<=", ">=", "==", "!=", "<", ">")


class DSLError(ValueError):
    """Syntax or semantic error, formatted ``line:col: message``."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}")
        self.line, self.col, self.message = line, col, message


class TooLarge(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: Fraction
    pos: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Pi:
    pos: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    pos: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Bin:
    op: str
    left: "Expr"
    right: "Expr"
    pos: tuple = field(default=(0, 0), compare=False)


Expr = Union[Num, Pi, Var, Bin]


@dataclass(frozen=True)
class Pred:
    kind: str  # all | tower | rel
    op: str = ""
    value: int = 0


@dataclass(frozen=True)
class Rule:
    pred: Pred
    legs: Expr


@dataclass(frozen=True)
class FamilySpec:
    name: str
    mode: str
    index: str
    start: int
    stop: Optional[int]
    length: Expr
    rules: tuple
    default: str = "identity"
    anchor: str = "left"

    @property
    def arith(self) -> Arith:
        return Arith.parse(self.mode)


# ---------------------------------------------------------------------------
# lexer
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<num>\d+(?:\.\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\.\.|<=|>=|==|!=|[-+*/^():=<>,])
""", re.VERBOSE)


@dataclass(frozen=True)
class Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Tok]:
    toks = []
    line, start = 1, 0
    i = 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None:
            raise DSLError(f"unexpected character {text[i]!r}", line, i - start + 1)
        kind = m.lastgroup
        col = i - start + 1
        if kind == "nl":
            toks.append(Tok("nl", "\n", line, col))
            line += 1
            start = m.end()
        elif kind == "num" and len(m.group()) > MAX_DIGITS:
            raise DSLError("numeric literal too long", line, col)
        elif kind not in ("ws", "comment"):
            toks.append(Tok(kind, m.group(), line, col))
        i = m.end()
    toks.append(Tok("eof", "", line, i - start + 1))
    return toks


# ---------------------------------------------------------------------------
# constant folding and exact arithmetic
# ---------------------------------------------------------------------------

def _int_pow(base: Fraction, exp: Fraction) -> Fraction:
    if exp.denominator != 1:
        raise TooLarge("non-integer exponent")
    e = int(exp)
    if base == 0 and e < 0:
        raise ZeroDivisionError("zero to a negative power")
    size = max(abs(base.numerator), abs(base.denominator)).bit_length()
    if abs(e) * size > MAX_POW_BITS:
        raise TooLarge("power too large")
    return base ** e


def _fold(op: str, a: Fraction, b: Fraction) -> Fraction:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return a / b
    return _int_pow(a, b)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.depth = 0
        self.index = None

    # -- token helpers
    @property
    def cur(self) -> Tok:
        return self.toks[self.i]

    def err(self, msg: str, tok: Optional[Tok] = None):
        tok = tok or self.cur
        return DSLError(msg, tok.line, tok.col)

    def take(self) -> Tok:
        t = self.cur
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.cur.text == text and self.cur.kind in ("ident", "op"):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Tok:
        if self.cur.text != text:
            shown = self.cur.text or "end of input"
            raise self.err(f"expected {text!r}, got {shown!r}")
        return self.take()

    def skip_nl(self):
        while self.cur.kind == "nl":
            self.i += 1

    def end_line(self):
        if self.cur.kind == "eof":
            return
        if self.cur.kind != "nl":
            raise self.err(f"unexpected {self.cur.text!r} at end of statement")
        self.skip_nl()

    def ident(self, what: str) -> Tok:
        if self.cur.kind != "ident":
            raise self.err(f"expected {what}")
        return self.take()

    def integer(self) -> int:
        t = self.cur
        if t.kind != "num" or "." in t.text:
            raise self.err("expected an integer")
        self.take()
        return int(t.text)

    # -- statements
    def spec(self) -> FamilySpec:
        self.skip_nl()
        self.expect("family")
        name = self.ident("family name").text
        self.expect("mode")
        mode = self.mode()
        self.end_line()
        self.expect("segments")
        idx = self.ident("index variable")
        if idx.text in KEYWORDS:
            raise self.err(f"{idx.text!r} is reserved", idx)
        self.index = idx.text
        self.expect("=")
        start = self.integer()
        self.expect("..")
        if self.accept("inf"):
            stop = None
        else:
            stop = self.integer()
            if stop < start:
                raise self.err("empty index range")
        if start < 1:
            raise self.err("index range must start at 1 or later")
        anchor = "left"
        if self.accept("from"):
            if self.accept("right"):
                anchor = "right"
            else:
                self.expect("left")
        self.expect(":")
        self.expect("length")
        length = self.expr()
        self.end_line()
        rules = []
        while self.cur.text == "horseshoe":
            self.take()
            self.expect("where")
            pred = self.pred()
            self.expect(":")
            self.expect("legs")
            legs = self.expr()
            self.end_line()
            rules.append(Rule(pred, legs))
        if not rules:
            raise self.err("expected at least one horseshoe rule")
        self.expect("default")
        self.expect(":")
        self.expect("identity")
        self.end_line()
        if self.cur.kind != "eof":
            raise self.err("unexpected text after default")
        return FamilySpec(name, mode, self.index, start, stop, length, tuple(rules), "identity",
                          anchor)

    def mode(self) -> str:
        t = self.ident("mode")
        if t.text == "rational":
            return "rational"
        if t.text != "float":
            raise self.err("mode must be rational, float or float:N", t)
        if self.accept(":"):
            bits = self.integer()
            if not 16 <= bits <= 1 << 16:
                raise self.err("precision must be between 16 and 65536 bits", t)
            return f"float:{bits}"
        return "float"

    def pred(self) -> Pred:
        if self.accept("all"):
            return Pred("all")
        if self.accept("tower"):
            return Pred("tower")
        t = self.ident("predicate")
        if t.text != self.index:
            raise self.err(f"unknown identifier {t.text!r}", t)
        if self.cur.text not in RELS:
            raise self.err("expected a comparison")
        op = self.take().text
        return Pred("rel", op, self.integer())

    # -- expressions
    def _enter(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise self.err("expression nested too deeply")

    def expr(self) -> Expr:
        self._enter()
        node = self.term()
        while self.cur.text in ("+", "-") and self.cur.kind == "op":
            op = self.take()
            node = self.binary(op, node, self.term())
        self.depth -= 1
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.cur.text in ("*", "/") and self.cur.kind == "op":
            op = self.take()
            node = self.binary(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        self._enter()
        base = self.base()
        if self.cur.text == "^":
            op = self.take()
            base = self.binary(op, base, self.factor())
        self.depth -= 1
        return base

    def base(self) -> Expr:
        t = self.cur
        pos = (t.line, t.col)
        if t.kind == "num":
            self.take()
            return Num(Fraction(t.text), pos)
        if t.kind == "ident":
            self.take()
            if t.text == "pi":
                return Pi(pos)
            if t.text != self.index:
                raise self.err(f"unknown identifier {t.text!r}", t)
            return Var(t.text, pos)
        if t.text == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        raise self.err(f"expected a number, pi, {self.index} or '('" if t.kind != "eof"
                       else "unexpected end of input")

    def binary(self, op: Tok, a: Expr, b: Expr) -> Expr:
        pos = (op.line, op.col)
        if isinstance(a, Num) and isinstance(b, Num):
            try:
                return Num(_fold(op.text, a.value, b.value), a.pos)
            except ZeroDivisionError:
                raise self.err("division by zero", op)
            except TooLarge:
                pass
        return Bin(op.text, a, b, pos)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def has_pi(e: Expr) -> bool:
    if isinstance(e, Pi):
        return True
    if isinstance(e, Bin):
        return has_pi(e.left) or has_pi(e.right)
    return False


def eval_exact(e: Expr, k: int) -> Fraction:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return Fraction(k)
    if isinstance(e, Pi):
        raise TooLarge("pi is not rational")
    a, b = eval_exact(e.left, k), eval_exact(e.right, k)
    return _fold(e.op, a, b)


def eval_ctx(e: Expr, k, ctx):
    """Evaluate in an mpmath context."""
    if isinstance(e, Num):
        return ctx.mpf(e.value.numerator) / e.value.denominator
    if isinstance(e, Var):
        return ctx.mpf(k)
    if isinstance(e, Pi):
        return +ctx.pi
    a, b = eval_ctx(e.left, k, ctx), eval_ctx(e.right, k, ctx)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if e.op == "/":
        return a / b
    if abs(b) < 1 << 20 and b == int(b):
        return a ** int(b)
    if abs(b) > 1 << 40 and abs(a) != 1 and a != 0:
        raise TooLarge("exponent too large")
    return ctx.power(a, b)


def eval_log(e: Expr, k):
    """log(value) for a positive value; k may be an mpf far beyond exact range."""
    if isinstance(e, Num):
        if e.value <= 0:
            raise ValueError("non-positive value in log evaluation")
        return lg(e.value)
    if isinstance(e, Var):
        return LOG.log(k)
    if isinstance(e, Pi):
        return LOG.log(LOG.pi)
    if e.op == "*":
        return eval_log(e.left, k) + eval_log(e.right, k)
    if e.op == "/":
        return eval_log(e.left, k) - eval_log(e.right, k)
    if e.op == "^":
        return eval_ctx(e.right, k, LOG) * eval_log(e.left, k)
    la = eval_log(e.left, k)
    if e.op == "+":
        lb = eval_log(e.right, k)
        return _log_add(la, lb)
    # subtraction: the right side may be zero or negative after folding
    b = eval_ctx(e.right, k, LOG)
    if b == 0:
        return la
    if b < 0:
        return _log_add(la, LOG.log(-b))
    lb = LOG.log(b)
    if lb >= la:
        raise ValueError("non-positive value in log evaluation")
    if lb - la < -10 ** 4:
        return la
    return la + LOG.log(-LOG.expm1(lb - la))


def _log_add(la, lb):
    hi, lo = max(la, lb), min(la, lb)
    if lo - hi < -10 ** 4:
        return hi
    return hi + LOG.log1p(LOG.exp(lo - hi))


def parity(e: Expr) -> Optional[str]:
    """'odd', 'even' or None (unknown) for integer-valued expressions."""
    if isinstance(e, Num):
        if e.value.denominator != 1:
            return None
        return "odd" if e.value.numerator % 2 else "even"
    if not isinstance(e, Bin):
        return None
    a, b = parity(e.left), parity(e.right)
    if e.op in ("+", "-"):
        if a and b:
            return "even" if a == b else "odd"
        return None
    if e.op == "*":
        if a == "even" or b == "even":
            return "even"
        return "odd" if a == b == "odd" else None
    if e.op == "^":
        r = e.right
        if isinstance(r, Num) and r.value.denominator == 1 and r.value > 0:
            return a
        if isinstance(r, Var) and a is not None:
            return a  # index variables are >= 1
    return None


# -- asymptotic shape of log|expr| ~ A k + B log k

def _linear(e: Expr):
    """(p, q) with e = p k + q, or None."""
    if isinstance(e, Num):
        return (Fraction(0), e.value)
    if isinstance(e, Var):
        return (Fraction(1), Fraction(0))
    if not isinstance(e, Bin):
        return None
    a, b = _linear(e.left), _linear(e.right)
    if a is None or b is None:
        return None
    if e.op == "+":
        return (a[0] + b[0], a[1] + b[1])
    if e.op == "-":
        return (a[0] - b[0], a[1] - b[1])
    if e.op == "*" and (a[0] == 0 or b[0] == 0):
        return (a[0] * b[1] + b[0] * a[1], a[1] * b[1])
    if e.op == "/" and b[0] == 0 and b[1] != 0:
        return (a[0] / b[1], a[1] / b[1])
    return None


def shape(e: Expr):
    """(A, B) with log|e| = A k + B log k + O(1), A as mpf; None when unrecognized."""
    if isinstance(e, (Num, Pi)):
        if isinstance(e, Num) and e.value == 0:
            return None
        return (LOG.zero, Fraction(0))
    if isinstance(e, Var):
        return (LOG.zero, Fraction(1))
    a, b = shape(e.left), shape(e.right)
    if e.op == "*" and a and b:
        return (a[0] + b[0], a[1] + b[1])
    if e.op == "/" and a and b:
        return (a[0] - b[0], a[1] - b[1])
    if e.op == "^":
        lin = _linear(e.right)
        if lin is None:
            return None
        p, q = lin
        if p == 0 and a:
            return (a[0] * lmpf_(q), a[1] * q)
        if isinstance(e.left, (Num, Pi)) and (isinstance(e.left, Pi) or e.left.value > 0):
            c = LOG.pi if isinstance(e.left, Pi) else lmpf_(e.left.value)
            return (lmpf_(p) * LOG.log(c), Fraction(0))
        return None
    if e.op in ("+", "-") and a and b:
        if (a[0], a[1]) == (b[0], b[1]):
            return a if e.op == "+" else None
        hi = max(a, b, key=lambda s: (s[0], s[1]))
        return hi
    return None


def lmpf_(x: Fraction):
    return LOG.mpf(x.numerator) / x.denominator


def converges(spec: FamilySpec) -> bool:
    """Sum of lengths over an infinite range: structural test, else a tail-fit heuristic."""
    s = shape(spec.length)
    if s is not None:
        A, B = s
        return A < 0 or (A == 0 and B < -1)
    # heuristic: fit log length on [TAIL_START, 2 TAIL_START] to A k + B log k
    k1, k2 = TAIL_START, 2 * TAIL_START
    try:
        l1, l2 = eval_log(spec.length, LOG.mpf(k1)), eval_log(spec.length, LOG.mpf(k2))
        lm = eval_log(spec.length, LOG.mpf((k1 + k2) // 2))
    except (ValueError, ZeroDivisionError, ArithmeticError):
        return False
    slope = (l2 - l1) / (k2 - k1)
    if slope < -1e-6:
        return True
    # compare with a pure power law through the end points
    B = (l2 - l1) / (LOG.log(k2) - LOG.log(k1))
    return B < -1.05 and abs(lm - (l1 + B * (LOG.log((k1 + k2) // 2) - LOG.log(k1)))) < 0.05


# ---------------------------------------------------------------------------
# semantic checks, parse, emit
# ---------------------------------------------------------------------------

def _pred_true(pred: Pred, k: int) -> bool:
    if pred.kind == "all":
        return True
    if pred.kind == "tower":
        return is_tower(k)
    v = pred.value
    return {"<": k < v, "<=": k <= v, ">": k > v, ">=": k >= v, "==": k == v, "!=": k != v}[pred.op]


def _pos(e: Expr):
    return e.pos if e.pos else (0, 0)


def _semantic(spec: FamilySpec):
    if spec.mode == "rational" and has_pi(spec.length):
        raise DSLError("mode mismatch: pi is not allowed in rational mode", *_pos(spec.length))
    for rule in spec.rules:
        if has_pi(rule.legs):
            raise DSLError("legs must be an integer expression", *_pos(rule.legs))
        if parity(rule.legs) == "even":
            raise DSLError("even legs: horseshoes need an odd number of legs", *_pos(rule.legs))
    stop = spec.stop if spec.stop is not None else spec.start + CHECK_INDICES
    for k in range(spec.start, min(stop, spec.start + CHECK_INDICES) + 1):
        try:
            val = eval_log_or_exact(spec.length, k)
        except (ArithmeticError, ValueError):
            raise DSLError(f"non-positive length at {spec.index}={k}", *_pos(spec.length))
        if val is not None and val <= 0:
            raise DSLError(f"non-positive length at {spec.index}={k}", *_pos(spec.length))
        rule = _rule_for(spec, k)
        if rule is not None:
            _check_legs(rule.legs, k)


def eval_log_or_exact(e: Expr, k: int):
    """Exact value when representable, a float otherwise; raises on non-positive logs."""
    try:
        return eval_exact(e, k)
    except TooLarge:
        lv = eval_log(e, k)
        if lv > 1000:
            return float("inf")
        return float(LOG.exp(lv)) if lv > -1000 else 1e-300


def _rule_for(spec: FamilySpec, k: int) -> Optional[Rule]:
    for rule in spec.rules:
        if _pred_true(rule.pred, k):
            return rule
    return None


def _check_legs(e: Expr, k: int) -> Optional[int]:
    """Exact odd leg count >= 3, or None when too large to hold (parity then symbolic)."""
    try:
        v = eval_exact(e, k)
    except TooLarge:
        if parity(e) != "odd":
            raise DSLError(f"legs at index {k} too large to check parity", *_pos(e))
        return None
    except ZeroDivisionError:
        raise DSLError(f"division by zero in legs at index {k}", *_pos(e))
    if v.denominator != 1:
        raise DSLError(f"legs at index {k} is not an integer", *_pos(e))
    n = int(v)
    if n < 3:
        raise DSLError(f"legs at index {k} is {n}; need at least 3", *_pos(e))
    if n % 2 == 0:
        raise DSLError(f"even legs at index {k}", *_pos(e))
    return n


def parse(text: str) -> FamilySpec:
    if len(text.encode("utf-8", errors="replace")) > MAX_INPUT:
        raise DSLError("input exceeds 64 KiB", 1, 1)
    spec = Parser(text).spec()
    _semantic(spec)
    return spec


def emit_expr(e: Expr) -> str:
    if isinstance(e, Num):
        v = e.value
        if v.denominator == 1 and v >= 0:
            return str(v.numerator)
        if v.denominator == 1:
            return f"(0-{-v.numerator})"
        if v < 0:
            return f"(0-({-v.numerator}/{v.denominator}))"
        return f"({v.numerator}/{v.denominator})"
    if isinstance(e, Pi):
        return "pi"
    if isinstance(e, Var):
        return e.name

    def wrap(x):
        s = emit_expr(x)
        return f"({s})" if isinstance(x, Bin) else s

    return f"{wrap(e.left)}{e.op}{wrap(e.right)}" if e.op == "^" else \
        f"{wrap(e.left)} {e.op} {wrap(e.right)}"


def emit_pred(p: Pred, index: str) -> str:
    if p.kind in ("all", "tower"):
        return p.kind
    return f"{index} {p.op} {p.value}"


def emit(spec: FamilySpec) -> str:
    stop = "inf" if spec.stop is None else str(spec.stop)
    anchor = " from right" if spec.anchor == "right" else ""
    lines = [f"family {spec.name} mode {spec.mode}",
             f"segments {spec.index} = {spec.start}..{stop}{anchor} : length {emit_expr(spec.length)}"]
    for r in spec.rules:
        lines.append(f"horseshoe where {emit_pred(r.pred, spec.index)} : legs {emit_expr(r.legs)}")
    lines.append("default : identity")
    return "\n".join(lines) + "\n"


def spec_hash(spec: FamilySpec) -> str:
    return hashlib.sha256(emit(spec).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# compile
# ---------------------------------------------------------------------------

def _far_for(spec: FamilySpec):
    kinds = {r.pred.kind for r in spec.rules}
    if kinds == {"tower"}:
        return far_tower
    if "all" in kinds or any(r.pred.op in (">", ">=", "!=") for r in spec.rules if r.pred.kind == "rel"):
        return lambda t: LOG.mpf(10) ** (20 * 2 ** t)
    return lambda t: None


def _rule_for_far(spec: FamilySpec, k) -> Rule:
    for r in spec.rules:
        if r.pred.kind in ("all", "tower") or r.pred.op in (">", ">=", "!="):
            return r
    return spec.rules[0]


def compile_spec(spec: FamilySpec, k_max: int = K_MAX) -> IntervalMap:
    """Lazily materializing map; blocks tile [0,1] in index order from the anchor."""
    arith = spec.arith
    if arith.exact and has_pi(spec.length):
        raise DSLError("mode mismatch: pi is not allowed in rational mode", *_pos(spec.length))
    if spec.stop is None and not converges(spec):
        raise DSLError("divergent total length", *_pos(spec.length))
    length_e = spec.length

    def length(k, ar):
        if ar.exact:
            return eval_exact(length_e, k)
        return eval_ctx(length_e, k, ar.ctx)

    def legs(k):
        rule = _rule_for(spec, k)
        if rule is None:
            return None
        try:
            return _check_legs(rule.legs, k)
        except DSLError as exc:
            from .core import ParityError
            raise ParityError(str(exc)) from exc

    def log_legs(k):
        if isinstance(k, int):
            rule = _rule_for(spec, k)
        else:
            rule = _rule_for_far(spec, k)
        return eval_log(rule.legs, k)

    def is_horseshoe(k):
        return _rule_for(spec, k) is not None

    only_towers = {r.pred.kind for r in spec.rules} == {"tower"}
    sch = Schedule(
        length=length,
        log_length=lambda k: eval_log(length_e, k),
        legs=lambda k: legs(k) if log_legs(k) < EXACT_LEGS_BITS * LOG.log(2) else None,
        log_legs=log_legs,
        is_horseshoe=is_horseshoe,
        start=spec.start,
        stop=spec.stop,
        anchor=spec.anchor,
        horseshoe_indices=towers if only_towers and spec.start == 1 and spec.stop is None else None,
        label=spec.name,
        far_index=_far_for(spec),
    )
    # partial sums may not exceed 1
    total = LOG.zero
    stop = min(spec.stop, spec.start + 63) if spec.stop is not None else spec.start + 63
    for k in range(spec.start, stop + 1):
        try:
            lv = eval_log(length_e, k)
        except (ArithmeticError, ValueError):
            raise DSLError(f"length not computable at {spec.index}={k}", *_pos(length_e))
        if lv > -10 ** 4:
            total += LOG.exp(lv) if lv < 10 else LOG.mpf(2)
        if total > 1 + LOG.mpf(2) ** -40:
            raise DSLError(f"total length exceeds 1 by index {k}", *_pos(length_e))
    chain = Chain(sch, 0, 1, arith, k_max)
    return IntervalMap(spec.name, [chain], arith,
                       {"family": "dsl", "spec": emit(spec), "hash": spec_hash(spec)})


def load(text: str, k_max: int = K_MAX) -> IntervalMap:
    return compile_spec(parse(text), k_max)


GALLERY_SPECS = {
    "phi_a": "family phi_a mode rational\n"
             "segments k = 1..inf : length (2/3)/3^(k-1)\n"
             "horseshoe where all : legs 3^k\n"
             "default : identity\n",
    "phi0b": "family phi0b mode rational\n"
             "segments k = 1..inf : length (2/3)/3^(k-1)\n"
             "horseshoe where tower : legs 3^k\n"
             "default : identity\n",
    "phi01": "family phi01 mode float\n"
             "segments j = 1..inf : length 6/(pi^2*j^2)\n"
             "horseshoe where tower : legs 3^j\n"
             "default : identity\n",
    "phi_beta": "family phi_beta mode float\n"
                "segments k = 1..inf : length 6/(pi^2*k^2)\n"
                "horseshoe where all : legs 3^k\n"
                "default : identity\n",
    "hazard": "family hazard mode rational\n"
              "segments n = 1..inf from right : length 1/2^n\n"
              "horseshoe where all : legs 2*n+1\n"
              "default : identity\n",
}
