"""Acceptance scenarios: each runs one criterion and returns measured numbers plus PASS/FAIL."""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from . import dsl, gallery
from .core import Interval, block_map, identity_map, uniform_block
from .holder import ModulusOfContinuity, holder_verdict, leg_pair_ratio, modulus_check
from .mdim import ddf_lower, mdim_curve, mdim_report, predictor_misiu
from .numeric import LOG, lmpf
from .separation import (ORACLE_MAX_POINTS, BowenContext, exhaustive_sep, greedy_separated,
                         grid_orbits, sep_count_greedy, sep_lower_itinerary, span_count_greedy,
                         span_upper_lipschitz)


@dataclass
class Result:
    criterion: str
    title: str
    passed: bool
    measured: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} criterion {self.criterion}: {self.title}"

    def to_dict(self) -> dict:
        # timings are left out so reports stay byte-identical between runs
        return {"criterion": self.criterion, "title": self.title,
                "status": "PASS" if self.passed else "FAIL", "measured": self.measured}


def _s(x, digits: int = 15) -> str:
    return LOG.nstr(LOG.mpf(x), digits) if not isinstance(x, Fraction) else str(x)


def c1_predictor_exactness() -> Result:
    measured, ok = {}, True
    for r in (Fraction(1, 2), Fraction(1), Fraction(2)):
        lim = predictor_misiu(gallery.phi_a(r), 10).limit
        target = 1 / (1 + r)
        err = abs(lim - lmpf(target))
        ok &= err <= 1e-12
        measured[f"r={r}"] = {"limit": _s(lim), "target": str(target), "error": _s(err, 5)}
    return Result("1", "phi_a predictor limit equals 1/(1+r) to 1e-12", ok, measured)


def c2_finite_scale() -> Result:
    curve = mdim_curve(gallery.phi_a(1), n_max=8, depth=10)
    rep = mdim_report(curve)
    lo, hi = rep.liminf_est, rep.limsup_est
    ok = abs(lo - 0.5) <= 0.07 and abs(hi - 0.5) <= 0.07
    return Result("2", "phi_a(1) K=10 trailing-window estimates within 0.07 of 0.5", ok,
                  {"liminf_est": _s(lo), "limsup_est": _s(hi)})


def c3_hazard_zero() -> Result:
    m = gallery.hazard_map()
    pred = predictor_misiu(m, 30)
    p30 = pred.at(30)
    curve = mdim_curve(m, n_max=8, depth=30)
    last = next(p for p in curve.points if p.k == 30)
    ok = p30 <= 0.1 and last.upper_ratio <= 0.12
    return Result("3", "hazard predictor <= 0.1 by n=30 and upper ratio <= 0.12 at depth 30", ok,
                  {"p_30": _s(p30), "predictor_limit": _s(pred.limit, 5),
                   "upper_ratio_30": _s(last.upper_ratio), "lower_ratio_30": _s(last.lower_ratio)})


def c4_full_trend() -> Result:
    m = gallery.phi_zero_one()
    p5 = predictor_misiu(m, 5).at(5)
    ddf = ddf_lower(m, 8)
    ok = p5 >= 0.99 and ddf <= 0.05
    return Result("4", "phi01 predictor at tower n=5 >= 0.99 and ddf lower <= 0.05", ok,
                  {"p_tower5": _s(p5), "ddf_lower_depth8": _s(ddf), "ddf_lower_depth5":
                   _s(ddf_lower(m, 5))})


def c5_gap_family() -> Result:
    m = gallery.varphi_ab(0, Fraction(1, 2))
    pred = predictor_misiu(m, 5)
    p5 = pred.best_at(5)
    ddf = ddf_lower(m, 5)
    ok = abs(p5 - 0.5) <= 0.03 and ddf <= 0.05
    return Result("5", "varphi(0,1/2) predictor within 0.03 of 0.5 and ddf <= 0.05 at tower depth 5",
                  ok, {"p_tower5": _s(p5), "predictor_limit": _s(pred.limit), "ddf_lower": _s(ddf)})


def oracle_step(eps: Fraction) -> Fraction:
    """eps/d for the largest d <= 10 keeping the unit grid within the oracle limit."""
    for d in range(10, 3, -1):
        step = eps / d
        if 1 / step + 1 <= ORACLE_MAX_POINTS:
            return step
    raise ValueError("epsilon too small for the oracle")


def c6_counting_oracle() -> Result:
    fmap = block_map(uniform_block(Interval(Fraction(0), Fraction(1)), 3))
    rows, sandwich, equal = [], True, True
    for eps in (Fraction(1, 9), Fraction(1, 27)):
        step = oracle_step(eps)
        for n in range(1, 6):
            ctx = BowenContext(fmap, n)
            go = grid_orbits(ctx, step)
            low = sep_lower_itinerary(fmap.blocks(1)[0], n, eps).count
            exh = exhaustive_sep(ctx, eps, step, go).count
            greedy = len(greedy_separated(go, eps))
            up = span_upper_lipschitz(3, n, eps).count
            sandwich &= low <= exh <= up
            equal &= greedy == exh
            rows.append({"eps": str(eps), "n": n, "step": str(step), "itinerary_lower": low,
                         "exhaustive": exh, "greedy": greedy, "lipschitz_upper": up})
    return Result("6", "itinerary <= oracle <= lipschitz and greedy == oracle (3-leg block)",
                  sandwich and equal, {"sandwich": sandwich, "greedy_equals_oracle": equal,
                                       "rows": rows})


def instance_suite():
    maps = [("block3", block_map(uniform_block(Interval(Fraction(0), Fraction(1)), 3))),
            ("block5", block_map(uniform_block(Interval(Fraction(0), Fraction(1)), 5))),
            ("hazard", gallery.hazard_map()),
            ("phi_a:r=1", gallery.phi_a(1)),
            ("identity", identity_map())]
    for name, m in maps:
        for n in (1, 2, 3):
            for eps in (Fraction(1, 4), Fraction(1, 8), Fraction(1, 12), Fraction(1, 16)):
                yield name, m, n, eps


def c7_separation_inequalities() -> Result:
    count, bad = 0, []
    for name, m, n, eps in instance_suite():
        ctx = BowenContext(m, n)
        go = grid_orbits(ctx, eps / 20)
        sep = sep_count_greedy(ctx, eps, eps / 20, orbits=go).count
        span = span_count_greedy(ctx, eps, eps / 20, orbits=go).count
        span_half = span_count_greedy(ctx, eps / 2, eps / 20, orbits=go).count
        count += 1
        if not span <= sep <= span_half:
            bad.append({"map": name, "n": n, "eps": str(eps), "span": span, "sep": sep,
                        "span_half": span_half})
    return Result("7", "span(eps) <= sep(eps) <= span(eps/2) on >= 50 instances",
                  count >= 50 and not bad, {"instances": count, "violations": bad})


def c8_holder_frontier() -> Result:
    m = gallery.phi_a(1)
    out, ok = {}, True
    for alpha, want in ((0.45, "bounded"), (0.5, "bounded"), (0.55, "diverging"),
                        (0.6, "diverging")):
        a = Fraction(str(alpha))
        rep = holder_verdict(m, a, depth=15)
        entry = {"verdict": rep.verdict, "growth_fit": format(rep.growth_fit, ".6g")}
        ok &= rep.verdict == want
        if want == "diverging":
            closed = float((2 * a - 1) * LOG.log(3))
            rel = abs(rep.growth_fit - closed) / closed
            entry.update({"closed_form": format(closed, ".6g"), "relative_error": format(rel, ".3g")})
            ok &= rel <= 0.2
        out[str(alpha)] = entry
    return Result("8", "phi_a(1) Hoelder frontier at alpha = 1/2", ok, out)


def c9_non_holder() -> Result:
    m = gallery.phi_beta(2)
    C = LOG.mpf(6) / LOG.pi ** 2
    out, ok = {}, True
    for alpha in ("0.1", "0.3", "0.5", "0.7", "0.9"):
        a = Fraction(alpha)
        rep = holder_verdict(m, a, depth=15)
        worst = LOG.zero
        for n in range(1, 13):
            got = leg_pair_ratio(m, n, a)
            af = lmpf(a)
            want = LOG.power(3, af * n) * LOG.power(C, 1 - af) / LOG.power(n, 2 * (1 - af))
            worst = max(worst, abs(got / want - 1))
        ok &= rep.verdict == "diverging" and worst <= 0.01
        out[alpha] = {"verdict": rep.verdict, "growth_fit": format(rep.growth_fit, ".6g"),
                      "max_leg_pair_relative_error": _s(worst, 5)}
    return Result("9", "phi_beta(2) diverging for all alpha; leg-pair ratio within 1%", ok, out)


def c10_modulus() -> Result:
    rep = modulus_check(gallery.hazard_map(), ModulusOfContinuity.omega(), depth=30)
    adj = max(rep.components["adjacent"].values())
    ok = rep.sup <= 3.5 and adj <= 3 + 1e-6
    return Result("10", "hazard omega-sup <= 3.5 and adjacent-block sup <= 3", ok,
                  {"sup": _s(rep.sup), "adjacent_sup": _s(adj), "verdict": rep.verdict})


def c11_product() -> Result:
    pred = predictor_misiu(gallery.psi_b_product(1, 2), 10)
    parts = [lmpf(p) for p in pred.piece_limits]
    ok = all(abs(p - 0.5) <= 1e-12 for p in parts) and abs(pred.limit - 1) <= 1e-12
    return Result("11", "psi_b(1,2) factor predictors 0.5 and sum 1.0", ok,
                  {"factor_limits": [_s(p) for p in parts], "sum": _s(pred.limit)})


DSL_GALLERY = {
    "phi_a": lambda: gallery.phi_a(1),
    "phi0b": lambda: gallery.phi_zero_b(1),
    "phi01": lambda: gallery.phi_zero_one(),
    "phi_beta": lambda: gallery.phi_beta(2),
    "hazard": gallery.hazard_map,
}


def dsl_gallery_gap(key: str, points: int = 1000, seed: int = 0):
    """Largest |compiled - gallery| over random points and whether it is within tolerance.

    Rational maps must agree exactly; float maps within the working radius times
    the local slope (block boundaries are rounded independently).
    """
    compiled = dsl.load(dsl.GALLERY_SPECS[key])
    ref = DSL_GALLERY[key]()
    ar = ref.arith
    rng = random.Random(seed)
    worst, ok = 0, True
    for _ in range(points):
        x = ar.num(Fraction(rng.randrange(10 ** 12), 10 ** 12))
        d = abs(compiled(x) - ref(x))
        worst = max(worst, d)
        if ar.exact:
            ok &= d == 0
        else:
            blk, _ = ref.piece_at(x).locate(x)
            legs = (blk.legs if blk is not None else None) or 1
            ok &= d <= ar.radius * max(1, legs) * 64
    return worst, ok


def fuzz(count: int, seed: int = 0) -> list:
    """Random texts up to 1 KiB; returns the inputs raising anything but DSLError."""
    rng = random.Random(seed)
    seeds = list(dsl.GALLERY_SPECS.values())
    alphabet = "kjn0123456789+-*/^() .:=<>!#\nfamilyodesgthwrlpinfé"
    chunks = ["9^9^9", "((", "0", "pi", "2*k", "inf", "from left", "k > 3", "tower", ")"]
    crashes = []
    for _ in range(count):
        if rng.random() < 0.3:
            text = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 300)))
        else:
            chars = list(rng.choice(seeds))
            for _ in range(rng.randrange(1, 6)):
                j = rng.randrange(len(chars) + 1)
                op = rng.random()
                if op < 0.4 and chars:
                    del chars[min(j, len(chars) - 1)]
                elif op < 0.8:
                    chars.insert(j, rng.choice(alphabet))
                else:
                    chars[j:j] = rng.choice(chunks)
            text = "".join(chars)
        text = text.encode("utf-8")[:1024].decode("utf-8", errors="ignore")
        try:
            dsl.compile_spec(dsl.parse(text))
        except dsl.DSLError:
            pass
        except Exception as exc:  # noqa: BLE001 - the property is that nothing else escapes
            crashes.append((text, repr(exc)))
    return crashes


def c12_dsl(fuzz_count: int = 100_000) -> Result:
    out, ok = {}, True
    for key in DSL_GALLERY:
        worst, good = dsl_gallery_gap(key)
        spec = dsl.parse(dsl.GALLERY_SPECS[key])
        trip = dsl.parse(dsl.emit(spec)) == spec
        ok &= good and trip
        out[key] = {"max_difference": _s(worst, 5), "within_tolerance": good, "round_trip": trip}
    crashes = fuzz(fuzz_count)
    ok &= not crashes
    out["fuzz"] = {"inputs": fuzz_count, "crashes": len(crashes),
                   "examples": [repr(t[:60]) + " " + e for t, e in crashes[:3]]}
    return Result("12", "DSL gallery equivalence, round trip and fuzz", ok, out)


def c13_determinism() -> Result:
    from .cli import render  # late import: the CLI depends on this module

    configs = [
        ("sep", {"map": "phi_a:r=1", "n": 3, "eps": "1/9", "grid": "1/90"}),
        ("span", {"map": "hazard", "n": 2, "eps": "1/8", "grid": "1/80"}),
        ("curve", {"map": "phi_a:r=1", "K": 10, "nmax": 8}),
        ("sweep", {"map": "phi0b:r=1", "K": 6, "nmax": 8}),
        ("predict", {"map": "psi_b:b=1,n=2", "K": 10}),
        ("holder", {"map": "phi_a:r=1", "alpha": "0.55", "K": 8}),
    ]
    out, ok = {}, True
    for cmd, cfg in configs:
        a = render(cmd, dict(cfg, workers=1))
        b = render(cmd, dict(cfg, workers=8))
        same = a == b
        ok &= same
        out[cmd] = {"identical": same, "bytes": len(a)}
    return Result("13", "outputs byte-identical for workers 1 and 8", ok, out)


CRITERIA: dict[str, Callable[[], Result]] = {
    "1": c1_predictor_exactness, "2": c2_finite_scale, "3": c3_hazard_zero,
    "4": c4_full_trend, "5": c5_gap_family, "6": c6_counting_oracle,
    "7": c7_separation_inequalities, "8": c8_holder_frontier, "9": c9_non_holder,
    "10": c10_modulus, "11": c11_product, "12": c12_dsl, "13": c13_determinism,
}


def s_phi0b() -> Result:
    m = gallery.phi_zero_b(1)
    pred = predictor_misiu(m, 5)
    ddf = ddf_lower(m, 5)
    ok = abs(pred.limit - 0.5) <= 1e-12 and ddf <= 0.05
    return Result("phi0b", "phi0b(1) upper predictor limit 1/2 and ddf lower <= 0.05", ok,
                  {"predictor_limit": _s(pred.limit), "p_tower5": _s(pred.at(5)),
                   "ddf_lower": _s(ddf)})


EXAMPLES = {
    "phi_a_r1": ["1", "2", "8"],
    "hazard": ["3", "10"],
    "phi01": ["4"],
    "phi0b_r1": ["phi0b"],
    "phi_beta_2": ["9"],
    "varphi_0_1": ["5"],
    "psi_b": ["11"],
    "counting": ["6", "7"],
    "dsl": ["12"],
    "determinism": ["13"],
}

EXTRA = {"phi0b": s_phi0b}


def run(criterion: str) -> Result:
    fn = CRITERIA.get(criterion) or EXTRA[criterion]
    t0 = time.perf_counter()
    res = fn()
    res.seconds = time.perf_counter() - t0
    return res


def reproduce(example_id: str) -> list[Result]:
    if example_id not in EXAMPLES:
        raise KeyError(example_id)
    return [run(c) for c in EXAMPLES[example_id]]
