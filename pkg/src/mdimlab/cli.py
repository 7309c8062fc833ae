"""Command-line front end: ``mdimlab <command> [options]``.

Exit codes: 0 success, 2 usage error, 3 budget exceeded, 4 acceptance failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import __version__, dsl, gallery, scenarios
from .core import ProductMap, to_document
from .holder import ModulusOfContinuity, holder_verdict, modulus_check
from .mdim import ddf_lower, mdim_curve, mdim_report, predictor_misiu
from .numeric import LOG, DomainError
from .separation import (BowenContext, BudgetError, SepCount, grid_orbits, sep_count_greedy,
                         span_count_greedy, to_fraction, write_counts)

EXIT_OK, EXIT_USAGE, EXIT_BUDGET, EXIT_FAIL = 0, 2, 3, 4

COMMANDS = ("build", "eval", "sep", "span", "curve", "predict", "holder", "reproduce", "sweep")
CSV_COMMANDS = ("sep", "span", "sweep")


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# map loading and provenance
# ---------------------------------------------------------------------------

def load_map(cfg: dict):
    """(map, source text) from ``cfg['map']`` (gallery id) or ``cfg['spec']`` (.hsf path)."""
    bits = int(cfg.get("precision") or 256)
    if cfg.get("spec"):
        path = Path(cfg["spec"])
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"{path}: {exc.strerror}") from exc
        try:
            spec = dsl.parse(text)
            return dsl.compile_spec(spec), dsl.emit(spec)
        except dsl.DSLError as exc:
            raise UsageError(f"{path}:{exc}") from exc
    if not cfg.get("map"):
        raise UsageError("one of --map or --spec is required")
    try:
        return gallery.parse_gallery_id(cfg["map"], bits), cfg["map"]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def provenance(cfg: dict, source: str, **extra) -> dict:
    """Everything needed to replay a run; the worker count is deliberately left out."""
    prov = {"tool": "mdimlab", "version": __version__,
            "map_source": source,
            "spec_hash": hashlib.sha256(source.encode()).hexdigest()[:16],
            "precision": str(cfg.get("precision") or 256)}
    prov.update({k: str(v) for k, v in extra.items()})
    return prov


def _dump(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def _fr(text, name: str) -> Fraction:
    try:
        v = Fraction(str(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad value for --{name}: {text!r}") from exc
    if v <= 0:
        raise UsageError(f"--{name} must be positive")
    return v


def _eps_list(cfg: dict) -> list[Fraction]:
    raw = cfg.get("eps")
    if raw is None:
        raise UsageError("--eps is required")
    return [_fr(p, "eps") for p in str(raw).split(",") if p.strip()]


# ---------------------------------------------------------------------------
# commands; each returns the output text
# ---------------------------------------------------------------------------

def cmd_build(cfg: dict) -> str:
    fmap, src = load_map(cfg)
    if isinstance(fmap, ProductMap):
        raise UsageError("build writes interval maps; products have no segment document")
    K = int(cfg.get("K") or 10)
    doc = to_document(fmap, K)
    doc["provenance"] = provenance(cfg, src, K=K)
    return _dump(doc)


def cmd_eval(cfg: dict) -> str:
    fmap, src = load_map(cfg)
    xs = cfg.get("x") or []
    if not xs:
        raise UsageError("eval needs at least one point")
    rows = []
    for x in xs:
        if isinstance(fmap, ProductMap):
            pt = tuple(fmap.arith.num(Fraction(c)) for c in str(x).split(","))
            y = fmap(pt)
            rows.append({"x": str(x), "y": [fmap.arith.to_str(c) for c in y]})
        else:
            y, trunc = fmap.eval_flagged(fmap.arith.num(Fraction(str(x))))
            rows.append({"x": str(x), "y": fmap.arith.to_str(y), "truncated": trunc})
    return _dump({"values": rows, "provenance": provenance(cfg, src)})


def _counts(cfg: dict, span: bool) -> str:
    fmap, _ = load_map(cfg)
    nmax = int(cfg.get("nmax") or 3)
    workers = int(cfg.get("workers") or 1)
    out: list[SepCount] = []
    for eps in _eps_list(cfg):
        step = _fr(cfg["grid"], "grid") if cfg.get("grid") else None
        for n in range(1, nmax + 1):
            ctx = BowenContext(fmap, n)
            if step is not None and step > eps / 4:
                raise UsageError("--grid must be <= eps/4")
            go = grid_orbits(ctx, step if step is not None else eps / 10, workers)
            fn = span_count_greedy if span else sep_count_greedy
            out.append(fn(ctx, eps, go.step, orbits=go))
    return write_counts(out)


def cmd_sep(cfg: dict) -> str:
    return _counts(cfg, span=False)


def cmd_span(cfg: dict) -> str:
    return _counts(cfg, span=True)


def _curve(cfg: dict):
    fmap, src = load_map(cfg)
    if isinstance(fmap, ProductMap):
        raise UsageError("curves are computed for interval maps; use predict for products")
    K = int(cfg.get("K") or 10)
    nmax = int(cfg.get("nmax") or 8)
    schedule = cfg.get("schedule") or "critical"
    try:
        curve = mdim_curve(fmap, nmax, K, schedule, int(cfg.get("workers") or 1))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return fmap, src, curve


def cmd_sweep(cfg: dict) -> str:
    return _curve(cfg)[2].write_csv()


def cmd_curve(cfg: dict) -> str:
    fmap, src, curve = _curve(cfg)
    K = curve.depth
    pred = predictor_misiu(fmap, K)
    rep = mdim_report(curve, pred, ddf_lower(fmap, K),
                      provenance=provenance(cfg, src, K=K, n_max=curve.n_max,
                                            schedule=curve.schedule))
    doc = rep.to_dict()
    doc["points"] = [{"k": p.k, "kind": p.kind, "log_eps": LOG.nstr(p.log_eps, 17),
                      "lower_ratio": LOG.nstr(p.lower_ratio, 17),
                      "upper_ratio": LOG.nstr(p.upper_ratio, 17)} for p in curve.points]
    return _dump(doc)


def cmd_predict(cfg: dict) -> str:
    fmap, src = load_map(cfg)
    K = int(cfg.get("K") or 10)
    pred = predictor_misiu(fmap, K)
    f = lambda x: None if x is None else LOG.nstr(LOG.mpf(x), 17)
    doc = {"values": [{"piece": p, "k": k, "p": f(v)} for p, k, v in pred.values],
           "limit": f(pred.limit), "piece_limits": [f(x) for x in pred.piece_limits],
           "diverging": pred.diverging,
           "provenance": provenance(cfg, src, K=K)}
    if not isinstance(fmap, ProductMap):
        doc["ddf_lower"] = f(ddf_lower(fmap, K))
    return _dump(doc)


def cmd_holder(cfg: dict) -> str:
    fmap, src = load_map(cfg)
    if isinstance(fmap, ProductMap):
        raise UsageError("holder checks interval maps")
    K = int(cfg.get("K") or 15)
    try:
        if cfg.get("alpha") is not None:
            alpha = _fr(cfg["alpha"], "alpha")
            if alpha > 1:
                raise UsageError("--alpha must be in (0, 1]")
            rep = holder_verdict(fmap, alpha, K)
        else:
            rep = modulus_check(fmap, ModulusOfContinuity.omega(), K)
    except (ValueError, DomainError) as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(str(exc)) from exc
    doc = rep.to_dict()
    doc["provenance"] = provenance(cfg, src, K=K, alpha=cfg.get("alpha") or "omega")
    return _dump(doc)


def cmd_reproduce(cfg: dict):
    ex = cfg.get("example")
    if ex not in scenarios.EXAMPLES:
        raise UsageError(f"unknown example {ex!r}; choose from {', '.join(scenarios.EXAMPLES)}")
    results = scenarios.reproduce(ex)
    doc = {"example": ex, "criteria": [r.to_dict() for r in results],
           "status": "PASS" if all(r.passed for r in results) else "FAIL",
           "provenance": provenance(cfg, ex)}
    return _dump(doc), results


HANDLERS = {"build": cmd_build, "eval": cmd_eval, "sep": cmd_sep, "span": cmd_span,
            "curve": cmd_curve, "sweep": cmd_sweep, "predict": cmd_predict, "holder": cmd_holder}


def render(command: str, cfg: dict) -> str:
    """Output text of a command for a config dict (the CLI flags without dashes)."""
    if command == "reproduce":
        return cmd_reproduce(cfg)[0]
    return HANDLERS[command](cfg)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _workers(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("worker count must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mdimlab",
                                     description="Metric mean dimension of horseshoe interval maps.")
    parser.add_argument("--version", action="version", version=f"mdimlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, K=None):
        src = p.add_mutually_exclusive_group()
        src.add_argument("--map", help="gallery id, e.g. phi_a:r=1, hazard, psi_b:b=1,n=2")
        src.add_argument("--spec", help="path to a .hsf family spec")
        p.add_argument("--precision", type=int, default=256, help="bits for float maps")
        p.add_argument("--workers", type=_workers, default=1)
        p.add_argument("--out", help="output path (.csv or .json); stdout when omitted")
        if K is not None:
            p.add_argument("--K", type=int, default=K, help="block depth")

    p = sub.add_parser("build", help="write the segment document of a map")
    common(p, K=10)
    p = sub.add_parser("eval", help="evaluate a map at points")
    common(p)
    p.add_argument("x", nargs="+", help="points (exact decimals or p/q; comma-separated for products)")
    for name, what in (("sep", "separated"), ("span", "spanning")):
        p = sub.add_parser(name, help=f"greedy {what} counts on a grid, n = 1..nmax")
        common(p)
        p.add_argument("--eps", required=True, help="scale(s), comma-separated, e.g. 1/9,1/27")
        p.add_argument("--grid", help="grid step (default eps/10, at most eps/4)")
        p.add_argument("--nmax", type=int, default=3)
    for name, what in (("curve", "mdim report with the curve"), ("sweep", "curve CSV")):
        p = sub.add_parser(name, help=what)
        common(p, K=10)
        p.add_argument("--nmax", type=int, default=8)
        p.add_argument("--schedule", choices=("critical", "bracket"), default="critical")
    p = sub.add_parser("predict", help="predictor values, limit and ddf lower bound")
    common(p, K=10)
    p = sub.add_parser("holder", help="Hoelder verdict (--alpha) or omega modulus check")
    common(p, K=15)
    p.add_argument("--alpha")
    p = sub.add_parser("reproduce", help="run acceptance scenarios for an example")
    p.add_argument("example", help=", ".join(scenarios.EXAMPLES))
    p.add_argument("--out")
    p.add_argument("--precision", type=int, default=256)
    return parser


def _write(text: str, out: Optional[str], command: str):
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    ext = path.suffix.lower()
    want = ".csv" if command in CSV_COMMANDS else ".json"
    if ext not in (".csv", ".json"):
        raise UsageError(f"{path}: output extension must be .csv or .json")
    if ext != want:
        raise UsageError(f"{path}: {command} writes {want} output")
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from exc


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = {k: v for k, v in vars(args).items() if v is not None}
    try:
        if args.command == "reproduce":
            text, results = cmd_reproduce(cfg)
            _write(text, cfg.get("out"), "reproduce")
            for r in results:
                print(r.line(), file=sys.stderr)
            return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL
        text = render(args.command, cfg)
        _write(text, cfg.get("out"), args.command)
    except UsageError as exc:
        print(f"mdimlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetError as exc:
        print(f"mdimlab: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ValueError, DomainError) as exc:
        print(f"mdimlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
