"""Command-line front end.

Exit codes: 0 verdict produced, 2 parse error, 3 model or transform contract
violation, 4 numeric failure (including inconsistent stage outputs).
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import sys
from fractions import Fraction

from . import convexity as cx
from .errors import CRConvexError, TransformError
from .levi import levi_form, model_pseudoconvexity, pseudoconvexity_scan
from .model import analyze_model, kn_invariants
from .parser import format_poly, parse
from .report import AnalysisConfig, analyze, emit_report, kappa_rows, kappa_table_text
from .transform import (
    ShiftMap,
    apply_holomorphic,
    apply_shift,
    decompose_delta,
    parse_holomap,
    shift_length,
)


def load_config(path: str | None) -> AnalysisConfig:
    if path is None:
        return AnalysisConfig()
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_string("[settings]\n" + fh.read())
    return AnalysisConfig.from_mapping(dict(parser["settings"]))


def _config(args) -> AnalysisConfig:
    cfg = load_config(args.config)
    for name in ("grid", "tol", "max_cuts", "radius"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    return cfg


def _write(data: str | bytes):
    if isinstance(data, str):
        data = data.encode()
    sys.stdout.buffer.write(data)
    sys.stdout.flush()


def _dump(obj):
    _write(json.dumps(obj, indent=2) + "\n")


# ---------------------------------------------------------------------------
# Subcommands


def cmd_analyze(args):
    report = analyze(args.expr, _config(args))
    _write(emit_report(report, "json" if args.json else "text", timings=args.timings))


def cmd_model(args):
    m = analyze_model(parse(args.expr))
    data = {
        "type": m.type_k,
        "mu": str(m.mu),
        "weight_pair": list(m.weight_pair),
        "model": format_poly(m.model),
        "standard": format_poly(m.standard_model),
        "residual": format_poly(m.residual_terms),
        "removable": format_poly(m.removable_terms),
        "warnings": list(m.warnings),
    }
    if args.json:
        _dump(data)
        return
    for key, value in data.items():
        if key == "warnings":
            for w in value:
                _write(f"warning: {w}\n")
        else:
            _write(f"{key}: {value}\n")


def cmd_invariants(args):
    m = analyze_model(parse(args.expr))
    inv = kn_invariants(m.standard_model)
    rows = kappa_rows(inv)
    suff = cx.sufficient_sum(inv)
    nec = cx.screen_necessary(inv)
    if args.json:
        _dump({
            "k": inv.k,
            "a0": str(inv.a0),
            "kappa_squared": {str(j): str(v) for j, v in sorted(inv.kappa_sq.items())},
            "gamma": {str(r.j): r.gamma for r in rows},
            "sufficient_sum": suff,
            "screen_sufficient": suff < 1,
            "screen_necessary": {"passed": nec.passed, "j": nec.j, "bound": nec.bound},
        })
        return
    _write(f"k: {inv.k}\na0: {inv.a0}\n")
    _write("\n".join(kappa_table_text(rows)) + "\n")
    _write(f"sufficient sum: {suff:.6g} -> {'Pass' if suff < 1 else 'Fail'}\n")
    _write(f"necessary: {nec}\n")


def cmd_convexity(args):
    cfg = _config(args)
    m = analyze_model(parse(args.expr))
    v = cx.certificate_search(m.model, m.type_k, m.mu, cfg.search_config())
    if args.json:
        _dump(v.to_json())
        return
    _write(f"kind: {v.kind.value}\n")
    if v.margin is not None:
        _write(f"margin: {v.margin:.9g}\n")
    _write(f"upper_bound: {v.upper_bound:.9g}\nbest_lower: {v.best_lower:.9g}\n"
           f"cuts: {v.samples_used}\niterations: {v.iterations}\n")
    if v.h is not None and v.kind is cx.VerdictKind.CERTIFICATE:
        for t in v.h.to_json():
            _write(f"alpha[{t['m']},{t['l']}] = {complex(t['re'], t['im']):.9g}\n")
    for d in v.diagnostics:
        _write(f"note: {d}\n")


def _sweep_rows(kmax: int, tol: float):
    for k in range(4, kmax + 1, 2):
        for l in range(2, k, 2):
            formula = float(cx.gamma_threshold(k, l))
            brute = cx.brute_force_threshold(k, l, tol=tol)
            yield k, l, formula, brute, abs(formula - brute)


def cmd_threshold(args):
    if args.sweep:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(["k", "l", "gamma_formula", "gamma_bruteforce", "abs_error"])
        for k, l, formula, brute, err in _sweep_rows(args.kmax, args.oracle_tol):
            writer.writerow([k, l, f"{formula:.10f}", f"{brute:.10f}", f"{err:.3e}"])
        return
    if args.k is None or args.l is None:
        raise SystemExit("threshold needs K and L (or --sweep)")
    k, l = args.k, args.l
    g = cx.gamma_threshold(k, l)
    data = {"k": k, "l": l, "gamma": float(g), "gamma_squared": str(cx.gamma_squared(k, l)),
            "exact": str(g) if isinstance(g, Fraction) else None}
    if args.oracle:
        data["gamma_bruteforce"] = cx.brute_force_threshold(k, l, tol=args.oracle_tol)
        data["abs_error"] = abs(data["gamma_bruteforce"] - data["gamma"])
    if args.a is not None:
        data["a"] = args.a
        data["class"] = cx.kn_classify(k, l, Fraction(args.a)).value
    if args.json:
        _dump(data)
        return
    for key, value in data.items():
        if value is not None:
            _write(f"{key}: {value}\n")


def cmd_levi(args):
    cfg = _config(args)
    F = parse(args.expr)
    out = {}
    if args.point is not None:
        zr, zi, u = args.point
        out["levi_form"] = levi_form(F, complex(zr, zi), u)
    m = analyze_model(F)
    out["model"] = model_pseudoconvexity(m.model, m.mu, cfg.levi_tol,
                                         (cfg.grid, cfg.grid)).to_json()
    out["scan"] = pseudoconvexity_scan(F, cfg.radius, cfg.scan_grid, cfg.levi_tol).to_json()
    if args.json:
        _dump(out)
        return
    if "levi_form" in out:
        _write(f"levi_form: {out['levi_form']:.12g}\n")
    mp = out["model"]
    _write(f"model: {mp['kind']} (min = {mp['min_value']:.6g}, blow-up degree "
           f"{mp['blowup_degree']})\n")
    if "witness" in mp:
        _write(f"  witness: {mp['witness']}\n")
    sc = out["scan"]
    _write(f"scan (radius {cfg.radius:g}): {sc['kind']} over {sc['samples']} samples, "
           f"min {sc['min_value']:.3g}\n")
    if "witness" in sc:
        _write(f"  witness: {sc['witness']}\n")


def cmd_transform(args):
    F = parse(args.expr)
    out = {}
    if args.map is not None:
        T = parse_holomap(args.map, args.cutoff)
        out["map"] = str(T)
        out["result"] = format_poly(apply_holomorphic(F, T))
        if args.decompose:
            m = analyze_model(F)
            if m.mu:
                S = decompose_delta(T, m.type_k, m.mu)
                out["delta"] = [str(d) for d in S.delta]
    if args.shift is not None:
        m = analyze_model(F)
        n = shift_length(m.type_k, m.mu)
        q = parse(args.shift, holomorphic=True)
        if any(a for a, _, _ in q.terms) or q.coef(0, 0, 0) or q.degree() > n:
            raise TransformError(f"shift must be a polynomial in w of degree 1..{n} without "
                                 "constant term")
        S = ShiftMap(tuple(q.coef(0, 0, j) for j in range(1, n + 1)))
        out["shift_length"] = n
        out["shifted_model"] = format_poly(apply_shift(m.model, S, m.type_k, m.mu))
    if not out:
        raise SystemExit("transform needs --map and/or --shift")
    if args.json:
        _dump(out)
        return
    for key, value in out.items():
        _write(f"{key}: {value}\n")


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="crconvex",
        description="Pseudoconvexity and local convexifiability of polynomial model "
                    "hypersurfaces v = F(z, zbar, u) in C^2.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, expr=True):
        if expr:
            sp.add_argument("expr", help="defining polynomial, e.g. '|z|^4 + u^2'")
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        sp.add_argument("--grid", type=int, help="sphere grid points per axis")
        sp.add_argument("--tol", type=float, help="certificate/refutation tolerance")
        sp.add_argument("--max-cuts", type=int, dest="max_cuts", help="cutting-plane budget")
        sp.add_argument("--radius", type=float, help="Levi scan radius")
        sp.add_argument("--config", help="flat key=value configuration file")
        return sp

    sp = common(sub.add_parser("analyze", help="run the full pipeline"))
    sp.add_argument("--timings", action="store_true", help="include wall times per stage")
    sp.set_defaults(func=cmd_analyze)
    common(sub.add_parser("model", help="type, weight and generalized model")).set_defaults(
        func=cmd_model)
    common(sub.add_parser("invariants", help="invariants and screens")).set_defaults(
        func=cmd_invariants)
    common(sub.add_parser("convexity", help="max-min certificate search")).set_defaults(
        func=cmd_convexity)

    sp = common(sub.add_parser("threshold", help="closed-form convexity threshold"), expr=False)
    sp.add_argument("k", type=int, nargs="?")
    sp.add_argument("l", type=int, nargs="?")
    sp.add_argument("--a", help="classify the two-term model with this coefficient")
    sp.add_argument("--oracle", action="store_true", help="also run the brute-force oracle")
    sp.add_argument("--oracle-tol", type=float, default=1e-4, dest="oracle_tol")
    sp.add_argument("--sweep", action="store_true",
                    help="CSV of formula vs oracle for all even 2 <= l < k <= KMAX")
    sp.add_argument("--kmax", type=int, default=10)
    sp.set_defaults(func=cmd_threshold)

    sp = common(sub.add_parser("levi", help="Levi form and pseudoconvexity checks"))
    sp.add_argument("--point", type=float, nargs=3, metavar=("RE_Z", "IM_Z", "U"))
    sp.set_defaults(func=cmd_levi)

    sp = common(sub.add_parser("transform", help="apply a holomorphic change of variables"))
    sp.add_argument("--map", help="'g = ...; f = ...' in z and w")
    sp.add_argument("--cutoff", type=int, default=10, help="total-degree truncation")
    sp.add_argument("--decompose", action="store_true",
                    help="also print the shift coefficients delta_j for the map")
    sp.add_argument("--shift", help="apply z -> z + q(u) to the model, q a polynomial in w")
    sp.set_defaults(func=cmd_transform)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except CRConvexError as exc:
        print(f"error [{exc.stage}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
