"""Command-line interface.

    floquetkit analyze <builtin|file> [--param k=v ...] [--method cofactor|variational|both]
    floquetkit verify  <builtin|file> [--param k=v ...] [--samples N]
    floquetkit chart   mathieu --a 0:4 --q -1:1 --grid 81 --out chart.csv
    floquetkit steklov --a 2.5 --b 3 --c 1 --W 1 --l 1

Exit codes: 0 success, 1 usage or parse error, 2 hypothesis or verification
failure.
"""

import argparse
from fractions import Fraction
import hashlib
import json
import math
import os
import re
import sys
import time

import numpy as np

from . import __version__
from .errors import (FloquetError, HypothesisViolated, IntegrationError,
                     InvalidParameters, NoSolution, PolySyntaxError,
                     StructureViolation, UnknownVariable)
from .floquet import (HYPOTHESIS_TOL, compare_methods, discover_cofactor,
                      multipliers_cofactor, transversality_profile,
                      variational_report, verify_invariance, verify_orbit)
from .ode import DEFAULT_CONFIG
from .sysfile import SystemFileError, load_system_file
from .systems import (BUILTINS, DEFAULT_PARAMS, SteklovParams, builtin,
                      example1_expected_multipliers, mathieu_stability_chart,
                      steklov_conservation_suite, steklov_monodromy_analysis)

EXIT_OK, EXIT_USAGE, EXIT_FAILED = 0, 1, 2
REPORT_SCHEMA = "floquetkit.report/1"
INCONCLUSIVE = "inconclusive (non-hyperbolic pair on unit circle)"


class UsageError(Exception):
    """Bad flags or inputs detected after argparse has run."""


# -- JSON with 17 significant digits -------------------------------------

def _fmt_float(x):
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return json.dumps(str(x))
    return format(x, ".17g")


def _encode(obj):
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating, Fraction)):
        return _fmt_float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return _encode([obj.real, obj.imag])
    return json.dumps(str(obj))


def dumps_report(report):
    """Serialize a report; floats carry 17 significant digits so that
    ``json.loads`` recovers them bit for bit."""
    return _encode(report) + "\n"


def _write_json(path, report):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_report(report))


def _pairs(values):
    return [[float(z.real), float(z.imag)] for z in values]


def _g(x):
    return format(float(x), ".10g")


def _fmt_complex(z):
    z = complex(z)
    if z.imag == 0:
        return _g(z.real)
    sign = "+" if z.imag >= 0 else "-"
    return f"{_g(z.real)}{sign}{_g(abs(z.imag))}i"


# -- loading -------------------------------------------------------------

def _parse_param_flags(items):
    out = {}
    for item in items or []:
        key, eq, value = item.partition("=")
        if not eq or not key.strip() or not value.strip():
            raise UsageError(f"--param expects name=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


class _Target:
    """A loaded system plus everything the subcommands need."""

    def __init__(self, name, system, orbit, manifolds, params, digest, definition=None):
        self.name = name
        self.system = system
        self.orbit = orbit
        self.manifolds = manifolds
        self.params = params
        self.digest = digest
        self.definition = definition


def _builtin_digest(name, params):
    text = name + "\n" + "\n".join(f"{k}={v}" for k, v in sorted(params.items()))
    return hashlib.sha256(text.encode()).hexdigest()


def _load_target(spec, param_flags, discover_degree=None, need_manifolds=True):
    overrides = _parse_param_flags(param_flags)
    if spec in BUILTINS:
        sys_, orbit, man = builtin(spec, overrides)
        params = dict(DEFAULT_PARAMS[spec])
        for key, value in overrides.items():
            key = {"k": "k_param"}.get(key, key) if spec == "example1" else key
            params[key] = value
        shown = {k: str(v) for k, v in params.items()}
        return _Target(spec, sys_, orbit, man, shown, _builtin_digest(spec, shown))
    if not os.path.exists(spec):
        raise UsageError(f"{spec!r} is neither a builtin ({', '.join(sorted(BUILTINS))}) "
                         "nor an existing file")
    d = load_system_file(spec, overrides)
    if d.fourier is None:
        raise UsageError(f"{spec}: an 'orbit' section is required")
    man = None
    if d.manifolds is not None:
        if d.cofactor is None:
            if discover_degree is None:
                if need_manifolds:
                    raise UsageError(f"{spec}: 'manifolds' given without 'cofactor'; "
                                     "pass --discover-degree d to search for one")
            else:
                cof = discover_cofactor(d.system(), d.manifolds, discover_degree)
                man = d.manifold_set(cof)
        else:
            man = d.manifold_set()
    elif need_manifolds:
        raise UsageError(f"{spec}: a 'manifolds' section is required for the cofactor method")
    shown = {k: str(v) for k, v in d.params.items()}
    return _Target(d.name, d.system(), d.orbit(), man, shown, d.digest(), d)


def _config(args):
    if args.rtol is None:
        return DEFAULT_CONFIG
    if not args.rtol > 0:
        raise UsageError("--rtol must be positive")
    return DEFAULT_CONFIG.with_rtol(args.rtol)


# -- analyze -------------------------------------------------------------

def _method_block(rep):
    return {
        "multipliers": _pairs(rep.multipliers),
        "moduli": [float(m) for m in rep.moduli],
        "verdict": str(rep.verdict),
        "note": rep.note,
    }


def cmd_analyze(args, out):
    t_start = time.perf_counter()
    cfg = _config(args)
    methods = ["cofactor", "variational"] if args.method == "both" else [args.method]
    target = _load_target(args.system, args.param, args.discover_degree,
                          need_manifolds="cofactor" in methods)
    sys_, orbit, man = target.system, target.orbit, target.manifolds
    results, timings, diagnostics = {}, {}, {}

    if "cofactor" in methods:
        t0 = time.perf_counter()
        rep = multipliers_cofactor(sys_, man, orbit, cfg, samples=args.samples)
        timings["cofactor_s"] = time.perf_counter() - t0
        results["cofactor"] = _method_block(rep)
        diagnostics.update({k: rep.diagnostics[k] for k in
                            ("orbit_residual", "invariance_symbolic", "invariance_residual",
                             "min_transversality")})
        diagnostics["liouville_defect_cofactor"] = rep.diagnostics["liouville_defect"]
    if "variational" in methods:
        t0 = time.perf_counter()
        rep = variational_report(sys_, orbit, cfg, samples=args.samples)
        timings["variational_s"] = time.perf_counter() - t0
        results["variational"] = _method_block(rep)
        diagnostics.setdefault("orbit_residual", rep.diagnostics["orbit_residual"])
        diagnostics["liouville_defect_variational"] = rep.diagnostics["liouville_defect"]
    comparison = None
    if len(methods) == 2:
        t0 = time.perf_counter()
        cmp_ = compare_methods(sys_, man, orbit, cfg, samples=args.samples)
        timings["comparison_s"] = time.perf_counter() - t0
        comparison = {
            "trivial_multiplier": _pairs([cmp_.trivial])[0],
            "max_distance": cmp_.max_distance,
            "max_relative_distance": cmp_.max_relative_distance,
        }
    verdict = results[methods[0]]["verdict"]
    timings["total_s"] = time.perf_counter() - t_start

    report = {
        "schema": REPORT_SCHEMA,
        "command": "analyze",
        "system": {"name": target.name, "hash": target.digest,
                   "dimension": sys_.n, "params": target.params},
        "methods": methods,
        "results": results,
        "verdict": verdict,
        "diagnostics": diagnostics,
        "integrator": {"method": "dopri5", "rtol": cfg.rtol, "atol": cfg.atol},
        "samples": args.samples,
        "timings": timings,
    }
    if comparison is not None:
        report["comparison"] = comparison
    if target.name == "example1" and target.definition is None:
        vals, branch = example1_expected_multipliers(
            Fraction(target.params["s"]), Fraction(target.params["k_param"]))
        report["expected"] = {"branch": branch, "multipliers": sorted(vals, reverse=True)}

    print(f"system: {target.name} (dimension {sys_.n})"
          + (f"  params: {', '.join(f'{k}={v}' for k, v in target.params.items())}"
             if target.params else ""), file=out)
    for m in methods:
        r = results[m]
        print(f"[{m}]", file=out)
        print("  multipliers: " + ", ".join(_fmt_complex(complex(*z)) for z in r["multipliers"]),
              file=out)
        print("  moduli:      " + ", ".join(_g(x) for x in r["moduli"]), file=out)
        print(f"  verdict:     {r['verdict']}", file=out)
        if r["note"]:
            print(f"  note:        {r['note']}", file=out)
    if "expected" in report:
        e = report["expected"]
        print(f"closed form ({e['branch']} branch): "
              + ", ".join(_g(x) for x in e["multipliers"]), file=out)
    if comparison is not None:
        print(f"cross-method: max distance {_g(comparison['max_distance'])}, "
              f"max relative distance {_g(comparison['max_relative_distance'])}, "
              f"trivial multiplier {_fmt_complex(complex(*comparison['trivial_multiplier']))}",
              file=out)
    print("diagnostics: " + ", ".join(f"{k}={v if isinstance(v, bool) else _g(v)}"
                                      for k, v in diagnostics.items()), file=out)
    print(f"integrator: rtol={_g(cfg.rtol)} atol={_g(cfg.atol)} samples={args.samples}", file=out)
    print(f"verdict: {verdict}", file=out)
    if args.json:
        _write_json(args.json, report)
    return EXIT_OK


# -- verify --------------------------------------------------------------

def cmd_verify(args, out):
    target = _load_target(args.system, args.param, args.discover_degree)
    sys_, orbit, man = target.system, target.orbit, target.manifolds
    tol = HYPOTHESIS_TOL
    orbit_res = verify_orbit(sys_, orbit, args.samples)
    inv = verify_invariance(sys_, man, orbit, args.samples)
    min_det, dets = transversality_profile(sys_, man, orbit, args.samples)
    checks = {
        "orbit": orbit_res <= tol,
        "invariance": inv.numeric_residual <= tol and inv.symbolic_ok is not False,
        "transversality": min_det >= tol,
    }
    symbolic = {True: "exact zero", False: "NONZERO", None: "n/a"}[inv.symbolic_ok]
    print(f"system: {target.name} (dimension {sys_.n})", file=out)
    print(f"orbit residual:       {_g(orbit_res)}  [{'ok' if checks['orbit'] else 'FAIL'}]",
          file=out)
    print(f"invariance residual:  {_g(inv.numeric_residual)} (symbolic: {symbolic})  "
          f"[{'ok' if checks['invariance'] else 'FAIL'}]", file=out)
    print(f"transversality det:   min |det| {_g(min_det)}, range [{_g(np.min(dets))}, "
          f"{_g(np.max(dets))}]  [{'ok' if checks['transversality'] else 'FAIL'}]", file=out)
    failed = [k for k, ok in checks.items() if not ok]
    print("result: " + ("all checks pass" if not failed else "failed: " + ", ".join(failed)),
          file=out)
    if args.json:
        _write_json(args.json, {
            "schema": REPORT_SCHEMA, "command": "verify",
            "system": {"name": target.name, "hash": target.digest,
                       "dimension": sys_.n, "params": target.params},
            "diagnostics": {"orbit_residual": orbit_res,
                            "invariance_symbolic": inv.symbolic_ok,
                            "invariance_residual": inv.numeric_residual,
                            "min_transversality": min_det,
                            "transversality_range": [float(np.min(dets)), float(np.max(dets))]},
            "threshold": tol, "samples": args.samples, "passed": not failed,
        })
    return EXIT_OK if not failed else EXIT_FAILED


# -- chart ---------------------------------------------------------------

def _range(text, flag):
    m = re.fullmatch(r"\s*([^:]+):([^:]+)\s*", text or "")
    try:
        lo, hi = float(m.group(1)), float(m.group(2))
    except (AttributeError, ValueError):
        raise UsageError(f"{flag} expects lo:hi, got {text!r}") from None
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise UsageError(f"{flag} range must satisfy lo < hi, got {text!r}")
    return lo, hi


def cmd_chart(args, out):
    if args.system not in ("mathieu", "example2"):
        raise UsageError("chart supports only the 'mathieu' system")
    a_lo, a_hi = _range(args.a, "--a")
    q_lo, q_hi = _range(args.q, "--q")
    if args.grid < 2:
        raise UsageError("--grid must be at least 2")
    if args.workers < 1:
        raise UsageError("--workers must be at least 1")
    cfg = _config(args)
    t0 = time.perf_counter()
    cells, worst = mathieu_stability_chart(a_lo, a_hi, q_lo, q_hi, args.grid, cfg,
                                           workers=args.workers)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("a,q,trace,verdict\n")
        for c in cells:
            fh.write(f"{c.a!r},{c.q!r},{c.trace!r},{c.verdict}\n")
    counts = {v: sum(1 for c in cells if c.verdict == v) for v in ("stable", "unstable", "boundary")}
    print(f"wrote {len(cells)} cells to {args.out} in {time.perf_counter() - t0:.1f} s", file=out)
    print("verdicts: " + ", ".join(f"{k}={v}" for k, v in counts.items()), file=out)
    print(f"cross-check against direct Mathieu integration: max trace difference {_g(worst)}",
          file=out)
    return EXIT_OK


# -- steklov -------------------------------------------------------------

def cmd_steklov(args, out):
    p = SteklovParams(a=args.a, b=args.b, c=args.c, W=args.W, l=args.l).check()
    cfg = _config(args)
    t0 = time.perf_counter()
    an = steklov_monodromy_analysis(p, cfg)
    t_mono = time.perf_counter() - t0
    v0 = np.random.default_rng(args.seed).standard_normal(5)
    drifts = steklov_conservation_suite(p, v0, cfg, samples=args.samples)
    d = an.derived
    verdict = "unstable" if an.verdict == "unstable" else INCONCLUSIVE
    pair = an.nontrivial_pair
    print(f"parameters: a={_g(p.a)} b={_g(p.b)} c={_g(p.c)} W={_g(p.W)} l={_g(p.l)}", file=out)
    print(f"period T:            {_g(d.period)}", file=out)
    print(f"modulus k:           {_g(d.modulus)}", file=out)
    print(f"B:                   {_g(an.B)}", file=out)
    print(f"C:                   {_g(an.C)}", file=out)
    print(f"unit eigenvalues:    {an.unit_eigenvalue_count}", file=out)
    print(f"remaining pair:      {', '.join(_fmt_complex(z) for z in pair)}", file=out)
    print(f"structure residual:  {_g(an.structure_residual)}", file=out)
    print("conservation drifts: v1 {}, h1 {}, h2 {} (seed {}, {} samples)".format(
        *(_g(x) for x in drifts), args.seed, args.samples), file=out)
    print(f"verdict: {verdict}", file=out)
    if args.json:
        _write_json(args.json, {
            "schema": REPORT_SCHEMA, "command": "steklov",
            "system": {"name": "steklov",
                       "params": {k: getattr(p, k) for k in ("a", "b", "c", "W", "l")}},
            "period": d.period, "modulus": d.modulus, "rho1": d.rho1, "rho2": d.rho2,
            "B": an.B, "C": an.C,
            "unit_eigenvalue_count": an.unit_eigenvalue_count,
            "eigenvalues": _pairs(an.eigenvalues),
            "structure_residual": an.structure_residual,
            "conservation": {"v1": drifts[0], "h1": drifts[1], "h2": drifts[2],
                             "seed": args.seed, "samples": args.samples},
            "verdict": verdict,
            "integrator": {"method": "dopri5", "rtol": cfg.rtol, "atol": cfg.atol},
            "timings": {"monodromy_s": t_mono},
        })
    return EXIT_OK


# -- entry point ---------------------------------------------------------

def _fix_negative_ranges(argv):
    """Let ``--q -1:1`` through argparse, which would read ``-1:1`` as a flag."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in ("--a", "--q"):
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-") and re.match(r"-[\d.]", nxt):
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
        else:
            out.append(tok)
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser():
    parser = _Parser(prog="floquetkit", description="Floquet multipliers of periodic orbits "
                     "via variational equations and invariant-hypersurface cofactors.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, json_flag=True):
        p.add_argument("system", help=f"builtin ({', '.join(sorted(BUILTINS))}) or system file")
        p.add_argument("--param", action="append", metavar="NAME=VALUE",
                       help="override a parameter (repeatable)")
        p.add_argument("--samples", type=int, default=64, help="orbit samples for checks")
        p.add_argument("--discover-degree", type=int, default=None, metavar="D",
                       help="search for a cofactor of degree <= D when the file has none")
        if json_flag:
            p.add_argument("--json", metavar="PATH", help="write a JSON report")

    p = sub.add_parser("analyze", help="compute Floquet multipliers")
    common(p)
    p.add_argument("--method", choices=["cofactor", "variational", "both"], default="both")
    p.add_argument("--rtol", type=float, default=None, help="relative tolerance (atol = rtol/100)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("verify", help="check orbit, invariance and transversality")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("chart", help="Mathieu stability chart as CSV")
    p.add_argument("system", help="mathieu")
    p.add_argument("--a", default="0:4", help="a range lo:hi")
    p.add_argument("--q", default="-1:1", help="q range lo:hi")
    p.add_argument("--grid", type=int, default=81, help="points per axis")
    p.add_argument("--out", default="chart.csv")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--rtol", type=float, default=None)
    p.set_defaults(func=cmd_chart)

    p = sub.add_parser("steklov", help="Steklov orbit monodromy analysis")
    for name, default in (("a", 2.5), ("b", 3.0), ("c", 1.0), ("W", 1.0), ("l", 1.0)):
        p.add_argument(f"--{name}", type=float, default=default)
    p.add_argument("--json", metavar="PATH")
    p.add_argument("--rtol", type=float, default=None)
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--seed", type=int, default=0, help="seed for the conservation start vector")
    p.set_defaults(func=cmd_steklov)
    return parser


def main(argv=None, out=None):
    out = out or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_fix_negative_ranges(argv))
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if getattr(args, "samples", 64) < 16:
        print("error: --samples must be at least 16", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args, out)
    except (UsageError, SystemFileError, PolySyntaxError, UnknownVariable,
            InvalidParameters, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HypothesisViolated as exc:
        print(f"hypothesis violated ({exc.check}): {exc}", file=sys.stderr)
        return EXIT_FAILED
    except (NoSolution, StructureViolation, IntegrationError, FloquetError) as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main_exit():
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
