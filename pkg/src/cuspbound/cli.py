"""Command-line entry point.

JSON goes to stdout and diagnostics to stderr.  Exit codes: 0 success,
2 invalid arguments, 3 failed verification or certification, 4 interrupted
with a checkpoint on disk.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from . import bounds, forms, hecke, scan
from .series import DEFAULT_MANTISSA, QLaurent

EXIT_OK, EXIT_USAGE, EXIT_FAILED, EXIT_INTERRUPTED = 0, 2, 3, 4

log = logging.getLogger("cuspbound")


@dataclass(frozen=True)
class RunConfig:
    mantissa: int = DEFAULT_MANTISSA
    threads: int = 1
    fmt: str = "json"
    checkpoint: str | None = None
    full_scale: bool = False
    seed: int = 0  # reserved; nothing here is random

    def __post_init__(self):
        if self.mantissa < 64:
            raise ValueError("mantissa must be at least 64 bits")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _env_int(name, default):
    v = os.environ.get(name)
    if v is None or v == "":
        return default
    try:
        return int(v)
    except ValueError:
        raise SystemExit(f"{name} must be an integer, got {v!r}")


def _series_json(f: QLaurent):
    return f.to_dict()


def _emit(obj, cfg: RunConfig, out=None):
    out = out or sys.stdout
    obj = {"mantissa": cfg.mantissa, **obj}
    out.write(json.dumps(obj, sort_keys=True, default=_json_default) + "\n")


def _json_default(x):
    if isinstance(x, (Fraction, mpmath.mpf)):
        return str(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _parse_coeffs(s):
    try:
        return [Fraction(c) for c in s.split(",") if c.strip()]
    except ValueError:
        raise ValueError(f"bad coefficient list {s!r}")


# ---------------------------------------------------------------------------
# subcommands


def cmd_forms(args, cfg):
    if args.which == "eisenstein":
        if args.weight is None:
            raise ValueError("eisenstein needs --weight")
        f = forms.eisenstein(args.weight, args.prec)
    elif args.which == "delta":
        f = forms.delta(args.prec)
    elif args.which == "j":
        f = forms.jfun(args.prec)
    else:
        f = forms.theta_e8(args.prec)
    _emit({"form": args.which, "weight": args.weight, "series": _series_json(f)}, cfg)
    return EXIT_OK


def cmd_basis(args, cfg):
    b = forms.miller_basis(args.weight, args.prec)
    _emit({"k": b.k, "ell": b.ell, "prec": args.prec, "rows": [r.to_dict() for r in b.rows]}, cfg)
    return EXIT_OK


def cmd_extremal(args, cfg):
    if args.weight is not None:
        f = forms.extremal_form(args.weight, args.prec)
        _emit({"k": args.weight, "ell": forms.dim_cusp(args.weight), "series": _series_json(f)}, cfg)
        return EXIT_OK
    if args.kmin is None or args.kmax is None:
        raise ValueError("give --weight, or --kmin and --kmax for a consistency sweep")
    recs = scan.consistency_range(args.kmin, args.kmax, cfg.threads)
    ok = all(v for r in recs for v in r.values() if isinstance(v, bool))
    _emit({"kmin": args.kmin, "kmax": args.kmax, "records": recs, "ok": ok}, cfg)
    return EXIT_OK if ok else EXIT_FAILED


def _eigen_dict(g, nmax, cfg):
    digits = max(15, int(cfg.mantissa * 0.30103) - 2)
    return {"eigenvalue": mpmath.nstr(g.eigenvalue, digits), "hecke_prime": g.hecke_prime,
            "a": [mpmath.nstr(g.a(n), digits) for n in range(1, nmax + 1)]}


def cmd_eigen(args, cfg):
    k = args.weight
    gs = hecke.eigenforms(k, cfg.mantissa, args.nmax)
    checks = []
    for g in gs:
        d = hecke.deligne_check(g, args.nmax)
        m = hecke.multiplicativity_check(g, args.nmax)
        checks.append({"deligne_ok": d["ok"], "multiplicative_ok": m["ok"],
                       "max_deligne_ratio": mpmath.nstr(d["max_ratio_all"], 15)})
    out = {"k": k, "nmax": args.nmax, "eigenforms": [_eigen_dict(g, args.nmax, cfg) for g in gs],
           "checks": checks}
    ok = all(c["deligne_ok"] and c["multiplicative_ok"] for c in checks)
    if args.coeffs:
        a = _parse_coeffs(args.coeffs)
        ell = forms.dim_cusp(k)
        if len(a) != ell:
            raise ValueError(f"need {ell} coefficients")
        basis = forms.miller_basis(k, ell + 2)
        G = QLaurent.from_dict({}, prec=ell + 2)
        for m, c in enumerate(a, 1):
            G = G + basis.rows[m].scale(c)
        dec = hecke.decompose(G, k, cfg.mantissa, gs)
        out["decomposition"] = dec.to_dict()
        ok = ok and dec.ok
    out["ok"] = ok
    _emit(out, cfg)
    return EXIT_OK if ok else EXIT_FAILED


def cmd_bound(args, cfg):
    if args.what == "theorem1":
        if args.weight is None or args.coeffs is None:
            raise ValueError("theorem1 needs --weight and --coeffs")
        rep = bounds.theorem1_B(args.weight, _parse_coeffs(args.coeffs), cfg.mantissa)
        out = rep.to_dict()
        if args.n is not None:
            with mpmath.mp.workprec(cfg.mantissa):
                out["n"] = args.n
                out["bound_at_n"] = mpmath.nstr(bounds.theorem1_bound(rep, args.n), 20)
        _emit(out, cfg)
        return EXIT_OK
    if args.what == "envelope":
        if None in (args.weight, args.m, args.n):
            raise ValueError("envelope needs --weight, --m and --n")
        v = bounds.akmn_envelope(args.weight, args.m, args.n, cfg.mantissa)
        basis = forms.miller_basis(args.weight, args.n + 1)
        exact = forms.akm_coefficient(basis, args.m, args.n)
        ok = abs(mpmath.mpf(exact.numerator) / exact.denominator) <= v
        _emit({"k": args.weight, "m": args.m, "n": args.n, "envelope": mpmath.nstr(v, 20),
               "exact": str(exact), "dominated": bool(ok)}, cfg)
        return EXIT_OK if ok else EXIT_FAILED
    res = bounds.kernel_constants_verify(mantissa=cfg.mantissa)
    _emit(res, cfg)
    return EXIT_OK if res["ok"] else EXIT_FAILED


def cmd_certify_grid(args, cfg):
    cert = bounds.grid_min_G(args.step, cfg.mantissa, target=args.target)
    _emit(cert.to_dict(), cfg)
    return EXIT_OK if cert.ok else EXIT_FAILED


def _render_table(recs):
    lines = [f"{'k':>6} {'ell':>4} {'N':>6} {'to':>6} {'status':>8}  negatives"]
    for r in recs:
        neg = ",".join(map(str, r.negative_indices)) or "-"
        lines.append(f"{r.k:>6} {r.ell:>4} {r.window_end:>6} {r.scanned_to:>6} {r.status:>8}  {neg}")
    return "\n".join(lines) + "\n"


def cmd_scan(args, cfg):
    def progress(rec):
        log.info("k=%d done: %d negative coefficient(s), %.2fs", rec.k, len(rec.negative_indices),
                 rec.wall_time or 0.0)

    try:
        recs = scan.largest_nonneg_search((args.kmin, args.kmax), args.mod12, cfg.checkpoint, cfg.threads,
                                          args.margin, cfg.full_scale, args.max_prec, args.repair, progress)
    except KeyboardInterrupt:
        if cfg.checkpoint:
            print(f"interrupted; progress kept in {cfg.checkpoint}", file=sys.stderr)
            return EXIT_INTERRUPTED
        raise
    except scan.CheckpointError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    summary = scan.summarize(recs)
    if args.emit_csv:
        with open(args.emit_csv, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "ell", "window_end", "scanned_to", "status", "negatives"])
            for r in recs:
                w.writerow([r.k, r.ell, r.window_end, r.scanned_to, r.status, len(r.negative_indices)])
    if cfg.fmt == "table":
        sys.stdout.write(_render_table(recs))
    else:
        _emit({"kmin": args.kmin, "kmax": args.kmax, "mod12": args.mod12, "full_scale": cfg.full_scale,
               "records": [r.to_dict() for r in recs], "summary": summary}, cfg)
    ok = not summary["negatives_outside_window"]
    return EXIT_OK if ok else EXIT_FAILED


def _verify_checks(cfg, step):
    e4 = forms.eisenstein(4, 4)
    d = forms.delta(5)
    j = forms.jfun(3)
    yield "e4_coefficients", e4.list(0, 4) == [1, 240, 2160, 6720]
    yield "delta_coefficients", d.list(1, 5) == [1, -24, 252, -1472]
    yield "j_coefficients", j.list(-1, 3) == [1, 744, 196884, 21493760]
    yield "theta_e8_equals_e4", forms.theta_e8(6) == forms.eisenstein(4, 6)
    yield "leech_kissing_number", forms.extremal_form(12, 3)[2] == 196560
    recs = scan.consistency_range(12, 100, cfg.threads)
    yield "extremal_consistency_k_le_100", all(v for r in recs for v in r.values() if isinstance(v, bool))
    yield "generating_kernel_k24", forms.generating_kernel_check(24, 2, 8)["ok"]
    gs = hecke.eigenforms(24, cfg.mantissa, 60)
    yield "eigen_k24_deligne", all(hecke.deligne_check(g, 60)["ok"] for g in gs)
    yield "eigen_k24_multiplicative", all(hecke.multiplicativity_check(g, 60)["ok"] for g in gs)
    for c in bounds.kernel_constants_verify(mantissa=cfg.mantissa)["checks"]:
        yield "kernel:" + c["name"], c["ok"]
    yield "grid_certificate", bounds.grid_min_G(step, cfg.mantissa).ok


def cmd_verify(args, cfg):
    results = []
    for name, ok in _verify_checks(cfg, args.step):
        results.append({"name": name, "ok": bool(ok)})
        print(f"{'PASS' if ok else 'FAIL'} {name}", file=sys.stderr)
    ok = all(r["ok"] for r in results)
    _emit({"checks": results, "ok": ok}, cfg)
    return EXIT_OK if ok else EXIT_FAILED


# ---------------------------------------------------------------------------
# parser


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mantissa", type=int, default=None,
                        help="working precision in bits (default $FORMS_MANTISSA or 256)")
    common.add_argument("--threads", type=int, default=None,
                        help="worker processes (default $FORMS_THREADS or 1)")
    common.add_argument("--format", dest="fmt", choices=("json", "table"), default="json",
                        help="output format; table is only a rendering of the JSON")
    common.add_argument("--seed", type=int, default=0, help="reserved; no computation is random")
    common.add_argument("-v", "--verbose", action="store_true", help="progress on stderr")

    p = _Parser(prog="cuspbound", description="Exact q-expansions, coefficient bounds and positivity scans "
                                                "for level one modular forms.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("forms", parents=[common], help="Eisenstein series, Delta, j or the E8 theta series")
    s.add_argument("which", choices=("eisenstein", "delta", "j", "theta-e8"))
    s.add_argument("--weight", type=int)
    s.add_argument("--prec", type=int, required=True, help="number of q-coefficients (O(q^prec))")
    s.set_defaults(func=cmd_forms)

    s = sub.add_parser("basis", parents=[common], help="Miller echelon basis F_{k,m}")
    s.add_argument("--weight", type=int, required=True)
    s.add_argument("--prec", type=int, required=True)
    s.set_defaults(func=cmd_basis)

    s = sub.add_parser("extremal", parents=[common], help="extremal form F_{k,0}, or a consistency sweep")
    s.add_argument("--weight", type=int)
    s.add_argument("--prec", type=int, default=10)
    s.add_argument("--kmin", type=int)
    s.add_argument("--kmax", type=int)
    s.set_defaults(func=cmd_extremal)

    s = sub.add_parser("eigen", parents=[common], help="normalized Hecke eigenforms and checks")
    s.add_argument("--weight", type=int, required=True)
    s.add_argument("--nmax", type=int, default=50)
    s.add_argument("--coeffs", help="comma-separated a(1..ell) of a cusp form to decompose")
    s.set_defaults(func=cmd_eigen)

    s = sub.add_parser("bound", parents=[common], help="coefficient bounds and contour constants")
    s.add_argument("what", choices=("theorem1", "envelope", "kernel-constants"))
    s.add_argument("--weight", type=int)
    s.add_argument("--coeffs", help="comma-separated a(1..ell)")
    s.add_argument("--m", type=int)
    s.add_argument("--n", type=int)
    s.set_defaults(func=cmd_bound)

    s = sub.add_parser("certify-grid", parents=[common], help="certified lower bound for G(x, u) on the grid")
    s.add_argument("--step", type=float, default=2.5e-4)
    s.add_argument("--target", type=float, default=30.0)
    s.set_defaults(func=cmd_certify_grid)

    s = sub.add_parser("scan", parents=[common], help="scan F_{k,0} for negative coefficients")
    s.add_argument("--kmin", type=int, required=True)
    s.add_argument("--kmax", type=int, required=True)
    s.add_argument("--mod12", type=int, choices=(0, 4, 8), required=True)
    s.add_argument("--checkpoint", help="JSON-lines file; completed weights are skipped on rerun")
    s.add_argument("--full-scale", action="store_true",
                   help=f"scan at least {scan.FULL_SCALE_FLOOR} coefficients per weight (long runs)")
    s.add_argument("--margin", type=int, default=200, help="coefficients scanned past the window end")
    s.add_argument("--max-prec", type=int, help="stop each weight at this many coefficients (partial record)")
    s.add_argument("--repair", action="store_true", help="drop corrupt checkpoint lines instead of failing")
    s.add_argument("--emit-csv", help="also write a per-weight CSV summary here")
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("verify", parents=[common], help="run the built-in self checks")
    s.add_argument("--step", type=float, default=2.5e-4, help="grid step for the certificate")
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(message)s")
    try:
        mantissa = args.mantissa if args.mantissa is not None else _env_int("FORMS_MANTISSA", DEFAULT_MANTISSA)
        threads = args.threads if args.threads is not None else _env_int("FORMS_THREADS", 1)
        cfg = RunConfig(mantissa=mantissa, threads=threads, fmt=args.fmt,
                        checkpoint=getattr(args, "checkpoint", None),
                        full_scale=getattr(args, "full_scale", False), seed=args.seed)
        return args.func(args, cfg)
    except SystemExit as exc:
        print(exc.code, file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"cuspbound: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def dispatch(argv) -> int:
    """Run one subcommand; returns the exit code instead of exiting."""
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
