"""Command-line front end and the JSON/CSV record format.

Exit codes: 0 all checks passed, 1 a check failed, 2 usage or parameter error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from importlib import resources

import mpmath

from . import families as fam
from .darboux import build_chain
from .diffop import DiffOp, sl_form
from .exactalg import PowerFactor, Poly, QSqrt, QuasiRational, RatFun, to_mp
from .flags import canonical_flag, d2_space
from .verify import (OrthogonalityReport, QuadratureConfig, QuadratureError, boundary_vanishing,
                     orthogonality_report)

SCHEMA = "xops/1"
DIGITS_ENV = "XOPS_DIGITS"
INF = float("inf")


class UsageError(Exception):
    pass


def default_digits() -> int:
    raw = os.environ.get(DIGITS_ENV)
    if raw is None:
        return 50
    if not raw.isdigit() or int(raw) < 20:
        raise UsageError(f"{DIGITS_ENV} must be an integer >= 20, got {raw!r}")
    return int(raw)


# ---------------------------------------------------------------- scalars

_RAT = re.compile(r"[+-]?\d+(/\d+)?")
_QS = re.compile(r"([+-]?\d+(?:/\d+)?)([+-]\d+(?:/\d+)?)\*sqrt\((-?\d+)\)")


def parse_exact(text: str) -> Fraction:
    """An integer or p/q; decimals and exponents are rejected."""
    t = text.strip()
    if not _RAT.fullmatch(t):
        raise UsageError(f"not an exact rational: {text!r} (write p/q, floats are not accepted)")
    if t.endswith("/0"):
        raise UsageError(f"zero denominator in {text!r}")
    return Fraction(t)


def scalar_str(v) -> str:
    if isinstance(v, QSqrt):
        b = Fraction(v.b)
        sign = "-" if b < 0 else "+"
        return f"{_frac_str(v.a)}{sign}{_frac_str(abs(b))}*sqrt({v.d})"
    return _frac_str(Fraction(v))


def _frac_str(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def parse_scalar(text: str):
    m = _QS.fullmatch(text)
    if m:
        return QSqrt(Fraction(m.group(1)), Fraction(m.group(2)), int(m.group(3)))
    return parse_exact(text)


def _end_str(e) -> str:
    if e == INF:
        return "inf"
    if e == -INF:
        return "-inf"
    return scalar_str(e)


def _parse_end(s: str):
    return {"inf": INF, "-inf": -INF}.get(s) if s in ("inf", "-inf") else parse_scalar(s)


# ------------------------------------------------------------ serializers

def poly_out(p: Poly) -> list:
    return [scalar_str(c) for c in p.coeffs]


def poly_in(a: list) -> Poly:
    return Poly(parse_scalar(c) for c in a)


def ratfun_out(r: RatFun) -> dict:
    return {"num": poly_out(r.num), "den": poly_out(r.den)}


def ratfun_in(d: dict) -> RatFun:
    return RatFun(poly_in(d["num"]), poly_in(d["den"]))


def quasi_out(q: QuasiRational) -> dict:
    return {"prefactor": ratfun_out(q.prefactor), "exp": poly_out(q.exp_part),
            "powers": [{"root": scalar_str(f.root), "sign": f.sign, "exponent": scalar_str(f.exponent)}
                       for f in q.powers]}


def quasi_in(d: dict) -> QuasiRational:
    powers = [PowerFactor(parse_scalar(f["root"]), int(f["sign"]), parse_scalar(f["exponent"]))
              for f in d["powers"]]
    return QuasiRational(ratfun_in(d["prefactor"]), poly_in(d["exp"]), powers)


def op_out(T: DiffOp) -> dict:
    return {"coeffs": [ratfun_out(c) for c in T.coeffs]}


def op_in(d: dict) -> DiffOp:
    return DiffOp(ratfun_in(c) for c in d["coeffs"])


def _params_out(params: dict, names=None) -> dict:
    keys = names if names is not None else sorted(params)
    return {k: scalar_str(params[k]) for k in keys}


def _mpf_out(v) -> str:
    v = mpmath.mpf(v)
    return mpmath.libmp.to_str(v._mpf_, mpmath.libmp.repr_dps(mpmath.mp.prec))


def family_record(spec: fam.FamilySpec) -> dict:
    return {
        "schema": SCHEMA, "type": "family", "id": spec.id, "base": spec.base, "kind": spec.kind,
        "flag_class": spec.flag_class, "steps": spec.steps, "codimension": spec.codimension,
        "gaps": list(spec.gaps), "param_names": list(spec.param_names), "region": spec.region,
        "interval": [_end_str(e) for e in spec.interval],
        "samples": [_params_out(s, spec.param_names) for s in spec.samples],
    }


def system_record(sys_: fam.GeneratedSystem) -> dict:
    names = fam.get(sys_.family).param_names
    return {
        "schema": SCHEMA, "type": "generated_system", "family": sys_.family,
        "params": _params_out(sys_.params, names),
        "interval": [_end_str(e) for e in sys_.interval],
        "operator": op_out(sys_.operator), "weight": quasi_out(sys_.weight),
        "items": [{"n": n, "degree": y.degree, "eigenvalue": scalar_str(lam), "poly": poly_out(y)}
                  for n, y, lam in sys_.items],
    }


def report_record(rep: OrthogonalityReport) -> dict:
    values = [v for row in rep.gram for v in row] + [rep.max_off_diagonal] + list(rep.norms) + list(rep.moments)
    # the widest mantissa decides the precision needed for an exact round trip
    bits = max([mpmath.mp.prec] + [v._mpf_[3] for v in values])
    with mpmath.workprec(bits):
        return {
            "schema": SCHEMA, "type": "orthogonality_report", "family": rep.family,
            "params": _params_out(rep.params), "precision_bits": bits,
            "degrees": list(rep.degrees),
            "gram": [[_mpf_out(v) for v in row] for row in rep.gram],
            "max_off_diagonal": _mpf_out(rep.max_off_diagonal),
            "norms": [_mpf_out(v) for v in rep.norms], "moments": [_mpf_out(v) for v in rep.moments],
        }


def serialize(obj) -> dict:
    if isinstance(obj, fam.FamilySpec):
        return family_record(obj)
    if isinstance(obj, fam.GeneratedSystem):
        return system_record(obj)
    if isinstance(obj, OrthogonalityReport):
        return report_record(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def parse_record(rec: dict):
    """Inverse of serialize."""
    if rec.get("schema") != SCHEMA:
        raise ValueError(f"unsupported schema {rec.get('schema')!r}")
    kind = rec["type"]
    if kind == "family":
        spec = fam.get(rec["id"])
        if family_record(spec) != rec:
            raise ValueError(f"record for {rec['id']} does not match the registry")
        return spec
    if kind == "generated_system":
        items = [(it["n"], poly_in(it["poly"]), parse_scalar(it["eigenvalue"])) for it in rec["items"]]
        params = {k: parse_scalar(v) for k, v in rec["params"].items()}
        return fam.GeneratedSystem(rec["family"], params, items, op_in(rec["operator"]),
                                   quasi_in(rec["weight"]), tuple(_parse_end(e) for e in rec["interval"]))
    if kind == "orthogonality_report":
        with mpmath.workprec(rec["precision_bits"]):
            f = mpmath.mpf
            return OrthogonalityReport(
                rec["family"], {k: parse_scalar(v) for k, v in rec["params"].items()},
                list(rec["degrees"]), [[f(v) for v in row] for row in rec["gram"]],
                f(rec["max_off_diagonal"]), [f(v) for v in rec["norms"]], [f(v) for v in rec["moments"]])
    raise ValueError(f"unknown record type {kind!r}")


def dumps(rec) -> str:
    return json.dumps(rec, indent=2, sort_keys=False) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# ------------------------------------------------------------ parameters

def _collect_params(args) -> dict:
    out = {}
    for item in args.param or []:
        if "=" not in item:
            raise UsageError(f"--param expects name=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = parse_exact(v)
    for name in ("alpha", "beta", "a", "z1"):
        v = getattr(args, name, None)
        if v is not None:
            out[name] = parse_exact(v)
    return out


def _spec(fid: str) -> fam.FamilySpec:
    try:
        return fam.get(fid)
    except KeyError:
        known = ", ".join(s.id for s in fam.registry())
        raise UsageError(f"unknown family {fid!r}; known: {known}") from None


def load_samples(path=None) -> dict:
    """Family id -> list of parameter dicts from a key/value sample file."""
    cp = configparser.ConfigParser(interpolation=None)
    if path is None:
        cp.read_string(resources.files("xops").joinpath("samples.ini").read_text())
    else:
        with open(path) as fh:
            cp.read_file(fh)
    out = {}
    for sec in cp.sections():
        rows = []
        for key in sorted(cp[sec], key=lambda k: (len(k), k)):
            pairs = cp[sec][key].split()
            row = {}
            for pair in pairs:
                if "=" not in pair:
                    raise UsageError(f"{sec}.{key}: expected name=value, got {pair!r}")
                k, v = pair.split("=", 1)
                row[k] = parse_exact(v)
            rows.append(row)
        out[sec] = rows
    return out


def _resolve(spec, params: dict) -> dict:
    """Parse and check parameters, mapping failures to usage errors."""
    try:
        spec.parse(params)
    except fam.InadmissibleParameters as exc:
        raise UsageError(str(exc)) from None
    adm = fam.admissible(spec, params)
    if not adm:
        diag = adm.diagnostic
        raise UsageError(diag if diag.startswith(spec.id) else f"{spec.id}: {diag}")
    return params


# ---------------------------------------------------------------- commands

def cmd_families(args, out) -> int:
    specs = fam.registry()
    if args.format == "json":
        out.write(dumps([family_record(s) for s in specs]))
        return 0
    header = ["id", "kind", "flag", "steps", "codim", "gaps", "params", "region"]
    rows = [[s.id, s.kind, s.flag_class, f"{s.steps}-step" if s.steps else "-", str(s.codimension),
             ",".join(map(str, s.gaps)) or "-", ",".join(s.param_names) or "-", s.region] for s in specs]
    if args.format == "csv":
        out.write(_csv_text(header, rows))
        return 0
    widths = [max(len(r[i]) for r in rows + [header]) for i in range(len(header))]
    for r in [header] + rows:
        out.write("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n")
    return 0


def cmd_gen(args, out) -> int:
    spec = _spec(args.family)
    params = _resolve(spec, _collect_params(args))
    system = fam.generate(spec, params, args.n_max)
    if args.format == "json":
        out.write(dumps(system_record(system)))
    else:
        rows = [[n, y.degree, scalar_str(lam), " ".join(poly_out(y))] for n, y, lam in system.items]
        out.write(_csv_text(["n", "degree", "eigenvalue", "coefficients"], rows))
    return 0


_D2_EXPECTED = {"E11_23": 2, "E2a_13": 2, "E2b_23": 2, "E2c_23": 2, "E11_13": 3, "E2a_03": 3,
                "E2a_12": 3, "E11_03": 4, "E11_12": 4, "E2a_02": 4}
_D2_MODULI = {"E11_23": (Fraction(1, 3), Fraction(5, 7)), "E11_13": (Fraction(2, 5),),
              "E2a_13": (Fraction(2, 3),), "E2b_23": (Fraction(3, 4),), "E2c_23": (Fraction(5, 2),)}


def verify_case(fid: str, params: dict, n_max: int, digits: int, numeric: bool = True) -> list:
    """(check name, passed, detail) for one family at one parameter point."""
    spec = fam.get(fid)
    res = []
    adm = fam.admissible(spec, params)
    res.append(("admissible", bool(adm), adm.diagnostic))
    if not adm:
        return res
    try:
        system = fam.generate(spec, params, n_max)
        res.append(("eigen-relations", True, f"{len(system.items)} polynomials"))
    except fam.EigenCheckFailed as exc:
        res.append(("eigen-relations", False, str(exc)))
        return res
    d = spec.data(params)
    expected = [n for n in range(n_max + 1) if n not in spec.gaps]
    ok = system.degrees() == expected
    res.append(("degrees", ok, f"gaps {list(spec.gaps)}"))
    if d.A is not None:
        bad = [n for n, _, _ in system.items if not fam.intertwine_check(spec, params, n)]
        res.append(("intertwining", not bad, f"fails at n = {bad}" if bad else "A[y_n] matches"))
    if spec.kind == "x2":
        flag = canonical_flag(spec.flag_class, _D2_MODULI.get(spec.flag_class, ()))
        dim = d2_space(flag).dimension
        want = _D2_EXPECTED[spec.flag_class]
        res.append(("D2 dimension", dim == want, f"{dim} (expected {want})"))
    if d.phis:
        chain = build_chain(spec, params)
        ok = (len(chain.steps) == spec.steps
              and all(s.fact.identities_hold() and s.dual_identity_holds() for s in chain.steps))
        res.append(("darboux chain", ok, " -> ".join(s.kind for s in chain.steps)))
    res.append(("weight = sl_form", fam.weight_matches_sl_form(spec, params), "exact"))
    res.append(("boundary vanishing", boundary_vanishing(sl_form(d.T, d.interval)), "pW -> 0"))
    if numeric:
        cfg = QuadratureConfig(decimal_digits=digits)
        with mpmath.workdps(digits):
            try:
                rep = orthogonality_report(system, cfg)
                ok = rep.passed(digits) and rep.moments[0] > 0
                res.append(("orthogonality", ok, f"max off-diagonal {mpmath.nstr(rep.max_off_diagonal, 3)}"))
            except QuadratureError as exc:
                res.append(("orthogonality", False, str(exc)))
    return res


def _verify_job(job):
    fid, params, n_max, digits, numeric = job
    return verify_case(fid, params, n_max, digits, numeric)


def _fmt_params(params: dict) -> str:
    return " ".join(f"{k}={v}" for k, v in params.items()) or "-"


def cmd_verify(args, out) -> int:
    if args.nonexistence:
        return _print_certificates(out)
    digits = args.digits or default_digits()
    jobs = []
    if args.all:
        samples = load_samples(args.samples)
        for spec in fam.registry():
            for p in samples.get(spec.id, [dict(s) for s in spec.samples]):
                jobs.append((spec.id, p, args.n_max, digits, not args.exact_only))
    else:
        if not args.family:
            raise UsageError("verify needs --family, --all or --nonexistence")
        spec = _spec(args.family)
        given = _collect_params(args)
        if given or not spec.param_names:
            todo = [_resolve(spec, given)]
        else:
            todo = [dict(s) for s in load_samples(args.samples).get(spec.id, spec.samples)]
        jobs = [(spec.id, p, args.n_max, digits, not args.exact_only) for p in todo]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_verify_job, jobs))
    else:
        results = [_verify_job(j) for j in jobs]
    first = None
    for job, res in zip(jobs, results):
        for name, ok, detail in res:
            out.write(f"{'PASS' if ok else 'FAIL'}  {job[0]}  {_fmt_params(job[1])}  {name}: {detail}\n")
            if not ok and first is None:
                first = f"{job[0]} ({_fmt_params(job[1])}): {name}: {detail}"
    if first:
        sys.stderr.write(f"first failure: {first}\n")
        return 1
    return 0


def _print_certificates(out) -> int:
    certs = fam.nonexistence_certificates()
    for c in certs:
        out.write(f"{'HOLDS' if c.holds else 'FAILS'}  {c.base} x {c.flag_class}  [{c.method}]  {c.reason}\n")
    return 0 if all(c.holds for c in certs) else 1


def _grid(args, interval) -> list:
    if args.points is not None and args.grid is not None:
        raise UsageError("give either --points or --grid")
    if args.points is not None:
        pts = [parse_exact(t) for t in args.points.split(",") if t.strip()]
    elif args.grid is not None:
        parts = args.grid.split(":")
        if len(parts) != 3:
            raise UsageError("--grid expects lo:hi:count")
        lo, hi = parse_exact(parts[0]), parse_exact(parts[1])
        if not parts[2].isdigit():
            raise UsageError("grid count must be a non-negative integer")
        k = int(parts[2])
        pts = [lo] if k == 1 else [lo + (hi - lo) * i / (k - 1) for i in range(k)]
    else:
        raise UsageError("give --points or --grid")
    a, b = interval
    for x in pts:
        if not (a <= x <= b):
            raise UsageError(f"grid point {x} lies outside the interval ({_end_str(a)}, {_end_str(b)})")
    return pts


def _weight_value(W: QuasiRational, x, interval, digits):
    """(decimal string, flag) for W at x; endpoints handled by exponent analysis."""
    if x in interval:
        order = W.order_at(x)
        if order < 0:
            return "", "endpoint-divergent"
        if order > 0:
            return "0", "endpoint"
    return mpmath.nstr(W.eval_mp(to_mp(x)), digits), "ok" if x not in interval else "endpoint"


def _sampled(args, out, with_polys: bool) -> int:
    spec = _spec(args.family)
    params = _resolve(spec, _collect_params(args))
    digits = args.digits or default_digits()
    d = spec.data(params)
    pts = _grid(args, d.interval)
    polys = fam.generate(spec, params, args.n_max).items if with_polys else []
    header = ["x", "W", "flag"] + [f"y_{n}" for n, _, _ in polys]
    rows = []
    with mpmath.workdps(digits + 10):
        for x in pts:
            w, flag = _weight_value(d.W, x, d.interval, digits)
            row = [scalar_str(x), w, flag]
            row += [mpmath.nstr(y.eval_mp(to_mp(x)), digits) for _, y, _ in polys]
            rows.append(row)
    out.write(_csv_text(header, rows))
    return 0


def cmd_weight(args, out) -> int:
    return _sampled(args, out, with_polys=False)


def cmd_plotdata(args, out) -> int:
    return _sampled(args, out, with_polys=True)


def cmd_chain(args, out) -> int:
    spec = _spec(args.family)
    params = _resolve(spec, _collect_params(args))
    try:
        chain = build_chain(spec, params)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.format == "json":
        steps = [{"kind": s.kind, "lambda0": scalar_str(s.fact.lam0), "gauge": ratfun_out(s.fact.b),
                  "phi": quasi_out(s.fact.phi), "A": op_out(s.fact.A), "B": op_out(s.fact.B),
                  "weight": quasi_out(s.W), "dual_weight": quasi_out(s.What)} for s in chain.steps]
        out.write(dumps({"schema": SCHEMA, "type": "chain", "family": spec.id,
                         "params": _params_out(params, spec.param_names), "steps": steps}))
        return 0
    out.write(f"{spec.id}  {_fmt_params(params)}  {len(chain.steps)} step(s)\n")
    for i, s in enumerate(chain.steps, 1):
        out.write(f"step {i}: {s.kind}\n")
        out.write(f"  phi     = {s.fact.phi}\n")
        out.write(f"  lambda0 = {scalar_str(s.fact.lam0)}\n")
        out.write(f"  b       = {s.fact.b}\n")
        out.write(f"  A       = {s.fact.A}\n")
        out.write(f"  B       = {s.fact.B}\n")
        out.write(f"  T = BA + lambda0, T^ = AB + lambda0: {s.fact.identities_hold()}\n")
        out.write(f"  W^/b^ = W/b: {s.dual_identity_holds()}\n")
    offset = fam.chain_operator_offset(spec, params)
    out.write(f"direct operator - chain operator = {scalar_str(offset) if offset is not None else 'not constant'}\n")
    return 0


# ------------------------------------------------------------------- parser

def _add_params(p):
    p.add_argument("--family", required=True)
    p.add_argument("--param", action="append", metavar="NAME=P/Q", help="family parameter (repeatable)")
    for name in ("alpha", "beta", "a", "z1"):
        p.add_argument(f"--{name}", metavar="P/Q")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="xops", description="Exceptional orthogonal polynomial toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("families", help="list the registry")
    p.add_argument("--format", choices=("table", "json", "csv"), default="table")
    p.set_defaults(func=cmd_families)

    p = sub.add_parser("gen", help="generate a polynomial table")
    _add_params(p)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("verify", help="run the verification suite")
    p.add_argument("--family")
    p.add_argument("--param", action="append", metavar="NAME=P/Q")
    for name in ("alpha", "beta", "a", "z1"):
        p.add_argument(f"--{name}", metavar="P/Q")
    p.add_argument("--all", action="store_true", help="every family at every configured sample")
    p.add_argument("--nonexistence", action="store_true", help="print non-existence certificates")
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--digits", type=int, default=None)
    p.add_argument("--samples", metavar="FILE", help="sample-set file (default: the shipped one)")
    p.add_argument("--exact-only", action="store_true", help="skip the numeric orthogonality check")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_verify)

    for name, func, helptext in (("weight", cmd_weight, "sample the weight on a grid"),
                                 ("plotdata", cmd_plotdata, "sample weight and polynomials on a grid")):
        p = sub.add_parser(name, help=helptext)
        _add_params(p)
        p.add_argument("--points", help="comma-separated exact points")
        p.add_argument("--grid", help="lo:hi:count with exact lo, hi")
        p.add_argument("--digits", type=int, default=None)
        p.add_argument("--n-max", type=int, default=5)
        p.set_defaults(func=func)

    p = sub.add_parser("chain", help="print the Darboux chain of a family")
    _add_params(p)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_chain)
    return ap


_NEG_VALUE = re.compile(r"-\d[\d/:,+-]*")


def _join_negative_values(argv):
    # argparse takes "-1/2" or "-1:1:5" for an option; glue it to its flag
    out = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and _NEG_VALUE.fullmatch(tok):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_negative_values(argv))
    try:
        if getattr(args, "n_max", 0) is not None and getattr(args, "n_max", 0) < 0:
            raise UsageError("--n-max must be non-negative")
        if getattr(args, "digits", None) is not None and args.digits < 20:
            raise UsageError("--digits must be at least 20")
        return args.func(args, out)
    except UsageError as exc:
        sys.stderr.write(f"xops: error: {exc}\n")
        return 2
    except fam.InadmissibleParameters as exc:
        sys.stderr.write(f"xops: error: {exc}\n")
        return 2


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
