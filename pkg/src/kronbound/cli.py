"""``kronbound`` command line.

Exit codes: 0 pass, 1 assertion failure, 2 usage or parse error, 3 oracle
budget exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Any, Callable

import numpy as np

from . import __version__
from .algorithms import (AlgorithmError, NoBound, SymContractionSpec, moment_matrix, nest, strassen,
                         sym_nested_sigma, sym_sigma, toom)
from .commbounds import (LOG2_3, LOG2_7, LOG3_2, LOG3_7, CommBoundError, ExpansionBound, ProblemShape,
                         conv_exponent, conv_shape, parallel_bound, sequential_bound, strassen_shape)
from .compose import ComposeError, compose, compose_lshaped, compose_main, compose_nested
from .grid import GridContext, GridError
from .linalg import MatrixError, RationalMatrix, kron, load_matrix
from .oracle import BudgetExceeded, OracleError, certify_lower_bound, rank_expansion_exhaustive
from .sigma import ClampedLinear, Logarithmic, Monomial, PiecewiseClosedForm, SigmaError, check_shape, from_spec
from .stair import LShape, StairError, expansion_size, phi_L, phi_R

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3

# tolerances for reproduced values
TOL_PRINTED = 1e-2  # two-significant-figure values
TOL_FORMULA = 1e-9


class UsageError(Exception):
    pass


class Outcome(Exception):
    """Carries a report and an exit status out of a command."""

    def __init__(self, report: dict, status: int):
        super().__init__(status)
        self.report = report
        self.status = status


# output

def _clean(v: Any) -> Any:
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return None
        return v
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return _clean(float(v))
    return v


def _csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        keys = list(dict.fromkeys(k for r in rows for k in r))
        w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n", restval="")
        w.writeheader()
        for r in rows:
            w.writerow({k: json.dumps(_clean(v)) if isinstance(v, (dict, list)) else _clean(v) for k, v in r.items()})
    return buf.getvalue()


def emit(report: dict, fmt: str, out=None):
    out = out or sys.stdout
    if fmt == "csv":
        rows = report.get("rows")
        if rows is None:
            rows = [{"key": k, "value": v} for k, v in report.items()]
        out.write(_csv(rows))
    else:
        out.write(json.dumps(_clean(report), indent=2, sort_keys=False) + "\n")


# input parsing

def _read_json(arg: str) -> Any:
    text = arg
    if not arg.lstrip().startswith(("{", "[")):
        try:
            with open(arg) as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {arg}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"bad JSON in {arg}: {exc}") from exc


def load_sigma(arg: str):
    return from_spec(_read_json(arg))


def _matrix(arg: str) -> RationalMatrix:
    try:
        return load_matrix(arg)
    except OSError as exc:
        raise UsageError(f"cannot read {arg}: {exc}") from exc


def _num_list(text: str, typ: Callable = float) -> list:
    try:
        return [typ(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad number list {text!r}") from exc


def _k_values(args) -> list[float]:
    if args.k_range:
        try:
            lo, hi = (int(x) for x in args.k_range.split(":"))
        except ValueError as exc:
            raise UsageError(f"bad --k-range {args.k_range!r}; use LO:HI") from exc
        return list(range(lo, hi + 1))
    if args.k:
        return _num_list(args.k)
    raise UsageError("give --k or --k-range")


def _budget(args) -> int | None:
    return args.budget


# commands

def cmd_gen(args) -> dict:
    if args.alg == "strassen":
        alg = strassen(corrected=args.corrected)
    else:
        nodes = _num_list(args.nodes, str) if args.nodes else None
        alg = toom(args.k, nodes)
    alg = nest(alg, args.tau)
    if args.matrix:
        m = getattr(alg, args.matrix)
        if args.format == "csv":
            raise Outcome({"_raw": m.to_csv()}, EXIT_OK)
        return m.to_json_obj()
    if args.format == "csv":
        raise UsageError("csv output needs --matrix a|b|c")
    return alg.to_json_obj()


def _table_report(table, m) -> dict:
    vals = table.as_list()
    kr = 0
    while kr < len(vals) and vals[kr] == kr + 1:
        kr += 1
    known = kr < len(vals) or len(vals) == m.cols
    return {"cols": m.cols, "values": vals, "kruskal_rank": kr if known else None,
            "rows": [{"k": k, "rank_expansion": v} for k, v in enumerate(vals, start=1)]}


def cmd_rank_expansion(args) -> dict:
    m = _matrix(args.matrix)
    factors = (_matrix(args.factors[0]), _matrix(args.factors[1])) if args.factors else None
    try:
        table = rank_expansion_exhaustive(m, args.k_max, _budget(args), factors=factors)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return _table_report(table, m)


def cmd_certify(args) -> dict:
    if not args.sigma:
        raise UsageError("certify needs at least one --sigma")
    mats = [_matrix(p) for p in args.matrices]
    sigmas = [load_sigma(s) for s in args.sigma]
    if len(sigmas) == 1:
        sigmas *= len(mats)
    if len(sigmas) != len(mats):
        raise UsageError(f"{len(mats)} matrices but {len(sigmas)} sigma specs")
    certs = []
    for path, m, s in zip(args.matrices, mats, sigmas):
        c = certify_lower_bound(s, m, _budget(args))
        certs.append({"matrix": path, **c.to_json_obj()})
    ok = all(c["valid"] for c in certs)
    report: dict = {"valid": ok, "certificates": certs}
    if args.compose != "none":
        if len(mats) != 2:
            raise UsageError("--compose needs exactly two matrices")
        if not ok:
            raise UsageError("--compose needs certified operand sigmas")
        report["compose"] = soundness(mats[0], mats[1], sigmas[0], sigmas[1], args.compose, _budget(args))
        ok = ok and report["compose"]["valid"]
        report["valid"] = ok
    if not ok:
        raise Outcome(report, EXIT_FAIL)
    return report


def soundness(a: RationalMatrix, b: RationalMatrix, sa, sb, which: str = "both", budget=None) -> dict:
    """Check composed bounds against the exact rank expansion of ``kron(a, b)``."""
    sa = sa.with_n(a.cols) if sa.n is None else sa
    sb = sb.with_n(b.cols) if sb.n is None else sb
    table = rank_expansion_exhaustive(kron(a, b), None, budget, factors=(a, b))
    methods = {"main": compose_main, "lshaped": compose_lshaped}
    names = list(methods) if which == "both" else [which]
    out = {"values": table.as_list(), "methods": {}}
    valid = True
    for name in names:
        cb = methods[name](sa, sb)
        viol = None
        for k in range(1, len(table) + 1):
            v = cb(k)
            if not v <= table[k] + 1e-9:
                viol = {"k": k, "rank_expansion": table[k], "bound": v}
                break
        out["methods"][name] = {"method": cb.method, "valid": viol is None, "first_violation": viol}
        valid &= viol is None
    out["valid"] = valid
    return out


def cmd_compose(args) -> dict:
    sigmas = [load_sigma(s) for s in args.sigma]
    ks = _k_values(args)
    try:
        cb = compose(args.method, sigmas)
    except ComposeError as exc:
        raise UsageError(str(exc)) from exc
    rows = []
    for k in ks:
        am = cb.argmin(k)
        rows.append({"k": k, "value": cb(k), "argmin": list(am) if am else None,
                     "extrapolates": cb.extrapolates(k)})
    far = [r["k"] for r in rows if r["extrapolates"]]
    if far:
        print(f"warning: minimizer leaves [d, n] at k={far}; compose --method lshaped avoids extrapolation",
              file=sys.stderr)
    res = cb.result
    return {"method": cb.method, "inputs": [i.to_json_obj() for i in cb.inputs],
            "result": res.to_spec() if not res.__class__.__name__ == "NumericSigma" else None,
            "rows": rows}


def cmd_phi(args) -> dict:
    f, g = load_sigma(args.f), load_sigma(args.g)
    if args.kind == "size":
        if not args.lshape:
            raise UsageError("phi size needs --lshape x1,y1,x2,y2")
        x1, y1, x2, y2 = _num_list(args.lshape)
        return {"kind": "size", "lshape": [x1, y1, x2, y2], "value": expansion_size(LShape(x1, y1, x2, y2), f, g)}
    if args.t is None:
        raise UsageError(f"phi {args.kind} needs --t")
    if args.kind == "R":
        caps = tuple(_num_list(args.caps)) if args.caps else None
        v = phi_R(args.t, f, g, caps)
        return {"kind": "R", "t": args.t, "caps": caps, "value": v, "ceil": math.ceil(v - 1e-12)}
    if not (args.r and args.n):
        raise UsageError("phi L needs --r rA,rB and --n nA,nB")
    ra, rb = _num_list(args.r)
    na, nb = _num_list(args.n)
    v = phi_L(args.t, f, g, ra, rb, na, nb)
    if not v:
        return {"kind": "L", "t": args.t, "value": None, "not_applicable": v.reason}
    return {"kind": "L", "t": args.t, "value": v, "ceil": math.ceil(v - 1e-12)}


def cmd_grid_demo(args) -> dict:
    from .checks import best_monomial_under, grid_checks, random_grid, random_matrix
    try:
        na, nb = (int(x) for x in args.shape.lower().split("x"))
    except ValueError as exc:
        raise UsageError(f"bad --shape {args.shape!r}; use NAxNB") from exc
    rng = np.random.default_rng(args.seed)
    rows = []
    for t in range(args.trials):
        a = random_matrix(rng, int(rng.integers(2, 4)), na)
        b = random_matrix(rng, int(rng.integers(2, 4)), nb)
        sa = best_monomial_under(rank_expansion_exhaustive(a, budget=_budget(args)))
        sb = best_monomial_under(rank_expansion_exhaustive(b, budget=_budget(args)))
        r = grid_checks(random_grid(rng, na, nb), GridContext(a, b), sa, sb)
        r = {"trial": t, "a": a.to_json_obj(), "b": b.to_json_obj(), **r}
        rows.append(r)
    ok = all(r["ok"] for r in rows)
    report = {"seed": args.seed, "shape": [na, nb], "trials": args.trials, "ok": ok,
              "rows": [{"trial": r["trial"], "rank": r["rank"], "basis_size": r["basis_size"],
                        "expanded_size": r["expanded_size"], "ok": r["ok"], "checks": r["checks"],
                        "grid": r["grid"], "step": r["step"]} for r in rows]}
    if not ok:
        raise Outcome(report, EXIT_FAIL)
    return report


def _alg_bound(args) -> tuple[ExpansionBound, ProblemShape, dict]:
    if args.alg == "strassen":
        s = Monomial(1, LOG3_2, 1, q_label="log3:2")
        return ExpansionBound(s, s, s), strassen_shape(args.n), {"n": args.n}
    if args.alg == "toom":
        s = Monomial(1, 1 / conv_exponent(args.k), 1, q_label=f"log{2 * args.k - 1}:{args.k}")
        if args.d > 1:
            s = compose_nested([s] * args.d).result
        return ExpansionBound(s, s, None), conv_shape(args.k, args.d), {"k": args.k, "d": args.d}
    if args.alg == "symtensor":
        s, t, v = _num_list(args.stv, int)
        spec = SymContractionSpec(s, t, v, args.n)
        if args.nonsym:
            sp, tp, vp = _num_list(args.nonsym, int)
            spec2 = SymContractionSpec(sp, tp, vp, args.n)
            trip = sym_nested_sigma(spec, spec2, second_nonsymmetric=True)
            w, dims = spec.omega + spec2.omega, (s + v + sp + vp, v + t + vp + tp, s + t + sp + tp)
        else:
            trip = sym_sigma(spec)
            w, dims = spec.omega, (s + v, v + t, s + t)
        n = args.n
        shape = ProblemShape(float(n) ** w, *(float(n) ** e for e in dims))
        missing = [lab for lab, x in zip("ABC", trip) if isinstance(x, NoBound)]
        eb = ExpansionBound(*(None if isinstance(x, NoBound) else x for x in trip))
        nonsym = _num_list(args.nonsym, int) if args.nonsym else None
        # fewer than three bounded operands: a partial bound, constants per the general propositions
        return eb, shape, {"stv": [s, t, v], "nonsym": nonsym, "n": n, "no_bound": missing,
                           "partial_operands": len(eb.operands()) < 3}
    # custom
    sig = [load_sigma(x) if x else None for x in (args.sigma_a, args.sigma_b, args.sigma_c)]
    if args.R is None or args.m is None:
        raise UsageError("custom needs --R and --m mA,mB,mC")
    ma, mb, mc = _num_list(args.m)
    return ExpansionBound(*sig), ProblemShape(args.R, ma, mb, mc), {}


def cmd_comm_bound(args) -> dict:
    if args.M is None and args.P is None:
        raise UsageError("give --M and/or --P")
    eb, shape, params = _alg_bound(args)
    report: dict = {"alg": args.alg, "params": params,
                    "shape": {"R": shape.R, "m_A": shape.m_a, "m_B": shape.m_b, "m_C": shape.m_c}}
    rows = []
    for M in _num_list(args.M) if args.M else []:
        r = sequential_bound(eb, shape, M, args.emax).to_json_obj()
        if args.emax == "diagonal":
            r["intermediates"]["emax_simplex"] = sequential_bound(eb, shape, M, "simplex").intermediates["emax"]
        rows.append(r)
    for P in _num_list(args.P) if args.P else []:
        rows.append(parallel_bound(eb, shape, P).to_json_obj())
    report["reports"] = rows
    if args.format == "csv":
        report = {"rows": [{"mode": r["mode"], "M": r["intermediates"].get("M"), "P": r["intermediates"].get("P"),
                            "value": r["value"]} for r in rows]}
    return report


TABLE1_POINT = {"n": 64, "M": 16, "P": 49}


def table1() -> dict:
    n, M, P = TABLE1_POINT["n"], TABLE1_POINT["M"], TABLE1_POINT["P"]
    k = 2
    e = conv_exponent(k)
    cells = [
        {"problem": "strassen", "model": "sequential", "expr": "n^{log2(7)} / M^{log2(3) - 1}",
         "value": n ** LOG2_7 / M ** (LOG2_3 - 1), "note": ""},
        {"problem": "strassen", "model": "parallel", "expr": "n^{log3(7)} / P^{log3(2)}",
         "value": n ** LOG3_7 / P ** LOG3_2,
         "note": "the published table prints M in this denominator; the parallel bound has P"},
        {"problem": f"toom{k}", "model": "sequential", "expr": "n^{log_k(2k-1)} / M^{log_k(2k-1) - 1}",
         "value": n ** e / M ** (e - 1), "note": "matches the earlier bound"},
        {"problem": f"toom{k}", "model": "parallel", "expr": "n / P^{log_{2k-1}(k)}",
         "value": n / P ** (1 / e), "note": "matches the earlier bound"},
    ]
    return {"point": dict(TABLE1_POINT), "k": k, "rows": cells}


def cmd_table1(args) -> dict:
    return table1()


def _check(name: str, got, want, tol: float | None = None, rel: bool = True) -> dict:
    if tol is None:
        ok = got == want
    elif rel:
        ok = abs(got - want) <= tol * max(abs(want), 1e-300)
    else:
        ok = abs(got - want) <= tol
    return {"name": name, "got": got, "want": want, "tol": tol, "ok": bool(ok)}


def example_a2_f() -> PiecewiseClosedForm:
    e2 = math.exp(2)
    return PiecewiseClosedForm([(3, "affine", {"m": 1}),
                                (4, "exponential", {"a": 0.5, "lam": 2, "c": 2.5}),
                                (5, "affine", {"m": e2, "c": 2.5 + 0.5 * e2})], n=5)


def examples(budget=None) -> dict:
    """Recompute the appendix examples; raises :class:`BudgetExceeded` if the oracle runs out."""
    rows = []
    # A.1
    a = moment_matrix()
    t_a = rank_expansion_exhaustive(a, budget=budget)
    rows.append(_check("A.1 rank expansion of A is min(k, 4)", t_a.as_list(), [min(k, 4) for k in range(1, 8)]))
    t_aa = rank_expansion_exhaustive(kron(a, a), 13, budget, factors=(a, a))
    rows.append(_check("A.1 rank expansion of A(x)A at 13", t_aa[13], 7))
    rows.append(_check("A.1 rank expansion of A(x)A at 5", t_aa[5], 4))
    cl = ClampedLinear(4, n=7)
    rows.append(_check("A.1 main theorem, clamped operands, k=13", compose_main(cl, cl)(13), 4.0, TOL_FORMULA))
    q = math.log(4) / math.log(7)
    pw = Monomial(1, q, 1, n=7, q_label="log7:4")
    rows.append(_check("A.1 main theorem, power operands, k=13", compose_main(pw, pw)(13), 6.2, TOL_PRINTED))
    # A.2
    f = example_a2_f()
    rows.append(_check("A.2 expansion size of L(1,1;5,5)", expansion_size(LShape(1, 1, 5, 5), f, f), 26.17,
                       TOL_PRINTED))
    rows.append(_check("A.2 ceil phi_R(9)", math.ceil(phi_R(9, f, f, (5, 5))), 25))
    rows.append(_check("A.2 boundary of f is not log-log convex", check_shape(f).boundary_log_log_convex, False))
    # A.3
    sa, sb = Monomial(1, 0.5, 1, n=100), Monomial(1, 0.25, 1, n=100)
    prev, new = compose_nested([sa, sb])(1000), compose_lshaped(sa, sb)(1000)
    rows.append(_check("A.3 power case, ceil previous bound", math.ceil(prev), 6))
    rows.append(_check("A.3 power case, new bound", new, 10.0, 1e-6, rel=False))
    lg = Logarithmic(1, 1, n=100)
    prev, new = compose_nested([lg, lg])(1000), compose_lshaped(lg, lg)(1000)
    rows.append(_check("A.3 log case, ceil previous bound", math.ceil(prev), 7))
    rows.append(_check("A.3 log case, ceil new bound", math.ceil(new), 12))
    rows.append(_check("A.3 log case, exp of previous bound", math.exp(prev), 583, 1, rel=False))
    rows.append(_check("A.3 log case, exp of new bound", math.exp(new), 63996, 10, rel=False))
    return {"ok": all(r["ok"] for r in rows), "rows": rows}


def cmd_examples(args) -> dict:
    rep = examples(_budget(args))
    if not rep["ok"]:
        raise Outcome(rep, EXIT_FAIL)
    return rep


# parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized suites")
    common.add_argument("--budget", type=int, default=None,
                        help="oracle budget (default: KRONBOUND_BUDGET or 10^7)")

    p = argparse.ArgumentParser(prog="kronbound", description="Rank-expansion and communication lower bounds.")
    p.add_argument("--version", action="version", version=f"kronbound {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="write built-in algorithm matrices")
    g.add_argument("alg", choices=("strassen", "toom"))
    g.add_argument("--k", type=int, default=2)
    g.add_argument("--nodes", help="comma-separated distinct rationals")
    g.add_argument("--tau", type=int, default=1, help="Kronecker nesting depth")
    g.add_argument("--corrected", action="store_true", help="Strassen with A[4,7] = -1")
    g.add_argument("--matrix", choices=("a", "b", "c"))
    g.set_defaults(fn=cmd_gen)

    r = sub.add_parser("rank-expansion", parents=[common], help="exact rank expansion of a matrix")
    r.add_argument("matrix")
    r.add_argument("--kmax", "--k-max", dest="k_max", type=int)
    r.add_argument("--factors", nargs=2, metavar=("A", "B"), help="Kronecker factors for witness hints")
    r.set_defaults(fn=cmd_rank_expansion)

    c = sub.add_parser("certify", parents=[common], help="check sigma <= rank expansion")
    c.add_argument("matrices", nargs="+")
    c.add_argument("--sigma", nargs="*", default=[], help="sigma spec files or inline JSON")
    c.add_argument("--compose", choices=("none", "main", "lshaped", "both"), default="none")
    c.set_defaults(fn=cmd_certify)

    m = sub.add_parser("compose", parents=[common], help="compose operand bounds")
    m.add_argument("--method", choices=("main", "nested", "lshaped"), default="main")
    m.add_argument("--sigma", nargs="+", required=True)
    m.add_argument("--k", "--at", dest="k", help="comma-separated k values")
    m.add_argument("--k-range", help="LO:HI inclusive")
    m.set_defaults(fn=cmd_compose)

    h = sub.add_parser("phi", parents=[common], help="stair maxima and L-shape expansion sizes")
    h.add_argument("kind", choices=("R", "L", "size"))
    h.add_argument("--f", required=True)
    h.add_argument("--g", required=True)
    h.add_argument("--t", type=float)
    h.add_argument("--caps", help="rA,rB")
    h.add_argument("--r", help="rA,rB")
    h.add_argument("--n", help="nA,nB")
    h.add_argument("--lshape", help="x1,y1,x2,y2")
    h.set_defaults(fn=cmd_phi)

    d = sub.add_parser("grid-demo", parents=[common], help="grid machinery on random instances")
    d.add_argument("--shape", default="3x3")
    d.add_argument("--trials", type=int, default=1)
    d.set_defaults(fn=cmd_grid_demo)

    b = sub.add_parser("comm-bound", parents=[common], help="sequential / parallel lower bounds")
    b.add_argument("--alg", choices=("strassen", "toom", "symtensor", "custom"), required=True)
    b.add_argument("--n", type=int, default=8, help="matrix size (strassen) or mode size (symtensor)")
    b.add_argument("--k", type=int, default=2, help="toom size, also the mode length")
    b.add_argument("--d", type=int, default=1, help="toom nesting depth")
    b.add_argument("--stv", default="1,1,1")
    b.add_argument("--nonsym", help="s',t',v' of a nonsymmetric second factor")
    b.add_argument("--sigma-a")
    b.add_argument("--sigma-b")
    b.add_argument("--sigma-c")
    b.add_argument("--R", type=float)
    b.add_argument("--m", help="mA,mB,mC")
    b.add_argument("--M", help="comma-separated fast-memory sizes")
    b.add_argument("--P", help="comma-separated processor counts")
    b.add_argument("--emax", choices=("diagonal", "simplex"), default="diagonal")
    b.set_defaults(fn=cmd_comm_bound)

    t = sub.add_parser("table1", parents=[common], help="communication bound cells")
    t.set_defaults(fn=cmd_table1)

    e = sub.add_parser("examples", parents=[common], help="recompute the worked examples")
    e.set_defaults(fn=cmd_examples)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        report = args.fn(args)
        status = EXIT_OK
    except Outcome as o:
        report, status = o.report, o.status
    except BudgetExceeded as exc:
        report = {"error": "budget exceeded", "budget": exc.budget, "k_reached": exc.k_reached,
                  "partial": list(exc.partial)}
        status = EXIT_BUDGET
    except (UsageError, SigmaError, MatrixError, GridError, StairError, ComposeError, CommBoundError,
            AlgorithmError) as exc:
        print(f"kronbound: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OracleError as exc:
        print(f"kronbound: oracle error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if "_raw" in report:
        sys.stdout.write(report["_raw"])
    else:
        emit(report, args.format)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
