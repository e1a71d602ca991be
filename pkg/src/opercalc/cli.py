"""opercalc command-line front end.

    opercalc <command> <scenario.json> [--order N] [--base-point Q] [--json] [--check-all]

Exit status: 0 on success, 1 on a failed check or computation error,
2 on a malformed scenario.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import boper as bo
from . import diffop as do
from . import jets as jt
from .errors import OpercalcError, ParseError
from .serialize import (
    boper_to_json,
    dumps,
    load_scenario,
    parse_boper,
    parse_int,
    parse_operator,
    parse_rational,
    parse_w_bundle,
    to_jsonable,
)

COMMANDS = ("validate", "classify", "adjoint", "decompose", "higgs", "degrees", "moduli", "extract", "build", "roundtrip")


def _residual_text(residual) -> str:
    value = to_jsonable(residual)
    return value if isinstance(value, str) else json.dumps(value)


class Context:
    def __init__(self, doc: dict, order: int | None, base_point: Fraction | None, check_all: bool):
        self.doc = doc
        self.check_all = check_all
        if base_point is None:
            base_point = parse_rational(doc.get("base_point", 0), "base_point")
        self.base_point = base_point
        self.order_override = order if order is not None else (
            parse_int(doc, "order", default=None) if "order" in doc else None
        )
        self.checks: list[dict] = []
        self.data: dict = {}

    def order(self, n: int) -> int:
        return 2 * n + 2 if self.order_override is None else self.order_override

    def check(self, name: str, passed: bool, residual="") -> None:
        self.checks.append({"name": name, "pass": bool(passed), "residual": _residual_text(residual)})

    def oper(self) -> do.WeightedDiffOp:
        if "oper" not in self.doc:
            raise ParseError("missing field oper")
        return parse_operator(self.doc["oper"])

    def genus(self) -> int:
        return parse_int(self.doc, "g", default=2)

    def deg_Q(self) -> int:
        return parse_int(self.doc, "deg_Q", default=0)

    def parts(self) -> jt.ScalarOperBundle:
        return parse_w_bundle(self.doc.get("W"), self.oper())

    def boper_data(self) -> bo.BOperData:
        if "boper" in self.doc:
            return parse_boper(self.doc["boper"], self.genus(), self.deg_Q(), self.base_point)
        return jt.build_boper_from_parts(self.parts(), self.genus(), self.deg_Q(), self.base_point)


# command handlers --------------------------------------------------------------------------

def cmd_validate(ctx: Context) -> None:
    data = ctx.boper_data()
    rep = bo.validate_boper(data, ctx.order(data.n))
    for c in rep.checks:
        ctx.check(c.name, c.passed, c.residual)
    ctx.data.update({"n": data.n, "r": data.r, "parity": data.form.parity})
    if "s_form" in rep.data:
        ctx.data["s_form"] = rep.data["s_form"]
    if "root_cause" in rep.data:
        ctx.data["root_cause"] = rep.data["root_cause"]
    if ctx.check_all and rep.passed:
        jf = jt.check_flat_jet_filtration(data, ctx.order(data.n))
        ctx.check("jet_filtration", jf.ok, "" if jf.ok else repr(jf))
        _self_adjoint_check(ctx, data)
        h = bo.higgs_from_boper(data)
        ctx.check("char_poly", h.char_poly_ok, _poly_text(h.char_poly))


def _self_adjoint_check(ctx: Context, data: bo.BOperData) -> jt.MatrixDiffOp:
    N = ctx.order(data.n)
    Dmat = jt.extract_quotient_operator(data, N)
    defect = jt.self_adjoint_defect(Dmat, jt.quotient_form(data))
    ok = jt.is_zero_op(defect)
    ctx.check("self_adjoint", ok, "0" if ok else defect)
    return Dmat


def cmd_classify(ctx: Context) -> None:
    D = ctx.oper()
    tag = do.classify(D)
    tc = do.decompose(D)
    ctx.data.update({"order": D.order, "class": str(tag), "components": list(tc.components)})
    if ctx.check_all:
        w = tc.components
        if w[0] == 1 and not w[1]:
            sa = do.adjoint(D) == D
            ctx.check("self_adjoint_criterion", sa == (tag in (do.OperClass.SP, do.OperClass.SO)))


def cmd_adjoint(ctx: Context) -> None:
    D = ctx.oper()
    adj = do.adjoint(D)
    ctx.data.update({"adjoint": adj, "transpose": do.formal_transpose(D), "self_adjoint": adj == D})
    ctx.check("involution", do.adjoint(adj) == D)
    ctx.check("symbol_preserved", do.symbol(adj) == do.symbol(D))


def cmd_decompose(ctx: Context) -> None:
    D = ctx.oper()
    tc = do.decompose(D)
    ctx.data.update({"order": D.order, "components": list(tc.components)})
    ctx.check("recompose", do.recompose(tc) == D)


def cmd_higgs(ctx: Context) -> None:
    data = ctx.boper_data()
    h = bo.higgs_from_boper(data)
    ctx.data.update({
        "n": h.n, "r": h.r, "g": h.g, "deg_Q": h.deg_Q,
        "phi": h.phi, "char_poly": _poly_text(h.char_poly),
        "graded_degrees": list(h.graded_degrees), "stable": h.stable,
    })
    ctx.check("char_poly", h.char_poly_ok, _poly_text(h.char_poly))
    ctx.check("nilpotent", h.nilpotent)
    if ctx.check_all:
        inv = bo.invariant_graded_pieces(h.phi, h.n, h.r)
        ctx.check("invariant_pieces", inv == [h.n], inv)


def cmd_degrees(ctx: Context) -> None:
    n = parse_int(ctx.doc, "n")
    r = parse_int(ctx.doc, "r", default=1)
    g = ctx.genus()
    dq = ctx.deg_Q()
    rows = []
    for i in range(1, n + 1):
        d = bo.degree_and_slope(n, r, g, dq, i)
        rows.append({"i": i, "deg_det_Ei": d.deg_det_Ei, "slope_E": d.slope_E, "slope_Q": d.slope_Q, "gap": d.gap})
    grads = bo.graded_degrees(n, r, g, dq)
    ctx.data.update({"n": n, "r": r, "g": g, "deg_Q": dq, "steps": rows, "graded_degrees": list(grads)})
    gap = rows[-1]["gap"]
    ctx.check("gap", gap == (n - 1) * (g - 1), gap)
    ctx.check("telescoping", rows[-1]["deg_det_Ei"] == sum(grads), sum(grads))


def cmd_moduli(ctx: Context) -> None:
    n = parse_int(ctx.doc, "n")
    r = parse_int(ctx.doc, "r", default=1)
    g = ctx.genus()
    m = bo.moduli_dimension(n, r, g)
    ctx.data.update({
        "n": n, "r": r, "g": g,
        "dim_C": m.dim_C, "dim_P": m.dim_P, "dim_sum": m.dim_sum, "total": m.total,
        "conventions": "dim_C = (g-1) r (r-1), 0 for r = 1; dim H^0(K^m) = (2m-1)(g-1)",
    })


def cmd_extract(ctx: Context) -> None:
    data = ctx.boper_data()
    Dmat = jt.extract_quotient_operator(data, ctx.order(data.n))
    ctx.data.update({"n": data.n, "r": data.r, "operator": Dmat})
    sym = Dmat.symbol()
    ok = all((sym[i, j] - (1 if i == j else 0)).is_zero() for i in range(sym.nrows) for j in range(sym.ncols))
    ctx.check("symbol_identity", ok)
    defect = jt.self_adjoint_defect(Dmat, jt.quotient_form(data))
    sa = jt.is_zero_op(defect)
    ctx.check("self_adjoint", sa, "0" if sa else defect)
    if ctx.check_all and data.q_conn is not None:
        ctx.data["tau"] = jt.tau_scalarize(Dmat, data.q_conn, ctx.order(data.n))


def cmd_build(ctx: Context) -> None:
    parts = ctx.parts()
    data = jt.build_boper_from_parts(parts, ctx.genus(), ctx.deg_Q(), ctx.base_point)
    ctx.data.update({"n": data.n, "r": data.r, "boper": boper_to_json(data)})
    rep = bo.validate_boper(data, ctx.order(data.n))
    failed = [c.name for c in rep.checks if not c.passed]
    ctx.check("validate", rep.passed, ", ".join(failed))
    if ctx.check_all:
        jf = jt.check_flat_jet_filtration(data, ctx.order(data.n))
        ctx.check("jet_filtration", jf.ok)


def cmd_roundtrip(ctx: Context) -> None:
    parts = ctx.parts()
    n = parts.oper.order
    N = ctx.order(n)
    ref, out = jt.round_trip(parts, N, ctx.base_point)
    ctx.data.update({"n": n, "r": parts.r, "input": ref, "recovered": out})
    ctx.check("roundtrip", ref == out)
    data = jt.build_boper_from_parts(parts, ctx.genus(), ctx.deg_Q(), ctx.base_point)
    _self_adjoint_check(ctx, data)
    if ctx.check_all:
        ctx.check("classify_recovered", do.classify(out) == do.classify(parts.oper), str(do.classify(out)))


HANDLERS = {
    "validate": cmd_validate,
    "classify": cmd_classify,
    "adjoint": cmd_adjoint,
    "decompose": cmd_decompose,
    "higgs": cmd_higgs,
    "degrees": cmd_degrees,
    "moduli": cmd_moduli,
    "extract": cmd_extract,
    "build": cmd_build,
    "roundtrip": cmd_roundtrip,
}


def _poly_text(coeffs) -> str:
    """det(xI - Phi) from coefficients c_0..c_m, printed in x."""
    parts = []
    for k in range(len(coeffs) - 1, -1, -1):
        c = coeffs[k]
        if not c:
            continue
        mono = "" if k == 0 else ("x" if k == 1 else f"x^{k}")
        if mono and c == 1:
            parts.append(mono)
        elif mono:
            parts.append(f"({c})*{mono}")
        else:
            parts.append(f"({c})")
    return " + ".join(parts) if parts else "0"


def run_scenario(command: str, path: str, order: int | None = None, base_point: Fraction | None = None,
                 check_all: bool = False) -> dict:
    """Run one scenario and return the report; ParseError propagates."""
    if command not in HANDLERS:
        raise ParseError(f"unknown command {command!r}")
    doc = load_scenario(path)
    declared = doc.get("command")
    if declared is not None and declared != command:
        raise ParseError(f"scenario declares command {declared!r}, invoked as {command!r}")
    ctx = Context(doc, order, base_point, check_all)
    try:
        HANDLERS[command](ctx)
    except ParseError:
        raise
    except OpercalcError as exc:
        ctx.check("error", False, f"{type(exc).__name__}: {exc}")
    return {
        "command": command,
        "checks": ctx.checks,
        "data": to_jsonable(ctx.data),
        "pass": all(c["pass"] for c in ctx.checks),
    }


def format_text(report: dict) -> str:
    lines = [f"command: {report['command']}"]
    for c in report["checks"]:
        tag = "PASS" if c["pass"] else "FAIL"
        res = c["residual"]
        lines.append(f"  [{tag}] {c['name']}" + (f"  ({res})" if res not in ("", None) else ""))
    for k, v in report["data"].items():
        lines.append(f"  {k}: {v}")
    lines.append(f"overall: {'PASS' if report['pass'] else 'FAIL'}")
    return "\n".join(lines) + "\n"


def _rational_arg(text: str) -> Fraction:
    try:
        return Fraction(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="opercalc", description="Exact calculus of opers and generalized B-opers.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("scenario", help="scenario JSON file")
    p.add_argument("--order", type=int, default=None, help="series truncation order N (default 2n+2)")
    p.add_argument("--base-point", type=_rational_arg, default=None, help="rational base point (default 0)")
    p.add_argument("--json", action="store_true", help="emit only the JSON report")
    p.add_argument("--check-all", action="store_true", help="run every applicable verification")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        report = run_scenario(args.command, args.scenario, args.order, args.base_point, args.check_all)
    except ParseError as exc:
        print(f"opercalc: parse error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(dumps(report) if args.json else format_text(report))
    return 0 if report["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
