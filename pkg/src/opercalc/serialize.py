"""Scenario parsing and report serialization.

Scenario files are JSON objects.  Rational functions are strings such as
"(3*z^2 + 1/2) / (z + 1)"; matrices are nested lists of such strings.
Every parse failure names the offending field.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from .boper import ORTHOGONAL, SYMPLECTIC, BilinearForm, BOperData, ConnectionMatrix, Filtration
from .diffop import TensorComponents, WeightedDiffOp, recompose
from .errors import OpercalcError, ParseError
from .exact.matrix import Matrix
from .exact.ratfunc import RationalFunction, format_rf, parse_rf
from .exact.series import TruncatedSeries, format_series
from .jets import MatrixDiffOp, ScalarOperBundle


def load_scenario(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: scenario must be a JSON object")
    return doc


def _field(doc: dict, key: str, where: str, default: Any = ...) -> Any:
    if key in doc:
        return doc[key]
    if default is ...:
        raise ParseError(f"missing field {where + '.' if where else ''}{key}")
    return default


def parse_int(doc: dict, key: str, where: str = "", default: Any = ...) -> int:
    v = _field(doc, key, where, default)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ParseError(f"field {where + '.' if where else ''}{key} must be an integer, got {v!r}")
    return v


def parse_rational(value: Any, where: str) -> Fraction:
    if isinstance(value, bool):
        raise ParseError(f"field {where} must be a rational number")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError:
            pass
    raise ParseError(f"field {where} must be a rational number like 3 or \"1/2\", got {value!r}")


def parse_rf_field(value: Any, where: str) -> RationalFunction:
    if isinstance(value, bool):
        raise ParseError(f"field {where}: expected an expression, got {value!r}")
    if isinstance(value, int):
        return RationalFunction.const(value)
    if not isinstance(value, str):
        raise ParseError(f"field {where}: expected an expression string, got {value!r}")
    try:
        return parse_rf(value)
    except ParseError as exc:
        raise ParseError(f"field {where}: {exc}") from None


def parse_rf_list(value: Any, where: str) -> list[RationalFunction]:
    if not isinstance(value, list) or not value:
        raise ParseError(f"field {where} must be a non-empty list")
    return [parse_rf_field(x, f"{where}[{i}]") for i, x in enumerate(value)]


def parse_matrix(value: Any, where: str) -> Matrix:
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise ParseError(f"field {where} must be a non-empty list of rows")
    width = len(value[0])
    if width == 0 or any(len(r) != width for r in value):
        raise ParseError(f"field {where} has ragged or empty rows")
    return Matrix([[parse_rf_field(x, f"{where}[{i}][{j}]") for j, x in enumerate(r)] for i, r in enumerate(value)])


def parse_operator(doc: dict, where: str = "oper") -> WeightedDiffOp:
    """Either "coeffs" (a_0..a_n, low to high) or "components" (w_0..w_n)."""
    if not isinstance(doc, dict):
        raise ParseError(f"field {where} must be an object")
    if "coeffs" in doc:
        return WeightedDiffOp(parse_rf_list(doc["coeffs"], f"{where}.coeffs"))
    if "components" in doc:
        comps = parse_rf_list(doc["components"], f"{where}.components")
        return recompose(TensorComponents(len(comps) - 1, tuple(comps)))
    raise ParseError(f"field {where} needs 'coeffs' or 'components'")


def parse_w_bundle(doc: dict, oper: WeightedDiffOp, where: str = "W") -> ScalarOperBundle:
    if doc is None:
        return ScalarOperBundle.trivial(oper)
    if not isinstance(doc, dict):
        raise ParseError(f"field {where} must be an object")
    form = parse_matrix(_field(doc, "form", where), f"{where}.form")
    conn = parse_matrix(_field(doc, "conn", where), f"{where}.conn")
    return ScalarOperBundle(oper, BilinearForm(form, ORTHOGONAL), ConnectionMatrix(conn))


def parse_boper(doc: dict, genus: int, deg_Q: int, base_point: Fraction, where: str = "boper") -> BOperData:
    if not isinstance(doc, dict):
        raise ParseError(f"field {where} must be an object")
    parity = _field(doc, "parity", where)
    if parity not in (ORTHOGONAL, SYMPLECTIC):
        raise ParseError(f"field {where}.parity must be 'orthogonal' or 'symplectic'")
    form = BilinearForm(parse_matrix(_field(doc, "form", where), f"{where}.form"), parity)
    r = parse_int(doc, "r", where)
    conn = ConnectionMatrix(parse_matrix(_field(doc, "connection", where), f"{where}.connection"))
    filt_doc = _field(doc, "filtration", where)
    if filt_doc == "standard":
        if form.rank % r:
            raise ParseError(f"field {where}.r does not divide the rank {form.rank}")
        filt = Filtration.standard(form.rank // r, r)
    else:
        if not isinstance(filt_doc, list) or not filt_doc:
            raise ParseError(f"field {where}.filtration must be 'standard' or a list of generator matrices")
        filt = Filtration(
            tuple(parse_matrix(s, f"{where}.filtration[{i}]") for i, s in enumerate(filt_doc)), r
        )
    q_conn = None
    if "q_connection" in doc:
        q_conn = ConnectionMatrix(parse_matrix(doc["q_connection"], f"{where}.q_connection"))
    strict = doc.get("strict", True)
    return BOperData(form, filt, conn, genus, deg_Q, base_point, q_conn, bool(strict))


# output ----------------------------------------------------------------------------------

def to_jsonable(x: Any) -> Any:
    if isinstance(x, RationalFunction):
        return format_rf(x)
    if isinstance(x, TruncatedSeries):
        return format_series(x)
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, Matrix):
        return [[to_jsonable(e) for e in r] for r in x.rows]
    if isinstance(x, WeightedDiffOp):
        return {
            "coeffs": [to_jsonable(c) for c in x.coeffs],
            "source_weight": str(x.source_weight),
            "target_weight": str(x.target_weight),
        }
    if isinstance(x, MatrixDiffOp):
        return {"coeffs": [to_jsonable(c) for c in x.coeffs]}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(e) for e in x]
    if isinstance(x, dict):
        return {k: to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (bool, int, str)) or x is None:
        return x
    return str(x)


def boper_to_json(data: BOperData) -> dict:
    out = {
        "parity": data.form.parity,
        "r": data.r,
        "form": to_jsonable(data.form.matrix),
        "connection": to_jsonable(data.conn.A),
        "filtration": [to_jsonable(s) for s in data.filt.steps],
    }
    if data.q_conn is not None:
        out["q_connection"] = to_jsonable(data.q_conn.A)
    return out


def dumps(report: dict) -> str:
    return json.dumps(to_jsonable(report), indent=2, ensure_ascii=False) + "\n"


__all__ = [
    "OpercalcError",
    "ParseError",
    "boper_to_json",
    "dumps",
    "load_scenario",
    "parse_boper",
    "parse_int",
    "parse_matrix",
    "parse_operator",
    "parse_rational",
    "parse_rf_field",
    "parse_w_bundle",
    "to_jsonable",
]
