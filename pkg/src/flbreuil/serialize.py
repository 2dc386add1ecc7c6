"""JSON persistence for modules and parameters.

Every document is an envelope

    {"schema": "flbreuil/1", "kind": ..., "params": {...}, "data": {...}}

with the ambient parameters embedded, so a file reproduces its context.
Unknown fields are rejected, precision beyond the context cap is rejected,
and p = 2 is rejected on read (the normal-form machinery needs p > 2).
Dumps are sorted-key JSON without floats, so identical objects serialize to
identical bytes.
"""

from __future__ import annotations

import json

from .ambient import AmbientParams
from .breuil import BreuilModule
from .errors import PrecisionMismatch, SchemaMismatch
from .fl import FLModule
from .kisin import KisinModule
from .matrix import PDOps, RingMatrix, SeriesOps, WittOps
from .pd import PDElement
from .series import SigmaSeries
from .witt import WittScalar

SCHEMA = "flbreuil/1"


def _expect(d: dict, required: tuple, optional: tuple = ()) -> None:
    if not isinstance(d, dict):
        raise SchemaMismatch(f"expected an object, got {type(d).__name__}")
    keys = set(d)
    missing = set(required) - keys
    unknown = keys - set(required) - set(optional)
    if missing:
        raise SchemaMismatch(f"missing fields: {sorted(missing)}")
    if unknown:
        raise SchemaMismatch(f"unknown fields rejected: {sorted(unknown)}")


# --- scalars and elements ---

def scalar_to_json(x: WittScalar) -> dict:
    return {"coeffs": [str(c) for c in x.coeffs], "prec": x.prec}


def scalar_from_json(amb: AmbientParams, d: dict) -> WittScalar:
    _expect(d, ("coeffs", "prec"))
    prec = int(d["prec"])
    if prec > amb.cap:
        raise PrecisionMismatch(f"scalar precision {prec} exceeds cap {amb.cap}")
    if prec < 1:
        raise SchemaMismatch("scalar precision must be positive")
    coeffs = [int(c) for c in d["coeffs"]]
    if len(coeffs) != amb.f:
        raise SchemaMismatch(f"scalar needs {amb.f} coefficients")
    return amb.ring.make(coeffs, prec)


def series_to_json(x: SigmaSeries) -> dict:
    return {"ucoeffs": [scalar_to_json(c) for c in x.coeffs]}


def series_from_json(amb: AmbientParams, d: dict) -> SigmaSeries:
    _expect(d, ("ucoeffs",))
    return SigmaSeries(amb, [scalar_from_json(amb, c) for c in d["ucoeffs"]])


def pd_to_json(x: PDElement) -> dict:
    return {"gcoeffs": [scalar_to_json(c) for c in x.coeffs], "tail_dirty": x.tail_dirty}


def pd_from_json(amb: AmbientParams, d: dict) -> PDElement:
    _expect(d, ("gcoeffs", "tail_dirty"))
    coeffs = [scalar_from_json(amb, c) for c in d["gcoeffs"]]
    if len(coeffs) > amb.N_gamma:
        raise SchemaMismatch("too many gamma coefficients for this truncation")
    return PDElement(amb, coeffs, bool(d["tail_dirty"]))


_ENTRY_IO = {
    "witt": (scalar_to_json, scalar_from_json, WittOps),
    "series": (series_to_json, series_from_json, SeriesOps),
    "pd": (pd_to_json, pd_from_json, PDOps),
}


def matrix_to_json(M: RingMatrix) -> dict:
    enc = _ENTRY_IO[M.ops.kind][0]
    return {
        "rows": M.rows,
        "cols": M.cols,
        "denom_exp": M.denom_exp,
        "entries": [[enc(x) for x in row] for row in M.entries],
    }


def matrix_from_json(amb: AmbientParams, kind: str, d: dict) -> RingMatrix:
    _expect(d, ("rows", "cols", "denom_exp", "entries"))
    dec, ops_cls = _ENTRY_IO[kind][1], _ENTRY_IO[kind][2]
    entries = [[dec(amb, x) for x in row] for row in d["entries"]]
    M = RingMatrix(ops_cls(amb), entries, int(d["denom_exp"]))
    if M.rows != int(d["rows"]) or M.cols != int(d["cols"]):
        raise SchemaMismatch("declared matrix shape does not match entries")
    return M


# --- ambient parameters ---

def params_to_json(amb: AmbientParams) -> dict:
    return amb.describe()


def params_from_json(d: dict) -> AmbientParams:
    _expect(d, ("p", "f", "m_coeffs", "N_p", "N_gamma", "r", "a", "headroom"))
    p = int(d["p"])
    if p == 2:
        raise SchemaMismatch(
            "p = 2 is rejected: the diagonal normal form used for the "
            "Kisin-side constructions requires p > 2"
        )
    a_doc = d["a"]
    _expect(a_doc, ("coeffs", "prec"))
    try:
        return AmbientParams(
            p,
            int(d["r"]),
            f=int(d["f"]),
            N_p=int(d["N_p"]),
            N_gamma=int(d["N_gamma"]),
            headroom=int(d["headroom"]),
            a=[int(c) for c in a_doc["coeffs"]],
            m_coeffs=[int(c) for c in d["m_coeffs"]],
        )
    except ValueError as exc:
        raise SchemaMismatch(str(exc)) from exc


# --- module envelopes ---

def to_json(obj) -> dict:
    if isinstance(obj, FLModule):
        kind, data = "FLModule", {
            "d": obj.d,
            "jumps": list(obj.jumps),
            "Ftil": matrix_to_json(obj.Ftil),
        }
        amb = obj.amb
    elif isinstance(obj, KisinModule):
        gls = None
        if obj.gls is not None:
            X, jumps, Y = obj.gls
            gls = {"X": matrix_to_json(X), "jumps": list(jumps), "Y": matrix_to_json(Y)}
        kind, data = "KisinModule", {"d": obj.d, "A": matrix_to_json(obj.A), "gls": gls}
        amb = obj.amb
    elif isinstance(obj, BreuilModule):
        kind, data = "BreuilModule", {
            "d": obj.d,
            "Phi": matrix_to_json(obj.Phi),
            "Nmat": None if obj.Nmat is None else matrix_to_json(obj.Nmat),
            "C": matrix_to_json(obj.C),
            "jumps": list(obj.jumps),
        }
        amb = obj.amb
    else:
        raise SchemaMismatch(f"cannot serialize {type(obj).__name__}")
    return {"schema": SCHEMA, "kind": kind, "params": params_to_json(amb), "data": data}


def from_json(doc: dict):
    _expect(doc, ("schema", "kind", "params", "data"))
    if doc["schema"] != SCHEMA:
        raise SchemaMismatch(f"schema {doc['schema']!r} is not {SCHEMA!r}")
    amb = params_from_json(doc["params"])
    kind = doc["kind"]
    data = doc["data"]
    if kind == "FLModule":
        _expect(data, ("d", "jumps", "Ftil"))
        return FLModule(amb, int(data["d"]), tuple(data["jumps"]),
                        matrix_from_json(amb, "witt", data["Ftil"]))
    if kind == "KisinModule":
        _expect(data, ("d", "A", "gls"))
        gls = None
        if data["gls"] is not None:
            _expect(data["gls"], ("X", "jumps", "Y"))
            gls = (
                matrix_from_json(amb, "series", data["gls"]["X"]),
                tuple(data["gls"]["jumps"]),
                matrix_from_json(amb, "series", data["gls"]["Y"]),
            )
        return KisinModule(amb, int(data["d"]), matrix_from_json(amb, "series", data["A"]), gls)
    if kind == "BreuilModule":
        _expect(data, ("d", "Phi", "Nmat", "C", "jumps"))
        nmat = None if data["Nmat"] is None else matrix_from_json(amb, "pd", data["Nmat"])
        return BreuilModule(
            amb,
            int(data["d"]),
            matrix_from_json(amb, "pd", data["Phi"]),
            nmat,
            matrix_from_json(amb, "pd", data["C"]),
            tuple(data["jumps"]),
        )
    raise SchemaMismatch(f"unknown kind {kind!r}")


def dumps(obj) -> str:
    return json.dumps(to_json(obj), sort_keys=True, separators=(",", ":"))


def loads(text: str):
    return from_json(json.loads(text))


def save(obj, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))
        fh.write("\n")


def load(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read())
