"""JSON documents describing a system, its pullback table and model specs.

Rationals are written as ``"p/q"`` strings (integers may be bare).  A
document only needs the sections the requested command uses.
"""
from __future__ import annotations

import dataclasses
import enum
import json
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import jsonschema

from .constant_complexity import CERT_KINDS, RenormCertificate
from .curve_dynamics import (
    Preimage,
    PullbackTable,
    TableError,
    degree_budget_violations,
    derive_boundary_table,
)
from .models import Branch, InvalidSpec, ModelSpec
from .puzzle import (
    BoundaryRecord,
    CurveClass,
    Diagnostic,
    EPieceEmbedding,
    Flags,
    Piece,
    Presentation,
    PuzzleError,
    validate_presentation,
)
from .spectral import InvalidMatrix, NonNegMatrix, to_rational

SUPPORTED_VERSIONS = (1,)

_RATIONAL = {"oneOf": [{"type": "integer"}, {"type": "string", "pattern": r"^\s*-?\d+(\s*/\s*\d+)?\s*$"}]}
_IDS = {"type": "array", "items": {"type": "string", "minLength": 1}}

SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["format_version"],
    "additionalProperties": False,
    "properties": {
        "format_version": {"type": "integer"},
        "description": {"type": "string"},
        "pieces": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["id", "boundary"],
                "additionalProperties": False,
                "properties": {"id": {"type": "string", "minLength": 1}, "boundary": _IDS, "marked": _IDS},
            },
        },
        "epieces": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "host", "image", "degree", "boundary"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "host": {"type": "string"},
                    "image": {"type": "string"},
                    "degree": {"type": "integer", "minimum": 1},
                    "boundary": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["curve", "image", "degree", "inside"],
                            "additionalProperties": False,
                            "properties": {
                                "curve": {"type": "string", "minLength": 1},
                                "image": {"type": "string"},
                                "degree": {"type": "integer", "minimum": 1},
                                "inside": _IDS,
                            },
                        },
                    },
                },
            },
        },
        "marked_map": {"type": "object", "additionalProperties": {"type": "string"}},
        "flags": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"pcf_asserted": {"type": "boolean"}, "orbifold_not_2222": {"type": "boolean"}},
        },
        "curve_universe": {
            "type": "array",
            "items": {
                "oneOf": [
                    {"type": "string", "minLength": 1},
                    {
                        "type": "object",
                        "required": ["id", "piece", "side"],
                        "additionalProperties": False,
                        "properties": {"id": {"type": "string"}, "piece": {"type": "string"}, "side": _IDS},
                    },
                ]
            },
        },
        "pullbacks": {
            "type": "object",
            "additionalProperties": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["target", "degree"],
                    "additionalProperties": False,
                    "properties": {
                        "target": {"type": "string", "minLength": 1},
                        "degree": {"type": "integer", "minimum": 1},
                        "epiece": {"type": "string"},
                    },
                },
            },
        },
        "renorm_certificates": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["cycle", "kind"],
                "additionalProperties": False,
                "properties": {"cycle": _IDS, "kind": {"enum": list(CERT_KINDS)}},
            },
        },
        "affine_spec": {
            "type": "object",
            "required": ["k", "branches"],
            "additionalProperties": False,
            "properties": {
                "k": {"type": "integer", "minimum": 1},
                "branches": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["source", "target", "slope", "sign"],
                        "additionalProperties": False,
                        "properties": {
                            "source": {"type": "integer", "minimum": 0},
                            "target": {"type": "integer", "minimum": 0},
                            "slope": {"type": "integer", "minimum": 1},
                            "sign": {"enum": [1, -1]},
                        },
                    },
                },
            },
        },
        "annuli_spec": {
            "type": "object",
            "required": ["k", "branches"],
            "additionalProperties": False,
            "properties": {
                "k": {"type": "integer", "minimum": 1},
                "branches": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["source", "target", "degree", "flip"],
                        "additionalProperties": False,
                        "properties": {
                            "source": {"type": "integer", "minimum": 0},
                            "target": {"type": "integer", "minimum": 0},
                            "degree": {"type": "integer", "minimum": 1},
                            "flip": {"type": "boolean"},
                        },
                    },
                },
            },
        },
        "constants": {"type": "object", "additionalProperties": _RATIONAL},
        "potential_vector": {"type": "object", "additionalProperties": _RATIONAL},
        "matrix": {"type": "array", "items": {"type": "array", "items": _RATIONAL}},
    },
}


class DocumentError(ValueError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(str(d) for d in diagnostics))


@dataclass
class Document:
    format_version: int = 1
    description: str | None = None
    presentation: Presentation | None = None
    universe: list[tuple[str, CurveClass | None]] | None = None
    table: PullbackTable | None = None
    certificates: tuple[RenormCertificate, ...] | None = None
    affine_spec: ModelSpec | None = None
    annuli_spec: ModelSpec | None = None
    constants: dict[str, Fraction] | None = None
    potential_vector: dict[str, Fraction] | None = None
    matrix: NonNegMatrix | None = None

    def constant(self, name: str = "C", default: Fraction = Fraction(0)) -> Fraction:
        return (self.constants or {}).get(name, default)


# ---------------------------------------------------------------- parsing

def _path(err: jsonschema.ValidationError) -> str:
    return "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path)


def _build_presentation(raw: Mapping) -> Presentation:
    pieces = tuple(Piece(x["id"], tuple(x["boundary"]), tuple(x.get("marked", ()))) for x in raw["pieces"])
    epieces = tuple(
        EPieceEmbedding(
            e["id"], e["host"], e["image"], e["degree"],
            tuple(BoundaryRecord(b["curve"], b["image"], b["degree"], frozenset(b["inside"])) for b in e["boundary"]),
        )
        for e in raw.get("epieces", ())
    )
    fl = raw.get("flags", {})
    flags = Flags(fl.get("pcf_asserted", False), fl.get("orbifold_not_2222", True))
    return Presentation(pieces, epieces, dict(raw.get("marked_map", {})), flags)


def _build_table(raw: Mapping, p: Presentation | None, diags: list[Diagnostic]) -> tuple[list, PullbackTable | None]:
    entries = raw.get("curve_universe")
    pulls = raw.get("pullbacks")
    universe: list = []
    classes: dict[str, CurveClass] = {}
    pieces = p.piece_map if p is not None else {}
    ids = []
    if entries is None:
        ids = list(pulls or {})
    else:
        for k, ent in enumerate(entries):
            if isinstance(ent, str):
                ids.append(ent)
                universe.append((ent, None))
            else:
                ids.append(ent["id"])
                if ent["piece"] not in pieces:
                    diags.append(Diagnostic("IntegrityError", f"$.curve_universe[{k}].piece", f"unknown piece {ent['piece']!r}"))
                    continue
                try:
                    cls = CurveClass.of(pieces[ent["piece"]], ent["side"])
                except PuzzleError as exc:
                    diags.append(Diagnostic("IntegrityError", f"$.curve_universe[{k}].side", str(exc)))
                    continue
                classes[ent["id"]] = cls
                universe.append((ent["id"], cls))
    for cid in ids:
        if cid not in classes and p is not None:
            try:
                classes[cid] = p.boundary_class(cid)
            except PuzzleError:
                pass
    if entries is None:
        universe = None
    if pulls is None:
        return universe, None
    rows = {cid: tuple(Preimage(r["target"], r["degree"], r.get("epiece")) for r in recs) for cid, recs in pulls.items()}
    try:
        table = PullbackTable(tuple(ids), rows, classes)
    except TableError as exc:
        diags.append(Diagnostic(type(exc).__name__, "$.pullbacks", str(exc)))
        return universe, None
    if len(set(classes.values())) < len(classes):
        dup = [c for c, n in Counter(classes.values()).items() if n > 1]
        diags.append(Diagnostic("DuplicateClass", "$.curve_universe", f"{len(dup)} classes listed under two ids"))
    missing = [c for c in ids if c not in rows]
    if missing:
        diags.append(Diagnostic("TableNotClosed", "$.pullbacks", f"no rows for {missing}"))
    return universe, table


def _check_against_presentation(p: Presentation, t: PullbackTable, diags: list[Diagnostic]) -> None:
    extra = {c: k for c, k in t.classes.items() if not _is_boundary(p, c)}
    try:
        derived = derive_boundary_table(p, extra)
    except (TableError, PuzzleError) as exc:
        diags.append(Diagnostic("TableMismatch", "$.pullbacks", str(exc)))
        return
    for cid in derived.universe:
        if cid not in derived.rows:
            continue
        if cid not in t.rows:
            if cid in t.universe:
                continue
            diags.append(Diagnostic("TableMismatch", f"$.pullbacks.{cid}", "boundary curve missing from the table"))
            continue
        want = Counter((r.target, r.degree, r.epiece) for r in derived.rows[cid])
        have_recs = t.rows[cid]
        if all(r.epiece is None for r in have_recs):
            want = Counter((r.target, r.degree, None) for r in derived.rows[cid])
        have = Counter((r.target, r.degree, r.epiece) for r in have_recs)
        if want != have:
            diags.append(Diagnostic(
                "TableMismatch", f"$.pullbacks.{cid}",
                f"E-pieces give {sorted(want.elements(), key=str)}, table gives {sorted(have.elements(), key=str)}",
            ))
    for msg in degree_budget_violations(t, {e.id: e.degree for e in p.epieces}):
        diags.append(Diagnostic("DegreeError", "$.pullbacks", msg))


def _is_boundary(p: Presentation, cid: str) -> bool:
    try:
        p.owner(cid)
        return True
    except PuzzleError:
        return False


def _spec(raw: Mapping, affine: bool) -> ModelSpec:
    if affine:
        brs = [Branch(b["source"], b["target"], b["slope"], b["sign"] == -1) for b in raw["branches"]]
    else:
        brs = [Branch(b["source"], b["target"], b["degree"], b["flip"]) for b in raw["branches"]]
    return ModelSpec(raw["k"], tuple(brs))


def parse_document(source: str | bytes | Mapping) -> Document:
    """Parse and fully validate a document; raise :class:`DocumentError` otherwise."""
    diags: list[Diagnostic] = []
    if isinstance(source, (str, bytes)):
        try:
            raw = json.loads(source)
        except json.JSONDecodeError as exc:
            raise DocumentError([Diagnostic("JSONError", f"line {exc.lineno} column {exc.colno}", exc.msg)]) from None
    else:
        raw = source
    if not isinstance(raw, dict):
        raise DocumentError([Diagnostic("SchemaError", "$", "top level must be an object")])
    ver = raw.get("format_version")
    if ver not in SUPPORTED_VERSIONS:
        raise DocumentError([Diagnostic(
            "UnsupportedVersion", "$.format_version",
            f"format_version {ver!r} is not supported; supported versions: {', '.join(map(str, SUPPORTED_VERSIONS))}",
        )])
    validator = jsonschema.Draft202012Validator(SCHEMA)
    for err in sorted(validator.iter_errors(raw), key=lambda e: list(map(str, e.absolute_path))):
        diags.append(Diagnostic("SchemaError", _path(err), err.message))
    if diags:
        raise DocumentError(diags)

    doc = Document(format_version=ver, description=raw.get("description"))
    if "pieces" in raw:
        doc.presentation = _build_presentation(raw)
        diags.extend(validate_presentation(doc.presentation))
    elif "epieces" in raw:
        diags.append(Diagnostic("IntegrityError", "$.epieces", "E-pieces given without pieces"))
    if "curve_universe" in raw or "pullbacks" in raw:
        doc.universe, doc.table = _build_table(raw, doc.presentation, diags)
        if doc.table is not None and doc.presentation is not None and not diags:
            _check_against_presentation(doc.presentation, doc.table, diags)
    if "renorm_certificates" in raw:
        doc.certificates = tuple(RenormCertificate(tuple(c["cycle"]), c["kind"]) for c in raw["renorm_certificates"])
    for key, affine in (("affine_spec", True), ("annuli_spec", False)):
        if key in raw:
            try:
                setattr(doc, key, _spec(raw[key], affine))
            except InvalidSpec as exc:
                diags.append(Diagnostic("InvalidSpec", f"$.{key}", str(exc)))
    if "constants" in raw:
        doc.constants = {k: to_rational(v) for k, v in raw["constants"].items()}
        if any(v < 0 for v in doc.constants.values()):
            diags.append(Diagnostic("InvalidConstant", "$.constants", "constants must be non-negative"))
    if "potential_vector" in raw:
        doc.potential_vector = {k: to_rational(v) for k, v in raw["potential_vector"].items()}
    if "matrix" in raw:
        try:
            doc.matrix = NonNegMatrix.of(raw["matrix"])
        except InvalidMatrix as exc:
            diags.append(Diagnostic("InvalidMatrix", "$.matrix", str(exc)))
    if diags:
        raise DocumentError(diags)
    return doc


def _resolve_preset(path: str | Path) -> Path | None:
    p = Path(path)
    if p.exists():
        return p
    res = resources.files("repelsys") / "presets" / p.name
    if res.is_file():
        return Path(str(res))
    return None


def load_document(path: str | Path) -> Document:
    """Read a document from disk; bare preset names resolve to the bundled presets."""
    p = _resolve_preset(path)
    if p is None:
        raise DocumentError([Diagnostic("FileNotFound", str(path), "no such file or bundled preset")])
    return parse_document(p.read_text())


def preset_names() -> list[str]:
    d = resources.files("repelsys") / "presets"
    return sorted(x.name for x in d.iterdir() if x.name.endswith(".json"))


# ---------------------------------------------------------------- serialization

def serialize_document(doc: Document) -> dict:
    out: dict[str, Any] = {"format_version": doc.format_version}
    if doc.description is not None:
        out["description"] = doc.description
    p = doc.presentation
    if p is not None:
        out["pieces"] = [
            {"id": s.id, "boundary": list(s.boundary), **({"marked": list(s.marked)} if s.marked else {})}
            for s in p.pieces
        ]
        if p.epieces:
            out["epieces"] = [
                {
                    "id": e.id, "host": e.host, "image": e.image, "degree": e.degree,
                    "boundary": [
                        {"curve": r.curve, "image": r.image, "degree": r.degree, "inside": sorted(r.inside)}
                        for r in e.boundary
                    ],
                }
                for e in p.epieces
            ]
        if p.marked_map:
            out["marked_map"] = dict(p.marked_map)
        if p.flags != Flags():
            out["flags"] = {"pcf_asserted": p.flags.pcf_asserted, "orbifold_not_2222": p.flags.orbifold_not_2222}
    if doc.universe is not None:
        out["curve_universe"] = [
            cid if cls is None else {"id": cid, "piece": cls.piece, "side": sorted(cls.side)}
            for cid, cls in doc.universe
        ]
    if doc.table is not None:
        out["pullbacks"] = {
            cid: [
                {"target": r.target, "degree": r.degree, **({"epiece": r.epiece} if r.epiece else {})}
                for r in doc.table.rows[cid]
            ]
            for cid in doc.table.universe if cid in doc.table.rows
        }
    if doc.certificates is not None:
        out["renorm_certificates"] = [{"cycle": list(c.cycle), "kind": c.kind} for c in doc.certificates]
    if doc.affine_spec is not None:
        out["affine_spec"] = {"k": doc.affine_spec.k, "branches": [
            {"source": b.source, "target": b.target, "slope": b.degree, "sign": -1 if b.reverse else 1}
            for b in doc.affine_spec.branches
        ]}
    if doc.annuli_spec is not None:
        out["annuli_spec"] = {"k": doc.annuli_spec.k, "branches": [
            {"source": b.source, "target": b.target, "degree": b.degree, "flip": b.reverse}
            for b in doc.annuli_spec.branches
        ]}
    if doc.constants is not None:
        out["constants"] = {k: str(v) for k, v in doc.constants.items()}
    if doc.potential_vector is not None:
        out["potential_vector"] = {k: str(v) for k, v in doc.potential_vector.items()}
    if doc.matrix is not None:
        out["matrix"] = doc.matrix.to_strings()
    return out


def dumps(doc: Document) -> str:
    return json.dumps(serialize_document(doc), indent=2) + "\n"


def jsonable(obj: Any) -> Any:
    """Turn reports (dataclasses, Fractions, enums, matrices) into JSON values."""
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, NonNegMatrix):
        return obj.to_strings()
    if isinstance(obj, (frozenset, set)):
        return sorted(jsonable(x) for x in obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        out = {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
        for extra in ("verdict", "passed", "period"):
            if hasattr(type(obj), extra) and isinstance(getattr(type(obj), extra), property):
                out[extra] = jsonable(getattr(obj, extra))
        return out
    if isinstance(obj, Mapping):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(x) for x in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj
