"""Command line front end.

Exit codes: 0 success or unobstructed, 2 obstructed, 1 invalid input,
3 indeterminate.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Any, Callable

from .constant_complexity import (
    NotConstantComplexity,
    analytization_verdict,
    boundary_obstruction_check,
    check_constant_complexity,
    renormalizations,
    renormalized_obstruction_check,
    star_map,
)
from .curve_dynamics import TableError, obstruction_verdict, stabilize, transition_matrix
from .document import Document, DocumentError, jsonable, load_document
from .models import (
    AffineModel,
    AnnuliModel,
    InvalidWitness,
    ObstructionError,
    extract_transition,
    gluing_budget,
    plot_rows,
    prescribe_potentials,
    realize_affine,
    realize_annuli,
)
from .puzzle import Diagnostic, PuzzleError, boundary_multicurve, classify_piece
from .spectral import spectral_radius, subunit_certificate, unit_relation

OK, INVALID, OBSTRUCTED, INDETERMINATE = 0, 1, 2, 3


class MissingSection(ValueError):
    pass


def _need(doc: Document, *attrs: str):
    missing = [a for a in attrs if getattr(doc, a) is None]
    if missing:
        names = {"presentation": "pieces", "table": "pullbacks", "matrix": "matrix",
                 "affine_spec": "affine_spec", "annuli_spec": "annuli_spec"}
        raise MissingSection("document lacks " + ", ".join(names.get(a, a) for a in missing))


def _not_subunit_dict(cert) -> dict:
    return jsonable(cert) | {"is_subunit": cert.is_subunit}


# ---------------------------------------------------------------- commands

def cmd_validate(doc: Document, args) -> tuple[dict, int]:
    return {"valid": True, "diagnostics": []}, OK


def cmd_classify(doc: Document, args) -> tuple[dict, int]:
    _need(doc, "presentation")
    p = doc.presentation
    out: dict[str, Any] = {
        "pieces": {s.id: classify_piece(s).value for s in p.pieces},
        "boundary_multicurve": list(boundary_multicurve(p).ids),
    }
    cc = check_constant_complexity(p)
    out["constant_complexity"] = cc.ok
    out["parallel"] = dict(cc.parallel)
    if cc.ok:
        sm = star_map(p)
        out["star_map"] = dict(sm.mapping)
        out["cycles"] = [list(c) for c in sm.cycles]
    return out, OK


def cmd_boundary_check(doc: Document, args) -> tuple[dict, int]:
    _need(doc, "presentation", "table")
    bv = boundary_obstruction_check(doc.presentation, doc.table, args.tol)
    out = {"verdict": "Obstructed" if bv.obstructed else "Unobstructed", **jsonable(bv)}
    return out, OBSTRUCTED if bv.obstructed else OK


def cmd_stabilize(doc: Document, args) -> tuple[dict, int]:
    _need(doc, "table")
    if args.seed:
        seed = [s for s in args.seed.split(",") if s]
    elif doc.presentation is not None:
        seed = [c for c in boundary_multicurve(doc.presentation).ids if c in doc.table.universe]
    else:
        seed = list(doc.table.universe)
    st = stabilize(seed, doc.table)
    w = transition_matrix(st.curves, doc.table)
    return {"seed": seed, "stable": list(st.curves), "steps": st.steps, "matrix": jsonable(w)}, OK


def cmd_obstruction(doc: Document, args) -> tuple[dict, int]:
    _need(doc, "table")
    rep = obstruction_verdict(doc.table, args.tol)
    return jsonable(rep), OBSTRUCTED if rep.obstructed else OK


def cmd_renormalize(doc: Document, args) -> tuple[dict, int]:
    _need(doc, "presentation", "table")
    out, code = [], OK
    for d in renormalizations(doc.presentation, doc.table):
        rep = renormalized_obstruction_check(d, args.tol)
        if rep.obstructed:
            code = OBSTRUCTED
        out.append({"descriptor": jsonable(d), "composed_check": jsonable(rep)})
    return {"renormalizations": out}, code


def cmd_potentials(doc: Document, args) -> tuple[dict, int]:
    _need(doc, "presentation", "table")
    bv = boundary_obstruction_check(doc.presentation, doc.table, args.tol)
    if bv.obstructed:
        return {"verdict": "Obstructed", "certificate": jsonable(bv.certificate)}, OBSTRUCTED
    const = doc.constant("C")
    budget = gluing_budget(bv.matrix, const)
    out: dict[str, Any] = {"curves": list(bv.curves), "budget": jsonable(budget)}
    if doc.potential_vector is not None:
        ledgers = [prescribe_potentials(d, bv.matrix, doc.potential_vector, const)
                   for d in renormalizations(doc.presentation, doc.table)]
        out["ledgers"] = jsonable(ledgers)
    return out, OK


def model_document(model: AffineModel | AnnuliModel) -> dict:
    brs = []
    for pb in model.branches:
        b = {"source": pb.branch.source, "target": pb.branch.target, "degree": pb.branch.degree,
             "reverse": pb.branch.reverse, "lo": str(pb.lo), "hi": str(pb.hi),
             "scale": str(pb.scale), "offset": str(pb.offset)}
        if model.kind == "annuli":
            b["exponent"] = AnnuliModel.exponent(pb)
            b["log_coefficient"] = str(AnnuliModel.log_coefficient(pb))
            b["radii"] = list(model.radii(pb))
        brs.append(b)
    out = {"kind": model.kind, "lengths": [str(x) for x in model.lengths],
           "starts": [str(x) for x in model.starts], "gaps": [str(x) for x in model.gaps],
           "branches": brs, "matrix": extract_transition(model).to_strings()}
    return out


def emit_plot_data(model: AffineModel | AnnuliModel, depth: int, path: str | Path | None = None,
                   fmt: str = "csv") -> str:
    """Depth-``n`` components as CSV (or JSON) text, also written to ``path`` if given."""
    rows = plot_rows(model, depth)
    if fmt == "json":
        text = json.dumps([{"object": o, "depth": d, "left": a, "right": b} for o, d, a, b in rows], indent=2) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["object", "depth", "inner" if model.kind == "annuli" else "left",
                "outer" if model.kind == "annuli" else "right"])
    for o, d, a, b in rows:
        w.writerow([o, d, repr(a), repr(b)])
    if path is not None:
        Path(path).write_text(buf.getvalue())
    return buf.getvalue()


def _realize(doc: Document, args, attr: str, build: Callable) -> tuple[dict | str, int]:
    _need(doc, attr)
    try:
        model = build(getattr(doc, attr))
    except ObstructionError as exc:
        return {"verdict": "Obstructed", "matrix": exc.matrix.to_strings(),
                "certificate": jsonable(exc.certificate)}, OBSTRUCTED
    if args.depth is not None:
        return emit_plot_data(model, args.depth, fmt=args.format or "csv"), OK
    return model_document(model), OK


def cmd_realize_affine(doc, args):
    return _realize(doc, args, "affine_spec", realize_affine)


def cmd_realize_annuli(doc, args):
    return _realize(doc, args, "annuli_spec", realize_annuli)


def cmd_combine(doc: Document, args) -> tuple[dict, int]:
    _need(doc, "presentation", "table")
    rep = analytization_verdict(doc.presentation, doc.table, doc.certificates or (), args.tol)
    code = {"pass": OK, "fail": OBSTRUCTED, "indeterminate": INDETERMINATE}[rep.status]
    return jsonable(rep), code


def cmd_spectral(doc: Document, args) -> tuple[dict, int]:
    _need(doc, "matrix")
    cert = subunit_certificate(doc.matrix, args.tol)
    enc = spectral_radius(doc.matrix, args.tol)
    out = {"relation": unit_relation(doc.matrix), "certificate": _not_subunit_dict(cert),
           "enclosure": jsonable(enc)}
    return out, OK if cert.is_subunit else OBSTRUCTED


COMMANDS: dict[str, tuple[Callable, str]] = {
    "validate": (cmd_validate, "parse and check a document"),
    "classify": (cmd_classify, "piece types, boundary multicurve and the induced map on complex pieces"),
    "boundary-check": (cmd_boundary_check, "exact test of the boundary multicurve"),
    "stabilize": (cmd_stabilize, "grow a set of curves by pullback until it stops changing"),
    "obstruction": (cmd_obstruction, "search the curve universe for an obstruction"),
    "renormalize": (cmd_renormalize, "extract renormalizations and test their composed tables"),
    "potentials": (cmd_potentials, "potential multiplier and ledgers for gluing"),
    "realize-affine": (cmd_realize_affine, "build the affine interval model"),
    "realize-annuli": (cmd_realize_annuli, "build the round annuli model"),
    "combine": (cmd_combine, "boundary check plus renormalization certificates"),
    "spectral": (cmd_spectral, "subunit certificate and radius enclosure for a matrix"),
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="repelsys", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("document", help="JSON document, or the name of a bundled preset")
        sp.add_argument("--tol", type=float, default=1e-9, help="width of numeric enclosures")
        sp.add_argument("--out", help="write the result here instead of stdout")
        sp.add_argument("--format", choices=("json", "csv"),
                        help="output format for --depth plot data (default csv); other results are JSON")
        if name.startswith("realize"):
            sp.add_argument("--depth", type=int, help="emit depth-n components instead of the model")
        if name == "stabilize":
            sp.add_argument("--seed", help="comma separated curve ids (default: boundary multicurve)")
    return ap


def _emit(payload: dict | str, out: str | None) -> None:
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if not hasattr(args, "depth"):
        args.depth = None
    if args.depth is not None and args.depth < 0:
        _emit({"valid": False, "diagnostics": [Diagnostic("BadArgument", "--depth", "must be >= 0").to_dict()]}, None)
        return INVALID
    try:
        doc = load_document(args.document)
        payload, code = COMMANDS[args.command][0](doc, args)
    except DocumentError as exc:
        _emit({"valid": False, "diagnostics": [d.to_dict() for d in exc.diagnostics]}, None)
        return INVALID
    except (MissingSection, PuzzleError, TableError, InvalidWitness, NotConstantComplexity) as exc:
        _emit({"valid": False, "diagnostics": [Diagnostic(type(exc).__name__, "$", str(exc)).to_dict()]}, None)
        return INVALID
    _emit(payload, args.out)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
