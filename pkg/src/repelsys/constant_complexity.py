"""Systems of constant complexity and their renormalizations.

Every complex piece ``S`` should carry exactly one E-piece parallel to it:
one whose holes each cut off at most one boundary curve of ``S`` and no
marked point.  Sending ``S`` to the image of that E-piece defines a self map
of the complex pieces whose cycles are the renormalizations.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .curve_dynamics import (
    TAGS,
    ObstructionReport,
    Preimage,
    PullbackTable,
    TableError,
    TransitionMatrix,
    obstruction_verdict,
    transition_matrix,
)
from .puzzle import (
    EPieceEmbedding,
    PieceType,
    Presentation,
    PuzzleError,
    boundary_multicurve,
    classify_piece,
)
from .spectral import NotSubunit, Subunit, subunit_certificate


class NotConstantComplexity(PuzzleError):
    pass


class DegenerateRenormalization(PuzzleError):
    pass


def _is_parallel(e: EPieceEmbedding, p: Presentation) -> bool:
    host = p.piece(e.host)
    bset, mset = set(host.boundary), set(host.marked)
    return all(len(r.inside & bset) <= 1 and not (r.inside & mset) for r in e.boundary)


def parallel_piece(p: Presentation, piece: str) -> EPieceEmbedding | None:
    """The E-piece parallel to ``piece``, or ``None``.

    Raises :class:`NotConstantComplexity` when two E-pieces qualify.
    """
    found = [e for e in p.epieces_in(piece) if _is_parallel(e, p)]
    if len(found) > 1:
        raise NotConstantComplexity(
            f"piece {piece!r} has {len(found)} parallel E-pieces: {[e.id for e in found]}"
        )
    return found[0] if found else None


def complex_pieces(p: Presentation) -> list[str]:
    return [s.id for s in p.pieces if classify_piece(s) is PieceType.COMPLEX]


@dataclass(frozen=True)
class ComplexityReport:
    ok: bool
    parallel: Mapping[str, str | None]


def check_constant_complexity(p: Presentation) -> ComplexityReport:
    out = {}
    for s in complex_pieces(p):
        try:
            e = parallel_piece(p, s)
        except NotConstantComplexity:
            e = None
        out[s] = e.id if e is not None else None
    return ComplexityReport(all(v is not None for v in out.values()), out)


@dataclass(frozen=True)
class StarMap:
    """The induced map on complex pieces and its periodic cycles."""

    mapping: Mapping[str, str]
    cycles: tuple[tuple[str, ...], ...]

    def cycle_of(self, piece: str) -> tuple[str, ...]:
        for c in self.cycles:
            if piece in c:
                return c
        raise KeyError(piece)


def star_map(p: Presentation) -> StarMap:
    rep = check_constant_complexity(p)
    if not rep.ok:
        missing = [s for s, e in rep.parallel.items() if e is None]
        raise NotConstantComplexity(f"no unique parallel E-piece for {missing}")
    cset = set(rep.parallel)
    mapping = {}
    for s, eid in rep.parallel.items():
        img = p.epiece(eid).image
        if img not in cset:
            raise NotConstantComplexity(f"parallel piece of {s!r} maps onto {img!r}, which is not complex")
        mapping[s] = img
    cycles = []
    seen: set[str] = set()
    for s in sorted(mapping):
        x, path = s, []
        while x not in seen and x not in path:
            path.append(x)
            x = mapping[x]
        if x in path:
            cyc = path[path.index(x):]
            k = cyc.index(min(cyc))
            cycles.append(tuple(cyc[k:] + cyc[:k]))
        seen.update(path)
    return StarMap(mapping, tuple(sorted(cycles)))


# ---------------------------------------------------------------- renormalizations

@dataclass(frozen=True)
class BoundaryImage:
    """Boundary curve of a parallel E-piece homotopic to a piece boundary curve."""

    beta: str
    degree: int
    image: str


@dataclass(frozen=True)
class RenormDescriptor:
    cycle: tuple[str, ...]
    parallel_epieces: tuple[str, ...]
    marked: Mapping[str, tuple[str, ...]]
    boundaries: Mapping[str, tuple[str, ...]]
    correspondence: Mapping[str, BoundaryImage]
    step_table: PullbackTable
    composed_table: PullbackTable
    d_star: TransitionMatrix
    parallel_matrix: TransitionMatrix

    @property
    def period(self) -> int:
        return len(self.cycle)

    @property
    def boundary_curves(self) -> tuple[str, ...]:
        return tuple(self.correspondence)


def compose_tables(first: PullbackTable, second: PullbackTable) -> PullbackTable:
    """Pull back by ``first`` and then by ``second``.

    Degrees multiply along chains.  Null and peripheral preimages stay so
    under further pullback and carry no weight in a transition matrix, so
    they are not propagated.
    """
    rows = {}
    for c in first.universe:
        out = []
        for r in first.row(c):
            if r.target in TAGS:
                continue
            for r2 in second.row(r.target):
                if r2.target in TAGS:
                    continue
                out.append(Preimage(r2.target, r.degree * r2.degree))
        rows[c] = tuple(out)
    return PullbackTable(first.universe, rows, first.classes)


def _cycle_universe(p: Presentation, t: PullbackTable, cycle: Sequence[str]) -> tuple[str, ...]:
    out = []
    cset = set(cycle)
    for c in t.universe:
        piece = t.piece_of(c)
        if piece is None:
            try:
                piece = p.owner(c).id
            except PuzzleError:
                continue
        if piece in cset:
            out.append(c)
    return tuple(out)


def extract_renormalization(p: Presentation, t: PullbackTable, cycle: Sequence[str]) -> RenormDescriptor:
    """Collect the data of the renormalization along one cycle of complex pieces.

    The single-step table keeps only preimages through the parallel
    E-pieces that land back on curves of the cycle; the composed table is its
    ``period``-fold composition, i.e. the pullback by the first return map.
    """
    cycle = tuple(cycle)
    eps = []
    for k, s in enumerate(cycle):
        e = parallel_piece(p, s)
        if e is None:
            raise NotConstantComplexity(f"piece {s!r} has no parallel E-piece")
        nxt = cycle[(k + 1) % len(cycle)]
        if e.image != nxt:
            raise NotConstantComplexity(f"{e.id!r} maps onto {e.image!r}, expected {nxt!r}")
        eps.append(e)
    corr = {}
    for s, e in zip(cycle, eps):
        piece = p.piece(s)
        for g in piece.boundary:
            recs = [r for r in e.boundary if g in r.inside]
            if not recs:
                raise DegenerateRenormalization(f"{e.id!r} does not cut off boundary curve {g!r} of {s!r}")
            r = recs[0]
            corr[g] = BoundaryImage(r.curve, r.degree, r.image)

    ids = _cycle_universe(p, t, cycle)
    step = t.restrict(ids, {e.id for e in eps})
    composed = step
    for _ in range(len(cycle) - 1):
        composed = compose_tables(composed, step)
    bcurves = tuple(corr)
    return RenormDescriptor(
        cycle=cycle,
        parallel_epieces=tuple(e.id for e in eps),
        marked={s: tuple(sorted(e.marked_points(p.piece(s)))) for s, e in zip(cycle, eps)},
        boundaries={s: p.piece(s).boundary for s in cycle},
        correspondence=corr,
        step_table=step,
        composed_table=composed,
        d_star=transition_matrix(bcurves, t),
        parallel_matrix=transition_matrix(bcurves, step),
    )


def renormalizations(p: Presentation, t: PullbackTable) -> list[RenormDescriptor]:
    return [extract_renormalization(p, t, c) for c in star_map(p).cycles]


def renormalized_obstruction_check(d: RenormDescriptor, tol: float = 1e-9) -> ObstructionReport:
    return obstruction_verdict(d.composed_table, tol)


# ---------------------------------------------------------------- boundary obstruction

@dataclass(frozen=True)
class BoundaryVerdict:
    obstructed: bool
    curves: tuple[str, ...]
    matrix: TransitionMatrix
    certificate: Subunit | NotSubunit | None


def boundary_obstruction_check(p: Presentation, t: PullbackTable, tol: float = 1e-9) -> BoundaryVerdict:
    """Test the multicurve of complex and annular boundaries for an obstruction."""
    y = boundary_multicurve(p)
    missing = [c for c in y.ids if c not in t.universe]
    if missing:
        raise TableError(f"pullback table does not cover {missing}")
    w = transition_matrix(y.ids, t)
    if not y.ids:
        return BoundaryVerdict(False, (), w, None)
    cert = subunit_certificate(w.matrix, tol)
    return BoundaryVerdict(isinstance(cert, NotSubunit), y.ids, w, cert)


# ---------------------------------------------------------------- analytization

CERT_KINDS = ("pcf-unobstructed", "holomorphic-steps")


@dataclass(frozen=True)
class RenormCertificate:
    cycle: tuple[str, ...]
    kind: str

    def __post_init__(self):
        object.__setattr__(self, "cycle", tuple(self.cycle))
        if self.kind not in CERT_KINDS:
            raise ValueError(f"unknown certificate kind {self.kind!r}; expected one of {CERT_KINDS}")

    def matches(self, cycle: Sequence[str]) -> bool:
        return set(self.cycle) == set(cycle)


@dataclass(frozen=True)
class RenormBranch:
    cycle: tuple[str, ...]
    status: str
    branch: str
    table_verdict: str | None


@dataclass(frozen=True)
class AnalytizationReport:
    status: str
    boundary: BoundaryVerdict
    branches: tuple[RenormBranch, ...] = field(default_factory=tuple)


def analytization_verdict(
    p: Presentation,
    t: PullbackTable,
    certificates: Iterable[RenormCertificate] = (),
    tol: float = 1e-9,
) -> AnalytizationReport:
    """Decide whether the system can be made holomorphic.

    Returns ``"pass"``, ``"fail"`` or ``"indeterminate"``.  A boundary
    obstruction fails at once.  Each renormalization then needs either a
    user certificate that it has no obstruction, or a holomorphic-steps
    assertion backed by a clean check of the composed table.  A composed
    table that does show an obstruction fails the renormalization whatever
    the certificates say.
    """
    certificates = list(certificates)
    bv = boundary_obstruction_check(p, t, tol)
    if bv.obstructed:
        return AnalytizationReport("fail", bv)
    branches = []
    for d in renormalizations(p, t):
        kinds = {c.kind for c in certificates if c.matches(d.cycle)}
        table = None
        if d.composed_table.universe and d.composed_table.closed:
            table = renormalized_obstruction_check(d, tol)
        tv = table.verdict if table is not None else None
        if table is not None and table.obstructed:
            branches.append(RenormBranch(d.cycle, "fail", "composed-table", tv))
        elif "pcf-unobstructed" in kinds:
            branches.append(RenormBranch(d.cycle, "pass", "pcf-unobstructed", tv))
        elif "holomorphic-steps" in kinds and table is not None:
            branches.append(RenormBranch(d.cycle, "pass", "holomorphic-steps", tv))
        else:
            branches.append(RenormBranch(d.cycle, "indeterminate", "none", tv))
    statuses = {b.status for b in branches}
    status = "fail" if "fail" in statuses else "indeterminate" if "indeterminate" in statuses else "pass"
    return AnalytizationReport(status, bv, tuple(branches))

