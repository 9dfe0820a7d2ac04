"""Pullback tables of curve classes and the Thurston-type obstruction search.

A pullback table lists, for every curve in a finite universe, the preimage
components of that curve under the map: each preimage is homotopic to some
curve of the universe, or is null-homotopic (``NULL``), or peripheral
(``PERIPHERAL``), and covers the curve with some degree.  All answers
derived from a table are only as complete as its universe.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import networkx as nx

from .puzzle import CurveClass, CurveKind, Presentation, boundary_multicurve, classify_curve
from .spectral import (
    Enclosure,
    NonNegMatrix,
    NotSubunit,
    Subunit,
    irreducible_blocks,
    spectral_radius,
    subunit_certificate,
)

NULL = "NULL"
PERIPHERAL = "PERIPHERAL"
TAGS = frozenset({NULL, PERIPHERAL})
SCOPE = "within-universe"


class TableError(ValueError):
    pass


class TableNotClosed(TableError):
    pass


@dataclass(frozen=True)
class Preimage:
    target: str
    degree: int
    epiece: str | None = None

    def __post_init__(self):
        if isinstance(self.degree, bool) or not isinstance(self.degree, int) or self.degree < 1:
            raise TableError(f"degree must be a positive integer, got {self.degree!r}")


@dataclass(frozen=True)
class PullbackTable:
    """Finite universe of curve ids together with their preimage lists.

    ``classes`` optionally maps curve ids to their :class:`CurveClass`; it is
    needed to tell which curves live in which piece and whether two curves
    of the universe cross.
    """

    universe: tuple[str, ...]
    rows: Mapping[str, tuple[Preimage, ...]]
    classes: Mapping[str, CurveClass] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "universe", tuple(self.universe))
        object.__setattr__(self, "rows", {k: tuple(v) for k, v in self.rows.items()})
        object.__setattr__(self, "classes", dict(self.classes))
        if len(set(self.universe)) != len(self.universe):
            raise TableError("universe lists a curve twice")
        if TAGS & set(self.universe):
            raise TableError("NULL and PERIPHERAL are reserved")
        members = set(self.universe)
        for cid, recs in self.rows.items():
            if cid not in members:
                raise TableError(f"row {cid!r} is not in the universe")
            for r in recs:
                if r.target not in members and r.target not in TAGS:
                    raise TableNotClosed(f"preimage of {cid!r} lands on {r.target!r}, outside the universe")

    def row(self, cid: str) -> tuple[Preimage, ...]:
        try:
            return self.rows[cid]
        except KeyError:
            if cid in self.universe:
                raise TableNotClosed(f"no pullback row for {cid!r}") from None
            raise TableError(f"{cid!r} is not in the universe") from None

    @property
    def closed(self) -> bool:
        return all(c in self.rows for c in self.universe)

    def piece_of(self, cid: str) -> str | None:
        c = self.classes.get(cid)
        return c.piece if c is not None else None

    def restrict(self, keep: Sequence[str], epieces: set[str] | None = None) -> "PullbackTable":
        """Sub-table on ``keep``; records leaving ``keep`` are dropped.

        With ``epieces`` given, records tagged with another E-piece are
        dropped too (untagged records are kept).
        """
        keep = tuple(keep)
        ks = set(keep)
        rows = {}
        for c in keep:
            rows[c] = tuple(
                r for r in self.row(c)
                if (r.target in ks or r.target in TAGS)
                and (epieces is None or r.epiece is None or r.epiece in epieces)
            )
        return PullbackTable(keep, rows, {c: self.classes[c] for c in keep if c in self.classes})


@dataclass(frozen=True)
class TransitionMatrix:
    """Matrix indexed by curve ids: entry ``(i, j)`` sums ``1/deg`` over the
    preimages of curve ``j`` that are homotopic to curve ``i``."""

    index: tuple[str, ...]
    matrix: NonNegMatrix

    def entry(self, row: str, col: str) -> Fraction:
        return self.matrix[self.index.index(row), self.index.index(col)]

    def restrict(self, ids: Sequence[str]) -> "TransitionMatrix":
        pos = [self.index.index(c) for c in ids]
        return TransitionMatrix(tuple(ids), self.matrix.submatrix(pos))


def transition_matrix(gamma: Sequence[str], t: PullbackTable) -> TransitionMatrix:
    gamma = tuple(dict.fromkeys(gamma))
    pos = {c: k for k, c in enumerate(gamma)}
    m = [[Fraction(0)] * len(gamma) for _ in gamma]
    for j, c in enumerate(gamma):
        for r in t.row(c):
            i = pos.get(r.target)
            if i is not None:
                m[i][j] += Fraction(1, r.degree)
    return TransitionMatrix(gamma, NonNegMatrix(tuple(tuple(row) for row in m)))


def pullback(gamma: Sequence[str], t: PullbackTable) -> tuple[str, ...]:
    """Curves of the universe homotopic to some preimage of a curve in ``gamma``."""
    hit = {r.target for c in gamma for r in t.row(c) if r.target not in TAGS}
    return tuple(c for c in t.universe if c in hit)


@dataclass(frozen=True)
class Stabilization:
    curves: tuple[str, ...]
    steps: int


def stabilize(gamma: Sequence[str], t: PullbackTable) -> Stabilization:
    """Grow ``gamma`` by its pullbacks until nothing new appears.

    ``steps`` counts the rounds that added at least one curve, so it never
    exceeds the size of the universe.
    """
    cur = set(gamma)
    unknown = cur - set(t.universe)
    if unknown:
        raise TableError(f"{sorted(unknown)} are not in the universe")
    steps = 0
    while True:
        new = set(pullback(sorted(cur, key=t.universe.index), t)) - cur
        if not new:
            break
        cur |= new
        steps += 1
    return Stabilization(tuple(c for c in t.universe if c in cur), steps)


def laminar_families(t: PullbackTable) -> list[tuple[str, ...]]:
    """Maximal sub-families of the universe whose curves pairwise do not cross.

    Without class information the universe is taken to be a multicurve.
    """
    u = t.universe
    if not u or any(c not in t.classes for c in u):
        return [u]
    g = nx.Graph()
    g.add_nodes_from(u)
    for a in range(len(u)):
        for b in range(a + 1, len(u)):
            if not t.classes[u[a]].crosses(t.classes[u[b]]):
                g.add_edge(u[a], u[b])
    fams = [tuple(c for c in u if c in clique) for clique in nx.find_cliques(g)]
    return sorted(fams, key=lambda f: [u.index(c) for c in f])


@dataclass(frozen=True)
class ObstructionReport:
    """Outcome of :func:`obstruction_verdict`.

    A negative answer only covers multicurves built from the universe, which
    is what ``scope`` records.
    """

    obstructed: bool
    universe_size: int
    multicurve: tuple[str, ...]
    matrix: TransitionMatrix | None
    certificate: Subunit | NotSubunit | None
    stabilized: tuple[str, ...]
    stabilized_matrix: TransitionMatrix | None
    radius: Enclosure
    families_checked: int
    scope: str = SCOPE

    @property
    def verdict(self) -> str:
        return "Obstructed" if self.obstructed else f"Unobstructed-{SCOPE}"


def obstruction_verdict(t: PullbackTable, tol: float = 1e-9) -> ObstructionReport:
    """Search the universe for a multicurve with leading eigenvalue at least one.

    The transition matrix of each maximal laminar family is split into
    irreducible diagonal blocks and every block gets the exact subunit test.
    Any obstruction contains an irreducible one, and the leading eigenvalue
    of a family dominates that of its sub-families, so this search is
    complete for the given universe.
    """
    fams = laminar_families(t)
    worst = None
    for fam in fams:
        w = transition_matrix(fam, t)
        for blk in irreducible_blocks(w.matrix):
            ids = tuple(fam[i] for i in blk)
            sub = w.restrict(ids)
            cert = subunit_certificate(sub.matrix, tol)
            if isinstance(cert, NotSubunit):
                stab = stabilize(ids, t)
                return ObstructionReport(
                    obstructed=True,
                    universe_size=len(t.universe),
                    multicurve=ids,
                    matrix=sub,
                    certificate=cert,
                    stabilized=stab.curves,
                    stabilized_matrix=transition_matrix(stab.curves, t),
                    radius=spectral_radius(sub.matrix, tol),
                    families_checked=len(fams),
                )
        enc = spectral_radius(w.matrix, tol)
        if worst is None or enc.hi > worst[1].hi:
            worst = (w, enc)
    w, enc = worst
    return ObstructionReport(
        obstructed=False,
        universe_size=len(t.universe),
        multicurve=(),
        matrix=w,
        certificate=subunit_certificate(w.matrix, tol),
        stabilized=(),
        stabilized_matrix=None,
        radius=enc,
        families_checked=len(fams),
    )


def degree_budget_violations(t: PullbackTable, degrees: Mapping[str, int]) -> list[str]:
    """Rows whose preimages inside one E-piece exceed that E-piece's degree."""
    out = []
    for c in t.universe:
        per: dict[str, int] = {}
        for r in t.rows.get(c, ()):
            if r.epiece is not None:
                per[r.epiece] = per.get(r.epiece, 0) + r.degree
        for e, tot in per.items():
            if e in degrees and tot > degrees[e]:
                out.append(f"{c}: preimages in {e} have total degree {tot} > {degrees[e]}")
    return out


def derive_boundary_table(p: Presentation, extra: Mapping[str, CurveClass] | None = None) -> PullbackTable:
    """Read the pullback table of the boundary multicurve off the E-pieces.

    Each boundary curve of an E-piece is classified in its host by the
    objects its hole cuts off.  ``extra`` names any essential classes those
    holes may produce; they become universe members without rows.
    """
    extra = dict(extra or {})
    by_class = {c: cid for cid, c in extra.items()}
    y = boundary_multicurve(p)
    rows: dict[str, list[Preimage]] = {c: [] for c in y.ids}
    for e in p.epieces:
        host = p.piece(e.host)
        for r in e.boundary:
            if r.image not in rows:
                continue
            side = r.inside & host.objects
            kind = classify_curve(host, side)
            if kind.kind is CurveKind.NULL_HOMOTOPIC:
                target = NULL
            elif kind.kind is CurveKind.PERIPHERAL:
                target = PERIPHERAL
            elif kind.kind is CurveKind.BOUNDARY_PARALLEL:
                target = p.representative(kind.ref)
            else:
                cls = CurveClass.of(host, side)
                if cls not in by_class:
                    raise TableNotClosed(f"hole {r.curve!r} of {e.id!r} is an essential class outside the universe")
                target = by_class[cls]
            rows[r.image].append(Preimage(target, r.degree, e.id))
    classes = {c: p.boundary_class(c) for c in y.ids}
    classes.update(extra)
    universe = tuple(y.ids) + tuple(c for c in extra if c not in rows)
    return PullbackTable(universe, rows, classes)
