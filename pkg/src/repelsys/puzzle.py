"""Puzzle pieces, curve classes and the combinatorial presentation of a system.

A piece is a sphere with a number of boundary curves (each bounding a disc
outside the piece) and a number of marked points.  On a genus-zero surface a
simple closed curve is determined up to homotopy by how it splits the piece's
objects (boundary curves and marked points) into two groups, so a curve class
is stored as an unordered bipartition of those objects.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Iterator, Mapping, Sequence


class PuzzleError(ValueError):
    """Base class for malformed puzzle data."""


class UnknownObject(PuzzleError):
    pass


class SphereNotAllowed(PuzzleError):
    pass


class IntegrityError(PuzzleError):
    pass


class PlanarityError(PuzzleError):
    pass


@dataclass(frozen=True)
class Piece:
    id: str
    boundary: tuple[str, ...]
    marked: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "boundary", tuple(self.boundary))
        object.__setattr__(self, "marked", tuple(self.marked))

    @property
    def objects(self) -> frozenset[str]:
        return frozenset(self.boundary) | frozenset(self.marked)


class CurveKind(str, Enum):
    NULL_HOMOTOPIC = "NullHomotopic"
    PERIPHERAL = "Peripheral"
    BOUNDARY_PARALLEL = "BoundaryParallel"
    ESSENTIAL = "Essential"


@dataclass(frozen=True)
class Classification:
    kind: CurveKind
    ref: str | None = None

    @property
    def non_peripheral(self) -> bool:
        """Neither null-homotopic nor peripheral, i.e. allowed in a multicurve."""
        return self.kind in (CurveKind.BOUNDARY_PARALLEL, CurveKind.ESSENTIAL)


def _side_key(side: Iterable[str]) -> tuple[str, ...]:
    return tuple(sorted(side))


@dataclass(frozen=True)
class CurveClass:
    """Homotopy class of a simple closed curve inside one piece.

    ``side`` is the lexicographically smaller of the two groups of objects
    the curve separates; ``other`` is the rest.  Build instances with
    :meth:`of` so the canonical form is enforced.
    """

    piece: str
    side: frozenset[str]
    other: frozenset[str]

    @classmethod
    def of(cls, piece: Piece, side: Iterable[str]) -> "CurveClass":
        side = frozenset(side)
        unknown = side - piece.objects
        if unknown:
            raise UnknownObject(f"{sorted(unknown)} are not objects of piece {piece.id!r}")
        other = piece.objects - side
        if _side_key(other) < _side_key(side):
            side, other = other, side
        return cls(piece.id, side, other)

    def sort_key(self) -> tuple:
        return (self.piece, _side_key(self.side), _side_key(self.other))

    def crosses(self, other: "CurveClass") -> bool:
        """True when the two classes cannot be realised disjointly."""
        if self.piece != other.piece:
            return False
        a, ac, b, bc = self.side, self.other, other.side, other.other
        return bool(a & b) and bool(a & bc) and bool(ac & b) and bool(ac & bc)

    def to_dict(self) -> dict:
        return {"piece": self.piece, "side": _side_key(self.side)}


def classify_curve(piece: Piece, side: Iterable[str]) -> Classification:
    """Classify the curve splitting ``piece`` into ``side`` and its complement.

    The answer does not depend on which of the two groups is passed.  Checks
    run from most to least degenerate, so on a disc with one marked point
    the boundary curve counts as peripheral.
    """
    c = CurveClass.of(piece, side)
    groups = (c.side, c.other)
    if any(not g for g in groups):
        return Classification(CurveKind.NULL_HOMOTOPIC)
    marked = set(piece.marked)
    singles_m = sorted(next(iter(g)) for g in groups if len(g) == 1 and next(iter(g)) in marked)
    if singles_m:
        return Classification(CurveKind.PERIPHERAL, singles_m[0])
    singles_b = sorted(next(iter(g)) for g in groups if len(g) == 1)
    if singles_b:
        return Classification(CurveKind.BOUNDARY_PARALLEL, singles_b[0])
    return Classification(CurveKind.ESSENTIAL)


class PieceType(str, Enum):
    DISC = "O"
    ANNULUS = "A"
    PUNCTURED_DISC = "R"
    COMPLEX = "C"


def classify_piece(piece: Piece) -> PieceType:
    nb, nm = len(piece.boundary), len(piece.marked)
    if nb == 0:
        raise SphereNotAllowed(f"piece {piece.id!r} has no boundary curve")
    if nb == 1 and nm == 0:
        return PieceType.DISC
    if nb == 2 and nm == 0:
        return PieceType.ANNULUS
    if nb == 1 and nm == 1:
        return PieceType.PUNCTURED_DISC
    return PieceType.COMPLEX


# ---------------------------------------------------------------- multicurves

@dataclass(frozen=True)
class Diagnostic:
    code: str
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.code} at {self.path}: {self.message}"

    def to_dict(self) -> dict:
        return {"code": self.code, "path": self.path, "message": self.message}


@dataclass(frozen=True)
class MulticurveCheck:
    ok: bool
    diagnostics: tuple[Diagnostic, ...]

    def __bool__(self) -> bool:
        return self.ok


def is_multicurve(classes: Sequence[CurveClass], pieces: Mapping[str, Piece]) -> MulticurveCheck:
    """Check that ``classes`` can be realised as a multicurve.

    Every class must be non-peripheral (essential or parallel to a boundary
    curve of its piece), no class may appear twice, and no two classes in
    the same piece may cross.
    """
    diags = []
    seen = {}
    for k, c in enumerate(classes):
        path = f"[{k}]"
        if c.piece not in pieces:
            diags.append(Diagnostic("UnknownPiece", path, f"piece {c.piece!r} does not exist"))
            continue
        kind = classify_curve(pieces[c.piece], c.side)
        if not kind.non_peripheral:
            diags.append(Diagnostic("NotEssential", path, f"class is {kind.kind.value}"))
        if c in seen:
            diags.append(Diagnostic("Duplicate", path, f"same class as [{seen[c]}]"))
        else:
            seen[c] = k
    uniq = list(seen)
    for a, b in itertools.combinations(uniq, 2):
        if a.crosses(b):
            diags.append(Diagnostic("Crossing", f"[{seen[a]}],[{seen[b]}]", "classes intersect"))
    return MulticurveCheck(not diags, tuple(diags))


def essential_classes(piece: Piece) -> list[CurveClass]:
    """All essential classes of a piece (both groups of size at least two)."""
    objs = sorted(piece.objects)
    out = set()
    for r in range(2, len(objs) - 1):
        for side in itertools.combinations(objs, r):
            out.add(CurveClass.of(piece, side))
    return sorted(out, key=CurveClass.sort_key)


# ---------------------------------------------------------------- embeddings

@dataclass(frozen=True)
class BoundaryRecord:
    """One boundary curve of an E-piece.

    ``inside`` lists the host objects (and possibly other E-piece ids in the
    same host) lying in the complementary disc this curve cuts off from the
    E-piece.  ``image`` is the boundary curve of the image piece it covers,
    with covering degree ``degree``.
    """

    curve: str
    image: str
    degree: int
    inside: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "inside", frozenset(self.inside))


@dataclass(frozen=True)
class EPieceEmbedding:
    id: str
    host: str
    image: str
    degree: int
    boundary: tuple[BoundaryRecord, ...]
    absorbed: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "boundary", tuple(self.boundary))
        object.__setattr__(self, "absorbed", frozenset(self.absorbed))

    def record(self, curve: str) -> BoundaryRecord:
        for r in self.boundary:
            if r.curve == curve:
                return r
        raise KeyError(curve)

    def hidden(self) -> frozenset[str]:
        """Everything lying in some complementary disc."""
        return frozenset().union(*(r.inside for r in self.boundary))

    def marked_points(self, host: Piece) -> frozenset[str]:
        return frozenset(host.marked) - self.hidden()


@dataclass(frozen=True)
class Flags:
    pcf_asserted: bool = False
    orbifold_not_2222: bool = True


@dataclass(frozen=True)
class Presentation:
    pieces: tuple[Piece, ...]
    epieces: tuple[EPieceEmbedding, ...]
    marked_map: Mapping[str, str] = field(default_factory=dict)
    flags: Flags = Flags()

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        object.__setattr__(self, "epieces", tuple(self.epieces))
        object.__setattr__(self, "marked_map", dict(self.marked_map))

    def piece(self, pid: str) -> Piece:
        for p in self.pieces:
            if p.id == pid:
                return p
        raise IntegrityError(f"no piece {pid!r}")

    def epiece(self, eid: str) -> EPieceEmbedding:
        for e in self.epieces:
            if e.id == eid:
                return e
        raise IntegrityError(f"no E-piece {eid!r}")

    @property
    def piece_map(self) -> dict[str, Piece]:
        return {p.id: p for p in self.pieces}

    def epieces_in(self, host: str) -> list[EPieceEmbedding]:
        return [e for e in self.epieces if e.host == host]

    def owner(self, curve: str) -> Piece:
        """Piece whose boundary contains ``curve``."""
        for p in self.pieces:
            if curve in p.boundary:
                return p
        raise IntegrityError(f"{curve!r} is not a boundary curve of any piece")

    def boundary_class(self, curve: str) -> CurveClass:
        return CurveClass.of(self.owner(curve), [curve])

    def representative(self, curve: str) -> str:
        """Canonical curve id for the class of a boundary curve.

        Both boundary curves of an annulus are homotopic; the first one
        listed stands for the pair.
        """
        p = self.owner(curve)
        if classify_piece(p) is PieceType.ANNULUS:
            return p.boundary[0]
        return curve


def filled_in(e: EPieceEmbedding, protected: Iterable[str]) -> EPieceEmbedding:
    """Fill every hole of ``e`` that contains nothing from ``protected``.

    Filled holes disappear from the boundary.  Whatever sat inside them
    (other E-pieces, unprotected objects) is recorded in ``absorbed``.
    """
    protected = frozenset(protected)
    keep, swallowed = [], set(e.absorbed)
    for r in e.boundary:
        if r.inside & protected:
            keep.append(r)
        else:
            swallowed |= r.inside
    return replace(e, boundary=tuple(keep), absorbed=frozenset(swallowed))


def compactly_inside(inner: EPieceEmbedding, outer: EPieceEmbedding, objects: Iterable[str]) -> bool:
    """Combinatorial version of ``inner`` being compactly contained in ``outer``.

    Every complementary disc of ``outer`` has to sit inside a complementary
    disc of ``inner``; only the ``objects`` listed are used to compare discs.
    """
    objects = frozenset(objects)
    return all(
        any((h.inside & objects) <= (g.inside & objects) for g in inner.boundary)
        for h in outer.boundary
    )


# ---------------------------------------------------------------- boundary multicurve

@dataclass(frozen=True)
class Multicurve:
    ids: tuple[str, ...]
    classes: tuple[CurveClass, ...]

    def __iter__(self) -> Iterator[str]:
        return iter(self.ids)

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, cid: object) -> bool:
        return cid in self.ids


def boundary_multicurve(p: Presentation) -> Multicurve:
    """Boundary curves of the complex pieces plus one curve per annulus.

    Disc pieces with at most one marked point contribute nothing since their
    boundary is null-homotopic or peripheral.
    """
    ids = []
    for piece in p.pieces:
        kind = classify_piece(piece)
        if kind is PieceType.COMPLEX:
            ids.extend(piece.boundary)
        elif kind is PieceType.ANNULUS:
            ids.append(piece.boundary[0])
    return Multicurve(tuple(ids), tuple(p.boundary_class(c) for c in ids))


# ---------------------------------------------------------------- validation

def _crossing(a: frozenset, b: frozenset, universe: frozenset) -> bool:
    ac, bc = universe - a, universe - b
    return bool(a & b) and bool(a & bc) and bool(ac & b) and bool(ac & bc)


def validate_presentation(p: Presentation) -> list[Diagnostic]:
    """Structural checks on a presentation; an empty list means well formed."""
    diags: list[Diagnostic] = []
    add = lambda code, path, msg: diags.append(Diagnostic(code, path, msg))  # noqa: E731

    ids: dict[str, str] = {}
    for i, piece in enumerate(p.pieces):
        for oid in (piece.id, *piece.boundary, *piece.marked):
            if oid in ids:
                add("DuplicateId", f"pieces[{i}]", f"{oid!r} already used at {ids[oid]}")
            else:
                ids[oid] = f"pieces[{i}]"
        if not piece.boundary:
            add("SphereNotAllowed", f"pieces[{i}]", f"piece {piece.id!r} has no boundary curve")
    for i, e in enumerate(p.epieces):
        for oid in (e.id, *(r.curve for r in e.boundary)):
            if oid in ids:
                add("DuplicateId", f"epieces[{i}]", f"{oid!r} already used at {ids[oid]}")
            else:
                ids[oid] = f"epieces[{i}]"
    pieces = {piece.id: piece for piece in p.pieces}

    for i, e in enumerate(p.epieces):
        path = f"epieces[{i}]"
        host, image = pieces.get(e.host), pieces.get(e.image)
        if host is None:
            add("IntegrityError", path + ".host", f"unknown piece {e.host!r}")
        if image is None:
            add("IntegrityError", path + ".image", f"unknown piece {e.image!r}")
        if e.degree < 1:
            add("DegreeError", path + ".degree", "degree must be a positive integer")
        if host is None or image is None:
            continue
        siblings = {x.id for x in p.epieces if x.host == e.host and x.id != e.id}
        allowed = host.objects | siblings
        hidden: set[str] = set()
        for k, r in enumerate(e.boundary):
            rp = f"{path}.boundary[{k}]"
            if r.image not in image.boundary:
                add("IntegrityError", rp + ".image", f"{r.image!r} is not a boundary curve of {image.id!r}")
            if not 1 <= r.degree <= max(e.degree, 1):
                add("DegreeError", rp + ".degree", f"covering degree {r.degree} outside 1..{e.degree}")
            bad = r.inside - allowed
            if bad:
                add("IntegrityError", rp + ".inside", f"unknown objects {sorted(bad)}")
            if r.inside & hidden:
                add("PlanarityError", rp + ".inside", f"{sorted(r.inside & hidden)} lie in two holes")
            hidden |= r.inside
        missing = set(host.boundary) - hidden
        if missing:
            add("CompactnessError", path, f"host boundary {sorted(missing)} not cut off by any hole")
        for g in image.boundary:
            tot = sum(r.degree for r in e.boundary if r.image == g)
            if tot != e.degree:
                add("DegreeError", path, f"preimages of {g!r} have total degree {tot}, expected {e.degree}")
        # A branched covering can only lower the Euler characteristic.
        chi_e, chi_s = 2 - len(e.boundary), 2 - len(image.boundary)
        if e.degree * chi_s < chi_e:
            add("DegreeError", path, f"Euler characteristic {chi_e} too large for degree {e.degree}")
        for m in e.marked_points(host):
            if m not in p.marked_map:
                add("MarkedMapError", path, f"marked point {m!r} has no image")
            elif p.marked_map[m] not in image.marked:
                add("MarkedMapError", path, f"{m!r} maps to {p.marked_map[m]!r}, not a marked point of {image.id!r}")

    known_marked = {m for piece in p.pieces for m in piece.marked}
    for m in p.marked_map:
        if m not in known_marked:
            add("MarkedMapError", f"marked_map.{m}", "not a marked point")

    # Holes of different E-pieces in one host must nest or be disjoint.
    for host in p.pieces:
        objs = host.objects
        inside = [(e.id, r.curve, r.inside & objs) for e in p.epieces if e.host == host.id for r in e.boundary]
        for (e1, c1, a), (e2, c2, b) in itertools.combinations(inside, 2):
            if e1 != e2 and _crossing(a, b, objs):
                add("PlanarityError", f"pieces.{host.id}", f"holes {c1!r} of {e1!r} and {c2!r} of {e2!r} cross")
    return diags


def require_valid(p: Presentation) -> None:
    """Raise the first structural problem found, if any."""
    diags = validate_presentation(p)
    if not diags:
        return
    d = diags[0]
    cls = {"PlanarityError": PlanarityError, "SphereNotAllowed": SphereNotAllowed}.get(d.code, IntegrityError)
    raise cls(str(d))
