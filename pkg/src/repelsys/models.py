"""Explicit models realising a subunit transition matrix.

Two families are built from a positive vector ``v`` with ``D v < v``:

* affine interval models, where interval ``i`` has length ``v_i`` and each
  branch is an affine map of slope ``+-d``;
* round annuli models, where annulus ``i`` is ``{exp(-v_i) <= |z| <= 1}``
  and each branch is ``z -> c z^(+-d)``.

Annuli are handled in the depth coordinate ``t = -log|z|``, in which every
branch is again affine, so all moduli stay exact rationals.  Radii only
appear as floats when rendering.

The module also carries the potential bookkeeping used when gluing models
together, and a modulus calculator for rings bounded by two round circles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .constant_complexity import RenormDescriptor
from .curve_dynamics import TransitionMatrix
from .spectral import NonNegMatrix, NotSubunit, Subunit, subunit_certificate, to_rational


class InvalidSpec(ValueError):
    pass


class ModelCorrupt(ValueError):
    pass


class InvalidWitness(ValueError):
    pass


class RingError(ValueError):
    pass


class ObstructionError(Exception):
    """The transition matrix is not subunit, so no model exists."""

    def __init__(self, certificate: NotSubunit, matrix: NonNegMatrix):
        self.certificate = certificate
        self.matrix = matrix
        super().__init__(f"transition matrix has spectral radius {certificate.relation}")


# ---------------------------------------------------------------- specs

@dataclass(frozen=True)
class Branch:
    """One branch from object ``source`` onto object ``target``.

    ``reverse`` flips orientation: for intervals the map is decreasing, for
    annuli the outer boundary goes to the inner one.
    """

    source: int
    target: int
    degree: int
    reverse: bool = False

    def __post_init__(self):
        if isinstance(self.degree, bool) or not isinstance(self.degree, int) or self.degree < 1:
            raise InvalidSpec(f"degree must be a positive integer, got {self.degree!r}")


@dataclass(frozen=True)
class ModelSpec:
    """``k`` objects and their branches, listed in placement order per source."""

    k: int
    branches: tuple[Branch, ...]

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))
        if self.k < 1:
            raise InvalidSpec("need at least one object")
        for b in self.branches:
            if not (0 <= b.source < self.k and 0 <= b.target < self.k):
                raise InvalidSpec(f"branch {b} refers to an object outside 0..{self.k - 1}")

    def matrix(self) -> NonNegMatrix:
        m = [[Fraction(0)] * self.k for _ in range(self.k)]
        for b in self.branches:
            m[b.source][b.target] += Fraction(1, b.degree)
        return NonNegMatrix(tuple(tuple(r) for r in m))

    def branches_from(self, i: int) -> list[Branch]:
        return [b for b in self.branches if b.source == i]


AffineSpec = ModelSpec
AnnuliSpec = ModelSpec


# ---------------------------------------------------------------- layout

@dataclass(frozen=True)
class PlacedBranch:
    """A branch placed on ``[lo, hi]`` inside its source with map ``scale * x + offset``."""

    branch: Branch
    lo: Fraction
    hi: Fraction
    scale: Fraction
    offset: Fraction

    def __call__(self, x: Fraction) -> Fraction:
        return self.scale * x + self.offset

    def inverse(self, y: Fraction) -> Fraction:
        return (y - self.offset) / self.scale


def _lay_out(spec: ModelSpec, lengths: Sequence[Fraction], starts: Sequence[Fraction]):
    """Place every branch with equal gaps; returns placed branches and gap sizes."""
    placed, gaps = [], []
    for i in range(spec.k):
        brs = spec.branches_from(i)
        used = sum((lengths[b.target] / b.degree for b in brs), Fraction(0))
        gap = (lengths[i] - used) / (len(brs) + 1)
        gaps.append(gap)
        x = starts[i] + gap
        for b in brs:
            w = lengths[b.target] / b.degree
            lo, hi = x, x + w
            a0, a1 = starts[b.target], starts[b.target] + lengths[b.target]
            if b.reverse:
                scale = Fraction(-b.degree)
                offset = a1 - scale * lo
            else:
                scale = Fraction(b.degree)
                offset = a0 - scale * lo
            placed.append(PlacedBranch(b, lo, hi, scale, offset))
            x = hi + gap
    return tuple(placed), tuple(gaps)


def _witness(spec: ModelSpec) -> tuple[Fraction, ...]:
    d = spec.matrix()
    cert = subunit_certificate(d)
    if isinstance(cert, NotSubunit):
        raise ObstructionError(cert, d)
    return cert.witness


@dataclass(frozen=True)
class AffineModel:
    spec: ModelSpec
    starts: tuple[Fraction, ...]
    lengths: tuple[Fraction, ...]
    branches: tuple[PlacedBranch, ...]
    gaps: tuple[Fraction, ...]

    kind = "affine"

    def interval(self, i: int) -> tuple[Fraction, Fraction]:
        return self.starts[i], self.starts[i] + self.lengths[i]


@dataclass(frozen=True)
class AnnuliModel:
    """Annulus ``i`` is ``{exp(-moduli[i]) <= |z| <= 1}``.

    Each placed branch covers depths ``[lo, hi]``, i.e. the sub-annulus
    ``exp(-hi) <= |z| <= exp(-lo)``, and in depth coordinates acts as
    ``scale * t + offset``.
    """

    spec: ModelSpec
    moduli: tuple[Fraction, ...]
    branches: tuple[PlacedBranch, ...]
    gaps: tuple[Fraction, ...]

    kind = "annuli"

    @property
    def lengths(self) -> tuple[Fraction, ...]:
        return self.moduli

    @property
    def starts(self) -> tuple[Fraction, ...]:
        return (Fraction(0),) * len(self.moduli)

    def interval(self, i: int) -> tuple[Fraction, Fraction]:
        return Fraction(0), self.moduli[i]

    @staticmethod
    def exponent(pb: PlacedBranch) -> int:
        return int(pb.scale.numerator) if pb.scale > 0 else -int((-pb.scale).numerator)

    @staticmethod
    def log_coefficient(pb: PlacedBranch) -> Fraction:
        """``log c`` for the branch ``z -> c z^e`` (``c`` is real and positive)."""
        return -pb.offset

    def radii(self, pb: PlacedBranch) -> tuple[float, float]:
        return math.exp(-pb.hi), math.exp(-pb.lo)

    def evaluate(self, pb: PlacedBranch, z: complex) -> complex:
        return math.exp(float(self.log_coefficient(pb))) * z ** self.exponent(pb)


def realize_affine(spec: ModelSpec) -> AffineModel:
    """Build an affine interval model, or raise :class:`ObstructionError`.

    Interval ``i`` gets length ``v_i`` where ``(I - D) v = 1``, so every
    interval has total slack exactly one, shared equally by the gaps.
    """
    v = _witness(spec)
    starts, x = [], Fraction(0)
    for length in v:
        starts.append(x)
        x += length + 1
    placed, gaps = _lay_out(spec, v, starts)
    return AffineModel(spec, tuple(starts), tuple(v), placed, gaps)


def realize_annuli(spec: ModelSpec) -> AnnuliModel:
    """Build a round annuli model, or raise :class:`ObstructionError`."""
    v = _witness(spec)
    placed, gaps = _lay_out(spec, v, [Fraction(0)] * spec.k)
    return AnnuliModel(spec, tuple(v), placed, gaps)


def extract_transition(model: AffineModel | AnnuliModel) -> NonNegMatrix:
    """Recompute the transition matrix from the geometry, checking every invariant."""
    k = model.spec.k
    m = [[Fraction(0)] * k for _ in range(k)]
    for i in range(k):
        a, b = model.interval(i)
        if not a < b:
            raise ModelCorrupt(f"object {i} is empty")
    if model.kind == "affine":
        ivs = sorted(model.interval(i) for i in range(k))
        for (_, b0), (a1, _) in zip(ivs, ivs[1:]):
            if not b0 < a1:
                raise ModelCorrupt("intervals overlap")
    by_source: dict[int, list[PlacedBranch]] = {}
    for pb in model.branches:
        by_source.setdefault(pb.branch.source, []).append(pb)
    for i, pbs in by_source.items():
        a, b = model.interval(i)
        pbs = sorted(pbs, key=lambda q: q.lo)
        for q in pbs:
            if not a < q.lo < q.hi < b:
                raise ModelCorrupt(f"branch {q.branch} is not compactly inside object {i}")
        for q0, q1 in zip(pbs, pbs[1:]):
            if not q0.hi < q1.lo:
                raise ModelCorrupt(f"branches {q0.branch} and {q1.branch} overlap")
    for pb in model.branches:
        br = pb.branch
        if abs(pb.scale) != br.degree or (pb.scale < 0) != br.reverse:
            raise ModelCorrupt(f"branch {br} has slope {pb.scale}")
        ends = sorted((pb(pb.lo), pb(pb.hi)))
        if tuple(ends) != model.interval(br.target):
            raise ModelCorrupt(f"branch {br} does not cover object {br.target} exactly")
        m[br.source][br.target] += Fraction(1, br.degree)
    return NonNegMatrix(tuple(tuple(r) for r in m))


# ---------------------------------------------------------------- non-escaping set

@dataclass(frozen=True)
class Component:
    """A depth-``n`` component ``[lo, hi]`` inside object ``obj``."""

    obj: int
    depth: int
    lo: Fraction
    hi: Fraction
    word: tuple[int, ...]

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo


def nonescaping_depth(model: AffineModel | AnnuliModel, n: int) -> list[Component]:
    """Points that survive ``n`` iterations, as exact components.

    ``word`` lists the indices (into ``model.branches``) of the branches
    applied.  There is one component per admissible word, so the count is
    the number of branch sequences of length ``n``.
    """
    if n < 0:
        raise ValueError("depth must be non-negative")
    level = [Component(i, 0, *model.interval(i), ()) for i in range(model.spec.k)]
    for d in range(1, n + 1):
        by_obj: dict[int, list[Component]] = {}
        for c in level:
            by_obj.setdefault(c.obj, []).append(c)
        nxt = []
        for idx, pb in enumerate(model.branches):
            for c in by_obj.get(pb.branch.target, []):
                x0, x1 = sorted((pb.inverse(c.lo), pb.inverse(c.hi)))
                nxt.append(Component(pb.branch.source, d, x0, x1, (idx,) + c.word))
        level = nxt
    return sorted(level, key=lambda c: (c.obj, c.lo, c.hi))


def plot_rows(model: AffineModel | AnnuliModel, n: int) -> list[tuple[int, int, float, float]]:
    """Rows ``(object, depth, left/inner, right/outer)`` for plotting."""
    rows = []
    for c in nonescaping_depth(model, n):
        if model.kind == "annuli":
            rows.append((c.obj, c.depth, math.exp(-float(c.hi)), math.exp(-float(c.lo))))
        else:
            rows.append((c.obj, c.depth, float(c.lo), float(c.hi)))
    return rows


# ---------------------------------------------------------------- ring modulus

@dataclass(frozen=True)
class Disc:
    """Round disc ``|z - center| < radius``, or its outside when ``exterior``."""

    center: complex
    radius: float
    exterior: bool = False

    def __post_init__(self):
        if not self.radius > 0:
            raise RingError("radius must be positive")


def inversive_distance(d1: Disc, d2: Disc) -> float:
    dist2 = abs(complex(d1.center) - complex(d2.center)) ** 2
    r1, r2 = d1.radius, d2.radius
    if d1.exterior and d2.exterior:
        raise RingError("two exteriors always overlap at infinity")
    if d1.exterior or d2.exterior:
        return (r1 * r1 + r2 * r2 - dist2) / (2 * r1 * r2)
    return (dist2 - r1 * r1 - r2 * r2) / (2 * r1 * r2)


def ring_modulus(d1: Disc, d2: Disc) -> float:
    """Modulus of the ring left after removing two disjoint closed round discs.

    Moduli follow the convention ``mod{r < |z| < 1} = -log r``; the value is
    ``arccosh`` of the inversive distance of the two circles.
    """
    c1, c2 = complex(d1.center), complex(d2.center)
    dist = abs(c1 - c2)
    if d1.exterior or d2.exterior:
        inner, outer = (d2, d1) if d1.exterior else (d1, d2)
        if d1.exterior and d2.exterior:
            raise RingError("two exteriors always overlap at infinity")
        if not dist + inner.radius < outer.radius:
            raise RingError("inner disc is not strictly inside the outer circle")
    elif not dist > d1.radius + d2.radius:
        raise RingError("discs overlap or touch")
    return math.acosh(inversive_distance(d1, d2))


@dataclass(frozen=True)
class RingBounds:
    lower: float
    modulus: float
    upper: float

    def holds(self, tol: float = 1e-9) -> bool:
        return self.lower - tol <= self.modulus <= self.upper + tol


def equipotential_ring_bounds(d1: Disc, v1: float, d2: Disc, v2: float) -> RingBounds:
    """Bounds on the ring between two equipotentials in disjoint round discs.

    Each disc is marked at its centre and the equipotential of level ``v``
    is the circle of radius ``radius * exp(-v)``.  The ring modulus is at
    least ``v1 + v2`` and at most ``v1 + v2 + log(16 / (C1 C2))``, where
    ``C1``, ``C2`` are the conformal radii of the discs after a Mobius map
    sends the first centre to 0 and the second to infinity.
    """
    if d1.exterior or d2.exterior:
        raise RingError("both regions must be discs")
    z1, z2 = complex(d1.center), complex(d2.center)
    # With xi(z) = (z - z1)/(z - z2) both |xi'(z1)| and |(1/xi)'(z2)| equal
    # 1/|z1 - z2|, and conformal radii scale by the derivative.
    sep = abs(z1 - z2)
    c1, c2 = d1.radius / sep, d2.radius / sep
    inner1 = Disc(z1, d1.radius * math.exp(-v1))
    inner2 = Disc(z2, d2.radius * math.exp(-v2))
    mod = ring_modulus(inner1, inner2)
    return RingBounds(v1 + v2, mod, v1 + v2 + math.log(16 / (c1 * c2)))


# ---------------------------------------------------------------- potentials

@dataclass(frozen=True)
class GluingBudget:
    witness: tuple[Fraction, ...]
    multiplier: Fraction
    potentials: tuple[Fraction, ...]


def _multiplier(slack: Sequence[Fraction], constant: Fraction) -> Fraction:
    """Smallest integer ``M`` with ``M * min(slack) > constant``."""
    m = min(slack)
    return Fraction(math.floor(constant / m) + 1)


def gluing_budget(w: TransitionMatrix | NonNegMatrix, constant) -> GluingBudget:
    """Scale a subunit witness until ``W u + C < u`` holds with room ``C``."""
    mat = w.matrix if isinstance(w, TransitionMatrix) else NonNegMatrix.of(w)
    constant = to_rational(constant)
    if constant < 0:
        raise InvalidWitness("the constant must be non-negative")
    cert = subunit_certificate(mat)
    if isinstance(cert, NotSubunit):
        raise ObstructionError(cert, mat)
    v = cert.witness
    slack = [a - b for a, b in zip(v, mat.apply(v))]
    big = _multiplier(slack, constant)
    return GluingBudget(v, big, tuple(big * x for x in v))


@dataclass(frozen=True)
class PotentialLedger:
    """Potentials attached to the pieces of one renormalization.

    ``potentials`` is ``u = M v`` on the boundary multicurve.  ``rho`` is
    the room left between a boundary curve and the matching boundary curve
    of the parallel E-piece, ``sigma`` the potential on the first piece of
    the cycle, and the two ``kappa`` maps the potentials carried by the
    outer and inner boundary of each gluing annulus.
    """

    multiplier: Fraction
    constant: Fraction
    potentials: Mapping[str, Fraction]
    rho: Mapping[str, Fraction]
    sigma: Mapping[str, Fraction]
    kappa_outer: Mapping[str, Fraction]
    kappa_inner: Mapping[str, Fraction]


def prescribe_potentials(
    d: RenormDescriptor,
    w: TransitionMatrix,
    v: Mapping[str, object] | Sequence[object],
    constant=0,
) -> PotentialLedger:
    """Distribute potentials along a renormalization cycle.

    ``w`` is the transition matrix of the boundary multicurve and ``v`` a
    positive vector on it with ``W v < v``.  ``M`` is the least integer with
    ``M (v - W v) > constant`` entrywise.
    """
    if isinstance(v, Mapping):
        vec = tuple(to_rational(v[c]) for c in w.index)
    else:
        vec = tuple(to_rational(x) for x in v)
    if len(vec) != len(w.index):
        raise InvalidWitness(f"expected {len(w.index)} entries, got {len(vec)}")
    constant = to_rational(constant)
    if constant < 0:
        raise InvalidWitness("the constant must be non-negative")
    if not Subunit(vec).verify(w.matrix):
        raise InvalidWitness("v must be positive with W v < v entrywise")
    slack = [a - b for a, b in zip(vec, w.matrix.apply(vec))]
    big = _multiplier(slack, constant)
    u = {c: big * x for c, x in zip(w.index, vec)}
    missing = [g for g in d.boundary_curves if g not in u or d.correspondence[g].image not in u]
    if missing:
        raise InvalidWitness(f"potentials undefined on {missing}")
    rho, outer, inner = {}, {}, {}
    for g, bi in d.correspondence.items():
        rho[g] = (u[g] - u[bi.image] / bi.degree) * bi.degree
        outer[g] = u[g]
        inner[bi.beta] = u[bi.image] / bi.degree
        if rho[g] <= 0:
            raise InvalidWitness(f"no room between {g!r} and {bi.beta!r}")
    first = d.cycle[0]
    sigma = {g: u[g] for g in d.boundaries[first]}
    return PotentialLedger(big, constant, u, rho, sigma, outer, inner)

