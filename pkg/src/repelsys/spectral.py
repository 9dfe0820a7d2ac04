"""Exact and numeric spectral tools for non-negative square matrices.

Everything that decides a yes/no question (is the leading eigenvalue below
one, is a block decomposition projected, is a block nilpotent) runs in exact
rational arithmetic.  Floating point only enters when producing a numeric
enclosure of the spectral radius, and even there the bounds themselves are
evaluated exactly on a rational test vector.
"""
from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
import networkx as nx
import numpy as np

Rational = Fraction


class InvalidMatrix(ValueError):
    """Raised for non-square, negative or non-rational input."""


class InvalidPartition(ValueError):
    """Raised when index blocks do not partition ``range(n)``."""


class NotProjected(ValueError):
    """Raised when a block has two columns with different sums."""

    def __init__(self, block: tuple[int, int], columns: tuple[int, int],
                 sums: tuple[Fraction, Fraction]):
        self.block = block
        self.columns = columns
        self.sums = sums
        super().__init__(
            f"block {block}: column {columns[0]} sums to {sums[0]} "
            f"but column {columns[1]} sums to {sums[1]}"
        )


def to_rational(x) -> Fraction:
    """Convert ints, Fractions and ``"p/q"`` strings to a Fraction.

    Floats are rejected on purpose: ``0.1`` is not one tenth.
    """
    if isinstance(x, bool):
        raise InvalidMatrix(f"boolean {x!r} is not a rational")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, numbers.Integral):
        return Fraction(int(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidMatrix(f"cannot parse {x!r} as a rational") from exc
    if isinstance(x, numbers.Rational):
        return Fraction(x.numerator, x.denominator)
    raise InvalidMatrix(f"{x!r} ({type(x).__name__}) is not an exact rational")


def format_rational(q: Fraction) -> str:
    return str(q)


@dataclass(frozen=True)
class NonNegMatrix:
    """Square matrix of non-negative Fractions, stored row-major."""

    rows: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        n = len(self.rows)
        for i, row in enumerate(self.rows):
            if len(row) != n:
                raise InvalidMatrix(f"row {i} has length {len(row)}, expected {n}")
            for j, x in enumerate(row):
                if not isinstance(x, Fraction):
                    raise InvalidMatrix(f"entry ({i},{j}) is not a Fraction")
                if x < 0:
                    raise InvalidMatrix(f"entry ({i},{j}) = {x} is negative")

    @classmethod
    def of(cls, rows: Iterable[Iterable]) -> "NonNegMatrix":
        if isinstance(rows, NonNegMatrix):
            return rows
        if isinstance(rows, np.ndarray):
            if rows.dtype.kind == "f":
                raise InvalidMatrix("float arrays are not exact; pass Fractions or strings")
            rows = rows.tolist()
        return cls(tuple(tuple(to_rational(x) for x in row) for row in rows))

    @classmethod
    def zeros(cls, n: int) -> "NonNegMatrix":
        return cls(tuple((Fraction(0),) * n for _ in range(n)))

    @classmethod
    def identity(cls, n: int) -> "NonNegMatrix":
        return cls(tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.rows[i][j]

    def __matmul__(self, other: "NonNegMatrix") -> "NonNegMatrix":
        n = self.n
        cols = list(zip(*other.rows)) if n else []
        return NonNegMatrix(tuple(
            tuple(sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in cols)
            for row in self.rows
        ))

    def apply(self, v: Sequence[Fraction]) -> tuple[Fraction, ...]:
        return tuple(sum((a * x for a, x in zip(row, v)), Fraction(0)) for row in self.rows)

    def submatrix(self, idx: Sequence[int]) -> "NonNegMatrix":
        return NonNegMatrix(tuple(tuple(self.rows[i][j] for j in idx) for i in idx))

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.rows for x in row)

    def dominated_by(self, other: "NonNegMatrix") -> bool:
        """Entrywise ``self <= other``."""
        if self.n != other.n:
            raise InvalidMatrix("size mismatch")
        return all(a <= b for ra, rb in zip(self.rows, other.rows) for a, b in zip(ra, rb))

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.rows], dtype=float).reshape(self.n, self.n)

    def to_strings(self) -> list[list[str]]:
        return [[format_rational(x) for x in row] for row in self.rows]

    def support_graph(self) -> nx.DiGraph:
        """Digraph with an edge ``i -> j`` whenever entry ``(i, j)`` is positive."""
        g = nx.DiGraph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from((i, j) for i, row in enumerate(self.rows) for j, x in enumerate(row) if x > 0)
        return g


# ---------------------------------------------------------------- exact linear algebra

def _rref(aug: list[list[Fraction]], ncols: int) -> list[int]:
    """In-place Gauss-Jordan on the first ``ncols`` columns. Returns pivot columns."""
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(aug)) if aug[i][c] != 0), None)
        if p is None:
            continue
        aug[r], aug[p] = aug[p], aug[r]
        inv = 1 / aug[r][c]
        aug[r] = [x * inv for x in aug[r]]
        for i in range(len(aug)):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
        if r == len(aug):
            break
    return pivots


def solve_exact(a: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> tuple[Fraction, ...] | None:
    """Solve the square system ``a x = b``; ``None`` if ``a`` is singular."""
    n = len(a)
    aug = [list(row) + [b[i]] for i, row in enumerate(a)]
    if len(_rref(aug, n)) < n:
        return None
    return tuple(aug[i][n] for i in range(n))


def nullspace_exact(a: Sequence[Sequence[Fraction]]) -> list[tuple[Fraction, ...]]:
    """Basis of the right kernel of a square rational matrix."""
    n = len(a)
    aug = [list(row) for row in a]
    pivots = _rref(aug, n)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * n
        x[f] = Fraction(1)
        for r, c in enumerate(pivots):
            x[c] = -aug[r][f]
        basis.append(tuple(x))
    return basis


def _identity_minus(d: NonNegMatrix) -> list[list[Fraction]]:
    return [[Fraction(int(i == j)) - x for j, x in enumerate(row)] for i, row in enumerate(d.rows)]


# ---------------------------------------------------------------- block structure

def irreducible_blocks(d: NonNegMatrix) -> list[tuple[int, ...]]:
    """Index sets of the irreducible diagonal blocks, in a fixed order.

    Singleton classes without a self loop have spectral radius zero and are
    left out.
    """
    g = d.support_graph()
    blocks = []
    for comp in nx.strongly_connected_components(g):
        comp = tuple(sorted(comp))
        if len(comp) > 1 or d[comp[0], comp[0]] > 0:
            blocks.append(comp)
    blocks.sort()
    return blocks


# ---------------------------------------------------------------- numeric enclosure

@dataclass(frozen=True)
class Enclosure:
    """Rigorous interval ``[lo, hi]`` around a spectral radius.

    ``lo_exact`` and ``hi_exact`` are the exact Collatz-Wielandt bounds;
    ``lo``/``hi`` are the same numbers rounded outward to floats.
    """

    lo: float
    hi: float
    lo_exact: Fraction
    hi_exact: Fraction

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float, slack: float = 0.0) -> bool:
        return self.lo - slack <= x <= self.hi + slack

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)


def _float_down(q: Fraction) -> float:
    x = float(q)
    return x if Fraction(x) <= q else math.nextafter(x, -math.inf)


def _float_up(q: Fraction) -> float:
    x = float(q)
    return x if Fraction(x) >= q else math.nextafter(x, math.inf)


def _cw_bounds(b: NonNegMatrix, v: Sequence[Fraction]) -> tuple[Fraction, Fraction]:
    bv = b.apply(v)
    ratios = [y / x for x, y in zip(v, bv)]
    return min(ratios), max(ratios)


def _perron_guess(bf: np.ndarray) -> np.ndarray:
    w, vecs = np.linalg.eig(bf)
    k = int(np.argmax(w.real))
    v = np.abs(vecs[:, k].real)
    return v / v.max()


def _positive_rational(v: np.ndarray) -> list[Fraction] | None:
    if not np.all(np.isfinite(v)) or np.any(v <= 0):
        return None
    return [Fraction(float(x)) for x in v]


def _block_bounds(b: NonNegMatrix, tol: float) -> tuple[Fraction, Fraction, np.ndarray]:
    """Collatz-Wielandt bounds for an irreducible block, tightened to ``tol``."""
    if b.n == 1:
        lam = b[0, 0]
        return lam, lam, np.ones(1)
    bf = b.to_numpy()
    # (I + B) is primitive, so power iteration converges even for periodic B.
    shifted = bf + np.eye(b.n)
    v = _perron_guess(bf)
    v = np.where(v > 0, v, 1.0)
    best = None
    for _ in range(40):
        for _ in range(25):
            v = shifted @ v
            v /= v.max()
        vq = _positive_rational(v)
        if vq is None:
            break
        lo, hi = _cw_bounds(b, vq)
        if best is None or hi - lo < best[1] - best[0]:
            best = (lo, hi, v.copy())
        if hi - lo <= Fraction(tol):
            return lo, hi, v
    # Float precision ran out; redo the eigenvector in high precision.
    digits = max(40, int(-math.log10(tol)) + 20) if tol > 0 else 60
    with mpmath.workdps(digits):
        mb = mpmath.matrix([[mpmath.mpf(x.numerator) / x.denominator for x in row] for row in b.rows])
        vals, vecs = mpmath.eig(mb)
        k = max(range(b.n), key=lambda i: mpmath.re(vals[i]))
        col = [abs(mpmath.re(vecs[i, k])) for i in range(b.n)]
        if all(c > 0 for c in col):
            vq = [_mpf_to_fraction(c) for c in col]
            lo, hi = _cw_bounds(b, vq)
            if best is None or hi - lo < best[1] - best[0]:
                best = (lo, hi, np.array([float(c) for c in col]))
    if best is None:
        raise ArithmeticError("could not build a positive test vector for an irreducible block")
    return best


def _mpf_to_fraction(x) -> Fraction:
    man, exp = mpmath.mpf(x).man_exp
    return Fraction(man) * Fraction(2) ** exp


def spectral_radius(d, tol: float = 1e-9) -> Enclosure:
    """Enclose the spectral radius of a non-negative matrix.

    The matrix is split into irreducible diagonal blocks.  For each block a
    positive test vector is driven towards the Perron vector by power
    iteration on ``I + B`` and the Collatz-Wielandt ratios
    ``min (Bv)_i / v_i <= rho(B) <= max (Bv)_i / v_i`` are evaluated exactly.
    The radius of the whole matrix is the largest block radius.

    Parameters
    ----------
    d : matrix-like
        Square array of non-negative rationals.
    tol : float
        Target width ``hi - lo``.
    """
    d = NonNegMatrix.of(d)
    if tol <= 0:
        raise ValueError("tol must be positive")
    lo = hi = Fraction(0)
    for blk in irreducible_blocks(d):
        blo, bhi, _ = _block_bounds(d.submatrix(blk), tol)
        lo, hi = max(lo, blo), max(hi, bhi)
    return Enclosure(_float_down(lo), _float_up(hi), lo, hi)


# ---------------------------------------------------------------- exact subunit test

@dataclass(frozen=True)
class Subunit:
    """Exact proof that the spectral radius is below one.

    ``witness`` is a positive rational vector with ``D v < v`` entrywise.
    """

    witness: tuple[Fraction, ...]

    is_subunit = True

    def verify(self, d) -> bool:
        d = NonNegMatrix.of(d)
        dv = d.apply(self.witness)
        return all(x > 0 for x in self.witness) and all(y < x for x, y in zip(self.witness, dv))


@dataclass(frozen=True)
class NotSubunit:
    """The spectral radius is at least one.

    ``relation`` is ``"=1"`` or ``">1"`` and is decided exactly.
    ``exact_witness``, when present, is a non-zero rational ``w >= 0`` with
    ``D w >= w``, which forces ``rho(D) >= 1``.  ``lower_bound`` and
    ``eigenvector`` are the numeric companions.
    """

    lower_bound: float
    eigenvector: tuple[float, ...]
    relation: str
    exact_witness: tuple[Fraction, ...] | None
    block: tuple[int, ...]

    is_subunit = False

    def verify(self, d) -> bool:
        if self.exact_witness is None:
            return False
        d = NonNegMatrix.of(d)
        w = self.exact_witness
        return any(x > 0 for x in w) and all(x >= 0 for x in w) and all(
            y >= x for x, y in zip(w, d.apply(w)))


def _block_relation(b: NonNegMatrix) -> tuple[str, tuple[Fraction, ...] | None]:
    """Compare the Perron root of an irreducible block with one, exactly.

    Returns the relation and, for ``"=1"``, the positive rational Perron
    vector.
    """
    ima = _identity_minus(b)
    v = solve_exact(ima, [Fraction(1)] * b.n)
    if v is not None and all(x > 0 for x in v):
        return "<1", v
    ker = nullspace_exact(ima)
    if len(ker) == 1:
        k = ker[0]
        if all(x > 0 for x in k):
            return "=1", k
        if all(x < 0 for x in k):
            return "=1", tuple(-x for x in k)
    # One is either not an eigenvalue or not the Perron root, and the
    # Perron root is not below one, so it is above one.
    return ">1", None


def _supercritical_witness(b: NonNegMatrix) -> tuple[Fraction, ...] | None:
    _, _, vf = _block_bounds(b, 1e-12)
    for den in (10**6, 10**9, 10**12, 10**15):
        w = tuple(Fraction(float(x)).limit_denominator(den) for x in vf / vf.max())
        if all(x > 0 for x in w) and all(y >= x for x, y in zip(w, b.apply(w))):
            return w
    return None


def unit_relation(d) -> str:
    """Exactly decide whether ``rho(D)`` is ``"<1"``, ``"=1"`` or ``">1"``."""
    d = NonNegMatrix.of(d)
    rels = [_block_relation(d.submatrix(blk))[0] for blk in irreducible_blocks(d)]
    if ">1" in rels:
        return ">1"
    if "=1" in rels:
        return "=1"
    return "<1"


def subunit_certificate(d, tol: float = 1e-9) -> Subunit | NotSubunit:
    """Decide exactly whether ``rho(D) < 1`` and return a certificate.

    ``(I - D) v = 1`` is solved over the rationals.  A positive solution
    satisfies ``D v = v - 1 < v``, which proves ``rho(D) < 1``; conversely a
    subunit matrix always has such a solution (the Neumann series).  When the
    test fails, the irreducible block with the largest radius supplies an
    exact non-negative ``w`` with ``D w >= w`` and a numeric eigenvector.
    """
    d = NonNegMatrix.of(d)
    v = solve_exact(_identity_minus(d), [Fraction(1)] * d.n)
    if v is not None and all(x > 0 for x in v):
        return Subunit(v)

    best = None
    for blk in irreducible_blocks(d):
        b = d.submatrix(blk)
        rel, vec = _block_relation(b)
        if rel == "<1":
            continue
        rank = 1 if rel == "=1" else 2
        if best is None or rank > best[0]:
            best = (rank, blk, b, rel, vec)
    assert best is not None, "singular or non-positive solve implies a block with radius >= 1"
    _, blk, b, rel, vec = best
    if rel == ">1":
        vec = _supercritical_witness(b)
    exact = None
    if vec is not None:
        full = [Fraction(0)] * d.n
        for i, x in zip(blk, vec):
            full[i] = x
        exact = tuple(full)
    enc = spectral_radius(d, tol)
    _, _, vf = _block_bounds(b, tol)
    eig = np.zeros(d.n)
    eig[list(blk)] = vf / np.linalg.norm(vf)
    return NotSubunit(
        lower_bound=max(enc.lo, 1.0),
        eigenvector=tuple(float(x) for x in eig),
        relation=rel,
        exact_witness=exact,
        block=blk,
    )


# ---------------------------------------------------------------- block decompositions

def _check_partition(partition: Sequence[Sequence[int]], n: int) -> list[tuple[int, ...]]:
    blocks = [tuple(b) for b in partition]
    flat = [i for b in blocks for i in b]
    if sorted(flat) != list(range(n)) or any(len(b) == 0 for b in blocks):
        raise InvalidPartition(f"{blocks} is not a partition of range({n}) into non-empty blocks")
    return blocks


def _column_sums(a: NonNegMatrix, rows: Sequence[int], cols: Sequence[int]) -> list[Fraction]:
    return [sum((a[r, c] for r in rows), Fraction(0)) for c in cols]


def project_blocks(a, partition: Sequence[Sequence[int]]) -> NonNegMatrix:
    """Collapse a projected block decomposition to its block matrix.

    The decomposition is projected when, for every pair of blocks ``(i, j)``,
    all columns of the sub-block ``A[I_i, I_j]`` have the same sum ``b_ij``.
    Then ``rho(A) = rho(B)``.  Raises :class:`NotProjected` naming the first
    offending block otherwise.
    """
    a = NonNegMatrix.of(a)
    blocks = _check_partition(partition, a.n)
    out = []
    for i, bi in enumerate(blocks):
        row = []
        for j, bj in enumerate(blocks):
            sums = _column_sums(a, bi, bj)
            for c, s in zip(bj[1:], sums[1:]):
                if s != sums[0]:
                    raise NotProjected((i, j), (bj[0], c), (sums[0], s))
            row.append(sums[0])
        out.append(tuple(row))
    return NonNegMatrix(tuple(out))


def column_bound_compare(a, partition: Sequence[Sequence[int]], b) -> bool:
    """True iff every column of every block ``A[I_i, I_j]`` sums to at most ``b_ij``.

    When this holds and ``B`` comes from a projected decomposition, the
    spectral radius of ``A`` is at most that of ``B``.
    """
    a = NonNegMatrix.of(a)
    b = NonNegMatrix.of(b)
    blocks = _check_partition(partition, a.n)
    if b.n != len(blocks):
        raise InvalidPartition("B must have one row per block")
    return all(
        s <= b[i, j]
        for i, bi in enumerate(blocks)
        for j, bj in enumerate(blocks)
        for s in _column_sums(a, bi, bj)
    )


def nilpotency_index(m) -> int | None:
    """Smallest ``q`` with ``M^q = 0``, or ``None`` if ``M`` is not nilpotent.

    Entries are non-negative, so no cancellation can occur and the support
    pattern of ``M^q`` is the boolean ``q``-th power of the support of ``M``.
    """
    m = NonNegMatrix.of(m)
    n = m.n
    if n == 0:
        return 1
    pat = np.array([[x > 0 for x in row] for row in m.rows], dtype=np.int64)
    cur = pat.copy()
    for q in range(1, n + 1):
        if not cur.any():
            return q
        cur = ((cur @ pat) > 0).astype(np.int64)
    return None


@dataclass(frozen=True)
class SplitReport:
    """Outcome of :func:`block_split_check`."""

    upper_block_zero: bool
    nilpotency: int | None
    radius_kept: Enclosure
    radius_full: Enclosure
    radii_agree: bool

    @property
    def passed(self) -> bool:
        return self.upper_block_zero and self.nilpotency is not None and self.radii_agree


def block_split_check(w, keep: Sequence[int], drop: Sequence[int], tol: float = 1e-9) -> SplitReport:
    """Check the lower block-triangular split ``[[W_X, 0], [*, W_Z]]``.

    ``keep`` indexes ``X`` and ``drop`` indexes ``Z``.  When the ``X``-row,
    ``Z``-column block vanishes and ``W_Z`` is nilpotent, the spectral radius
    of ``W`` equals that of ``W_X``.
    """
    w = NonNegMatrix.of(w)
    keep, drop = list(keep), list(drop)
    _check_partition([keep, drop] if drop and keep else [keep or drop], w.n)
    zero = all(w[i, j] == 0 for i in keep for j in drop)
    q = nilpotency_index(w.submatrix(drop))
    rk = spectral_radius(w.submatrix(keep), tol / 4)
    rf = spectral_radius(w, tol / 4)
    agree = max(rk.hi, rf.hi) - min(rk.lo, rf.lo) <= tol
    return SplitReport(zero, q, rk, rf, agree)
