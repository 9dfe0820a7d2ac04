from __future__ import annotations

import math
import random
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_projected, random_rational_matrix
from repelsys.spectral import (
    InvalidMatrix,
    InvalidPartition,
    NonNegMatrix,
    NotProjected,
    NotSubunit,
    Subunit,
    block_split_check,
    column_bound_compare,
    nilpotency_index,
    project_blocks,
    spectral_radius,
    subunit_certificate,
    unit_relation,
)

TOL = 1e-9


def eig_oracle(rows) -> float:
    a = np.array([[float(x) for x in r] for r in rows], dtype=float)
    return float(max(abs(np.linalg.eigvals(a)))) if len(rows) else 0.0


def exact_power(m: NonNegMatrix, q: int) -> NonNegMatrix:
    out = NonNegMatrix.identity(m.n)
    for _ in range(q):
        out = out @ m
    return out


rationals = st.builds(F, st.integers(0, 6), st.integers(1, 6))


@st.composite
def matrices(draw, max_n=5):
    n = draw(st.integers(1, max_n))
    sparse = st.one_of(st.just(F(0)), rationals)
    return [[draw(sparse) for _ in range(n)] for _ in range(n)]


class TestSubunitCertificate:
    def test_swap_with_half(self):
        d = [[0, F(1, 2), 0], [1, 0, 0], [0, 0, F(1, 2)]]
        cert = subunit_certificate(d)
        assert isinstance(cert, Subunit)
        assert cert.verify(d)
        assert cert.witness == (3, 4, 2)

    def test_diagonal_with_one(self):
        d = [[F(1, 2), 0, 0], [0, 1, 0], [0, 0, F(1, 2)]]
        cert = subunit_certificate(d)
        assert isinstance(cert, NotSubunit)
        assert cert.relation == "=1"
        assert cert.exact_witness == (0, 1, 0)
        assert cert.verify(d)
        assert cert.lower_bound >= 1 - TOL

    def test_zero_one_by_one(self):
        cert = subunit_certificate([[0]])
        assert isinstance(cert, Subunit) and cert.witness == (1,)

    def test_supercritical_has_exact_witness(self):
        d = [[2, 1], [1, 1]]
        cert = subunit_certificate(d)
        assert cert.relation == ">1"
        assert cert.verify(d)
        assert cert.lower_bound <= (3 + math.sqrt(5)) / 2 + TOL

    def test_identity_is_exactly_one(self):
        assert unit_relation(NonNegMatrix.identity(3)) == "=1"

    def test_jordan_block_at_one(self):
        d = [[1, 1], [0, 1]]
        cert = subunit_certificate(d)
        assert not cert.is_subunit and cert.relation == "=1" and cert.verify(d)

    @pytest.mark.parametrize("bad", [[[1, 2]], [[-1]], [[0.5]], [[True]]])
    def test_rejects_bad_input(self, bad):
        with pytest.raises(InvalidMatrix):
            subunit_certificate(bad)

    def test_accepts_strings(self):
        assert subunit_certificate([["1/3", "1/3"], ["1/3", "1/3"]]).is_subunit


class TestSpectralRadius:
    def test_periodic_two_by_two(self):
        enc = spectral_radius([[0, F(1, 2)], [1, 0]])
        # characteristic polynomial x^2 - 1/2
        assert enc.contains(math.sqrt(0.5))
        assert enc.width <= TOL

    def test_identity(self):
        enc = spectral_radius(NonNegMatrix.identity(3))
        assert enc.lo == enc.hi == 1.0

    def test_reducible_triangular(self):
        enc = spectral_radius([[F(1, 2), F(1, 3)], [0, F(1, 2)]])
        assert enc.lo_exact == enc.hi_exact == F(1, 2)

    def test_zero_and_empty(self):
        assert spectral_radius([[0, 1], [0, 0]]).hi == 0
        assert spectral_radius([]).hi == 0

    def test_tight_tolerance_falls_back_to_high_precision(self):
        enc = spectral_radius([[1, 1, 0], [1, 0, 1], [0, 1, 1]], tol=1e-25)
        assert enc.hi_exact - enc.lo_exact <= F(1, 10**25)
        assert enc.contains(2.0)

    def test_rejects_non_positive_tol(self):
        with pytest.raises(ValueError):
            spectral_radius([[1]], tol=0)

    def test_random_against_eigvals(self):
        rng = random.Random(7)
        for _ in range(200):
            n = rng.randint(1, 6)
            m = random_rational_matrix(rng, n)
            enc = spectral_radius(m)
            assert enc.width <= TOL
            assert enc.contains(eig_oracle(m), slack=1e-7)


class TestProperties:
    @settings(max_examples=150, deadline=None)
    @given(matrices())
    def test_certificate_agrees_with_enclosure(self, m):
        cert = subunit_certificate(m)
        enc = spectral_radius(m, TOL)
        if enc.hi < 1:
            assert cert.is_subunit
        elif enc.lo > 1:
            assert not cert.is_subunit and cert.relation == ">1"
        else:
            # the enclosure straddles one: the exact relation decides
            assert cert.is_subunit == (unit_relation(m) == "<1")
        assert cert.verify(m)

    @settings(max_examples=100, deadline=None)
    @given(matrices(), st.data())
    def test_monotone_in_entries(self, a, data):
        b = [[x + data.draw(st.sampled_from([F(0), F(1, 6), F(1, 2), F(1)])) for x in row] for row in a]
        assert spectral_radius(a).hi <= spectral_radius(b).hi + 2 * TOL

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 10**6))
    def test_projected_decomposition_preserves_radius(self, seed):
        rng = random.Random(seed)
        a, blocks, b = random_projected(rng, rng.randint(1, 6))
        got = project_blocks(a, blocks)
        assert got == NonNegMatrix.of(b)
        ea, eb = spectral_radius(a), spectral_radius(got)
        assert abs(ea.midpoint - eb.midpoint) <= 2 * TOL

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 10**6))
    def test_column_bound_gives_radius_bound(self, seed):
        rng = random.Random(seed)
        a, blocks, b = random_projected(rng, rng.randint(1, 6))
        smaller = [[x * F(rng.randint(0, 4), 4) for x in row] for row in a]
        assert column_bound_compare(smaller, blocks, b)
        assert spectral_radius(smaller).lo <= spectral_radius(b).hi + TOL

    @settings(max_examples=100, deadline=None)
    @given(matrices(max_n=5))
    def test_nilpotency_index_against_exact_powers(self, m):
        m = NonNegMatrix.of(m)
        q = nilpotency_index(m)
        if q is None:
            assert not exact_power(m, m.n).is_zero()
        else:
            assert exact_power(m, q).is_zero()
            assert not exact_power(m, q - 1).is_zero()


class TestBlocks:
    def test_single_block_not_projected(self):
        with pytest.raises(NotProjected) as exc:
            project_blocks([[1, 2], [3, 0]], [[0, 1]])
        assert exc.value.sums == (4, 2)

    def test_identity_singletons(self):
        i3 = NonNegMatrix.identity(3)
        assert project_blocks(i3, [[0], [1], [2]]) == i3

    def test_four_by_four(self):
        a = [[1, 2, 1, 0], [1, 0, 3, 4], [0, 1, 0, 1], [2, 1, 1, 0]]
        b = project_blocks(a, [[0, 1], [2, 3]])
        assert b == NonNegMatrix.of([[2, 4], [2, 1]])
        assert abs(spectral_radius(a).midpoint - spectral_radius(b).midpoint) <= TOL
        assert abs(spectral_radius(b).midpoint - (3 + math.sqrt(33)) / 2) <= TOL

    def test_four_by_four_with_zero_corner_is_not_projected(self):
        a = [[1, 2, 1, 0], [1, 0, 3, 4], [0, 1, 0, 1], [2, 1, 0, 0]]
        with pytest.raises(NotProjected) as exc:
            project_blocks(a, [[0, 1], [2, 3]])
        assert exc.value.block == (1, 1)

    def test_bad_partition(self):
        with pytest.raises(InvalidPartition):
            project_blocks([[1, 0], [0, 1]], [[0], [0]])

    def test_column_bound_compare_rejects_large_column(self):
        assert not column_bound_compare([[1, 2], [3, 0]], [[0, 1]], [[3]])
        assert column_bound_compare([[1, 2], [3, 0]], [[0, 1]], [[4]])


class TestNilpotency:
    def test_examples(self):
        assert nilpotency_index([[0, 1], [0, 0]]) == 2
        assert nilpotency_index(NonNegMatrix.identity(2)) is None
        strict = [[int(j > i) for j in range(4)] for i in range(4)]
        assert nilpotency_index(strict) == 4
        assert nilpotency_index([[0]]) == 1


class TestBlockSplit:
    def test_passes(self):
        rep = block_split_check([[F(1, 2), 0], [1, 0]], [0], [1])
        assert rep.passed and rep.nilpotency == 1

    def test_nonzero_corner_fails(self):
        rep = block_split_check([[F(1, 2), 1], [1, 0]], [0], [1])
        assert not rep.upper_block_zero and not rep.passed

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10**6))
    def test_radius_kept_on_random_splits(self, seed):
        rng = random.Random(seed)
        nx, nz = rng.randint(1, 3), rng.randint(1, 3)
        n = nx + nz
        m = random_rational_matrix(rng, n)
        for i in range(nx):
            for j in range(nx, n):
                m[i][j] = F(0)
        for i in range(nx, n):
            for j in range(nx, n):
                if j <= i:
                    m[i][j] = F(0)
        rep = block_split_check(m, range(nx), range(nx, n))
        assert rep.passed
