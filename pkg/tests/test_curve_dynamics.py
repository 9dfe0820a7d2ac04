from __future__ import annotations

import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_table
from repelsys.curve_dynamics import (
    NULL,
    Preimage,
    PullbackTable,
    TableError,
    TableNotClosed,
    derive_boundary_table,
    laminar_families,
    obstruction_verdict,
    pullback,
    stabilize,
    transition_matrix,
)
from repelsys.puzzle import CurveClass, Piece
from repelsys.spectral import NonNegMatrix, spectral_radius

TOL = 1e-9


def table(rows: dict, classes=None) -> PullbackTable:
    return PullbackTable(tuple(rows), {c: tuple(Preimage(*r) for r in recs) for c, recs in rows.items()},
                         classes or {})


class TestTransitionMatrix:
    def test_trousers_variant_one(self, preset):
        t = preset("trousers-v1.json").table
        w = transition_matrix(["g0", "gm1", "gs"], t)
        assert w.matrix == NonNegMatrix.of([[0, F(1, 2), 0], [1, 0, 0], [0, 0, F(1, 2)]])

    def test_annulus_doubling(self, preset):
        w = transition_matrix(["a0"], preset("annuli-2-2.json").table)
        assert w.matrix == NonNegMatrix.of([[1]])

    def test_example_four(self, preset):
        w = transition_matrix(["g1", "g2", "g3", "g4"], preset("example4.json").table)
        assert w.matrix == NonNegMatrix.of(
            [[0, F(1, 2), 0, 0], [1, 0, 0, 0], [0, 0, F(1, 2), 1], [1, 1, 0, F(1, 2)]])

    def test_two_self_preimages_of_degree_two(self):
        t = table({"g": [("g", 2), ("g", 2)]})
        assert transition_matrix(["g"], t).matrix == NonNegMatrix.of([[1]])


class TestPullbackAndStabilize:
    def test_two_curve_swap(self):
        t = table({"g1": [("g2", 1), (NULL, 1)], "g2": [("g1", 1)]})
        assert pullback(["g1", "g2"], t) == ("g1", "g2")
        assert stabilize(["g1"], t).curves == ("g1", "g2")

    def test_chain(self):
        t = table({"a": [("b", 1)], "b": [("c", 1)], "c": [("c", 2)]})
        st_ = stabilize(["a"], t)
        assert st_.curves == ("a", "b", "c") and st_.steps == 2

    def test_only_null_targets(self):
        t = table({"a": [(NULL, 1)], "b": [(NULL, 2)]})
        assert pullback(["a", "b"], t) == ()
        assert stabilize([], t).curves == ()

    def test_missing_row(self):
        t = PullbackTable(("a", "b"), {"a": (Preimage("b", 1),)})
        assert not t.closed
        with pytest.raises(TableNotClosed):
            stabilize(["a"], t)

    def test_target_outside_universe(self):
        with pytest.raises(TableNotClosed):
            table({"a": [("z", 1)]})

    def test_unknown_seed(self):
        with pytest.raises(TableError):
            stabilize(["q"], table({"a": []}))

    @settings(max_examples=150, deadline=None)
    @given(st.integers(0, 10**6))
    def test_stabilizing_never_lowers_the_radius(self, seed):
        rng = random.Random(seed)
        t = random_table(rng, rng.randint(1, 8))
        gamma = rng.sample(t.universe, rng.randint(0, len(t.universe)))
        s = stabilize(gamma, t)
        assert set(gamma) <= set(s.curves)
        assert s.steps <= len(t.universe)
        assert set(pullback(s.curves, t)) <= set(s.curves)
        if gamma:
            lo = spectral_radius(transition_matrix(gamma, t).matrix).lo
            assert spectral_radius(transition_matrix(s.curves, t).matrix).hi >= lo - TOL


class TestObstructionVerdict:
    def test_variant_one_unobstructed(self, preset):
        rep = obstruction_verdict(preset("trousers-v1.json").table)
        assert not rep.obstructed
        assert rep.verdict == "Unobstructed-within-universe"
        assert rep.radius.contains(2 ** -0.5)

    def test_variant_two_obstructed(self, preset):
        rep = obstruction_verdict(preset("trousers-v2.json").table)
        assert rep.obstructed
        assert rep.multicurve == ("gm1",)
        assert rep.matrix.matrix == NonNegMatrix.of([[1]])
        assert rep.certificate.relation == "=1"

    def test_crossing_curves_are_not_combined(self):
        p = Piece("S", ("g1", "g2", "g3", "g4"))
        cls = {"c12": CurveClass.of(p, {"g1", "g2"}), "c13": CurveClass.of(p, {"g1", "g3"})}
        t = table({"c12": [("c13", 1)], "c13": [("c12", 1)]}, cls)
        assert laminar_families(t) == [("c12",), ("c13",)]
        rep = obstruction_verdict(t)
        # the full matrix has radius one, but the two classes cross
        assert spectral_radius(transition_matrix(["c12", "c13"], t).matrix).lo == 1
        assert not rep.obstructed and rep.families_checked == 2

    def test_obstruction_found_in_one_family(self):
        p = Piece("S", ("g1", "g2", "g3", "g4"))
        cls = {"c12": CurveClass.of(p, {"g1", "g2"}), "c13": CurveClass.of(p, {"g1", "g3"})}
        t = table({"c12": [("c12", 1)], "c13": [("c12", 2)]}, cls)
        rep = obstruction_verdict(t)
        assert rep.obstructed and rep.multicurve == ("c12",)

    @settings(max_examples=150, deadline=None)
    @given(st.integers(0, 10**6))
    def test_growing_the_universe_keeps_obstructions(self, seed):
        rng = random.Random(seed)
        small = random_table(rng, rng.randint(1, 6))
        extra = random_table(rng, rng.randint(1, 4), prefix="x")
        ids = small.universe + extra.universe
        rows = dict(extra.rows)
        for c in small.universe:
            add = [Preimage(rng.choice(ids), rng.randint(1, 4)) for _ in range(rng.randint(0, 2))]
            rows[c] = small.rows[c] + tuple(add)
        rows.update({c: rows[c] + (Preimage(rng.choice(ids), 2),) for c in extra.universe})
        big = PullbackTable(ids, rows)
        if obstruction_verdict(small).obstructed:
            assert obstruction_verdict(big).obstructed

    @settings(max_examples=150, deadline=None)
    @given(st.integers(0, 10**6))
    def test_verdict_matches_full_matrix_without_classes(self, seed):
        rng = random.Random(seed)
        t = random_table(rng, rng.randint(1, 8))
        rep = obstruction_verdict(t)
        enc = spectral_radius(transition_matrix(t.universe, t).matrix)
        if enc.hi < 1:
            assert not rep.obstructed
        if enc.lo > 1:
            assert rep.obstructed
        if rep.obstructed:
            assert rep.certificate.verify(rep.matrix.matrix)
            assert set(rep.multicurve) <= set(rep.stabilized)


class TestDerivedTable:
    @pytest.mark.parametrize("name", ["trousers-v1.json", "trousers-v2.json", "z2minus1.json",
                                      "example4.json", "period2.json", "annuli-2-2.json", "annuli-2-3.json"])
    def test_matches_preset(self, preset, name):
        doc = preset(name)
        derived = derive_boundary_table(doc.presentation)
        for c in derived.universe:
            want = sorted((r.target, r.degree, r.epiece) for r in derived.rows[c])
            have = sorted((r.target, r.degree, r.epiece) for r in doc.table.rows[c])
            assert want == have
