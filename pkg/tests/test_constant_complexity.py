from __future__ import annotations

import copy
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_table
from repelsys.constant_complexity import (
    DegenerateRenormalization,
    NotConstantComplexity,
    RenormCertificate,
    analytization_verdict,
    boundary_obstruction_check,
    check_constant_complexity,
    compose_tables,
    extract_renormalization,
    parallel_piece,
    renormalizations,
    star_map,
)
from repelsys.curve_dynamics import derive_boundary_table, transition_matrix
from repelsys.document import load_document, parse_document, serialize_document
from repelsys.puzzle import BoundaryRecord, EPieceEmbedding, Piece, Presentation
from repelsys.spectral import NonNegMatrix

TOL = 1e-9


def relabel(raw: dict, rng: random.Random) -> tuple[dict, dict]:
    """Rename every id in a serialized document and shuffle the piece order."""
    ids = set()
    for p in raw.get("pieces", []):
        ids |= {p["id"], *p["boundary"], *p.get("marked", [])}
    for e in raw.get("epieces", []):
        ids |= {e["id"], *(b["curve"] for b in e["boundary"])}
    for c in raw.get("curve_universe", []):
        ids.add(c if isinstance(c, str) else c["id"])
    names = sorted(ids)
    fresh = [f"n{k}" for k in range(len(names))]
    rng.shuffle(fresh)
    ren = dict(zip(names, fresh))

    def walk(x):
        if isinstance(x, str):
            return ren.get(x, x)
        if isinstance(x, list):
            return [walk(v) for v in x]
        if isinstance(x, dict):
            return {ren.get(k, k): walk(v) for k, v in x.items()}
        return x

    keep = {k: copy.deepcopy(raw[k]) for k in ("format_version", "description", "constants", "flags") if k in raw}
    out = walk({k: v for k, v in raw.items() if k not in keep})
    out.update(keep)
    rng.shuffle(out["pieces"])
    return out, ren


def four_holed(extra_row=True) -> dict:
    """A four-holed sphere whose parallel piece has a subunit boundary matrix
    while an essential class maps onto itself with degree one."""
    holes = [("b1", "g2", 2, ["g1"]), ("b2a", "g1", 1, ["g2"]), ("b2b", "g1", 1, []),
             ("b3", "g4", 2, ["g3"]), ("b4", "g3", 1, ["g4"]), ("b5", "g3", 1, [])]
    raw = {
        "format_version": 1,
        "pieces": [{"id": "S", "boundary": ["g1", "g2", "g3", "g4"]}],
        "epieces": [{"id": "E", "host": "S", "image": "S", "degree": 2,
                     "boundary": [{"curve": c, "image": i, "degree": d, "inside": ins} for c, i, d, ins in holes]}],
        "curve_universe": ["g1", "g2", "g3", "g4", {"id": "c", "piece": "S", "side": ["g1", "g2"]}],
        "pullbacks": {
            "g1": [{"target": "g2", "degree": 1, "epiece": "E"}, {"target": "NULL", "degree": 1, "epiece": "E"}],
            "g2": [{"target": "g1", "degree": 2, "epiece": "E"}],
            "g3": [{"target": "g4", "degree": 1, "epiece": "E"}, {"target": "NULL", "degree": 1, "epiece": "E"}],
            "g4": [{"target": "g3", "degree": 2, "epiece": "E"}],
            "c": [{"target": "c", "degree": 1, "epiece": "E"}] if extra_row else [],
        },
        "renorm_certificates": [{"cycle": ["S"], "kind": "pcf-unobstructed"}],
    }
    return raw


class TestParallelPieces:
    def test_z2_minus_one(self, preset):
        p = preset("z2minus1.json").presentation
        e = parallel_piece(p, "S")
        assert e.id == "E_S" and len(e.boundary) == 4
        assert check_constant_complexity(p).ok

    def test_two_candidates(self):
        host = Piece("L", ("g0", "g1", "g2"))
        mk = lambda eid: EPieceEmbedding(eid, "L", "L", 1, tuple(  # noqa: E731
            BoundaryRecord(f"{eid}{g}", g, 1, {g}) for g in host.boundary))
        p = Presentation((host,), (mk("E1"), mk("E2")))
        with pytest.raises(NotConstantComplexity):
            parallel_piece(p, "L")
        assert not check_constant_complexity(p).ok

    def test_no_epiece(self):
        p = Presentation((Piece("L", ("g0", "g1", "g2")),), ())
        assert check_constant_complexity(p).parallel == {"L": None}
        with pytest.raises(NotConstantComplexity):
            star_map(p)


class TestStarMap:
    def test_fixed_piece(self, preset):
        sm = star_map(preset("z2minus1.json").presentation)
        assert sm.mapping == {"S": "S"} and sm.cycles == (("S",),)

    def test_two_cycle(self, preset):
        sm = star_map(preset("period2.json").presentation)
        assert sm.mapping == {"S1": "S2", "S2": "S1"}
        assert sm.cycles == (("S1", "S2"),)
        assert sm.cycle_of("S2") == ("S1", "S2")

    def test_annulus_not_in_domain(self, preset):
        assert star_map(preset("example4.json").presentation).mapping == {"S": "S"}


class TestRenormalization:
    def test_period_two_composition_is_matrix_square(self, preset):
        doc = preset("period2.json")
        d = extract_renormalization(doc.presentation, doc.table, ("S1", "S2"))
        assert d.period == 2 and d.parallel_epieces == ("E1", "E2")
        ids = d.step_table.universe
        step = transition_matrix(ids, d.step_table).matrix
        assert transition_matrix(ids, d.composed_table).matrix == step @ step

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 10**6), st.integers(1, 4))
    def test_composition_matches_matrix_power(self, seed, power):
        rng = random.Random(seed)
        t = random_table(rng, rng.randint(1, 6))
        comp = t
        for _ in range(power - 1):
            comp = compose_tables(comp, t)
        w = transition_matrix(t.universe, t).matrix
        expect = NonNegMatrix.identity(w.n)
        for _ in range(power):
            expect = expect @ w
        assert transition_matrix(t.universe, comp).matrix == expect

    def test_example_four_descriptor(self, preset):
        doc = preset("example4.json")
        (d,) = renormalizations(doc.presentation, doc.table)
        assert d.cycle == ("S",) and d.boundary_curves == ("g1", "g2", "g3")
        assert d.d_star.matrix == NonNegMatrix.of([[0, F(1, 2), 0], [1, 0, 0], [0, 0, F(1, 2)]])
        assert (d.correspondence["g1"].degree, d.correspondence["g1"].image) == (2, "g2")

    def test_z2_minus_one_marked_points(self, preset):
        doc = preset("z2minus1.json")
        (d,) = renormalizations(doc.presentation, doc.table)
        assert d.period == 1 and d.marked["S"] == ()

    def test_degenerate(self):
        host = Piece("L", ("g0", "g1", "g2"))
        e = EPieceEmbedding("E", "L", "L", 1, (BoundaryRecord("h0", "g0", 1, {"g0"}),
                                                BoundaryRecord("h1", "g1", 1, {"g1"}),
                                                BoundaryRecord("h2", "g2", 1, set())))
        p = Presentation((host,), (e,))
        with pytest.raises(DegenerateRenormalization):
            extract_renormalization(p, derive_boundary_table(p), ("L",))


class TestBoundaryCheck:
    def test_variants(self, preset):
        v1, v2 = preset("trousers-v1.json"), preset("trousers-v2.json")
        b1 = boundary_obstruction_check(v1.presentation, v1.table)
        assert not b1.obstructed and b1.certificate.witness == (3, 4, 2)
        b2 = boundary_obstruction_check(v2.presentation, v2.table)
        assert b2.obstructed and b2.certificate.relation == "=1"

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6),
           st.sampled_from(["trousers-v1.json", "trousers-v2.json", "example4.json", "period2.json",
                            "z2minus1.json", "annuli-2-3.json"]))
    def test_relabeling_does_not_change_the_answer(self, seed, name):
        doc = load_document(name)
        raw, ren = relabel(serialize_document(doc), random.Random(seed))
        new = parse_document(raw)
        a = boundary_obstruction_check(doc.presentation, doc.table)
        b = boundary_obstruction_check(new.presentation, new.table)
        assert a.obstructed == b.obstructed
        assert sorted(ren[c] for c in a.curves) == sorted(b.curves)
        pos = [b.curves.index(ren[c]) for c in a.curves]
        assert b.matrix.matrix.submatrix(pos) == a.matrix.matrix
        if not a.obstructed and a.certificate is not None:
            assert [b.certificate.witness[k] for k in pos] == list(a.certificate.witness)
        assert analytization_verdict(doc.presentation, doc.table, doc.certificates or ()).status == \
            analytization_verdict(new.presentation, new.table, new.certificates or ()).status


class TestAnalytization:
    def test_example_four_passes(self, preset):
        doc = preset("example4.json")
        rep = analytization_verdict(doc.presentation, doc.table, doc.certificates)
        assert rep.status == "pass"
        assert rep.branches[0].branch == "pcf-unobstructed"

    def test_without_certificates(self, preset):
        doc = preset("example4.json")
        assert analytization_verdict(doc.presentation, doc.table, ()).status == "indeterminate"

    def test_holomorphic_steps(self, preset):
        doc = preset("period2.json")
        rep = analytization_verdict(doc.presentation, doc.table, doc.certificates)
        assert rep.status == "pass" and rep.branches[0].branch == "holomorphic-steps"

    def test_boundary_obstruction_fails_first(self, preset):
        doc = preset("trousers-v2.json")
        rep = analytization_verdict(doc.presentation, doc.table, doc.certificates)
        assert rep.status == "fail" and rep.branches == ()

    def test_composed_obstruction_overrides_certificate(self):
        doc = parse_document(four_holed())
        rep = analytization_verdict(doc.presentation, doc.table, doc.certificates)
        assert not rep.boundary.obstructed
        assert rep.status == "fail" and rep.branches[0].branch == "composed-table"
        clean = parse_document(four_holed(extra_row=False))
        assert analytization_verdict(clean.presentation, clean.table, clean.certificates).status == "pass"

    def test_certificate_kind_checked(self):
        with pytest.raises(ValueError):
            RenormCertificate(("S",), "trust-me")
