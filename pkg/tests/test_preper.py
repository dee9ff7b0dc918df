import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quadpcf.exact_arith import INFINITY, Rat
from quadpcf.preper import (
    INVERSE_SQUARE,
    SQUARE,
    CatalogMatchError,
    FunctionalGraph,
    RootOfUnityPoint,
    TypeTag,
    classify_psi1_twist,
    classify_psi2_map,
    invsq_catalog,
    invsq_twist_from_dk,
    invsq_twist_from_t,
    power_map_low_degree_preperiodic,
    rational_preperiodic_graph,
    sq_twist_map,
    type_of,
)
from quadpcf.projmap import NormalizedQuadMap

nonzero_small = st.builds(Rat, st.integers(-30, 30).filter(bool),
                          st.integers(1, 12))


# ----------------------------------------------------------------------
# functional graph machinery
# ----------------------------------------------------------------------

class TestFunctionalGraph:
    def test_requires_closure(self):
        with pytest.raises(ValueError):
            FunctionalGraph({Rat(1): Rat(2)})

    def test_cycles_and_types(self):
        g = FunctionalGraph({Rat(0): Rat(1), Rat(1): Rat(2), Rat(2): Rat(1),
                             Rat(5): Rat(0)})
        assert g.cycles() == [(Rat(1), Rat(2))]
        assert g.type_of(Rat(1)) == TypeTag(2, 0)
        assert g.type_of(Rat(0)) == TypeTag(2, 1)
        assert g.type_of(Rat(5)) == TypeTag(2, 2)
        assert str(TypeTag(2, 1)) == "2_1"

    def test_type_of_absent_point(self):
        g = FunctionalGraph({Rat(0): Rat(0)})
        with pytest.raises(KeyError):
            type_of(g, Rat(9))

    def test_components(self):
        g = FunctionalGraph({Rat(0): Rat(0), Rat(1): Rat(0),
                             Rat(5): Rat(6), Rat(6): Rat(5)})
        comps = g.components()
        assert sorted(len(c) for c in comps) == [2, 2]

    def test_canonical_form_isomorphism(self):
        a = FunctionalGraph({Rat(0): Rat(1), Rat(1): Rat(0), Rat(2): Rat(0)})
        b = FunctionalGraph({Rat(7): Rat(9), Rat(9): Rat(7), Rat(8): Rat(9)})
        c = FunctionalGraph({Rat(0): Rat(1), Rat(1): Rat(0), Rat(2): Rat(0),
                             Rat(3): Rat(1)})
        assert a.is_isomorphic_to(b)
        assert not a.is_isomorphic_to(c)


# ----------------------------------------------------------------------
# bounded preperiodic search
# ----------------------------------------------------------------------

class TestRationalPreperiodicGraph:
    def test_z2_minus_2(self):
        g = rational_preperiodic_graph(NormalizedQuadMap((1, 0, -2), (0, 0, 1)))
        assert g.successor == {
            INFINITY: INFINITY, Rat(1): Rat(-1), Rat(-1): Rat(-1),
            Rat(0): Rat(-2), Rat(-2): Rat(2), Rat(2): Rat(2)}

    def test_two_point_graph(self):
        g = rational_preperiodic_graph(NormalizedQuadMap.from_str("[0,-2,0]/[2,-4,1]"))
        assert g.successor == {INFINITY: Rat(0), Rat(0): Rat(0)}

    def test_cycle_pair_with_tails(self):
        g = rational_preperiodic_graph(NormalizedQuadMap.from_str("[3,-4,1]/[0,-4,1]"))
        assert g.successor == {
            Rat(1, 2): Rat(1, 4), Rat(1, 4): INFINITY, INFINITY: INFINITY,
            Rat(1, 3): Rat(0), Rat(0): Rat(1), Rat(1): Rat(0)}

    def test_forward_closed_and_cyclic(self):
        for text in ("[1,0,-2]/[0,0,1]", "[0,0,-4]/[9,-12,0]"):
            g = rational_preperiodic_graph(NormalizedQuadMap.from_str(text))
            for v in g.vertices:
                assert g.successor[v] in g
                assert g.type_of(v) is not None

    def test_unresolved_reported(self):
        g = rational_preperiodic_graph(
            NormalizedQuadMap((1, 0, -2), (0, 0, 1)), step_budget=1)
        assert Rat(3) in g.unresolved

    def test_degenerate_rejected(self):
        with pytest.raises(ValueError):
            rational_preperiodic_graph(NormalizedQuadMap.from_sigmas(2, 0))


# ----------------------------------------------------------------------
# twists of z^2
# ----------------------------------------------------------------------

class TestSqTwists:
    def test_map_construction(self):
        assert sq_twist_map(Rat(1, 2)) == NormalizedQuadMap((2, 0, 2), (0, 4, 0))
        with pytest.raises(ValueError):
            sq_twist_map(0)

    def test_representatives(self):
        assert classify_psi1_twist(Rat(1)).id == "sq-generic"
        assert classify_psi1_twist(Rat(1, 2)).id == "sq-fixed"
        assert classify_psi1_twist(Rat(-3, 2)).id == "sq-2cycle"
        assert classify_psi1_twist(Rat(-1, 2)).id == "sq-type12"

    def test_fixed_class_graph(self):
        cls = classify_psi1_twist(Rat(1, 2))
        assert set(cls.graph.vertices) == {INFINITY, Rat(0), Rat(1), Rat(-1)}

    def test_square_class_arithmetic(self):
        assert classify_psi1_twist(Rat(-6)).id == "sq-2cycle"     # -6b = 36
        assert classify_psi1_twist(Rat(-8)).id == "sq-type12"     # -2b = 16
        assert classify_psi1_twist(Rat(2)).id == "sq-fixed"       # 2b = 4
        assert classify_psi1_twist(Rat(7)).id == "sq-generic"

    def test_type_tags_in_twist_graphs(self):
        g = classify_psi1_twist(Rat(1)).graph
        assert g.type_of(Rat(0)) == TypeTag(1, 1)
        g2 = classify_psi1_twist(Rat(-1, 2)).graph
        assert g2.type_of(Rat(1)) == TypeTag(1, 2)
        assert g2.type_of(Rat(-1)) == TypeTag(1, 2)

    @given(nonzero_small, st.integers(1, 9), st.integers(1, 9))
    @settings(max_examples=60, deadline=None)
    def test_invariance_up_to_squares(self, b, pnum, pden):
        c = Rat(pnum, pden)
        assert classify_psi1_twist(b).id == classify_psi1_twist(b * c * c).id

    @given(nonzero_small)
    @settings(max_examples=60, deadline=None)
    def test_no_period_above_two(self, b):
        # rational periodic points of the twists have least period <= 2
        cls = classify_psi1_twist(b)
        assert all(len(c) <= 2 for c in cls.graph.cycles())


# ----------------------------------------------------------------------
# twists of 1/z^2
# ----------------------------------------------------------------------

class TestInvsqTwists:
    def test_input_forms(self):
        assert classify_psi2_map(t=Rat(1)).id == "invsq-2cycle-fixed"
        assert classify_psi2_map(t=Rat(2)).id == "invsq-2cycle"
        assert classify_psi2_map(d=Rat(2), k=Rat(1)).id == "invsq-empty"
        assert classify_psi2_map(d=Rat(2), k=Rat(0)).id == "invsq-fixed"
        m7 = NormalizedQuadMap.from_str("[0,2,-1]/[1,0,-1]")
        assert classify_psi2_map(m7).id == "invsq-3cycle"

    def test_t_cube_gives_fixed_point_class(self):
        assert classify_psi2_map(t=Rat(8)).id == "invsq-2cycle-fixed"
        assert classify_psi2_map(t=Rat(27, 64)).id == "invsq-2cycle-fixed"
        assert classify_psi2_map(t=Rat(3)).id == "invsq-2cycle"

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            invsq_twist_from_t(0)
        with pytest.raises(ValueError):
            invsq_twist_from_dk(0, 1)
        with pytest.raises(ValueError):
            invsq_twist_from_dk(4, 2)       # k^2 == d
        with pytest.raises(ValueError):
            classify_psi2_map(t=Rat(1), d=Rat(2), k=Rat(0))
        with pytest.raises(ValueError):
            classify_psi2_map()

    def test_foreign_map_rejected(self):
        with pytest.raises(ValueError, match="not conjugate"):
            classify_psi2_map(NormalizedQuadMap((1, 0, -2), (0, 0, 1)))

    def test_stunted_search_is_hard_failure(self):
        # searching only up to height 1 finds the 3-cycle but just one of
        # its three tails, a shape outside the catalog
        m7 = NormalizedQuadMap.from_str("[0,2,-1]/[1,0,-1]")
        with pytest.raises(CatalogMatchError):
            classify_psi2_map(m7, height_bound=1)

    def test_catalog_is_complete_and_distinct(self):
        catalog = invsq_catalog()
        assert len(catalog) == 7
        forms = [cls.graph.canonical_form() for cls in catalog]
        assert len(set(forms)) == 7

    def test_no_type_2n_points(self):
        # critical 2-cycle means no rational point ever feeds the 2-cycle
        for cls in invsq_catalog():
            for v in cls.graph.vertices:
                m, n = cls.graph.type_of(v)
                assert not (m == 2 and n >= 1), (cls.id, v)

    def test_tail_counts_match_cycle_counts(self):
        # for m != 2, as many type m_1 points as period-m points
        for cls in invsq_catalog():
            g = cls.graph
            for m in {len(c) for c in g.cycles()}:
                if m == 2:
                    continue
                periodic = sum(1 for v in g.vertices if g.type_of(v) == TypeTag(m, 0))
                tails = sum(1 for v in g.vertices if g.type_of(v) == TypeTag(m, 1))
                assert periodic == tails, (cls.id, m)

    def test_fixed_point_count_never_two(self):
        for cls in invsq_catalog():
            fixed = sum(1 for c in cls.graph.cycles() if len(c) == 1)
            assert fixed in (0, 1, 3), cls.id

    def test_six_point_bound(self):
        for cls in invsq_catalog():
            assert len(cls.graph) <= 6


# ----------------------------------------------------------------------
# power maps on roots of unity
# ----------------------------------------------------------------------

class TestRootOfUnityPoint:
    def test_reduction(self):
        assert RootOfUnityPoint.root(6, 2) == RootOfUnityPoint.root(3, 1)
        assert RootOfUnityPoint.root(4, 0) == RootOfUnityPoint.root(1, 0)
        assert repr(RootOfUnityPoint.root(2, 1)) == "-1"
        assert repr(RootOfUnityPoint.root(1, 0)) == "1"
        assert repr(RootOfUnityPoint.root(8, 3)) == "zeta8^3"

    def test_degree(self):
        assert RootOfUnityPoint.root(7, 1).degree() == 6
        assert RootOfUnityPoint.root(8, 1).degree() == 4
        assert RootOfUnityPoint.zero().degree() == 1


class TestPowerMapCatalogs:
    def test_inverse_square_degree6(self):
        comps = power_map_low_degree_preperiodic(INVERSE_SQUARE, 6)
        sizes = sorted(len(c) for c in comps)
        assert sum(sizes) == 50
        assert sizes == [2, 4, 4, 6, 6, 8, 8, 12]
        shapes = sorted((len(c), len(c.cycles()[0])) for c in comps)
        assert shapes == sorted([(2, 2), (4, 1), (4, 1), (6, 3), (6, 3),
                                 (8, 1), (8, 4), (12, 6)])
        # the 0 <-> infinity two-cycle is its own component
        zero_inf = next(c for c in comps if RootOfUnityPoint.zero() in c)
        assert len(zero_inf) == 2 and RootOfUnityPoint.inf() in zero_inf

    def test_square_degree2(self):
        comps = power_map_low_degree_preperiodic(SQUARE, 2)
        assert sum(len(c) for c in comps) == 10
        one = RootOfUnityPoint.root(1, 0)
        m1 = RootOfUnityPoint.root(2, 1)
        i_pt, mi_pt = RootOfUnityPoint.root(4, 1), RootOfUnityPoint.root(4, 3)
        comp_one = next(c for c in comps if one in c)
        assert comp_one.successor == {one: one, m1: one, i_pt: m1, mi_pt: m1}
        z3, z32 = RootOfUnityPoint.root(3, 1), RootOfUnityPoint.root(3, 2)
        z6, z65 = RootOfUnityPoint.root(6, 1), RootOfUnityPoint.root(6, 5)
        comp_z3 = next(c for c in comps if z3 in c)
        assert comp_z3.successor == {z3: z32, z32: z3, z6: z3, z65: z32}

    def test_square_degree1(self):
        comps = power_map_low_degree_preperiodic(SQUARE, 1)
        all_pts = {v for c in comps for v in c.vertices}
        assert all_pts == {RootOfUnityPoint.zero(), RootOfUnityPoint.inf(),
                           RootOfUnityPoint.root(1, 0), RootOfUnityPoint.root(2, 1)}
        comp_one = next(c for c in comps if RootOfUnityPoint.root(1, 0) in c)
        assert comp_one.successor[RootOfUnityPoint.root(2, 1)] == \
            RootOfUnityPoint.root(1, 0)

    def test_closure_under_the_exponent_map(self):
        for variant in (SQUARE, INVERSE_SQUARE):
            for deg in (1, 2, 4, 6):
                for comp in power_map_low_degree_preperiodic(variant, deg):
                    for v in comp.vertices:
                        assert comp.successor[v] in comp
                        assert v.degree() <= deg

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            power_map_low_degree_preperiodic("cube", 2)
        with pytest.raises(ValueError):
            power_map_low_degree_preperiodic(SQUARE, 0)
