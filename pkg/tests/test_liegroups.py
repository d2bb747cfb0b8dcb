import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eqformal import liegroups as lg
from eqformal.exactpoly import Polynomial, substitute_linear

from algebra_checks import (classical_labels, generator_count_and_degrees_ok, newton_identity_holds,
                            weyl_invariance_failures)


@pytest.mark.parametrize("label,rank,degrees,dim,weyl", [
    ("SU(3)", 2, (4, 6), 8, 6),
    ("U(2)", 2, (2, 4), 4, 2),
    ("Sp(2)", 2, (4, 8), 10, 8),
    ("SO(5)", 2, (4, 8), 10, 8),
    ("SO(8)", 4, (4, 8, 12, 8), 28, 192),
    ("SO(3)", 1, (4,), 3, 2),
    ("T^3", 3, (2, 2, 2), 3, 1),
    ("S(U(2)U(1))", 2, (2, 4), 4, 2),
    ("E7", 7, (4, 12, 16, 20, 24, 28, 36), 133, 2903040),
    ("F4", 4, (4, 12, 16, 24), 52, 1152),
])
def test_group_data(label, rank, degrees, dim, weyl):
    g = lg.make_group(label)
    assert g.rank == rank
    assert tuple(g.generator_degrees) == degrees
    assert g.dimension == dim
    assert g.weyl_order == weyl


def test_exceptional_groups_are_degree_only():
    g = lg.make_group("E6")
    assert not g.explicit and g.invariant_generators is None
    with pytest.raises(ValueError):
        g.require_explicit()


def test_products_and_spin():
    g = lg.make_group("SO(3)xSO(3)")
    assert g.rank == 2 and g.dimension == 6 and len(g.factors) == 2
    assert lg.make_group("Spin(9)").generator_degrees == lg.make_group("SO(9)").generator_degrees
    assert lg.make_group("SO(1)").rank == 0
    assert lg.make_group("SO", 5).label == "SO(5)"
    assert lg.make_group("S(U)", (2, 2)).label == "S(U(2)U(2))"


@pytest.mark.parametrize("bad", ["", "XY(3)", "SU(0)", "SU(3", "SO(3)yy"])
def test_bad_labels(bad):
    with pytest.raises(lg.GroupLabelError):
        lg.make_group(bad)


def test_rank_bound():
    with pytest.raises(lg.GroupLabelError):
        lg.make_group("SU(20)", max_rank=8)


@pytest.mark.parametrize("label", classical_labels())
def test_degree_products_give_weyl_order_and_dimension(label):
    assert generator_count_and_degrees_ok(label)


@pytest.mark.parametrize("n", range(1, 7))
def test_newton_identities(n):
    assert all(newton_identity_holds(n, k) for k in range(1, n + 1))


@pytest.mark.parametrize("label", classical_labels())
def test_weyl_invariance(label):
    assert weyl_invariance_failures([label]) == []


def test_weyl_legality():
    g = lg.make_group("SO(8)")
    odd = lg.WeylElement((0, 1, 2, 3), (-1, 1, 1, 1))
    even = lg.WeylElement((1, 0, 2, 3), (-1, -1, 1, 1))
    assert not lg.is_legal(g, odd) and lg.is_legal(g, even)
    assert not lg.is_legal(lg.make_group("SU(3)"), lg.WeylElement((0, 1, 2), (-1, 1, 1)))
    w = lg.WeylElement((2, 0, 1), (1, 1, 1))
    assert w.inverse().inverse() == w


def test_standard_embeddings():
    so3 = lg.standard_embedding("real-in-complex", "SU(3)", "SO(3)")
    assert so3.source_rank == 2 and so3.target_rank == 1
    sp1 = lg.standard_embedding("block", "Sp(2)", "Sp(1)")
    assert sp1.matrix == ((1,), (0,))
    with pytest.raises(lg.EmbeddingError):
        lg.standard_embedding("bogus", "SU(3)", "SO(3)")
    with pytest.raises(lg.EmbeddingError):
        lg.standard_embedding("real-in-complex", "SU(4)", "SO(3)")
    with pytest.raises(lg.EmbeddingError):
        lg.standard_embedding("block", "Sp(1)", "Sp(2)")


def test_recipe_composition():
    direct = lg.standard_embedding("block", "SU(4)", "S(U(2)U(2))")
    chain = lg.embedding_from_recipe("S(U(2)U(2))", ["block"], "SU(4)")
    assert chain.matrix == direct.matrix
    with pytest.raises(lg.EmbeddingError):
        lg.embedding_from_recipe("SO(3)", [], "SU(3)")
    with pytest.raises(lg.EmbeddingError):
        lg.embedding_from_recipe("SO(3)", [{"kind": "block", "into": "SO(5)"}], "SU(3)")


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.integers(-2, 2), min_size=3, max_size=3), min_size=4, max_size=4),
       st.lists(st.lists(st.integers(-2, 2), min_size=2, max_size=2), min_size=3, max_size=3),
       st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3), st.integers(0, 3)),
                min_size=1, max_size=4))
def test_compose_is_functorial(a, b, exps):
    try:
        outer = lg.TorusMap(tuple(tuple(Fraction(x) for x in r) for r in a), 4, 3)
        inner = lg.TorusMap(tuple(tuple(Fraction(x) for x in r) for r in b), 3, 2)
    except lg.EmbeddingError:
        return
    p = Polynomial({e: 1 for e in exps}, 4)
    both = lg.compose(outer, inner)
    assert substitute_linear(substitute_linear(p, outer), inner) == substitute_linear(p, both)


def test_compose_shape_mismatch():
    a = lg.identity_map(lg.make_group("U(2)"))
    b = lg.identity_map(lg.make_group("U(3)"))
    with pytest.raises(lg.EmbeddingError):
        lg.compose(a, b)


def test_torus_map_must_be_injective():
    with pytest.raises(lg.EmbeddingError):
        lg.TorusMap(((1, 1), (1, 1)), 2, 2)


def test_weyl_search_finds_legal_element():
    g = lg.make_group("SO(10)")
    first = lg.embedding_from_recipe("SO(9)", ["block"], g)
    second = lg.compose(first, lg.identity_map(lg.make_group("SO(9)")))
    w = lg.weyl_orbit_search(g, first, second)
    assert w is not None and lg.is_legal(g, w)


def test_weyl_search_moves_coordinate_blocks():
    g = lg.make_group("U(4)")
    m1 = lg.TorusMap(((1,), (0,), (0,), (0,)), 4, 1)
    m2 = lg.TorusMap(((0,), (0,), (1,), (0,)), 4, 1)
    w = lg.weyl_orbit_search(g, m1, m2)
    assert w is not None and lg.is_legal(g, w)
    img = w.act(lg.ambient_image(g, m1))
    assert img == [[0], [0], [1], [0]]


def test_weyl_search_respects_sign_rules():
    # in SU(2) the diagonal (1, -1) is the torus itself; in U(2) the lines (1, 1) and (1, -1) differ
    g = lg.make_group("U(2)")
    m1 = lg.TorusMap(((1,), (1,)), 2, 1)
    m2 = lg.TorusMap(((1,), (-1,)), 2, 1)
    assert lg.weyl_orbit_search(g, m1, m2) is None
    h = lg.make_group("Sp(2)")
    assert lg.weyl_orbit_search(h, m1, m2) is not None


def test_weyl_search_bound():
    g = lg.make_group("U(9)", max_rank=12)
    m = lg.identity_map(g)
    with pytest.raises(lg.SearchBoundExceeded):
        lg.weyl_orbit_search(g, m, m, max_rank=8)


@pytest.mark.parametrize("seed", range(10))
def test_random_weyl_elements_preserve_invariants(seed):
    rng = random.Random(seed)
    for label in ("SO(7)", "SO(8)", "Sp(3)", "SU(4)", "S(U(2)U(2))", "SO(3)xSp(2)"):
        g = lg.make_group(label)
        w = lg.random_weyl_element(g, rng)
        assert lg.is_legal(g, w)
        assert all(w.act_polynomial(g, p) == p for p in g.invariant_generators)
