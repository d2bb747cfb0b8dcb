import random

import pytest

from eqformal import cartanmodel as cm
from eqformal import oracle as o
from eqformal.exactpoly import Polynomial, parse_poly


def model(g, k, emb):
    return cm.build_model(g, k, emb)


def circle(*weights):
    return model("SU(3)", "T^1", [{"kind": "matrix", "matrix": [[a] for a in weights]}])


def test_sphere_with_zero_differential():
    cx = o.PureComplex((), (7,), [Polynomial.zero(0, ())])
    assert cx.cohomology_upto(10) == [1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0]


def test_sp2_mod_sp1():
    m = model("Sp(2)", "Sp(1)", "block")
    assert o.dga_cohomology_upto(m, 8) == [1, 0, 0, 0, 0, 0, 0, 1, 0]
    assert o.verify_fiber_surjectivity(o.build_borel_model(m), N=7)


def test_su3_mod_so3():
    m = model("SU(3)", "SO(3)", "real-in-complex")
    assert o.dga_cohomology_upto(m, 6) == [1, 0, 0, 0, 0, 1, 0]


def test_su3_mod_maximal_torus_surjective():
    m = model("SU(3)", "S(U(1)U(1)U(1))", "block")
    assert o.verify_fiber_surjectivity(o.build_borel_model(m), N=12)
    assert o.verify_fiber_surjectivity(o.build_borel_model(m, "torus"), N=12)


def test_borel_model_of_sp2_mod_sp1():
    b = o.build_borel_model(model("Sp(2)", "Sp(1)", "block"), base="torus")
    assert b.copy_size == 1
    assert b.d_squared_vanishes()
    assert all(p.nvars == 2 for p in b.differentials)
    # each differential is p(u) - p(w), so it vanishes on the diagonal and is odd under the swap
    for p in b.differentials:
        assert all(p.evaluate([x, x]) == 0 for x in (1, 2, 5))
        assert p.evaluate([3, 1]) == -p.evaluate([1, 3])
    assert b.differentials[0] and not b.differentials[1]


def test_negative_control():
    imgs = [parse_poly(t, 2, "s") for t in ("s1^2", "s2^2", "s1*s2")]
    m = cm.pure_model(imgs)
    b = o.build_borel_model(m)
    report = o.fiber_surjectivity_report(b, 8)
    assert report[(5, 1)] == (2, 0)
    assert not o.verify_fiber_surjectivity(b, N=8)


def test_circle_that_is_not_equivariantly_formal():
    m = circle(1, 1, -2)
    assert o.dga_cohomology_upto(m, 7) == [1, 0, 1, 0, 0, 1, 0, 1]
    b = o.build_borel_model(m)
    assert o.fiber_surjectivity_report(b, 7)[(5, 1)] == (1, 0)
    assert not o.verify_fiber_surjectivity(b)
    assert o.verify_fiber_surjectivity(o.build_borel_model(circle(1, -1, 0)))


@pytest.mark.parametrize("g,k,emb", [
    ("SU(3)", "SO(3)", "real-in-complex"),
    ("SO(8)", "SO(4)", [{"kind": "diagonal", "into": "SO(4)xSO(4)"}, {"kind": "block"}]),
    ("SU(4)", "S(U(2)U(1)U(1))", "block"),
    ("Sp(3)", "SO(3)", "real-in-quaternionic"),
])
def test_reduction_preserves_cohomology(g, k, emb):
    m = model(g, k, emb)
    n = min(m.formal_dimension, 14)
    assert o.dga_cohomology_upto(m, n, reduce=True) == o.dga_cohomology_upto(m, n, reduce=False)


def test_reduced_fiber_and_borel_agree():
    m = model("SU(4)", "S(U(2)U(1)U(1))", "block")
    b = o.build_borel_model(m)
    r = b.copy_size
    full, kept_b = b.complex().reduced(range(r, 2 * r))
    fib, kept_f = b.fiber_complex().reduced()
    assert kept_b[:r] == tuple(range(r))
    assert kept_b[r:] == tuple(r + i for i in kept_f)


def test_modular_ranks_are_certified_or_exact():
    m = model("SO(8)", "SO(4)", [{"kind": "diagonal", "into": "SO(4)xSO(4)"}, {"kind": "block"}])
    cx = o.build_borel_model(m).complex()
    for n in range(0, 16):
        for s in range(len(cx.odd_degrees) + 1):
            assert cx.rank_d(n, s) == cx.rank_exact(n, s)


def test_d_squared_on_random_borel_models():
    rng = random.Random(3)
    for _ in range(5):
        w = rng.choice([(2, 4), (2, 2), (4, 6)])
        imgs = []
        for deg in (8, 12, 10):
            terms = {}
            for a in range(deg // w[0] + 1):
                rest = deg - a * w[0]
                if rest % w[1] == 0 and rng.random() < 0.7:
                    terms[(a, rest // w[1])] = rng.randint(-3, 3)
            imgs.append(Polynomial(terms, 2, w))
        m = cm.pure_model(imgs, base_degrees=w, fiber_degrees=(7, 11, 9))
        assert o.build_borel_model(m).d_squared_vanishes()


def test_degree_bound():
    m = model("SU(3)", "SO(3)", "real-in-complex")
    with pytest.raises(o.ResourceBoundExceeded):
        o.dga_cohomology_upto(m, 41)
    with pytest.raises(o.ResourceBoundExceeded):
        o.verify_fiber_surjectivity(o.build_borel_model(m), N=50)


def test_basis_bound():
    cx = o.PureComplex((2, 2, 2), (3,), [parse_poly("s1^2", 3, "s", (2, 2, 2))], max_basis=3)
    with pytest.raises(o.ResourceBoundExceeded):
        cx.basis(20, 0)


def test_unknown_borel_base():
    with pytest.raises(ValueError):
        o.build_borel_model(model("SU(3)", "SO(3)", "real-in-complex"), base="other")
