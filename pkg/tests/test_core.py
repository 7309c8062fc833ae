from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from mdimlab import gallery
from mdimlab.core import (AFFINE, IDENTITY, GluingError, Interval, ParityError, block_map,
                          embed_near_fixed_point, from_document, glue, identity_map, map_eval,
                          orbit, product, tent_eval, tent_iterate, to_document, uniform_block)
from mdimlab.numeric import Arith, DomainError, Ordering

fractions01 = st.fractions(min_value=0, max_value=1, max_denominator=10 ** 6)


def ref_tent(x):
    # reference formula, written out independently
    y = 3 * x - 1
    y = y if y >= 0 else -y
    y = 1 - y
    return y if y >= 0 else -y


def ref_block(a, b, s, x):
    """T^-1 o full s-branch map o T, computed leg by leg."""
    u = (x - a) / (b - a)
    if u in (0, 1):
        return x
    j = 0
    while F(j + 1, s) < u:
        j += 1
    frac = u * s - j
    v = frac if j % 2 == 0 else 1 - frac
    return a + (b - a) * v


class TestTent:
    @pytest.mark.parametrize("x,y", [(F(0), 0), (F(1), 1), (F(1, 3), 1), (F(1, 2), F(1, 2))])
    def test_examples(self, x, y):
        assert tent_eval(x) == y

    def test_iterate_structure(self):
        g1 = tent_iterate(1)
        assert g1.branches == 3 and g1.breakpoints() == [0, F(1, 3), F(2, 3), 1]
        g2 = tent_iterate(2)
        assert g2.branches == 9
        assert all(b - a == F(1, 9) for a, b in zip(g2.breakpoints(), g2.breakpoints()[1:]))
        assert g2(F(1, 9)) == 1
        assert [g2.orientation(j) for j in (1, 2, 3)] == [1, -1, 1]

    def test_domain(self):
        with pytest.raises(DomainError):
            tent_eval(F(3, 2))

    @given(fractions01, st.integers(1, 4))
    def test_iterate_is_composition(self, x, n):
        y = x
        for _ in range(n):
            y = ref_tent(y)
        assert tent_iterate(n)(x) == y


class TestBlocks:
    def test_uniform_examples(self):
        assert uniform_block(Interval(F(0), F(1)), 3).evaluate(F(1, 3)) == 1
        assert uniform_block(Interval(F(0), F(1, 2)), 3).evaluate(F(0)) == 0
        assert uniform_block(Interval(F(2, 3), F(8, 9)), 9).evaluate(F(2, 3)) == F(2, 3)

    @pytest.mark.parametrize("legs", [2, 4, 1])
    def test_even_or_small_legs_rejected(self, legs):
        with pytest.raises(ParityError):
            uniform_block(Interval(F(0), F(1)), legs)

    @given(fractions01, st.sampled_from([3, 5, 7, 9, 27]),
           st.fractions(0, F(1, 2), max_denominator=100))
    def test_block_matches_reference_and_is_invariant(self, u, s, a):
        b = a + F(1, 3)
        x = a + (b - a) * u
        blk = uniform_block(Interval(a, b), s)
        y = blk.evaluate(x)
        assert y == ref_block(a, b, s, x)
        assert a <= y <= b


class TestMaps:
    def test_phi_a_examples(self):
        m = gallery.phi_a(1)
        assert map_eval(m, F(2, 3)) == F(2, 3)
        # T_1: [0,2/3] -> [0,1]; T_1(1/9) = 1/6, g(1/6) = 1/2, T_1^-1(1/2) = 1/3
        assert map_eval(m, F(1, 9)) == F(1, 3)
        assert map_eval(m, F(1)) == 1

    def test_orbits(self):
        assert orbit(identity_map(), F(2, 5), 5) == [F(2, 5)] * 5
        bm = block_map(uniform_block(Interval(F(0), F(1)), 3))
        assert orbit(bm, F(1, 3), 3) == [F(1, 3), 1, 1]

    @given(fractions01)
    def test_phi_a_block_invariance(self, u):
        m = gallery.phi_a(1)
        x = F(2, 3) + F(2, 9) * u
        assert all(F(2, 3) <= y <= F(8, 9) for y in orbit(m, x, 4))

    def test_glue(self):
        g = glue(identity_map(), identity_map())
        for x in (F(0), F(1, 7), F(1, 2), F(5, 6), F(1)):
            assert g(x) == x
        a, b = gallery.phi_a(1), gallery.hazard_map()
        assert len(glue(a, b).blocks(5)) == len(a.blocks(5)) + len(b.blocks(5))

    def test_glue_phi01_structure(self):
        g = glue(gallery.phi_zero_one(), gallery.phi_a(1))
        left = [b for b in g.blocks(5) if b.interval.right <= 0.5 + 1e-30]
        assert left and left[0].interval.left == 0
        assert [b.kind for b in left[:4]] == ["horseshoe", "identity", "identity", "horseshoe"]

    def test_glue_mismatch(self):
        flip = from_document({"name": "flip", "mode": "rational", "segments": [
            {"k": 1, "left": "0", "right": "1", "kind": AFFINE, "image": ["1", "0"]}]})
        with pytest.raises(GluingError):
            glue(flip, identity_map())

    def test_embed_near_fixed_point(self):
        inner = gallery.phi_a(1)
        out = embed_near_fixed_point(identity_map(), F(0), F(1), inner)
        for x in (F(0), F(1, 9), F(1, 3)):
            assert out(x / 2) == inner(x) / 2
        assert out(F(1, 2)) == F(1, 2) and out(F(1)) == 1
        assert out(F(3, 4)) == F(3, 4)  # bridge from 1/2 to 1 is the identity here

    def test_product(self):
        p = product([identity_map()])
        assert p((F(1, 3),)) == (F(1, 3),)
        a = gallery.phi_a(1)
        pp = product([a, a])
        assert pp((F(1, 9), F(2, 3))) == (a(F(1, 9)), a(F(2, 3)))
        assert pp.distance((0, 0), (1, 1)) == 2

    def test_document_round_trip(self):
        m = gallery.phi_a(1)
        doc = to_document(m, 6)
        back = from_document(doc)
        for x in (F(1, 9), F(7, 10), F(9, 10), F(99, 100)):
            if x <= m.blocks(6)[-1].interval.right:
                assert back(x) == m(x)
        assert to_document(back)["segments"][:6] == doc["segments"]

    def test_kinds(self):
        m = gallery.phi_zero_b(1)
        assert [b.kind for b in m.blocks(5)] == ["horseshoe", IDENTITY, IDENTITY, "horseshoe",
                                                  IDENTITY]


class TestArith:
    def test_compare_radius(self):
        ar = Arith.floating(64)
        one = ar.num(1)
        assert ar.compare(one, one + ar.radius / 2) is Ordering.INDISTINGUISHABLE
        assert ar.compare(one, one + 4 * ar.radius) is Ordering.LESS
        assert Arith.rational().compare(F(1, 3), F(1, 3)) is Ordering.EQUAL

    @given(st.fractions(max_denominator=10 ** 9))
    def test_to_str_round_trip(self, x):
        ar = Arith.rational()
        assert ar.num(ar.to_str(x)) == x

    def test_parse(self):
        assert Arith.parse("float:128").bits == 128
        assert Arith.parse("rational").exact
        with pytest.raises(TypeError):
            Arith.rational().pi()


@settings(max_examples=50)
@given(fractions01)
def test_float_and_rational_agree(x):
    exact = gallery.phi_a(1)
    approx = gallery.phi_a(F(1, 1), bits=128)
    fl_mode = Arith.floating(128)
    # the same map in float mode stays within the certified radius times the slope
    fmap = from_document({**to_document(exact, 8), "mode": "float:128"})
    if x <= exact.blocks(8)[-1].interval.right:
        assert abs(fmap(fl_mode.num(x)) - fl_mode.num(exact(x))) <= fl_mode.radius * 3 ** 9
    assert approx.arith.exact  # integer r stays rational
