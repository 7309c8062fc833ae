import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from mdimlab import gallery
from mdimlab.core import Interval, block_map, identity_map, uniform_block
from mdimlab.holder import (IndistinguishableError, ModulusOfContinuity, closed_adjacent,
                            closed_far, closed_far_limit, cross_block_bound, far_block_bound,
                            holder_ratio, holder_verdict, leg_pair_ratio, modulus_check,
                            within_branch_sup, zero_case_limit)
from mdimlab.numeric import DomainError

UNIT = Interval(F(0), F(1))
B3 = block_map(uniform_block(UNIT, 3))
L3 = math.log(3)


class TestModulus:
    def test_validation(self):
        for a in (0, F(3, 2)):
            with pytest.raises(ValueError):
                ModulusOfContinuity.power(a)
        with pytest.raises(DomainError):
            ModulusOfContinuity.omega()(F(1, 2))

    def test_values(self):
        w = ModulusOfContinuity.omega()
        assert w(0) == 0
        assert float(w(F(1, 4))) == pytest.approx(math.log(4) / 4, rel=1e-15)
        assert float(ModulusOfContinuity.power(F(1, 2))(F(1, 4))) == pytest.approx(0.5)


class TestRatio:
    def test_identity(self):
        one = ModulusOfContinuity.power(1)
        assert holder_ratio(identity_map(), F(1, 5), F(1, 2), one) == 1

    def test_block_slope(self):
        assert holder_ratio(B3, F(1, 30), F(1, 10), ModulusOfContinuity.power(1)) == 3

    def test_indistinguishable(self):
        with pytest.raises(IndistinguishableError):
            holder_ratio(B3, F(1, 3), F(1, 3), ModulusOfContinuity.power(1))

    def test_hazard_omega_pair(self):
        # x = 0 against the left end of block n: the analyzed configuration stays below 3
        m, w = gallery.hazard_map(), ModulusOfContinuity.omega()
        for n in range(2, 25):
            assert holder_ratio(m, 0, F(1, 2 ** n) + F(1, 2 ** n) / (2 * n + 1), w) <= 3

    @settings(max_examples=60, deadline=None)
    @given(st.sampled_from([3, 5, 9]), st.integers(0, 8), st.fractions(0, 1, max_denominator=50),
           st.fractions(0, 1, max_denominator=50), st.sampled_from([F(1, 4), F(1, 2), F(9, 10)]))
    def test_same_leg_below_closed_form(self, s, leg, u, v, alpha):
        leg = leg % s
        blk = uniform_block(UNIT, s)
        w = F(1, s)
        x, y = leg * w + u * w, leg * w + v * w
        if x == y:
            return
        mod = ModulusOfContinuity.power(alpha)
        r = holder_ratio(block_map(blk), x, y, mod)
        assert r <= within_branch_sup(blk, mod) * (1 + 1e-9)


class TestClosedForms:
    def test_within_phi_a(self):
        m = gallery.phi_a(1)
        half = ModulusOfContinuity.power(F(1, 2))
        vals = [float(within_branch_sup(b, half)) for b in m.blocks(8)]
        assert max(vals) - min(vals) < 1e-12
        six = ModulusOfContinuity.power(F(3, 5))
        g = [float(within_branch_sup(b, six)) for b in m.blocks(8)]
        assert math.log(g[-1] / g[-2]) == pytest.approx(0.2 * L3, rel=1e-9)

    def test_adjacent_constant(self):
        want = math.sqrt(3 * (2 / 3) * 10)
        for m in (1, 5, 40):
            assert float(closed_adjacent(1, F(2, 3), F(1, 2), m)) == pytest.approx(want, rel=1e-12)
        assert float(cross_block_bound(gallery.phi_a(1), 3, F(1, 2))) == pytest.approx(want)

    def test_adjacent_growth_and_decay(self):
        up = [closed_adjacent(1, F(2, 3), F(3, 5), m) for m in (4, 5)]
        down = [closed_adjacent(1, F(2, 3), F(2, 5), m) for m in (4, 5)]
        assert float(up[1] / up[0]) == pytest.approx(3 ** 0.2, rel=1e-12)
        assert float(down[1] / down[0]) == pytest.approx(3 ** -0.2, rel=1e-12)

    def test_far_limit(self):
        # (1 - 3^-r)^(a-1) 3^(m(a-1)r + r) at r=1, a=1/2, m=2 is (3/2)^(1/2)
        assert float(closed_far_limit(1, F(1, 2), 2)) == pytest.approx(math.sqrt(1.5), rel=1e-12)
        bound, lim = far_block_bound(gallery.phi_a(1), 2, 60, F(1, 2))
        assert float(bound) == pytest.approx(float(closed_far(1, F(1, 2), 2, 60)))
        with pytest.raises(ValueError):
            closed_far(1, F(1, 2), 2, 1)

    def test_far_decays_in_m(self):
        vals = [float(closed_far(1, F(1, 2), m, 3)) for m in (1, 5, 10)]
        assert vals[0] > vals[1] > vals[2]

    def test_zero_case(self):
        assert float(zero_case_limit(1)) == pytest.approx(1 / math.log(1.5), rel=1e-12)

    def test_generic_adjacent_fallback(self):
        v = cross_block_bound(gallery.hazard_map(), 3, F(1, 2))
        assert 0 < v < 10


class TestVerdicts:
    def test_phi_a_examples(self):
        m = gallery.phi_a(1)
        assert holder_verdict(m, F(1, 2), 15).verdict == "bounded"
        rep = holder_verdict(m, F(3, 5), 15)
        assert rep.verdict == "diverging" and rep.growth_fit > 0
        assert abs(rep.growth_fit - 0.2 * L3) <= 0.2 * 0.2 * L3

    def test_phi_beta(self):
        assert holder_verdict(gallery.phi_beta(2), F(1, 10), 15).verdict == "diverging"
        m = gallery.phi_beta(2)
        C = float(m.meta["C"])
        for n in (4, 8, 12):
            want = 3 ** (0.5 * n) * C ** 0.5 / n ** (2 * 0.5)
            assert float(leg_pair_ratio(m, n, F(1, 2))) == pytest.approx(want, rel=0.01)

    @pytest.mark.parametrize("r", [F(1, 2), F(1), F(2)])
    def test_frontier(self, r):
        m = gallery.phi_a(r)
        star = r / (r + 1)
        assert holder_verdict(m, star - F(1, 20), 15).verdict == "bounded"
        assert holder_verdict(m, star + F(1, 20), 15).verdict == "diverging"

    def test_small_depth(self):
        with pytest.raises(ValueError):
            holder_verdict(gallery.phi_a(1), F(1, 2), 4)

    def test_omega_reports(self):
        ident = modulus_check(identity_map(), depth=10)
        assert ident.verdict == "bounded" and ident.sup <= 1
        haz = modulus_check(gallery.hazard_map(), depth=20)
        assert haz.verdict == "bounded" and haz.sup <= 3.5
        doc = haz.to_dict()
        assert doc["sample_plan"] == "structured-v1" and doc["modulus"] == "omega"

    def test_omega_implies_power(self):
        m = gallery.hazard_map()
        assert modulus_check(m, depth=15).verdict == "bounded"
        for a in range(1, 10):
            assert holder_verdict(m, F(a, 10), 15).verdict == "bounded"

    def test_diverging_has_positive_growth(self):
        rep = holder_verdict(gallery.phi_a(2), F(9, 10), 15)
        assert rep.verdict == "diverging" and rep.growth_fit > 0
