import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from mdimlab import gallery
from mdimlab.core import Interval, block_map, identity_map, orbit, uniform_block
from mdimlab.numeric import LOG
from mdimlab.separation import (BowenContext, BudgetError, ScaleError, SepCount, dn_distance,
                                exhaustive_sep, grid_orbits, lap_count, rate_estimate,
                                sep_count_greedy, sep_lower_itinerary, span_count_greedy,
                                span_upper_bins, span_upper_lipschitz, write_counts)

UNIT = Interval(F(0), F(1))
B3 = block_map(uniform_block(UNIT, 3))


def brute_sep(fmap, n, eps, step):
    """Largest eps-separated subset by enumeration (tiny grids only)."""
    pts = [step * i for i in range(int(1 / step) + 1)]
    orbs = [orbit(fmap, p, n) for p in pts]
    d = lambda i, j: max(abs(a - b) for a, b in zip(orbs[i], orbs[j]))
    best = 1
    for size in range(2, len(pts) + 1):
        if not any(all(d(i, j) > eps for i, j in itertools.combinations(c, 2))
                   for c in itertools.combinations(range(len(pts)), size)):
            break
        best = size
    return best


class TestDistance:
    def test_examples(self):
        ctx = BowenContext(B3, 2)
        assert dn_distance(ctx, F(0), F(1, 9)) == F(1, 3)
        assert dn_distance(BowenContext(B3, 1), F(1, 5), F(1, 2)) == F(3, 10)
        assert dn_distance(BowenContext(identity_map(), 7), F(1, 5), F(1, 2)) == F(3, 10)

    @given(st.fractions(0, 1, max_denominator=500), st.fractions(0, 1, max_denominator=500),
           st.integers(1, 4))
    def test_matches_orbits(self, x, y, n):
        m = gallery.phi_a(1)
        want = max(abs(a - b) for a, b in zip(orbit(m, x, n), orbit(m, y, n)))
        assert dn_distance(BowenContext(m, n), x, y) == want


class TestGreedy:
    def test_identity(self):
        c = sep_count_greedy(BowenContext(identity_map(), 5), F(1, 4), F(1, 100))
        assert c.count == 4 and c.direction == "lower-bound"

    def test_block_n1(self):
        # points 0, 0.41, 0.82 are pairwise more than 0.4 apart, and the oracle agrees
        ctx = BowenContext(B3, 1)
        c = sep_count_greedy(ctx, F(2, 5), F(1, 100))
        assert c.count == 3
        assert exhaustive_sep(ctx, F(2, 5), F(1, 100)).count == 3

    def test_identity_span(self):
        # closed balls: the centre 1/2 covers [0,1] at eps = 1/2
        c = span_count_greedy(BowenContext(identity_map(), 3), F(1, 2), F(1, 100))
        assert c.count == 1 and c.direction == "empirical"

    def test_grid_step_rule(self):
        with pytest.raises(ValueError):
            sep_count_greedy(BowenContext(B3, 1), F(1, 9), F(1, 20))

    def test_budget(self):
        with pytest.raises(BudgetError):
            sep_count_greedy(BowenContext(B3, 3), F(1, 9), F(1, 10 ** 6), budget=10 ** 4)

    @pytest.mark.parametrize("n,eps,step", [(1, F(1, 4), F(1, 16)), (2, F(1, 4), F(1, 16)),
                                            (2, F(1, 3), F(1, 12)), (3, F(1, 4), F(1, 16))])
    def test_oracle_against_enumeration(self, n, eps, step):
        assert exhaustive_sep(BowenContext(B3, n), eps, step).count == brute_sep(B3, n, eps, step)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 3), st.sampled_from([F(1, 3), F(1, 4), F(1, 5), F(1, 6)]),
           st.sampled_from(["block3", "hazard", "phi_a", "identity"]))
    def test_inequalities(self, n, eps, name):
        m = {"block3": B3, "hazard": gallery.hazard_map(), "phi_a": gallery.phi_a(1),
             "identity": identity_map()}[name]
        ctx = BowenContext(m, n)
        go = grid_orbits(ctx, eps / 8)
        sep = sep_count_greedy(ctx, eps, eps / 8, orbits=go).count
        exh = exhaustive_sep(ctx, eps, eps / 8, go).count
        span = span_count_greedy(ctx, eps, eps / 8, orbits=go).count
        span_half = span_count_greedy(ctx, eps / 2, eps / 8, orbits=go).count
        assert span <= sep <= exh <= span_half
        # larger eps never separates more points
        assert sep_count_greedy(ctx, eps * 2, eps / 8, orbits=go).count <= sep

    def test_workers_deterministic(self):
        ctx = BowenContext(gallery.phi_a(1), 3)
        a = sep_count_greedy(ctx, F(1, 27), F(1, 270), workers=1)
        b = sep_count_greedy(ctx, F(1, 27), F(1, 270), workers=8)
        assert a == b


class TestCertified:
    def test_itinerary(self):
        assert sep_lower_itinerary(uniform_block(UNIT, 3), 1, F(1, 4)).count == 2
        assert sep_lower_itinerary(uniform_block(UNIT, 3), 4, F(1, 4)).count == 16
        assert sep_lower_itinerary(uniform_block(UNIT, 5), 2, F(1, 6)).count == 9
        with pytest.raises(ScaleError):
            sep_lower_itinerary(uniform_block(UNIT, 3), 1, F(1, 3))

    def test_itinerary_below_greedy_fine_grid(self):
        ctx = BowenContext(B3, 4)
        assert sep_count_greedy(ctx, F(1, 4), F(1, 1000)).count >= 16

    def test_lipschitz(self):
        assert span_upper_lipschitz(3, 2, F(1, 9)).count == 81
        for n in (1, 4, 9):
            assert span_upper_lipschitz(1, n, F(1, 4)).count == 4
        logs = [span_upper_lipschitz(3, n, F(1, 10 ** 6)).log_count for n in (20, 21, 22)]
        assert abs((logs[2] - logs[1]) - LOG.log(3)) < 1e-12
        assert span_upper_bins(2, F(1, 4)).count == 25

    def test_csv(self):
        rows = [SepCount.exact(1, F(1, 9), 9, "greedy-grid", "lower-bound"),
                span_upper_lipschitz(3, 400, F(1, 9))]
        text = write_counts(rows)
        assert text.splitlines()[0] == "n,epsilon,count_or_logcount,method,direction"
        assert text.splitlines()[1] == "1,1/9,9,greedy-grid,lower-bound"
        assert text.splitlines()[2].split(",")[2].startswith("log:")

    def test_direction_contract(self):
        with pytest.raises(ValueError):
            SepCount.exact(1, F(1, 9), 3, "itinerary-lower", "upper-bound")


class TestLapsAndRates:
    def test_laps(self):
        assert lap_count(B3, 2).count == 9
        assert lap_count(gallery.hazard_map(), 1, 3).count == 15
        assert lap_count(identity_map(), 7).count == 1

    def test_rates(self):
        blk = uniform_block(UNIT, 3)
        eps = F(1, 4)
        low = [sep_lower_itinerary(blk, n, eps) for n in range(1, 8)]
        up = [span_upper_lipschitz(3, n, eps) for n in range(1, 8)]
        est = rate_estimate(low + up)
        assert abs(est.lower_rate - LOG.log(2)) < 1e-12
        assert est.upper_rate >= LOG.log(3)
        far = [span_upper_lipschitz(3, n, eps) for n in (1000, 2000, 4000)]
        assert abs(rate_estimate(far).upper_rate - LOG.log(3)) < 1e-3
        # identity: counts do not depend on n, so both rates decay like 1/n
        ns = (100, 1000, 10000)
        up_id = [SepCount.exact(n, eps, 4, "lipschitz-upper", "upper-bound") for n in ns]
        low_id = [SepCount.exact(n, eps, 4, "greedy-grid", "lower-bound") for n in ns]
        assert rate_estimate(up_id).upper_rate < 2e-4
        assert rate_estimate(low_id).lower_rate < 2e-2

    def test_rates_need_horizons(self):
        with pytest.raises(ValueError):
            rate_estimate([span_upper_lipschitz(3, 1, F(1, 4))])
