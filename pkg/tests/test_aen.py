import itertools
import math

import numpy as np
import pytest
from scipy import integrate

from expansion_coding import DomainError, LevelRange, RangeMismatchError, truncated_mean
from expansion_coding.aen import (
    ChannelSpec,
    capacity,
    carry_bound,
    carry_profile,
    compliant_range,
    effective_noise,
    gap_report,
    input_profile,
    noise_profile,
    optimal_input_density,
    qary_level_rates,
    rate_carries_as_noise,
    rate_decoding_carries,
    rate_qary_decoding_carries,
    shift_mismatch,
    verify_carry_bound,
    verify_entropy_bounds,
)
from expansion_coding.expansion import BernoulliProfile, level_prob

LOG2E = 1.442695040888963407359924681001892137426645954153
# log2(1 + 2^15), mpmath
CAP_2_15 = 15.000044026886827316717644108706717580639481914665
FIG6 = ChannelSpec(2.0**15, 1.0)
FIG6_RANGE = LevelRange(-5, 20)


def h(p):
    return 0.0 if p in (0.0, 1.0) else -(p * math.log2(p) + (1 - p) * math.log2(1 - p))


def enumerate_carries(p, q):
    """Exact carry-in and flip probabilities by summing over every pair of
    input/noise bit patterns on the window."""
    w = len(p)
    carry = np.zeros(w)
    flip = np.zeros(w)
    for xs in itertools.product([0, 1], repeat=w):
        px = np.prod([pi if b else 1 - pi for b, pi in zip(xs, p)])
        for zs in itertools.product([0, 1], repeat=w):
            pz = np.prod([qi if b else 1 - qi for b, qi in zip(zs, q)])
            c = 0
            for i in range(w):
                carry[i] += px * pz * c
                s = xs[i] + zs[i] + c
                flip[i] += px * pz * ((s & 1) != xs[i])
                c = s >> 1
    return carry, flip


class TestCapacity:
    def test_unit_snr(self):
        assert capacity(ChannelSpec(1.0, 1.0)) == 1.0

    def test_tiny_snr(self):
        assert capacity(ChannelSpec(1e-300, 1.0)) == pytest.approx(0.0, abs=1e-299)

    def test_fig6_regime(self):
        assert capacity(FIG6) == pytest.approx(CAP_2_15, rel=1e-15)

    @pytest.mark.parametrize("e_x,e_z", [(0, 1), (1, -1), (math.inf, 1), (1, math.nan)])
    def test_invalid_spec(self, e_x, e_z):
        with pytest.raises(DomainError):
            ChannelSpec(e_x, e_z)

    def test_db_conversion(self):
        assert ChannelSpec.from_snr_db(20.0).snr == pytest.approx(100.0)


class TestOptimalInput:
    def test_atom_vanishes_at_high_snr(self):
        _, atom = optimal_input_density(0.0, ChannelSpec(1e6, 1.0))
        assert atom == pytest.approx(1e-6, rel=1e-5)

    def test_atom_half(self):
        assert optimal_input_density(0.0, ChannelSpec(1.0, 1.0))[1] == 0.5

    @pytest.mark.parametrize("e_x,e_z", [(1.0, 1.0), (10.0, 0.5), (3.0, 7.0)])
    def test_normalisation(self, e_x, e_z):
        spec = ChannelSpec(e_x, e_z)
        top = 100 * (e_x + e_z)
        mass, _ = integrate.quad(lambda x: optimal_input_density(x, spec)[0], 0, top, limit=200)
        assert mass == pytest.approx(1 - optimal_input_density(0.0, spec)[1], abs=1e-6)

    def test_negative_x(self):
        with pytest.raises(DomainError):
            optimal_input_density(-1.0, ChannelSpec(1.0, 1.0))


class TestProfiles:
    def test_shift_by_fifteen(self):
        rng = LevelRange(-30, 30)
        p = input_profile(FIG6, rng)
        q = noise_profile(FIG6, rng)
        np.testing.assert_array_equal(p.probs[15:], q.probs[: rng.width - 15])
        assert shift_mismatch(FIG6, rng) == 0.0

    def test_noise_level_zero(self):
        assert noise_profile(ChannelSpec(1.0, 1.0), LevelRange(0, 0)).probs[0] == pytest.approx(
            0.26894142136999512, rel=1e-15
        )

    @pytest.mark.parametrize("lo,hi", [(-5, 20), (-2, 3), (0, 40), (-40, 10)])
    def test_power_constraint(self, lo, hi):
        assert truncated_mean(input_profile(FIG6, LevelRange(lo, hi))) <= FIG6.e_x

    @pytest.mark.parametrize("xi,eta", [(3, 0), (10, -2), (5, 5), (0, -4)])
    def test_shift_identity_integer_logs(self, xi, eta):
        spec = ChannelSpec(2.0**xi, 2.0**eta)
        assert shift_mismatch(spec, LevelRange(-25, 25)) == 0.0


class TestCarries:
    def test_lowest_level_zero(self):
        c = carry_profile(input_profile(FIG6, FIG6_RANGE), noise_profile(FIG6, FIG6_RANGE))
        assert c.probs[0] == 0.0

    def test_zero_input_no_carries(self):
        rng = LevelRange(-5, 5)
        zero = BernoulliProfile(rng, np.zeros(rng.width))
        c = carry_profile(zero, noise_profile(FIG6, rng))
        np.testing.assert_array_equal(c.probs, 0.0)

    def test_fig6_carry_bound(self):
        c = carry_profile(input_profile(FIG6, FIG6_RANGE), noise_profile(FIG6, FIG6_RANGE))
        assert np.all(c.probs < 0.5)
        for l in FIG6_RANGE:
            if l > 0:
                assert c.at(l) < carry_bound(l, 0.0)

    @pytest.mark.parametrize(
        "spec,rng",
        [
            (ChannelSpec(4.0, 1.0), LevelRange(-2, 2)),
            (ChannelSpec(2.0**5, 0.5), LevelRange(-1, 4)),
            (ChannelSpec(0.3, 2.0), LevelRange(-3, 1)),
        ],
    )
    def test_recursion_matches_enumeration(self, spec, rng):
        p = input_profile(spec, rng)
        q = noise_profile(spec, rng)
        carry, flip = enumerate_carries(p.probs, q.probs)
        c = carry_profile(p, q)
        np.testing.assert_allclose(c.probs, carry, atol=1e-14)
        np.testing.assert_allclose(effective_noise(q, c).probs, flip, atol=1e-14)

    def test_mismatched_ranges(self):
        with pytest.raises(RangeMismatchError):
            carry_profile(input_profile(FIG6, LevelRange(0, 3)), noise_profile(FIG6, LevelRange(0, 4)))


class TestEffectiveNoise:
    def test_identity(self):
        rng = LevelRange(-3, 3)
        q = noise_profile(FIG6, rng)
        zero = BernoulliProfile(rng, np.zeros(rng.width))
        np.testing.assert_array_equal(effective_noise(q, zero).probs, q.probs)

    def test_arithmetic(self):
        rng = LevelRange(0, 0)
        out = effective_noise(BernoulliProfile(rng, [0.2]), BernoulliProfile(rng, [0.3]))
        assert out.probs[0] == pytest.approx(0.38, abs=1e-15)

    def test_dominates_noise(self):
        q = noise_profile(FIG6, FIG6_RANGE)
        c = carry_profile(input_profile(FIG6, FIG6_RANGE), q)
        qt = effective_noise(q, c)
        assert np.all(qt.probs >= q.probs)
        assert np.all(qt.probs < 0.5)


class TestRates:
    def test_report_invariants(self):
        for rep in (rate_carries_as_noise(FIG6, FIG6_RANGE), rate_decoding_carries(FIG6, FIG6_RANGE)):
            assert np.all(rep.per_level >= -1e-12)
            assert rep.total == pytest.approx(rep.per_level.sum(), abs=1e-9)
            assert rep.gap == pytest.approx(rep.capacity - rep.total, abs=1e-9)

    def test_fig6_curve_shape(self):
        rep = rate_carries_as_noise(FIG6, FIG6_RANGE)
        r2 = rate_decoding_carries(FIG6, FIG6_RANGE)
        lv = FIG6_RANGE.levels
        # levels well below the noise level and above the input level carry nothing
        assert np.all(rep.per_level[lv <= -3] < 1e-2)
        assert np.all(rep.per_level[lv >= 19] < 1e-4)
        # middle levels carry roughly one bit each when carries are decoded
        mid = (lv >= 3) & (lv <= 13)
        assert np.all(r2.per_level[mid] > 0.9)
        assert r2.total >= rep.total

    def test_single_level_has_no_carry(self):
        spec = ChannelSpec(3.0, 1.0)
        rng = LevelRange(0, 0)
        p, q = level_prob(1 / 3.0, 0), level_prob(1.0, 0)
        expected = h(p * (1 - q) + q * (1 - p)) - h(q)
        assert rate_carries_as_noise(spec, rng).total == pytest.approx(expected, abs=1e-15)
        assert rate_decoding_carries(spec, rng).total == pytest.approx(expected, abs=1e-15)

    def test_per_level_rate_is_mutual_information(self):
        # brute force I(X; X xor Z) from the 2x2 joint law
        rng = LevelRange(-3, 6)
        spec = ChannelSpec(16.0, 0.5)
        rep = rate_decoding_carries(spec, rng)
        for i, l in enumerate(rng):
            p, q = level_prob(1 / spec.e_x, l), level_prob(1 / spec.e_z, l)
            joint = {(x, y): (p if x else 1 - p) * (q if x != y else 1 - q) for x in (0, 1) for y in (0, 1)}
            py = {y: joint[(0, y)] + joint[(1, y)] for y in (0, 1)}
            px = {0: 1 - p, 1: p}
            mi = sum(v * math.log2(v / (px[x] * py[y])) for (x, y), v in joint.items() if v > 0)
            assert rep.per_level[i] == pytest.approx(mi, abs=1e-12)

    def test_unit_snr_below_capacity(self):
        rep = rate_decoding_carries(ChannelSpec(1.0, 1.0), LevelRange(-30, 30))
        assert 0 < rep.total < 1.0

    def test_decode_gap_at_twenty_db(self):
        spec = ChannelSpec.from_snr(100.0)
        eps = 0.01
        rng = LevelRange(-math.ceil(-math.log2(eps) - math.log2(spec.e_z)), math.ceil(-math.log2(eps) + math.log2(spec.e_x)))
        assert rng == compliant_range(spec, eps)
        assert rate_decoding_carries(spec, rng).total >= math.log2(101) - 5 * eps * LOG2E

    def test_widening_never_decreases_decode_rate(self):
        spec = ChannelSpec(2.0**6, 1.0)
        prev = -1.0
        for k in range(0, 15):
            total = rate_decoding_carries(spec, LevelRange(-k, 6 + k)).total
            assert total >= prev - 1e-12
            prev = total

    @pytest.mark.parametrize("e_x,e_z", [(2.0**15, 1.0), (100.0, 1.0), (1.0, 1.0), (3.0, 0.25)])
    def test_general_invariants(self, e_x, e_z):
        spec = ChannelSpec(e_x, e_z)
        rng = LevelRange(-20, 25)
        q = noise_profile(spec, rng)
        c = carry_profile(input_profile(spec, rng), q)
        qt = effective_noise(q, c)
        assert np.all(c.probs >= 0) and np.all(c.probs < 0.5)
        assert np.all(qt.probs >= q.probs) and np.all(qt.probs < 0.5)
        r2 = rate_decoding_carries(spec, rng)
        assert np.all(r2.per_level >= 0)
        assert r2.total <= capacity(spec) + 1e-9


class TestQaryRates:
    @pytest.mark.parametrize("e_x,e_z", [(2.0**15, 1.0), (10.0, 1.0), (1.0, 1.0), (5.0, 0.3)])
    def test_binary_consistency(self, e_x, e_z):
        spec = ChannelSpec(e_x, e_z)
        rng = LevelRange(-12, 20)
        a = rate_qary_decoding_carries(spec, rng, 2)
        b = rate_decoding_carries(spec, rng)
        assert a.total == pytest.approx(b.total, abs=1e-9)
        np.testing.assert_allclose(a.per_level, b.per_level, atol=1e-12)

    def test_monotone_in_q(self):
        spec = ChannelSpec(2.0**10, 1.0)
        totals = [rate_qary_decoding_carries(spec, compliant_range(spec, 0.01, q), q).total for q in (2, 3, 4, 8, 16)]
        assert all(b >= a for a, b in zip(totals, totals[1:]))
        # enhancement beyond q = 8 is small compared with the rate itself
        assert totals[-1] - totals[0] < 0.01 * totals[0]

    def test_uniform_noise_level_is_useless(self):
        p = np.array([[0.5, 0.3, 0.2]])
        u = np.full((1, 3), 1 / 3)
        assert qary_level_rates(p, u)[0] == pytest.approx(0.0, abs=1e-15)

    def test_bad_alphabet(self):
        with pytest.raises(DomainError):
            rate_qary_decoding_carries(FIG6, FIG6_RANGE, 1)


class TestBounds:
    def test_no_violations_unit_noise(self):
        rep = verify_entropy_bounds(ChannelSpec(2.0**15, 1.0), LevelRange(-20, 20))
        assert rep.ok
        assert len(rep.checks) == 2 * 41

    def test_lower_bound_at_eta(self):
        rep = verify_entropy_bounds(ChannelSpec(4.0, 1.0), LevelRange(0, 0))
        low = [c for c in rep.checks if c.name == "H(q) lower"][0]
        assert low.rhs == pytest.approx(1 - LOG2E, abs=1e-15)
        assert low.ok

    def test_upper_slack_ten_levels_up(self):
        rep = verify_entropy_bounds(ChannelSpec(4.0, 1.0), LevelRange(10, 10))
        up = [c for c in rep.checks if c.name == "H(q) upper"][0]
        # 3 log2(e) 2^-10, mpmath
        assert up.rhs == pytest.approx(0.0042266456276043849824997793388727308713671268188076, rel=1e-14)
        # H(q_10) ~ 2.8e-442 underflows
        assert up.lhs == 0.0
        assert up.slack > 0

    @pytest.mark.parametrize("k", range(-5, 6))
    def test_grid(self, k):
        spec = ChannelSpec(2.0 ** (k + 12), 2.0**k)
        rng = LevelRange(-30, 30)
        assert verify_entropy_bounds(spec, rng).ok
        assert verify_carry_bound(spec, rng).ok

    def test_bound_violation_detected(self):
        # a hand-made check with negative slack counts as a violation
        from expansion_coding.aen import BoundCheck, BoundReport

        rep = BoundReport((BoundCheck("x", 0, 1.0, 0.5, -0.5),))
        assert not rep.ok and len(rep.violations) == 1


class TestGapReport:
    def test_eps_tenth(self):
        v = gap_report(0.1, ChannelSpec.from_snr(10.0))
        assert v.hypotheses_met
        assert v.gap_decode_carries <= 0.5 * LOG2E
        assert v.passed

    def test_boundary_half(self):
        v = gap_report(0.5, ChannelSpec.from_snr(2.0))
        assert v.hypotheses_met and v.passed
        assert v.range == LevelRange(-1, 2)

    def test_precondition_unmet(self):
        v = gap_report(0.1, ChannelSpec.from_snr(5.0))
        assert not v.hypotheses_met
        assert not v.passed
        assert "1/epsilon" in v.reason

    def test_scheme1_proven_constant(self):
        v = gap_report(2.0**-10, ChannelSpec.from_snr(2.0**20))
        assert v.gap_carries_as_noise <= 19 * LOG2E

    @pytest.mark.parametrize("eps", [0.0, 1.0, -0.1])
    def test_bad_epsilon(self, eps):
        with pytest.raises(DomainError):
            gap_report(eps, FIG6)
