import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from robustdea.scores import (BetaIndependent, CommonBernoulli, CommonUniform, CoverageError,
                              ExpertBernoulli, MaxEntropy, MomentAccumulator, ScoreEvents, entropy,
                              expected_score, mask_bits, materialize, moments, parse_mask_bits,
                              parse_model, pbar_curve, score_variance, subset_probability, subtree_weight,
                              uniform_integral_check)

probs = st.floats(0.0, 1.0, allow_nan=False)


def all_models(q, rng):
    return [ExpertBernoulli(tuple(rng.uniform(0, 1, q))), MaxEntropy(),
            BetaIndependent(tuple(rng.uniform(0.1, 5, q)), tuple(rng.uniform(0.1, 5, q))),
            CommonUniform(), CommonBernoulli(float(rng.uniform()))]


def test_mask_strings():
    assert mask_bits(0b1001, 4) == "1001"
    assert mask_bits(0b0001, 4) == "1000"
    assert parse_mask_bits("0101") == 0b1010
    for m in range(16):
        assert parse_mask_bits(mask_bits(m, 4)) == m


class TestProbabilities:
    def test_common_uniform_pair(self):
        assert subset_probability(CommonUniform(), 0b0101, 4) == pytest.approx(1 / 30)

    def test_max_entropy(self):
        assert subset_probability(MaxEntropy(), 0b101010101, 9) == 1 / 512

    def test_beta_product(self):
        m = BetaIndependent((2.0, 1.0), (1.0, 1.0))
        assert subset_probability(m, 0b01, 2) == pytest.approx(1 / 3)

    def test_zero_power_zero(self):
        m = ExpertBernoulli((1.0, 0.0, 1.0))
        assert subset_probability(m, 0b101, 3) == 1.0
        assert subset_probability(m, 0b111, 3) == 0.0

    def test_vector_matches_scalar(self):
        rng = np.random.default_rng(1)
        for m in all_models(5, rng):
            w = m.weights(5)
            for mask in range(32):
                assert w[mask] == pytest.approx(subset_probability(m, mask, 5), rel=1e-14)

    @pytest.mark.parametrize("bad", [(1.2,), (-0.1,)])
    def test_bad_expert(self, bad):
        with pytest.raises(ValueError):
            ExpertBernoulli(bad)

    def test_dimension_checked(self):
        with pytest.raises(ValueError, match="candidates"):
            ExpertBernoulli((0.5, 0.5)).weights(3)
        with pytest.raises(ValueError):
            BetaIndependent((1.0,), (0.0,))

    def test_exact_model_coincidence(self):
        for q in range(1, 12):
            a = MaxEntropy().weights(q)
            assert np.array_equal(a, CommonBernoulli(0.5).weights(q))
            assert np.array_equal(a, BetaIndependent((1.0,) * q, (1.0,) * q).weights(q))
            assert np.all(a == 2.0 ** -q)


@pytest.mark.parametrize("q", [1, 2, 5, 9, 14])
def test_normalization(q):
    rng = np.random.default_rng(q)
    for m in all_models(q, rng):
        assert abs(math.fsum(m.weights(q)) - 1.0) <= 1e-12


class TestSubtreeWeight:
    def test_empty_extension(self):
        rng = np.random.default_rng(2)
        for m in all_models(4, rng):
            assert subtree_weight(m, 0b0110, 0, 4) == subset_probability(m, 0b0110, 4)

    def test_max_entropy_marginal(self):
        assert subtree_weight(MaxEntropy(), 0b0001, 0b1100, 4) == pytest.approx(1 / 4)

    def test_common_uniform(self):
        assert subtree_weight(CommonUniform(), 0b0001, 0b1100, 4) == pytest.approx(1 / 6)
        brute = sum(Fraction(1, 5 * math.comb(4, k)) for k in (1, 2, 2, 3))
        assert brute == Fraction(1, 6)

    def test_overlap_rejected(self):
        with pytest.raises(ValueError):
            subtree_weight(MaxEntropy(), 0b11, 0b10, 2)

    @given(seed=st.integers(0, 2**31), prefix=st.integers(0, 63), free=st.integers(0, 63))
    def test_matches_brute_force(self, seed, prefix, free):
        q = 6
        prefix &= ~free
        rng = np.random.default_rng(seed)
        members = [prefix | s for s in range(64) if s & ~free == 0]
        for m in all_models(q, rng):
            w = m.weights(q)
            assert subtree_weight(m, prefix, free, q) == pytest.approx(math.fsum(w[members]),
                                                                       abs=1e-15, rel=1e-12)


def brute_entropy(p):
    q = len(p)
    total = 0.0
    for bits in itertools.product((0, 1), repeat=q):
        w = math.prod(pc if b else 1 - pc for pc, b in zip(p, bits))
        if w > 0:
            total -= w * math.log(w)
    return total


class TestEntropy:
    def test_maximum(self):
        assert entropy([0.5] * 9) == pytest.approx(9 * math.log(2), abs=1e-12)
        assert entropy([0.5] * 9) == pytest.approx(6.23832, abs=1e-5)

    def test_deterministic(self):
        assert entropy([1.0] * 9) == 0.0
        assert entropy([0.0, 1.0]) == 0.0

    @given(st.lists(probs, min_size=1, max_size=8))
    def test_matches_brute_force(self, p):
        assert entropy(p) == pytest.approx(brute_entropy(p), abs=1e-12)

    @given(st.lists(probs, min_size=1, max_size=20))
    def test_bounded(self, p):
        assert 0.0 <= entropy(p) <= len(p) * math.log(2) + 1e-12


class TestMoments:
    def test_q1(self):
        t = 0.7
        scores = np.array([1.0, t])
        assert expected_score(scores, MaxEntropy()) == pytest.approx((1 + t) / 2)
        lhs, rhs = uniform_integral_check(scores)
        assert lhs == pytest.approx((1 + t) / 2) and rhs == pytest.approx((1 + t) / 2)

    def test_constant_scores(self):
        scores = np.ones(16)
        for m in all_models(4, np.random.default_rng(0)):
            assert score_variance(scores, m) == 0.0

    def test_degenerate_expert(self):
        rng = np.random.default_rng(4)
        scores = np.r_[1.0, rng.uniform(0.5, 1, 31)]
        m = ExpertBernoulli((1.0, 0.0, 0.0, 1.0, 1.0))
        e, v = moments(scores, m)
        assert e == scores[0b11001] and v == 0.0

    @given(seed=st.integers(0, 2**31), q=st.integers(1, 8))
    def test_bounds_and_linearity(self, seed, q):
        rng = np.random.default_rng(seed)
        scores = np.r_[1.0, rng.uniform(0, 1, (1 << q) - 1)]
        for m in all_models(q, rng):
            e, v = moments(scores, m)
            assert scores.min() - 1e-12 <= e <= scores.max() + 1e-12
            assert v >= 0
            assert expected_score(0.5 * scores, m) == pytest.approx(0.5 * e, abs=1e-15)

    def test_missing_scores(self):
        with pytest.raises(CoverageError):
            moments(np.ones(12), MaxEntropy())
        with pytest.raises(CoverageError):
            moments(np.r_[np.ones(7), np.nan], MaxEntropy())

    def test_events_and_coverage(self):
        ev = ScoreEvents(3)
        ev.point(0, 1.0)
        ev.subtree(0b001, 0b110, 0.8)
        ev.point(0b010, 0.5)
        with pytest.raises(CoverageError, match="not covered"):
            materialize(ev)
        ev.subtree(0b100, 0b010, 0.6)
        out = materialize(ev)
        np.testing.assert_array_equal(out, [1.0, 0.8, 0.5, 0.8, 0.6, 0.8, 0.6, 0.8])
        for m in all_models(3, np.random.default_rng(7)):
            assert moments(ev, m) == pytest.approx(moments(out, m), abs=1e-15)
        ev.point(0b011, 0.9)
        with pytest.raises(CoverageError, match="twice"):
            materialize(ev)

    def test_accumulator_needs_full_coverage(self):
        acc = MomentAccumulator(2, [MaxEntropy()])
        acc.point(0, 1.0)
        with pytest.raises(CoverageError):
            acc.results()

    def test_pbar_curve(self):
        rng = np.random.default_rng(8)
        scores = np.r_[1.0, rng.uniform(0.6, 1, 63)]
        curve = pbar_curve(scores, [0.0, 0.5, 1.0])
        assert curve[0][1] == 1.0
        assert curve[1][1] == expected_score(scores, MaxEntropy())
        assert curve[2][1] == pytest.approx(scores[-1])

    @given(seed=st.integers(0, 2**31), q=st.integers(1, 12))
    def test_integral_identity(self, seed, q):
        rng = np.random.default_rng(seed)
        scores = np.r_[1.0, rng.uniform(0, 1, (1 << q) - 1)]
        lhs, rhs = uniform_integral_check(scores)
        assert abs(lhs - rhs) <= 1e-12

    def test_integral_needs_enough_nodes(self):
        with pytest.raises(ValueError):
            uniform_integral_check(np.ones(64), node_count=3)
        lhs, rhs = uniform_integral_check(np.r_[1.0, np.linspace(0, 1, 63)], node_count=4)
        assert abs(lhs - rhs) <= 1e-12


class TestParseModel:
    def test_variants(self):
        assert parse_model("entropy") == MaxEntropy()
        assert parse_model("common-uniform") == CommonUniform()
        assert parse_model("common-bernoulli:0.3") == CommonBernoulli(0.3)
        assert parse_model("expert:0.4,1") == ExpertBernoulli((0.4, 1.0))
        assert parse_model("beta:1,2;3,4") == BetaIndependent((1.0, 2.0), (3.0, 4.0))

    def test_unknown(self):
        with pytest.raises(ValueError):
            parse_model("dirichlet")
