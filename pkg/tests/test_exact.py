import math

import numpy as np
import pytest

from shuffleleak import (
    AbsoluteContinuityError,
    Categorical,
    ExactLimits,
    Randomizer,
    ResourceLimitError,
    blanket_of_family,
    entropy,
    input_mi_fixed_others,
    input_mi_iid_others,
    input_mi_shuffle_only,
    kl_divergence,
    make_krr,
    make_uniform,
    make_zipf,
    matched_message_mi,
    message_mi_exact,
    message_minus_position_mi,
    position_likelihoods,
    position_mi_exact,
    position_mi_fixed_inputs,
)

from oracles import (
    brute_message_mi,
    brute_position_mi_fixed_inputs,
    random_categorical,
)

ZIPF = make_zipf(4, 0.7)
U4 = make_uniform(4)


def dist(*probs, labels=None):
    labels = labels or tuple(range(1, len(probs) + 1))
    return Categorical(labels, probs)


class TestPositionExact:
    def test_matched_is_zero(self):
        assert position_mi_exact(U4, U4, 6) == 0.0

    def test_disjoint_supports_log_n(self):
        p = dist(1.0, 0.0)
        q = dist(0.0, 1.0)
        for n in (2, 4, 7):
            assert position_mi_exact(p, q, n) == pytest.approx(math.log(n), abs=1e-12)

    def test_ceiling_enforced(self):
        with pytest.raises(ResourceLimitError):
            position_mi_exact(ZIPF, U4, 500, ExactLimits(max_states=1000))

    def test_split_gap_shrinks(self):
        p = dist(0.5, 0.3, 0.2)
        q = dist(0.6, 0.4, 0.0)
        beta = 0.2
        target = (1 - beta) * kl_divergence(dist(0.625, 0.375, labels=(1, 2)), q)
        gaps = [
            abs(position_mi_exact(p, q, n) - beta * math.log(n) - target)
            for n in (4, 10, 25)
        ]
        assert gaps[0] > gaps[1] > gaps[2]


class TestMessageExact:
    def test_matched_uniform2_n2(self):
        assert message_mi_exact(U4, U4, 1) == pytest.approx(entropy(U4), abs=1e-12)
        u2 = make_uniform(2)
        assert message_mi_exact(u2, u2, 2) == pytest.approx(math.log(2) / 2, abs=1e-12)

    def test_point_mass_target(self):
        p = dist(1.0, 0.0)
        assert message_mi_exact(p, make_uniform(2), 4) == pytest.approx(0.0, abs=1e-12)

    def test_disjoint_reveals_entropy(self):
        p = dist(0.6, 0.4, 0.0, 0.0)
        q = dist(0.0, 0.0, 0.5, 0.5)
        for n in (2, 5):
            assert message_mi_exact(p, q, n) == pytest.approx(entropy(p), abs=1e-12)

    def test_matches_sequence_level_enumeration(self):
        rng = np.random.default_rng(4)
        for _ in range(6):
            p = random_categorical(rng, (1, 2, 3))
            q = random_categorical(rng, (1, 2, 3))
            for n in (2, 3):
                assert message_mi_exact(p, q, n) == pytest.approx(
                    brute_message_mi(p, q, n), abs=1e-12
                )

    def test_sequence_level_with_hidden_symbols(self):
        p = dist(0.5, 0.3, 0.2)
        q = dist(0.6, 0.4, 0.0)
        for n in (2, 3, 4):
            assert message_mi_exact(p, q, n) == pytest.approx(
                brute_message_mi(p, q, n), abs=1e-12
            )


class TestClosedForms:
    def test_matched_closed_form_equals_enumeration(self):
        for m in (2, 3, 4):
            for d in (make_uniform(m), make_zipf(m, 0.9)):
                for n in range(1, 8):
                    assert matched_message_mi(d, n) == pytest.approx(
                        message_mi_exact(d, d, n), abs=1e-10
                    )

    def test_n1_gives_entropy(self):
        assert matched_message_mi(ZIPF, 1) == pytest.approx(entropy(ZIPF), abs=1e-12)

    def test_uniform4_n100_near_rate(self):
        v = matched_message_mi(U4, 100)
        assert abs(v - 3 / 200) / (3 / 200) < 0.10

    def test_decomposition_identity(self):
        for n in (2, 5, 8, 10):
            total = message_minus_position_mi(ZIPF, U4, n) + position_mi_exact(
                ZIPF, U4, n
            )
            assert message_mi_exact(ZIPF, U4, n) == pytest.approx(total, abs=1e-10)

    def test_decomposition_matched_collapse(self):
        # matched channel: position term is zero, so the gap is the whole value
        for n in (2, 6):
            assert message_minus_position_mi(U4, U4, n) == pytest.approx(
                matched_message_mi(U4, n), abs=1e-12
            )

    def test_gap_requires_absolute_continuity(self):
        with pytest.raises(AbsoluteContinuityError):
            message_minus_position_mi(dist(0.5, 0.5), dist(1.0, 0.0), 4)


class TestInputOracles:
    def test_constant_rows_leak_nothing(self):
        r = Randomizer((1, 2), ("a", "b"), [[0.4, 0.6], [0.4, 0.6]])
        assert input_mi_fixed_others(r, make_uniform(2), (1, 2)) == pytest.approx(
            0.0, abs=1e-14
        )

    def test_single_user_channel(self):
        r = make_krr(2, math.log(3))
        expect = math.log(2) - (-0.75 * math.log(0.75) - 0.25 * math.log(0.25))
        assert input_mi_iid_others(r, make_uniform(2), 1) == pytest.approx(
            expect, abs=1e-12
        )

    def test_fixed_others_matches_direct_enumeration(self):
        # independent check built from raw (x1, outputs) enumeration
        r = make_krr(4, 1.0)
        k = r.kernel
        joint = {}
        import itertools

        for x1 in range(4):
            for ys in itertools.product(range(4), repeat=3):
                pr = 0.25 * k[x1, ys[0]] * k[0, ys[1]] * k[1, ys[2]]
                c = [0, 0, 0, 0]
                for y in ys:
                    c[y] += 1
                joint.setdefault(tuple(c), np.zeros(4))[x1] += pr
        expect = 0.0
        for vec in joint.values():
            pc = vec.sum()
            for x in range(4):
                if vec[x] > 0:
                    expect += vec[x] * math.log(vec[x] / (pc * 0.25))
        got = input_mi_fixed_others(r, make_uniform(4), (1, 2))
        assert got == pytest.approx(expect, abs=1e-12)

    def test_iid_ceiling(self):
        with pytest.raises(ResourceLimitError):
            input_mi_iid_others(make_krr(4, 1.0), make_uniform(4), 10_000,
                                ExactLimits(max_states=10_000))

    def test_histogram_is_sufficient_for_input(self):
        # ordering carries nothing once the counts are known
        from oracles import brute_input_mi_sequence

        r = make_krr(3, 0.9)
        prior = make_uniform(3)
        for x_rest in ((1,), (1, 2), (2, 3)):
            assert input_mi_fixed_others(r, prior, x_rest) == pytest.approx(
                brute_input_mi_sequence(r, prior, x_rest), abs=1e-12
            )

    def test_data_processing_blanket_reduction(self):
        # leakage through the true channel never exceeds the reduced channel
        rng = np.random.default_rng(9)
        for n in (3, 4, 6):
            p1 = random_categorical(rng, (1, 2, 3))
            others = [random_categorical(rng, (1, 2, 3)) for _ in range(n - 1)]
            direct = input_mi_shuffle_only(p1, others)
            dec = blanket_of_family(others)
            reduced = input_mi_shuffle_only(p1, [dec.generalized_blanket] * (n - 1))
            assert direct <= reduced + 1e-12


class TestPositionFixedInputs:
    def test_all_equal_inputs(self):
        assert position_mi_fixed_inputs(make_krr(3, 1.0), (2, 2, 2, 2)) == pytest.approx(
            0.0, abs=1e-14
        )

    def test_deterministic_distinct_outputs(self):
        ident = Randomizer((1, 2, 3), (1, 2, 3), np.eye(3))
        assert position_mi_fixed_inputs(ident, (1, 2, 3)) == pytest.approx(
            math.log(3), abs=1e-12
        )

    def test_matches_brute_force(self):
        r = make_krr(2, math.log(3))
        for xs in ((1, 2, 2), (1, 1, 2), (2, 1, 2, 1)):
            assert position_mi_fixed_inputs(r, xs) == pytest.approx(
                brute_position_mi_fixed_inputs(r, xs), abs=1e-12
            )

    def test_bounded_by_twice_eps(self):
        r = make_krr(2, math.log(3))
        v = position_mi_fixed_inputs(r, (1, 2, 2))
        assert v <= 2 * math.log(3) + 1e-9

    def test_likelihood_rows_are_distributions(self):
        _, like = position_likelihoods(make_krr(2, 0.8), (1, 2, 1))
        assert np.allclose(like.sum(axis=1), 1.0)

    def test_position_law_is_2eps_private(self):
        # max log-ratio of the conditional laws across positions stays
        # within twice the mechanism's LDP parameter
        from shuffleleak import ldp_epsilon
        from oracles import random_ldp_kernel

        rng = np.random.default_rng(31)
        for _ in range(15):
            r = random_ldp_kernel(rng, rng.uniform(0.2, 1.2), 3, 3)
            eps = ldp_epsilon(r)
            n = int(rng.integers(2, 6))
            xs = tuple(int(rng.integers(1, 4)) for _ in range(n))
            _, like = position_likelihoods(r, xs)
            for j in range(like.shape[1]):
                col = like[:, j]
                pos = col[col > 0]
                if len(pos) == like.shape[0]:
                    ratio = math.log(pos.max() / pos.min())
                    assert ratio <= 2 * eps + 1e-9

    def test_factorial_ceiling(self):
        with pytest.raises(ResourceLimitError):
            position_mi_fixed_inputs(make_krr(4, 1.0), tuple([1] * 9))
