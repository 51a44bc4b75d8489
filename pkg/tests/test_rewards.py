import random

import pytest

from kgtext.codec import Direction
from kgtext.scst import (
    IncompatibleSpec,
    Metric,
    RewardSpec,
    ScstItem,
    compute_reward,
    reward_components,
    scst_advantages,
)
from kgtext.scst.rewards import combine

WORDS = "the cat sat on a mat dog ran far and fast".split()


def sentence(rng, lo=1, hi=10):
    return " ".join(rng.choice(WORDS) for _ in range(rng.randint(lo, hi)))


class TestSpec:
    def test_parse(self):
        spec = RewardSpec.parse(["meteor_lite=0.5", "bleu_smoothed=0.5"])
        assert spec.direction is Direction.G2T
        assert spec.components == ((Metric.METEOR_LITE, 0.5), (Metric.BLEU_SMOOTHED, 0.5))
        assert RewardSpec.parse(["f1_exact"]).direction is Direction.T2G

    @pytest.mark.parametrize(
        "components, direction",
        [
            ((), "g2t"),
            ((("bleu", 0.0),), "g2t"),
            ((("bleu", 1.0), ("bleu", 1.0)), "g2t"),
            ((("f1_exact", 1.0),), "g2t"),
            ((("chrf_pp", 1.0),), "t2g"),
            ((("bleu", 1.0), ("chrf_pp", -2.0)), "g2t"),
        ],
    )
    def test_invalid(self, components, direction):
        with pytest.raises(IncompatibleSpec):
            RewardSpec(components, direction)

    def test_unknown_metric(self):
        with pytest.raises(IncompatibleSpec):
            RewardSpec.parse(["rouge=1"])
        with pytest.raises(ValueError):
            RewardSpec((("rouge", 1.0),), "g2t")


class TestComputeReward:
    def test_identity_text(self):
        assert compute_reward("the cat sat on the mat", ["the cat sat on the mat"], RewardSpec.single("bleu")) == 1.0

    def test_graph_sequence(self):
        spec = RewardSpec.single("f1_exact")
        assert compute_reward("<S> A <P> r <O> B", [["A", "r", "B"]], spec) == 1.0
        assert compute_reward(["<S>", "A", "<P>", "r", "<O>", "B", "</s>"], [["A", "r", "B"]], spec) == 1.0

    def test_malformed_sequence_scores_what_parses(self):
        spec = RewardSpec.single("f1_exact")
        assert compute_reward("<P> junk <O>", [["A", "r", "B"]], spec) == 0.0
        half = compute_reward("<S> A <P> r <O> B <S> C <P>", [["A", "r", "B"], ["C", "s", "D"]], spec)
        assert half == pytest.approx(2 / 3)  # P = 1, R = 1/2

    def test_payload_mismatch(self):
        with pytest.raises(IncompatibleSpec):
            compute_reward("<S> A <P> r <O> B", "A r B", RewardSpec.single("f1_exact"))
        with pytest.raises(IncompatibleSpec):
            compute_reward("a b", [["A", "r", "B"]], RewardSpec.single("bleu"))
        with pytest.raises(IncompatibleSpec):
            compute_reward("a b", [], RewardSpec.single("bleu"))

    def test_mix_arithmetic(self):
        spec = RewardSpec.parse(["meteor_lite=0.5", "bleu_smoothed=0.5"])
        assert combine({"meteor_lite": 0.4, "bleu_smoothed": 0.6}, spec) == pytest.approx(0.5, abs=1e-15)

    def test_linearity_text(self):
        rng = random.Random(2)
        for _ in range(100):
            hyp, refs = sentence(rng), [sentence(rng) for _ in range(rng.randint(1, 3))]
            w1, w2 = rng.uniform(0.01, 2), rng.uniform(0.01, 2)
            mix = RewardSpec(((Metric.METEOR_LITE, w1), (Metric.BLEU_SMOOTHED, w2)), "g2t")
            parts = w1 * compute_reward(hyp, refs, RewardSpec.single("meteor_lite")) + w2 * compute_reward(
                hyp, refs, RewardSpec.single("bleu_smoothed")
            )
            assert abs(compute_reward(hyp, refs, mix) - parts) <= 1e-12

    def test_components_are_unweighted(self):
        spec = RewardSpec(((Metric.F1_EXACT, 3.0), (Metric.F1_PARTIAL, 1.0)), "t2g")
        comps = reward_components("<S> A <P> r <O> B", [["A", "r", "C"]], spec)
        assert comps == {"f1_exact": pytest.approx(2 / 3), "f1_partial": pytest.approx(2 / 3)}


class TestAdvantages:
    spec = RewardSpec.single("bleu_smoothed")

    def test_identical_sequences_give_exact_zero(self):
        item = ScstItem(("a", "cat"), ("a", "cat"), ("a cat sat",))
        adv = scst_advantages([item], self.spec)[0]
        assert adv.advantage == 0.0
        assert adv.reward_sampled == adv.reward_greedy

    def test_signs(self):
        ref = ("the cat sat on the mat",)
        good = tuple("the cat sat on the mat".split())
        bad = tuple("dog ran".split())
        better, worse = scst_advantages([ScstItem(good, bad, ref), ScstItem(bad, good, ref)], self.spec)
        assert better.advantage > 0 > worse.advantage
        assert better.advantage == better.reward_sampled - better.reward_greedy
        assert worse.advantage == -better.advantage

    def test_validation(self):
        with pytest.raises(ValueError):
            scst_advantages([], self.spec)
        with pytest.raises(ValueError):
            ScstItem(("a",), ("a",), ("a",), (-0.1, -0.2))
        with pytest.raises(ValueError):
            ScstItem(("a",), ("a",), ("a",), (0.5,))
        with pytest.raises(IncompatibleSpec):
            scst_advantages([ScstItem(("a",), ("b",), [["A", "r", "B"]])], self.spec)
