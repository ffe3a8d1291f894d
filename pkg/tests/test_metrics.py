import math
import random

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from ftleval.metrics import (
    EmptyReference,
    MetricBundle,
    MetricConfig,
    _lcs_length,
    bleu,
    rouge_l,
    rouge_n,
    score_bundle,
    tokenize,
)

tokens = st.lists(st.sampled_from("a b c d the cat dog log4".split()), max_size=18)
texts = tokens.map(" ".join)


def test_tokenize_alnum_lower():
    assert tokenize('Fox, "JUMPED" over-it 42!', "alnum-lower") == [
        "fox",
        "jumped",
        "over",
        "it",
        "42",
    ]


def test_tokenize_whitespace_preserves_punctuation():
    assert tokenize('a,b "c"  d', "whitespace") == ['a,b', '"c"', "d"]


def test_bleu_identity():
    report = bleu("the quick brown fox jumps", "the quick brown fox jumps")
    assert report.score == 1.0
    assert report.brevity_penalty == 1.0
    assert report.precisions == (1.0, 1.0, 1.0, 1.0)


def test_bleu_clipping_hand_count():
    # "the" appears once in the reference, so only 1 of the 4 candidate
    # unigrams counts: p1 = 1/4 with c=4 > r=2, bp=1.
    report = bleu("the the the the", "the cat", MetricConfig(max_n=1))
    assert report.precisions == (0.25,)
    assert report.brevity_penalty == 1.0
    assert report.score == 0.25


def test_bleu_zero_overlap_is_zero():
    assert bleu("x y z w", "a b c d").score == 0.0


def test_bleu_empty_candidate():
    report = bleu("", "a b c")
    assert report.score == 0.0
    assert report.brevity_penalty == 0.0
    assert report.candidate_len == 0


def test_bleu_empty_reference_raises():
    with pytest.raises(EmptyReference):
        bleu("a b", "...")


def test_bleu_brevity_penalty_short_candidate():
    report = bleu("a b", "a b c d")
    assert report.brevity_penalty == pytest.approx(math.exp(1 - 4 / 2))


def test_rouge1_hand_count():
    assert rouge_n("a b c", "a b d", 1).score == pytest.approx(2 / 3)


def test_rouge2_disjoint_bigrams():
    assert rouge_n("a x b x c", "a b c", 2).score == 0.0


def test_rouge_short_reference_scores_zero():
    report = rouge_n("a b c", "a", 2)
    assert report.score == 0.0
    assert report.total_count == 0


def test_rouge_l_crossed_order():
    report = rouge_l("a c b", "a b c")
    assert report.lcs_length == 2
    assert report.score == pytest.approx(2 / 3)


def test_rouge_l_empty_candidate():
    assert rouge_l("", "a b c").score == 0.0


def test_rouge_f1_variant():
    cfg = MetricConfig(rouge_variant="f1")
    # recall 2/3, precision 2/4 -> f1 = 2*(1/2)*(2/3)/(1/2+2/3)
    got = rouge_n("a b x y", "a b c", 1, cfg).score
    assert got == pytest.approx(2 * 0.5 * (2 / 3) / (0.5 + 2 / 3))


def test_bundle_mean_definition():
    bundle = MetricBundle(bleu=0.4, rouge1=0.6, rouge2=0.8, rougeL=1.0)
    assert bundle.mean == pytest.approx((0.4 + 0.6 + 0.8 + 1.0) / 4)


def test_bundle_for_disjoint_vocabularies():
    bundle = score_bundle("q w x r t", "a b c d e f")
    assert (bundle.bleu, bundle.rouge1, bundle.rouge2, bundle.rougeL) == (0, 0, 0, 0)
    assert bundle.mean == 0.0


def test_config_validation():
    with pytest.raises(ValueError):
        MetricConfig(max_n=0)
    with pytest.raises(ValueError):
        MetricConfig(tokenizer="bytes")
    with pytest.raises(ValueError):
        MetricConfig(rouge_variant="precision")


def test_config_weights_default_uniform():
    assert MetricConfig().effective_weights() == (0.25, 0.25, 0.25, 0.25)


# --- oracle equivalence -------------------------------------------------------


def test_oracle_equivalence_random_pairs():
    rng = random.Random(1234)
    vocab = ["a", "b", "c", "d", "e", "tok1", "tok2"]
    for _ in range(250):
        cand = [rng.choice(vocab) for _ in range(rng.randint(0, 40))]
        ref = [rng.choice(vocab) for _ in range(rng.randint(1, 40))]
        cand_text, ref_text = " ".join(cand), " ".join(ref)
        assert bleu(cand_text, ref_text).score == pytest.approx(
            oracles.bleu(cand, ref), abs=1e-9
        )
        for n in (1, 2):
            assert rouge_n(cand_text, ref_text, n).score == pytest.approx(
                oracles.rouge_n(cand, ref, n), abs=1e-9
            )
        assert rouge_l(cand_text, ref_text).score == pytest.approx(
            oracles.rouge_l(cand, ref), abs=1e-9
        )


def test_lcs_matches_exhaustive_search():
    rng = random.Random(7)
    for _ in range(200):
        a = [rng.choice("abc") for _ in range(rng.randint(0, 9))]
        b = [rng.choice("abc") for _ in range(rng.randint(0, 12))]
        assert _lcs_length(a, b) == oracles.lcs_exhaustive(a, b)


# --- properties ---------------------------------------------------------------


@given(texts, texts.filter(lambda t: tokenize(t, "alnum-lower")))
def test_scores_stay_in_range(cand, ref):
    bundle = score_bundle(cand, ref)
    for value in (bundle.bleu, bundle.rouge1, bundle.rouge2, bundle.rougeL, bundle.mean):
        assert 0.0 <= value <= 1.0


@given(tokens.filter(lambda ts: len(ts) >= 4))
def test_identity_scores_one(ts):
    text = " ".join(ts)
    bundle = score_bundle(text, text)
    assert bundle.bleu == 1.0
    assert bundle.rouge1 == bundle.rouge2 == bundle.rougeL == 1.0


@given(tokens, tokens.filter(lambda ts: ts))
def test_brevity_penalty_case_split(cand, ref):
    report = bleu(" ".join(cand), " ".join(ref))
    if report.candidate_len >= report.reference_len and report.candidate_len > 0:
        assert report.brevity_penalty == 1.0
    assert report.brevity_penalty <= 1.0


@given(tokens, tokens.filter(lambda ts: ts), st.randoms(use_true_random=False))
def test_rouge1_permutation_invariant(cand, ref, rng):
    shuffled = list(cand)
    rng.shuffle(shuffled)
    assert (
        rouge_n(" ".join(shuffled), " ".join(ref), 1).score
        == rouge_n(" ".join(cand), " ".join(ref), 1).score
    )


@given(tokens, tokens)
def test_lcs_symmetry(a, b):
    assert _lcs_length(a, b) == _lcs_length(b, a)


@given(tokens, tokens.filter(lambda ts: ts))
def test_match_counts_bounded(cand, ref):
    report = rouge_n(" ".join(cand), " ".join(ref), 1)
    assert report.match_count <= report.total_count
    lreport = rouge_l(" ".join(cand), " ".join(ref))
    assert lreport.lcs_length <= min(len(cand), len(ref))


@settings(max_examples=30)
@given(tokens, tokens.filter(lambda ts: ts))
def test_mean_is_arithmetic(cand, ref):
    bundle = score_bundle(" ".join(cand), " ".join(ref))
    expected = (bundle.bleu + bundle.rouge1 + bundle.rouge2 + bundle.rougeL) / 4
    assert bundle.mean == pytest.approx(expected, abs=1e-12)
