"""BLEU and ROUGE scoring for candidate/reference text pairs.

BLEU follows the classic corpus formula restricted to a single pair:
clipped (modified) n-gram precisions combined geometrically under a
brevity penalty, with no smoothing, so any vanishing precision zeroes
the score.  ROUGE-N is the recall form (clipped n-gram matches over
reference n-gram count) and ROUGE-L divides the token-level longest
common subsequence by the reference length.  An F1 variant of both
ROUGE flavors is available for sensitivity checks.
"""

import math
import re
from collections import Counter
from dataclasses import dataclass, field

__all__ = [
    "EmptyReference",
    "MetricConfig",
    "BleuReport",
    "RougeReport",
    "MetricBundle",
    "tokenize",
    "bleu",
    "rouge_n",
    "rouge_l",
    "score_bundle",
]

TOKENIZERS = ("alnum-lower", "whitespace")
ROUGE_VARIANTS = ("recall", "f1")

_ALNUM_RUN = re.compile(r"[0-9a-z]+")


class EmptyReference(ValueError):
    """The reference text has no tokens, so recall is undefined."""


@dataclass(frozen=True)
class MetricConfig:
    """Shared scoring knobs.

    ``weights`` defaults to uniform 1/max_n over n = 1..max_n.
    """

    max_n: int = 4
    weights: tuple[float, ...] | None = None
    tokenizer: str = "alnum-lower"
    rouge_variant: str = "recall"

    def __post_init__(self):
        if self.max_n < 1:
            raise ValueError("max_n must be at least 1")
        if self.tokenizer not in TOKENIZERS:
            raise ValueError(f"unknown tokenizer {self.tokenizer!r}")
        if self.rouge_variant not in ROUGE_VARIANTS:
            raise ValueError(f"unknown rouge variant {self.rouge_variant!r}")
        if self.weights is not None and len(self.weights) != self.max_n:
            raise ValueError("weights must have max_n entries")

    def effective_weights(self) -> tuple[float, ...]:
        if self.weights is not None:
            return self.weights
        return tuple(1.0 / self.max_n for _ in range(self.max_n))


@dataclass(frozen=True)
class BleuReport:
    score: float
    precisions: tuple[float, ...]
    brevity_penalty: float
    candidate_len: int
    reference_len: int


@dataclass(frozen=True)
class RougeReport:
    score: float
    match_count: int
    total_count: int
    reference_length: int
    lcs_length: int | None = None


@dataclass(frozen=True)
class MetricBundle:
    """The four headline scores plus their arithmetic mean."""

    bleu: float
    rouge1: float
    rouge2: float
    rougeL: float
    mean: float = field(init=False)

    def __post_init__(self):
        parts = (self.bleu, self.rouge1, self.rouge2, self.rougeL)
        object.__setattr__(self, "mean", math.fsum(parts) / 4.0)


def tokenize(text: str, mode: str = "alnum-lower") -> list[str]:
    """Split text into scoring tokens.

    ``alnum-lower`` lowercases and keeps maximal runs of ASCII letters and
    digits, so punctuation, quoting, and whitespace all vanish.
    ``whitespace`` splits on whitespace only and keeps case.
    """
    if mode == "alnum-lower":
        return _ALNUM_RUN.findall(text.lower())
    if mode == "whitespace":
        return text.split()
    raise ValueError(f"unknown tokenizer {mode!r}")


def _ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _clipped_matches(candidate: Counter, reference: Counter) -> int:
    return sum(min(count, reference[gram]) for gram, count in candidate.items())


def bleu(candidate: str, reference: str, config: MetricConfig = MetricConfig()) -> BleuReport:
    """Score one candidate against one reference.

    Precision p_n counts candidate n-grams clipped by their reference
    multiplicity.  With no smoothing, p_n = 0 for any order zeroes the
    score outright.  The brevity penalty is 1 for candidates longer than
    the reference and exp(1 - r/c) otherwise (1 exactly at c = r).
    """
    cand = tokenize(candidate, config.tokenizer)
    ref = tokenize(reference, config.tokenizer)
    if not ref:
        raise EmptyReference("reference has no tokens")
    c, r = len(cand), len(ref)

    precisions = []
    for n in range(1, config.max_n + 1):
        cand_grams = _ngram_counts(cand, n)
        total = sum(cand_grams.values())
        if total == 0:
            precisions.append(0.0)
            continue
        matched = _clipped_matches(cand_grams, _ngram_counts(ref, n))
        precisions.append(matched / total)

    if c == 0:
        brevity = 0.0
    elif c > r:
        brevity = 1.0
    else:
        brevity = math.exp(1.0 - r / c)

    if any(p == 0.0 for p in precisions):
        score = 0.0
    else:
        weights = config.effective_weights()
        score = brevity * math.exp(
            math.fsum(w * math.log(p) for w, p in zip(weights, precisions))
        )
    return BleuReport(
        score=score,
        precisions=tuple(precisions),
        brevity_penalty=brevity,
        candidate_len=c,
        reference_len=r,
    )


def _f1(match: float, cand_total: int, ref_total: int) -> float:
    recall = match / ref_total
    precision = match / cand_total if cand_total else 0.0
    if recall + precision == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def rouge_n(
    candidate: str, reference: str, n: int, config: MetricConfig = MetricConfig()
) -> RougeReport:
    """Clipped n-gram recall of the reference (or F1 when configured).

    A non-empty reference shorter than n tokens has no n-grams to
    recall; the score is defined as 0 rather than an error so that
    mixed-length batches stay scorable.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    cand = tokenize(candidate, config.tokenizer)
    ref = tokenize(reference, config.tokenizer)
    if not ref:
        raise EmptyReference("reference has no tokens")
    ref_grams = _ngram_counts(ref, n)
    total = sum(ref_grams.values())
    if total == 0:
        return RougeReport(0.0, 0, 0, len(ref))
    cand_grams = _ngram_counts(cand, n)
    matched = _clipped_matches(cand_grams, ref_grams)
    if config.rouge_variant == "f1":
        score = _f1(matched, sum(cand_grams.values()), total)
    else:
        score = matched / total
    return RougeReport(score, matched, total, len(ref))


def _lcs_length(a: list[str], b: list[str]) -> int:
    """Length of the longest common subsequence of two token lists.

    Bit-parallel row DP (Crochemore-Iliopoulos-Pinzon): each DP row is
    one big integer, so the quadratic table costs len(a) * len(b) / 64
    word operations instead of a Python-level inner loop.  Documents at
    this scale run to thousands of tokens, where the naive DP takes tens
    of seconds per pair.
    """
    if not a or not b:
        return 0
    # Shared prefixes and suffixes are always part of some LCS; trimming
    # them keeps the bitset narrow for the common nearly-equal case.
    lo = 0
    hi = min(len(a), len(b))
    while lo < hi and a[lo] == b[lo]:
        lo += 1
    trimmed = 0
    while trimmed < hi - lo and a[len(a) - 1 - trimmed] == b[len(b) - 1 - trimmed]:
        trimmed += 1
    common = lo + trimmed
    a = a[lo : len(a) - trimmed]
    b = b[lo : len(b) - trimmed]
    if not a or not b:
        return common

    masks: dict[str, int] = {}
    for j, token in enumerate(b):
        masks[token] = masks.get(token, 0) | (1 << j)
    width = (1 << len(b)) - 1
    row = width
    for token in a:
        match = masks.get(token)
        if match:
            keep = row & match
            row = ((row + keep) | (row - keep)) & width
    return common + len(b) - row.bit_count()


def rouge_l(
    candidate: str, reference: str, config: MetricConfig = MetricConfig()
) -> RougeReport:
    """Longest-common-subsequence recall against the reference."""
    cand = tokenize(candidate, config.tokenizer)
    ref = tokenize(reference, config.tokenizer)
    if not ref:
        raise EmptyReference("reference has no tokens")
    lcs = _lcs_length(ref, cand)
    if config.rouge_variant == "f1":
        score = _f1(lcs, len(cand), len(ref))
    else:
        score = lcs / len(ref)
    return RougeReport(score, lcs, len(ref), len(ref), lcs_length=lcs)


def score_bundle(
    candidate: str, reference: str, config: MetricConfig = MetricConfig()
) -> MetricBundle:
    """Compute BLEU, ROUGE-1, ROUGE-2, and ROUGE-L for one pair."""
    return MetricBundle(
        bleu=bleu(candidate, reference, config).score,
        rouge1=rouge_n(candidate, reference, 1, config).score,
        rouge2=rouge_n(candidate, reference, 2, config).score,
        rougeL=rouge_l(candidate, reference, config).score,
    )
