"""Independent slow reference implementations used to check the metrics.

Everything here favors obviousness over speed: matching is done by
removing items from explicit lists, and the LCS oracle is the textbook
quadratic table.  None of it imports from ftleval.metrics internals.
"""

import math


def ngrams(tokens, n):
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def clipped_overlap(candidate_grams, reference_grams):
    """Count candidate n-grams that can be paired off against reference
    n-grams, each reference occurrence usable once."""
    pool = list(reference_grams)
    hits = 0
    for gram in candidate_grams:
        if gram in pool:
            pool.remove(gram)
            hits += 1
    return hits


def bleu(candidate_tokens, reference_tokens, max_n=4):
    c = len(candidate_tokens)
    r = len(reference_tokens)
    precisions = []
    for n in range(1, max_n + 1):
        cand = ngrams(candidate_tokens, n)
        if not cand:
            precisions.append(0.0)
            continue
        ref = ngrams(reference_tokens, n)
        precisions.append(clipped_overlap(cand, ref) / len(cand))
    if c == 0:
        bp = 0.0
    elif c > r:
        bp = 1.0
    else:
        bp = math.exp(1.0 - r / c)
    if any(p == 0.0 for p in precisions):
        return 0.0
    return bp * math.exp(sum(math.log(p) for p in precisions) / max_n)


def rouge_n(candidate_tokens, reference_tokens, n):
    ref = ngrams(reference_tokens, n)
    if not ref:
        return 0.0
    cand = ngrams(candidate_tokens, n)
    return clipped_overlap(cand, ref) / len(ref)


def lcs_table(a, b):
    rows = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            if a[i - 1] == b[j - 1]:
                rows[i][j] = rows[i - 1][j - 1] + 1
            else:
                rows[i][j] = max(rows[i - 1][j], rows[i][j - 1])
    return rows[len(a)][len(b)]


def lcs_exhaustive(a, b):
    """Longest common subsequence by enumerating all subsequences of the
    shorter sequence.  Only usable for tiny inputs."""
    short, long = (a, b) if len(a) <= len(b) else (b, a)
    best = 0
    for mask in range(1 << len(short)):
        picked = [short[i] for i in range(len(short)) if mask >> i & 1]
        if len(picked) <= best:
            continue
        it = iter(long)
        if all(tok in it for tok in picked):
            best = len(picked)
    return best


def rouge_l(candidate_tokens, reference_tokens):
    if not reference_tokens:
        return 0.0
    return lcs_table(reference_tokens, candidate_tokens) / len(reference_tokens)


def second_counts(timeline):
    counts = {}
    for event in timeline.events:
        key = event.instant.replace(microsecond=0)
        counts[key] = counts.get(key, 0) + 1
    return dict(sorted(counts.items()))


def transition_counts(timeline):
    pairs = {}
    events = timeline.events
    for left, right in zip(events, events[1:]):
        key = (left.timestamp_desc, right.timestamp_desc)
        pairs[key] = pairs.get(key, 0) + 1
    return pairs
