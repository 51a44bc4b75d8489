"""Reference-based text generation metrics.

All scores live in [0, 1]. BLEU and METEOR-lite share a tokenizer that
lowercases and splits punctuation into separate tokens; chrF++ works on the
raw (case-sensitive) string, as its reference definition does.
"""

from __future__ import annotations

import math
import unicodedata
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from .stemmer import stem


@dataclass(frozen=True)
class ScoredPair:
    hypothesis: str
    references: tuple[str, ...]

    def __post_init__(self):
        refs = (self.references,) if isinstance(self.references, str) else tuple(self.references)
        if not refs:
            raise ValueError("a scored pair needs at least one reference")
        object.__setattr__(self, "references", refs)


@dataclass(frozen=True)
class TextMetricsReport:
    bleu: float
    bleu_smoothed: float
    chrf_pp: float
    meteor_lite: float


@lru_cache(maxsize=65536)
def _tokenize_cached(s: str) -> tuple[str, ...]:
    chars = []
    for ch in s.lower():
        if unicodedata.category(ch).startswith("P"):
            chars.append(f" {ch} ")
        else:
            chars.append(ch)
    return tuple("".join(chars).split())


def tokenize(s: str) -> list[str]:
    """Lowercase, isolate punctuation characters, split on whitespace."""
    return list(_tokenize_cached(s))


def _ngrams(tokens: Sequence, n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def _closest_ref_len(hyp_len: int, ref_lens: Iterable[int]) -> int:
    return min(ref_lens, key=lambda r: (abs(r - hyp_len), r))


def _clipped_stats(hyp: Sequence[str], refs: Sequence[Sequence[str]], max_n: int):
    """Per-order (clipped matches, hypothesis n-gram count)."""
    stats = []
    for n in range(1, max_n + 1):
        hyp_counts = _ngrams(hyp, n)
        max_ref: Counter = Counter()
        for ref in refs:
            for gram, c in _ngrams(ref, n).items():
                if c > max_ref[gram]:
                    max_ref[gram] = c
        clipped = sum(min(c, max_ref[g]) for g, c in hyp_counts.items())
        stats.append((clipped, max(len(hyp) - n + 1, 0)))
    return stats


def _brevity_penalty(hyp_len: int, ref_len: int) -> float:
    if hyp_len >= ref_len:
        return 1.0
    if hyp_len == 0:
        return 0.0
    return math.exp(1.0 - ref_len / hyp_len)


def corpus_bleu(pairs: Sequence[ScoredPair], max_n: int = 4) -> float:
    """Unsmoothed corpus BLEU with closest-reference brevity penalty.

    Returns 0.0 whenever some n-gram order has no match at corpus level,
    including the case where hypotheses are too short to contain n-grams.
    """
    if not pairs:
        raise ValueError("corpus_bleu needs at least one pair")
    matches = [0] * max_n
    totals = [0] * max_n
    hyp_len = ref_len = 0
    for pair in pairs:
        hyp = _tokenize_cached(pair.hypothesis)
        refs = [_tokenize_cached(r) for r in pair.references]
        for k, (m, t) in enumerate(_clipped_stats(hyp, refs, max_n)):
            matches[k] += m
            totals[k] += t
        hyp_len += len(hyp)
        ref_len += _closest_ref_len(len(hyp), (len(r) for r in refs))
    if any(m == 0 for m in matches):
        return 0.0
    log_p = sum(math.log(m / t) for m, t in zip(matches, totals)) / max_n
    return _brevity_penalty(hyp_len, ref_len) * math.exp(log_p)


def sentence_bleu_smoothed(pair: ScoredPair, max_n: int = 4) -> float:
    """Sentence BLEU with add-one smoothing on orders n >= 2."""
    hyp = _tokenize_cached(pair.hypothesis)
    if not hyp:
        return 0.0
    refs = [_tokenize_cached(r) for r in pair.references]
    stats = _clipped_stats(hyp, refs, max_n)
    if stats[0][0] == 0:
        return 0.0
    log_p = math.log(stats[0][0] / stats[0][1])
    for m, t in stats[1:]:
        log_p += math.log((m + 1) / (t + 1))
    bp = _brevity_penalty(len(hyp), _closest_ref_len(len(hyp), (len(r) for r in refs)))
    return bp * math.exp(log_p / max_n)


@lru_cache(maxsize=65536)
def _chrf_grams(s: str, char_n: int, word_n: int) -> tuple[Counter, ...]:
    chars = "".join(s.split())
    words = s.split()
    grams = [Counter(chars[i:i + n] for i in range(len(chars) - n + 1)) for n in range(1, char_n + 1)]
    grams += [_ngrams(words, n) for n in range(1, word_n + 1)]
    return tuple(grams)


def _chrf_segment(hyp: str, ref: str, char_n: int, word_n: int, beta: float) -> float:
    hyp_grams = _chrf_grams(hyp, char_n, word_n)
    ref_grams = _chrf_grams(ref, char_n, word_n)
    p_sum = r_sum = 0.0
    orders = 0
    for hg, rg in zip(hyp_grams, ref_grams):
        h_total = sum(hg.values())
        r_total = sum(rg.values())
        if h_total == 0 and r_total == 0:
            continue
        orders += 1
        if h_total == 0 or r_total == 0:
            continue
        if len(hg) > len(rg):
            hg, rg = rg, hg
        match = sum(min(c, rg[g]) for g, c in hg.items() if g in rg)
        p_sum += match / h_total
        r_sum += match / r_total
    if orders == 0:
        return 1.0
    p, r = p_sum / orders, r_sum / orders
    if p == 0.0 and r == 0.0:
        return 0.0
    b2 = beta * beta
    return (1 + b2) * p * r / (b2 * p + r)


def chrf_pp(pairs: Sequence[ScoredPair], char_n: int = 6, word_n: int = 2, beta: float = 2.0) -> float:
    """Mean over segments of the best-reference chrF++ score.

    Precision and recall are averaged over the character orders 1..char_n
    and word orders 1..word_n, then combined into F-beta. Orders for which
    neither side has any n-gram are left out of the averages.
    """
    if not pairs:
        raise ValueError("chrf_pp needs at least one pair")
    total = 0.0
    for pair in pairs:
        total += max(_chrf_segment(pair.hypothesis, r, char_n, word_n, beta) for r in pair.references)
    return total / len(pairs)


def _align(hyp: Sequence[str], ref: Sequence[str]) -> list[tuple[int, int]]:
    """Exact stage then stem stage; within a stage the k-th occurrence of a
    key in the hypothesis pairs with its k-th free occurrence in the reference."""
    alignment: list[tuple[int, int]] = []
    free_h = list(range(len(hyp)))
    free_r = list(range(len(ref)))
    for key in (lambda w: w, stem):
        slots: dict[str, list[int]] = {}
        for j in free_r:
            slots.setdefault(key(ref[j]), []).append(j)
        taken = {}
        matched_h = []
        for i in free_h:
            k = key(hyp[i])
            queue = slots.get(k)
            if not queue:
                continue
            pos = taken.get(k, 0)
            if pos < len(queue):
                taken[k] = pos + 1
                alignment.append((i, queue[pos]))
                matched_h.append(i)
        if matched_h:
            used_r = {j for _, j in alignment}
            used_h = set(matched_h)
            free_h = [i for i in free_h if i not in used_h]
            free_r = [j for j in free_r if j not in used_r]
    alignment.sort()
    return alignment


def _count_chunks(alignment: Sequence[tuple[int, int]]) -> int:
    chunks = 0
    prev = None
    for i, j in alignment:
        if prev is None or i != prev[0] + 1 or j != prev[1] + 1:
            chunks += 1
        prev = (i, j)
    return chunks


def _meteor_single(hyp: Sequence[str], ref: Sequence[str], alpha: float, beta: float, gamma: float) -> float:
    alignment = _align(hyp, ref)
    m = len(alignment)
    if m == 0:
        return 0.0
    p = m / len(hyp)
    r = m / len(ref)
    f_mean = p * r / (alpha * p + (1 - alpha) * r)
    penalty = gamma * (_count_chunks(alignment) / m) ** beta
    return f_mean * (1 - penalty)


def meteor_lite(pair: ScoredPair, alpha: float = 0.9, beta: float = 3.0, gamma: float = 0.5) -> float:
    """METEOR restricted to exact and Porter-stem unigram matching, best over references."""
    hyp = _tokenize_cached(pair.hypothesis)
    return max(_meteor_single(hyp, _tokenize_cached(r), alpha, beta, gamma) for r in pair.references)


def score_text(pairs: Sequence[ScoredPair]) -> TextMetricsReport:
    """Corpus report; sentence-level metrics are averaged over pairs."""
    if not pairs:
        raise ValueError("score_text needs at least one pair")
    n = len(pairs)
    return TextMetricsReport(
        bleu=corpus_bleu(pairs),
        bleu_smoothed=sum(sentence_bleu_smoothed(p) for p in pairs) / n,
        chrf_pp=chrf_pp(pairs),
        meteor_lite=sum(meteor_lite(p) for p in pairs) / n,
    )
