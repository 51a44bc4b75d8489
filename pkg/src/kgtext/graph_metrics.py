"""Text-to-graph evaluation: per-mode F1/precision/recall over triple alignments.

Element credit table (after normalization), for one candidate element
against one reference element:

=========  =====================================================
Strict     1 if strings equal and same slot (S/P/O)
Exact      1 if strings equal, slot ignored
EntType    1 if same slot and token overlap >= 0.5
Partial    1 if strings equal, 0.5 if token overlap >= 0.5, slot ignored
=========  =====================================================

Token overlap is the size of the token-multiset intersection divided by the
token count of the longer element. A triple pair scores the best 3x3
element assignment (0..3). Graph pairs are aligned with a maximum-weight
matching chosen under Exact; later modes only break ties.
"""

from __future__ import annotations

import enum
import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import DEFAULT_POLICY, KnowledgeGraph, NormalizationPolicy, Triple, normalize


class MatchMode(str, enum.Enum):
    EXACT = "exact"
    ENT_TYPE = "ent_type"
    PARTIAL = "partial"
    STRICT = "strict"


MODES = (MatchMode.EXACT, MatchMode.ENT_TYPE, MatchMode.PARTIAL, MatchMode.STRICT)
# order of lexicographic objectives used to select the shared alignment
_SELECTION_ORDER = (MatchMode.EXACT, MatchMode.STRICT, MatchMode.PARTIAL, MatchMode.ENT_TYPE)
OVERLAP_THRESHOLD = 0.5
BRUTE_FORCE_LIMIT = 8


class SizeLimitExceeded(ValueError):
    pass


@dataclass(frozen=True)
class ModeScore:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class GraphMatchReport:
    scores: dict

    def __getitem__(self, mode) -> ModeScore:
        return self.scores[MatchMode(mode)]

    def as_dict(self) -> dict:
        return {
            m.value: {"f1": s.f1, "precision": s.precision, "recall": s.recall}
            for m, s in self.scores.items()
        }


@dataclass(frozen=True)
class AlignmentResult:
    pairs: tuple[tuple[int, int], ...]
    score_matrix: dict = field(repr=False)
    """Per-mode ``(|cand|, |ref|)`` arrays of triple-pair scores."""
    total_score: dict
    mode_pairs: dict = field(default_factory=dict, repr=False)
    """Per-mode pairs; differs from ``pairs`` only when realigning per mode."""


def _f1(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def _overlap_ok(a: Sequence[str], b: Sequence[str]) -> bool:
    inter = sum((Counter(a) & Counter(b)).values())
    return inter / max(len(a), len(b)) >= OVERLAP_THRESHOLD


_PERMS3 = tuple(itertools.permutations(range(3)))


def _doubled_scores(cand: KnowledgeGraph, ref: KnowledgeGraph, policy: NormalizationPolicy) -> dict:
    """Per-mode integer arrays holding twice the triple-pair score (0..6)."""
    vocab: dict[str, int] = {}

    def ids(graph):
        arr = np.zeros((len(graph), 3), dtype=np.int64)
        for i, t in enumerate(graph):
            for k, value in enumerate(t):
                arr[i, k] = vocab.setdefault(normalize(value, policy), len(vocab))
        return arr

    c_ids, r_ids = ids(cand), ids(ref)
    strings = list(vocab)
    tokens = [s.split() for s in strings]

    # token-overlap relation over unique strings, visiting only pairs that share a token
    overlap = np.eye(len(strings), dtype=bool)
    index: dict[str, set] = {}
    for sid in np.unique(r_ids):
        for tok in tokens[sid]:
            index.setdefault(tok, set()).add(int(sid))
    for sid in np.unique(c_ids):
        partners = set()
        for tok in tokens[sid]:
            partners |= index.get(tok, set())
        for rid in partners:
            if rid != sid and _overlap_ok(tokens[sid], tokens[rid]):
                overlap[sid, rid] = True

    eq = c_ids[:, None, :, None] == r_ids[None, :, None, :]
    ov = overlap[c_ids[:, None, :, None], r_ids[None, :, None, :]]
    diag = np.eye(3, dtype=bool)

    def best_assignment(credit):
        return np.max(
            np.stack([credit[:, :, 0, p[0]] + credit[:, :, 1, p[1]] + credit[:, :, 2, p[2]] for p in _PERMS3]),
            axis=0,
        )

    eq2 = eq.astype(np.int64) * 2
    return {
        MatchMode.STRICT: (eq2 * diag).sum(axis=(2, 3)),
        MatchMode.EXACT: best_assignment(eq2),
        MatchMode.ENT_TYPE: ((ov & diag).astype(np.int64) * 2).sum(axis=(2, 3)),
        MatchMode.PARTIAL: best_assignment(np.where(eq, 2, np.where(ov, 1, 0)).astype(np.int64)),
    }


def element_score(cand: Triple, ref: Triple, mode: MatchMode, policy: NormalizationPolicy = DEFAULT_POLICY) -> float:
    scores = _doubled_scores(KnowledgeGraph((cand,)), KnowledgeGraph((ref,)), policy)
    return float(scores[MatchMode(mode)][0, 0]) / 2


def pairwise_scores(cand: KnowledgeGraph, ref: KnowledgeGraph, policy: NormalizationPolicy = DEFAULT_POLICY) -> dict:
    """Per-mode ``(|cand|, |ref|)`` float arrays of triple-pair scores."""
    return {m: s / 2.0 for m, s in _doubled_scores(cand, ref, policy).items()}


def _composite(doubled: dict, order: Sequence[MatchMode], size: int) -> np.ndarray:
    base = 6 * size + 1
    weight = np.zeros_like(doubled[order[0]])
    for mode in order:
        weight = weight * base + doubled[mode]
    return weight


def _pad_square(weight: np.ndarray) -> np.ndarray:
    n, m = weight.shape
    size = max(n, m)
    out = np.zeros((size, size), dtype=np.int64)
    out[:n, :m] = weight
    return out


def _hungarian(cost: np.ndarray):
    """Min-cost perfect assignment on a square int matrix.

    Returns ``(col_of_row, u, v)`` with dual potentials such that
    ``cost - u[:, None] - v[None, :] >= 0``, tight on the assignment.
    """
    n = cost.shape[0]
    inf = np.iinfo(np.int64).max // 4
    a = np.zeros((n + 1, n + 1), dtype=np.int64)
    a[1:, 1:] = cost
    u = np.zeros(n + 1, dtype=np.int64)
    v = np.zeros(n + 1, dtype=np.int64)
    p = np.zeros(n + 1, dtype=np.int64)
    way = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, inf, dtype=np.int64)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used
            free[0] = False
            cur = a[i0] - u[i0] - v
            better = free & (cur < minv)
            minv[better] = cur[better]
            way[better] = j0
            masked = np.where(free, minv, inf)
            j1 = int(np.argmin(masked))
            delta = masked[j1]
            u[p[used]] += delta
            v[used] -= delta
            minv[free] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    col_of_row = np.zeros(n, dtype=np.int64)
    col_of_row[p[1:] - 1] = np.arange(n)
    return col_of_row, u[1:], v[1:]


def _lexmin_optimal(weight: np.ndarray) -> np.ndarray:
    """Maximum-weight assignment of a square matrix; among optimal ones, the
    one whose row->column vector is lexicographically smallest."""
    n = weight.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    cost = weight.max() - weight
    col_of_row, u, v = _hungarian(cost)
    tight = (cost - u[:, None] - v[None, :]) == 0
    if not np.any(tight & (np.arange(n)[None, :] < col_of_row[:, None])):
        return col_of_row
    row_of_col = np.empty(n, dtype=np.int64)
    row_of_col[col_of_row] = np.arange(n)
    fixed_col = np.zeros(n, dtype=bool)
    for i in range(n):
        target = int(col_of_row[i])
        options = np.nonzero(tight[i, :target] & ~fixed_col[:target])[0]
        if options.size:
            # columns that can reach `target` along alternating tight paths avoiding rows <= i
            parent = {target: -1}
            frontier = [target]
            while frontier:
                c = frontier.pop()
                for r in np.nonzero(tight[i + 1:, c])[0] + i + 1:
                    x = int(col_of_row[r])
                    if x not in parent:
                        parent[x] = c
                        frontier.append(x)
            reachable = [int(j) for j in options if int(j) in parent]
            if reachable:
                j = reachable[0]
                chain = []
                x = j
                while x != target:
                    chain.append((int(row_of_col[x]), parent[x]))
                    x = parent[x]
                for r, c in chain:
                    col_of_row[r] = c
                    row_of_col[c] = r
                col_of_row[i] = j
                row_of_col[j] = i
        fixed_col[col_of_row[i]] = True
    return col_of_row


def _pairs_from_assignment(col_of_row, weight: np.ndarray) -> tuple[tuple[int, int], ...]:
    n, m = weight.shape
    return tuple(
        (i, int(j)) for i, j in enumerate(col_of_row[:n]) if j < m and weight[i, j] > 0
    )


def _totals(doubled: dict, mode_pairs: dict) -> dict:
    return {m: sum(int(doubled[m][i, j]) for i, j in mode_pairs[m]) / 2.0 for m in MODES}


def _check_nonempty(cand, ref):
    if len(cand) == 0 or len(ref) == 0:
        raise ValueError("alignment needs non-empty graphs")


def align_graphs(
    cand: KnowledgeGraph,
    ref: KnowledgeGraph,
    policy: NormalizationPolicy = DEFAULT_POLICY,
    realign_per_mode: bool = False,
) -> AlignmentResult:
    """Optimal candidate/reference triple pairing.

    The pairing maximizes the Exact total, then Strict, Partial and EntType
    totals in turn; remaining ties go to the lexicographically smallest
    candidate-to-reference assignment. Pairs with no credit in any mode are
    left unmatched. With ``realign_per_mode`` each mode gets its own optimum.
    """
    _check_nonempty(cand, ref)
    doubled = _doubled_scores(cand, ref, policy)
    size = max(len(cand), len(ref))
    weight = _composite(doubled, _SELECTION_ORDER, size)
    pairs = _pairs_from_assignment(_lexmin_optimal(_pad_square(weight)), weight)
    if realign_per_mode:
        mode_pairs = {}
        for mode in MODES:
            w = doubled[mode]
            mode_pairs[mode] = _pairs_from_assignment(_lexmin_optimal(_pad_square(w)), w)
    else:
        mode_pairs = {m: pairs for m in MODES}
    return AlignmentResult(
        pairs=mode_pairs[MatchMode.EXACT] if realign_per_mode else pairs,
        score_matrix={m: s / 2.0 for m, s in doubled.items()},
        total_score=_totals(doubled, mode_pairs),
        mode_pairs=mode_pairs,
    )


def _brute_force_pick(weight: np.ndarray) -> tuple[tuple[int, int], ...]:
    padded = _pad_square(weight)
    size = padded.shape[0]
    best_perm, best = None, None
    rows = range(size)
    for perm in itertools.permutations(range(size)):
        total = sum(int(padded[i, perm[i]]) for i in rows)
        if best is None or total > best:
            best, best_perm = total, perm
    return _pairs_from_assignment(np.asarray(best_perm), weight)


def brute_force_alignment(
    cand: KnowledgeGraph,
    ref: KnowledgeGraph,
    policy: NormalizationPolicy = DEFAULT_POLICY,
    realign_per_mode: bool = False,
) -> AlignmentResult:
    """Exhaustive counterpart of :func:`align_graphs` for graphs of <= 8 triples."""
    _check_nonempty(cand, ref)
    size = max(len(cand), len(ref))
    if size > BRUTE_FORCE_LIMIT:
        raise SizeLimitExceeded(f"brute force alignment is limited to {BRUTE_FORCE_LIMIT} triples, got {size}")
    doubled = _doubled_scores(cand, ref, policy)
    weight = _composite(doubled, _SELECTION_ORDER, size)
    pairs = _brute_force_pick(weight)
    if realign_per_mode:
        mode_pairs = {m: _brute_force_pick(doubled[m]) for m in MODES}
    else:
        mode_pairs = {m: pairs for m in MODES}
    return AlignmentResult(
        pairs=mode_pairs[MatchMode.EXACT] if realign_per_mode else pairs,
        score_matrix={m: s / 2.0 for m, s in doubled.items()},
        total_score=_totals(doubled, mode_pairs),
        mode_pairs=mode_pairs,
    )


def _report(totals: dict, n_cand: int, n_ref: int) -> GraphMatchReport:
    scores = {}
    for mode in MODES:
        p = totals[mode] / (3 * n_cand) if n_cand else 0.0
        r = totals[mode] / (3 * n_ref) if n_ref else 0.0
        scores[mode] = ModeScore(p, r, _f1(p, r))
    return GraphMatchReport(scores)


def _graph_totals(cand, ref, policy, realign_per_mode) -> dict:
    if len(cand) == 0 or len(ref) == 0:
        return {m: 0.0 for m in MODES}
    return align_graphs(cand, ref, policy, realign_per_mode).total_score


def score_graphs(
    cand: KnowledgeGraph,
    ref: KnowledgeGraph,
    policy: NormalizationPolicy = DEFAULT_POLICY,
    realign_per_mode: bool = False,
) -> GraphMatchReport:
    return _report(_graph_totals(cand, ref, policy, realign_per_mode), len(cand), len(ref))


def score_corpus(
    cands: Sequence[KnowledgeGraph],
    refs: Sequence[KnowledgeGraph],
    policy: NormalizationPolicy = DEFAULT_POLICY,
    macro: bool = False,
    realign_per_mode: bool = False,
) -> GraphMatchReport:
    """Corpus scores; micro-averaged unless ``macro`` is set."""
    if len(cands) != len(refs):
        raise ValueError(f"{len(cands)} candidate graphs vs {len(refs)} reference graphs")
    if not cands:
        raise ValueError("empty corpus")
    if macro:
        sums = {m: [0.0, 0.0, 0.0] for m in MODES}
        for c, r in zip(cands, refs):
            rep = score_graphs(c, r, policy, realign_per_mode)
            for m in MODES:
                s = rep[m]
                sums[m][0] += s.precision
                sums[m][1] += s.recall
                sums[m][2] += s.f1
        n = len(cands)
        return GraphMatchReport({m: ModeScore(v[0] / n, v[1] / n, v[2] / n) for m, v in sums.items()})
    totals = {m: 0.0 for m in MODES}
    n_cand = n_ref = 0
    for c, r in zip(cands, refs):
        for m, t in _graph_totals(c, r, policy, realign_per_mode).items():
            totals[m] += t
        n_cand += len(c)
        n_ref += len(r)
    return _report(totals, n_cand, n_ref)
