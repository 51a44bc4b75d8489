"""Marker-token linearization of knowledge graphs and its inverse.

A triple ``(s, p, o)`` is serialized as ``<S> s-tokens <P> p-tokens <O>
o-tokens``; graphs are the concatenation of their triples in list order.
Parsing is total: malformed generations produce a partial graph plus the
token spans that could not be used.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import KnowledgeGraph, Triple


class CapacityExceeded(ValueError):
    """The linearized graph would be longer than ``max_tokens``."""


class Direction(str, enum.Enum):
    T2G = "t2g"
    G2T = "g2t"


@dataclass(frozen=True)
class LinearizationConfig:
    subject_marker: str = "<S>"
    predicate_marker: str = "<P>"
    object_marker: str = "<O>"
    t2g_prefix: str = "Text to Graph: "
    g2t_prefix: str = "Graph to Text: "
    max_tokens: int = 192

    def __post_init__(self):
        markers = self.markers
        if any(not m or m.split() != [m] for m in markers):
            raise ValueError("markers must be non-empty single tokens")
        if len(set(markers)) != 3:
            raise ValueError("markers must be pairwise distinct")
        if self.max_tokens < 9:
            raise ValueError("max_tokens must be at least 9")

    @property
    def markers(self) -> tuple[str, str, str]:
        return (self.subject_marker, self.predicate_marker, self.object_marker)

    def prefix_tokens(self, direction: Direction) -> list[str]:
        prefix = self.t2g_prefix if Direction(direction) is Direction.T2G else self.g2t_prefix
        return prefix.split()


DEFAULT_CONFIG = LinearizationConfig()

TokenSequence = list  # list[str]; kept as a plain list for interop


@dataclass(frozen=True)
class ParseReport:
    graph: KnowledgeGraph
    dropped_fragments: tuple[tuple[int, int], ...]
    """Half-open ``(start, stop)`` token spans that formed no complete triple."""
    well_formed: bool

    def dropped_tokens(self, seq: Sequence[str]) -> list[list[str]]:
        return [list(seq[a:b]) for a, b in self.dropped_fragments]


def linearize(g: KnowledgeGraph, cfg: LinearizationConfig = DEFAULT_CONFIG) -> list[str]:
    if len(g) == 0:
        raise ValueError("cannot linearize an empty graph")
    markers = set(cfg.markers)
    out: list[str] = []
    for triple in g:
        for marker, value in zip(cfg.markers, triple):
            words = value.split()
            if markers.intersection(words):
                raise ValueError(f"field {value!r} contains a marker token")
            out.append(marker)
            out.extend(words)
    if len(out) > cfg.max_tokens:
        raise CapacityExceeded(f"linearized graph has {len(out)} tokens, limit is {cfg.max_tokens}")
    return out


_EXPECT_S, _SUBJ, _PRED, _OBJ = range(4)


def delinearize(seq: Sequence[str], cfg: LinearizationConfig = DEFAULT_CONFIG) -> ParseReport:
    """Recover complete triples from ``seq`` with greedy left-to-right recovery.

    A ``<S>`` always opens a new fragment, abandoning any unfinished one.
    After a complete object span, a stray ``<P>``/``<O>`` closes the triple
    and starts junk that lasts until the next ``<S>``.
    """
    s_mark, p_mark, o_mark = cfg.markers
    seq = list(seq)
    triples: list[Triple] = []
    used = [False] * len(seq)

    state = _EXPECT_S
    start = 0
    fields: list[list[str]] = [[], [], []]

    def emit(stop: int) -> None:
        try:
            triple = Triple(" ".join(fields[0]), " ".join(fields[1]), " ".join(fields[2]))
        except ValueError:
            # content token embeds a marker substring; leave the span dropped
            return
        triples.append(triple)
        for i in range(start, stop):
            used[i] = True

    for i, tok in enumerate(seq):
        if tok == s_mark:
            if state == _OBJ and fields[2]:
                emit(i)
            state, start, fields = _SUBJ, i, [[], [], []]
        elif state == _EXPECT_S:
            continue
        elif tok == p_mark:
            if state == _SUBJ and fields[0]:
                state = _PRED
            else:
                if state == _OBJ and fields[2]:
                    emit(i)
                state = _EXPECT_S
        elif tok == o_mark:
            if state == _PRED and fields[1]:
                state = _OBJ
            else:
                if state == _OBJ and fields[2]:
                    emit(i)
                state = _EXPECT_S
        else:
            fields[state - _SUBJ].append(tok)
    if state == _OBJ and fields[2]:
        emit(len(seq))

    dropped = []
    i = 0
    while i < len(seq):
        if used[i]:
            i += 1
            continue
        j = i + 1
        while j < len(seq) and not used[j] and seq[j] != s_mark:
            j += 1
        dropped.append((i, j))
        i = j
    return ParseReport(KnowledgeGraph(tuple(triples)), tuple(dropped), not dropped)


def augment_shuffle(g: KnowledgeGraph, n_permutations: int, seed: int) -> list[KnowledgeGraph]:
    """Return ``n_permutations`` orderings of ``g``; element 0 is the original order."""
    if n_permutations < 1:
        raise ValueError("n_permutations must be >= 1")
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    rng = np.random.default_rng(seed)
    out = [g]
    for _ in range(n_permutations - 1):
        order = rng.permutation(len(g))
        out.append(KnowledgeGraph(tuple(g.triples[i] for i in order)))
    return out


def prefix_task(seq: Sequence[str], direction: Direction, cfg: LinearizationConfig = DEFAULT_CONFIG) -> list[str]:
    return cfg.prefix_tokens(direction) + list(seq)


def strip_task_prefix(seq: Sequence[str], cfg: LinearizationConfig = DEFAULT_CONFIG) -> tuple[Direction | None, list[str]]:
    """Inverse of :func:`prefix_task`; returns ``(None, seq)`` when no prefix is present."""
    seq = list(seq)
    for direction in (Direction.T2G, Direction.G2T):
        prefix = cfg.prefix_tokens(direction)
        if seq[: len(prefix)] == prefix:
            return direction, seq[len(prefix):]
    return None, seq
