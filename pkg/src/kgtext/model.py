"""Core value types: triples, graphs, samples and string normalization."""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

MARKERS = ("<S>", "<P>", "<O>")


@dataclass(frozen=True)
class NormalizationPolicy:
    lowercase: bool = True
    underscores_to_spaces: bool = True
    collapse_whitespace: bool = True
    strip_accents: bool = False


DEFAULT_POLICY = NormalizationPolicy()


def _strip_accents(s: str) -> str:
    decomposed = unicodedata.normalize("NFKD", s)
    return "".join(ch for ch in decomposed if not unicodedata.combining(ch))


def _normalize_once(s: str, policy: NormalizationPolicy) -> str:
    if policy.strip_accents:
        s = _strip_accents(s)
    if policy.lowercase:
        s = s.lower()
        if policy.strip_accents:
            # lower() can emit combining marks (e.g. U+0130)
            s = _strip_accents(s)
    if policy.underscores_to_spaces:
        s = s.replace("_", " ")
    if policy.collapse_whitespace:
        s = " ".join(s.split())
    return s


def normalize(s: str, policy: NormalizationPolicy = DEFAULT_POLICY) -> str:
    """Return the canonical comparison form of ``s``.

    Idempotent: ``normalize(normalize(s)) == normalize(s)``. A few exotic
    code points need two passes to settle, so the transform is iterated to
    its fixed point (bounded; in practice at most two rounds).
    """
    out = _normalize_once(s, policy)
    for _ in range(4):
        again = _normalize_once(out, policy)
        if again == out:
            break
        out = again
    return out


@dataclass(frozen=True)
class Triple:
    subject: str
    predicate: str
    object: str

    def __post_init__(self):
        for name in ("subject", "predicate", "object"):
            value = getattr(self, name)
            if not isinstance(value, str):
                raise TypeError(f"triple {name} must be a string, got {type(value).__name__}")
            if not value.strip():
                raise ValueError(f"triple {name} is empty")
            for marker in MARKERS:
                if marker in value:
                    raise ValueError(f"triple {name} {value!r} contains marker {marker}")

    def __iter__(self):
        return iter((self.subject, self.predicate, self.object))

    def as_list(self) -> list[str]:
        return [self.subject, self.predicate, self.object]

    def normalized(self, policy: NormalizationPolicy = DEFAULT_POLICY) -> tuple[str, str, str]:
        return (
            normalize(self.subject, policy),
            normalize(self.predicate, policy),
            normalize(self.object, policy),
        )


@dataclass(frozen=True)
class KnowledgeGraph:
    """An ordered list of triples; order is the dataset's linearization order."""

    triples: tuple[Triple, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "triples", tuple(self.triples))

    @classmethod
    def from_lists(cls, rows: Iterable[Sequence[str]]) -> "KnowledgeGraph":
        out = []
        for row in rows:
            if len(row) != 3:
                raise ValueError(f"triple must have 3 elements, got {len(row)}")
            out.append(Triple(*row))
        return cls(tuple(out))

    def __len__(self) -> int:
        return len(self.triples)

    def __iter__(self):
        return iter(self.triples)

    def __getitem__(self, i):
        return self.triples[i]

    def to_lists(self) -> list[list[str]]:
        return [t.as_list() for t in self.triples]


def graph_equal(a: KnowledgeGraph, b: KnowledgeGraph, policy: NormalizationPolicy = DEFAULT_POLICY) -> bool:
    """True iff the normalized triple multisets of ``a`` and ``b`` coincide."""
    if len(a) != len(b):
        return False
    return Counter(t.normalized(policy) for t in a) == Counter(t.normalized(policy) for t in b)


@dataclass(frozen=True)
class Sample:
    id: str
    text: str
    graph: KnowledgeGraph = field(default_factory=KnowledgeGraph)
    category: Optional[str] = None

    def __post_init__(self):
        if not self.text:
            raise ValueError(f"sample {self.id!r} has empty text")
