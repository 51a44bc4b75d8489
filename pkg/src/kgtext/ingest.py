"""Dataset interchange files and TekGen-style boundary reconstruction.

The interchange format is one JSON object per line::

    {"id": "...", "text": "...", "triples": [["s", "p", "o"], ...], "category": "..."}

``category`` is optional. Boundary reconstruction turns a subject plus a
flat ``relation object relation object ...`` string into (predicate, object)
pairs by greedy longest matching against a property lookup table.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field
from typing import IO, Iterable, Mapping, Optional, Protocol, Sequence

from .model import DEFAULT_POLICY, KnowledgeGraph, NormalizationPolicy, Sample, Triple, normalize

# tokens that only delimit fields in flattened triple text
SEPARATOR_TOKENS = frozenset({"◊", "♢", "|"})


class ParseError(ValueError):
    def __init__(self, message: str, line: int, offset: int):
        super().__init__(f"line {line} (byte {offset}): {message}")
        self.line = line
        self.offset = offset


class LookupTableError(ValueError):
    """Malformed or inconsistent property lookup table."""


# ---------------------------------------------------------------------------
# interchange records


def sample_to_record(sample: Sample) -> dict:
    rec = {"id": sample.id, "text": sample.text, "triples": sample.graph.to_lists()}
    if sample.category is not None:
        rec["category"] = sample.category
    return rec


def record_to_sample(rec) -> Sample:
    """Validate one decoded record. Raises ``ValueError`` describing the problem."""
    if not isinstance(rec, dict):
        raise ValueError(f"record must be an object, got {type(rec).__name__}")
    for name in ("id", "text"):
        if not isinstance(rec.get(name), str):
            raise ValueError(f"field {name!r} must be a string")
    triples = rec.get("triples")
    if not isinstance(triples, list):
        raise ValueError("field 'triples' must be an array")
    rows = []
    for i, row in enumerate(triples):
        if not (isinstance(row, list) and len(row) == 3 and all(isinstance(x, str) for x in row)):
            raise ValueError(f"triple {i} must be an array of 3 strings")
        rows.append(row)
    category = rec.get("category")
    if category is not None and not isinstance(category, str):
        raise ValueError("field 'category' must be a string")
    try:
        graph = KnowledgeGraph.from_lists(rows)
    except (TypeError, ValueError) as exc:
        raise ValueError(str(exc)) from None
    return Sample(rec["id"], rec["text"], graph, category)


def iter_records(stream: IO[bytes]):
    """Yield ``(line_number, byte_offset, decoded_object)``, skipping blank lines."""
    offset = 0
    for lineno, raw in enumerate(stream, start=1):
        start = offset
        offset += len(raw)
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw.decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise ParseError(f"invalid UTF-8 ({exc.reason})", lineno, start + exc.start) from None
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", lineno, start + exc.pos) from None
        yield lineno, start, obj


def read_samples(stream: IO[bytes]) -> list[Sample]:
    out = []
    for lineno, start, obj in iter_records(stream):
        try:
            out.append(record_to_sample(obj))
        except ValueError as exc:
            raise ParseError(str(exc), lineno, start) from None
    return out


def read_dataset(path: str | os.PathLike) -> list[Sample]:
    """Read an interchange file. An empty file gives an empty list."""
    with open(path, "rb") as fh:
        return read_samples(fh)


def dump_record(rec: dict) -> str:
    return json.dumps(rec, ensure_ascii=False)


def write_dataset(samples: Iterable[Sample], path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        write_samples(samples, fh)


def write_samples(samples: Iterable[Sample], stream: IO[str]) -> None:
    for s in samples:
        stream.write(dump_record(sample_to_record(s)) + "\n")


# ---------------------------------------------------------------------------
# property lookup


@dataclass(frozen=True)
class PropertyMatch:
    property_id: str
    label: str
    length: int  # number of tokens consumed


class PropertyResolver(Protocol):
    """Anything that can find the longest relation surface starting at ``start``.

    The file-backed :class:`PropertyLookup` is the default; a client for a
    remote service only needs to provide this method.
    """

    def match(self, tokens: Sequence[str], start: int) -> Optional[PropertyMatch]: ...


@dataclass
class PropertyLookup:
    """Relation surface forms (label plus aliases) keyed by normalized tokens."""

    labels: dict[str, str] = field(default_factory=dict)
    aliases: dict[str, tuple[str, ...]] = field(default_factory=dict)
    policy: NormalizationPolicy = DEFAULT_POLICY

    def __post_init__(self):
        self._keys: dict[tuple[str, ...], str] = {}
        for pid, label in self.labels.items():
            for surface in (label,) + tuple(self.aliases.get(pid, ())):
                self._add(pid, surface)
        if not self._keys:
            raise LookupTableError("property lookup is empty")
        self._max_len = max(len(k) for k in self._keys)

    def _add(self, pid: str, surface: str) -> None:
        key = tuple(normalize(surface, self.policy).split())
        if not key:
            raise LookupTableError(f"property {pid} has an empty surface form")
        owner = self._keys.setdefault(key, pid)
        if owner != pid:
            raise LookupTableError(f"surface {' '.join(key)!r} is claimed by both {owner} and {pid}")

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[str]], policy: NormalizationPolicy = DEFAULT_POLICY) -> "PropertyLookup":
        labels: dict[str, str] = {}
        aliases: dict[str, tuple[str, ...]] = {}
        for row in rows:
            if len(row) < 2 or len(row) > 3:
                raise LookupTableError(f"lookup row needs 2 or 3 columns, got {len(row)}")
            pid, label = row[0].strip(), row[1].strip()
            if not pid or pid in labels:
                raise LookupTableError(f"missing or duplicate property id {pid!r}")
            labels[pid] = label
            extra = row[2] if len(row) == 3 else ""
            aliases[pid] = tuple(a.strip() for a in extra.split(",") if a.strip())
        return cls(labels, aliases, policy)

    @classmethod
    def from_tsv(cls, path: str | os.PathLike, policy: NormalizationPolicy = DEFAULT_POLICY) -> "PropertyLookup":
        with open(path, encoding="utf-8", newline="") as fh:
            rows = [r for r in csv.reader(fh, delimiter="\t", quoting=csv.QUOTE_NONE) if r and not r[0].startswith("#")]
        if rows and rows[0][0].strip().lower() == "property_id":
            rows = rows[1:]
        return cls.from_rows(rows, policy)

    def keys(self) -> list[str]:
        return sorted(" ".join(k) for k in self._keys)

    def __contains__(self, surface: str) -> bool:
        return tuple(normalize(surface, self.policy).split()) in self._keys

    def match(self, tokens: Sequence[str], start: int) -> Optional[PropertyMatch]:
        limit = min(self._max_len, len(tokens) - start)
        window = tuple(normalize(t, self.policy) for t in tokens[start:start + limit])
        for n in range(limit, 0, -1):
            pid = self._keys.get(window[:n])
            if pid is not None:
                return PropertyMatch(pid, self.labels[pid], n)
        return None


# ---------------------------------------------------------------------------
# boundary reconstruction


@dataclass(frozen=True)
class BoundaryReconstruction:
    subject: str
    pairs: tuple[tuple[str, str], ...]
    property_ids: tuple[str, ...]
    unresolved: tuple[str, ...]

    @property
    def complete(self) -> bool:
        return bool(self.pairs) and not self.unresolved

    def tokens(self) -> list[str]:
        """All tokens of subject, pairs and unresolved spans, in order of appearance."""
        out = self.subject.split()
        for p, o in self.pairs:
            out += p.split() + o.split()
        for span in self.unresolved:
            out += span.split()
        return out

    def triples(self) -> list[Triple]:
        return [Triple(self.subject, p, o) for p, o in self.pairs]


def reconstruct_boundaries(subject: str, flat: str, lookup: PropertyResolver) -> BoundaryReconstruction:
    """Split ``flat`` into (predicate, object) pairs by greedy longest key match.

    Predicates keep their surface spelling from ``flat``; the resolved property
    ids are reported alongside. Text before the first key, and any key that is
    immediately followed by another key (so it has no object), is reported as
    unresolved.
    """
    tokens = [t for t in flat.split() if t not in SEPARATOR_TOKENS]
    pairs: list[tuple[str, str]] = []
    pids: list[str] = []
    unresolved: list[str] = []
    pending: Optional[tuple[str, str]] = None  # (predicate surface, property id)
    buf: list[str] = []

    def close():
        nonlocal pending
        if pending is None:
            if buf:
                unresolved.append(" ".join(buf))
        elif buf:
            pairs.append((pending[0], " ".join(buf)))
            pids.append(pending[1])
        else:
            unresolved.append(pending[0])
        pending = None
        buf.clear()

    i = 0
    while i < len(tokens):
        m = lookup.match(tokens, i)
        if m is None:
            buf.append(tokens[i])
            i += 1
            continue
        close()
        pending = (" ".join(tokens[i:i + m.length]), m.property_id)
        i += m.length
    close()
    return BoundaryReconstruction(subject.strip(), tuple(pairs), tuple(pids), tuple(unresolved))


@dataclass(frozen=True)
class TekgenRecord:
    subject: str
    flat: str
    sentence: str
    id: Optional[str] = None

    @classmethod
    def from_mapping(cls, rec: Mapping) -> "TekgenRecord":
        for name in ("subject", "flat", "sentence"):
            if not isinstance(rec.get(name), str):
                raise ValueError(f"field {name!r} must be a string")
        rid = rec.get("id")
        if rid is not None and not isinstance(rid, str):
            raise ValueError("field 'id' must be a string")
        return cls(rec["subject"], rec["flat"], rec["sentence"], rid)


def tekgen_to_samples(
    records: Iterable[TekgenRecord | Mapping],
    lookup: PropertyResolver,
    rejects: Optional[list] = None,
    category: Optional[str] = "tekgen",
) -> list[Sample]:
    """Star-shaped samples (one shared subject) from flattened TekGen records.

    Records that leave any span unresolved, or that cannot form a valid
    sample, are appended to ``rejects`` as interchange records with an extra
    ``reason`` field instead of being dropped silently.
    """
    out: list[Sample] = []
    for index, raw in enumerate(records):
        rec = raw if isinstance(raw, TekgenRecord) else TekgenRecord.from_mapping(raw)
        rid = rec.id if rec.id is not None else f"tekgen-{index}"
        recon = reconstruct_boundaries(rec.subject, rec.flat, lookup)
        reason = None
        if recon.unresolved:
            reason = "unresolved spans: " + " | ".join(recon.unresolved)
        elif not recon.pairs:
            reason = "no relation found"
        else:
            try:
                out.append(Sample(rid, rec.sentence, KnowledgeGraph(tuple(recon.triples())), category))
            except ValueError as exc:
                reason = f"invalid sample: {exc}"
        if reason is not None and rejects is not None:
            rejects.append(
                {
                    "id": rid,
                    "text": rec.sentence,
                    "triples": [[recon.subject, p, o] for p, o in recon.pairs],
                    "reason": reason,
                }
            )
    return out
