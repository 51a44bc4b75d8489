"""Synthetic graph/text pairs over a tiny closed world.

Ten entities, five relations, graphs of one to three distinct triples. Each
triple is verbalized as ``subject verb object .``; which synonym voices each
relation is fixed per dataset seed, and the sentences of a sample appear in
a seeded random order.
Graph and text state the same facts, but the text does not reveal the graph's
triple order (and vice versa), much like crowd-written references.
"""

from __future__ import annotations

import numpy as np

from ..model import KnowledgeGraph, Sample, Triple

ENTITIES = ("alice", "bob", "carol", "dave", "erin", "frank", "grace", "heidi", "ivan", "judy")
RELATIONS = {
    "likes": ("likes", "adores"),
    "knows": ("knows", "recognizes"),
    "employs": ("employs", "hires"),
    "mentors": ("mentors", "coaches"),
    "follows": ("follows", "admires"),
}


def lexicon(seed: int) -> dict[str, str]:
    """Relation -> verb used by every sample generated with ``seed``."""
    rng = np.random.default_rng([seed, 7])
    return {rel: syn[int(rng.integers(len(syn)))] for rel, syn in RELATIONS.items()}


def verbalize(triple: Triple, verbs: dict[str, str]) -> str:
    verb = verbs[triple.predicate]
    return f"{triple.subject} {verb} {triple.object} ."


def toy_task_generate(n_samples: int, seed: int) -> list[Sample]:
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    verbs = lexicon(seed)
    relations = tuple(RELATIONS)
    samples = []
    for i in range(n_samples):
        k = int(rng.integers(1, 4))
        triples: list[Triple] = []
        while len(triples) < k:
            s, o = rng.choice(len(ENTITIES), size=2, replace=False)
            t = Triple(ENTITIES[s], relations[int(rng.integers(len(relations)))], ENTITIES[o])
            if t not in triples:
                triples.append(t)
        sentences = [verbalize(t, verbs) for t in triples]
        text = " ".join(sentences[j] for j in rng.permutation(k))
        samples.append(Sample(f"toy-{seed}-{i}", text, KnowledgeGraph(tuple(triples)), "toy"))
    return samples
