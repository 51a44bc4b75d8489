"""Random reward-server requests."""

import random

from kgtext.codec import LinearizationConfig, linearize
from kgtext.model import KnowledgeGraph, Triple

WORDS = "the cat sat on a mat dog ran far and fast alice bob likes knows .".split()
G2T_METRICS = ["bleu", "bleu_smoothed", "chrf_pp", "meteor_lite"]
T2G_METRICS = ["f1_exact", "f1_ent_type", "f1_partial", "f1_strict"]


def sentence(rng: random.Random, lo: int = 1, hi: int = 12) -> str:
    return " ".join(rng.choice(WORDS) for _ in range(rng.randint(lo, hi)))


def triple(rng: random.Random) -> list[str]:
    return [sentence(rng, 1, 2), rng.choice(["likes", "knows", "born in"]), sentence(rng, 1, 2)]


def spec(rng: random.Random, metrics: list[str]) -> list[dict]:
    chosen = rng.sample(metrics, rng.randint(1, len(metrics)))
    return [{"metric": m, "weight": round(rng.uniform(0.05, 2.0), 3)} for m in chosen]


def request(rng: random.Random, i: int) -> dict:
    if rng.random() < 0.5:
        return {
            "id": f"r{i}",
            "direction": "g2t",
            "hypothesis": sentence(rng, 0),
            "references": [sentence(rng) for _ in range(rng.randint(1, 3))],
            "spec": spec(rng, G2T_METRICS),
        }
    refs = [triple(rng) for _ in range(rng.randint(1, 4))]
    hyp_graph = KnowledgeGraph(tuple(Triple(*triple(rng)) for _ in range(rng.randint(0, 4))))
    tokens = linearize(hyp_graph) if len(hyp_graph) else []
    if tokens and rng.random() < 0.3:  # damage some sequences so error recovery is exercised
        del tokens[rng.randrange(len(tokens))]
    return {"id": f"r{i}", "direction": "t2g", "hypothesis": " ".join(tokens), "references": refs,
            "spec": spec(rng, T2G_METRICS)}


def big_graph_request(k: int = 50) -> dict:
    triples = [[f"entity {i}", f"relation {i % 7}", f"value {i * 3}"] for i in range(k)]
    hyp = KnowledgeGraph(tuple(Triple(*t) for t in reversed(triples)))
    wide = LinearizationConfig(max_tokens=20 * k)
    return {"id": "big", "direction": "t2g", "hypothesis": " ".join(linearize(hyp, wide)), "references": triples,
            "spec": [{"metric": m, "weight": 0.25} for m in T2G_METRICS]}


def mutate(rng: random.Random, line: bytes) -> bytes:
    b = bytearray(line)
    for _ in range(rng.randint(1, 6)):
        op = rng.random()
        if op < 0.4 and b:
            b[rng.randrange(len(b))] = rng.randrange(256)
        elif op < 0.6 and b:
            del b[rng.randrange(len(b)):]
        elif op < 0.8:
            pos = rng.randrange(len(b) + 1)
            b[pos:pos] = bytes(rng.randrange(256) for _ in range(rng.randint(1, 8)))
        else:
            b += rng.choice([b"\n", b"{", b"]", b'"', b"\x00", b"NaN", b"1e999", b"\r\n"])
    return bytes(b)


def nasty_lines() -> list[bytes]:
    return [
        b"{}", b"[]", b"null", b"42", b'"x"', b"{", b"\xff\xfe\xfd", b"[" * 100_000 + b"]" * 100_000,
        b'{"id": 5, "direction": "g2t"}', b'{"id": "a", "direction": "xyz"}',
        b'{"id": "a", "direction": "g2t", "hypothesis": "x", "references": ["y"], "spec": [{"metric": "bleu", "weight": NaN}]}',
        b'{"id": "a", "direction": "g2t", "hypothesis": "x", "references": ["y"], "spec": [{"metric": "bleu", "weight": 1e999}]}',
        b'{"id": "a", "direction": "g2t", "hypothesis": "x", "references": ["y"], "spec": [{"metric": "bleu", "weight": true}]}',
        b'{"id": "a", "direction": "g2t", "hypothesis": "x", "references": ["y"], "spec": [{"metric": "f1_exact"}]}',
        b'{"id": "a", "direction": "t2g", "hypothesis": "<S> a <P> b <O> c", "references": [["a", "b"]], "spec": [{"metric": "f1_exact"}]}',
        b'{"id": "a", "direction": "t2g", "hypothesis": 7, "references": [["a", "b", "c"]], "spec": [{"metric": "f1_exact"}]}',
        b'{"id": "a", "direction": "g2t", "hypothesis": "x", "references": [], "spec": [{"metric": "bleu"}]}',
        b'{"id": "a", "direction": "g2t", "hypothesis": "x", "references": ["y"], "spec": [{"metric": "bleu", "weight": -1}]}',
    ]
