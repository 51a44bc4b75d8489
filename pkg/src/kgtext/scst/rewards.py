"""Scalar rewards built from weighted metric mixes, and SCST advantages."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence, Union

from ..codec import DEFAULT_CONFIG, Direction, LinearizationConfig, delinearize
from ..graph_metrics import MatchMode, score_graphs
from ..model import DEFAULT_POLICY, KnowledgeGraph, NormalizationPolicy, Triple
from ..text_metrics import ScoredPair, chrf_pp, corpus_bleu, meteor_lite, sentence_bleu_smoothed

EOS = "</s>"


class IncompatibleSpec(ValueError):
    """Reward spec does not fit the payload or direction."""


class Metric(str, enum.Enum):
    BLEU = "bleu"
    BLEU_SMOOTHED = "bleu_smoothed"
    CHRF_PP = "chrf_pp"
    METEOR_LITE = "meteor_lite"
    F1_EXACT = "f1_exact"
    F1_ENT_TYPE = "f1_ent_type"
    F1_PARTIAL = "f1_partial"
    F1_STRICT = "f1_strict"

    @property
    def is_graph_metric(self) -> bool:
        return self.value.startswith("f1_")


_GRAPH_MODE = {
    Metric.F1_EXACT: MatchMode.EXACT,
    Metric.F1_ENT_TYPE: MatchMode.ENT_TYPE,
    Metric.F1_PARTIAL: MatchMode.PARTIAL,
    Metric.F1_STRICT: MatchMode.STRICT,
}


@dataclass(frozen=True)
class RewardSpec:
    components: tuple[tuple[Metric, float], ...]
    direction: Direction

    def __post_init__(self):
        comps = tuple((Metric(m), float(w)) for m, w in self.components)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "direction", Direction(self.direction))
        if not comps:
            raise IncompatibleSpec("reward spec needs at least one component")
        metrics = [m for m, _ in comps]
        if len(set(metrics)) != len(metrics):
            raise IncompatibleSpec("reward spec lists a metric twice")
        if not sum(w for _, w in comps) > 0:
            raise IncompatibleSpec("reward weights must sum to a positive value")
        want_graph = self.direction is Direction.T2G
        for m in metrics:
            if m.is_graph_metric != want_graph:
                raise IncompatibleSpec(f"metric {m.value} does not apply to direction {self.direction.value}")

    @classmethod
    def single(cls, metric, direction=None) -> "RewardSpec":
        metric = Metric(metric)
        if direction is None:
            direction = Direction.T2G if metric.is_graph_metric else Direction.G2T
        return cls(((metric, 1.0),), direction)

    @classmethod
    def parse(cls, items: Sequence[str], direction=None) -> "RewardSpec":
        """Build from ``metric=weight`` strings (a bare ``metric`` means weight 1)."""
        comps = []
        for item in items:
            name, _, weight = item.partition("=")
            try:
                comps.append((Metric(name.strip()), float(weight) if weight else 1.0))
            except ValueError as exc:
                raise IncompatibleSpec(f"bad spec component {item!r}: {exc}") from None
        if not comps:
            raise IncompatibleSpec("reward spec needs at least one component")
        if direction is None:
            direction = Direction.T2G if comps[0][0].is_graph_metric else Direction.G2T
        return cls(tuple(comps), direction)


GraphLike = Union[KnowledgeGraph, Sequence[Sequence[str]]]


def _as_tokens(hypothesis) -> list[str]:
    tokens = hypothesis.split() if isinstance(hypothesis, str) else list(hypothesis)
    if tokens and tokens[-1] == EOS:
        tokens = tokens[:-1]
    return tokens


def _as_graph(references) -> KnowledgeGraph:
    if isinstance(references, KnowledgeGraph):
        return references
    if isinstance(references, str):
        raise IncompatibleSpec("t2g rewards need a reference graph, got text")
    try:
        return KnowledgeGraph.from_lists(references)
    except (TypeError, ValueError) as exc:
        raise IncompatibleSpec(f"t2g references must be triples: {exc}") from None


def _as_texts(references) -> tuple[str, ...]:
    if isinstance(references, str):
        return (references,)
    if isinstance(references, KnowledgeGraph) or not references:
        raise IncompatibleSpec("g2t rewards need one or more reference strings")
    refs = tuple(references)
    if not all(isinstance(r, str) for r in refs):
        raise IncompatibleSpec("g2t references must be strings")
    return refs


def reward_components(
    hypothesis,
    references,
    spec: RewardSpec,
    cfg: LinearizationConfig = DEFAULT_CONFIG,
    policy: NormalizationPolicy = DEFAULT_POLICY,
) -> dict[str, float]:
    """Raw value of every metric named in ``spec`` (unweighted).

    G2T hypotheses are strings or token lists; T2G hypotheses are marker
    sequences, parsed with error recovery before scoring.
    """
    out = {}
    if spec.direction is Direction.G2T:
        pair = ScoredPair(" ".join(_as_tokens(hypothesis)), _as_texts(references))
        for metric, _ in spec.components:
            if metric is Metric.BLEU:
                out[metric.value] = corpus_bleu([pair])
            elif metric is Metric.BLEU_SMOOTHED:
                out[metric.value] = sentence_bleu_smoothed(pair)
            elif metric is Metric.CHRF_PP:
                out[metric.value] = chrf_pp([pair])
            else:
                out[metric.value] = meteor_lite(pair)
        return out
    ref = _as_graph(references)
    cand = delinearize(_as_tokens(hypothesis), cfg).graph
    report = score_graphs(cand, ref, policy)
    for metric, _ in spec.components:
        out[metric.value] = report[_GRAPH_MODE[metric]].f1
    return out


def combine(components: dict[str, float], spec: RewardSpec) -> float:
    return sum(w * components[m.value] for m, w in spec.components)


def compute_reward(hypothesis, references, spec: RewardSpec, cfg: LinearizationConfig = DEFAULT_CONFIG) -> float:
    return combine(reward_components(hypothesis, references, spec, cfg), spec)


@dataclass(frozen=True)
class ScstItem:
    sampled_sequence: tuple[str, ...]
    greedy_sequence: tuple[str, ...]
    references: object
    sampled_logprob_per_token: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "sampled_sequence", tuple(self.sampled_sequence))
        object.__setattr__(self, "greedy_sequence", tuple(self.greedy_sequence))
        object.__setattr__(self, "sampled_logprob_per_token", tuple(self.sampled_logprob_per_token))
        lp = self.sampled_logprob_per_token
        if lp and len(lp) != len(self.sampled_sequence):
            raise ValueError("one log-probability per sampled token is required")
        if any(x > 0 for x in lp):
            raise ValueError("log-probabilities must be <= 0")

    @property
    def identical(self) -> bool:
        return self.sampled_sequence == self.greedy_sequence


@dataclass(frozen=True)
class Advantage:
    reward_sampled: float
    reward_greedy: float
    advantage: float


def scst_advantages(batch: Sequence[ScstItem], spec: RewardSpec, cfg: LinearizationConfig = DEFAULT_CONFIG) -> list[Advantage]:
    """Per-item ``R(sampled) - R(greedy)``.

    Positive values reinforce the sample, negative ones suppress it, and
    token-identical pairs get exactly zero.
    """
    if not batch:
        raise ValueError("empty SCST batch")
    out = []
    for item in batch:
        r_s = compute_reward(item.sampled_sequence, item.references, spec, cfg)
        if item.identical:
            out.append(Advantage(r_s, r_s, 0.0))
            continue
        r_g = compute_reward(item.greedy_sequence, item.references, spec, cfg)
        out.append(Advantage(r_s, r_g, r_s - r_g))
    return out
