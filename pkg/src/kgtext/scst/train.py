"""Cross-entropy pre-training followed by self-critical fine-tuning."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from ..codec import DEFAULT_CONFIG, Direction, LinearizationConfig, augment_shuffle, linearize
from ..model import Sample
from .policy import ToyPolicy, ce_loss_and_grad, generate, scst_loss_grad
from .rewards import EOS, Metric, RewardSpec, ScstItem, compute_reward, reward_components


class ConfigError(ValueError):
    pass


@dataclass
class TrainConfig:
    train: Sequence[Sample]
    val: Sequence[Sample]
    spec: RewardSpec
    ce_epochs: int = 30
    scst_epochs: int = 30
    ce_lr: float = 0.1
    scst_lr: float = 0.01
    seed: int = 0
    batch_size: int = 16
    n_permutations: int = 1
    """Triple-order permutations per training graph (element 0 is the original order)."""
    max_len: int = 48
    n_rows: int = 1 << 15
    scst_items_per_epoch: int | None = None
    cfg: LinearizationConfig = DEFAULT_CONFIG


@dataclass
class EpochRecord:
    phase: str
    epoch: int
    mean_loss: float
    val_reward: float
    seed: int
    selection: dict = field(default_factory=dict)
    train_reward_sampled: float | None = None
    train_reward_greedy: float | None = None


@dataclass
class TrainingReport:
    seed: int
    direction: str
    spec: list
    epochs: list = field(default_factory=list)
    best_ce_epoch: int | None = None
    best_scst_epoch: int | None = None

    def phase(self, name: str) -> list[EpochRecord]:
        return [e for e in self.epochs if e.phase == name]

    @property
    def best_ce_reward(self) -> float:
        return max(e.val_reward for e in self.phase("CE"))

    @property
    def best_scst_reward(self) -> float | None:
        scst = self.phase("SCST")
        return max(e.val_reward for e in scst) if scst else None

    def to_lines(self) -> list[str]:
        header = {"record": "run", "seed": self.seed, "direction": self.direction, "spec": self.spec}
        lines = [json.dumps(header, sort_keys=True)]
        lines += [json.dumps({"record": "epoch", **asdict(e)}, sort_keys=True) for e in self.epochs]
        summary = {
            "record": "summary",
            "best_ce_epoch": self.best_ce_epoch,
            "best_scst_epoch": self.best_scst_epoch,
            "best_ce_reward": self.best_ce_reward if self.phase("CE") else None,
            "best_scst_reward": self.best_scst_reward,
        }
        lines.append(json.dumps(summary, sort_keys=True))
        return lines


@dataclass
class _Example:
    input: list
    targets: list
    references: object
    ctx: object = None


def _examples(samples: Sequence[Sample], direction: Direction, n_perm: int, seed: int, cfg) -> list[_Example]:
    out = []
    for i, s in enumerate(samples):
        if direction is Direction.G2T:
            out.append(_Example(linearize(s.graph, cfg), [s.text.split()], (s.text,)))
        else:
            perm_seed = int(np.random.SeedSequence([seed, i]).generate_state(1, np.uint64)[0])
            targets = [linearize(g, cfg) for g in augment_shuffle(s.graph, n_perm, perm_seed)]
            out.append(_Example(s.text.split(), targets, s.graph))
    return out


def build_vocabulary(samples: Sequence[Sample], cfg: LinearizationConfig = DEFAULT_CONFIG) -> list[str]:
    vocab: dict[str, None] = dict.fromkeys(cfg.markers)
    for direction in (Direction.T2G, Direction.G2T):
        vocab.update(dict.fromkeys(cfg.prefix_tokens(direction)))
    for s in samples:
        vocab.update(dict.fromkeys(s.text.split()))
        vocab.update(dict.fromkeys(linearize(s.graph, cfg)))
    vocab[EOS] = None
    return list(vocab)


def _selection_spec(direction: Direction) -> RewardSpec:
    if direction is Direction.G2T:
        return RewardSpec(((Metric.METEOR_LITE, 1.0), (Metric.BLEU_SMOOTHED, 1.0), (Metric.CHRF_PP, 1.0)), direction)
    return RewardSpec(((Metric.F1_EXACT, 1.0),), direction)


def evaluate(policy: ToyPolicy, examples: Sequence[_Example], spec: RewardSpec, max_len: int, cfg=DEFAULT_CONFIG):
    """Mean greedy-decode reward under ``spec`` plus the model-selection metrics."""
    sel_spec = _selection_spec(spec.direction)
    reward = 0.0
    sel = {m.value: 0.0 for m, _ in sel_spec.components}
    for ex in examples:
        hyp, _ = generate(policy, ex.input, "greedy", max_len=max_len, ctx=ex.ctx)
        reward += compute_reward(hyp, ex.references, spec, cfg)
        for k, v in reward_components(hyp, ex.references, sel_spec, cfg).items():
            sel[k] += v
    n = len(examples)
    return reward / n, {k: v / n for k, v in sel.items()}


def _selection_key(record: EpochRecord, direction: Direction) -> tuple:
    if direction is Direction.G2T:
        keys = ("meteor_lite", "bleu_smoothed", "chrf_pp")
    else:
        keys = ("f1_exact",)
    return tuple(record.selection[k] for k in keys)


def train(config: TrainConfig, policy: ToyPolicy | None = None) -> tuple[TrainingReport, ToyPolicy]:
    """Run CE epochs, hand the best CE checkpoint to SCST, run SCST epochs.

    The CE checkpoint is chosen on validation METEOR-lite (G2T, ties broken by
    smoothed BLEU then chrF++) or exact F1 (T2G), earliest epoch on full ties.
    """
    if config.ce_epochs < 1:
        raise ConfigError("at least one CE epoch is required before SCST")
    if config.scst_epochs < 0:
        raise ConfigError("scst_epochs must be >= 0")
    if not config.train or not config.val:
        raise ConfigError("train and validation sets must be non-empty")
    if not isinstance(config.spec, RewardSpec):
        raise ConfigError("spec must be a RewardSpec")
    direction = config.spec.direction
    cfg = config.cfg
    if policy is None:
        policy = ToyPolicy(build_vocabulary(list(config.train) + list(config.val), cfg), config.n_rows, cfg)
    train_ex = _examples(config.train, direction, config.n_permutations, config.seed, cfg)
    val_ex = _examples(config.val, direction, 1, config.seed, cfg)
    for ex in train_ex + val_ex:
        ex.ctx = policy.context(ex.input)

    rng = np.random.default_rng(config.seed)
    sample_rng = np.random.default_rng([config.seed, 1])
    report = TrainingReport(config.seed, direction.value, [[m.value, w] for m, w in config.spec.components])

    ce_pairs = [(ex, t) for ex in train_ex for t in ex.targets]
    best_theta, best_key = None, None
    for epoch in range(1, config.ce_epochs + 1):
        total = 0.0
        for idx in rng.permutation(len(ce_pairs)):
            ex, target = ce_pairs[idx]
            loss, grad = ce_loss_and_grad(policy, ex.input, target)
            policy.theta[grad.rows] -= config.ce_lr * grad.values
            total += loss
        val_reward, sel = evaluate(policy, val_ex, config.spec, config.max_len, cfg)
        rec = EpochRecord("CE", epoch, total / len(ce_pairs), val_reward, config.seed, sel)
        report.epochs.append(rec)
        key = _selection_key(rec, direction)
        if best_key is None or key > best_key:
            best_key, best_theta, report.best_ce_epoch = key, policy.theta.copy(), epoch
    policy.theta = best_theta

    # rewards are pure functions of (hypothesis, references): memoize per example
    memo: dict[tuple, float] = {}

    def reward(idx: int, seq) -> float:
        key = (idx, tuple(seq))
        r = memo.get(key)
        if r is None:
            r = memo[key] = compute_reward(seq, train_ex[idx].references, config.spec, cfg)
        return r

    best_scst = None
    for epoch in range(1, config.scst_epochs + 1):
        order = rng.permutation(len(train_ex))
        if config.scst_items_per_epoch is not None:
            order = order[: config.scst_items_per_epoch]
        surrogate = r_sampled = r_greedy = 0.0
        for start in range(0, len(order), config.batch_size):
            idxs = [int(i) for i in order[start:start + config.batch_size]]
            chunk = [train_ex[i] for i in idxs]
            items, advs = [], []
            for idx, ex in zip(idxs, chunk):
                greedy, _ = generate(policy, ex.input, "greedy", max_len=config.max_len, ctx=ex.ctx)
                sampled, logps = generate(policy, ex.input, "sample", sample_rng, config.max_len, ctx=ex.ctx)
                item = ScstItem(sampled, greedy, ex.references, logps)
                rs = reward(idx, sampled)
                rg = rs if item.identical else reward(idx, greedy)
                adv = 0.0 if item.identical else rs - rg
                items.append(item)
                advs.append(adv)
                surrogate -= adv * sum(logps)
                r_sampled += rs
                r_greedy += rg
            grad = scst_loss_grad(policy, items, advs, [ex.input for ex in chunk], [ex.ctx for ex in chunk])
            if len(grad.rows):
                policy.theta[grad.rows] -= config.scst_lr * grad.values
        n = max(len(order), 1)
        val_reward, sel = evaluate(policy, val_ex, config.spec, config.max_len, cfg)
        report.epochs.append(
            EpochRecord("SCST", epoch, surrogate / n, val_reward, config.seed, sel, r_sampled / n, r_greedy / n)
        )
        if best_scst is None or val_reward > best_scst:
            best_scst, report.best_scst_epoch = val_reward, epoch
    return report, policy
