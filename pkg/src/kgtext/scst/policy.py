"""A tabular log-linear autoregressive policy used as a desk-scale stand-in for
a pretrained sequence-to-sequence model.

At each decoding step a handful of context features are hashed onto rows of
a dense logit table ``theta`` and the next-token logits are the sum of those
rows. Features combine the previous two output tokens, a progress bucket
(which input segment the output is currently aligned with), a bag-of-tokens
summary of the aligned input segments tagged with each token's role, and
copy pointers that propose whatever follows the last output tokens in the
input.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..codec import DEFAULT_CONFIG, LinearizationConfig, strip_task_prefix
from .rewards import EOS

BOS = "<bos>"
SEGMENT_OFFSETS = (-1, 0, 1)


class UnknownToken(KeyError):
    pass


@dataclass
class SparseGrad:
    """Gradient restricted to a few rows of ``theta``; ``rows`` are unique."""

    rows: np.ndarray
    values: np.ndarray

    @classmethod
    def coalesce(cls, rows: np.ndarray, values: np.ndarray) -> "SparseGrad":
        uniq, inverse = np.unique(rows, return_inverse=True)
        out = np.zeros((len(uniq), values.shape[1]))
        np.add.at(out, inverse, values)
        return cls(uniq, out)

    @classmethod
    def zeros(cls, n_tokens: int) -> "SparseGrad":
        return cls(np.zeros(0, dtype=np.int64), np.zeros((0, n_tokens)))

    @classmethod
    def sum(cls, grads: Sequence["SparseGrad"], weights: Sequence[float], n_tokens: int) -> "SparseGrad":
        parts = [(g.rows, w * g.values) for g, w in zip(grads, weights) if w != 0 and len(g.rows)]
        if not parts:
            return cls.zeros(n_tokens)
        return cls.coalesce(np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]))

    def to_dense(self, shape) -> np.ndarray:
        out = np.zeros(shape)
        out[self.rows] = self.values
        return out

    def is_zero(self) -> bool:
        return not np.any(self.values)


class InputContext:
    """Per-input precomputation: segments, output delimiter, feature cache."""

    def __init__(self, tokens: Sequence[str], cfg: LinearizationConfig):
        direction, body = strip_task_prefix(tokens, cfg)
        self.task = direction.value if direction is not None else "-"
        s_mark, p_mark, o_mark = cfg.markers
        segments: list[list[tuple[str, str]]] = []
        if s_mark in body:
            # graph input -> text output; an output segment ends with "."
            roles = {s_mark: "S", p_mark: "P", o_mark: "O"}
            role = None
            for tok in body:
                if tok in roles:
                    role = roles[tok]
                    if role == "S":
                        segments.append([])
                elif segments and role is not None:
                    segments[-1].append((role, tok))
            self.delimiter, self.offset, self.kind = ".", 0, "text"
        else:
            # text input -> graph output; an output segment starts with <S>
            current: list[str] = []
            for tok in body:
                current.append(tok)
                if tok == ".":
                    segments.append(self._text_roles(current))
                    current = []
            if current:
                segments.append(self._text_roles(current))
            self.delimiter, self.offset, self.kind = s_mark, -1, "graph"
        self.segments = segments
        # token -> [(role, role of the next token, next token, its successor)]
        self.follow: dict[str, list[tuple]] = {}
        for seg in segments:
            for i, (role, tok) in enumerate(seg):
                nxt = seg[i + 1] if i + 1 < len(seg) else ("$", "$")
                nxt2 = seg[i + 2] if i + 2 < len(seg) else ("$", "$")
                self.follow.setdefault(tok, []).append((role, nxt, nxt2))
        self._summary = {}
        self.cache: dict = {}

    @staticmethod
    def _text_roles(words: list[str]) -> list[tuple[str, str]]:
        content = [w for w in words if w != "."]
        out = []
        for i, w in enumerate(content):
            role = "F" if i == 0 else ("L" if i == len(content) - 1 else "M")
            out.append((role, w))
        return out

    def status(self, a: int) -> str:
        n = len(self.segments)
        if a < 0:
            return "pre"
        if a >= n:
            return "end"
        return "last" if a == n - 1 else "mid"

    def summary(self, a: int) -> list[tuple]:
        keys = self._summary.get(a)
        if keys is None:
            keys = []
            for d in SEGMENT_OFFSETS:
                j = a + d
                if 0 <= j < len(self.segments):
                    keys.extend(("al", d, role, tok) for role, tok in self.segments[j])
            self._summary[a] = keys
        return keys


class ToyPolicy:
    """Hashed tabular logits ``theta[row, token]``; see module docstring."""

    def __init__(
        self,
        vocabulary: Iterable[str],
        n_rows: int = 1 << 15,
        cfg: LinearizationConfig = DEFAULT_CONFIG,
        theta: np.ndarray | None = None,
    ):
        vocab = list(dict.fromkeys(vocabulary))
        if EOS not in vocab:
            vocab.append(EOS)
        self.vocabulary = vocab
        self.token_id = {t: i for i, t in enumerate(vocab)}
        self.eos_id = self.token_id[EOS]
        self.cfg = cfg
        self.n_rows = n_rows
        if theta is None:
            theta = np.zeros((n_rows, len(vocab)))
        if theta.shape != (n_rows, len(vocab)):
            raise ValueError(f"theta shape {theta.shape} does not match ({n_rows}, {len(vocab)})")
        self.theta = theta
        self._rows: dict[tuple, int] = {}

    @property
    def n_tokens(self) -> int:
        return len(self.vocabulary)

    def copy(self) -> "ToyPolicy":
        other = ToyPolicy(self.vocabulary, self.n_rows, self.cfg, self.theta.copy())
        other._rows = self._rows
        return other

    def row(self, key: tuple) -> int:
        r = self._rows.get(key)
        if r is None:
            digest = hashlib.blake2b(repr(key).encode(), digest_size=8).digest()
            r = int.from_bytes(digest, "little") % self.n_rows
            self._rows[key] = r
        return r

    def context(self, input_tokens: Sequence[str]) -> InputContext:
        return InputContext(input_tokens, self.cfg)

    def encode(self, tokens: Sequence[str]) -> list[int]:
        try:
            return [self.token_id[t] for t in tokens]
        except KeyError as exc:
            raise UnknownToken(f"token {exc.args[0]!r} is not in the vocabulary") from None

    def step_rows(self, ctx: InputContext, history: Sequence[str]) -> np.ndarray:
        """Feature rows active after ``history`` (output tokens so far)."""
        p1 = history[-1] if history else BOS
        p2 = history[-2] if len(history) > 1 else BOS
        k = 0
        for tok in history:
            if tok == ctx.delimiter:
                k += 1
        a = k + ctx.offset
        key = (a, p2, p1)
        cached = ctx.cache.get(key)
        if cached is not None:
            return cached
        status = ctx.status(a)
        p1_class = p1 if p1 in (BOS, ".") or p1 in self.cfg.markers else "w"
        feats = [
            ("lm", ctx.kind, p2, p1),
            ("pos", ctx.kind, ctx.task, status, p1),
            ("pos", ctx.kind, ctx.task, status, p1_class),
        ]
        feats.extend(s + (p1,) for s in ctx.summary(a))
        # copy pointers: wherever the last or second-to-last output token occurs
        # in the input, propose the input tokens that follow it
        for lag, tok in ((1, p1), (2, p2)):
            for role, nxt, nxt2 in ctx.follow.get(tok, ()):
                feats.append(("cp", ctx.kind, lag, role, nxt[0], nxt[1], p1_class))
                if lag == 2:
                    feats.append(("cp", ctx.kind, 3, role, nxt2[0], nxt2[1], p1_class))
        rows = np.fromiter((self.row(f) for f in feats), dtype=np.int64, count=len(feats))
        ctx.cache[key] = rows
        return rows

    def logits(self, rows: np.ndarray) -> np.ndarray:
        return self.theta[rows].sum(axis=0)

    def probs(self, input_tokens: Sequence[str], history: Sequence[str]) -> np.ndarray:
        ctx = self.context(input_tokens)
        return _softmax(self.logits(self.step_rows(ctx, history)))


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _log_softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def sequence_nll_grad(policy: ToyPolicy, input_tokens, target: Sequence[str], ctx: InputContext | None = None):
    """Teacher-forced ``-sum_t log p(target_t | ...)`` and its exact gradient."""
    ids = policy.encode(target)
    if not ids:
        return 0.0, SparseGrad.zeros(policy.n_tokens)
    ctx = ctx or policy.context(input_tokens)
    step_rows = [policy.step_rows(ctx, target[:t]) for t in range(len(ids))]
    lengths = np.array([len(r) for r in step_rows])
    flat = np.concatenate(step_rows)
    starts = np.concatenate(([0], np.cumsum(lengths)[:-1]))
    logits = np.add.reduceat(policy.theta[flat], starts, axis=0)
    logp = _log_softmax(logits)
    steps = np.arange(len(ids))
    nll = -float(logp[steps, ids].sum())
    dlogits = np.exp(logp)
    dlogits[steps, ids] -= 1.0
    grad = SparseGrad.coalesce(flat, np.repeat(dlogits, lengths, axis=0))
    return nll, grad


def ce_loss_and_grad(policy: ToyPolicy, input_tokens, target: Sequence[str], add_eos: bool = True):
    """Per-token averaged cross-entropy of ``target`` (plus end-of-sequence)."""
    target = list(target)
    if add_eos and (not target or target[-1] != EOS):
        target.append(EOS)
    nll, grad = sequence_nll_grad(policy, input_tokens, target)
    n = max(len(target), 1)
    grad.values /= n
    return nll / n, grad


def scst_loss_grad(policy: ToyPolicy, batch, advantages, inputs: Sequence[Sequence[str]], contexts=None) -> SparseGrad:
    """Gradient of ``-sum_i advantage_i * log p(sampled_i)``, re-scored under the current parameters.

    Items whose sampled and greedy sequences are token-identical are skipped,
    so their contribution is exactly zero.
    """
    if len(batch) != len(advantages) or len(batch) != len(inputs):
        raise ValueError("batch, advantages and inputs must be aligned")
    grads, weights = [], []
    for i, (item, adv) in enumerate(zip(batch, advantages)):
        a = adv.advantage if hasattr(adv, "advantage") else float(adv)
        if a == 0.0 or item.identical:
            continue
        ctx = contexts[i] if contexts is not None else None
        _, g = sequence_nll_grad(policy, inputs[i], item.sampled_sequence, ctx)
        # d(-log p)/dtheta is the nll gradient
        grads.append(g)
        weights.append(a)
    return SparseGrad.sum(grads, weights, policy.n_tokens)


def generate(
    policy: ToyPolicy,
    input_tokens,
    mode: str = "greedy",
    seed=None,
    max_len: int = 48,
    ctx: InputContext | None = None,
):
    """Decode until end-of-sequence (kept in the output) or ``max_len`` tokens.

    ``mode`` is ``"greedy"`` (argmax, lowest token id on ties) or
    ``"sample"`` (temperature-1 multinomial; ``seed`` is an int or a
    ``numpy.random.Generator``).
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    if mode not in ("greedy", "sample"):
        raise ValueError(f"unknown decoding mode {mode!r}")
    rng = None
    if mode == "sample":
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    ctx = ctx or policy.context(input_tokens)
    out: list[str] = []
    logps: list[float] = []
    vocab = policy.vocabulary
    for _ in range(max_len):
        z = policy.logits(policy.step_rows(ctx, out))
        z = z - z.max()
        e = np.exp(z)
        total = e.sum()
        if rng is None:
            tok = int(np.argmax(z))
        else:
            cdf = np.cumsum(e)
            tok = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
            tok = min(tok, len(vocab) - 1)
        logps.append(float(z[tok] - np.log(total)))
        out.append(vocab[tok])
        if tok == policy.eos_id:
            break
    return out, logps
