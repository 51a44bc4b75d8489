"""``kgtext`` command line.

Exit status is 0 on success, 1 on usage errors and 2 on data errors. Results
go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import contextmanager
from typing import Sequence

import numpy as np

from .codec import CapacityExceeded, DEFAULT_CONFIG, Direction, augment_shuffle, delinearize, linearize, prefix_task
from .graph_metrics import score_corpus
from .ingest import (
    LookupTableError,
    ParseError,
    PropertyLookup,
    TekgenRecord,
    dump_record,
    iter_records,
    read_samples,
    sample_to_record,
    tekgen_to_samples,
    write_samples,
)
from .model import KnowledgeGraph, Sample
from .scst.rewards import IncompatibleSpec, RewardSpec
from .text_metrics import ScoredPair, score_text


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _u64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _int_at_least(low: int):
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
        if value < low:
            raise argparse.ArgumentTypeError(f"must be >= {low}")
        return value

    return parse


_positive = _int_at_least(1)


@contextmanager
def _open_in(path: str | None):
    if path in (None, "-"):
        yield sys.stdin.buffer
        return
    try:
        fh = open(path, "rb")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc.strerror}") from None
    with fh:
        yield fh


@contextmanager
def _open_out(path: str | None):
    if path in (None, "-"):
        yield sys.stdout
        sys.stdout.flush()
        return
    try:
        fh = open(path, "w", encoding="utf-8", newline="\n")
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc.strerror}") from None
    with fh:
        yield fh


def _read_samples(path: str | None) -> list[Sample]:
    with _open_in(path) as fh:
        try:
            return read_samples(fh)
        except ParseError as exc:
            raise DataError(f"{path or '<stdin>'}: {exc}") from None


def _read_lines(path: str) -> list[str]:
    with _open_in(path) as fh:
        try:
            return [line.rstrip("\r\n") for line in fh.read().decode("utf-8").splitlines()]
        except UnicodeDecodeError as exc:
            raise DataError(f"{path}: invalid UTF-8 at byte {exc.start}") from None


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True, ensure_ascii=False) + "\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_linearize(args) -> None:
    direction = Direction(args.prefix) if args.prefix else None
    for s in _read_samples(args.input):
        try:
            tokens = linearize(s.graph, DEFAULT_CONFIG)
        except (CapacityExceeded, ValueError) as exc:
            raise DataError(f"sample {s.id}: {exc}") from None
        if direction is not None:
            tokens = prefix_task(tokens, direction)
        _emit({"id": s.id, "sequence": " ".join(tokens)})


def cmd_delinearize(args) -> None:
    for line in _read_lines(args.input):
        if not line.strip():
            continue
        tokens = line.split()
        report = delinearize(tokens, DEFAULT_CONFIG)
        _emit(
            {
                "triples": report.graph.to_lists(),
                "dropped": [" ".join(tokens[a:b]) for a, b in report.dropped_fragments],
                "well_formed": report.well_formed,
            }
        )


def cmd_score_text(args) -> None:
    hyps = _read_lines(args.hyp)
    ref_sets = [_read_lines(p) for p in args.ref]
    for path, refs in zip(args.ref, ref_sets):
        if len(refs) != len(hyps):
            raise DataError(f"{path}: {len(refs)} lines but {len(hyps)} hypotheses")
    if not hyps:
        raise DataError("no hypotheses to score")
    pairs = [ScoredPair(h, tuple(rs[i] for rs in ref_sets)) for i, h in enumerate(hyps)]
    report = score_text(pairs)
    _emit({k: getattr(report, k) for k in ("bleu", "bleu_smoothed", "chrf_pp", "meteor_lite")})


def cmd_score_graph(args) -> None:
    cands, refs = _read_samples(args.cand), _read_samples(args.ref)
    if len(cands) != len(refs):
        raise DataError(f"{len(cands)} candidate records but {len(refs)} reference records")
    for c, r in zip(cands, refs):
        if c.id != r.id:
            raise DataError(f"record ids differ: {c.id!r} vs {r.id!r}")
    report = score_corpus([c.graph for c in cands], [r.graph for r in refs], macro=args.macro,
                          realign_per_mode=args.realign_per_mode)
    _emit(report.as_dict())


def cmd_augment(args) -> None:
    samples = _read_samples(args.input)
    for i, s in enumerate(samples):
        if not len(s.graph):
            raise DataError(f"sample {s.id} has an empty graph")
        # one independent stream per sample, derived from the global seed
        seed = int(_sample_seed(args.seed, i))
        for j, g in enumerate(augment_shuffle(s.graph, args.n_permutations, seed)):
            rec = sample_to_record(Sample(s.id if j == 0 else f"{s.id}#{j}", s.text, g, s.category))
            sys.stdout.write(dump_record(rec) + "\n")


def _sample_seed(seed: int, index: int) -> int:
    return np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)[0]


def cmd_ingest_tekgen(args) -> None:
    try:
        lookup = PropertyLookup.from_tsv(args.lookup)
    except OSError as exc:
        raise DataError(f"cannot read {args.lookup}: {exc.strerror}") from None
    except LookupTableError as exc:
        raise DataError(f"{args.lookup}: {exc}") from None
    records = []
    with _open_in(args.input) as fh:
        try:
            for lineno, start, obj in iter_records(fh):
                try:
                    records.append(TekgenRecord.from_mapping(obj if isinstance(obj, dict) else {}))
                except ValueError as exc:
                    raise ParseError(str(exc), lineno, start) from None
        except ParseError as exc:
            raise DataError(f"{args.input or '<stdin>'}: {exc}") from None
    rejects: list = []
    samples = tekgen_to_samples(records, lookup, rejects)
    with _open_out(args.output) as out:
        write_samples(samples, out)
    if args.rejects:
        with _open_out(args.rejects) as out:
            for rec in rejects:
                out.write(dump_record(rec) + "\n")
    print(f"{len(samples)} samples, {len(rejects)} rejects", file=sys.stderr)


def cmd_scst_demo(args) -> None:
    from .scst import TrainConfig, toy_task_generate, train

    direction = Direction(args.direction)
    default = "bleu_smoothed" if direction is Direction.G2T else "f1_exact"
    try:
        spec = RewardSpec.parse(args.spec or [default], direction)
    except IncompatibleSpec as exc:
        raise UsageError(f"--spec: {exc}") from None
    data = toy_task_generate(args.train_size + args.val_size, args.seed)
    config = TrainConfig(
        data[: args.train_size],
        data[args.train_size:],
        spec,
        ce_epochs=args.ce_epochs,
        scst_epochs=args.scst_epochs,
        ce_lr=args.ce_lr,
        scst_lr=args.scst_lr,
        seed=args.seed,
        n_permutations=args.n_permutations,
    )
    report, _ = train(config)
    with _open_out(args.output) as out:
        for line in report.to_lines():
            out.write(line + "\n")


def cmd_reward_serve(args) -> None:
    from .server import serve_rewards

    serve_rewards("stdio" if args.port is None else args.port, args.host)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="kgtext", description="Knowledge-graph/text linearization, metrics and SCST tools.")
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("linearize", help="interchange records -> marker sequences")
    s.add_argument("--input", help="interchange file (default stdin)")
    s.add_argument("--prefix", choices=[d.value for d in Direction], help="prepend a task prefix")
    s.set_defaults(func=cmd_linearize)

    s = sub.add_parser("delinearize", help="marker sequences (one per line) -> triples")
    s.add_argument("--input", help="text file (default stdin)")
    s.set_defaults(func=cmd_delinearize)

    s = sub.add_parser("score-text", help="BLEU, smoothed BLEU, chrF++ and METEOR-lite")
    s.add_argument("--hyp", required=True, help="one hypothesis per line")
    s.add_argument("--ref", required=True, action="append", help="one reference per line (repeatable)")
    s.set_defaults(func=cmd_score_text)

    s = sub.add_parser("score-graph", help="precision/recall/F1 in the four match modes")
    s.add_argument("--cand", required=True, help="candidate interchange file")
    s.add_argument("--ref", required=True, help="reference interchange file")
    s.add_argument("--macro", action="store_true", help="macro-average over records")
    s.add_argument("--realign-per-mode", action="store_true", help="solve a separate alignment per mode")
    s.set_defaults(func=cmd_score_graph)

    s = sub.add_parser("augment", help="seeded triple-order shuffles")
    s.add_argument("--input", help="interchange file (default stdin)")
    s.add_argument("--n-permutations", type=_positive, default=3)
    s.add_argument("--seed", type=_u64, default=0)
    s.set_defaults(func=cmd_augment)

    s = sub.add_parser("ingest-tekgen", help="flat TekGen records -> interchange samples")
    s.add_argument("--input", help="records with subject, flat, sentence (default stdin)")
    s.add_argument("--lookup", required=True, help="property lookup TSV")
    s.add_argument("--output", help="samples file (default stdout)")
    s.add_argument("--rejects", help="where to write rejected records")
    s.set_defaults(func=cmd_ingest_tekgen)

    s = sub.add_parser("scst-demo", help="CE then SCST on the toy task; writes a JSONL training report")
    s.add_argument("--direction", choices=[d.value for d in Direction], default="g2t")
    s.add_argument("--spec", action="append", metavar="METRIC=WEIGHT")
    s.add_argument("--seed", type=_u64, default=0)
    s.add_argument("--n-permutations", type=_positive, default=1)
    s.add_argument("--ce-epochs", type=_positive, default=30)
    s.add_argument("--scst-epochs", type=_int_at_least(0), default=30)
    s.add_argument("--ce-lr", type=float, default=0.1)
    s.add_argument("--scst-lr", type=float, default=0.01)
    s.add_argument("--train-size", type=_positive, default=2000)
    s.add_argument("--val-size", type=_positive, default=200)
    s.add_argument("--output", help="report file (default stdout)")
    s.set_defaults(func=cmd_scst_demo)

    s = sub.add_parser("reward-serve", help="newline-delimited JSON reward server")
    s.add_argument("--port", type=int, help="listen on TCP (default: serve stdin/stdout)")
    s.add_argument("--host", default="127.0.0.1")
    s.set_defaults(func=cmd_reward_serve)
    return p


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"kgtext: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
