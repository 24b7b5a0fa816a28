"""Command-line entry point.

Subcommands: ``prep`` (vocabulary from a corpus), ``train`` (bidirectional
model), ``train-ngram``, ``train-rnnlm``, ``suggest`` (one marked
sentence), ``eval`` (testset MRR report), ``serve`` (HTTP service).

Exit codes: 0 success, 1 usage error, 2 data/model error.  All randomness
flows from ``--seed``; identical flags and seed reproduce artifacts
bitwise.  ``WORDCHOICE_LOG`` sets the log level (default INFO, so the
effective configuration is echoed at startup).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import re
import sys
from typing import Sequence

from .baselines.ngram import NGramTable, ngram_train
from .baselines.rnnlm import LEFT_TO_RIGHT, RIGHT_TO_LEFT, RnnLm
from .checkpoint import CheckpointError, read_blwc
from .corpus import (
    SentenceTooLongError,
    Vocabulary,
    build_vocab,
    encode,
    make_batches,
    read_corpus,
    tokenize,
)
from .evaluation import evaluate, load_testset, make_model_pipeline, make_ngram_pipeline
from .model import BiLstmModel, Hyperparams
from .posfilter import Lexicon, filter_candidates

logger = logging.getLogger("wordchoice")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems with exit code 1."""

    def error(self, message):
        raise UsageError(message)


def _add_hyper_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--embed-dim", type=int, default=200)
    p.add_argument("--hidden", type=int, default=200)
    p.add_argument("--batch-size", type=int, default=100)
    p.add_argument("--max-len", type=int, default=40)
    p.add_argument("--vocab", type=int, default=30000, help="vocabulary cap")
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--clip", type=float, default=5.0,
                   help="global gradient-norm clip; <= 0 disables")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads where work is case-parallel (eval); "
                        "training always runs single-threaded so updates are "
                        "bitwise reproducible")
    p.add_argument("--coupled-gates", action="store_true",
                   help="tie the forget gate to 1 - input gate")


def _hyper_from_args(args) -> Hyperparams:
    return Hyperparams(
        embed_dim=args.embed_dim,
        hidden=args.hidden,
        context_dim=2 * args.hidden,
        vocab_cap=args.vocab,
        max_len=args.max_len,
        batch_size=args.batch_size,
        lr=args.lr,
        clip=args.clip if args.clip > 0 else None,
        epochs=args.epochs,
        seed=args.seed,
        coupled_gates=args.coupled_gates,
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="wordchoice", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prep", help="build a vocabulary file from a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--vocab-out", required=True)
    p.add_argument("--vocab", type=int, default=30000)
    p.add_argument("--max-len", type=int, default=40)

    p = sub.add_parser("train", help="train the bidirectional model")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--vocab-file", help="reuse a prepared vocabulary file")
    _add_hyper_flags(p)

    p = sub.add_parser("train-ngram", help="train the Kneser-Ney baseline")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--order", type=int, default=5)
    p.add_argument("--max-len", type=int, default=40)

    p = sub.add_parser("train-rnnlm", help="train a unidirectional LM baseline")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--direction", choices=[LEFT_TO_RIGHT, RIGHT_TO_LEFT], required=True)
    p.add_argument("--vocab-file")
    _add_hyper_flags(p)

    p = sub.add_parser("suggest", help="rank replacements for the *marked* word")
    p.add_argument("--model", required=True)
    p.add_argument("--lexicon")
    p.add_argument("--k", type=int, default=100)
    p.add_argument("sentence", help="sentence with the target as *word*")

    p = sub.add_parser("eval", help="strict-MRR report over a JSONL test set")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--model", help="bidirectional or RNNLM checkpoint")
    src.add_argument("--ngram", help="n-gram table file")
    p.add_argument("--testset", required=True)
    p.add_argument("--lexicon")
    p.add_argument("--k", type=int, default=100)
    p.add_argument("--max-len", type=int, default=40)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--json-out", help="also write the JSON report to a file")

    p = sub.add_parser("serve", help="HTTP suggestion service")
    p.add_argument("--addr", default="127.0.0.1:8080")
    p.add_argument("--model", required=True)
    p.add_argument("--lexicon")
    p.add_argument("--static", help="directory with the browser editor bundle")

    return parser


def _echo_config(args: argparse.Namespace) -> None:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k != "command"}
    logger.info("command %s, effective config: %s", args.command,
                json.dumps(cfg, default=str, sort_keys=True))


def _load_filtered(path: str, max_len: int) -> tuple[list[list[str]], int]:
    kept, skipped = [], 0
    for tokens in read_corpus(path):
        if not tokens:
            continue
        if len(tokens) > max_len:
            skipped += 1
            continue
        kept.append(tokens)
    return kept, skipped


def load_any_model(path: str):
    """Dispatch a checkpoint to the right loader by its header kind."""
    header, _ = read_blwc(path)
    kind = header.get("kind")
    if kind == "bilstm":
        return BiLstmModel.load(path)
    if kind == "rnnlm":
        return RnnLm.load(path)
    raise CheckpointError(f"unknown checkpoint kind {kind!r}")


_MARK_RE = re.compile(r"\*([^*]+)\*")


def parse_marked_sentence(text: str) -> tuple[list[str], int]:
    """Tokenize a sentence whose target is written ``*word*``.

    Exactly one marked token is required; the mark may carry surrounding
    punctuation (``*indicate*,``).
    """
    tokens: list[str] = []
    target_index = None
    n_marks = 0
    for piece in text.split():
        m = _MARK_RE.search(piece)
        if m:
            n_marks += 1
            tokens.extend(tokenize(piece[:m.start()]))
            inner = tokenize(m.group(1))
            if len(inner) != 1:
                raise UsageError(f"marked target {m.group(1)!r} must be a single token")
            target_index = len(tokens)
            tokens.append(inner[0])
            tokens.extend(tokenize(piece[m.end():]))
        else:
            tokens.extend(tokenize(piece))
    if n_marks != 1:
        raise UsageError(f"expected exactly one *marked* word, found {n_marks}")
    assert target_index is not None
    return tokens, target_index


# -- subcommand bodies ---------------------------------------------------------

def _cmd_prep(args) -> int:
    sentences, skipped = _load_filtered(args.corpus, args.max_len)
    vocab = build_vocab(sentences, args.vocab)
    vocab.save(args.vocab_out)
    n_tokens = sum(len(s) for s in sentences)
    print(json.dumps({
        "sentences": len(sentences), "skipped_overlength": skipped,
        "tokens": n_tokens, "vocab_size": vocab.size,
    }))
    return 0


def _prepare_batches(args, hyper: Hyperparams):
    sentences, skipped = _load_filtered(args.corpus, hyper.max_len)
    if skipped:
        logger.info("skipped %d over-length sentences", skipped)
    if args.vocab_file:
        vocab = Vocabulary.load(args.vocab_file)
    else:
        vocab = build_vocab(sentences, hyper.vocab_cap)
    encoded = [encode(s, vocab, hyper.max_len) for s in sentences]
    batches = make_batches(encoded, hyper.batch_size, hyper.seed)
    return vocab, batches


def _cmd_train(args) -> int:
    hyper = _hyper_from_args(args)
    vocab, batches = _prepare_batches(args, hyper)
    model = BiLstmModel.init(vocab, hyper, name=os.path.basename(args.out))
    log = model.train(batches)
    model.save(args.out)
    print(json.dumps({"checkpoint": args.out, "vocab_size": vocab.size,
                      "epoch_mean_loss": log}))
    return 0


def _cmd_train_ngram(args) -> int:
    sentences, skipped = _load_filtered(args.corpus, args.max_len)
    if skipped:
        logger.info("skipped %d over-length sentences", skipped)
    table = ngram_train(sentences, args.order)
    table.save(args.out)
    print(json.dumps({"table": args.out, "order": table.order,
                      "vocab_size": len(table.vocab_words)}))
    return 0


def _cmd_train_rnnlm(args) -> int:
    hyper = _hyper_from_args(args)
    vocab, batches = _prepare_batches(args, hyper)
    model = RnnLm.init(args.direction, vocab, hyper, name=os.path.basename(args.out))
    log = model.train(batches)
    model.save(args.out)
    print(json.dumps({"checkpoint": args.out, "direction": args.direction,
                      "epoch_mean_loss": log}))
    return 0


def _cmd_suggest(args) -> int:
    model = load_any_model(args.model)
    tokens, target_index = parse_marked_sentence(args.sentence)
    sent = encode([t.lower() for t in tokens], model.vocab, model.hyper.max_len)
    rank_fn = getattr(model, "suggest", None) or model.rank
    raw = rank_fn(sent, target_index + 1, max(args.k, 100))
    if args.lexicon:
        result = filter_candidates(Lexicon.load(args.lexicon), tokens[target_index], raw)
        if result.bypassed:
            logger.info("original word %r has no lexicon entry; POS filter bypassed",
                        tokens[target_index])
        raw = result.suggestions
    for rank, s in enumerate(raw[:args.k], start=1):
        print(f"{rank} {s.word} {s.score:.6f}")
    return 0


def _cmd_eval(args) -> int:
    cases = load_testset(args.testset)
    lexicon = Lexicon.load(args.lexicon) if args.lexicon else None
    if args.model:
        model = load_any_model(args.model)
        pipeline = make_model_pipeline(model, lexicon, args.k)
    else:
        table = NGramTable.load(args.ngram)
        pipeline = make_ngram_pipeline(table, lexicon, args.k, args.max_len)
    report = evaluate(pipeline, cases, threads=args.threads)
    blob = json.dumps(report.to_json_dict(), indent=2, sort_keys=True)
    print(blob)
    print(report.to_table(), file=sys.stderr)
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as fh:
            fh.write(blob + "\n")
    return 0


def _cmd_serve(args) -> int:
    from .service import SuggestService, serve_forever

    model = load_any_model(args.model)
    lexicon = Lexicon.load(args.lexicon) if args.lexicon else None
    service = SuggestService(model=model, lexicon=lexicon, static_dir=args.static)
    host, _, port = args.addr.rpartition(":")
    serve_forever(service, host or "127.0.0.1", int(port))
    return 0


_COMMANDS = {
    "prep": _cmd_prep,
    "train": _cmd_train,
    "train-ngram": _cmd_train_ngram,
    "train-rnnlm": _cmd_train_rnnlm,
    "suggest": _cmd_suggest,
    "eval": _cmd_eval,
    "serve": _cmd_serve,
}


def run(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("WORDCHOICE_LOG", "INFO").upper(),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _echo_config(args)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except (OSError, ValueError, CheckpointError, SentenceTooLongError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
