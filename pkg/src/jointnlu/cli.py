"""Command-line surface: train, evaluate, predict, gradcheck, data-stats.

Exit codes: 0 success, 1 check or metric failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys

from . import corpus as corpus_mod
from . import models
from .config import ConfigError, apply_overrides, load_config
from .embeddings import load_vectors
from .evaluation import evaluate_predictions
from .models.base import DivergenceError
from .models.gradcheck import gradcheck_model

log = logging.getLogger("jointnlu")

USAGE_ERROR = 2
CHECK_FAILURE = 1


class UsageError(SystemExit):
    def __init__(self, message):
        print(f"error: {message}", file=sys.stderr)
        super().__init__(USAGE_ERROR)


def _require_file(path, what):
    if path is None or not os.path.exists(path):
        raise UsageError(f"{what} not found: {path}")
    return path


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _load_corpus(path, language):
    return corpus_mod.parse_corpus(_require_file(path, "corpus"), language=language)


def _build_model(args):
    overrides = {}
    if args.config:
        overrides = load_config(_require_file(args.config, "config file"),
                                model_kind=args.model)
    if args.seed is not None:
        overrides["seed"] = args.seed
    model = models.make_model(args.model)
    apply_overrides(model, overrides)
    if args.embeddings:
        table = load_vectors(_require_file(args.embeddings, "embeddings file"),
                             format=args.embeddings_format)
        model.set_params(embeddings=table)
    return model


def cmd_train(args):
    model = _build_model(args)
    train = _load_corpus(args.corpus, args.language)
    dev = _load_corpus(args.dev, args.language) if args.dev else None
    try:
        if dev is not None:
            model.fit(train, dev=dev)
        else:
            model.fit(train)
    except DivergenceError as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return CHECK_FAILURE
    os.makedirs(args.out, exist_ok=True)
    ckpt_dir = os.path.join(args.out, "checkpoint")
    model.save(ckpt_dir)
    manifest = {
        "model": args.model,
        "seed": model.seed,
        "config": model._config_dict(),
        "corpus": {"path": args.corpus, "sha256": _sha256(args.corpus)},
    }
    if args.dev:
        manifest["dev_corpus"] = {"path": args.dev, "sha256": _sha256(args.dev)}
    with open(os.path.join(args.out, "run.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    history = getattr(model, "history_", [])
    with open(os.path.join(args.out, "epochs.log"), "w", encoding="utf-8") as fh:
        for entry in history:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")
    print(f"checkpoint written to {ckpt_dir}")
    return 0


def _predictions(model, corpus):
    if isinstance(model, models.SvmIntentClassifier):
        intents = model.predict([s.tokens for s in corpus.sentences])
        tags = [list(s.tags) for s in corpus.sentences]  # intent-only model
        return tags, intents
    pairs = model.predict([s.tokens for s in corpus.sentences])
    tags = [list(t) for t, _ in pairs]
    intents = [i for _, i in pairs]
    return tags, intents


def _check_vocab(model, corpus):
    tag_vocab = getattr(model, "tag_vocab_", None)
    if tag_vocab is not None:
        unseen = {t for s in corpus for t in s.tags} - set(tag_vocab.labels)
        if unseen:
            raise UsageError(f"corpus tags not in checkpoint label set: {sorted(unseen)}")
    intent_vocab = getattr(model, "intent_vocab_", None)
    if intent_vocab is not None:
        unseen = {s.intent_key for s in corpus} - set(intent_vocab.labels)
        if unseen:
            raise UsageError(
                f"corpus intents not in checkpoint label set: {sorted(unseen)}")


def cmd_evaluate(args):
    model = models.load_model(_require_file(args.checkpoint, "checkpoint"))
    corpus = _load_corpus(args.corpus, args.language)
    _check_vocab(model, corpus)
    tags, intents = _predictions(model, corpus)
    if intents and intents[0] is None:
        intents = [next(iter(s.intents)) for s in corpus.sentences]  # NER-only model
    report = evaluate_predictions(corpus.sentences, tags, intents)
    text = report.to_text()
    print(text, end="")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "metrics.txt"), "w", encoding="utf-8") as fh:
            fh.write(text)
        with open(os.path.join(args.out, "metrics.json"), "w", encoding="utf-8") as fh:
            fh.write(report.to_json() + "\n")
    return 0


def _input_sentences(args):
    if args.text is not None:
        lines = [args.text]
    else:
        with open(_require_file(args.input, "input file"), encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    for line in lines:
        tokens = line.split()
        if not tokens:
            log.warning("skipping empty input line")
            continue
        yield tokens


def cmd_predict(args):
    model = models.load_model(_require_file(args.checkpoint, "checkpoint"))
    language = args.language
    for tokens in _input_sentences(args):
        if language:
            tokens = [corpus_mod.normalize(t, language) for t in tokens]
        if isinstance(model, models.SvmIntentClassifier):
            intent = model.predict([tokens])[0]
            tags = ["O"] * len(tokens)
        else:
            tags, intent = model.predict([tokens])[0]
        if intent is None:
            intent = "unknown"
        sent = corpus_mod.TaggedSentence(tuple(tokens), tuple(tags),
                                         frozenset(intent.split("#")))
        print(corpus_mod.format_sentence(sent))
    return 0


def cmd_gradcheck(args):
    kinds = [args.model] if args.model else sorted(models.MODEL_KINDS)
    all_ok = True
    for kind in kinds:
        report = gradcheck_model(kind, seed=args.seed if args.seed is not None else 0)
        status = "PASS" if report.passed else "FAIL"
        print(f"{kind}: max relative error {report.max_error:.3e} [{status}]")
        for name, err in sorted(report.errors.items()):
            print(f"  {name}: {err:.3e}")
        all_ok = all_ok and report.passed
    return 0 if all_ok else CHECK_FAILURE


def cmd_data_stats(args):
    corpus = _load_corpus(args.corpus, args.language)
    lengths = [len(s.tokens) for s in corpus.sentences]
    spans = sum(len(corpus_mod.extract_spans(s.tags)) for s in corpus.sentences)
    print(f"sentences: {len(corpus)}")
    print(f"tokens: {sum(lengths)}")
    print(f"max_length: {max(lengths) if lengths else 0}")
    print(f"tag_labels: {len(corpus.tag_vocab)}")
    print(f"intent_labels: {len(corpus.intent_vocab)}")
    print(f"entity_spans: {spans}")
    print(f"distinct_words: {len(corpus.word_list())}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="jointnlu",
        description="Joint NER (slot filling) and intent classification engine")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="train a model and write a checkpoint")
    train.add_argument("--model", required=True, choices=sorted(models.MODEL_KINDS))
    train.add_argument("--corpus", required=True)
    train.add_argument("--dev")
    train.add_argument("--config")
    train.add_argument("--seed", type=int)
    train.add_argument("--out", required=True)
    train.add_argument("--embeddings")
    train.add_argument("--embeddings-format", default="word2vec-text",
                       choices=["word2vec-text", "glove-text"])
    train.add_argument("--language", choices=["en", "el"])
    train.set_defaults(func=cmd_train)

    ev = sub.add_parser("evaluate", help="score a checkpoint on a corpus")
    ev.add_argument("--checkpoint", required=True)
    ev.add_argument("--corpus", required=True)
    ev.add_argument("--out")
    ev.add_argument("--language", choices=["en", "el"])
    ev.set_defaults(func=cmd_evaluate)

    pred = sub.add_parser("predict", help="tag raw token sequences")
    pred.add_argument("--checkpoint", required=True)
    group = pred.add_mutually_exclusive_group(required=True)
    group.add_argument("--text")
    group.add_argument("--input")
    pred.add_argument("--language", choices=["en", "el"])
    pred.set_defaults(func=cmd_predict)

    gc = sub.add_parser("gradcheck", help="finite-difference check of backward passes")
    gc.add_argument("--model", choices=sorted(models.MODEL_KINDS))
    gc.add_argument("--seed", type=int)
    gc.set_defaults(func=cmd_gradcheck)

    stats = sub.add_parser("data-stats", help="summarize a corpus file")
    stats.add_argument("--corpus", required=True)
    stats.add_argument("--language", choices=["en", "el"])
    stats.set_defaults(func=cmd_data_stats)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, corpus_mod.ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
