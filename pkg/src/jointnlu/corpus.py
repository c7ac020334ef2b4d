"""IOB intent corpora: parsing, normalization, deduplication, splitting, and
typed-span extraction.

File format (UTF-8 plain text): sentences separated by one blank line; the
first line of each block is ``#intent=<label>[#<label>...]``; every following
line is ``<token><TAB><iob-tag>``.
"""

from __future__ import annotations

import logging
import random
import re
import unicodedata
from dataclasses import dataclass, field

log = logging.getLogger(__name__)

DEFAULT_TOKEN_CAP = 35

_TAG_RE = re.compile(r"^(O|[BI]-\S+)$")


class ParseError(ValueError):
    """Malformed corpus file; message carries the offending line number."""


@dataclass(frozen=True)
class Span:
    """A typed entity span with inclusive token indices."""
    start: int
    end: int
    etype: str


@dataclass(frozen=True)
class TaggedSentence:
    """Tokens with aligned IOB tags and one or more intent labels."""
    tokens: tuple
    tags: tuple
    intents: frozenset

    def __post_init__(self):
        if len(self.tokens) != len(self.tags) or not self.tokens:
            raise ValueError("tokens and tags must be non-empty and equal length")
        for t in self.tags:
            if not _TAG_RE.match(t):
                raise ValueError(f"malformed IOB tag {t!r}")
        if not self.intents:
            raise ValueError("sentence needs at least one intent")

    @property
    def intent_key(self):
        """Canonical composite intent string (sorted components joined by #)."""
        return "#".join(sorted(self.intents))


class LabelVocab:
    """Bijection between label strings and dense indices starting at 0."""

    def __init__(self, labels=()):
        self.labels = []
        self.index = {}
        for lab in labels:
            self.add(lab)

    def add(self, label):
        if label not in self.index:
            self.index[label] = len(self.labels)
            self.labels.append(label)
        return self.index[label]

    def __len__(self):
        return len(self.labels)

    def __contains__(self, label):
        return label in self.index

    def __getitem__(self, label):
        return self.index[label]

    def label(self, idx):
        return self.labels[idx]

    def __eq__(self, other):
        return isinstance(other, LabelVocab) and self.labels == other.labels


@dataclass
class Corpus:
    """An ordered collection of tagged sentences plus label vocabularies."""
    sentences: list = field(default_factory=list)
    tag_vocab: LabelVocab = field(default_factory=LabelVocab)
    intent_vocab: LabelVocab = field(default_factory=LabelVocab)

    def __len__(self):
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    def rebuild_vocabs(self):
        self.tag_vocab = LabelVocab()
        self.intent_vocab = LabelVocab()
        for s in self.sentences:
            for t in s.tags:
                self.tag_vocab.add(t)
            self.intent_vocab.add(s.intent_key)
        return self

    def word_list(self):
        seen = {}
        for s in self.sentences:
            for tok in s.tokens:
                seen.setdefault(tok, None)
        return list(seen)


def normalize(token, language="en"):
    """Normalize a surface token: lowercase for ``en``; lowercase plus
    combining-diacritic removal (NFD strip, recompose) for ``el``."""
    if not token:
        raise ValueError("empty token")
    lowered = token.lower()
    if language == "el":
        decomposed = unicodedata.normalize("NFD", lowered)
        stripped = "".join(c for c in decomposed if not unicodedata.combining(c))
        return unicodedata.normalize("NFC", stripped)
    if language == "en":
        return lowered
    raise ValueError(f"unsupported language {language!r}")


def parse_corpus(path, language=None, token_cap=DEFAULT_TOKEN_CAP):
    """Read a corpus file into a Corpus; see the module docstring for the
    format. ``language`` triggers token normalization at load time."""
    corpus = Corpus()
    tokens, tags, intents = [], [], None
    header_line = 0

    def flush(lineno):
        nonlocal tokens, tags, intents
        if intents is None and not tokens:
            return
        if intents is None:
            raise ParseError(f"line {lineno}: block without #intent= header")
        if not tokens:
            raise ParseError(f"line {header_line}: intent header without tokens")
        toks, tgs = tokens, tags
        if len(toks) > token_cap:
            log.warning("sentence at line %d truncated from %d to %d tokens",
                        header_line, len(toks), token_cap)
            toks, tgs = toks[:token_cap], tgs[:token_cap]
        try:
            corpus.sentences.append(
                TaggedSentence(tuple(toks), tuple(tgs), frozenset(intents)))
        except ValueError as exc:
            raise ParseError(f"line {header_line}: {exc}") from exc
        tokens, tags, intents = [], [], None

    with open(path, encoding="utf-8") as fh:
        lineno = 0
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                flush(lineno)
                continue
            if line.startswith("#intent="):
                if intents is not None:
                    raise ParseError(f"line {lineno}: duplicate intent header in block")
                intents = [x for x in line[len("#intent="):].split("#") if x]
                if not intents:
                    raise ParseError(f"line {lineno}: empty intent header")
                header_line = lineno
                continue
            if intents is None:
                raise ParseError(f"line {lineno}: token line before #intent= header")
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(f"line {lineno}: expected '<token>\\t<tag>', got {line!r}")
            token, tag = parts
            if not _TAG_RE.match(tag):
                raise ParseError(f"line {lineno}: malformed IOB tag {tag!r}")
            if language is not None:
                token = normalize(token, language)
            tokens.append(token)
            tags.append(tag)
        flush(lineno + 1)
    corpus.rebuild_vocabs()
    return corpus


def write_corpus(corpus, path):
    """Serialize back to the interchange format (inverse of parse_corpus)."""
    with open(path, "w", encoding="utf-8") as fh:
        for s in corpus:
            fh.write(format_sentence(s))
            fh.write("\n")


def format_sentence(sentence):
    lines = [f"#intent={sentence.intent_key}"]
    lines += [f"{tok}\t{tag}" for tok, tag in zip(sentence.tokens, sentence.tags)]
    return "\n".join(lines) + "\n"


def deduplicate(corpus):
    """Keep the first occurrence of each (tokens, tags, intents) triple."""
    seen = set()
    out = Corpus()
    for s in corpus:
        key = (s.tokens, s.tags, s.intents)
        if key in seen:
            continue
        seen.add(key)
        out.sentences.append(s)
    return out.rebuild_vocabs()


def split(corpus, test_fraction, seed):
    """Seeded uniform shuffle, then suffix of round(fraction*n) sentences
    becomes the test set. Both halves share vocabs built over the union."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    order = list(corpus.sentences)
    random.Random(seed).shuffle(order)
    n_test = round(test_fraction * len(order))
    train = Corpus(sentences=order[: len(order) - n_test])
    test = Corpus(sentences=order[len(order) - n_test:])
    shared_tags = LabelVocab()
    shared_intents = LabelVocab()
    for s in order:
        for t in s.tags:
            shared_tags.add(t)
        shared_intents.add(s.intent_key)
    for part in (train, test):
        part.tag_vocab = shared_tags
        part.intent_vocab = shared_intents
    return train, test


def extract_spans(tags):
    """Maximal typed spans from an IOB sequence.

    B-X opens a span; I-X extends a running span of the same type; an I-X
    with no compatible predecessor opens a new span (conlleval convention).
    """
    spans = set()
    start = None
    etype = None
    for i, tag in enumerate(tags):
        if tag == "O":
            if start is not None:
                spans.add(Span(start, i - 1, etype))
                start, etype = None, None
            continue
        prefix, _, name = tag.partition("-")
        if prefix == "B" or name != etype:
            if start is not None:
                spans.add(Span(start, i - 1, etype))
            start, etype = i, name
    if start is not None:
        spans.add(Span(start, len(tags) - 1, etype))
    return spans


def spans_to_iob(spans, length):
    """Emit an IOB sequence realizing the given non-overlapping spans."""
    tags = ["O"] * length
    for sp in sorted(spans, key=lambda s: s.start):
        tags[sp.start] = f"B-{sp.etype}"
        for i in range(sp.start + 1, sp.end + 1):
            tags[i] = f"I-{sp.etype}"
    return tags
