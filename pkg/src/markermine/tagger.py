"""Averaged-perceptron part-of-speech tagger.

Reimplements the standard averaged-perceptron recipe: greedy left-to-right
decoding, perceptron updates on mistakes, weights averaged over every
word-level step so the deployed model generalizes better than the final
raw weights.  Unambiguous frequent words bypass the model through a tag
dictionary.

The feature template is frozen (changing it invalidates saved models):
bias, current word, lowercased word, suffixes of length 1-3, first
character, previous tag, previous two tags, previous and next lowercased
words, and digit / hyphen / initial-uppercase indicators.

Its single downstream job here is recognizing adverbs and conjunctions at
the start of a second sentence, so the tagset only needs to be
Penn-Treebank-like, not a faithful reproduction of newswire tagging.
"""

from __future__ import annotations

import json
import random
import struct
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import FormatError, TrainingError

MODEL_MAGIC = b"DMPT"
MODEL_VERSION = 1

CANDIDATE_TAGS = frozenset({"RB", "RBR", "RBS", "CC"})

DICT_MIN_COUNT = 20
DICT_PURITY = 0.97

_START = "-START-"
_START2 = "-START2-"
_END = "-END-"


@dataclass(frozen=True)
class TaggedSentence:
    tokens: tuple[str, ...]
    tags: tuple[str, ...]

    def __post_init__(self):
        if len(self.tokens) != len(self.tags):
            raise ValueError("tokens and tags must have equal length")


@dataclass
class TaggerModel:
    weights: dict[str, dict[str, float]]
    tagset: list[str]
    tag_dictionary: dict[str, str]
    epochs: int
    seed: int
    dict_min_count: int = DICT_MIN_COUNT
    dict_purity: float = DICT_PURITY
    _tag_order: list[str] = field(init=False, repr=False)

    def __post_init__(self):
        bad = set(self.tag_dictionary.values()) - set(self.tagset)
        if bad:
            raise ValueError(f"tag dictionary values outside the tagset: {sorted(bad)}")
        self._tag_order = sorted(self.tagset)

    def save(self, path) -> None:
        save_tagger(self, path)

    @classmethod
    def load(cls, path) -> "TaggerModel":
        return load_tagger(path)


def is_candidate_pos(tag: str) -> bool:
    """True for the adverb and coordinating-conjunction tags."""
    return tag in CANDIDATE_TAGS


def _features(i: int, word: str, context: Sequence[str], prev: str, prev2: str) -> list[str]:
    lower = word.lower()
    prev_word = context[i - 1].lower() if i > 0 else _START
    next_word = context[i + 1].lower() if i + 1 < len(context) else _END
    feats = [
        "bias",
        "w=" + word,
        "lw=" + lower,
        "suf1=" + lower[-1:],
        "suf2=" + lower[-2:],
        "suf3=" + lower[-3:],
        "pre1=" + lower[:1],
        "t-1=" + prev,
        "t-2,t-1=" + prev2 + "," + prev,
        "lw-1=" + prev_word,
        "lw+1=" + next_word,
    ]
    if any(c.isdigit() for c in word):
        feats.append("has_digit")
    if "-" in word:
        feats.append("has_hyphen")
    if word[:1].isupper():
        feats.append("init_upper")
    return feats


def _best_tag(weights: dict[str, dict[str, float]], tag_order: Sequence[str], feats: Sequence[str]) -> str:
    scores = dict.fromkeys(tag_order, 0.0)
    for f in feats:
        per_tag = weights.get(f)
        if per_tag:
            for tag, w in per_tag.items():
                scores[tag] += w
    # highest score; exact ties go to the lexicographically smaller tag
    return min(tag_order, key=lambda t: (-scores[t], t))


def _build_tag_dictionary(
    sentences: Sequence[TaggedSentence], min_count: int, purity: float
) -> dict[str, str]:
    counts: dict[str, Counter] = defaultdict(Counter)
    for sent in sentences:
        for word, tag in zip(sent.tokens, sent.tags):
            counts[word.lower()][tag] += 1
    dictionary = {}
    for word, tag_counts in counts.items():
        total = sum(tag_counts.values())
        tag, freq = tag_counts.most_common(1)[0]
        if total >= min_count and freq / total >= purity:
            dictionary[word] = tag
    return dictionary


def train_tagger(
    corpus: Iterable[TaggedSentence],
    epochs: int = 5,
    seed: int = 0,
    dict_min_count: int = DICT_MIN_COUNT,
    dict_purity: float = DICT_PURITY,
) -> TaggerModel:
    """Train on a tagged corpus; sentences are reshuffled each epoch (seeded)."""
    if epochs < 1:
        raise ValueError(f"epochs must be >= 1, got {epochs}")
    sentences = list(corpus)
    if not sentences:
        raise TrainingError("training corpus is empty")
    tagset = sorted({t for s in sentences for t in s.tags})
    tag_dictionary = _build_tag_dictionary(sentences, dict_min_count, dict_purity)

    weights: dict[str, dict[str, float]] = defaultdict(dict)
    totals: dict[str, dict[str, float]] = defaultdict(lambda: defaultdict(float))
    stamps: dict[str, dict[str, int]] = defaultdict(lambda: defaultdict(int))
    tick = 0

    def bump(feat: str, tag: str, delta: float) -> None:
        w = weights[feat].get(tag, 0.0)
        totals[feat][tag] += (tick - stamps[feat][tag]) * w
        stamps[feat][tag] = tick
        weights[feat][tag] = w + delta

    rng = random.Random(seed)
    order = list(range(len(sentences)))
    for _ in range(epochs):
        rng.shuffle(order)
        for idx in order:
            sent = sentences[idx]
            prev, prev2 = _START, _START2
            for i, (word, gold) in enumerate(zip(sent.tokens, sent.tags)):
                tick += 1
                guess = tag_dictionary.get(word.lower())
                if guess is None:
                    feats = _features(i, word, sent.tokens, prev, prev2)
                    guess = _best_tag(weights, tagset, feats)
                    if guess != gold:
                        for f in feats:
                            bump(f, gold, +1.0)
                            bump(f, guess, -1.0)
                prev2, prev = prev, guess

    # deployed weight = mean over all ticks of the post-update weight value
    averaged: dict[str, dict[str, float]] = {}
    for feat, per_tag in weights.items():
        row = {}
        for tag, w in per_tag.items():
            total = totals[feat][tag] + (tick - stamps[feat][tag] + 1) * w
            value = total / tick
            if value:
                row[tag] = value
        if row:
            averaged[feat] = row

    return TaggerModel(
        weights=averaged,
        tagset=tagset,
        tag_dictionary=tag_dictionary,
        epochs=epochs,
        seed=seed,
        dict_min_count=dict_min_count,
        dict_purity=dict_purity,
    )


def tag(model: TaggerModel, tokens: Sequence[str]) -> list[str]:
    """Tag a token sequence; dictionary words bypass the model."""
    tags = []
    prev, prev2 = _START, _START2
    for i, word in enumerate(tokens):
        t = model.tag_dictionary.get(word.lower())
        if t is None:
            feats = _features(i, word, tokens, prev, prev2)
            t = _best_tag(model.weights, model._tag_order, feats)
        tags.append(t)
        prev2, prev = prev, t
    return tags


# ── tagged-corpus file ────────────────────────────────────────────────────────


def parse_tagged_sentence(line: str) -> TaggedSentence:
    """Parse one "word_TAG word_TAG ..." line; the last underscore separates."""
    tokens, tags = [], []
    for chunk in line.split():
        word, sep, t = chunk.rpartition("_")
        if not sep or not word or not t:
            raise FormatError(f"malformed word_TAG token: {chunk!r}")
        tokens.append(word)
        tags.append(t)
    return TaggedSentence(tuple(tokens), tuple(tags))


def load_tagged_corpus(path) -> list[TaggedSentence]:
    sentences = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                sentences.append(parse_tagged_sentence(line))
            except FormatError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from exc
    return sentences


# ── model file (DMPT) ─────────────────────────────────────────────────────────


def save_tagger(model: TaggerModel, path) -> None:
    """Write the DMPT container: JSON header then (feature, tag, f64) records."""
    header = json.dumps(
        {
            "tagset": model.tagset,
            "tag_dictionary": model.tag_dictionary,
            "epochs": model.epochs,
            "seed": model.seed,
            "dict_min_count": model.dict_min_count,
            "dict_purity": model.dict_purity,
        },
        sort_keys=True,
    ).encode("utf-8")
    records = [
        (feat, t, w)
        for feat, per_tag in model.weights.items()
        for t, w in per_tag.items()
    ]
    records.sort(key=lambda r: (r[0], r[1]))
    with open(path, "wb") as f:
        f.write(MODEL_MAGIC)
        f.write(struct.pack("<I", MODEL_VERSION))
        f.write(struct.pack("<I", len(header)))
        f.write(header)
        f.write(struct.pack("<Q", len(records)))
        for feat, t, w in records:
            fb = feat.encode("utf-8")
            tb = t.encode("utf-8")
            f.write(struct.pack("<HH", len(fb), len(tb)))
            f.write(fb)
            f.write(tb)
            f.write(struct.pack("<d", w))


def load_tagger(path) -> TaggerModel:
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != MODEL_MAGIC:
            raise FormatError(f"{path}: not a DMPT model file (magic {magic!r})")
        (version,) = struct.unpack("<I", f.read(4))
        if version != MODEL_VERSION:
            raise FormatError(f"{path}: unsupported DMPT version {version}")
        (hlen,) = struct.unpack("<I", f.read(4))
        header = json.loads(f.read(hlen).decode("utf-8"))
        (count,) = struct.unpack("<Q", f.read(8))
        weights: dict[str, dict[str, float]] = {}
        for _ in range(count):
            flen, tlen = struct.unpack("<HH", f.read(4))
            feat = f.read(flen).decode("utf-8")
            t = f.read(tlen).decode("utf-8")
            (w,) = struct.unpack("<d", f.read(8))
            weights.setdefault(feat, {})[t] = w
    return TaggerModel(
        weights=weights,
        tagset=list(header["tagset"]),
        tag_dictionary=dict(header["tag_dictionary"]),
        epochs=int(header["epochs"]),
        seed=int(header["seed"]),
        dict_min_count=int(header["dict_min_count"]),
        dict_purity=float(header["dict_purity"]),
    )
