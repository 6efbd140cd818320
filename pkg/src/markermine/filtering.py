"""Sentence segmentation, word tokenization, and sentence-pair quality filters.

A pair survives when both sentences have an acceptable word count, look
English to the character-n-gram language model, have balanced parentheses
and quotes, and are mostly lowercase.  Each rejected pair carries exactly
one reason: the first failing check in the order the checks are listed.

The splitter is rule-based on purpose.  It splits at ., ! or ? followed by
whitespace and an uppercase letter or a quote, with an abbreviation
exception list, and it never splits inside a short balanced quotation.
Pipelines that cannot tolerate splitter drift can feed pre-segmented input
(one sentence per line) and skip it entirely.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .linclass import LinearModel, featurize, predict_proba

# Tokens whose trailing period does not end a sentence.  Lowercased;
# internal periods are part of the token ("e.g").  Forms that collide with
# frequent ordinary words ("no") are deliberately absent.
ABBREVIATIONS = frozenset(
    """
    mr mrs ms dr prof rev sr jr st mt ft gen col sgt capt lt
    vs etc al eg ie e.g i.e cf ca approx
    fig vol sec pp ed eds
    inc ltd co corp dept univ assn bros
    jan feb mar apr jun jul aug sep sept oct nov dec
    mon tue tues wed thu thurs fri sat sun
    """.split()
)

_QUOTE_PROTECT_MAX = 40
_TERMINALS = ".!?"
_OPENERS = "\"'“‘"


@dataclass(frozen=True)
class SentencePair:
    """Two consecutive sentences from a corpus stream."""

    s1: str
    s2: str
    source: str | None = None


class RejectionReason(enum.Enum):
    TOO_SHORT = "too_short"
    TOO_LONG = "too_long"
    NOT_ENGLISH = "not_english"
    UNBALANCED_DELIMITERS = "unbalanced_delimiters"
    NOT_LOWERCASE = "not_lowercase"
    MALFORMED = "malformed"


@dataclass(frozen=True)
class FilterConfig:
    min_words: int = 3
    max_words: int = 32
    english_threshold: float = 0.75
    lowercase_ratio: float = 0.9
    require_balanced: bool = True

    def __post_init__(self):
        if not 1 <= self.min_words <= self.max_words:
            raise ConfigError(
                f"need 1 <= min_words <= max_words, got {self.min_words}..{self.max_words}"
            )
        for name in ("english_threshold", "lowercase_ratio"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {v}")


def normalize_text(text: str) -> str:
    """Ingestion normalization: curly quotes to straight, tabs/newlines to spaces."""
    return (
        text.replace("“", '"')
        .replace("”", '"')
        .replace("„", '"')
        .replace("‘", "'")
        .replace("’", "'")
        .replace("\t", " ")
        .replace("\n", " ")
        .replace("\r", " ")
    )


# ── sentence splitting ────────────────────────────────────────────────────────


def _protected_spans(text: str) -> list[tuple[int, int]]:
    """Spans of balanced double-quoted regions shorter than the protect limit."""
    spans = []
    start = None
    for i, c in enumerate(text):
        if c == '"':
            if start is None:
                start = i
            else:
                if i - start < _QUOTE_PROTECT_MAX:
                    spans.append((start, i))
                start = None
    return spans


def _trailing_token(text: str, end: int) -> str:
    """The whitespace-delimited token ending just before position *end*."""
    i = end
    while i > 0 and not text[i - 1].isspace():
        i -= 1
    return text[i:end]


def split_sentences(text: str) -> list[str]:
    """Split text into sentences with the documented rule set."""
    if not text.strip():
        return []
    protected = _protected_spans(text)
    boundaries = []
    n = len(text)
    for i, c in enumerate(text):
        if c not in _TERMINALS:
            continue
        if any(a < i < b for a, b in protected):
            continue
        j = i + 1
        while j < n and text[j].isspace():
            j += 1
        if j == i + 1 or j == n:
            continue  # no whitespace after, or trailing punctuation
        nxt = text[j]
        if not (nxt.isupper() or nxt in _OPENERS):
            continue
        if c == ".":
            token = _trailing_token(text, i).lower()
            if token in ABBREVIATIONS:
                continue
        boundaries.append(i + 1)
    sentences = []
    prev = 0
    for b in boundaries:
        piece = text[prev:b].strip()
        if piece:
            sentences.append(piece)
        prev = b
    tail = text[prev:].strip()
    if tail:
        sentences.append(tail)
    return sentences


# ── word tokenization ─────────────────────────────────────────────────────────


def word_tokenize(sentence: str) -> list[str]:
    """Whitespace split, then detach leading/trailing punctuation as tokens.

    Internal punctuation (apostrophes, hyphens, decimal points) stays
    attached, so "it's" and "self-made" survive as single tokens.
    """
    tokens = []
    for chunk in sentence.split():
        head = []
        while chunk and not chunk[0].isalnum():
            head.append(chunk[0])
            chunk = chunk[1:]
        tail = []
        while chunk and not chunk[-1].isalnum():
            tail.append(chunk[-1])
            chunk = chunk[:-1]
        tokens.extend(head)
        if chunk:
            tokens.append(chunk)
        tokens.extend(reversed(tail))
    return tokens


def word_count(sentence: str) -> int:
    """Words for the length filter are whitespace-delimited chunks."""
    return len(sentence.split())


# ── per-sentence predicates ───────────────────────────────────────────────────


def balanced_delimiters(sentence: str) -> bool:
    """Parentheses nest correctly and double quotes come in pairs."""
    depth = 0
    quotes = 0
    for c in sentence:
        if c == "(":
            depth += 1
        elif c == ")":
            depth -= 1
            if depth < 0:
                return False
        elif c == '"':
            quotes += 1
    return depth == 0 and quotes % 2 == 0


def mostly_lowercase(sentence: str, ratio: float = 0.9) -> bool:
    """Lowercase fraction of alphabetic characters, ignoring the first character.

    Sentence-initial capitals must not count against a sentence, so the
    very first character is exempt.  A sentence with no alphabetic
    characters at all fails; one whose only letter is its first character
    passes vacuously.
    """
    letters = [c for c in sentence[1:] if c.isalpha()]
    if not letters:
        return bool(sentence[:1].isalpha())
    lower = sum(1 for c in letters if c.islower())
    return lower / len(letters) >= ratio


def english_probability(sentence: str, langid_model: LinearModel) -> float:
    """Softmax probability of the "en" label under a char-n-gram model.

    Identification is case-insensitive: the sentence is lowercased before
    featurization so capitalization (proper nouns, shouting) does not
    starve the model of known n-grams.  Models must be trained on
    lowercased text accordingly (the bundled one and `langid-train` are).
    """
    pos = langid_model.label_position("en")
    if pos is None:
        raise ConfigError('language-id model has no "en" label')
    ids = featurize(sentence.lower().split(), langid_model.feature_config)
    return float(predict_proba(langid_model, ids)[pos])


# ── the pair filter ───────────────────────────────────────────────────────────


def pair_passes(
    pair: SentencePair,
    config: FilterConfig,
    langid_model: LinearModel,
) -> tuple[bool, RejectionReason | None]:
    """Apply every quality check to both sentences; short-circuit on failure."""
    sentences = (pair.s1, pair.s2)
    counts = [word_count(s) for s in sentences]
    if any(c < config.min_words for c in counts):
        return False, RejectionReason.TOO_SHORT
    if any(c > config.max_words for c in counts):
        return False, RejectionReason.TOO_LONG
    for s in sentences:
        if english_probability(s, langid_model) <= config.english_threshold:
            return False, RejectionReason.NOT_ENGLISH
    if config.require_balanced:
        for s in sentences:
            if not balanced_delimiters(s):
                return False, RejectionReason.UNBALANCED_DELIMITERS
    for s in sentences:
        if not mostly_lowercase(s, config.lowercase_ratio):
            return False, RejectionReason.NOT_LOWERCASE
    for s in sentences:
        if "\t" in s or "\n" in s:
            return False, RejectionReason.MALFORMED
    return True, None
