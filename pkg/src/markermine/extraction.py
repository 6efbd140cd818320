"""The sentence-initial marker rule and the marker lexicon.

A second sentence yields a candidate when its first token is a single
alphabetic word followed by a comma, and that word is either tagged as an
adverb or conjunction in context, or appears in the seeded single-word
connective list.  The matched word (lowercased, without the comma) becomes
the instance label; the label token, the comma and following whitespace
are stripped from the sentence and the first letter of the remainder is
recapitalized.

The rule deliberately admits non-connective false positives ("Very, very
cold."); downstream predictability auditing exists to expose them.
"""

from __future__ import annotations

import re
import warnings
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import FormatError
from .filtering import FilterConfig, SentencePair, pair_passes, word_tokenize
from .linclass import LinearModel
from .tagger import TaggerModel, is_candidate_pos, tag

ORIGIN_DISCOVERED = "discovered"
ORIGIN_PDTB = "pdtb"
ORIGIN_BOTH = "both"
VALID_ORIGINS = frozenset({ORIGIN_DISCOVERED, ORIGIN_PDTB, ORIGIN_BOTH})


@dataclass(frozen=True)
class Instance:
    """Labeled triple: leading sentence, stripped second sentence, marker."""

    s1: str
    s2_prime: str
    marker: str

    def __post_init__(self):
        if not self.s2_prime:
            raise ValueError("s2_prime must be nonempty")
        if not self.marker or any(c.isspace() or c == "," for c in self.marker):
            raise ValueError(f"invalid marker form {self.marker!r}")


@dataclass(frozen=True)
class LexiconEntry:
    form: str
    origin: str
    count: int

    def __post_init__(self):
        if self.origin not in VALID_ORIGINS:
            raise ValueError(f"invalid origin {self.origin!r}")
        if self.count < 0:
            raise ValueError("count must be nonnegative")
        if not self.form or any(c.isspace() or c == "," for c in self.form):
            raise ValueError(f"invalid marker form {self.form!r}")
        if self.form != self.form.lower():
            raise ValueError(f"marker forms are canonically lowercase, got {self.form!r}")


@dataclass
class MarkerLexicon:
    entries: list[LexiconEntry]

    def __post_init__(self):
        forms = [e.form for e in self.entries]
        if len(set(forms)) != len(forms):
            raise ValueError("lexicon forms must be unique")

    def forms(self) -> set[str]:
        return {e.form for e in self.entries}

    def origin_of(self, form: str) -> str | None:
        for e in self.entries:
            if e.form == form:
                return e.origin
        return None

    def counts(self) -> dict[str, int]:
        return {e.form: e.count for e in self.entries}

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            for e in self.entries:
                f.write(f"{e.form}\t{e.origin}\t{e.count}\n")

    @classmethod
    def load(cls, path) -> "MarkerLexicon":
        entries = []
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise FormatError(f"{path}:{lineno}: expected form<TAB>origin<TAB>count")
                entries.append(LexiconEntry(parts[0], parts[1], int(parts[2])))
        return cls(entries)


def load_pdtb_forms(path=None) -> frozenset[str]:
    """The bundled (editable) single-word connective list, lowercased."""
    if path is None:
        text = resources.files("markermine.data").joinpath("pdtb_markers.txt").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    forms = set()
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip().lower()
        if line:
            forms.add(line)
    return frozenset(forms)


# ── the candidate rule ────────────────────────────────────────────────────────


def _match(
    s2_tokens: Sequence[str],
    tagger_model: TaggerModel,
    pdtb_forms: frozenset[str],
) -> tuple[str, bool] | None:
    """Candidate form and whether the POS rule matched, or None."""
    if len(s2_tokens) < 2 or s2_tokens[1] != ",":
        return None
    w = s2_tokens[0]
    if not w.isalpha():
        return None
    form = w.lower()
    via_pos = is_candidate_pos(tag(tagger_model, s2_tokens)[0])
    if via_pos or form in pdtb_forms:
        return form, via_pos
    return None


def match_candidate(
    s2_tokens: Sequence[str],
    tagger_model: TaggerModel,
    pdtb_forms: frozenset[str],
) -> str | None:
    """Lowercased marker form when the sentence starts with one, else None."""
    m = _match(s2_tokens, tagger_model, pdtb_forms)
    return m[0] if m else None


_MARKER_PATTERNS: dict[str, re.Pattern] = {}


def _marker_pattern(marker: str) -> re.Pattern:
    pat = _MARKER_PATTERNS.get(marker)
    if pat is None:
        pat = re.compile(rf"^\s*{re.escape(marker)}\s*,\s*", re.IGNORECASE)
        _MARKER_PATTERNS[marker] = pat
    return pat


def _capitalize_first_alpha(text: str) -> str:
    for i, c in enumerate(text):
        if c.isalpha():
            return text[:i] + c.upper() + text[i + 1 :]
    return text


def make_instance(pair: SentencePair, marker: str) -> Instance | None:
    """Strip the marker and comma from s2 and recapitalize the remainder.

    Returns None when nothing is left after stripping, or when the
    remainder itself still starts with the marker and a comma (which would
    violate the instance shape).
    """
    m = _marker_pattern(marker).match(pair.s2)
    if m is None:
        raise ValueError(f"s2 does not start with {marker!r} followed by a comma")
    remainder = pair.s2[m.end() :].strip()
    if not remainder:
        return None
    s2_prime = _capitalize_first_alpha(remainder)
    if _marker_pattern(marker).match(s2_prime):
        return None
    return Instance(s1=pair.s1.strip(), s2_prime=s2_prime, marker=marker)


# ── streaming discovery ───────────────────────────────────────────────────────


@dataclass
class DiscoveryCounts:
    """Filled in while the discovery stream is consumed; final once exhausted."""

    marker_counts: Counter = field(default_factory=Counter)
    pos_matched: set[str] = field(default_factory=set)
    pairs_seen: int = 0
    pairs_passed: int = 0
    rejections: Counter = field(default_factory=Counter)

    def to_dict(self) -> dict:
        return {
            "pairs_seen": self.pairs_seen,
            "pairs_passed": self.pairs_passed,
            "rejections": dict(sorted(self.rejections.items())),
            "marker_counts": dict(sorted(self.marker_counts.items())),
            "pos_matched": sorted(self.pos_matched),
        }

    def merge(self, other: "DiscoveryCounts") -> None:
        """Fold another shard's counters in (associative and commutative)."""
        self.marker_counts.update(other.marker_counts)
        self.pos_matched |= other.pos_matched
        self.pairs_seen += other.pairs_seen
        self.pairs_passed += other.pairs_passed
        self.rejections.update(other.rejections)


def discover(
    pairs: Iterable[SentencePair],
    tagger_model: TaggerModel,
    pdtb_forms: frozenset[str],
    filter_config: FilterConfig,
    langid_model: LinearModel,
) -> tuple[Iterator[Instance], DiscoveryCounts]:
    """One streaming pass: filter pairs, match candidates, emit instances.

    Memory stays constant apart from the returned counters.  The counts
    object is shared with the generator and is only complete after the
    instance stream has been fully consumed.
    """
    counts = DiscoveryCounts()

    def gen() -> Iterator[Instance]:
        for pair in pairs:
            counts.pairs_seen += 1
            ok, reason = pair_passes(pair, filter_config, langid_model)
            if not ok:
                counts.rejections[reason.value] += 1
                continue
            counts.pairs_passed += 1
            matched = _match(word_tokenize(pair.s2), tagger_model, pdtb_forms)
            if matched is None:
                continue
            form, via_pos = matched
            instance = make_instance(pair, form)
            if instance is None:
                continue
            counts.marker_counts[instance.marker] += 1
            if via_pos:
                counts.pos_matched.add(form)
            yield instance

    return gen(), counts


def discover_prefiltered(
    pairs: Iterable[SentencePair],
    tagger_model: TaggerModel,
    pdtb_forms: frozenset[str],
) -> tuple[Iterator[Instance], DiscoveryCounts]:
    """Like :func:`discover` but trusting that pairs already passed the filters."""
    counts = DiscoveryCounts()

    def gen() -> Iterator[Instance]:
        for pair in pairs:
            counts.pairs_seen += 1
            counts.pairs_passed += 1
            matched = _match(word_tokenize(pair.s2), tagger_model, pdtb_forms)
            if matched is None:
                continue
            form, via_pos = matched
            instance = make_instance(pair, form)
            if instance is None:
                continue
            counts.marker_counts[instance.marker] += 1
            if via_pos:
                counts.pos_matched.add(form)
            yield instance

    return gen(), counts


def build_lexicon(
    frequency_map: Mapping[str, int],
    pdtb_forms: frozenset[str],
    min_count: int,
    pos_matched: set[str] | None = None,
) -> MarkerLexicon:
    """Markers meeting the count floor, ordered by descending count then form.

    Origins need the set of forms the POS rule matched; without it, forms
    absent from the seeded list are necessarily "discovered" and seeded
    forms conservatively fall back to "pdtb".
    """
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    entries = []
    for form, count in frequency_map.items():
        if count < min_count:
            continue
        in_pdtb = form in pdtb_forms
        if pos_matched is None:
            origin = ORIGIN_PDTB if in_pdtb else ORIGIN_DISCOVERED
        elif form in pos_matched:
            origin = ORIGIN_BOTH if in_pdtb else ORIGIN_DISCOVERED
        else:
            origin = ORIGIN_PDTB
        entries.append(LexiconEntry(form=form, origin=origin, count=count))
    entries.sort(key=lambda e: (-e.count, e.form))
    if not entries:
        warnings.warn("no markers met the minimum count; lexicon is empty")
    return MarkerLexicon(entries)
