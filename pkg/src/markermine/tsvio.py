"""File formats: TSV is the interchange spine, JSON-lines the escape hatch.

Pairs:       s1 <TAB> s2 [<TAB> source-id]
Instances:   s1 <TAB> s2' <TAB> marker
Predictions: index <TAB> fold <TAB> gold <TAB> space-joined top labels

Raw shards are one document per line; consecutive sentences of a document
become pairs.  All ingestion normalizes curly quotes and strips embedded
tabs/newlines so TSV stays unambiguous.  Read errors report file and line.
"""

from __future__ import annotations

import hashlib
import json
from typing import Iterable, Iterator

from .errors import FormatError
from .extraction import Instance
from .filtering import SentencePair, normalize_text, split_sentences
from .linclass import FoldPrediction


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _clean(field: str) -> str:
    return normalize_text(field).strip()


# ── sentence pairs ────────────────────────────────────────────────────────────


def iter_pairs_tsv(path) -> Iterator[SentencePair]:
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) not in (2, 3):
                raise FormatError(f"{path}:{lineno}: expected s1<TAB>s2[<TAB>source]")
            source = parts[2] if len(parts) == 3 else None
            yield SentencePair(_clean(parts[0]), _clean(parts[1]), source)


def iter_pairs_raw(path) -> Iterator[SentencePair]:
    """Consecutive-sentence pairs from a one-document-per-line shard."""
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            sentences = split_sentences(normalize_text(line.strip()))
            for a, b in zip(sentences, sentences[1:]):
                yield SentencePair(a, b, source=f"{path}:{lineno}")


def iter_pairs_sentences(path) -> Iterator[SentencePair]:
    """Consecutive-line pairs from pre-segmented input (one sentence per line).

    A blank line marks a document boundary, so sentences on either side of
    it are never paired.
    """
    with open(path, encoding="utf-8") as f:
        prev = None
        for lineno, line in enumerate(f, start=1):
            sentence = normalize_text(line.strip()).strip()
            if not sentence:
                prev = None
                continue
            if prev is not None:
                yield SentencePair(prev, sentence, source=f"{path}:{lineno}")
            prev = sentence


PAIR_READERS = {
    "pairs": iter_pairs_tsv,
    "raw": iter_pairs_raw,
    "sentences": iter_pairs_sentences,
}


def write_pair(f, pair: SentencePair) -> None:
    if pair.source is not None:
        f.write(f"{pair.s1}\t{pair.s2}\t{pair.source}\n")
    else:
        f.write(f"{pair.s1}\t{pair.s2}\n")


# ── instances ─────────────────────────────────────────────────────────────────


def iter_instances_tsv(path) -> Iterator[Instance]:
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise FormatError(f"{path}:{lineno}: expected s1<TAB>s2'<TAB>marker")
            try:
                yield Instance(s1=parts[0], s2_prime=parts[1], marker=parts[2])
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from exc


def iter_instances_jsonl(path) -> Iterator[Instance]:
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                yield Instance(s1=obj["s1"], s2_prime=obj["s2_prime"], marker=obj["marker"])
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from exc


def read_instances(path, jsonl: bool = False) -> list[Instance]:
    it = iter_instances_jsonl(path) if jsonl else iter_instances_tsv(path)
    return list(it)


def write_instance(f, instance: Instance, jsonl: bool = False) -> None:
    if jsonl:
        f.write(
            json.dumps(
                {"s1": instance.s1, "s2_prime": instance.s2_prime, "marker": instance.marker},
                ensure_ascii=False,
            )
            + "\n"
        )
    else:
        f.write(f"{instance.s1}\t{instance.s2_prime}\t{instance.marker}\n")


def write_instances(path, instances: Iterable[Instance], jsonl: bool = False) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for inst in instances:
            write_instance(f, inst, jsonl)


# ── out-of-fold predictions ───────────────────────────────────────────────────


def write_predictions(path, predictions: Iterable[FoldPrediction]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for i, p in enumerate(predictions):
            f.write(f"{i}\t{p.fold}\t{p.gold}\t{' '.join(p.top_labels)}\n")


def read_predictions(path) -> list[FoldPrediction]:
    out = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise FormatError(f"{path}:{lineno}: expected index<TAB>fold<TAB>gold<TAB>labels")
            if int(parts[0]) != len(out):
                raise FormatError(f"{path}:{lineno}: prediction rows out of order")
            out.append(
                FoldPrediction(fold=int(parts[1]), gold=parts[2], top_labels=parts[3].split())
            )
    return out
