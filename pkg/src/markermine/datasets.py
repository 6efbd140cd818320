"""Balanced dataset variants, subsampling, splits and the shuffle perturbation.

Six variants share one knob, the base per-marker count (nominal default
10000): base, hard and adv sample exactly that many instances per marker,
big samples twice as many (tolerating shortfalls), ten keeps only the ten
most frequent markers but sizes them so the total matches base, and
shuffled is base with the within-label shuffle applied to every split part
after splitting.  A rational ``scale`` shrinks every nominal count for
desk-scale runs; manifests record both the nominal and effective values.

Everything here is deterministic under (inputs, spec, seed): markers are
processed in sorted order, per-marker samples preserve source order, and
manifests serialize canonically.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import BuildError
from .extraction import Instance, MarkerLexicon, ORIGIN_PDTB

VARIANT_KINDS = ("base", "hard", "shuffled", "adv", "ten", "big")

BASE_PER_MARKER = 10_000
DEFAULT_CAP = 200_000
DEFAULT_MIN_COUNT = 10_000
DEFAULT_PROPORTIONS = (0.9, 0.05, 0.05)

_FLOOR_EPS = 1e-9


@dataclass(frozen=True)
class VariantSpec:
    kind: str
    base_per_marker: int = BASE_PER_MARKER
    scale: Fraction = Fraction(1)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in VARIANT_KINDS:
            raise ValueError(f"unknown variant kind {self.kind!r}; expected one of {VARIANT_KINDS}")
        if self.base_per_marker < 1:
            raise ValueError("base_per_marker must be >= 1")
        scale = Fraction(self.scale)
        object.__setattr__(self, "scale", scale)
        if scale <= 0:
            raise ValueError("scale must be positive")
        if self.scaled(self.base_per_marker) < 1:
            raise ValueError(
                f"per-marker count {self.base_per_marker} x scale {scale} falls below 1"
            )

    def scaled(self, nominal: int) -> int:
        return int(Fraction(nominal) * self.scale)

    def per_marker(self, n_markers: int) -> int:
        """Effective per-marker count for this variant over *n_markers* markers."""
        base = self.scaled(self.base_per_marker)
        if self.kind == "big":
            return self.scaled(2 * self.base_per_marker)
        if self.kind == "ten":
            return (n_markers * base) // 10
        return base

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "base_per_marker": self.base_per_marker,
            "scale": str(self.scale),
            "seed": self.seed,
        }


@dataclass
class BuildAux:
    """Side inputs some variants need: predictions for hard, origins for adv,
    pre-cap frequencies for ten's ranking."""

    predictions: Sequence[Sequence[str]] | None = None
    lexicon: MarkerLexicon | None = None
    frequency_map: Mapping[str, int] | None = None


# ── subsampling ───────────────────────────────────────────────────────────────


def cap_subsample(instances, cap: int = DEFAULT_CAP, seed: int = 0, marker_of=None) -> list:
    """Per-marker reservoir sampling: at most *cap* uniform picks per marker.

    Single pass, memory proportional to the kept instances.  Output is
    grouped by marker (sorted) in reservoir slot order.  *marker_of* maps
    an item to its marker (defaults to the ``marker`` attribute), so index
    lists can be capped alongside aligned side data.
    """
    if cap < 1:
        raise ValueError(f"cap must be >= 1, got {cap}")
    if marker_of is None:
        marker_of = lambda inst: inst.marker
    rng = np.random.default_rng(seed)
    reservoirs: dict[str, list] = {}
    seen: Counter = Counter()
    for inst in instances:
        marker = marker_of(inst)
        seen[marker] += 1
        bucket = reservoirs.setdefault(marker, [])
        if len(bucket) < cap:
            bucket.append(inst)
        else:
            j = int(rng.integers(0, seen[marker]))
            if j < cap:
                bucket[j] = inst
    out = []
    for marker in sorted(reservoirs):
        out.extend(reservoirs[marker])
    return out


def apply_min_count(
    instances: Iterable[Instance],
    counts: Mapping[str, int] | MarkerLexicon,
    min_count: int = DEFAULT_MIN_COUNT,
) -> list[Instance]:
    """Drop instances whose marker count is below the floor."""
    if isinstance(counts, MarkerLexicon):
        counts = counts.counts()
    return [i for i in instances if counts.get(i.marker, 0) >= min_count]


# ── variant construction ──────────────────────────────────────────────────────


def _group_by_marker(instances: Sequence[Instance]) -> dict[str, list[int]]:
    groups: dict[str, list[int]] = {}
    for i, inst in enumerate(instances):
        groups.setdefault(inst.marker, []).append(i)
    return groups


def _sample_exact(
    instances: Sequence[Instance],
    groups: dict[str, list[int]],
    markers: Sequence[str],
    needed: int,
    rng: np.random.Generator,
) -> list[Instance]:
    deficient = {m: len(groups.get(m, ())) for m in markers if len(groups.get(m, ())) < needed}
    if deficient:
        detail = ", ".join(f"{m} ({n} < {needed})" for m, n in sorted(deficient.items()))
        raise BuildError(f"not enough instances for markers: {detail}")
    out = []
    for marker in markers:
        pool = groups[marker]
        picked = rng.choice(len(pool), size=needed, replace=False)
        picked.sort()
        out.extend(instances[pool[j]] for j in picked)
    return out


def build_variant(
    instances: Sequence[Instance],
    spec: VariantSpec,
    aux: BuildAux | None = None,
) -> tuple[list[Instance], dict]:
    """Select the variant's instances; returns (selection, variant manifest).

    For the shuffled variant the selection equals base; the within-label
    shuffle belongs after splitting (see :func:`build_dataset`).
    """
    aux = aux or BuildAux()
    groups = _group_by_marker(instances)
    markers = sorted(groups)
    if not markers:
        raise BuildError("no instances to build from")
    needed = spec.per_marker(len(markers))
    if needed < 1:
        raise BuildError(f"effective per-marker count is {needed}; increase scale or counts")
    rng = np.random.default_rng(spec.seed)
    manifest: dict = {
        "variant": spec.to_dict(),
        "per_marker_effective": needed,
    }

    if spec.kind in ("base", "shuffled"):
        selected = _sample_exact(instances, groups, markers, needed, rng)
    elif spec.kind == "hard":
        preds = aux.predictions
        if preds is None:
            raise ValueError("hard variant requires out-of-fold predictions")
        if len(preds) != len(instances):
            raise ValueError(
                f"got {len(preds)} prediction rows for {len(instances)} instances"
            )
        survivors: dict[str, list[int]] = {m: [] for m in markers}
        for i, inst in enumerate(instances):
            if inst.marker not in list(preds[i])[:5]:
                survivors[inst.marker].append(i)
        removed = len(instances) - sum(len(v) for v in survivors.values())
        manifest["removed_predictable"] = removed
        selected = _sample_exact(instances, survivors, markers, needed, rng)
    elif spec.kind == "adv":
        if aux.lexicon is None:
            raise ValueError("adv variant requires a lexicon with marker origins")
        origins = {e.form: e.origin for e in aux.lexicon.entries}
        missing = [m for m in markers if m not in origins]
        if missing:
            raise ValueError(f"markers absent from the lexicon: {missing}")
        kept = [m for m in markers if origins[m] != ORIGIN_PDTB]
        if not kept:
            raise BuildError("adv variant has no markers left after discarding seeded-only ones")
        manifest["discarded_markers"] = [m for m in markers if m not in kept]
        selected = _sample_exact(instances, groups, kept, needed, rng)
    elif spec.kind == "ten":
        if len(markers) < 10:
            raise BuildError(f"ten variant needs >= 10 markers, got {len(markers)}")
        freq = aux.frequency_map or {m: len(groups[m]) for m in markers}
        ranked = sorted(markers, key=lambda m: (-freq.get(m, 0), m))[:10]
        ranked.sort()
        manifest["kept_markers"] = ranked
        selected = _sample_exact(instances, groups, ranked, needed, rng)
    elif spec.kind == "big":
        selected = []
        shortfall = {}
        for marker in markers:
            pool = groups[marker]
            if len(pool) < needed:
                shortfall[marker] = len(pool)
                selected.extend(instances[j] for j in pool)
            else:
                picked = rng.choice(len(pool), size=needed, replace=False)
                picked.sort()
                selected.extend(instances[pool[j]] for j in picked)
        if shortfall:
            manifest["shortfall"] = shortfall
    else:  # pragma: no cover - guarded by VariantSpec
        raise ValueError(spec.kind)

    counts = Counter(i.marker for i in selected)
    manifest["marker_counts"] = dict(sorted(counts.items()))
    manifest["total"] = len(selected)
    return selected, manifest


# ── splits ────────────────────────────────────────────────────────────────────


@dataclass
class DatasetSplit:
    train: list[Instance]
    valid: list[Instance]
    test: list[Instance]
    proportions: tuple[float, float, float]
    seed: int
    manifest: dict = field(default_factory=dict)

    def parts(self) -> dict[str, list[Instance]]:
        return {"train": self.train, "valid": self.valid, "test": self.test}


def split_dataset(
    dataset: Sequence[Instance],
    proportions: tuple[float, float, float] = DEFAULT_PROPORTIONS,
    seed: int = 0,
) -> DatasetSplit:
    """Stratified train/valid/test split.

    Per marker: a seeded shuffle, then train takes floor(n * p_train),
    valid takes floor(n * p_valid), and test receives the remainder.
    """
    if len(proportions) != 3 or any(p < 0 for p in proportions):
        raise ValueError(f"proportions must be three nonnegative numbers, got {proportions}")
    if abs(sum(proportions) - 1.0) > 1e-9:
        raise ValueError(f"proportions must sum to 1, got {proportions}")
    rng = np.random.default_rng(seed)
    groups = _group_by_marker(dataset)
    train: list[Instance] = []
    valid: list[Instance] = []
    test: list[Instance] = []
    per_marker: dict[str, dict[str, int]] = {}
    for marker in sorted(groups):
        pool = groups[marker]
        order = rng.permutation(len(pool))
        shuffled = [dataset[pool[j]] for j in order]
        n = len(shuffled)
        n_train = int(n * proportions[0] + _FLOOR_EPS)
        n_valid = int(n * proportions[1] + _FLOOR_EPS)
        train.extend(shuffled[:n_train])
        valid.extend(shuffled[n_train : n_train + n_valid])
        test.extend(shuffled[n_train + n_valid :])
        per_marker[marker] = {
            "train": n_train,
            "valid": n_valid,
            "test": n - n_train - n_valid,
        }
    manifest = {
        "proportions": list(proportions),
        "split_seed": seed,
        "split_counts": per_marker,
    }
    return DatasetSplit(train, valid, test, tuple(proportions), seed, manifest)


def shuffle_within_labels(part: Sequence[Instance], seed: int = 0) -> list[Instance]:
    """Permute s2' values uniformly among each marker's instances.

    The per-marker multiset of second sentences is preserved exactly;
    first sentences and markers never move.
    """
    rng = np.random.default_rng(seed)
    out = list(part)
    groups = _group_by_marker(out)
    for marker in sorted(groups):
        positions = groups[marker]
        values = [out[i].s2_prime for i in positions]
        order = rng.permutation(len(positions))
        for slot, i in enumerate(positions):
            src = out[i]
            out[i] = Instance(s1=src.s1, s2_prime=values[order[slot]], marker=src.marker)
    return out


# ── end-to-end build ──────────────────────────────────────────────────────────


def build_dataset(
    instances: Sequence[Instance],
    spec: VariantSpec,
    aux: BuildAux | None = None,
    proportions: tuple[float, float, float] = DEFAULT_PROPORTIONS,
    source_checksums: Mapping[str, str] | None = None,
) -> DatasetSplit:
    """Variant selection, stratified split, and (for shuffled) the perturbation.

    Each split part is shuffled independently so no part leaks pair
    alignment, with part-specific seeds derived from the spec seed.
    """
    selected, variant_manifest = build_variant(instances, spec, aux)
    split = split_dataset(selected, proportions, seed=spec.seed)
    if spec.kind == "shuffled":
        split.train = shuffle_within_labels(split.train, seed=spec.seed * 3 + 1)
        split.valid = shuffle_within_labels(split.valid, seed=spec.seed * 3 + 2)
        split.test = shuffle_within_labels(split.test, seed=spec.seed * 3 + 3)
    manifest = {"schema_version": 1}
    manifest.update(variant_manifest)
    manifest.update(split.manifest)
    if source_checksums:
        manifest["source_checksums"] = dict(sorted(source_checksums.items()))
    split.manifest = manifest
    return split


def canonical_json(obj) -> str:
    """Stable JSON for manifests: sorted keys, two-space indent, newline end."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
