"""Hashed bag-of-n-grams linear classifier.

A single architecture serves two roles: predicting sentence-pair labels
from word n-grams, and identifying languages from character n-grams.  An
example is the mean of the embedding rows selected by its hashed feature
ids, fed to a softmax over the label set.

Feature hashing uses the frozen FNV-1a scheme from :mod:`markermine.hashing`
(64-bit hash of the n-gram string, modulo the bucket count), so no
vocabulary is kept and memory stays bounded on arbitrarily large corpora.
N-grams are enumerated n-major: all unigrams, then all bigrams, and so on.

Training is plain per-example softmax cross-entropy SGD.  The learning
rate decays linearly from its starting value to zero over the scheduled
number of updates (epochs times examples).  With ``threads=1`` the result
is bit-reproducible for a fixed (input order, seed); with more threads the
tables are updated concurrently without locks, which trades
reproducibility for speed and is expected to stay within about one point
of the single-threaded accuracy.
"""

from __future__ import annotations

import json
import struct
import threading
from dataclasses import dataclass, field, asdict
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, FormatError, TrainingError
from .hashing import FNV_OFFSET, fnv1a, hash_windows

MODEL_MAGIC = b"DMLC"
MODEL_VERSION = 1

SIDE_FIRST = "a"
SIDE_SECOND = "b"

_TOKEN_START = "<"
_TOKEN_END = ">"


@dataclass(frozen=True)
class FeatureConfig:
    """How token sequences are turned into hashed feature ids."""

    bucket_count: int = 2**21
    ngram_max: int = 3
    granularity: str = "word"
    char_ngram_range: tuple[int, int] = (1, 4)
    side_prefixing: bool = False

    def __post_init__(self):
        if self.bucket_count < 2 or self.bucket_count & (self.bucket_count - 1):
            raise ConfigError(f"bucket_count must be a power of two >= 2, got {self.bucket_count}")
        if self.ngram_max < 1:
            raise ConfigError(f"ngram_max must be >= 1, got {self.ngram_max}")
        if self.granularity not in ("word", "char"):
            raise ConfigError(f"granularity must be 'word' or 'char', got {self.granularity!r}")
        lo, hi = self.char_ngram_range
        if lo < 1 or hi < lo:
            raise ConfigError(f"char_ngram_range must be a nonempty ordered pair, got {self.char_ngram_range}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["char_ngram_range"] = list(self.char_ngram_range)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureConfig":
        d = dict(d)
        d["char_ngram_range"] = tuple(d["char_ngram_range"])
        return cls(**d)


@dataclass(frozen=True)
class TrainConfig:
    dim: int = 100
    learning_rate: float = 0.5
    epochs: int = 1
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigError(f"dim must be >= 1, got {self.dim}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")


@dataclass(frozen=True)
class Prediction:
    label: str
    probability: float


@dataclass
class LinearModel:
    """Finalized classifier: immutable once trained, shareable across threads."""

    feature_config: FeatureConfig
    labels: list[str]
    input_table: np.ndarray
    output_table: np.ndarray
    train_config: TrainConfig
    _label_index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        if not self.labels:
            raise ConfigError("model must have at least one label")
        if len(set(self.labels)) != len(self.labels):
            raise ConfigError("model labels must be unique")
        if self.input_table.shape != (self.feature_config.bucket_count, self.dim):
            raise ConfigError("input table shape inconsistent with configuration")
        if self.output_table.shape != (len(self.labels), self.dim):
            raise ConfigError("output table shape inconsistent with labels")
        self._label_index = {lab: i for i, lab in enumerate(self.labels)}

    @property
    def dim(self) -> int:
        return self.output_table.shape[1]

    def label_position(self, label: str) -> int | None:
        return self._label_index.get(label)

    def save(self, path) -> None:
        save_model(self, path)

    @classmethod
    def load(cls, path) -> "LinearModel":
        return load_model(path)


# ── featurization ─────────────────────────────────────────────────────────────


def _side_state(side: str | None) -> int:
    if side is None:
        return FNV_OFFSET
    return fnv1a(side + "|")


def featurize(tokens: Sequence[str], config: FeatureConfig, side: str | None = None) -> np.ndarray:
    """Hash a token sequence into feature ids (int64 array).

    Word mode emits all contiguous word n-grams for n = 1..ngram_max, each
    n-gram joined with a single space and hashed as one string.  Char mode
    pads every token with boundary sentinels ("<", ">") and emits character
    n-grams over the padded token for every n in char_ngram_range.  When
    the config enables side prefixing, a side tag ("a" or "b") plus "|" is
    prepended to every n-gram string before hashing, so the same surface
    n-gram maps to different ids on different sides.
    """
    if config.side_prefixing and side is None:
        raise ConfigError("config has side_prefixing enabled but no side tag was given")
    if side is not None and not config.side_prefixing:
        raise ConfigError("side tag given but config does not enable side_prefixing")
    if not tokens:
        return np.empty(0, dtype=np.int64)
    state = _side_state(side)
    if config.granularity == "word":
        return _word_ids(tokens, config, state)
    return _char_ids(tokens, config, state)


def _word_ids(tokens: Sequence[str], config: FeatureConfig, state: int) -> np.ndarray:
    bucket = config.bucket_count
    ids = []
    for n in range(1, config.ngram_max + 1):
        for i in range(len(tokens) - n + 1):
            ids.append(fnv1a(" ".join(tokens[i : i + n]), state) % bucket)
    return np.array(ids, dtype=np.int64)


def _char_ids(tokens: Sequence[str], config: FeatureConfig, state: int) -> np.ndarray:
    lo, hi = config.char_ngram_range
    if all(t.isascii() and "\x00" not in t for t in tokens):
        return _char_ids_ascii(tokens, lo, hi, config.bucket_count, state)
    bucket = config.bucket_count
    padded = [_TOKEN_START + t + _TOKEN_END for t in tokens]
    ids = []
    for n in range(lo, hi + 1):
        for p in padded:
            for i in range(len(p) - n + 1):
                ids.append(fnv1a(p[i : i + n], state) % bucket)
    return np.array(ids, dtype=np.int64)


def _char_ids_ascii(tokens: Sequence[str], lo: int, hi: int, bucket: int, state: int) -> np.ndarray:
    # One buffer for the whole sentence, tokens separated by NUL; windows
    # containing the separator are masked out so n-grams never cross tokens.
    buf = "\x00".join(_TOKEN_START + t + _TOKEN_END for t in tokens).encode("ascii")
    data = np.frombuffer(buf, dtype=np.uint8)
    sep = np.concatenate(([0], np.cumsum(data == 0)))
    out = []
    for n in range(lo, hi + 1):
        h = hash_windows(data, n, state)
        if len(h) == 0:
            continue
        crosses = (sep[n:] - sep[:-n]) > 0
        out.append(h[~crosses] % np.uint64(bucket))
    if not out:
        return np.empty(0, dtype=np.int64)
    return np.concatenate(out).astype(np.int64)


def pair_featurize(
    s1_tokens: Sequence[str], s2p_tokens: Sequence[str], config: FeatureConfig
) -> np.ndarray:
    """Featurize a sentence pair with side-tagged n-grams.

    The first sentence hashes under side tag "a", the second under "b", so
    a token shared by both sentences contributes two distinct feature ids.
    """
    if not config.side_prefixing:
        raise ConfigError("pair featurization requires a config with side_prefixing enabled")
    return np.concatenate(
        [
            featurize(s1_tokens, config, side=SIDE_FIRST),
            featurize(s2p_tokens, config, side=SIDE_SECOND),
        ]
    )


# ── forward / backward ────────────────────────────────────────────────────────


def _softmax(scores: np.ndarray) -> np.ndarray:
    z = scores - scores.max()
    e = np.exp(z)
    return e / e.sum()


def _hidden(input_table: np.ndarray, feature_ids: np.ndarray) -> np.ndarray:
    if len(feature_ids) == 0:
        return np.zeros(input_table.shape[1], dtype=input_table.dtype)
    return input_table[feature_ids].mean(axis=0)


def _example_gradients(
    input_table: np.ndarray,
    output_table: np.ndarray,
    feature_ids: np.ndarray,
    label_pos: int,
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """Cross-entropy loss and gradients for one example.

    Returns ``(loss, g, h, dh)`` where ``g`` is the gradient on the scores
    (``softmax - onehot``), ``h`` the hidden mean vector, and ``dh`` the
    gradient on the hidden vector.  The output-table gradient is
    ``outer(g, h)``; each occurrence of a feature id in ``feature_ids``
    receives ``dh / len(feature_ids)`` on its input row.
    """
    h = _hidden(input_table, feature_ids)
    probs = _softmax(output_table @ h)
    loss = -float(np.log(max(probs[label_pos], np.finfo(np.float64).tiny)))
    g = probs.copy()
    g[label_pos] -= 1.0
    dh = output_table.T @ g
    return loss, g, h, dh


def loss_and_gradients(
    input_table: np.ndarray,
    output_table: np.ndarray,
    feature_ids: np.ndarray,
    label_pos: int,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Loss plus dense gradients w.r.t. both tables (for gradient checks)."""
    loss, g, h, dh = _example_gradients(input_table, output_table, feature_ids, label_pos)
    d_output = np.outer(g, h)
    d_input = np.zeros_like(input_table)
    if len(feature_ids):
        np.add.at(d_input, feature_ids, dh / len(feature_ids))
    return loss, d_output, d_input


# ── training ──────────────────────────────────────────────────────────────────


def train(
    instances: Iterable[tuple[np.ndarray, str]],
    feature_config: FeatureConfig,
    train_config: TrainConfig | None = None,
    labels: Sequence[str] | None = None,
) -> LinearModel:
    """Train a model from (feature ids, label) examples.

    Examples are materialized so multiple epochs can re-iterate them.  The
    input table starts uniform in [-1/dim, +1/dim] (seeded), the output
    table at zero.  Example order is reshuffled each epoch from the same
    seed, so label-grouped files train as well as interleaved ones and the
    result is still fully determined by (input order, seed).  When
    *labels* is given it fixes the label set; an example carrying any
    other label is a training error.
    """
    cfg = train_config or TrainConfig()
    data = [(np.asarray(ids, dtype=np.int64), lab) for ids, lab in instances]
    if not data:
        raise TrainingError("no training instances")
    if labels is None:
        label_list = sorted({lab for _, lab in data})
    else:
        label_list = list(labels)
        if len(set(label_list)) != len(label_list) or not label_list:
            raise TrainingError("label list must be nonempty and unique")
        known = set(label_list)
        for _, lab in data:
            if lab not in known:
                raise TrainingError(f"instance label {lab!r} absent from the label set")
    label_pos = {lab: i for i, lab in enumerate(label_list)}

    rng = np.random.default_rng(cfg.seed)
    dim = cfg.dim
    input_table = rng.uniform(-1.0 / dim, 1.0 / dim, size=(feature_config.bucket_count, dim)).astype(np.float32)
    output_table = np.zeros((len(label_list), dim), dtype=np.float32)

    total = cfg.epochs * len(data)
    lr0 = cfg.learning_rate

    def run(chunk: list[tuple[np.ndarray, str]], progress: list[int], order_rng) -> None:
        for _ in range(cfg.epochs):
            for j in order_rng.permutation(len(chunk)):
                ids, lab = chunk[j]
                t = progress[0]
                progress[0] = t + 1
                lr = lr0 * max(0.0, 1.0 - t / total)
                _, g, h, dh = _example_gradients(input_table, output_table, ids, label_pos[lab])
                np.subtract(output_table, lr * np.outer(g, h), out=output_table)
                m = len(ids)
                if m:
                    np.subtract.at(input_table, ids, (lr / m) * dh)

    if cfg.threads <= 1:
        run(data, [0], rng)
    else:
        # Lock-free shared-table updates; the progress counter races too,
        # which only perturbs the decay schedule.
        progress = [0]
        step = (len(data) + cfg.threads - 1) // cfg.threads
        workers = [
            threading.Thread(
                target=run,
                args=(data[i : i + step], progress, np.random.default_rng(cfg.seed + 1 + i)),
            )
            for i in range(0, len(data), step)
        ]
        for w in workers:
            w.start()
        for w in workers:
            w.join()

    return LinearModel(
        feature_config=feature_config,
        labels=label_list,
        input_table=input_table,
        output_table=output_table,
        train_config=cfg,
    )


# ── prediction ────────────────────────────────────────────────────────────────


def predict_proba(model: LinearModel, feature_ids: np.ndarray | Sequence[int]) -> np.ndarray:
    """Probability vector in model label order; uniform when no features."""
    ids = np.asarray(feature_ids, dtype=np.int64)
    h = _hidden(model.input_table, ids)
    return _softmax(model.output_table @ h)


def predict(model: LinearModel, feature_ids: np.ndarray | Sequence[int]) -> list[Prediction]:
    """Probabilities for every label; uniform when no features are present."""
    probs = predict_proba(model, feature_ids)
    return [Prediction(lab, float(p)) for lab, p in zip(model.labels, probs)]


def predict_topk(model: LinearModel, feature_ids: np.ndarray | Sequence[int], k: int) -> list[str]:
    """The min(k, L) most probable labels; ties break toward the smaller label."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    preds = predict(model, feature_ids)
    ordered = sorted(preds, key=lambda p: (-p.probability, p.label))
    return [p.label for p in ordered[:k]]


# ── k-fold out-of-fold prediction ─────────────────────────────────────────────


@dataclass(frozen=True)
class FoldPrediction:
    fold: int
    gold: str
    top_labels: list[str]


def fold_assignment(count: int, k: int, seed: int) -> np.ndarray:
    """Seeded fold index per instance; sizes differ by at most one."""
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if count < k:
        raise ValueError(f"need at least k={k} instances, got {count}")
    perm = np.random.default_rng(seed).permutation(count)
    folds = np.empty(count, dtype=np.int64)
    folds[perm] = np.arange(count) % k
    return folds


def instance_features(instance, mode: str, config: FeatureConfig) -> np.ndarray:
    """Featurize a labeled instance: its second sentence alone, or the pair."""
    from .filtering import word_tokenize

    if mode == "s2_only":
        return featurize(word_tokenize(instance.s2_prime), config)
    if mode == "pair":
        return pair_featurize(word_tokenize(instance.s1), word_tokenize(instance.s2_prime), config)
    raise ValueError(f"unknown featurization mode {mode!r}")


def default_feature_config(mode: str, bucket_count: int = 2**21, ngram_max: int = 3) -> FeatureConfig:
    return FeatureConfig(
        bucket_count=bucket_count,
        ngram_max=ngram_max,
        granularity="word",
        side_prefixing=(mode == "pair"),
    )


def kfold_predictions(
    instances: Sequence,
    k: int = 5,
    mode: str = "s2_only",
    train_config: TrainConfig | None = None,
    feature_config: FeatureConfig | None = None,
    topk: int = 5,
    seed: int | None = None,
) -> list[FoldPrediction]:
    """Out-of-fold top-k predictions for every instance.

    Instances are assigned to k folds by a seeded permutation; each
    instance is predicted by the model trained on the other k-1 folds.
    The result preserves input order and records the fold index.
    """
    cfg = train_config or TrainConfig()
    fcfg = feature_config or default_feature_config(mode)
    folds = fold_assignment(len(instances), k, cfg.seed if seed is None else seed)
    features = [instance_features(inst, mode, fcfg) for inst in instances]

    out: list[FoldPrediction | None] = [None] * len(instances)
    for fold in range(k):
        train_data = [(features[i], instances[i].marker) for i in range(len(instances)) if folds[i] != fold]
        model = train(train_data, fcfg, cfg)
        for i in range(len(instances)):
            if folds[i] == fold:
                out[i] = FoldPrediction(
                    fold=fold,
                    gold=instances[i].marker,
                    top_labels=predict_topk(model, features[i], topk),
                )
    return out  # type: ignore[return-value]


# ── model file (DMLC) ─────────────────────────────────────────────────────────


def save_model(model: LinearModel, path) -> None:
    """Write the DMLC container: magic, version, JSON header, f32 LE tables."""
    header = json.dumps(
        {
            "feature_config": model.feature_config.to_dict(),
            "labels": model.labels,
            "dim": model.dim,
            "train_config": asdict(model.train_config),
        },
        sort_keys=True,
    ).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MODEL_MAGIC)
        f.write(struct.pack("<I", MODEL_VERSION))
        f.write(struct.pack("<I", len(header)))
        f.write(header)
        f.write(np.ascontiguousarray(model.input_table, dtype="<f4").tobytes())
        f.write(np.ascontiguousarray(model.output_table, dtype="<f4").tobytes())


def load_model(path) -> LinearModel:
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != MODEL_MAGIC:
            raise FormatError(f"{path}: not a DMLC model file (magic {magic!r})")
        (version,) = struct.unpack("<I", f.read(4))
        if version != MODEL_VERSION:
            raise FormatError(f"{path}: unsupported DMLC version {version}")
        (hlen,) = struct.unpack("<I", f.read(4))
        header = json.loads(f.read(hlen).decode("utf-8"))
        fcfg = FeatureConfig.from_dict(header["feature_config"])
        labels = list(header["labels"])
        dim = int(header["dim"])
        n_in = fcfg.bucket_count * dim
        n_out = len(labels) * dim
        body = f.read()
    expected = 4 * (n_in + n_out)
    if len(body) != expected:
        raise FormatError(f"{path}: table payload is {len(body)} bytes, expected {expected}")
    flat = np.frombuffer(body, dtype="<f4")
    input_table = flat[:n_in].reshape(fcfg.bucket_count, dim).copy()
    output_table = flat[n_in:].reshape(len(labels), dim).copy()
    if not (np.isfinite(input_table).all() and np.isfinite(output_table).all()):
        raise FormatError(f"{path}: model contains non-finite weights")
    return LinearModel(
        feature_config=fcfg,
        labels=labels,
        input_table=input_table,
        output_table=output_table,
        train_config=TrainConfig(**header["train_config"]),
    )
