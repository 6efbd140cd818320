"""Command-line pipeline: filter, discover, audit, build, report.

Every command is rerunnable: with --deterministic (single thread) the same
inputs, configuration and seed produce byte-identical outputs, and every
output directory carries a manifest sufficient to regenerate it.

Option precedence is flags > config file > built-in defaults.  The config
file is flat "key = value" text ('#' comments); keys are the long flag
names with underscores.  Paths are never read from the config file; the
MARKERMINE_TAGGER, MARKERMINE_LANGID and MARKERMINE_PDTB environment
variables supply default model paths.

Exit codes: 0 success, 1 runtime or I/O failure, 2 argument or
configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import FORMAT_VERSIONS, __version__
from . import analysis, datasets, extraction, filtering, linclass, tagger, tsvio
from .datasets import canonical_json
from .errors import ConfigError, MarkerMineError

ENV_TAGGER = "MARKERMINE_TAGGER"
ENV_LANGID = "MARKERMINE_LANGID"
ENV_PDTB = "MARKERMINE_PDTB"


# ── option plumbing ───────────────────────────────────────────────────────────

# name -> (default, parser, help); shared across the subcommands that use them.
_OPTION_SPECS: dict[str, tuple[object, type | None, str]] = {
    "min_words": (3, int, "minimum words per sentence"),
    "max_words": (32, int, "maximum words per sentence"),
    "english_threshold": (0.75, float, "minimum English probability (exclusive)"),
    "lowercase_ratio": (0.9, float, "minimum lowercase fraction past the first character"),
    "require_balanced": (True, None, "require balanced parentheses and quotes"),
    "min_count": (10000, int, "minimum marker frequency"),
    "cap": (200000, int, "per-marker subsampling cap"),
    "dim": (100, int, "embedding dimension"),
    "lr": (0.5, float, "starting learning rate"),
    "epochs": (1, int, "training epochs"),
    "seed": (0, int, "random seed"),
    "threads": (1, int, "worker threads (training parallelism)"),
    "deterministic": (False, None, "force single-threaded seeded execution"),
    "buckets": (2**21, int, "feature hash buckets (power of two)"),
    "ngram_max": (3, int, "maximum word n-gram length"),
    "char_min": (1, int, "minimum character n-gram length"),
    "char_max": (4, int, "maximum character n-gram length"),
    "mode": ("s2_only", str, "featurization: s2_only or pair"),
    "k": (5, int, "fold count"),
    "topk": (5, int, "predictions kept per instance"),
    "k_for_hit": (1, int, "top-k threshold counting a prediction as correct"),
    "per_marker": (10000, int, "nominal base per-marker instance count"),
    "scale": (Fraction(1), Fraction, "rational desk-scale multiplier, e.g. 1/1000"),
    "proportions": ("0.9,0.05,0.05", str, "train,valid,test proportions"),
    "dict_min_count": (20, int, "tag dictionary frequency threshold"),
    "dict_purity": (0.97, float, "tag dictionary purity threshold"),
    "jsonl": (False, None, "read/write instances as JSON lines instead of TSV"),
    "assume_filtered": (False, None, "skip re-filtering already filtered pairs"),
    "format": ("pairs", str, "input format: pairs (TSV), raw (document per line), "
                             "sentences (pre-segmented, one per line)"),
}

_COMMAND_OPTIONS: dict[str, tuple[str, ...]] = {
    "filter": (
        "min_words", "max_words", "english_threshold", "lowercase_ratio",
        "require_balanced", "format", "threads", "deterministic",
    ),
    "discover": (
        "min_words", "max_words", "english_threshold", "lowercase_ratio",
        "require_balanced", "min_count", "assume_filtered", "jsonl",
        "threads", "deterministic",
    ),
    "tagger-train": ("epochs", "seed", "dict_min_count", "dict_purity"),
    "langid-train": ("dim", "lr", "epochs", "seed", "buckets", "char_min", "char_max"),
    "classify-train": (
        "mode", "dim", "lr", "epochs", "seed", "buckets", "ngram_max",
        "threads", "deterministic", "jsonl",
    ),
    "classify-eval": ("k_for_hit", "jsonl"),
    "kfold": ("k", "mode", "topk", "dim", "lr", "epochs", "seed", "buckets", "ngram_max", "jsonl"),
    "build": ("per_marker", "scale", "seed", "proportions", "min_count", "cap", "jsonl"),
    "shuffle": ("seed", "jsonl"),
    "stats": ("cap",),
    "export-embeddings": (),
}


def _parse_config_value(raw: str, default) -> object:
    if isinstance(default, bool):
        lowered = raw.lower()
        if lowered in ("true", "1", "yes", "on"):
            return True
        if lowered in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"expected a boolean, got {raw!r}")
    if isinstance(default, Fraction):
        return Fraction(raw)
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def load_config_file(path) -> dict[str, str]:
    values = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, raw = line.partition("=")
            key = key.strip()
            if key not in _OPTION_SPECS:
                raise ConfigError(f"{path}:{lineno}: unknown option {key!r}")
            values[key] = raw.strip()
    return values


def _add_options(parser: argparse.ArgumentParser, command: str) -> None:
    parser.add_argument("--config", default=None, help="key = value config file")
    for name in _COMMAND_OPTIONS[command]:
        default, typ, help_text = _OPTION_SPECS[name]
        flag = "--" + name.replace("_", "-")
        if isinstance(default, bool):
            parser.add_argument(
                flag, dest=name, action=argparse.BooleanOptionalAction,
                default=argparse.SUPPRESS, help=help_text,
            )
        else:
            parser.add_argument(
                flag, dest=name, type=typ, default=argparse.SUPPRESS,
                help=f"{help_text} (default {default})",
            )


def resolve_options(args: argparse.Namespace, command: str) -> dict:
    """Merge built-in defaults, config file values and explicit flags."""
    opts = {name: _OPTION_SPECS[name][0] for name in _COMMAND_OPTIONS[command]}
    if getattr(args, "config", None):
        for key, raw in load_config_file(args.config).items():
            if key in opts:
                opts[key] = _parse_config_value(raw, _OPTION_SPECS[key][0])
    for name in _COMMAND_OPTIONS[command]:
        if hasattr(args, name):
            opts[name] = getattr(args, name)
    if opts.get("deterministic"):
        opts["threads"] = 1
    _validate_options(opts)
    return opts


def _validate_options(opts: dict) -> None:
    for key in ("min_count", "cap", "dim", "epochs", "threads", "k", "topk", "k_for_hit",
                "per_marker", "ngram_max", "char_min", "char_max", "buckets"):
        if key in opts and opts[key] < 1:
            raise ConfigError(f"{key} must be >= 1, got {opts[key]}")
    if "mode" in opts and opts["mode"] not in ("s2_only", "pair"):
        raise ConfigError(f"mode must be s2_only or pair, got {opts['mode']!r}")
    if "format" in opts and opts["format"] not in tsvio.PAIR_READERS:
        raise ConfigError(
            f"format must be one of {sorted(tsvio.PAIR_READERS)}, got {opts['format']!r}"
        )
    if "proportions" in opts:
        parts = _parse_proportions(opts["proportions"])
        if len(parts) != 3 or abs(sum(parts) - 1.0) > 1e-9:
            raise ConfigError(f"proportions must be three values summing to 1, got {opts['proportions']}")


def _parse_proportions(raw) -> tuple[float, float, float]:
    if isinstance(raw, (tuple, list)):
        return tuple(raw)
    return tuple(float(p) for p in str(raw).split(","))


def _manifest_config(opts: dict) -> dict:
    out = {}
    for key, value in sorted(opts.items()):
        out[key] = str(value) if isinstance(value, Fraction) else value
    return out


# ── model and data loading ────────────────────────────────────────────────────


def _bundled(name: str):
    return resources.files("markermine.data").joinpath(name)


def load_langid(path: str | None) -> linclass.LinearModel:
    if path is None:
        path = os.environ.get(ENV_LANGID)
    if path is None:
        with resources.as_file(_bundled("langid.dmlc")) as p:
            return linclass.load_model(p)
    return linclass.load_model(path)


def load_tagger_model(path: str | None) -> tagger.TaggerModel:
    if path is None:
        path = os.environ.get(ENV_TAGGER)
    if path is None:
        raise ConfigError(f"no tagger model: pass --tagger or set {ENV_TAGGER}")
    return tagger.load_tagger(path)


def load_pdtb(path: str | None) -> frozenset[str]:
    if path is None:
        path = os.environ.get(ENV_PDTB)
    return extraction.load_pdtb_forms(path)


def _filter_config(opts: dict) -> filtering.FilterConfig:
    return filtering.FilterConfig(
        min_words=opts["min_words"],
        max_words=opts["max_words"],
        english_threshold=opts["english_threshold"],
        lowercase_ratio=opts["lowercase_ratio"],
        require_balanced=opts["require_balanced"],
    )


def _train_config(opts: dict) -> linclass.TrainConfig:
    return linclass.TrainConfig(
        dim=opts["dim"],
        learning_rate=opts["lr"],
        epochs=opts["epochs"],
        seed=opts["seed"],
        threads=opts.get("threads", 1),
    )


def _word_feature_config(opts: dict, mode: str) -> linclass.FeatureConfig:
    return linclass.FeatureConfig(
        bucket_count=opts["buckets"],
        ngram_max=opts["ngram_max"],
        granularity="word",
        side_prefixing=(mode == "pair"),
    )


# ── commands ──────────────────────────────────────────────────────────────────


def _filter_shard(shard, fmt: str, config, langid, out_path) -> tuple[int, int, dict[str, int]]:
    total = accepted = 0
    rejections: dict[str, int] = {}
    pairs = tsvio.PAIR_READERS[fmt](shard)
    with open(out_path, "w", encoding="utf-8") as out:
        for pair in pairs:
            total += 1
            ok, reason = filtering.pair_passes(pair, config, langid)
            if ok:
                accepted += 1
                tsvio.write_pair(out, pair)
            else:
                rejections[reason.value] = rejections.get(reason.value, 0) + 1
    return total, accepted, rejections


def _concatenate(parts, out_path) -> None:
    with open(out_path, "wb") as out:
        for part in parts:
            with open(part, "rb") as f:
                while block := f.read(1 << 20):
                    out.write(block)
            os.unlink(part)


def _shard_parts(out_path, count: int) -> list[str]:
    return [f"{out_path}.part{i}" for i in range(count)]


def cmd_filter(args) -> int:
    opts = resolve_options(args, "filter")
    config = _filter_config(opts)
    langid = load_langid(args.langid)
    parts = _shard_parts(args.out, len(args.inputs))
    threads = min(opts["threads"], len(args.inputs))
    if threads > 1:
        # shard-level data parallelism; per-shard counters merged at the end
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(threads) as pool:
            results = list(
                pool.map(
                    lambda sp: _filter_shard(sp[0], opts["format"], config, langid, sp[1]),
                    zip(args.inputs, parts),
                )
            )
    else:
        results = [
            _filter_shard(shard, opts["format"], config, langid, part)
            for shard, part in zip(args.inputs, parts)
        ]
    _concatenate(parts, args.out)
    total = sum(r[0] for r in results)
    accepted = sum(r[1] for r in results)
    rejections: dict[str, int] = {}
    for _, _, shard_rejections in results:
        for reason, count in shard_rejections.items():
            rejections[reason] = rejections.get(reason, 0) + count
    stats = {
        "schema_version": 1,
        "total": total,
        "accepted": accepted,
        "rejections": rejections,
        "config": _manifest_config(opts),
    }
    with open(args.stats, "w", encoding="utf-8") as f:
        f.write(canonical_json(stats))
    print(f"filter: {accepted}/{total} pairs accepted", file=sys.stderr)
    return 0


def _discover_shard(shard, opts, config, langid, tagger_model, pdtb_forms, out_path):
    pairs = tsvio.iter_pairs_tsv(shard)
    if opts["assume_filtered"]:
        stream, counts = extraction.discover_prefiltered(pairs, tagger_model, pdtb_forms)
    else:
        stream, counts = extraction.discover(pairs, tagger_model, pdtb_forms, config, langid)
    with open(out_path, "w", encoding="utf-8") as out:
        for inst in stream:
            tsvio.write_instance(out, inst, opts["jsonl"])
    return counts


def cmd_discover(args) -> int:
    opts = resolve_options(args, "discover")
    config = _filter_config(opts)
    langid = load_langid(args.langid)
    tagger_model = load_tagger_model(args.tagger)
    pdtb_forms = load_pdtb(args.pdtb)

    parts = _shard_parts(args.out, len(args.inputs))
    threads = min(opts["threads"], len(args.inputs))
    if threads > 1:
        # per-shard frequency maps merged associatively below
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(threads) as pool:
            shard_counts = list(
                pool.map(
                    lambda sp: _discover_shard(
                        sp[0], opts, config, langid, tagger_model, pdtb_forms, sp[1]
                    ),
                    zip(args.inputs, parts),
                )
            )
    else:
        shard_counts = [
            _discover_shard(shard, opts, config, langid, tagger_model, pdtb_forms, part)
            for shard, part in zip(args.inputs, parts)
        ]
    _concatenate(parts, args.out)
    counts = extraction.DiscoveryCounts()
    for c in shard_counts:
        counts.merge(c)
    lexicon = extraction.build_lexicon(
        counts.marker_counts, pdtb_forms, opts["min_count"], counts.pos_matched
    )
    if args.lexicon:
        lexicon.save(args.lexicon)
    if args.freq:
        payload = counts.to_dict()
        payload["schema_version"] = 1
        payload["min_count"] = opts["min_count"]
        payload["config"] = _manifest_config(opts)
        with open(args.freq, "w", encoding="utf-8") as f:
            f.write(canonical_json(payload))
    emitted = sum(counts.marker_counts.values())
    print(
        f"discover: {emitted} instances, {len(counts.marker_counts)} candidate markers, "
        f"{len(lexicon.entries)} above min_count={opts['min_count']}",
        file=sys.stderr,
    )
    return 0


def cmd_tagger_train(args) -> int:
    opts = resolve_options(args, "tagger-train")
    corpus = tagger.load_tagged_corpus(args.corpus)
    model = tagger.train_tagger(
        corpus,
        epochs=opts["epochs"],
        seed=opts["seed"],
        dict_min_count=opts["dict_min_count"],
        dict_purity=opts["dict_purity"],
    )
    model.save(args.out)
    print(f"tagger-train: {len(corpus)} sentences, {len(model.tagset)} tags -> {args.out}", file=sys.stderr)
    return 0


def cmd_langid_train(args) -> int:
    opts = resolve_options(args, "langid-train")
    fcfg = linclass.FeatureConfig(
        bucket_count=opts["buckets"],
        ngram_max=1,
        granularity="char",
        char_ngram_range=(opts["char_min"], opts["char_max"]),
    )
    examples = []
    with open(args.labeled, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            label, _, text = line.partition("\t")
            if not text:
                raise ConfigError(f"{args.labeled}:{lineno}: expected label<TAB>text")
            examples.append((linclass.featurize(text.lower().split(), fcfg), label))
    model = linclass.train(examples, fcfg, _train_config(opts))
    model.save(args.out)
    print(f"langid-train: {len(examples)} sentences, labels {model.labels} -> {args.out}", file=sys.stderr)
    return 0


def _read_instances(path, jsonl: bool):
    return tsvio.read_instances(path, jsonl=jsonl)


def cmd_classify_train(args) -> int:
    opts = resolve_options(args, "classify-train")
    instances = _read_instances(args.instances, opts["jsonl"])
    fcfg = _word_feature_config(opts, opts["mode"])
    data = [
        (linclass.instance_features(inst, opts["mode"], fcfg), inst.marker)
        for inst in instances
    ]
    model = linclass.train(data, fcfg, _train_config(opts))
    model.save(args.out)
    print(f"classify-train: {len(data)} instances, {len(model.labels)} labels -> {args.out}", file=sys.stderr)
    return 0


def cmd_classify_eval(args) -> int:
    opts = resolve_options(args, "classify-eval")
    model = linclass.load_model(args.model)
    instances = _read_instances(args.instances, opts["jsonl"])
    mode = "pair" if model.feature_config.side_prefixing else "s2_only"
    k = max(opts["k_for_hit"], 5)
    predictions = [
        linclass.predict_topk(model, linclass.instance_features(inst, mode, model.feature_config), k)
        for inst in instances
    ]
    gold = [inst.marker for inst in instances]
    report = analysis.accuracy_report(predictions, gold, k_for_hit=opts["k_for_hit"])
    payload = report.to_dict()
    bottom, top = analysis.extremes(report, 5)
    payload["hardest"] = bottom
    payload["easiest"] = top
    with open(args.report, "w", encoding="utf-8") as f:
        f.write(canonical_json(payload))
    if args.figure:
        from .figures import accuracy_figure

        accuracy_figure(report, args.figure)
    print(f"classify-eval: overall top-{opts['k_for_hit']} accuracy {report.overall:.4f}", file=sys.stderr)
    return 0


def cmd_kfold(args) -> int:
    opts = resolve_options(args, "kfold")
    instances = _read_instances(args.instances, opts["jsonl"])
    fcfg = _word_feature_config(opts, opts["mode"])
    predictions = linclass.kfold_predictions(
        instances,
        k=opts["k"],
        mode=opts["mode"],
        train_config=_train_config(opts),
        feature_config=fcfg,
        topk=opts["topk"],
    )
    tsvio.write_predictions(args.out, predictions)
    print(f"kfold: {len(predictions)} out-of-fold predictions -> {args.out}", file=sys.stderr)
    return 0


def cmd_build(args) -> int:
    opts = resolve_options(args, "build")
    instances = _read_instances(args.instances, opts["jsonl"])
    checksums = {Path(args.instances).name: tsvio.sha256_file(args.instances)}

    predictions = None
    if args.predictions:
        rows = tsvio.read_predictions(args.predictions)
        if len(rows) != len(instances):
            raise ConfigError(
                f"{len(rows)} prediction rows do not match {len(instances)} instances"
            )
        predictions = [r.top_labels for r in rows]
        checksums[Path(args.predictions).name] = tsvio.sha256_file(args.predictions)
    if args.variant == "hard" and predictions is None:
        raise ConfigError("building the hard variant requires --predictions")

    lexicon = extraction.MarkerLexicon.load(args.lexicon) if args.lexicon else None
    if args.lexicon:
        checksums[Path(args.lexicon).name] = tsvio.sha256_file(args.lexicon)
    if args.variant == "adv" and lexicon is None:
        raise ConfigError("building the adv variant requires --lexicon")

    frequency_map = None
    if args.freq:
        with open(args.freq, encoding="utf-8") as f:
            frequency_map = {k: int(v) for k, v in json.load(f)["marker_counts"].items()}
    elif lexicon is not None:
        frequency_map = lexicon.counts()

    spec = datasets.VariantSpec(
        kind=args.variant,
        base_per_marker=opts["per_marker"],
        scale=opts["scale"],
        seed=opts["seed"],
    )

    # optional pre-reduction, keeping any predictions aligned by index
    if args.apply_min_count or args.apply_cap:
        keep = list(range(len(instances)))
        if args.apply_min_count:
            floor = spec.scaled(opts["min_count"])
            counts = frequency_map or _count_markers(instances)
            keep = [i for i in keep if counts.get(instances[i].marker, 0) >= floor]
        if args.apply_cap:
            keep = datasets.cap_subsample(
                keep, cap=spec.scaled(opts["cap"]), seed=opts["seed"],
                marker_of=lambda i: instances[i].marker,
            )
        instances = [instances[i] for i in keep]
        if predictions is not None:
            predictions = [predictions[i] for i in keep]

    aux = datasets.BuildAux(predictions=predictions, lexicon=lexicon, frequency_map=frequency_map)
    split = datasets.build_dataset(
        instances,
        spec,
        aux,
        proportions=_parse_proportions(opts["proportions"]),
        source_checksums=checksums,
    )
    split.manifest["config"] = _manifest_config(opts)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, part in split.parts().items():
        tsvio.write_instances(out / f"{name}.tsv", part, jsonl=False)
    markers = sorted({i.marker for i in split.train + split.valid + split.test})
    (out / "markers.txt").write_text("\n".join(markers) + "\n", encoding="utf-8")
    (out / "manifest.json").write_text(canonical_json(split.manifest), encoding="utf-8")
    if "shortfall" in split.manifest:
        print(f"build: warning: shortfall for {sorted(split.manifest['shortfall'])}", file=sys.stderr)
    print(f"build: {split.manifest['total']} instances ({args.variant}) -> {out}", file=sys.stderr)
    return 0


def _count_markers(instances) -> dict[str, int]:
    counts: dict[str, int] = {}
    for inst in instances:
        counts[inst.marker] = counts.get(inst.marker, 0) + 1
    return counts


def cmd_shuffle(args) -> int:
    opts = resolve_options(args, "shuffle")
    instances = _read_instances(args.instances, opts["jsonl"])
    shuffled = datasets.shuffle_within_labels(instances, seed=opts["seed"])
    tsvio.write_instances(args.out, shuffled, jsonl=opts["jsonl"])
    print(f"shuffle: {len(shuffled)} instances -> {args.out}", file=sys.stderr)
    return 0


def cmd_stats(args) -> int:
    opts = resolve_options(args, "stats")
    if args.freq_json:
        with open(args.freq_json, encoding="utf-8") as f:
            counts = {k: int(v) for k, v in json.load(f)["marker_counts"].items()}
    elif args.instances:
        counts = _count_markers(tsvio.read_instances(args.instances))
    else:
        raise ConfigError("stats needs an instances file or --freq-json")
    report = analysis.frequency_report(counts, cap=opts["cap"])
    with open(args.out, "w", encoding="utf-8") as f:
        for marker, count in report.rows:
            f.write(f"{marker}\t{count}\n")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as f:
            f.write(canonical_json(report.to_dict()))
    if args.figure:
        from .figures import frequency_figure

        frequency_figure(report, args.figure)
    print(f"stats: {len(report.rows)} markers -> {args.out}", file=sys.stderr)
    return 0


def cmd_export_embeddings(args) -> int:
    model = linclass.load_model(args.model)
    vectors = analysis.export_marker_vectors(model)
    analysis.write_marker_vectors(vectors, args.out)
    print(f"export-embeddings: {len(vectors)} x {model.dim} -> {args.out}", file=sys.stderr)
    return 0


# ── parser ────────────────────────────────────────────────────────────────────


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="markermine",
        description="Mine discourse markers from sentence-pair corpora and build datasets.",
    )
    parser.add_argument(
        "--version", action="store_true", help="print package and file-format versions"
    )
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("filter", help="apply sentence-pair quality filters")
    p.add_argument("inputs", nargs="+", help="input shards")
    p.add_argument("--out", required=True, help="accepted-pair TSV")
    p.add_argument("--stats", required=True, help="rejection-statistics JSON")
    p.add_argument("--langid", default=None, help="language-id model (default: bundled)")
    _add_options(p, "filter")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("discover", help="extract marker instances from pairs")
    p.add_argument("inputs", nargs="+", help="pair TSV shards")
    p.add_argument("--out", required=True, help="instance TSV")
    p.add_argument("--lexicon", default=None, help="marker lexicon output")
    p.add_argument("--freq", default=None, help="frequency report JSON output")
    p.add_argument("--tagger", default=None, help=f"tagger model (or ${ENV_TAGGER})")
    p.add_argument("--langid", default=None, help="language-id model (default: bundled)")
    p.add_argument("--pdtb", default=None, help="seed connective list (default: bundled)")
    _add_options(p, "discover")
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("tagger-train", help="train the averaged-perceptron tagger")
    p.add_argument("corpus", help="tagged corpus (word_TAG per token)")
    p.add_argument("--out", required=True, help="DMPT model file")
    _add_options(p, "tagger-train")
    p.set_defaults(func=cmd_tagger_train)

    p = sub.add_parser("langid-train", help="train the language-id classifier")
    p.add_argument("labeled", help="label<TAB>text training file")
    p.add_argument("--out", required=True, help="DMLC model file")
    _add_options(p, "langid-train")
    p.set_defaults(func=cmd_langid_train)

    p = sub.add_parser("classify-train", help="train the marker predictor")
    p.add_argument("instances", help="instance TSV")
    p.add_argument("--out", required=True, help="DMLC model file")
    _add_options(p, "classify-train")
    p.set_defaults(func=cmd_classify_train)

    p = sub.add_parser("classify-eval", help="evaluate a marker predictor")
    p.add_argument("model", help="DMLC model file")
    p.add_argument("instances", help="instance TSV")
    p.add_argument("--report", required=True, help="accuracy report JSON")
    p.add_argument("--figure", default=None, help="render extremes figure (PNG)")
    _add_options(p, "classify-eval")
    p.set_defaults(func=cmd_classify_eval)

    p = sub.add_parser("kfold", help="out-of-fold top-k predictions")
    p.add_argument("instances", help="instance TSV")
    p.add_argument("--out", required=True, help="predictions TSV")
    _add_options(p, "kfold")
    p.set_defaults(func=cmd_kfold)

    p = sub.add_parser("build", help="build a balanced dataset variant")
    p.add_argument("variant", choices=datasets.VARIANT_KINDS)
    p.add_argument("instances", help="instance TSV")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--predictions", default=None, help="kfold predictions TSV (hard)")
    p.add_argument("--lexicon", default=None, help="marker lexicon (adv, and counts)")
    p.add_argument("--freq", default=None, help="frequency JSON for pre-cap counts")
    p.add_argument("--apply-min-count", action="store_true",
                   help="drop markers under the scaled min_count before building")
    p.add_argument("--apply-cap", action="store_true",
                   help="reservoir-subsample each marker to the scaled cap before building")
    _add_options(p, "build")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("shuffle", help="within-label shuffle of second sentences")
    p.add_argument("instances", help="instance TSV")
    p.add_argument("--out", required=True, help="shuffled instance TSV")
    _add_options(p, "shuffle")
    p.set_defaults(func=cmd_shuffle)

    p = sub.add_parser("stats", help="marker frequency report")
    p.add_argument("instances", nargs="?", default=None, help="instance TSV")
    p.add_argument("--freq-json", default=None, help="frequency JSON from discover")
    p.add_argument("--out", required=True, help="sorted marker<TAB>count table")
    p.add_argument("--json", default=None, help="report JSON output")
    p.add_argument("--figure", default=None, help="render frequency figure (PNG)")
    _add_options(p, "stats")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("export-embeddings", help="unit-normalized marker vectors")
    p.add_argument("model", help="DMLC model file")
    p.add_argument("--out", required=True, help="embeddings TSV")
    _add_options(p, "export-embeddings")
    p.set_defaults(func=cmd_export_embeddings)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.version:
        print(f"markermine {__version__}")
        for name, version in FORMAT_VERSIONS.items():
            print(f"{name}: {version}")
        return 0
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return 2
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"markermine {args.command}: {exc}", file=sys.stderr)
        return 2
    except (MarkerMineError, OSError) as exc:
        print(f"markermine {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
