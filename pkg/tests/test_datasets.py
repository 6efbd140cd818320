from collections import Counter
from fractions import Fraction

import pytest

from markermine import datasets as ds
from markermine.errors import BuildError
from markermine.extraction import Instance, LexiconEntry, MarkerLexicon


def mk(marker, i):
    return Instance(s1=f"first {marker} {i}", s2_prime=f"Second {marker} {i}", marker=marker)


def corpus(spec: dict[str, int]):
    return [mk(m, i) for m, n in spec.items() for i in range(n)]


class TestCapSubsample:
    def test_over_cap_keeps_exactly_cap(self):
        out = ds.cap_subsample(corpus({"a": 5}), cap=3, seed=0)
        assert len(out) == 3
        assert len({i.s2_prime for i in out}) == 3

    def test_under_cap_keeps_all(self):
        out = ds.cap_subsample(corpus({"a": 2}), cap=3, seed=0)
        assert len(out) == 2

    def test_per_marker_independent(self):
        out = ds.cap_subsample(corpus({"a": 10, "b": 2}), cap=4, seed=1)
        counts = Counter(i.marker for i in out)
        assert counts == {"a": 4, "b": 2}

    def test_deterministic(self):
        data = corpus({"a": 50, "b": 20})
        one = ds.cap_subsample(data, cap=7, seed=9)
        two = ds.cap_subsample(data, cap=7, seed=9)
        assert one == two

    def test_uniformity_rough(self):
        # every item should be kept roughly cap/n of the time over reseeds
        data = corpus({"a": 10})
        hits = Counter()
        runs = 400
        for seed in range(runs):
            for inst in ds.cap_subsample(data, cap=5, seed=seed):
                hits[inst.s2_prime] += 1
        for item, count in hits.items():
            assert 0.35 < count / runs < 0.65, (item, count / runs)

    def test_bad_cap(self):
        with pytest.raises(ValueError):
            ds.cap_subsample([], cap=0)


class TestApplyMinCount:
    def test_drops_rare_markers(self):
        data = corpus({"a": 3, "b": 1})
        out = ds.apply_min_count(data, {"a": 3, "b": 1}, min_count=2)
        assert {i.marker for i in out} == {"a"}

    def test_min_one_is_identity(self):
        data = corpus({"a": 3, "b": 1})
        assert ds.apply_min_count(data, {"a": 3, "b": 1}, min_count=1) == data

    def test_lexicon_counts_accepted(self):
        lex = MarkerLexicon([LexiconEntry("a", "discovered", 10)])
        data = corpus({"a": 2, "b": 2})
        out = ds.apply_min_count(data, lex, min_count=5)
        assert {i.marker for i in out} == {"a"}


class TestVariantSpec:
    def test_scale_applies(self):
        spec = ds.VariantSpec(kind="base", base_per_marker=10000, scale=Fraction(1, 1000))
        assert spec.per_marker(n_markers=174) == 10

    def test_big_doubles(self):
        spec = ds.VariantSpec(kind="big", base_per_marker=10, scale=Fraction(1))
        assert spec.per_marker(n_markers=3) == 20

    def test_ten_formula(self):
        spec = ds.VariantSpec(kind="ten", base_per_marker=10000, scale=Fraction(1))
        assert spec.per_marker(n_markers=174) == 174 * 10000 // 10

    def test_rejects_scale_below_one_instance(self):
        with pytest.raises(ValueError):
            ds.VariantSpec(kind="base", base_per_marker=100, scale=Fraction(1, 1000))

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            ds.VariantSpec(kind="weird")


class TestBuildBase:
    def test_exact_balance(self):
        data = corpus({"a": 5, "b": 5, "c": 5})
        spec = ds.VariantSpec(kind="base", base_per_marker=2)
        selected, manifest = ds.build_variant(data, spec)
        assert len(selected) == 6
        assert Counter(i.marker for i in selected) == {"a": 2, "b": 2, "c": 2}
        assert manifest["marker_counts"] == {"a": 2, "b": 2, "c": 2}

    def test_insufficient_names_markers(self):
        data = corpus({"a": 5, "b": 1})
        spec = ds.VariantSpec(kind="base", base_per_marker=3)
        with pytest.raises(BuildError, match="b"):
            ds.build_variant(data, spec)

    def test_deterministic(self):
        data = corpus({"a": 9, "b": 9})
        spec = ds.VariantSpec(kind="base", base_per_marker=4, seed=3)
        one, _ = ds.build_variant(data, spec)
        two, _ = ds.build_variant(data, spec)
        assert one == two


class TestBuildHard:
    def oracle_top1(self, data):
        return [[i.marker] + ["other"] * 4 for i in data]

    def never_hits(self, data):
        return [["w1", "w2", "w3", "w4", "w5"] for _ in data]

    def test_always_predicted_removes_everything(self):
        data = corpus({"a": 4, "b": 4})
        spec = ds.VariantSpec(kind="hard", base_per_marker=2)
        aux = ds.BuildAux(predictions=self.oracle_top1(data))
        with pytest.raises(BuildError):
            ds.build_variant(data, spec, aux)

    def test_never_predicted_equals_base(self):
        data = corpus({"a": 4, "b": 4})
        base, _ = ds.build_variant(data, ds.VariantSpec(kind="base", base_per_marker=2, seed=1))
        hard, manifest = ds.build_variant(
            data,
            ds.VariantSpec(kind="hard", base_per_marker=2, seed=1),
            ds.BuildAux(predictions=self.never_hits(data)),
        )
        assert hard == base
        assert manifest["removed_predictable"] == 0

    def test_top5_window(self):
        data = corpus({"a": 4, "b": 4})
        # gold appears at rank 6: outside the removal window
        preds = [["x1", "x2", "x3", "x4", "x5", i.marker] for i in data]
        hard, manifest = ds.build_variant(
            data, ds.VariantSpec(kind="hard", base_per_marker=2), ds.BuildAux(predictions=preds)
        )
        assert manifest["removed_predictable"] == 0

    def test_requires_predictions(self):
        data = corpus({"a": 4})
        with pytest.raises(ValueError):
            ds.build_variant(data, ds.VariantSpec(kind="hard", base_per_marker=2))

    def test_prediction_length_mismatch(self):
        data = corpus({"a": 4})
        with pytest.raises(ValueError):
            ds.build_variant(
                data, ds.VariantSpec(kind="hard", base_per_marker=2),
                ds.BuildAux(predictions=[["a"]]),
            )


class TestBuildAdv:
    def lexicon(self):
        return MarkerLexicon([
            LexiconEntry("a", "discovered", 50),
            LexiconEntry("b", "pdtb", 40),
            LexiconEntry("c", "both", 30),
        ])

    def test_discards_pdtb_only(self):
        data = corpus({"a": 3, "b": 3, "c": 3})
        selected, manifest = ds.build_variant(
            data, ds.VariantSpec(kind="adv", base_per_marker=2), ds.BuildAux(lexicon=self.lexicon())
        )
        assert {i.marker for i in selected} == {"a", "c"}
        assert manifest["discarded_markers"] == ["b"]

    def test_requires_lexicon(self):
        with pytest.raises(ValueError):
            ds.build_variant(corpus({"a": 3}), ds.VariantSpec(kind="adv", base_per_marker=2))


class TestBuildTen:
    def test_requires_ten_markers(self):
        data = corpus({f"m{i}": 3 for i in range(9)})
        with pytest.raises(BuildError):
            ds.build_variant(data, ds.VariantSpec(kind="ten", base_per_marker=10))

    def test_total_matches_base(self):
        data = corpus({f"m{i:02d}": 30 for i in range(12)})
        base, _ = ds.build_variant(data, ds.VariantSpec(kind="base", base_per_marker=10))
        freq = {f"m{i:02d}": 100 - i for i in range(12)}
        ten, manifest = ds.build_variant(
            data, ds.VariantSpec(kind="ten", base_per_marker=10), ds.BuildAux(frequency_map=freq)
        )
        assert len(ten) == len(base)  # 12 markers x 10 == 10 markers x 12
        assert len(manifest["kept_markers"]) == 10
        assert set(manifest["kept_markers"]) == {f"m{i:02d}" for i in range(10)}


class TestBuildBig:
    def test_doubles_or_shortfalls(self):
        data = corpus({"a": 50, "b": 15})
        selected, manifest = ds.build_variant(data, ds.VariantSpec(kind="big", base_per_marker=10))
        counts = Counter(i.marker for i in selected)
        assert counts == {"a": 20, "b": 15}
        assert manifest["shortfall"] == {"b": 15}

    def test_no_shortfall_entry_when_full(self):
        data = corpus({"a": 50})
        _, manifest = ds.build_variant(data, ds.VariantSpec(kind="big", base_per_marker=10))
        assert "shortfall" not in manifest


class TestSplit:
    def test_twenty_instances_split_18_1_1(self):
        split = ds.split_dataset(corpus({"a": 20}), (0.9, 0.05, 0.05), seed=0)
        assert (len(split.train), len(split.valid), len(split.test)) == (18, 1, 1)

    def test_disjoint_and_covering(self):
        data = corpus({"a": 17, "b": 23})
        split = ds.split_dataset(data, seed=5)
        everything = split.train + split.valid + split.test
        assert len(everything) == len(data)
        assert Counter(map(id, everything)) == Counter(map(id, everything))
        keys = [(i.s1, i.s2_prime, i.marker) for i in everything]
        assert sorted(keys) == sorted((i.s1, i.s2_prime, i.marker) for i in data)

    def test_stratified_within_one(self):
        data = corpus({"a": 40, "b": 21})
        split = ds.split_dataset(data, (0.5, 0.25, 0.25), seed=2)
        for marker, n in (("a", 40), ("b", 21)):
            tr = sum(i.marker == marker for i in split.train)
            assert abs(tr - n * 0.5) <= 1

    def test_same_seed_identical(self):
        data = corpus({"a": 30, "b": 12})
        one = ds.split_dataset(data, seed=8)
        two = ds.split_dataset(data, seed=8)
        assert one.train == two.train and one.valid == two.valid and one.test == two.test

    def test_bad_proportions(self):
        with pytest.raises(ValueError):
            ds.split_dataset([], (0.5, 0.5, 0.5))


class TestShuffleWithinLabels:
    def test_single_instance_identity(self):
        part = [mk("a", 0)]
        assert ds.shuffle_within_labels(part, seed=3) == part

    def test_multiset_preserved_per_marker(self):
        part = corpus({"a": 7, "b": 5})
        out = ds.shuffle_within_labels(part, seed=11)
        for marker in ("a", "b"):
            before = sorted(i.s2_prime for i in part if i.marker == marker)
            after = sorted(i.s2_prime for i in out if i.marker == marker)
            assert before == after
        # s1 and marker columns untouched, order preserved
        assert [(i.s1, i.marker) for i in out] == [(i.s1, i.marker) for i in part]

    def test_frozen_permutation_regression(self):
        part = [Instance(s1=f"s1-{i}", s2_prime=f"second-{i}", marker="m") for i in range(3)]
        out42 = ds.shuffle_within_labels(part, seed=42)
        assert [i.s2_prime for i in out42] == ["second-2", "second-1", "second-0"]
        out7 = ds.shuffle_within_labels(part, seed=7)
        assert [i.s2_prime for i in out7] == ["second-0", "second-2", "second-1"]

    def test_seed_determinism(self):
        part = corpus({"a": 9, "b": 4})
        assert ds.shuffle_within_labels(part, 13) == ds.shuffle_within_labels(part, 13)


class TestBuildDataset:
    def test_shuffled_variant_shuffles_each_part(self):
        data = corpus({"a": 40, "b": 40})
        spec = ds.VariantSpec(kind="shuffled", base_per_marker=30, seed=2)
        split = ds.build_dataset(data, spec)
        plain = ds.build_dataset(data, ds.VariantSpec(kind="base", base_per_marker=30, seed=2))
        for part, base_part in zip(split.parts().values(), plain.parts().values()):
            assert [(i.s1, i.marker) for i in part] == [(i.s1, i.marker) for i in base_part]
            for marker in ("a", "b"):
                assert sorted(i.s2_prime for i in part if i.marker == marker) == sorted(
                    i.s2_prime for i in base_part if i.marker == marker
                )

    def test_manifest_reproducible(self):
        data = corpus({"a": 30, "b": 30})
        spec = ds.VariantSpec(kind="base", base_per_marker=10, seed=4)
        one = ds.build_dataset(data, spec, source_checksums={"in.tsv": "abc"})
        two = ds.build_dataset(data, spec, source_checksums={"in.tsv": "abc"})
        assert ds.canonical_json(one.manifest) == ds.canonical_json(two.manifest)
        assert one.manifest["split_counts"]["a"] == {"train": 9, "valid": 0, "test": 1}

    def test_markers_subset_relations(self):
        data = corpus({f"m{i:02d}": 25 for i in range(11)})
        lex = MarkerLexicon(
            [LexiconEntry(f"m{i:02d}", "discovered" if i % 2 else "pdtb", 25) for i in range(11)]
        )
        base, _ = ds.build_variant(data, ds.VariantSpec(kind="base", base_per_marker=5))
        adv, _ = ds.build_variant(
            data, ds.VariantSpec(kind="adv", base_per_marker=5), ds.BuildAux(lexicon=lex)
        )
        ten, _ = ds.build_variant(data, ds.VariantSpec(kind="ten", base_per_marker=5))
        hard, _ = ds.build_variant(
            data, ds.VariantSpec(kind="hard", base_per_marker=5),
            ds.BuildAux(predictions=[["x"] * 5 for _ in data]),
        )
        markers = lambda sel: {i.marker for i in sel}
        assert markers(adv) <= markers(base)
        assert markers(ten) <= markers(base) and len(markers(ten)) == 10
        assert markers(hard) == markers(base)
