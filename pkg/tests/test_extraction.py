import pytest

from markermine import extraction as ex
from markermine.errors import FormatError
from markermine.filtering import FilterConfig, SentencePair, word_tokenize

from conftest import SAMPLE_MARKER, SAMPLE_PAIR, SAMPLE_S2_PRIME


class TestMatchCandidate:
    def test_sample_sentence(self, tagger_model, pdtb_forms):
        tokens = word_tokenize(SAMPLE_PAIR.s2)
        assert ex.match_candidate(tokens, tagger_model, pdtb_forms) == "happily"

    def test_intentional_false_positive(self, tagger_model, pdtb_forms):
        tokens = word_tokenize("Very, very cold.")
        assert ex.match_candidate(tokens, tagger_model, pdtb_forms) == "very"

    def test_no_comma_no_match(self, tagger_model, pdtb_forms):
        tokens = word_tokenize("But I'm often abroad.")
        assert ex.match_candidate(tokens, tagger_model, pdtb_forms) is None

    def test_non_alphabetic_first_token(self, tagger_model, pdtb_forms):
        assert ex.match_candidate(["1984", ",", "what", "a", "year"], tagger_model, pdtb_forms) is None
        assert ex.match_candidate(["well-known", ",", "he", "said"], tagger_model, pdtb_forms) is None

    def test_pdtb_seeding_without_adverb_tag(self, pdtb_forms):
        # a tagger whose dictionary pins "if" to IN: the POS clause fails,
        # so only the seeded-list clause can admit the candidate
        from markermine import tagger as tg

        sentences = [tg.parse_tagged_sentence("if_IN it_PRP rains_VBZ we_PRP stay_VB ._.")] * 25
        dict_tagger = tg.train_tagger(sentences, epochs=1, seed=0)
        assert dict_tagger.tag_dictionary["if"] == "IN"
        assert "if" in pdtb_forms
        tokens = ["if", ",", "you", "say", "so"]
        assert ex.match_candidate(tokens, dict_tagger, pdtb_forms) == "if"
        assert ex.match_candidate(tokens, dict_tagger, frozenset()) is None

    def test_too_few_tokens(self, tagger_model, pdtb_forms):
        assert ex.match_candidate([], tagger_model, pdtb_forms) is None
        assert ex.match_candidate(["however"], tagger_model, pdtb_forms) is None


class TestMakeInstance:
    def test_sample_instance(self):
        inst = ex.make_instance(SAMPLE_PAIR, SAMPLE_MARKER)
        assert inst == ex.Instance(SAMPLE_PAIR.s1, SAMPLE_S2_PRIME, SAMPLE_MARKER)

    def test_strip_and_recapitalize(self):
        pair = SentencePair(s1="It broke.", s2="However, it failed.")
        inst = ex.make_instance(pair, "however")
        assert inst.s2_prime == "It failed."

    def test_empty_remainder_rejected(self):
        assert ex.make_instance(SentencePair(s1="x y z", s2="So,"), "so") is None
        assert ex.make_instance(SentencePair(s1="x y z", s2="So,   "), "so") is None

    def test_remainder_repeating_pattern_rejected(self):
        pair = SentencePair(s1="x", s2="Again, again, it works.")
        assert ex.make_instance(pair, "again") is None

    def test_mismatched_marker_raises(self):
        with pytest.raises(ValueError):
            ex.make_instance(SentencePair(s1="a", s2="However, fine."), "meanwhile")

    def test_case_insensitive_marker_match(self):
        pair = SentencePair(s1="a b", s2="HOWEVER, IT WORKS")
        inst = ex.make_instance(pair, "however")
        assert inst.s2_prime == "IT WORKS"
        assert inst.marker == "however"


def fixture_pairs():
    clean = "the bakery sells fresh bread every single morning"
    return [
        SAMPLE_PAIR,                                                # candidate: happily
        SentencePair(s1=clean, s2="However, the price is quite high"),  # candidate: however
        SentencePair(s1=clean, s2="the second sentence has no marker"),
        SentencePair(s1=clean, s2="But there is no comma after it"),
        SentencePair(s1=clean, s2="too short"),                     # rejected by filter
        SentencePair(s1=clean, s2="je ne sais pas pourquoi il est parti"),  # not English
    ]


class TestDiscover:
    def test_fixture_counts(self, tagger_model, pdtb_forms, langid_model):
        stream, counts = ex.discover(
            fixture_pairs(), tagger_model, pdtb_forms, FilterConfig(), langid_model
        )
        instances = list(stream)
        assert len(instances) == 2
        assert counts.marker_counts == {"happily": 1, "however": 1}
        assert counts.pairs_seen == 6
        assert counts.pairs_passed == 4
        assert counts.rejections["too_short"] == 1
        assert counts.rejections["not_english"] == 1
        assert instances[0].s2_prime == SAMPLE_S2_PRIME

    def test_empty_stream(self, tagger_model, pdtb_forms, langid_model):
        stream, counts = ex.discover([], tagger_model, pdtb_forms, FilterConfig(), langid_model)
        assert list(stream) == []
        assert counts.marker_counts == {}

    def test_frequency_conservation(self, tagger_model, pdtb_forms, langid_model):
        stream, counts = ex.discover(
            fixture_pairs() * 3, tagger_model, pdtb_forms, FilterConfig(), langid_model
        )
        emitted = list(stream)
        assert sum(counts.marker_counts.values()) == len(emitted)

    def test_round_trip_invariant(self, tagger_model, pdtb_forms, langid_model):
        stream, _ = ex.discover(
            fixture_pairs(), tagger_model, pdtb_forms, FilterConfig(), langid_model
        )
        by_s1 = {p.s1 + p.s2: p for p in fixture_pairs()}
        for inst in stream:
            assert not inst.s2_prime.lower().startswith(inst.marker + ",")
            # the original s2 reconstructs as marker + ", " + lowercased s2'
            matches = [
                p for p in fixture_pairs()
                if p.s2.lower().startswith(inst.marker + ",")
            ]
            assert matches
            original = matches[0].s2
            rebuilt = inst.marker.capitalize() + ", " + inst.s2_prime[0].lower() + inst.s2_prime[1:]
            assert " ".join(rebuilt.split()) == " ".join(original.split())

    def test_prefiltered_skips_quality_checks(self, tagger_model, pdtb_forms):
        stream, counts = ex.discover_prefiltered(fixture_pairs(), tagger_model, pdtb_forms)
        instances = list(stream)
        # the French pair has no initial marker pattern, so output matches,
        # but nothing was rejected
        assert len(instances) == 2
        assert counts.pairs_passed == 6
        assert counts.rejections == {}


class TestBuildLexicon:
    def test_min_count_filter(self, pdtb_forms):
        lex = ex.build_lexicon({"a": 5, "b": 2}, frozenset(), min_count=3, pos_matched={"a", "b"})
        assert [e.form for e in lex.entries] == ["a"]

    def test_origins(self):
        pdtb = frozenset({"however", "so"})
        lex = ex.build_lexicon(
            {"happily": 4, "however": 4, "so": 4},
            pdtb,
            min_count=1,
            pos_matched={"happily", "however"},
        )
        origins = {e.form: e.origin for e in lex.entries}
        assert origins == {"happily": "discovered", "however": "both", "so": "pdtb"}

    def test_fallback_without_pos_info(self):
        lex = ex.build_lexicon({"happily": 2, "so": 2}, frozenset({"so"}), min_count=1)
        origins = {e.form: e.origin for e in lex.entries}
        assert origins == {"happily": "discovered", "so": "pdtb"}

    def test_ordering_desc_count_then_form(self):
        lex = ex.build_lexicon(
            {"b": 3, "a": 3, "c": 9}, frozenset(), min_count=1, pos_matched={"a", "b", "c"}
        )
        assert [e.form for e in lex.entries] == ["c", "a", "b"]

    def test_empty_result_warns(self):
        with pytest.warns(UserWarning):
            lex = ex.build_lexicon({"a": 1}, frozenset(), min_count=10, pos_matched={"a"})
        assert lex.entries == []

    def test_min_count_below_one(self):
        with pytest.raises(ValueError):
            ex.build_lexicon({}, frozenset(), min_count=0)

    def test_file_roundtrip(self, tmp_path):
        lex = ex.build_lexicon(
            {"x": 7, "y": 3}, frozenset({"y"}), min_count=1, pos_matched={"x"}
        )
        path = tmp_path / "lex.tsv"
        lex.save(path)
        loaded = ex.MarkerLexicon.load(path)
        assert loaded.entries == lex.entries

    def test_malformed_file(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("only two\tcolumns\n", encoding="utf-8")
        with pytest.raises(FormatError):
            ex.MarkerLexicon.load(path)


class TestInstanceInvariants:
    def test_empty_s2_prime(self):
        with pytest.raises(ValueError):
            ex.Instance(s1="a", s2_prime="", marker="so")

    def test_marker_with_whitespace_or_comma(self):
        with pytest.raises(ValueError):
            ex.Instance(s1="a", s2_prime="b", marker="so what")
        with pytest.raises(ValueError):
            ex.Instance(s1="a", s2_prime="b", marker="so,")

    def test_lexicon_form_must_be_lowercase(self):
        with pytest.raises(ValueError):
            ex.LexiconEntry("However", "pdtb", 1)


class TestPdtbList:
    def test_bundled_list_loads(self, pdtb_forms):
        assert "however" in pdtb_forms
        assert "meanwhile" in pdtb_forms
        assert all(f == f.lower() and " " not in f for f in pdtb_forms)
        assert len(pdtb_forms) > 50

    def test_comments_ignored(self, tmp_path):
        path = tmp_path / "markers.txt"
        path.write_text("# comment line\nfoo\nBAR  # inline\n\n", encoding="utf-8")
        assert ex.load_pdtb_forms(path) == frozenset({"foo", "bar"})
