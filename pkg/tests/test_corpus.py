import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from editeval.corpus import (
    EditedSentence,
    EditSegment,
    SegmentKind,
    deleted_byte_spans,
    parse_sentence,
    pre_edit_from_text,
    read_canonical_jsonl,
    read_corpus,
    reconstruct_post_edit,
    reconstruct_pre_edit,
    sentence_from_json_obj,
    sentence_to_json_obj,
    write_canonical_jsonl,
)
from editeval.errors import (
    CorpusParseError,
    EmptyInputError,
    EmptyResultError,
    EmptySpanError,
    NestedTagError,
    UnbalancedTagError,
)

from oracles import regex_words

K, D, I = SegmentKind.KEPT, SegmentKind.DELETED, SegmentKind.INSERTED


def seg(kind, text):
    return EditSegment(kind, text)


class TestParseSentence:
    def test_replacement_with_space_between_tags(self):
        s = parse_sentence(
            "The algorithm <del>descripted</del> <ins>described</ins> in the"
            " previous sections has several advantages."
        )
        assert s.segments == (
            seg(K, "The algorithm "),
            seg(D, "descripted"),
            seg(K, " "),
            seg(I, "described"),
            seg(K, " in the previous sections has several advantages."),
        )

    def test_tag_free_sentence_is_single_kept_segment(self):
        s = parse_sentence("No changes here.")
        assert s.segments == (seg(K, "No changes here."),)

    def test_partial_word_deletion_segments(self):
        s = parse_sentence("Let _MATH_ be the conjugate Holder<del>'s</del> function")
        assert s.segments == (
            seg(K, "Let _MATH_ be the conjugate Holder"),
            seg(D, "'s"),
            seg(K, " function"),
        )

    def test_leading_and_trailing_edit_segments(self):
        s = parse_sentence("<del>Basically, </del>the approach")
        assert s.segments[0] == seg(D, "Basically, ")
        s = parse_sentence("stored in the <ins>main database</ins>")
        assert s.segments[-1] == seg(I, "main database")

    def test_adjacent_same_kind_spans_merge(self):
        s = parse_sentence("a<del>b</del><del>c</del>d")
        assert s.segments == (seg(K, "a"), seg(D, "bc"), seg(K, "d"))

    def test_empty_input_rejected(self):
        with pytest.raises(EmptyInputError):
            parse_sentence("")

    def test_unclosed_tag_rejected(self):
        with pytest.raises(UnbalancedTagError):
            parse_sentence("a <del>b")

    def test_close_without_open_rejected(self):
        with pytest.raises(UnbalancedTagError):
            parse_sentence("a </del> b")

    def test_mismatched_close_rejected(self):
        with pytest.raises(UnbalancedTagError):
            parse_sentence("a <del>b</ins> c")

    def test_nested_tags_rejected(self):
        with pytest.raises(NestedTagError):
            parse_sentence("a <del>b <ins>c</ins></del> d")
        with pytest.raises(NestedTagError):
            parse_sentence("a <del>b <del>c</del></del> d")

    def test_empty_span_rejected(self):
        with pytest.raises(EmptySpanError):
            parse_sentence("a <ins></ins>b")
        with pytest.raises(EmptySpanError):
            parse_sentence("a <del></del>b")


class TestReconstruction:
    def test_pre_edit_drops_insertions(self, mini_sentences):
        pre = reconstruct_pre_edit(mini_sentences["8447.0"])
        assert pre.text == (
            "The algorithm descripted in the previous sections has several"
            " advantages."
        )

    def test_post_edit_drops_deletions(self, mini_sentences):
        assert reconstruct_post_edit(mini_sentences["8447.0"]) == (
            "The algorithm described in the previous sections has several"
            " advantages."
        )

    def test_deletion_only_sentence(self, mini_sentences):
        s = mini_sentences["662.3"]
        pre = reconstruct_pre_edit(s)
        assert pre.text.startswith(
            "However, we must note that we still have no means of deciding"
        )
        assert reconstruct_post_edit(s).startswith(
            "However, we still have no means of deciding"
        )

    def test_tag_free_sentence_is_identity(self):
        s = parse_sentence("No changes here.")
        assert reconstruct_pre_edit(s).text == "No changes here."
        assert reconstruct_post_edit(s) == "No changes here."

    def test_whitespace_carried_inside_spans(self):
        # "must note that we " keeps its trailing space; no re-spacing happens
        s = parse_sentence("we <del>must note that we </del>still have")
        assert reconstruct_pre_edit(s).text == "we must note that we still have"
        assert reconstruct_post_edit(s) == "we still have"

    def test_pre_edit_without_words_rejected(self):
        with pytest.raises(EmptyResultError):
            reconstruct_pre_edit(parse_sentence("<ins>added text</ins>"))
        with pytest.raises(EmptyResultError):
            reconstruct_pre_edit(parse_sentence("<ins>x</ins> "))

    def test_post_edit_without_text_rejected(self):
        with pytest.raises(EmptyResultError):
            reconstruct_post_edit(parse_sentence("<del>removed text</del>"))

    def test_word_indices_and_spans(self):
        pre = reconstruct_pre_edit(parse_sentence("We <del>recieved</del> the data"))
        assert [w.surface for w in pre.words] == ["We", "recieved", "the", "data"]
        assert [(w.start, w.end) for w in pre.words] == [
            (0, 2), (3, 11), (12, 15), (16, 20),
        ]

    def test_word_spans_are_byte_offsets(self, mini_sentences):
        pre = reconstruct_pre_edit(mini_sentences["t018"])
        raw = pre.text.encode("utf-8")
        word = pre.words[3]
        assert word.surface == "naïve"
        # 6 bytes for 5 characters
        assert word.end - word.start == 6
        assert raw[word.start : word.end].decode("utf-8") == word.surface

    def test_deleted_byte_spans(self, mini_sentences):
        spans = deleted_byte_spans(mini_sentences["t018"])
        pre = reconstruct_pre_edit(mini_sentences["t018"])
        assert spans == [(16, 23)]
        assert pre.text.encode("utf-8")[16:23].decode("utf-8") == "naïve "

    def test_pre_edit_from_text_matches_reconstruction(self, mini_sentences):
        for s in mini_sentences.values():
            pre = reconstruct_pre_edit(s)
            assert pre_edit_from_text(pre.text) == pre


_text = st.text(
    alphabet=st.characters(blacklist_characters="<>", blacklist_categories=("Cs",)),
    min_size=1,
    max_size=12,
)


@st.composite
def canonical_sentences(draw):
    """Sentences whose markup contains no adjacent same-kind tag pairs."""
    n = draw(st.integers(min_value=1, max_value=8))
    kinds = []
    prev = None
    for _ in range(n):
        kind = draw(
            st.sampled_from([k for k in (K, D, I) if k is not prev])
        )
        kinds.append(kind)
        prev = kind
    return EditedSentence(
        "prop", tuple(EditSegment(kind, draw(_text)) for kind in kinds)
    )


class TestProperties:
    @given(canonical_sentences())
    def test_markup_round_trip(self, sentence):
        markup = sentence.to_markup()
        assert parse_sentence(markup, "prop") == sentence
        assert parse_sentence(markup, "prop").to_markup() == markup

    @given(canonical_sentences())
    def test_kept_text_appears_in_order_in_both_reconstructions(self, sentence):
        pre = "".join(
            s.text for s in sentence.segments if s.kind is not I
        )
        post = "".join(
            s.text for s in sentence.segments if s.kind is not D
        )
        for text in (pre, post):
            cursor = 0
            for s in sentence.segments:
                if s.kind is K:
                    cursor = text.find(s.text, cursor)
                    assert cursor >= 0
                    cursor += len(s.text)

    @given(st.text(max_size=60))
    @settings(max_examples=300)
    def test_word_tiling_matches_regex_oracle(self, text):
        expected = regex_words(text)
        got = [(w.start, w.end, w.surface) for w in pre_edit_from_text(text).words] \
            if expected else []
        if not expected:
            with pytest.raises(EmptyResultError):
                pre_edit_from_text(text)
            return
        assert got == expected
        # spans are ascending, non-overlapping, and indices count from 0
        words = pre_edit_from_text(text).words
        assert [w.index for w in words] == list(range(len(words)))
        for a, b in zip(words, words[1:]):
            assert a.end <= b.start

    @given(canonical_sentences())
    def test_canonical_json_round_trip(self, sentence):
        assert sentence_from_json_obj(sentence_to_json_obj(sentence)) == sentence


class TestSentenceInvariants:
    def test_empty_interior_kept_rejected(self):
        with pytest.raises(CorpusParseError):
            EditedSentence("x", (seg(D, "a"), seg(K, ""), seg(I, "b")))

    def test_empty_edit_text_rejected(self):
        with pytest.raises(CorpusParseError):
            EditedSentence("x", (seg(K, "a"), seg(D, "")))

    def test_adjacent_same_kind_rejected(self):
        with pytest.raises(CorpusParseError):
            EditedSentence("x", (seg(D, "a"), seg(D, "b")))

    def test_tagged_text_rejected(self):
        with pytest.raises(CorpusParseError):
            EditedSentence("x", (seg(K, "a <del>b</del>"),))

    def test_has_edits(self):
        assert not parse_sentence("plain").has_edits
        assert parse_sentence("a <del>b</del>").has_edits


class TestReaders:
    def test_lenient_skips_and_counts_non_record_lines(self, tmp_path):
        corpus = tmp_path / "c.txt"
        corpus.write_text(
            '<sentence sid="a">Good <del>x</del> <ins>y</ins> here.</sentence>\n'
            "this line is garbage\n"
            "\n"
            '<sentence sid="b">Also fine.</sentence>\n',
            encoding="utf-8",
        )
        sentences, report = read_corpus(corpus)
        assert [s.sid for s in sentences] == ["a", "b"]
        assert report.n_records == 2
        assert [line for line, _ in report.skipped_lines] == [2]

    def test_lenient_records_per_record_parse_errors(self, tmp_path):
        corpus = tmp_path / "c.txt"
        corpus.write_text(
            '<sentence sid="good">Fine text.</sentence>\n'
            '<sentence sid="bad">a <del>b</ins> c</sentence>\n',
            encoding="utf-8",
        )
        sentences, report = read_corpus(corpus)
        assert [s.sid for s in sentences] == ["good"]
        assert len(report.record_errors) == 1
        assert report.record_errors[0]["sid"] == "bad"
        assert report.record_errors[0]["error"] == "UnbalancedTagError"

    def test_strict_rejects_malformed_xml(self, tmp_path):
        corpus = tmp_path / "c.txt"
        corpus.write_text(
            '<sentence sid="a">Fine.</sentence>\n<sentence sid="c">broken\n',
            encoding="utf-8",
        )
        with pytest.raises(CorpusParseError):
            read_corpus(corpus, "strict")

    def test_strict_accepts_record_per_line_files(self, mini_corpus_path):
        sentences, report = read_corpus(mini_corpus_path, "strict")
        assert report.n_records == 33
        assert len(sentences) == 33

    def test_unknown_mode_rejected(self, mini_corpus_path):
        with pytest.raises(ValueError):
            read_corpus(mini_corpus_path, "fuzzy")

    def test_jsonl_file_round_trip(self, tmp_path, mini_sentences):
        path = tmp_path / "c.jsonl"
        originals = list(mini_sentences.values())
        assert write_canonical_jsonl(originals, path) == len(originals)
        assert list(read_canonical_jsonl(path)) == originals

    def test_jsonl_bad_record_rejected(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text(json.dumps({"sid": "x"}) + "\n", encoding="utf-8")
        with pytest.raises(CorpusParseError):
            list(read_canonical_jsonl(path))


class TestMiniCorpus:
    def test_every_record_parses(self, mini_sentences):
        assert len(mini_sentences) == 33

    def test_placeholder_tokens_are_ordinary_words(self, mini_sentences):
        pre = reconstruct_pre_edit(mini_sentences["t017"])
        assert pre.words[2].surface == "_MATH_"
