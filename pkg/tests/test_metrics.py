import doctest
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

import editeval.metrics
from editeval.errors import (
    AlignmentError,
    EmptyInputError,
    RationaleNotInRankingError,
)
from editeval.metrics import (
    AggregateMetrics,
    ExampleMetrics,
    LABEL_SLICES,
    aggregate,
    aggregate_table,
    auprc,
    evaluate_example,
    in_label_slice,
    reciprocal_rank,
    top1_match,
)
from editeval.rationales import EditType, HumanRationale
from editeval.scores import ScoreRecord, TokenScore, WordRanking

import oracles


def test_module_doctests():
    results = doctest.testmod(editeval.metrics)
    assert results.attempted >= 4
    assert results.failed == 0


@st.composite
def ranking_cases(draw):
    n = draw(st.integers(min_value=1, max_value=8))
    order = draw(st.permutations(range(n)))
    rationale = draw(
        st.frozensets(st.integers(min_value=0, max_value=n - 1), min_size=1)
    )
    return list(order), rationale


class TestReciprocalRank:
    def test_rationale_filling_top_positions_is_perfect(self):
        assert reciprocal_rank([2, 3, 0, 1, 4], {2, 3}) == 1.0

    def test_removal_beats_plain_rank_average(self):
        # without removal the same ranking would average ranks 1 and 2
        plain = oracles.rr_no_removal([2, 3, 0, 1, 4], {2, 3})
        assert plain == pytest.approx(1 / 1.5)
        assert reciprocal_rank([2, 3, 0, 1, 4], {2, 3}) > plain

    def test_interleaved_hits(self):
        assert reciprocal_rank([0, 3, 1, 2, 4], {2, 3}) == 0.4

    @pytest.mark.parametrize("rank", [1, 2, 3, 4, 5])
    def test_single_word_rationale_gives_inverse_rank(self, rank):
        order = [0, 1, 2, 3, 4]
        assert reciprocal_rank(order, {order[rank - 1]}) == 1 / rank

    @given(ranking_cases())
    def test_matches_removal_simulation_oracle(self, case):
        order, rationale = case
        assert reciprocal_rank(order, rationale) == oracles.rr_removal(
            order, rationale
        )

    def test_empty_rationale_rejected(self):
        with pytest.raises(RationaleNotInRankingError):
            reciprocal_rank([0, 1], set())

    def test_rationale_outside_ranking_rejected(self):
        with pytest.raises(RationaleNotInRankingError):
            reciprocal_rank([0, 1], {0, 5})


class TestAuprc:
    def test_rationale_filling_top_positions_is_perfect(self):
        assert auprc([2, 3, 0, 1, 4], {2, 3}) == 1.0

    def test_interleaved_hits(self):
        assert auprc([0, 2, 1, 3, 4], {2, 3}) == 0.5
        assert auprc([2, 0, 3, 1, 4], {2, 3}) == pytest.approx(
            float(Fraction(5, 6))
        )

    @given(ranking_cases())
    def test_matches_sequential_oracle_exactly(self, case):
        order, rationale = case
        assert auprc(order, rationale) == oracles.average_precision(
            order, rationale
        )

    @given(ranking_cases())
    def test_matches_exact_fraction_oracle(self, case):
        order, rationale = case
        exact = oracles.average_precision_fraction(order, rationale)
        assert auprc(order, rationale) == pytest.approx(float(exact), abs=1e-12)

    def test_empty_rationale_rejected(self):
        with pytest.raises(RationaleNotInRankingError):
            auprc([0, 1], set())

    def test_rationale_outside_ranking_rejected(self):
        with pytest.raises(RationaleNotInRankingError):
            auprc([0, 1], {2})


class TestTop1:
    def test_single_word_rationale_on_top(self):
        assert top1_match([2, 0, 1], {2}) == 1.0

    def test_single_word_rationale_below_top(self):
        assert top1_match([0, 2, 1], {2}) == 0.0

    def test_multi_word_rationale_never_scores(self):
        # even a perfect ranking cannot earn the point with two words
        assert top1_match([2, 3, 0, 1, 4], {2, 3}) == 0.0

    @given(ranking_cases())
    def test_matches_oracle(self, case):
        order, rationale = case
        assert top1_match(order, rationale) == oracles.top1(order, rationale)


class TestMetricInvariants:
    @given(ranking_cases())
    def test_perfection_coincides_across_metrics(self, case):
        order, rationale = case
        rr = reciprocal_rank(order, rationale)
        ap = auprc(order, rationale)
        perfect = oracles.perfect_prefix(order, rationale)
        assert (rr == 1.0) == perfect
        assert (ap == 1.0) == perfect
        assert 0.0 < rr <= 1.0
        assert 0.0 < ap <= 1.0

    @given(ranking_cases())
    def test_single_word_rationales_tie_rr_and_auprc(self, case):
        order, rationale = case
        if len(rationale) == 1:
            rank = order.index(next(iter(rationale))) + 1
            assert reciprocal_rank(order, rationale) == auprc(order, rationale)
            assert reciprocal_rank(order, rationale) == 1 / rank


def make_inputs(sid="s1", order=(2, 3, 0, 1, 4), indices=(2, 3), prob=0.9):
    record = ScoreRecord(
        sid=sid,
        model_id="model-a",
        method="attention",
        layer=2,
        prob_needs_edit=prob,
        tokens=(TokenScore("x", 0, 1, 1.0),),
    )
    n = len(order)
    scores = [0.0] * n
    for pos, index in enumerate(order):
        scores[index] = float(n - pos)
    ranking = WordRanking.from_scores(sid, "attn", scores)
    assert ranking.order == tuple(order)
    rationale = HumanRationale(
        sid=sid,
        edit_type=EditType.SPELLING,
        word_indices=frozenset(indices),
        char_spans=((0, 1),),
    )
    return record, ranking, rationale


class TestEvaluateExample:
    def test_fields_and_metrics(self):
        example = evaluate_example(*make_inputs())
        assert example.sid == "s1"
        assert example.model_id == "model-a"
        assert example.method == "attention"
        assert example.aggregation == "attn"
        assert example.layer == 2
        assert example.edit_type == "spelling"
        assert example.rationale_size == 2
        assert example.rr == 1.0
        assert example.auprc == 1.0
        assert example.top1 == 0.0
        assert example.predicted_label is True
        assert example.prob_needs_edit == 0.9

    def test_top1_in_rationale_is_looser_than_top1(self):
        # two-word rationale holding the top spot: strict top1 stays 0
        example = evaluate_example(*make_inputs())
        assert example.top1 == 0.0
        assert example.top1_in_rationale is True

    def test_top1_in_rationale_false_when_top_word_misses(self):
        example = evaluate_example(
            *make_inputs(order=(0, 2, 3, 1, 4), indices=(2, 3))
        )
        assert example.top1_in_rationale is False

    def test_mismatched_sids_rejected(self):
        record, ranking, _ = make_inputs()
        _, _, other = make_inputs(sid="s2")
        with pytest.raises(AlignmentError):
            evaluate_example(record, ranking, other)

    def test_rationale_outside_ranking_rejected(self):
        record, ranking, _ = make_inputs()
        rationale = HumanRationale(
            sid="s1",
            edit_type=EditType.DELETED,
            word_indices=frozenset({40}),
            char_spans=((0, 1),),
        )
        with pytest.raises(RationaleNotInRankingError):
            evaluate_example(record, ranking, rationale)

    def test_json_round_trip(self):
        example = evaluate_example(*make_inputs())
        assert ExampleMetrics.from_json_dict(example.to_json_dict()) == example


def example(sid, *, edit_type="spelling", rr=1.0, ap=1.0, top1=1.0,
            predicted=True, model="model-a", layer=1):
    return ExampleMetrics(
        sid=sid,
        model_id=model,
        method="attention",
        aggregation="attn",
        layer=layer,
        edit_type=edit_type,
        rationale_size=1,
        rr=rr,
        auprc=ap,
        top1=top1,
        top1_in_rationale=top1 == 1.0,
        predicted_label=predicted,
        prob_needs_edit=0.9 if predicted else 0.1,
    )


class TestAggregate:
    def test_means(self):
        examples = [
            example("a", rr=1.0, ap=1.0, top1=1.0),
            example("b", rr=0.5, ap=0.25, top1=0.0),
        ]
        agg = aggregate(examples)
        assert agg.n_examples == 2
        assert agg.mean_rr == 0.75
        assert agg.mean_auprc == 0.625
        assert agg.mean_top1 == 0.5
        assert (agg.edit_type, agg.label_slice) == ("all", "all")

    def test_group_fields_copied(self):
        agg = aggregate([example("a")], edit_type="spelling", label_slice="correct")
        assert agg.model_id == "model-a"
        assert agg.method == "attention"
        assert agg.aggregation == "attn"
        assert agg.layer == 1
        assert agg.edit_type == "spelling"
        assert agg.label_slice == "correct"

    def test_empty_rejected(self):
        with pytest.raises(EmptyInputError):
            aggregate([])

    def test_mixed_models_rejected(self):
        with pytest.raises(AlignmentError):
            aggregate([example("a"), example("b", model="model-b")])

    def test_mixed_layers_rejected(self):
        with pytest.raises(AlignmentError):
            aggregate([example("a"), example("b", layer=2)])

    def test_json_dict_keys(self):
        obj = aggregate([example("a")]).to_json_dict()
        assert set(obj) == {
            "model_id", "method", "aggregation", "layer", "edit_type",
            "label_slice", "n_examples", "mean_rr", "mean_auprc", "mean_top1",
        }


class TestLabelSlices:
    def test_every_example_is_in_all(self):
        assert in_label_slice(example("a", predicted=False), "all")

    def test_correct_means_predicted_needs_edit(self):
        assert in_label_slice(example("a", predicted=True), "correct")
        assert not in_label_slice(example("a", predicted=False), "correct")

    def test_wrong_means_predicted_no_edit(self):
        assert in_label_slice(example("a", predicted=False), "wrong")
        assert not in_label_slice(example("a", predicted=True), "wrong")

    def test_unknown_slice_rejected(self):
        with pytest.raises(ValueError):
            in_label_slice(example("a"), "mislabeled")

    def test_slices_partition(self):
        for predicted in (True, False):
            ex = example("a", predicted=predicted)
            assert in_label_slice(ex, "correct") != in_label_slice(ex, "wrong")


class TestAggregateTable:
    @pytest.fixture
    def examples(self):
        return [
            example("a", edit_type="spelling", predicted=True, rr=1.0),
            example("b", edit_type="spelling", predicted=False, rr=0.5),
            example("c", edit_type="deleted", predicted=True, rr=0.25),
            example("d", edit_type="deleted", predicted=True, rr=1.0),
        ]

    def test_rows_cover_present_combinations_in_order(self, examples):
        rows = aggregate_table(examples)
        assert [(r.edit_type, r.label_slice, r.n_examples) for r in rows] == [
            ("all", "all", 4),
            ("all", "correct", 3),
            ("all", "wrong", 1),
            ("deleted", "all", 2),
            ("deleted", "correct", 2),
            ("spelling", "all", 2),
            ("spelling", "correct", 1),
            ("spelling", "wrong", 1),
        ]

    def test_empty_combinations_left_out(self, examples):
        rows = aggregate_table(examples)
        assert ("deleted", "wrong") not in {
            (r.edit_type, r.label_slice) for r in rows
        }

    def test_slice_means(self, examples):
        rows = {(r.edit_type, r.label_slice): r for r in aggregate_table(examples)}
        assert rows[("all", "all")].mean_rr == pytest.approx(2.75 / 4)
        assert rows[("all", "wrong")].mean_rr == 0.5
        assert rows[("deleted", "all")].mean_rr == 0.625

    def test_label_slice_names(self):
        assert LABEL_SLICES == ("all", "correct", "wrong")

    def test_single_group_requirement_still_enforced(self):
        mixed = [example("a"), example("b", model="model-b")]
        with pytest.raises(AlignmentError):
            aggregate_table(mixed)
