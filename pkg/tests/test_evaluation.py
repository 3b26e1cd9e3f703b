import numpy as np
import pytest

from kge_poison.core import EmbeddingStore, ModelKind, Side, Triple, make_model
from kge_poison.errors import EmptyResults
from kge_poison.evaluation import RankResult, aggregate, rank_target, rank_targets


def _line_store(values):
    """1-d RESCAL with M = [[1]]: f(h, r, t) = h * t."""
    return EmbeddingStore(np.array(values, dtype=float)[:, None], relation_matrices=np.ones((1, 1, 1)))


@pytest.fixture
def rescal():
    return make_model(ModelKind.RESCAL)


def test_true_head_scoring_highest_ranks_first(rescal):
    emb = _line_store([3.0, 1.0, 2.0])
    result = rank_target(emb, rescal, None, (0, 0, 1))
    assert result.head_rank == 1
    assert result.target == Triple(0, 0, 1)


def test_true_head_scoring_lowest_ranks_last(rescal):
    emb = _line_store([1.0, 2.0, 3.0, 4.0, 5.0])
    result = rank_target(emb, rescal, None, (0, 0, 4))
    assert result.head_rank == 5
    assert result.tail_rank == 1


def test_ties_do_not_count_against_the_truth(rescal):
    emb = _line_store([2.0, 2.0, 1.0, 0.5, 0.0])
    assert rank_target(emb, rescal, None, (1, 0, 2)).head_rank == 1


def test_rank_targets_keeps_order(rescal):
    emb = _line_store([1.0, 2.0, 3.0])
    results = rank_targets(emb, rescal, [(0, 0, 1), (2, 0, 0)])
    assert [r.target for r in results] == [(0, 0, 1), (2, 0, 0)]


def test_ranks_are_bounded_by_entity_count(make_embeddings):
    emb = make_embeddings(ModelKind.TRANSR, 9, 2)
    model = make_model(ModelKind.TRANSR)
    for result in rank_targets(emb, model, [(h, h % 2, (h + 3) % 9) for h in range(9)]):
        assert 1 <= result.head_rank <= 9
        assert 1 <= result.tail_rank <= 9


def test_mrr_over_one_side():
    results = [RankResult(Triple(0, 0, i), rank, 1) for i, rank in enumerate([1, 2, 4])]
    report = aggregate(results, side_only=Side.HEAD)
    assert report.mrr == pytest.approx(1.75 / 3)
    assert report.hits_at_10 == 1.0


def test_mrr_over_both_sides():
    report = aggregate([RankResult(Triple(0, 0, 1), 1, 2), RankResult(Triple(1, 0, 2), 4, 1)])
    assert report.mrr == pytest.approx((1 + 0.5 + 0.25 + 1) / 4)


def test_all_first_ranks():
    report = aggregate([RankResult(Triple(0, 0, 1), 1, 1)] * 3)
    assert report.mrr == 1.0
    assert report.hits_at_10 == 1.0


def test_hits_boundary_is_inclusive():
    assert aggregate([RankResult(Triple(0, 0, 1), 11, 11)]).hits_at_10 == 0.0
    assert aggregate([RankResult(Triple(0, 0, 1), 10, 11)]).hits_at_10 == 0.5


def test_empty_results_rejected():
    with pytest.raises(EmptyResults):
        aggregate([])


def test_report_dict_carries_flagged_targets():
    report = aggregate([RankResult(Triple(0, 0, 1), 1, 3)], flagged=[Triple(0, 0, 1)])
    data = report.to_dict()
    assert data["flagged"] == [[0, 0, 1]]
    assert data["per_target"][0] == {"head": 0, "relation": 0, "tail": 1, "head_rank": 1, "tail_rank": 3}


@pytest.mark.parametrize("side_only", [None, Side.HEAD, Side.TAIL])
def test_aggregate_ignores_target_order(side_only):
    rng = np.random.default_rng(11)
    results = [RankResult(Triple(i, 0, i + 1), int(rng.integers(1, 30)), int(rng.integers(1, 30)))
               for i in range(25)]
    expected = aggregate(results, side_only)
    for _ in range(5):
        shuffled = [results[i] for i in rng.permutation(len(results))]
        report = aggregate(shuffled, side_only)
        assert report.mrr == pytest.approx(expected.mrr)
        assert report.hits_at_10 == pytest.approx(expected.hits_at_10)
