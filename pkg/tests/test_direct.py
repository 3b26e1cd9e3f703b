import numpy as np
import pytest

from kge_poison.attacks import Action, AttackConfig, direct_attack, score_add, score_delete, shift_vector, step_stability
from kge_poison.attacks.direct import benefit_scores, direct_candidates
from kge_poison.core import EmbeddingStore, ModelKind, Side, Triple, TripleStore, make_model
from kge_poison.errors import AttackAborted, NoCandidates, TargetInTrainingSet, ZeroResidual


def _first_unseen_target(store: TripleStore) -> Triple:
    """First (h, r, t) absent from the store whose head heads at least two facts."""
    for h in range(store.num_entities):
        if len(store.incident(h, Side.HEAD)) < 2:
            continue
        for r in range(store.num_relations):
            for t in range(store.num_entities):
                if t != h and (h, r, t) not in store:
                    return Triple(h, r, t)
    raise AssertionError("no target available")


@pytest.fixture
def attacked(random_store, make_embeddings):
    store = random_store(seed=3)
    kind = ModelKind.TRANSE
    return store, make_embeddings(kind, store.num_entities, store.num_relations, seed=3), make_model(kind)


# --- Shift ---

def test_shift_on_head_and_tail(transe):
    emb = EmbeddingStore(np.array([[0.0, 0.0], [3.0, 4.0]]), relation_vectors=np.zeros((1, 2)))
    np.testing.assert_allclose(shift_vector(emb, transe, Triple(0, 0, 1), Side.HEAD, 0.1), [-0.06, -0.08])
    np.testing.assert_allclose(shift_vector(emb, transe, Triple(0, 0, 1), Side.TAIL, 0.1), [0.06, 0.08])


def test_shift_for_rescal():
    emb = EmbeddingStore(np.array([[1.0, 2.0], [3.0, 4.0]]), relation_matrices=np.eye(2)[None])
    model = make_model(ModelKind.RESCAL)
    np.testing.assert_allclose(shift_vector(emb, model, Triple(0, 0, 1), Side.HEAD, 1.0), [-3.0, -4.0])
    np.testing.assert_allclose(shift_vector(emb, model, Triple(0, 0, 1), Side.HEAD, 1.0, promote=True), [3.0, 4.0])


def test_shift_of_exact_translation_is_an_error(transe):
    emb = EmbeddingStore(np.array([[0.0, 0.0], [1.0, 1.0]]), relation_vectors=np.array([[1.0, 1.0]]))
    with pytest.raises(ZeroResidual):
        shift_vector(emb, transe, Triple(0, 0, 1), Side.HEAD, 0.1)


# --- Benefit scores ---

def test_delete_score(transe):
    emb = EmbeddingStore(np.array([[0.0, 0.0], [1.0, 0.0]]), relation_vectors=np.zeros((1, 2)))
    eps_star = np.array([-2.0, 0.0])
    assert score_delete(emb, transe, 0, eps_star, Triple(0, 0, 1), 1.0) == pytest.approx(2.0)
    assert score_delete(emb, transe, 0, eps_star, Triple(0, 0, 1), 0.0) == pytest.approx(-1.0)


def test_add_score(transe):
    emb = EmbeddingStore(np.array([[0.0, 0.0], [4.0, 0.0]]), relation_vectors=np.zeros((1, 2)))
    assert score_add(emb, transe, 0, np.array([3.5, 0.0]), Triple(0, 0, 1), 1.0) == pytest.approx(3.5)


@pytest.mark.parametrize("kind", list(ModelKind))
@pytest.mark.parametrize("action", list(Action))
def test_vectorized_scores_match_single_scores(kind, action, random_store, make_embeddings):
    store = random_store(seed=2)
    emb = make_embeddings(kind, store.num_entities, store.num_relations, seed=2)
    model = make_model(kind)
    target = _first_unseen_target(store)
    cfg = AttackConfig(both_orientations=True, add_candidate_sample=0, lambda1=0.7, lambda2=1.3)
    candidates = direct_candidates(store, target, cfg, action)
    shift = np.random.default_rng(0).normal(size=emb.dim)
    benefits = benefit_scores(emb, model, candidates, shift, action, cfg.lambda1, cfg.lambda2)
    single = score_delete if action is Action.DELETE else score_add
    weight = cfg.lambda1 if action is Action.DELETE else cfg.lambda2
    for triple, at_head, benefit in zip(candidates.triples, candidates.at_head, benefits):
        side = Side.HEAD if at_head else Side.TAIL
        assert benefit == pytest.approx(single(emb, model, target.head, shift, Triple(*triple), weight, side))


# --- Candidate spaces ---

def test_delete_returns_every_incident_fact_under_a_large_budget(make_embeddings, transe):
    store = TripleStore([(0, 0, 1), (0, 1, 2), (0, 0, 3), (4, 0, 0)])
    emb = make_embeddings(ModelKind.TRANSE, 5, 2)
    result = direct_attack(store, emb, transe, Triple(0, 1, 4), AttackConfig(budget=4), Action.DELETE)
    assert sorted(p.triple for p in result) == [(0, 0, 1), (0, 0, 3), (0, 1, 2)]
    assert all(p.action is Action.DELETE for p in result)


def test_exhaustive_add_candidate_count():
    store = TripleStore([(0, 0, 1), (1, 1, 2), (2, 0, 3)], num_entities=4, num_relations=2)
    target = Triple(0, 1, 3)
    candidates = direct_candidates(store, target, AttackConfig(add_candidate_sample=0), Action.ADD)
    assert sorted(map(tuple, candidates.triples.tolist())) == [(0, 0, 2), (0, 0, 3), (0, 1, 1), (0, 1, 2)]
    with_loops = AttackConfig(add_candidate_sample=0, allow_self_loops=True)
    assert len(direct_candidates(store, target, with_loops, Action.ADD)) == 6


def test_sampled_add_candidates_are_per_target_deterministic(random_store):
    store = random_store(seed=4)
    target = _first_unseen_target(store)
    cfg = AttackConfig(add_candidate_sample=10, rng_seed=5)
    first = direct_candidates(store, target, cfg, Action.ADD)
    second = direct_candidates(store, target, cfg, Action.ADD)
    assert len(first) <= 10
    np.testing.assert_array_equal(first.triples, second.triples)


def test_isolated_entity_has_no_candidates(make_embeddings, transe):
    store = TripleStore([(0, 0, 1)], num_entities=3)
    emb = make_embeddings(ModelKind.TRANSE, 3, 1)
    with pytest.raises(NoCandidates) as info:
        direct_attack(store, emb, transe, Triple(2, 0, 0), AttackConfig(), Action.DELETE)
    assert info.value.entity == 2
    assert isinstance(info.value, AttackAborted)


def test_degenerate_target_aborts(transe):
    store = TripleStore([(0, 0, 1)], num_entities=3)
    emb = EmbeddingStore(np.array([[0.0, 0.0], [1.0, 1.0], [1.0, 0.0]]), relation_vectors=np.array([[0.0, 1.0]]))
    with pytest.raises(ZeroResidual):
        direct_attack(store, emb, transe, Triple(2, 0, 1), AttackConfig(add_candidate_sample=0), Action.ADD)


def test_target_in_training_set_rejected(chain_store, make_embeddings, transe):
    emb = make_embeddings(ModelKind.TRANSE, 3, 1)
    with pytest.raises(TargetInTrainingSet):
        direct_attack(chain_store, emb, transe, Triple(0, 0, 1), AttackConfig(), Action.DELETE)


# --- Selection ---

@pytest.mark.parametrize("action", list(Action))
def test_smaller_budget_is_a_prefix(action, attacked):
    store, emb, model = attacked
    target = _first_unseen_target(store)
    small = direct_attack(store, emb, model, target, AttackConfig(budget=1, add_candidate_sample=0), action)
    large = direct_attack(store, emb, model, target, AttackConfig(budget=5, add_candidate_sample=0), action)
    assert small == large[:1]
    benefits = [p.benefit for p in large]
    assert benefits == sorted(benefits, reverse=True)


@pytest.mark.parametrize("action", list(Action))
def test_perturbations_respect_membership(action, attacked):
    store, emb, model = attacked
    target = _first_unseen_target(store)
    result = direct_attack(store, emb, model, target, AttackConfig(budget=6, add_candidate_sample=0), action)
    assert len(set(p.triple for p in result)) == len(result)
    for p in result:
        assert p.triple.head == target.head
        assert (p.triple in store) is (action is Action.DELETE)
        assert p.triple != target


def test_attack_is_deterministic(attacked):
    store, emb, model = attacked
    target = _first_unseen_target(store)
    cfg = AttackConfig(budget=3, add_candidate_sample=8, rng_seed=1)
    assert direct_attack(store, emb, model, target, cfg, Action.ADD) == \
        direct_attack(store, emb, model, target, cfg, Action.ADD)


def test_ties_break_on_relation_then_entity(transe):
    store = TripleStore([(0, 1, 1), (0, 0, 3), (0, 0, 2)], num_entities=4, num_relations=2)
    emb = EmbeddingStore(np.zeros((4, 2)), relation_vectors=np.array([[1.0, 0.0], [1.0, 0.0]]))
    cfg = AttackConfig(budget=3, lambda1=0.0)
    result = direct_attack(store, emb, transe, Triple(0, 1, 3), cfg, Action.DELETE)
    assert [p.triple for p in result] == [(0, 0, 2), (0, 0, 3), (0, 1, 1)]
    assert {p.benefit for p in result} == {-1.0}


def test_tail_side_attacks_the_tail(attacked):
    store, emb, model = attacked
    tail = store[0].tail
    target = next(Triple(h, r, tail) for h in range(store.num_entities) for r in range(store.num_relations)
                  if h != tail and (h, r, tail) not in store)
    cfg = AttackConfig(budget=3, target_side=Side.TAIL)
    for p in direct_attack(store, emb, model, target, cfg, Action.DELETE):
        assert p.triple.tail == target.tail


def test_step_stability_reports_each_factor(attacked):
    store, emb, model = attacked
    target = _first_unseen_target(store)
    top = step_stability(store, emb, model, target, AttackConfig(eps_h=0.5), Action.DELETE)
    assert list(top) == [0.5, 1.0, 2.0]
    assert all(triple in store for triple in top.values())
