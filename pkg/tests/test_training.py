import numpy as np
import pytest
from pydantic import ValidationError

from kge_poison.core import ModelKind, TripleStore, make_model
from kge_poison.errors import EmptyStore
from kge_poison.evaluation import rank_target
from kge_poison.training import TrainConfig, Trainer, init_embeddings, train


def test_init_respects_uniform_bound():
    emb = init_embeddings(ModelKind.TRANSE, 40, 5, 50, seed=1)
    bound = 6 / np.sqrt(50)
    assert np.abs(emb.entities).max() <= bound
    assert np.abs(emb.relation_vectors).max() <= bound


def test_init_transr_projections_are_identity():
    emb = init_embeddings(ModelKind.TRANSR, 4, 3, 5, seed=0)
    for r in range(3):
        np.testing.assert_array_equal(emb.relation_matrices[r], np.eye(5))


def test_init_is_seed_determined():
    assert init_embeddings(ModelKind.RESCAL, 6, 2, 4, seed=9).equals(init_embeddings(ModelKind.RESCAL, 6, 2, 4, seed=9))
    assert not init_embeddings(ModelKind.RESCAL, 6, 2, 4, seed=9).equals(init_embeddings(ModelKind.RESCAL, 6, 2, 4, seed=8))


def test_init_rejects_empty_counts():
    with pytest.raises(ValueError):
        init_embeddings(ModelKind.TRANSE, 0, 1, 4, seed=0)


def test_config_invariants():
    with pytest.raises(ValidationError):
        TrainConfig(dim=0)
    with pytest.raises(ValidationError):
        TrainConfig(margin=0.0)
    with pytest.raises(ValidationError):
        TrainConfig(learning_rate=-1.0)


def test_empty_store_is_rejected():
    with pytest.raises(EmptyStore):
        train(TripleStore(), ModelKind.TRANSE)


def test_zero_epochs_returns_initialization(chain_store):
    trainer = Trainer(ModelKind.TRANSR, TrainConfig(dim=4, epochs=0, seed=5))
    assert trainer.fit(chain_store).equals(trainer.initial_embeddings(chain_store))
    assert trainer.losses == []


@pytest.mark.parametrize("kind", list(ModelKind))
def test_same_seed_same_embeddings(kind, random_store):
    store = random_store(seed=1)
    config = TrainConfig(dim=6, epochs=4, batch_size=8, seed=11)
    assert train(store, kind, config).equals(train(store, kind, config))


def test_tiny_graph_learns_its_facts():
    # a, b, c, d = 0, 1, 2, 3
    store = TripleStore([(0, 0, 1), (2, 0, 3)])
    config = TrainConfig(dim=8, epochs=500, learning_rate=0.05, seed=0)
    emb = train(store, ModelKind.TRANSE, config)
    model = make_model(ModelKind.TRANSE)
    assert rank_target(emb, model, store, (0, 0, 1)).tail_rank <= 2
    assert rank_target(emb, model, store, (2, 0, 3)).tail_rank <= 2


def test_normalization_bounds_entity_norms(random_store):
    emb = train(random_store(seed=4), ModelKind.TRANSE, TrainConfig(dim=10, epochs=3, learning_rate=0.5, seed=1))
    assert np.linalg.norm(emb.entities, axis=1).max() <= 1 + 1e-6


def test_loss_decreases_on_fixed_negatives(random_store):
    store = random_store(num_entities=10, num_triples=20, seed=6)
    config = TrainConfig(dim=8, epochs=60, batch_size=len(store), learning_rate=1e-3, fixed_negatives=True,
                         normalize_entities=False, seed=2)
    trainer = Trainer(ModelKind.TRANSE, config)
    trainer.fit(store)
    losses = np.array(trainer.losses)
    upticks = np.count_nonzero(np.diff(losses) > 0)
    assert upticks <= 0.05 * len(losses)
    assert losses[-1] < losses[0]


def test_epoch_progress_is_logged(chain_store, log_messages):
    train(chain_store, ModelKind.TRANSE, TrainConfig(dim=4, epochs=2))
    assert [m.split(",")[0] for m in log_messages if m.startswith("epoch")] == ["epoch 1", "epoch 2"]
    assert all("mean_loss" in m for m in log_messages if m.startswith("epoch"))


@pytest.mark.parametrize("config", [
    TrainConfig(dim=6, epochs=3, norm="l1"),
    TrainConfig(dim=6, epochs=3, threads=2, batch_size=4),
    TrainConfig(dim=6, epochs=3, negatives_per_positive=3),
])
def test_training_variants_stay_finite(config, random_store):
    assert train(random_store(seed=7), ModelKind.TRANSE, config).is_finite()


def test_rescal_with_regularization_stays_finite(random_store):
    config = TrainConfig(dim=6, epochs=10, regularization=0.01, learning_rate=0.05)
    emb = train(random_store(seed=8), ModelKind.RESCAL, config)
    assert emb.is_finite()
