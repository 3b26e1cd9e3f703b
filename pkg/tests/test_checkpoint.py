import numpy as np
import pytest

from kge_poison.core import ModelKind, TripleStore, dataset_hash, load_checkpoint, load_metadata, save_checkpoint
from kge_poison.core.checkpoint import MAGIC
from kge_poison.training import TrainConfig, Trainer


@pytest.mark.parametrize("kind", list(ModelKind))
def test_checkpoint_round_trip(tmp_path, kind, make_embeddings):
    emb = make_embeddings(kind, 5, 2, dim=4)
    path = save_checkpoint(tmp_path / "model.kgeb", emb, kind, {"seed": 7})
    loaded_kind, loaded = load_checkpoint(path)
    assert loaded_kind is kind
    np.testing.assert_array_equal(loaded.entities, emb.entities.astype(np.float32))
    if kind.uses_vectors:
        np.testing.assert_array_equal(loaded.relation_vectors, emb.relation_vectors.astype(np.float32))
    else:
        assert loaded.relation_vectors is None
    if kind.uses_matrices:
        np.testing.assert_array_equal(loaded.relation_matrices, emb.relation_matrices.astype(np.float32))
    assert load_metadata(path) == {"model": kind.value, "seed": 7}


def test_header_layout(tmp_path, make_embeddings):
    emb = make_embeddings(ModelKind.TRANSE, 3, 2, dim=4)
    raw = save_checkpoint(tmp_path / "m.kgeb", emb, ModelKind.TRANSE).read_bytes()
    assert raw[:4] == MAGIC
    assert np.frombuffer(raw, dtype="<u4", count=5, offset=4).tolist() == [1, 0, 3, 2, 4]
    assert len(raw) == 4 + 5 * 4 + (3 * 4 + 2 * 4) * 4


def test_rejects_foreign_files(tmp_path):
    path = tmp_path / "junk.kgeb"
    path.write_bytes(b"NOPE" + bytes(20))
    with pytest.raises(ValueError):
        load_checkpoint(path)


def test_rejects_trailing_bytes(tmp_path, make_embeddings):
    path = save_checkpoint(tmp_path / "m.kgeb", make_embeddings(ModelKind.TRANSE, 3, 1, dim=2), ModelKind.TRANSE)
    path.write_bytes(path.read_bytes() + b"\x00")
    with pytest.raises(ValueError):
        load_checkpoint(path)


def test_dataset_hash_depends_on_content():
    a = TripleStore([(0, 0, 1), (1, 0, 2)])
    assert dataset_hash(a) == dataset_hash(TripleStore([(0, 0, 1), (1, 0, 2)]))
    assert dataset_hash(a) != dataset_hash(TripleStore([(0, 0, 1)]))


def test_training_twice_gives_identical_checkpoints(tmp_path, chain_store):
    config = TrainConfig(dim=8, epochs=5, seed=3)
    first = save_checkpoint(tmp_path / "a.kgeb", Trainer(ModelKind.TRANSE, config).fit(chain_store), ModelKind.TRANSE)
    second = save_checkpoint(tmp_path / "b.kgeb", Trainer(ModelKind.TRANSE, config).fit(chain_store), ModelKind.TRANSE)
    assert first.read_bytes() == second.read_bytes()
