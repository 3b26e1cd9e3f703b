from typing import Dict, List, Optional, Type

from ..core.embeddings import EmbeddingStore
from ..core.models import ScoringModel
from ..core.triples import Triple, TripleStore
from .base import IndirectConfig, Perturbation, Strategy
from .baselines import random_direct, random_indirect
from .direct import direct_attack
from .indirect import indirect_attack

# --- Base Strategy Class ---

class AttackStrategy:
    """
    Generates the perturbations for one target against a fixed clean model.
    Strategies are read-only over the store and the embeddings, so one
    instance can serve many targets concurrently.
    """

    def __init__(self, strategy: Strategy, store: TripleStore, emb: Optional[EmbeddingStore],
                 model: Optional[ScoringModel], config: IndirectConfig):
        self.strategy = strategy
        self.store = store
        self.emb = emb
        self.model = model
        self.config = config

    @property
    def action(self):
        return self.strategy.action

    def generate(self, target: Triple) -> List[Perturbation]:
        raise NotImplementedError("Subclasses must implement abstract method 'generate'")


# --- Concrete Strategies ---

class DirectAttack(AttackStrategy):
    def generate(self, target):
        return direct_attack(self.store, self.emb, self.model, target, self.config, self.action)


class IndirectAttack(AttackStrategy):
    def generate(self, target):
        return indirect_attack(self.store, self.emb, self.model, target, self.config, self.action)


class RandomDirectAttack(AttackStrategy):
    def generate(self, target):
        cfg = self.config
        return random_direct(self.store, target, cfg.target_side, cfg.budget, self.action, cfg.rng_seed,
                             cfg.allow_self_loops, cfg.both_orientations)


class RandomIndirectAttack(AttackStrategy):
    def generate(self, target):
        cfg = self.config
        return random_indirect(self.store, target, cfg.target_side, cfg.k, cfg.budget, self.action,
                               cfg.rng_seed, cfg.allow_self_loops)


_REGISTRY: Dict[Strategy, Type[AttackStrategy]] = {
    Strategy.DIRECT_ADD: DirectAttack,
    Strategy.DIRECT_DELETE: DirectAttack,
    Strategy.INDIRECT_ADD: IndirectAttack,
    Strategy.INDIRECT_DELETE: IndirectAttack,
    Strategy.RANDOM_DA: RandomDirectAttack,
    Strategy.RANDOM_DD: RandomDirectAttack,
    Strategy.RANDOM_IA: RandomIndirectAttack,
    Strategy.RANDOM_ID: RandomIndirectAttack,
}


def make_strategy(strategy: Strategy, store: TripleStore, emb: Optional[EmbeddingStore] = None,
                  model: Optional[ScoringModel] = None, config: Optional[IndirectConfig] = None) -> AttackStrategy:
    """Creates the attack for a strategy name; random baselines need no embeddings."""
    config = config or IndirectConfig()
    cls = _REGISTRY[strategy]
    if not strategy.random and (emb is None or model is None):
        raise ValueError(f"strategy {strategy.value} needs trained embeddings and a scoring model")
    return cls(strategy, store, emb, model, config)
