"""
Direct attacks: perturb facts that involve the attacked entity itself.

The attacked entity should move by eps* = -eps_h * df/de (the steepest descent
of the target's plausibility). A delete candidate scores
    eta- = f(e, r, t') - lambda1 * f(e + eps*, r, t')
and an add candidate
    eta+ = f(e + eps*, r, t') - lambda2 * f(e, r, t'),
all with the clean embeddings. The Top-M candidates are returned.
"""
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..core.embeddings import EmbeddingStore
from ..core.models import ScoringModel
from ..core.triples import Side, Triple, TripleStore
from ..errors import NoCandidates, TargetInTrainingSet
from .base import Action, AttackConfig, Perturbation, target_rng
from .candidates import CandidateSet, add_candidates, delete_candidates


def shift_vector(emb: EmbeddingStore, model: ScoringModel, target: Triple, side: Side, eps_h: float,
                 promote: bool = False) -> np.ndarray:
    """Desired displacement of the attacked entity; raises ZeroResidual on a degenerate target."""
    g = model.grad(emb, *target)
    partial = g.d_head if side is Side.HEAD else g.d_tail
    return (eps_h if promote else -eps_h) * partial


def _entity_slot(cand: Triple, entity: int, side: Optional[Side]) -> Side:
    if side is not None:
        return side
    return Side.HEAD if cand.head == entity else Side.TAIL


def _clean_and_shifted(emb: EmbeddingStore, model: ScoringModel, cand: Triple, entity: int,
                       eps_star: np.ndarray, side: Optional[Side]) -> Tuple[float, float]:
    h, r, t = cand
    params = emb.relation(r)
    head, tail = emb.entity(h), emb.entity(t)
    clean = model.score_vectors(head, params, tail)
    if _entity_slot(cand, entity, side) is Side.HEAD:
        shifted = model.score_vectors(head + eps_star, params, tail)
    else:
        shifted = model.score_vectors(head, params, tail + eps_star)
    return clean, shifted


def score_delete(emb: EmbeddingStore, model: ScoringModel, target_entity: int, eps_star: np.ndarray,
                 cand: Triple, lambda1: float, side: Optional[Side] = None) -> float:
    clean, shifted = _clean_and_shifted(emb, model, cand, target_entity, eps_star, side)
    return clean - lambda1 * shifted


def score_add(emb: EmbeddingStore, model: ScoringModel, target_entity: int, eps_star: np.ndarray,
              cand: Triple, lambda2: float, side: Optional[Side] = None) -> float:
    clean, shifted = _clean_and_shifted(emb, model, cand, target_entity, eps_star, side)
    return shifted - lambda2 * clean


def benefit_scores(emb: EmbeddingStore, model: ScoringModel, candidates: CandidateSet, shift: np.ndarray,
                   action: Action, lambda1: float, lambda2: float) -> np.ndarray:
    """Vectorized eta- / eta+ of every candidate, the shift applied to the perturbed entity's slot."""
    if len(candidates) == 0:
        return np.zeros(0)
    heads, vectors, matrices, tails = model.gather(emb, candidates.triples)
    clean = model.scores(heads, vectors, matrices, tails)
    at_head = candidates.at_head[:, None]
    shifted = model.scores(np.where(at_head, heads + shift, heads), vectors, matrices,
                           np.where(at_head, tails, tails + shift))
    if action is Action.DELETE:
        return clean - lambda1 * shifted
    return shifted - lambda2 * clean


def rank_order(benefits: np.ndarray, candidates: CandidateSet, *extra_keys: np.ndarray) -> np.ndarray:
    """Indices by benefit descending, ties by (relation, other entity, slot, extra keys) ascending."""
    keys = list(reversed(extra_keys)) + [~candidates.at_head, candidates.others,
                                         candidates.triples[:, 1], -benefits]
    return np.lexsort(keys)


def check_target(store: TripleStore, target: Triple) -> None:
    if target in store:
        raise TargetInTrainingSet(tuple(target))


def direct_candidates(store: TripleStore, target: Triple, cfg: AttackConfig, action: Action) -> CandidateSet:
    """D_D or (sampled) D_A around the attacked entity; same space for informed and random attacks."""
    entity = target.entity(cfg.target_side)
    if action is Action.DELETE:
        candidates = delete_candidates(store, entity, cfg.target_side, cfg.both_orientations)
    else:
        candidates = add_candidates(store, entity, cfg.target_side, cfg.add_candidate_sample,
                                    rng=target_rng(cfg.rng_seed, target),
                                    allow_self_loops=cfg.allow_self_loops, exclude=[target])
    if len(candidates) == 0:
        raise NoCandidates(entity)
    return candidates


def direct_attack(store: TripleStore, emb: EmbeddingStore, model: ScoringModel, target: Triple,
                  cfg: AttackConfig, mode: Action) -> List[Perturbation]:
    target = Triple(*target)
    check_target(store, target)
    candidates = direct_candidates(store, target, cfg, mode)
    eps_star = shift_vector(emb, model, target, cfg.target_side, cfg.eps_h, cfg.promote)
    benefits = benefit_scores(emb, model, candidates, eps_star, mode, cfg.lambda1, cfg.lambda2)
    order = rank_order(benefits, candidates)[:cfg.budget]
    return [Perturbation(mode, Triple(*map(int, candidates.triples[i])), float(benefits[i])) for i in order]


def step_stability(store: TripleStore, emb: EmbeddingStore, model: ScoringModel, target: Triple,
                   cfg: AttackConfig, mode: Action, factors: Tuple[float, ...] = (0.5, 1.0, 2.0)) -> Dict[float, Triple]:
    """Top-1 candidate for each scaled step size; rankings depend on eps_h, so this is reported only."""
    out = {}
    for factor in factors:
        scaled = cfg.model_copy(update={"eps_h": cfg.eps_h * factor, "budget": 1})
        top = direct_attack(store, emb, model, target, scaled, mode)
        out[factor] = top[0].triple
    return out
