"""
Indirect attacks: perturb facts around a proxy entity K hops away from the
attacked entity and let training carry the change back along the path.

The desired shift of the attacked entity is handed from entity to entity along
each path. For a hop known -> nbr the neighbor's shift maximizes, to first order,
    f(known + shift, r, nbr + eps) - f(known, r, nbr + eps)
on the sphere ||eps|| = eps_h, i.e. eps_h times the normalized difference of
the two partial derivatives at eps = 0. Candidates on the proxy are scored like
direct ones and discounted by the degree penalty of the intermediate entities:
    psi = eta - lambda * log(mean(deg) + max(deg)).
"""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from loguru import logger

from ..core.embeddings import EmbeddingStore
from ..core.models import ScoringModel
from ..core.paths import DirectedHop, Orientation, PathCandidate, enumerate_paths
from ..core.triples import Side, Triple, TripleStore
from ..errors import NoCandidates, NoPaths, ZeroGradient
from .base import Action, IndirectConfig, IndirectDetails, Perturbation, target_rng
from .candidates import CandidateSet, add_candidates, delete_candidates
from .direct import benefit_scores, check_target, rank_order, shift_vector


@dataclass
class ShiftChain:
    path: PathCandidate
    shifts: List[np.ndarray] = field(default_factory=list)

    @property
    def proxy_shift(self) -> np.ndarray:
        return self.shifts[-1]


def transfer_shift(emb: EmbeddingStore, model: ScoringModel, known_entity: int, known_shift: np.ndarray,
                   hop: DirectedHop, eps_h: float) -> np.ndarray:
    """Shift of hop.neighbor that best follows `known_shift` of `known_entity`, scaled to norm eps_h."""
    known = emb.entity(known_entity)
    nbr = emb.entity(hop.neighbor)
    params = emb.relation(hop.relation)
    vector = params.vector[None] if params.vector is not None else None
    matrix = params.matrix[None] if params.matrix is not None else None
    known_rows = np.stack([known + known_shift, known])
    nbr_rows = np.stack([nbr, nbr])
    vectors = np.repeat(vector, 2, axis=0) if vector is not None else None
    matrices = np.repeat(matrix, 2, axis=0) if matrix is not None else None

    # zero residuals get a zero subgradient here instead of aborting
    if hop.orientation is Orientation.NEIGHBOR_IS_TAIL:
        partials = model.gradients(known_rows, vectors, matrices, nbr_rows).d_tail
    else:
        partials = model.gradients(nbr_rows, vectors, matrices, known_rows).d_head
    g = partials[0] - partials[1]
    length = float(np.linalg.norm(g))
    if length == 0.0 or not math.isfinite(length):
        raise ZeroGradient(known_entity, hop.neighbor)
    return eps_h * g / length


def build_shift_chain(emb: EmbeddingStore, model: ScoringModel, target: Triple, side: Side,
                      path: PathCandidate, eps_h: float, promote: bool = False,
                      cache: Optional[Dict[Tuple[DirectedHop, ...], np.ndarray]] = None) -> ShiftChain:
    """
    Shifts of every entity after the origin, computed outward hop by hop. `cache`
    maps hop prefixes to shifts so paths sharing a prefix share its shifts.
    """
    target = Triple(*target)
    if path.origin != target.entity(side):
        raise ValueError(f"path starts at {path.origin}, attacked entity is {target.entity(side)}")
    cache = {} if cache is None else cache
    if () not in cache:
        cache[()] = shift_vector(emb, model, target, side, eps_h, promote)

    chain = ShiftChain(path)
    known, shift = path.origin, cache[()]
    for i, hop in enumerate(path.hops):
        prefix = path.hops[:i + 1]
        if prefix not in cache:
            cache[prefix] = transfer_shift(emb, model, known, shift, hop, eps_h)
        shift = cache[prefix]
        chain.shifts.append(shift)
        known = hop.neighbor
    return chain


def path_penalty(path: PathCandidate) -> float:
    """log(mean + max) of the intermediate degrees; 0 for a single hop."""
    degrees = path.intermediate_degrees
    if not degrees:
        return 0.0
    return math.log(sum(degrees) / len(degrees) + max(degrees))


def select_paths(paths: List[PathCandidate], count: int) -> List[PathCandidate]:
    """The `count` paths with the smallest penalty, ties by entity ids."""
    ranked = sorted(paths, key=lambda p: (path_penalty(p), p.entities, p.sort_key()))
    return ranked[:count]


def _proxy_candidates(store: TripleStore, target: Triple, path: PathCandidate, cfg: IndirectConfig,
                      mode: Action, codes: np.ndarray) -> CandidateSet:
    protected = frozenset((target.head, target.tail))
    if mode is Action.DELETE:
        return delete_candidates(store, path.proxy, cfg.target_side, cfg.both_orientations,
                                 exclude=frozenset(path.triples()), exclude_entities=protected)
    # the same per-target stream for every proxy
    return add_candidates(store, path.proxy, cfg.target_side, cfg.add_candidate_sample,
                          rng=target_rng(cfg.rng_seed, target), allow_self_loops=cfg.allow_self_loops,
                          exclude=[target], exclude_entities=protected, codes=codes)


def indirect_attack(store: TripleStore, emb: EmbeddingStore, model: ScoringModel, target: Triple,
                    cfg: IndirectConfig, mode: Action) -> List[Perturbation]:
    target = Triple(*target)
    check_target(store, target)
    entity = target.entity(cfg.target_side)
    protected = {target.head, target.tail}
    paths = [p for p in enumerate_paths(store, entity, cfg.k) if p.proxy not in protected]
    if not paths:
        raise NoPaths(entity, cfg.k)

    cache: Dict[Tuple[DirectedHop, ...], np.ndarray] = {}
    codes = store.codes()
    # triple -> (sort key, perturbation); the best-scoring record of each triple is kept
    pool: Dict[Triple, Tuple[tuple, Perturbation]] = {}
    for path in select_paths(paths, cfg.paths):
        try:
            chain = build_shift_chain(emb, model, target, cfg.target_side, path, cfg.eps_h, cfg.promote, cache)
        except ZeroGradient as e:
            logger.warning("target {}: skipping path {}: {}", target, path.entities, e)
            continue
        candidates = _proxy_candidates(store, target, path, cfg, mode, codes)
        if len(candidates) == 0:
            continue
        penalty = path_penalty(path)
        eta = benefit_scores(emb, model, candidates, chain.proxy_shift, mode, cfg.lambda1, cfg.lambda2)
        psi = eta - cfg.lam * penalty
        others = candidates.others
        for i in rank_order(psi, candidates)[:cfg.budget]:
            triple = Triple(*map(int, candidates.triples[i]))
            key = (-float(psi[i]), triple.relation, int(others[i]), path.proxy, path.sort_key())
            if triple in pool and pool[triple][0] <= key:
                continue
            details = IndirectDetails(path.entities, path.proxy, float(psi[i]), float(eta[i]), penalty)
            pool[triple] = (key, Perturbation(mode, triple, float(psi[i]), details))

    if not pool:
        raise NoCandidates(entity)
    ranked = sorted(pool.values(), key=lambda item: item[0])
    return [perturbation for _, perturbation in ranked[:cfg.budget]]
