from typing import List, Set

from ..core.paths import enumerate_paths
from ..core.triples import Side, Triple, TripleStore
from ..errors import NoCandidates, NoPaths
from .base import Action, IndirectDetails, Perturbation, target_rng
from .candidates import delete_candidates, draw_add_candidate
from .direct import check_target

# random draws per requested perturbation before giving up
MAX_ATTEMPTS = 100


def random_direct(store: TripleStore, target: Triple, side: Side, budget: int, mode: Action, seed: int,
                  allow_self_loops: bool = False, both_orientations: bool = False) -> List[Perturbation]:
    """Uniform draws from the direct candidate space. Benefits are 0."""
    target = Triple(*target)
    check_target(store, target)
    entity = target.entity(side)
    rng = target_rng(seed, target)

    if mode is Action.DELETE:
        candidates = delete_candidates(store, entity, side, both_orientations)
        if len(candidates) == 0:
            raise NoCandidates(entity)
        picks = rng.choice(len(candidates), size=min(budget, len(candidates)), replace=False)
        return [Perturbation(mode, Triple(*map(int, candidates.triples[i])), 0.0) for i in picks]

    chosen: List[Triple] = []
    seen: Set[Triple] = {target}
    for _ in range(budget):
        triple = draw_add_candidate(store, entity, side, rng, allow_self_loops, exclude=seen)
        if triple is None:
            break
        seen.add(triple)
        chosen.append(triple)
    if not chosen:
        raise NoCandidates(entity)
    return [Perturbation(mode, triple, 0.0) for triple in chosen]


def random_indirect(store: TripleStore, target: Triple, side: Side, k: int, budget: int, mode: Action,
                    seed: int, allow_self_loops: bool = False) -> List[Perturbation]:
    """A uniform path, then a uniform perturbation on its proxy, `budget` times without duplicates."""
    target = Triple(*target)
    check_target(store, target)
    entity = target.entity(side)
    protected = frozenset((target.head, target.tail))
    paths = [p for p in enumerate_paths(store, entity, k) if p.proxy not in protected]
    if not paths:
        raise NoPaths(entity, k)
    rng = target_rng(seed, target)

    out: List[Perturbation] = []
    seen: Set[Triple] = {target}
    for _ in range(budget * MAX_ATTEMPTS):
        if len(out) == budget:
            break
        path = paths[int(rng.integers(len(paths)))]
        if mode is Action.DELETE:
            candidates = delete_candidates(store, path.proxy, side, exclude=frozenset(path.triples()) | seen,
                                           exclude_entities=protected)
            if len(candidates) == 0:
                continue
            triple = Triple(*map(int, candidates.triples[int(rng.integers(len(candidates)))]))
        else:
            triple = draw_add_candidate(store, path.proxy, side, rng, allow_self_loops, exclude=seen,
                                        exclude_entities=protected)
            if triple is None:
                continue
        seen.add(triple)
        out.append(Perturbation(mode, triple, 0.0, IndirectDetails(path.entities, path.proxy, 0.0, 0.0, 0.0)))
    if not out:
        raise NoCandidates(entity)
    return out

