from dataclasses import dataclass, field
from enum import Enum
from typing import List, Tuple

from .triples import Triple, TripleStore


class Orientation(Enum):
    NEIGHBOR_IS_HEAD = "neighbor_is_head"
    NEIGHBOR_IS_TAIL = "neighbor_is_tail"


@dataclass(frozen=True)
class DirectedHop:
    """One incidence of a center entity: the neighbor across it, the relation and its direction."""
    neighbor: int
    relation: int
    orientation: Orientation

    def triple(self, center: int) -> Triple:
        if self.orientation is Orientation.NEIGHBOR_IS_TAIL:
            return Triple(center, self.relation, self.neighbor)
        return Triple(self.neighbor, self.relation, center)

    def sort_key(self) -> Tuple[int, int, int]:
        return (self.neighbor, self.relation, 0 if self.orientation is Orientation.NEIGHBOR_IS_TAIL else 1)


@dataclass(frozen=True)
class PathCandidate:
    """
    A simple K-hop path leaving `origin`. The last hop's neighbor is the proxy
    entity; the entities strictly in between are the intermediates.
    """
    origin: int
    hops: Tuple[DirectedHop, ...]
    intermediate_degrees: Tuple[int, ...] = field(default=())

    @property
    def k(self) -> int:
        return len(self.hops)

    @property
    def proxy(self) -> int:
        return self.hops[-1].neighbor

    @property
    def entities(self) -> List[int]:
        return [self.origin] + [hop.neighbor for hop in self.hops]

    @property
    def intermediates(self) -> List[int]:
        return [hop.neighbor for hop in self.hops[:-1]]

    def triples(self) -> List[Triple]:
        """Replays the hops from the origin into the K traversed triples."""
        out = []
        center = self.origin
        for hop in self.hops:
            out.append(hop.triple(center))
            center = hop.neighbor
        return out

    def sort_key(self) -> Tuple:
        return (tuple(self.entities),
                tuple(hop.relation for hop in self.hops),
                tuple(hop.sort_key()[2] for hop in self.hops))


def neighbors(store: TripleStore, entity: int) -> List[DirectedHop]:
    """
    One hop per stored incidence of entity, ordered by triple position. A
    self-loop holds two incidences and yields NEIGHBOR_IS_TAIL then NEIGHBOR_IS_HEAD.
    """
    incidences = [(p, 0) for p in store.by_head(entity)] + [(p, 1) for p in store.by_tail(entity)]
    incidences.sort()
    hops = []
    for position, slot in incidences:
        triple = store[position]
        if slot == 0:
            hops.append(DirectedHop(triple.tail, triple.relation, Orientation.NEIGHBOR_IS_TAIL))
        else:
            hops.append(DirectedHop(triple.head, triple.relation, Orientation.NEIGHBOR_IS_HEAD))
    return hops


def enumerate_paths(store: TripleStore, origin: int, k: int) -> List[PathCandidate]:
    """
    All simple directed-hop paths of exactly k hops from origin. Self-loops never
    extend a path. Parallel edges give distinct paths. The result is sorted by
    (entity sequence, relation sequence, orientation sequence), which does not
    depend on the order the triples were stored in.
    """
    if k < 1:
        raise ValueError(f"hop count must be >= 1, got {k}")

    paths: List[PathCandidate] = []
    visited = {origin}
    hops: List[DirectedHop] = []
    # iterative DFS: each frame is (center, remaining hops of that center)
    stack = [(origin, iter(neighbors(store, origin)))]
    while stack:
        center, pending = stack[-1]
        hop = next(pending, None)
        if hop is None:
            stack.pop()
            if hops:
                visited.discard(hops.pop().neighbor)
            continue
        if hop.neighbor in visited:
            continue
        hops.append(hop)
        if len(hops) == k:
            degrees = tuple(store.degree(h.neighbor) for h in hops[:-1])
            paths.append(PathCandidate(origin, tuple(hops), degrees))
            hops.pop()
            continue
        visited.add(hop.neighbor)
        stack.append((hop.neighbor, iter(neighbors(store, hop.neighbor))))

    paths.sort(key=PathCandidate.sort_key)
    return paths
