from typing import Dict, Iterable, List, Optional


class Vocabulary:
    """
    Dense, 0-based name <-> id maps for entities and relations.
    Ids are handed out in first-seen order. A frozen vocabulary refuses new names.
    """

    def __init__(self, entity_names: Optional[Iterable[str]] = None,
                 relation_names: Optional[Iterable[str]] = None):
        self._entity_names: List[str] = []
        self._relation_names: List[str] = []
        self._entity_ids: Dict[str, int] = {}
        self._relation_ids: Dict[str, int] = {}
        self._frozen = False
        for name in entity_names or ():
            self.add_entity(name)
        for name in relation_names or ():
            self.add_relation(name)

    # --- Growing ---

    def add_entity(self, name: str) -> int:
        return self._add(name, self._entity_names, self._entity_ids, "entity")

    def add_relation(self, name: str) -> int:
        return self._add(name, self._relation_names, self._relation_ids, "relation")

    def _add(self, name: str, names: List[str], ids: Dict[str, int], kind: str) -> int:
        found = ids.get(name)
        if found is not None:
            return found
        if self._frozen:
            raise KeyError(f"unknown {kind} {name!r} in frozen vocabulary")
        ids[name] = len(names)
        names.append(name)
        return ids[name]

    def freeze(self) -> 'Vocabulary':
        self._frozen = True
        return self

    @property
    def frozen(self) -> bool:
        return self._frozen

    # --- Lookup ---

    def entity_id(self, name: str) -> Optional[int]:
        return self._entity_ids.get(name)

    def relation_id(self, name: str) -> Optional[int]:
        return self._relation_ids.get(name)

    def entity_name(self, entity_id: int) -> str:
        return self._entity_names[entity_id]

    def relation_name(self, relation_id: int) -> str:
        return self._relation_names[relation_id]

    @property
    def entity_names(self) -> List[str]:
        return list(self._entity_names)

    @property
    def relation_names(self) -> List[str]:
        return list(self._relation_names)

    @property
    def num_entities(self) -> int:
        return len(self._entity_names)

    @property
    def num_relations(self) -> int:
        return len(self._relation_names)

    @classmethod
    def from_counts(cls, num_entities: int, num_relations: int) -> 'Vocabulary':
        """Synthesizes names equal to the decimal ids."""
        return cls((str(i) for i in range(num_entities)), (str(i) for i in range(num_relations)))

    def __repr__(self) -> str:
        return f"Vocabulary(entities={self.num_entities}, relations={self.num_relations})"
