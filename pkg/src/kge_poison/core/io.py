"""
Readers and writers for the two triple layouts.

NAME_TSV: UTF-8, one "head<TAB>relation<TAB>tail" per line.
ID_TSV:   first line N, then N lines "h t r" (entities first, relation last).
          Optional sibling files entity2id.txt / relation2id.txt (count line,
          then "name<TAB>id") declare the vocabulary and its size.
"""
from enum import Enum
from pathlib import Path
from typing import List, Optional, Tuple, Union

from loguru import logger

from ..errors import MalformedLine, UnknownId
from .triples import TripleStore
from .vocabulary import Vocabulary

PathLike = Union[str, Path]

ENTITY_MAP = "entity2id.txt"
RELATION_MAP = "relation2id.txt"


class TripleFormat(Enum):
    NAME_TSV = "name-tsv"
    ID_TSV = "id-tsv"


def load_triples(path: PathLike, fmt: TripleFormat = TripleFormat.NAME_TSV,
                 vocabulary: Optional[Vocabulary] = None) -> Tuple[Vocabulary, TripleStore]:
    """
    Reads a triple file into a deduplicated store.

    With a frozen `vocabulary` (e.g. the training vocabulary when reading a test
    split) triples naming unknown entities/relations are skipped with a warning
    instead of growing the vocabulary.
    """
    path = Path(path)
    if fmt is TripleFormat.NAME_TSV:
        vocab, rows = _read_name_tsv(path, vocabulary)
    else:
        vocab, rows = _read_id_tsv(path, vocabulary)

    store = TripleStore(rows, num_entities=vocab.num_entities, num_relations=vocab.num_relations)
    if store.duplicates:
        logger.warning("{}: dropped {} duplicate triple(s)", path.name, store.duplicates)
    logger.debug("{}: {} triples, {} entities, {} relations",
                 path.name, len(store), vocab.num_entities, vocab.num_relations)
    return vocab, store


def write_triples(path: PathLike, vocabulary: Vocabulary, store: TripleStore,
                  fmt: TripleFormat = TripleFormat.NAME_TSV) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt is TripleFormat.NAME_TSV:
        with path.open("w", encoding="utf-8", newline="\n") as f:
            for h, r, t in store:
                f.write(f"{vocabulary.entity_name(h)}\t{vocabulary.relation_name(r)}\t{vocabulary.entity_name(t)}\n")
        return

    with path.open("w", encoding="utf-8", newline="\n") as f:
        f.write(f"{len(store)}\n")
        for h, r, t in store:
            f.write(f"{h} {t} {r}\n")
    _write_map(path.parent / ENTITY_MAP, vocabulary.entity_names)
    _write_map(path.parent / RELATION_MAP, vocabulary.relation_names)


# --- NAME_TSV ---

def _read_name_tsv(path: Path, vocabulary: Optional[Vocabulary]) -> Tuple[Vocabulary, List[Tuple[int, int, int]]]:
    vocab = vocabulary if vocabulary is not None else Vocabulary()
    rows = []
    skipped = 0
    with path.open("r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3 or not all(parts):
                raise MalformedLine(line_no, line, str(path))
            head, relation, tail = parts
            if vocab.frozen:
                ids = (vocab.entity_id(head), vocab.relation_id(relation), vocab.entity_id(tail))
                if None in ids:
                    skipped += 1
                    continue
                rows.append(ids)
            else:
                rows.append((vocab.add_entity(head), vocab.add_relation(relation), vocab.add_entity(tail)))
    if skipped:
        logger.warning("{}: skipped {} triple(s) outside the vocabulary", path.name, skipped)
    return vocab, rows


# --- ID_TSV ---

def _read_id_tsv(path: Path, vocabulary: Optional[Vocabulary]) -> Tuple[Vocabulary, List[Tuple[int, int, int]]]:
    with path.open("r", encoding="utf-8") as f:
        lines = f.read().splitlines()
    if not lines or not lines[0].strip():
        return (vocabulary if vocabulary is not None else Vocabulary()), []

    try:
        count = int(lines[0].strip())
    except ValueError:
        raise MalformedLine(1, lines[0], str(path)) from None

    if vocabulary is not None:
        vocab = vocabulary
    else:
        vocab = _read_declared_vocabulary(path.parent)

    rows = []
    skipped = 0
    for index in range(count):
        line_no = index + 2
        if line_no > len(lines):
            raise MalformedLine(line_no, "", str(path))
        parts = lines[line_no - 1].split()
        if len(parts) != 3:
            raise MalformedLine(line_no, lines[line_no - 1], str(path))
        try:
            h, t, r = (int(p) for p in parts)
        except ValueError:
            raise MalformedLine(line_no, lines[line_no - 1], str(path)) from None
        if min(h, t, r) < 0:
            raise MalformedLine(line_no, lines[line_no - 1], str(path))

        if vocab is None:
            rows.append((h, r, t))
            continue
        bad = _first_unknown(vocab, h, r, t)
        if bad is not None:
            if vocab.frozen:
                skipped += 1
                continue
            raise UnknownId(bad[0], bad[1], bad[2], line_no)
        rows.append((h, r, t))

    if vocab is None:
        num_entities = max((max(h, t) for h, _, t in rows), default=-1) + 1
        num_relations = max((r for _, r, _ in rows), default=-1) + 1
        vocab = Vocabulary.from_counts(num_entities, num_relations)
    if skipped:
        logger.warning("{}: skipped {} triple(s) outside the vocabulary", path.name, skipped)
    return vocab, rows


def _first_unknown(vocab: Vocabulary, h: int, r: int, t: int) -> Optional[Tuple[str, int, int]]:
    if h >= vocab.num_entities:
        return ("entity", h, vocab.num_entities)
    if t >= vocab.num_entities:
        return ("entity", t, vocab.num_entities)
    if r >= vocab.num_relations:
        return ("relation", r, vocab.num_relations)
    return None


def _read_declared_vocabulary(directory: Path) -> Optional[Vocabulary]:
    entity_file = directory / ENTITY_MAP
    relation_file = directory / RELATION_MAP
    if not (entity_file.exists() and relation_file.exists()):
        return None
    return Vocabulary(_read_map(entity_file), _read_map(relation_file))


def _read_map(path: Path) -> List[str]:
    with path.open("r", encoding="utf-8") as f:
        lines = f.read().splitlines()
    count = int(lines[0].strip())
    names: List[Optional[str]] = [None] * count
    for line_no, line in enumerate(lines[1:count + 1], start=2):
        parts = line.split("\t")
        if len(parts) != 2:
            raise MalformedLine(line_no, line, str(path))
        index = int(parts[1])
        if not 0 <= index < count:
            raise UnknownId("map", index, count, line_no)
        names[index] = parts[0]
    if any(name is None for name in names):
        raise MalformedLine(len(lines) + 1, "", str(path))
    return names  # type: ignore[return-value]


def _write_map(path: Path, names: List[str]) -> None:
    with path.open("w", encoding="utf-8", newline="\n") as f:
        f.write(f"{len(names)}\n")
        for index, name in enumerate(names):
            f.write(f"{name}\t{index}\n")
