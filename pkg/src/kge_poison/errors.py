"""Exceptions raised by kge_poison.

Every error carries the ids needed to locate the problem. Input and contract
violations also derive from ValueError so plain ``except ValueError`` callers
keep working.
"""
from typing import Optional, Tuple


class KgePoisonError(Exception):
    """Root of all kge_poison errors."""


# --- Input / data errors ---

class MalformedLine(KgePoisonError, ValueError):
    def __init__(self, line_no: int, line: str = "", path: Optional[str] = None):
        self.line_no = line_no
        self.line = line
        self.path = path
        where = f"{path}:{line_no}" if path else f"line {line_no}"
        super().__init__(f"malformed triple at {where}: {line!r}")


class UnknownId(KgePoisonError, ValueError):
    def __init__(self, kind: str, value: int, declared: int, line_no: Optional[int] = None):
        self.kind = kind
        self.value = value
        self.declared = declared
        self.line_no = line_no
        super().__init__(f"{kind} id {value} exceeds declared count {declared}"
                         + (f" (line {line_no})" if line_no is not None else ""))


class EmptyStore(KgePoisonError, ValueError):
    def __init__(self, message: str = "cannot train on an empty triple store"):
        super().__init__(message)


class DimensionMismatch(KgePoisonError, ValueError):
    def __init__(self, expected: int, got: int, what: str = "vector"):
        self.expected = expected
        self.got = got
        super().__init__(f"{what} has dimension {got}, expected {expected}")


class ConflictingPerturbation(KgePoisonError, ValueError):
    def __init__(self, action: str, triple: Tuple[int, int, int], reason: str):
        self.action = action
        self.triple = triple
        super().__init__(f"cannot {action} {triple}: {reason}")


class TargetInTrainingSet(KgePoisonError, ValueError):
    def __init__(self, target: Tuple[int, int, int]):
        self.target = target
        super().__init__(f"targeted fact {target} is part of the training set")


class EmptyResults(KgePoisonError, ValueError):
    def __init__(self):
        super().__init__("cannot aggregate an empty list of rank results")


class InsufficientEligibleTargets(KgePoisonError, ValueError):
    def __init__(self, requested: int, eligible: int):
        self.requested = requested
        self.eligible = eligible
        super().__init__(f"requested {requested} targets but only {eligible} test triples are eligible")


# --- Per-target attack aborts ---

class AttackAborted(KgePoisonError):
    """An attack on one target cannot proceed; the target is evaluated unattacked."""


class ZeroResidual(AttackAborted, ArithmeticError):
    def __init__(self, triple: Optional[Tuple[int, int, int]] = None):
        self.triple = triple
        super().__init__("translation residual is exactly zero"
                         + (f" for {triple}" if triple is not None else ""))


class ZeroGradient(AttackAborted, ArithmeticError):
    def __init__(self, entity: int, neighbor: int):
        self.entity = entity
        self.neighbor = neighbor
        super().__init__(f"shift transfer {entity} -> {neighbor} has a zero gradient")


class NoCandidates(AttackAborted):
    def __init__(self, entity: int):
        self.entity = entity
        super().__init__(f"entity {entity} has no perturbation candidates")


class NoPaths(AttackAborted):
    def __init__(self, entity: int, k: int):
        self.entity = entity
        self.k = k
        super().__init__(f"no {k}-hop paths originate from entity {entity}")
