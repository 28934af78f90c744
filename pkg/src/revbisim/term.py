"""Process terms of the reversible sequential calculus.

A term is one of: the terminated process ``0``, an action prefix ``a.P``,
an executed action prefix ``a!.P`` (the action has already happened and the
remaining behaviour sits inside ``P``), or a binary choice ``P + Q``.

Executed prefixes are what make the calculus reversible: they keep the past
inside the syntax, so every non-initial term has a unique way back.  The
`is_initial` / `is_final` / `is_reachable` predicates classify terms
accordingly; `is_reachable` is the well-formedness gate every other module
relies on.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

__all__ = [
    "Action",
    "TAU",
    "ProcessTerm",
    "Nil",
    "NIL",
    "Prefix",
    "ExecPrefix",
    "Choice",
    "UnreachableTermError",
    "is_initial",
    "is_final",
    "is_reachable",
    "origin",
    "alphabet",
    "term_key",
    "unreachable_witness",
]

_ACTION_RE = re.compile(r"[a-z][a-z0-9_]*\Z")


@dataclass(frozen=True)
class Action:
    """An action name; the reserved name "tau" is the unobservable action."""

    name: str

    def __post_init__(self) -> None:
        if not _ACTION_RE.match(self.name):
            raise ValueError(f"invalid action name: {self.name!r}")

    @property
    def is_tau(self) -> bool:
        return self.name == "tau"

    def __str__(self) -> str:
        return self.name


TAU = Action("tau")


class ProcessTerm:
    """Base class of the term AST; concrete nodes are the four subclasses."""

    __slots__ = ()


@dataclass(frozen=True)
class Nil(ProcessTerm):
    pass


@dataclass(frozen=True)
class Prefix(ProcessTerm):
    action: Action
    cont: ProcessTerm


@dataclass(frozen=True)
class ExecPrefix(ProcessTerm):
    action: Action
    cont: ProcessTerm


@dataclass(frozen=True)
class Choice(ProcessTerm):
    left: ProcessTerm
    right: ProcessTerm


NIL = Nil()


class UnreachableTermError(ValueError):
    """Raised when an operation requires a reachable term but got none."""

    def __init__(self, term: ProcessTerm, witness: ProcessTerm | None = None):
        self.term = term
        self.witness = witness if witness is not None else term
        super().__init__(f"term is not reachable (offending subterm: {self.witness!r})")


@lru_cache(maxsize=None)
def is_initial(p: ProcessTerm) -> bool:
    """True iff no action in p has been executed."""
    match p:
        case Nil():
            return True
        case Prefix(_, cont):
            return is_initial(cont)
        case ExecPrefix(_, _):
            return False
        case Choice(left, right):
            return is_initial(left) and is_initial(right)
    raise TypeError(f"not a process term: {p!r}")


@lru_cache(maxsize=None)
def is_final(p: ProcessTerm) -> bool:
    """True iff every action along one execution path has been executed."""
    match p:
        case Nil():
            return True
        case Prefix(_, _):
            return False
        case ExecPrefix(_, cont):
            return is_final(cont)
        case Choice(left, right):
            return (is_final(left) and is_initial(right)) or (
                is_initial(left) and is_final(right)
            )
    raise TypeError(f"not a process term: {p!r}")


@lru_cache(maxsize=None)
def is_reachable(p: ProcessTerm) -> bool:
    """True iff p can be reached from an initial term by forward steps.

    Executed prefixes may only sit above unexecuted ones, and at most one
    branch of a choice may contain them.
    """
    match p:
        case Nil():
            return True
        case Prefix(_, cont):
            return is_initial(cont)
        case ExecPrefix(_, cont):
            return is_reachable(cont)
        case Choice(left, right):
            return (is_reachable(left) and is_initial(right)) or (
                is_initial(left) and is_reachable(right)
            )
    raise TypeError(f"not a process term: {p!r}")


def require_reachable(p: ProcessTerm) -> None:
    if not is_reachable(p):
        raise UnreachableTermError(p, unreachable_witness(p))


def unreachable_witness(p: ProcessTerm) -> ProcessTerm | None:
    """Smallest subterm of p that is itself unreachable, or None if p is fine."""
    if is_reachable(p):
        return None
    match p:
        case Prefix(_, cont) | ExecPrefix(_, cont):
            return unreachable_witness(cont) or p
        case Choice(left, right):
            return unreachable_witness(left) or unreachable_witness(right) or p
    return p


@lru_cache(maxsize=None)
def origin(p: ProcessTerm) -> ProcessTerm:
    """The initial ancestor of p: every executed prefix made unexecuted again."""
    match p:
        case Nil():
            return p
        case Prefix(a, cont):
            return p if is_initial(cont) else Prefix(a, origin(cont))
        case ExecPrefix(a, cont):
            return Prefix(a, origin(cont))
        case Choice(left, right):
            return Choice(origin(left), origin(right))
    raise TypeError(f"not a process term: {p!r}")


def alphabet(p: ProcessTerm) -> frozenset[Action]:
    """All action names occurring in p, executed or not."""
    match p:
        case Nil():
            return frozenset()
        case Prefix(a, cont) | ExecPrefix(a, cont):
            return alphabet(cont) | {a}
        case Choice(left, right):
            return alphabet(left) | alphabet(right)
    raise TypeError(f"not a process term: {p!r}")


def term_key(p: ProcessTerm):
    """Total order on terms: Nil < Prefix < ExecPrefix < Choice, recursing."""
    match p:
        case Nil():
            return (0,)
        case Prefix(a, cont):
            return (1, a.name, term_key(cont))
        case ExecPrefix(a, cont):
            return (2, a.name, term_key(cont))
        case Choice(left, right):
            return (3, term_key(left), term_key(right))
    raise TypeError(f"not a process term: {p!r}")
