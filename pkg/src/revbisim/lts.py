"""Operational semantics and transition systems.

Four rules generate all transitions: an unexecuted prefix fires when its
continuation is initial (decorating the action), executed prefixes propagate
moves of their continuation, and each side of a choice moves only while the
other side is still initial.  Because executed actions stay in the syntax,
the system below an initial term is a finite tree in which every non-initial
state has exactly one incoming transition; `backstep` walks that unique edge
backwards.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property

from .term import (
    Action,
    Choice,
    ExecPrefix,
    Nil,
    Prefix,
    ProcessTerm,
    is_initial,
    origin,
    require_reachable,
)

__all__ = [
    "Transition",
    "Lts",
    "SaturatedLts",
    "step",
    "backstep",
    "build_lts",
    "weak_saturate",
    "export_dot",
]

# A weak move label: a visible action, or None for a tau-star move.
WeakLabel = Action | None


@dataclass(frozen=True)
class Transition:
    source: ProcessTerm
    action: Action
    target: ProcessTerm


def _step_unchecked(p: ProcessTerm) -> list[tuple[Action, ProcessTerm]]:
    match p:
        case Nil():
            return []
        case Prefix(a, cont):
            # Fires only on an initial continuation.
            return [(a, ExecPrefix(a, cont))] if is_initial(cont) else []
        case ExecPrefix(a, cont):
            return [(b, ExecPrefix(a, t)) for b, t in _step_unchecked(cont)]
        case Choice(left, right):
            moves: list[tuple[Action, ProcessTerm]] = []
            if is_initial(right):
                moves += [(a, Choice(t, right)) for a, t in _step_unchecked(left)]
            if is_initial(left):
                moves += [(a, Choice(left, t)) for a, t in _step_unchecked(right)]
            return moves
    raise TypeError(f"not a process term: {p!r}")


def step(p: ProcessTerm) -> list[tuple[Action, ProcessTerm]]:
    """All forward moves of p, ordered by (action, rendered target)."""
    from .parser import render_term

    require_reachable(p)
    moves = _step_unchecked(p)
    moves.sort(key=lambda m: (m[0].name, render_term(m[1])))
    return moves


def backstep(p: ProcessTerm) -> tuple[Action, ProcessTerm] | None:
    """The unique incoming transition of p, or None when p is initial."""
    require_reachable(p)
    return _backstep_unchecked(p)


def _backstep_unchecked(p: ProcessTerm) -> tuple[Action, ProcessTerm] | None:
    if is_initial(p):
        return None
    match p:
        case ExecPrefix(a, cont):
            if is_initial(cont):
                return (a, Prefix(a, cont))
            b, prev = _backstep_unchecked(cont)
            return (b, ExecPrefix(a, prev))
        case Choice(left, right):
            if not is_initial(left):
                a, prev = _backstep_unchecked(left)
                return (a, Choice(prev, right))
            a, prev = _backstep_unchecked(right)
            return (a, Choice(left, prev))
    raise AssertionError(f"non-initial term with no incoming transition: {p!r}")


@dataclass(frozen=True)
class Lts:
    """The finite tree of states reachable forward from an initial root."""

    root: ProcessTerm
    states: tuple[ProcessTerm, ...]
    transitions: tuple[Transition, ...]

    @cached_property
    def successors(self) -> dict[ProcessTerm, tuple[Transition, ...]]:
        out: dict[ProcessTerm, list[Transition]] = {s: [] for s in self.states}
        for t in self.transitions:
            out[t.source].append(t)
        return {s: tuple(ts) for s, ts in out.items()}

    @cached_property
    def predecessor(self) -> dict[ProcessTerm, Transition | None]:
        back: dict[ProcessTerm, Transition | None] = {s: None for s in self.states}
        for t in self.transitions:
            back[t.target] = t
        return back


def build_lts(p: ProcessTerm) -> Lts:
    """The full transition tree rooted at origin(p); p is among its states."""
    require_reachable(p)
    root = origin(p)
    states: list[ProcessTerm] = [root]
    seen = {root}
    transitions: list[Transition] = []
    queue = deque([root])
    while queue:
        s = queue.popleft()
        for a, t in step(s):
            transitions.append(Transition(s, a, t))
            if t not in seen:
                seen.add(t)
                states.append(t)
                queue.append(t)
    return Lts(root=root, states=tuple(states), transitions=tuple(transitions))


@dataclass(frozen=True)
class SaturatedLts:
    """An Lts plus its weak move relations.

    `weak_forward[s]` holds (None, t) whenever s reaches t by zero or more
    tau transitions, and (a, t) for visible a whenever s reaches t by a
    single a-transition wrapped in tau sequences on both sides.
    `weak_backward` is the edge reversal.
    """

    base: Lts
    weak_forward: dict[ProcessTerm, frozenset[tuple[WeakLabel, ProcessTerm]]]
    weak_backward: dict[ProcessTerm, frozenset[tuple[WeakLabel, ProcessTerm]]]


def weak_saturate(l: Lts) -> SaturatedLts:
    succ = l.successors
    # tau-star closure, computed leaves-up (the LTS is a tree).
    tau_reach: dict[ProcessTerm, set[ProcessTerm]] = {}

    def tau_desc(s: ProcessTerm) -> set[ProcessTerm]:
        if s in tau_reach:
            return tau_reach[s]
        acc = {s}
        for t in succ[s]:
            if t.action.is_tau:
                acc |= tau_desc(t.target)
        tau_reach[s] = acc
        return acc

    forward: dict[ProcessTerm, set[tuple[WeakLabel, ProcessTerm]]] = {
        s: set() for s in l.states
    }
    for s in l.states:
        for u in tau_desc(s):
            forward[s].add((None, u))
    for s in l.states:
        for mid in tau_desc(s):
            for t in succ[mid]:
                if not t.action.is_tau:
                    for u in tau_desc(t.target):
                        forward[s].add((t.action, u))

    backward: dict[ProcessTerm, set[tuple[WeakLabel, ProcessTerm]]] = {
        s: set() for s in l.states
    }
    for s, moves in forward.items():
        for label, t in moves:
            backward[t].add((label, s))

    return SaturatedLts(
        base=l,
        weak_forward={s: frozenset(m) for s, m in forward.items()},
        weak_backward={s: frozenset(m) for s, m in backward.items()},
    )


def export_dot(l: Lts, highlight: ProcessTerm | None = None) -> str:
    """Graphviz rendering of the tree; the root is drawn distinctly."""
    from .parser import render_term

    if highlight is not None and highlight not in set(l.states):
        raise ValueError(f"highlight is not a state of this system: {highlight!r}")
    ids = {s: f"n{i}" for i, s in enumerate(l.states)}
    lines = ["digraph lts {", "  rankdir=LR;", '  node [shape=box, fontname="monospace"];']
    for s in l.states:
        attrs = [f'label="{render_term(s)}"']
        if s == l.root:
            attrs.append("penwidth=2")
        if highlight is not None and s == highlight:
            attrs.append('style=filled fillcolor="lightblue"')
        lines.append(f"  {ids[s]} [{' '.join(attrs)}];")
    for t in l.transitions:
        lines.append(f'  {ids[t.source]} -> {ids[t.target]} [label="{t.action.name}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def lts_height(l: Lts) -> int:
    """Longest forward path length from the root."""
    depth = {l.root: 0}
    best = 0
    for t in l.transitions:
        depth[t.target] = depth[t.source] + 1
        best = max(best, depth[t.target])
    return best
