"""Modal formulas, their satisfaction over process states, and fragments.

The logic has truth, an initiality proposition, negation, conjunction,
strong forward/backward diamonds, weak (tau-abstracting) forward/backward
diamonds, and an until operator.  Weak visible diamonds never carry tau;
strong diamonds may.  A formula is evaluated at a state inside the full
transition tree of that state's initial ancestor, so backward modalities
can see the state's past and forward modalities its future.

Each named fragment whitelists the connectives that together induce one of
the nine bisimilarities; `in_fragment` checks membership.  The until
operator is an extension and belongs to no named fragment.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .lts import Lts, build_lts, weak_saturate
from .term import Action, ProcessTerm, is_initial, origin, require_reachable

__all__ = [
    "Formula",
    "Truth",
    "Init",
    "Not",
    "And",
    "StrongDiamond",
    "BackDiamond",
    "WeakTauDiamond",
    "WeakDiamond",
    "WeakBackTauDiamond",
    "WeakBackDiamond",
    "Until",
    "TT",
    "INIT",
    "Connective",
    "FragmentSpec",
    "FRAGMENTS",
    "satisfies",
    "depth",
    "in_fragment",
    "connectives",
]


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Truth(Formula):
    pass


@dataclass(frozen=True)
class Init(Formula):
    pass


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class StrongDiamond(Formula):
    action: Action
    body: Formula


@dataclass(frozen=True)
class BackDiamond(Formula):
    action: Action
    body: Formula


@dataclass(frozen=True)
class WeakTauDiamond(Formula):
    body: Formula


@dataclass(frozen=True)
class WeakDiamond(Formula):
    action: Action
    body: Formula

    def __post_init__(self) -> None:
        if self.action.is_tau:
            raise ValueError("weak visible diamond cannot carry tau")


@dataclass(frozen=True)
class WeakBackTauDiamond(Formula):
    body: Formula


@dataclass(frozen=True)
class WeakBackDiamond(Formula):
    action: Action
    body: Formula

    def __post_init__(self) -> None:
        if self.action.is_tau:
            raise ValueError("weak visible diamond cannot carry tau")


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    action: Action
    right: Formula


TT = Truth()
INIT = Init()


def depth(f: Formula) -> int:
    """Inductive size measure: atoms are 1, every other connective adds 1."""
    match f:
        case Truth() | Init():
            return 1
        case Not(body):
            return 1 + depth(body)
        case And(left, right):
            return 1 + max(depth(left), depth(right))
        case (
            StrongDiamond(_, body)
            | BackDiamond(_, body)
            | WeakTauDiamond(body)
            | WeakDiamond(_, body)
            | WeakBackTauDiamond(body)
            | WeakBackDiamond(_, body)
        ):
            return 1 + depth(body)
        case Until(left, _, right):
            return 1 + max(depth(left), depth(right))
    raise TypeError(f"not a formula: {f!r}")


class _Context:
    """Move tables of one transition tree, shared by a satisfaction query."""

    def __init__(self, l: Lts):
        self.lts = l
        sat = weak_saturate(l)
        self.succ: dict[ProcessTerm, list[tuple[Action, ProcessTerm]]] = {
            s: [(t.action, t.target) for t in l.successors[s]] for s in l.states
        }
        self.pred: dict[ProcessTerm, tuple[Action, ProcessTerm] | None] = {
            s: ((t.action, t.source) if t is not None else None)
            for s, t in l.predecessor.items()
        }
        self.weak_fwd = sat.weak_forward
        self.weak_bwd = sat.weak_backward
        self.tau_children: dict[ProcessTerm, list[ProcessTerm]] = {
            s: [t.target for t in l.successors[s] if t.action.is_tau] for s in l.states
        }


def satisfies(p: ProcessTerm, f: Formula) -> bool:
    """Whether p satisfies f, evaluated in the tree of p's initial ancestor."""
    require_reachable(p)
    ctx = _Context(build_lts(origin(p)))
    return _sat(p, f, ctx, {})


def _sat(s: ProcessTerm, f: Formula, ctx: _Context, memo: dict) -> bool:
    key = (id(f), s)
    hit = memo.get(key)
    if hit is not None:
        return hit
    match f:
        case Truth():
            value = True
        case Init():
            value = is_initial(s)
        case Not(body):
            value = not _sat(s, body, ctx, memo)
        case And(left, right):
            value = _sat(s, left, ctx, memo) and _sat(s, right, ctx, memo)
        case StrongDiamond(a, body):
            value = any(
                act == a and _sat(t, body, ctx, memo) for act, t in ctx.succ[s]
            )
        case BackDiamond(a, body):
            edge = ctx.pred[s]
            value = edge is not None and edge[0] == a and _sat(edge[1], body, ctx, memo)
        case WeakTauDiamond(body):
            value = any(
                lbl is None and _sat(t, body, ctx, memo) for lbl, t in ctx.weak_fwd[s]
            )
        case WeakDiamond(a, body):
            value = any(
                lbl == a and _sat(t, body, ctx, memo) for lbl, t in ctx.weak_fwd[s]
            )
        case WeakBackTauDiamond(body):
            value = any(
                lbl is None and _sat(t, body, ctx, memo) for lbl, t in ctx.weak_bwd[s]
            )
        case WeakBackDiamond(a, body):
            value = any(
                lbl == a and _sat(t, body, ctx, memo) for lbl, t in ctx.weak_bwd[s]
            )
        case Until(left, a, right):
            value = _sat_until(s, left, a, right, ctx, memo)
        case _:
            raise TypeError(f"not a formula: {f!r}")
    memo[key] = value
    return value


def _sat_until(
    s: ProcessTerm, left: Formula, a: Action, right: Formula, ctx: _Context, memo: dict
) -> bool:
    if a.is_tau and _sat(s, right, ctx, memo):
        return True
    # Walk tau paths from s; every state on the chosen path must satisfy
    # `left`, and from its endpoint an a-step must land in `right`.
    stack = [s]
    on_good_path = set()
    while stack:
        u = stack.pop()
        if u in on_good_path or not _sat(u, left, ctx, memo):
            continue
        on_good_path.add(u)
        stack.extend(ctx.tau_children[u])
    for u in on_good_path:
        for act, t in ctx.succ[u]:
            if act == a and _sat(t, right, ctx, memo):
                return True
    return False


class Connective(Enum):
    TRUE = "true"
    INIT = "init"
    NOT = "not"
    AND = "and"
    STRONG_FWD = "strong-fwd"
    STRONG_BWD = "strong-bwd"
    WEAK_TAU_FWD = "weak-tau-fwd"
    WEAK_FWD = "weak-fwd"
    WEAK_TAU_BWD = "weak-tau-bwd"
    WEAK_BWD = "weak-bwd"
    UNTIL = "until"


@dataclass(frozen=True)
class FragmentSpec:
    """Connective whitelist of one fragment, optionally extended with until."""

    name: str
    allowed: frozenset[Connective]
    allow_until: bool = False

    def with_until(self) -> "FragmentSpec":
        return FragmentSpec(self.name + "+until", self.allowed, allow_until=True)


def _frag(name: str, *conns: Connective) -> FragmentSpec:
    return FragmentSpec(name, frozenset(conns))


_C = Connective

FRAGMENTS: dict[str, FragmentSpec] = {
    spec.name: spec
    for spec in (
        _frag("L_FB", _C.TRUE, _C.NOT, _C.AND, _C.STRONG_FWD),
        _frag("L_FBps", _C.TRUE, _C.INIT, _C.NOT, _C.AND, _C.STRONG_FWD),
        _frag("L_RB", _C.TRUE, _C.STRONG_BWD),
        _frag("L_FRB", _C.TRUE, _C.NOT, _C.AND, _C.STRONG_FWD, _C.STRONG_BWD),
        _frag("L_wFB", _C.TRUE, _C.NOT, _C.AND, _C.WEAK_TAU_FWD, _C.WEAK_FWD),
        _frag("L_wFBps", _C.TRUE, _C.INIT, _C.NOT, _C.AND, _C.WEAK_TAU_FWD, _C.WEAK_FWD),
        _frag("L_wRB", _C.TRUE, _C.WEAK_TAU_BWD, _C.WEAK_BWD),
        _frag(
            "L_wFRB",
            _C.TRUE,
            _C.NOT,
            _C.AND,
            _C.WEAK_TAU_FWD,
            _C.WEAK_FWD,
            _C.WEAK_TAU_BWD,
            _C.WEAK_BWD,
        ),
        _frag(
            "L_wFRBps",
            _C.TRUE,
            _C.INIT,
            _C.NOT,
            _C.AND,
            _C.WEAK_TAU_FWD,
            _C.WEAK_FWD,
            _C.WEAK_TAU_BWD,
            _C.WEAK_BWD,
        ),
    )
}


def connectives(f: Formula) -> set[Connective]:
    """The set of connectives occurring anywhere in f."""
    out: set[Connective] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        match g:
            case Truth():
                out.add(_C.TRUE)
            case Init():
                out.add(_C.INIT)
            case Not(body):
                out.add(_C.NOT)
                stack.append(body)
            case And(left, right):
                out.add(_C.AND)
                stack.extend((left, right))
            case StrongDiamond(_, body):
                out.add(_C.STRONG_FWD)
                stack.append(body)
            case BackDiamond(_, body):
                out.add(_C.STRONG_BWD)
                stack.append(body)
            case WeakTauDiamond(body):
                out.add(_C.WEAK_TAU_FWD)
                stack.append(body)
            case WeakDiamond(_, body):
                out.add(_C.WEAK_FWD)
                stack.append(body)
            case WeakBackTauDiamond(body):
                out.add(_C.WEAK_TAU_BWD)
                stack.append(body)
            case WeakBackDiamond(_, body):
                out.add(_C.WEAK_BWD)
                stack.append(body)
            case Until(left, _, right):
                out.add(_C.UNTIL)
                stack.extend((left, right))
            case _:
                raise TypeError(f"not a formula: {g!r}")
    return out


def in_fragment(f: Formula, spec: FragmentSpec) -> bool:
    used = connectives(f)
    if _C.UNTIL in used and not spec.allow_until:
        return False
    used.discard(_C.UNTIL)
    return used <= spec.allowed
