"""Behavioral equivalences over reversible process states.

Ten equivalence kinds are decided here.  Forward kinds match outgoing
transitions, reverse kinds match the unique incoming transition,
forward-reverse kinds match both; weak kinds let the responder absorb tau
moves; past-sensitive kinds additionally demand that related states agree
on initiality; branching bisimilarity matches forward moves with an
intermediate-state condition.

The reference decision procedure is `relation_fixpoint`: start from every
(symmetric, initiality-respecting for past-sensitive kinds) candidate pair
over the combined state sets and repeatedly delete pairs violating the
kind's clauses, simultaneously per round, until nothing changes.  The round
at which a pair dies is its rank; distinguishing-formula construction
recurses along strictly decreasing ranks.

`refine_partition` is an independent oracle for the nine non-branching
kinds: signature-based partition refinement over strong or saturated
moves.  The two procedures are required to agree; neither is trusted alone.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum

from .lts import Lts, build_lts, weak_saturate
from .term import Action, ProcessTerm, is_initial, require_reachable, term_key

__all__ = [
    "EquivKind",
    "WitnessRelation",
    "EquivalenceReport",
    "MoveSystem",
    "relation_fixpoint",
    "bisimilar",
    "refine_partition",
    "backward_trace",
    "stuttering_violations",
    "cross_violations",
    "witness_is_closed",
]


class EquivKind(str, Enum):
    FB = "FB"
    FBps = "FBps"
    RB = "RB"
    FRB = "FRB"
    wFB = "wFB"
    wFBps = "wFBps"
    wRB = "wRB"
    wFRB = "wFRB"
    wFRBps = "wFRBps"
    BB = "BB"


PS_KINDS = frozenset({EquivKind.FBps, EquivKind.wFBps, EquivKind.wFRBps})
WEAK_KINDS = frozenset(
    {EquivKind.wFB, EquivKind.wFBps, EquivKind.wRB, EquivKind.wFRB, EquivKind.wFRBps}
)
FWD_KINDS = frozenset(
    {
        EquivKind.FB,
        EquivKind.FBps,
        EquivKind.FRB,
        EquivKind.wFB,
        EquivKind.wFBps,
        EquivKind.wFRB,
        EquivKind.wFRBps,
    }
)
BWD_KINDS = frozenset(
    {EquivKind.RB, EquivKind.wRB, EquivKind.FRB, EquivKind.wFRB, EquivKind.wFRBps}
)


class MoveSystem:
    """Indexed move tables over the disjoint union of one or more LTS trees.

    States of repeated trees are merged, so querying a pair of terms from
    the same origin works as expected.
    """

    def __init__(self, ltss: list[Lts]):
        self.states: list[ProcessTerm] = []
        self.index: dict[ProcessTerm, int] = {}
        succ_t: list[list[tuple[Action, ProcessTerm]]] = []
        pred_t: list[tuple[Action, ProcessTerm] | None] = []
        weak_fwd_t: list[frozenset] = []
        weak_bwd_t: list[frozenset] = []
        for l in ltss:
            sat = weak_saturate(l)
            for s in l.states:
                if s in self.index:
                    continue
                self.index[s] = len(self.states)
                self.states.append(s)
                succ_t.append([(t.action, t.target) for t in l.successors[s]])
                p = l.predecessor[s]
                pred_t.append((p.action, p.source) if p is not None else None)
                weak_fwd_t.append(sat.weak_forward[s])
                weak_bwd_t.append(sat.weak_backward[s])

        idx = self.index
        n = len(self.states)
        self.initial: list[bool] = [is_initial(s) for s in self.states]
        self.succ: list[list[tuple[Action, int]]] = [
            [(a, idx[t]) for a, t in moves] for moves in succ_t
        ]
        self.pred: list[tuple[Action, int] | None] = [
            (p[0], idx[p[1]]) if p is not None else None for p in pred_t
        ]
        self.tau_desc: list[list[int]] = [[] for _ in range(n)]
        self.tau_anc: list[list[int]] = [[] for _ in range(n)]
        self.weak_succ: list[dict[Action, list[int]]] = [{} for _ in range(n)]
        self.weak_pred: list[dict[Action, list[int]]] = [{} for _ in range(n)]
        for i in range(n):
            for label, t in weak_fwd_t[i]:
                j = idx[t]
                if label is None:
                    self.tau_desc[i].append(j)
                else:
                    self.weak_succ[i].setdefault(label, []).append(j)
            for label, t in weak_bwd_t[i]:
                j = idx[t]
                if label is None:
                    self.tau_anc[i].append(j)
                else:
                    self.weak_pred[i].setdefault(label, []).append(j)
        # Branching moves: i reaches qbar by tau-star, then takes one a-step.
        self.branch: list[dict[Action, list[tuple[int, int]]]] = [{} for _ in range(n)]
        for i in range(n):
            for qbar in self.tau_desc[i]:
                for a, q2 in self.succ[qbar]:
                    self.branch[i].setdefault(a, []).append((qbar, q2))

    def fwd_responses(self, kind: EquivKind, j: int, a: Action) -> list[int]:
        if kind in WEAK_KINDS:
            return self.tau_desc[j] if a.is_tau else self.weak_succ[j].get(a, [])
        return [t for b, t in self.succ[j] if b == a]

    def bwd_responses(self, kind: EquivKind, j: int, a: Action) -> list[int]:
        if kind in WEAK_KINDS:
            return self.tau_anc[j] if a.is_tau else self.weak_pred[j].get(a, [])
        p = self.pred[j]
        return [p[1]] if p is not None and p[0] == a else []


def _norm(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i <= j else (j, i)


def _answers(kind: EquivKind, i: int, j: int, related, sys: MoveSystem) -> bool:
    """Every challenge of state i is answered by state j inside `related`."""
    if kind is EquivKind.BB:
        for a, t in sys.succ[i]:
            if a.is_tau and _norm(t, j) in related:
                continue
            if not any(
                _norm(i, qbar) in related and _norm(t, q2) in related
                for qbar, q2 in sys.branch[j].get(a, ())
            ):
                return False
        return True
    if kind in FWD_KINDS:
        for a, t in sys.succ[i]:
            responses = sys.fwd_responses(kind, j, a)
            if not any(_norm(t, r) in related for r in responses):
                return False
    if kind in BWD_KINDS:
        p = sys.pred[i]
        if p is not None:
            a, s = p
            responses = sys.bwd_responses(kind, j, a)
            if not any(_norm(s, r) in related for r in responses):
                return False
    return True


def fixpoint(kind: EquivKind, sys: MoveSystem):
    """Greatest relation closed under the kind's clauses, with removal ranks.

    Returns (related, rank): `related` holds normalized index pairs; `rank`
    maps every non-related candidate pair to the round that removed it
    (past-sensitive pairs excluded for differing initiality get rank 0).
    """
    n = len(sys.states)
    ps = kind in PS_KINDS
    related: set[tuple[int, int]] = set()
    rank: dict[tuple[int, int], int] = {}
    for i in range(n):
        for j in range(i, n):
            if ps and sys.initial[i] != sys.initial[j]:
                rank[(i, j)] = 0
            else:
                related.add((i, j))
    round_no = 0
    while True:
        round_no += 1
        removed = [
            p
            for p in related
            if not (
                _answers(kind, p[0], p[1], related, sys)
                and _answers(kind, p[1], p[0], related, sys)
            )
        ]
        if not removed:
            return related, rank
        for p in removed:
            related.discard(p)
            rank[p] = round_no


@dataclass(frozen=True)
class WitnessRelation:
    """A symmetric relation witnessing an equivalence; closed under the
    clauses of its kind over the systems it was computed from."""

    pairs: frozenset[tuple[ProcessTerm, ProcessTerm]]

    @staticmethod
    def from_indices(related, sys: MoveSystem) -> "WitnessRelation":
        out = set()
        for i, j in related:
            out.add((sys.states[i], sys.states[j]))
            out.add((sys.states[j], sys.states[i]))
        return WitnessRelation(frozenset(out))

    def sorted_pairs(self) -> list[tuple[ProcessTerm, ProcessTerm]]:
        seen = set()
        for p, q in self.pairs:
            seen.add((p, q) if term_key(p) <= term_key(q) else (q, p))
        return sorted(seen, key=lambda pq: (term_key(pq[0]), term_key(pq[1])))


@dataclass
class EquivalenceReport:
    kind: EquivKind
    left: ProcessTerm
    right: ProcessTerm
    equivalent: bool
    witness: WitnessRelation | None = None
    distinguishing: object | None = None  # a Formula when inequivalent

    def to_dict(self) -> dict:
        from .parser import render_formula, render_term

        return {
            "kind": self.kind.value,
            "left": render_term(self.left),
            "right": render_term(self.right),
            "equivalent": self.equivalent,
            "witness": (
                [[render_term(p), render_term(q)] for p, q in self.witness.sorted_pairs()]
                if self.witness is not None
                else None
            ),
            "distinguishing": (
                render_formula(self.distinguishing)
                if self.distinguishing is not None
                else None
            ),
        }


def relation_fixpoint(kind: EquivKind, l1: Lts, l2: Lts) -> WitnessRelation:
    """Greatest symmetric relation over both state sets closed under `kind`."""
    sys = MoveSystem([l1, l2])
    related, _ = fixpoint(kind, sys)
    return WitnessRelation.from_indices(related, sys)


def bisimilar(kind: EquivKind, p1: ProcessTerm, p2: ProcessTerm) -> EquivalenceReport:
    """Decide p1 ≡kind p2, with a witness relation or a distinguishing formula."""
    require_reachable(p1)
    require_reachable(p2)
    l1, l2 = build_lts(p1), build_lts(p2)
    sys = MoveSystem([l1, l2])
    related, _ = fixpoint(kind, sys)
    equivalent = _norm(sys.index[p1], sys.index[p2]) in related
    report = EquivalenceReport(kind=kind, left=p1, right=p2, equivalent=equivalent)
    if equivalent:
        report.witness = WitnessRelation.from_indices(related, sys)
    elif kind is not EquivKind.BB:
        from .diagnose import distinguish

        report.distinguishing = distinguish(kind, p1, p2)
    return report


_TAU_STAR = "τ*"


def _signature(kind: EquivKind, x: int, cid: list[int], sys: MoveSystem):
    fwd = None
    bwd = None
    if kind in FWD_KINDS:
        if kind in WEAK_KINDS:
            sig = {(_TAU_STAR, cid[t]) for t in sys.tau_desc[x]}
            for a, ts in sys.weak_succ[x].items():
                sig |= {(a.name, cid[t]) for t in ts}
        else:
            sig = {(a.name, cid[t]) for a, t in sys.succ[x]}
        fwd = frozenset(sig)
    if kind in BWD_KINDS:
        if kind in WEAK_KINDS:
            sig = {(_TAU_STAR, cid[t]) for t in sys.tau_anc[x]}
            for a, ts in sys.weak_pred[x].items():
                sig |= {(a.name, cid[t]) for t in ts}
        else:
            p = sys.pred[x]
            sig = {(p[0].name, cid[p[1]])} if p is not None else set()
        bwd = frozenset(sig)
    return (fwd, bwd)


def _refine_ids(kind: EquivKind, sys: MoveSystem) -> list[int]:
    n = len(sys.states)
    if kind in PS_KINDS:
        cid = [1 if sys.initial[x] else 0 for x in range(n)]
    else:
        cid = [0] * n
    while True:
        groups: dict[tuple, list[int]] = {}
        for x in range(n):
            groups.setdefault((cid[x], _signature(kind, x, cid, sys)), []).append(x)
        if len(groups) == len(set(cid)):
            return cid
        new_cid = [0] * n
        for gid, (_, members) in enumerate(sorted(groups.items(), key=lambda kv: kv[1][0])):
            for x in members:
                new_cid[x] = gid
        cid = new_cid


def refine_partition(kind: EquivKind, l1: Lts, l2: Lts) -> tuple[frozenset, ...]:
    """Equivalence classes of ≡kind over both state sets, by refinement.

    Independent of `relation_fixpoint`: splits blocks by move signatures
    (saturated moves for the weak kinds) until stable.  Branching
    bisimilarity is out of scope here.
    """
    if kind is EquivKind.BB:
        raise ValueError("partition refinement does not handle branching bisimilarity")
    sys = MoveSystem([l1, l2])
    cid = _refine_ids(kind, sys)
    blocks: dict[int, set[ProcessTerm]] = {}
    for x, c in enumerate(cid):
        blocks.setdefault(c, set()).add(sys.states[x])
    return tuple(
        frozenset(b)
        for b in sorted(blocks.values(), key=lambda b: min(term_key(s) for s in b))
    )


def backward_trace(p: ProcessTerm, weak: bool = False) -> list[Action]:
    """Labels along p's unique backward path, most recent first; weak drops tau."""
    from .lts import backstep

    require_reachable(p)
    trace: list[Action] = []
    cur = p
    while True:
        edge = backstep(cur)
        if edge is None:
            break
        a, cur = edge
        if not (weak and a.is_tau):
            trace.append(a)
    return trace


def _tau_chains(l: Lts) -> list[list[ProcessTerm]]:
    """Maximal tau chains: paths of tau edges not extendable on either end."""
    succ = l.successors
    pred = l.predecessor
    starts = []
    for s in l.states:
        if not any(t.action.is_tau for t in succ[s]):
            continue
        incoming = pred[s]
        if incoming is None or not incoming.action.is_tau:
            starts.append(s)
    chains: list[list[ProcessTerm]] = []

    def extend(path: list[ProcessTerm]) -> None:
        tail = path[-1]
        tau_next = [t.target for t in succ[tail] if t.action.is_tau]
        if not tau_next:
            if len(path) > 1:
                chains.append(path)
            return
        for nxt in tau_next:
            extend(path + [nxt])

    for s in starts:
        extend([s])
    return chains


def stuttering_violations(
    l: Lts, kind: EquivKind = EquivKind.wFRB
) -> list[tuple[ProcessTerm, ...]]:
    """Maximal tau chains with equivalent endpoints but some intermediate
    state not equivalent to the first; empty unless the stuttering property
    fails.  For the past-sensitive kind only chains starting at a
    non-initial state count."""
    if kind not in (EquivKind.wFRB, EquivKind.wFRBps):
        raise ValueError(f"stuttering applies to wFRB or wFRBps, not {kind.value}")
    sys = MoveSystem([l])
    related, _ = fixpoint(kind, sys)
    idx = sys.index
    violations = []
    for chain in _tau_chains(l):
        if kind is EquivKind.wFRBps and is_initial(chain[0]):
            continue
        first, last = idx[chain[0]], idx[chain[-1]]
        if _norm(first, last) not in related:
            continue
        if any(_norm(idx[s], first) not in related for s in chain[1:-1]):
            violations.append(tuple(chain))
    return violations


def cross_violations(
    l1: Lts, l2: Lts
) -> list[tuple[ProcessTerm, ProcessTerm, ProcessTerm, ProcessTerm]]:
    """Quadruples (p1, q1, p2, q2) with p1 =>tau* q1 in l1, p2 =>tau* q2 in
    l2, p1 ~ q2 and q1 ~ p2 but q1 !~ q2 under wFRB; empty unless the cross
    property fails.  Vacuous when the roots are not equivalent."""
    sys = MoveSystem([l1, l2])
    related, _ = fixpoint(EquivKind.wFRB, sys)
    idx = sys.index
    if _norm(idx[l1.root], idx[l2.root]) not in related:
        return []
    pairs1 = [(idx[s], t) for s in l1.states for t in sys.tau_desc[idx[s]]]
    pairs2 = [(idx[s], t) for s in l2.states for t in sys.tau_desc[idx[s]]]
    violations = []
    for (p1, q1), (p2, q2) in itertools.product(pairs1, pairs2):
        if (
            _norm(p1, q2) in related
            and _norm(q1, p2) in related
            and _norm(q1, q2) not in related
        ):
            violations.append(
                (sys.states[p1], sys.states[q1], sys.states[p2], sys.states[q2])
            )
    return violations


def witness_is_closed(
    kind: EquivKind, witness: WitnessRelation, ltss: list[Lts]
) -> bool:
    """Machine-check that a relation is a bisimulation of the given kind."""
    sys = MoveSystem(ltss)
    related = set()
    for p, q in witness.pairs:
        if p not in sys.index or q not in sys.index:
            return False
        related.add(_norm(sys.index[p], sys.index[q]))
    for i, j in related:
        if kind in PS_KINDS and sys.initial[i] != sys.initial[j]:
            return False
        if not (
            _answers(kind, i, j, related, sys)
            and _answers(kind, j, i, related, sys)
        ):
            return False
    return True
