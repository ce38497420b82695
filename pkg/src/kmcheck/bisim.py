"""Participant projections of transition systems and weak bisimilarity.

A projection keeps the graph shape and hides every action whose subject
is not the chosen participant.  Weak bisimilarity is decided by
saturating the hidden steps and refining a partition of the disjoint
union of both graphs until it is stable.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

from .checks import PropertyVerdict
from .explore import DEFAULT_NODE_CAP, TransitionSystem, build_full_ts
from .core import System

TAU = None  # label of hidden steps

LOCAL_AGNOSTIC = "bound-agnostic"


@dataclass(frozen=True)
class ProjectedLts:
    """Labelled graph whose labels are actions of one participant or ``None`` for hidden steps."""

    participant: str
    nodes: tuple
    initial: object
    edges: tuple

    def labels(self) -> set:
        return {a for _, a, _ in self.edges if a is not TAU}


def project(ts: TransitionSystem, p: str) -> ProjectedLts:
    if p not in ts.system.pindex:
        raise ValueError(f"unknown participant {p!r}")
    edges = tuple((s, a if a.subject == p else TAU, t) for s, a, t in ts.edges)
    return ProjectedLts(p, ts.nodes, ts.initial, edges)


def _saturate(lts: ProjectedLts, tag) -> dict:
    """Weak moves: ``s =a=> t`` for visible ``a`` (tau* a tau*) and ``s => t`` (tau*, reflexive)."""
    tau_succ: dict = {n: [] for n in lts.nodes}
    vis_succ: dict = {n: [] for n in lts.nodes}
    for s, a, t in lts.edges:
        (tau_succ if a is TAU else vis_succ)[s].append((a, t))
    closure = {}
    for n in lts.nodes:
        seen = {n}
        stack = [n]
        while stack:
            x = stack.pop()
            for _, y in tau_succ[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        closure[n] = seen
    weak = {}
    for n in lts.nodes:
        moves = {((tag, y), TAU) for y in closure[n]}
        for x in closure[n]:
            for a, y in vis_succ[x]:
                for z in closure[y]:
                    moves.add(((tag, z), a))
        weak[(tag, n)] = moves
    return weak


def _stable_partition(weak: dict) -> dict:
    """Coarsest partition stable under the weak moves (signature refinement)."""
    block = {n: 0 for n in weak}
    count = 1
    while True:
        sigs = {n: (block[n], frozenset((a, block[t]) for t, a in moves)) for n, moves in weak.items()}
        ids: dict = {}
        new = {n: ids.setdefault(sig, len(ids)) for n, sig in sigs.items()}
        if len(ids) == count:
            return new
        block, count = new, len(ids)


def weak_bisim(a: ProjectedLts, b: ProjectedLts) -> bool:
    """True iff the initial states of ``a`` and ``b`` are weakly bisimilar."""
    weak = _saturate(a, 0)
    weak.update(_saturate(b, 1))
    block = _stable_partition(weak)
    return block[(0, a.initial)] == block[(1, b.initial)]


def check_bound_agnostic(system: System, k: int, node_cap: int = DEFAULT_NODE_CAP) -> PropertyVerdict:
    """Each participant's hidden-step projection is the same, up to weak bisimilarity, at bounds k and k+1."""
    started = time.perf_counter()
    ts_k = build_full_ts(system, k, node_cap)
    ts_next = build_full_ts(system, k + 1, node_cap)
    differing = [p for p in system.participants if not weak_bisim(project(ts_k, p), project(ts_next, p))]
    detail = f"projections differ for {', '.join(differing)}" if differing else ""
    return PropertyVerdict(LOCAL_AGNOSTIC, not differing, k, detail=detail, nodes=len(ts_k.nodes),
                           edges=len(ts_k.edges), seconds=time.perf_counter() - started)
