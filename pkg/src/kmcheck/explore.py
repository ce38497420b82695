"""Explicit construction of bounded transition systems.

``build_full_ts`` enumerates every k-bounded step; ``build_rts`` runs the
partition-based persistent-set search, which keeps one representative
ordering for actions of distinct participants.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .core import Action, Configuration, System, action_key

DEFAULT_NODE_CAP = 5_000_000

FULL = "full"
REDUCED = "reduced"
SYNCHRONOUS = "synchronous"


class ResourceLimit(Exception):
    """The configured node cap was exceeded during exploration."""

    def __init__(self, cap: int, kind: str, bound):
        super().__init__(f"{kind} exploration at bound {bound} exceeded {cap} configurations")
        self.cap = cap
        self.kind = kind
        self.bound = bound


@dataclass(frozen=True)
class TransitionSystem:
    """An explicit labelled graph of configurations.

    ``nodes`` and ``edges`` keep discovery order so that repeated builds
    produce identical sequences.
    """

    system: System = field(repr=False, compare=False)
    initial: Configuration
    nodes: tuple[Configuration, ...]
    edges: tuple[tuple[Configuration, Action, Configuration], ...]
    kind: str
    bound: float
    _succ: dict = field(init=False, repr=False, compare=False, hash=False)
    _pred: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        succ: dict = {n: [] for n in self.nodes}
        pred: dict = {n: [] for n in self.nodes}
        for s, a, t in self.edges:
            succ[s].append((a, t))
            pred[t].append((a, s))
        object.__setattr__(self, "_succ", succ)
        object.__setattr__(self, "_pred", pred)

    def successors(self, node: Configuration) -> list[tuple[Action, Configuration]]:
        return self._succ.get(node, [])

    def predecessors(self, node: Configuration) -> list[tuple[Action, Configuration]]:
        return self._pred.get(node, [])

    @property
    def node_set(self) -> frozenset[Configuration]:
        return frozenset(self.nodes)

    @property
    def edge_set(self) -> frozenset:
        return frozenset(self.edges)

    def __len__(self) -> int:
        return len(self.edges)


def _check_bound(k):
    if not k >= 1:
        raise ValueError(f"bound must be >= 1, got {k}")


def build_full_ts(system: System, k: float, node_cap: int = DEFAULT_NODE_CAP) -> TransitionSystem:
    """Every configuration reachable by a k-bounded execution, with every k-bounded step."""
    _check_bound(k)
    s0 = system.initial()
    seen = {s0: None}
    order = [s0]
    edges = []
    todo = deque([s0])
    while todo:
        s = todo.popleft()
        for act, t in system.moves(s, k):
            edges.append((s, act, t))
            if t not in seen:
                seen[t] = None
                order.append(t)
                if len(order) > node_cap:
                    raise ResourceLimit(node_cap, FULL, k)
                todo.append(t)
    return TransitionSystem(system, s0, tuple(order), tuple(edges), FULL, k)


def partition(system: System, config: Configuration, k: float) -> list[tuple[Action, ...]]:
    """Enabled actions grouped by subject, smallest groups first.

    Ties are broken by participant name; inside a group actions are ordered
    by (partner, direction, label).
    """
    groups: dict[str, list[Action]] = {}
    for act, _ in system.moves(config, k):
        groups.setdefault(act.subject, []).append(act)
    ordered = sorted(groups.items(), key=lambda kv: (len(kv[1]), kv[0]))
    return [tuple(sorted(acts, key=action_key)) for _, acts in ordered]


def build_rts(system: System, k: float, node_cap: int = DEFAULT_NODE_CAP) -> TransitionSystem:
    """Reduced k-bounded transition system (stack-based persistent-set search)."""
    _check_bound(k)
    s0 = system.initial()
    visited: set[Configuration] = set()
    accum: dict[tuple, None] = {}
    order = {s0: None}
    stack: list[tuple[Configuration, tuple]] = [(s0, ())]
    while stack:
        s, pending = stack.pop()
        if s in visited:
            continue
        visited.add(s)
        if len(visited) > node_cap:
            raise ResourceLimit(node_cap, REDUCED, k)
        if not pending:
            pending = tuple(partition(system, s, k))
        if not pending:
            continue
        head, tail = pending[0], pending[1:]
        moves = dict(system.moves(s, k))
        for act in head:
            # a group only holds actions of one subject; other participants cannot disable them
            t = moves[act]
            stack.append((t, tail))
            accum[(s, act, t)] = None
            order.setdefault(t, None)
    return TransitionSystem(system, s0, tuple(order), tuple(accum), REDUCED, k)


def _config_label(system: System, config: Configuration) -> str:
    control = ",".join(config.control)
    queues = [f"{a}{b}={'.'.join(w)}" if len(a) == 1 and len(b) == 1 else f"{a}-{b}={'.'.join(w)}"
              for (a, b), w in zip(system.channels, config.queues) if w]
    return f"({control})" + ("\\n" + " ".join(queues) if queues else "")


def to_dot(ts: TransitionSystem, name: str = "TS") -> str:
    """Render a transition system as a DOT digraph; the initial node is doubly circled."""
    ids = {n: f"n{i}" for i, n in enumerate(ts.nodes)}
    lines = [f'digraph "{name}" {{', "  rankdir=LR;", "  node [shape=circle];"]
    for n, nid in ids.items():
        shape = ' shape=doublecircle' if n == ts.initial else ''
        label = _config_label(ts.system, n).replace('"', '\\"')
        lines.append(f'  {nid} [label="{label}"{shape}];')
    for s, a, t in ts.edges:
        lines.append(f'  {ids[s]} -> {ids[t]} [label="{a}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
