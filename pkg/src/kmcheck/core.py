"""Communicating session automata and their bounded FIFO semantics.

A system is a tuple of automata, one per participant, exchanging
messages over point-to-point FIFO channels.  Every ordered pair of
distinct participants owns a channel, whether or not any transition
mentions it, so configurations have a canonical shape.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

SEND = "!"
RECEIVE = "?"
INF = math.inf

TOKEN = re.compile(r"^[A-Za-z0-9_]+$")


class Action(NamedTuple):
    """A send ``sender receiver ! label`` or receive ``sender receiver ? label``."""

    sender: str
    receiver: str
    direction: str
    label: str

    @property
    def channel(self) -> tuple[str, str]:
        return (self.sender, self.receiver)

    @property
    def is_send(self) -> bool:
        return self.direction == SEND

    @property
    def subject(self) -> str:
        return self.sender if self.direction == SEND else self.receiver

    @property
    def partner(self) -> str:
        return self.receiver if self.direction == SEND else self.sender

    def __str__(self) -> str:
        if len(self.sender) == 1 and len(self.receiver) == 1:
            return f"{self.sender}{self.receiver}{self.direction}{self.label}"
        return f"{self.sender}-{self.receiver}{self.direction}{self.label}"


def send(sender: str, receiver: str, label: str) -> Action:
    return Action(sender, receiver, SEND, label)


def receive(sender: str, receiver: str, label: str) -> Action:
    return Action(sender, receiver, RECEIVE, label)


def action_key(action: Action) -> tuple[str, str, str]:
    """Sort key used wherever actions of one subject need a stable order."""
    return (action.partner, action.direction, action.label)


@dataclass(frozen=True)
class Automaton:
    """One participant's machine: states, initial state and labelled transitions."""

    participant: str
    initial: str
    transitions: tuple[tuple[str, Action, str], ...] = ()
    extra_states: frozenset[str] = frozenset()
    _out: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        out: dict[str, list[tuple[Action, str]]] = {}
        for src, act, dst in self.transitions:
            out.setdefault(src, []).append((act, dst))
        frozen = {q: tuple(sorted(moves, key=lambda m: (action_key(m[0]), m[1])))
                  for q, moves in out.items()}
        object.__setattr__(self, "_out", frozen)

    @property
    def states(self) -> frozenset[str]:
        qs = {self.initial} | set(self.extra_states)
        for src, _, dst in self.transitions:
            qs.add(src)
            qs.add(dst)
        return frozenset(qs)

    def outgoing(self, state: str) -> tuple[tuple[Action, str], ...]:
        return self._out.get(state, ())

    def is_final(self, state: str) -> bool:
        return not self._out.get(state)

    def is_sending(self, state: str) -> bool:
        moves = self._out.get(state)
        return bool(moves) and all(a.is_send for a, _ in moves)

    def is_receiving(self, state: str) -> bool:
        moves = self._out.get(state)
        return bool(moves) and all(not a.is_send for a, _ in moves)


class Configuration(NamedTuple):
    """Control-state vector plus one FIFO word per channel.

    Both components are tuples ordered like ``System.participants`` and
    ``System.channels``; use the ``System`` accessors to address them by name.
    """

    control: tuple[str, ...]
    queues: tuple[tuple[str, ...], ...]

    def is_stable(self) -> bool:
        return not any(self.queues)

    def is_bounded(self, k: float) -> bool:
        return all(len(w) <= k for w in self.queues)


@dataclass(frozen=True)
class Violation:
    machine: str
    state: str | None
    rule: str  # determinism | mixed-state | subject | channel
    detail: str = ""
    transition: tuple[str, Action, str] | None = None

    def __str__(self) -> str:
        where = f"{self.machine}" + (f" at state {self.state}" if self.state is not None else "")
        return f"{self.rule} violation in {where}: {self.detail}".rstrip(": ")


class ActionDisabled(Exception):
    """Raised by :func:`successor` when the action cannot fire.

    ``reason`` is one of ``no-transition``, ``queue-full``,
    ``queue-empty`` or ``queue-head-mismatch``.
    """

    def __init__(self, action: Action, reason: str):
        super().__init__(f"{action} disabled: {reason}")
        self.action = action
        self.reason = reason


class System:
    """A named collection of automata over a shared participant set."""

    def __init__(self, automata: Iterable[Automaton], name: str = "system"):
        automata = list(automata)
        self.name = name
        self.participants: tuple[str, ...] = tuple(m.participant for m in automata)
        if len(set(self.participants)) != len(self.participants):
            raise ValueError("participant names must be unique")
        if len(self.participants) < 2:
            raise ValueError("a system needs at least two participants")
        for p in self.participants:
            if not TOKEN.match(p):
                raise ValueError(f"bad participant name {p!r}")
        self.automata: dict[str, Automaton] = {m.participant: m for m in automata}
        self.channels: tuple[tuple[str, str], ...] = tuple(
            (p, q) for p in self.participants for q in self.participants if p != q)
        self.pindex = {p: i for i, p in enumerate(self.participants)}
        self.cindex = {c: i for i, c in enumerate(self.channels)}
        for m in automata:
            for _, act, _ in m.transitions:
                for end in act.channel:
                    if end not in self.pindex:
                        raise ValueError(f"{m.participant}: action {act} names undeclared participant {end!r}")
                if act.sender == act.receiver:
                    raise ValueError(f"{m.participant}: action {act} on a self-channel")
        self._machines = [self.automata[p] for p in self.participants]

    def __repr__(self) -> str:
        return f"System({self.name!r}, participants={list(self.participants)})"

    @property
    def alphabet(self) -> frozenset[str]:
        return frozenset(a.label for m in self.automata.values() for _, a, _ in m.transitions)

    def initial(self) -> Configuration:
        return Configuration(tuple(self.automata[p].initial for p in self.participants),
                             tuple(() for _ in self.channels))

    def state_of(self, config: Configuration, p: str) -> str:
        return config.control[self.pindex[p]]

    def queue(self, config: Configuration, channel: tuple[str, str]) -> tuple[str, ...]:
        return config.queues[self.cindex[channel]]

    def make_config(self, control: dict[str, str], queues: dict[tuple[str, str], Iterable[str]] | None = None
                    ) -> Configuration:
        queues = queues or {}
        return Configuration(tuple(control[p] for p in self.participants),
                             tuple(tuple(queues.get(c, ())) for c in self.channels))

    def moves(self, config: Configuration, k: float = INF) -> list[tuple[Action, Configuration]]:
        """All ``(action, successor)`` pairs enabled at ``config`` under bound ``k``."""
        result = []
        queues = config.queues
        for i, m in enumerate(self._machines):
            for act, dst in m.outgoing(config.control[i]):
                ci = self.cindex[act.channel]
                w = queues[ci]
                if act.direction == SEND:
                    if len(w) >= k:
                        continue
                    nw = w + (act.label,)
                else:
                    if not w or w[0] != act.label:
                        continue
                    nw = w[1:]
                control = config.control[:i] + (dst,) + config.control[i + 1:]
                result.append((act, Configuration(control, queues[:ci] + (nw,) + queues[ci + 1:])))
        return result


def successor(system: System, config: Configuration, action: Action, k: float = INF) -> Configuration:
    """Fire ``action`` from ``config``; raise :class:`ActionDisabled` if it cannot."""
    p = action.subject
    if p not in system.pindex:
        raise ActionDisabled(action, "no-transition")
    i = system.pindex[p]
    m = system.automata[p]
    target = None
    for act, dst in m.outgoing(config.control[i]):
        if act == action:
            target = dst
            break
    if target is None:
        raise ActionDisabled(action, "no-transition")
    ci = system.cindex[action.channel]
    w = config.queues[ci]
    if action.is_send:
        if len(w) >= k:
            raise ActionDisabled(action, "queue-full")
        nw = w + (action.label,)
    else:
        if not w:
            raise ActionDisabled(action, "queue-empty")
        if w[0] != action.label:
            raise ActionDisabled(action, "queue-head-mismatch")
        nw = w[1:]
    control = config.control[:i] + (target,) + config.control[i + 1:]
    return Configuration(control, config.queues[:ci] + (nw,) + config.queues[ci + 1:])


def enabled(system: System, config: Configuration, k: float = INF) -> set[Action]:
    return {a for a, _ in system.moves(config, k)}


def validate_csa(system: System) -> list[Violation]:
    """Report every breach of determinism, no-mixed-states and subject consistency."""
    violations = []
    for p in system.participants:
        m = system.automata[p]
        for src, act, dst in m.transitions:
            if act.subject != p:
                violations.append(Violation(p, src, "subject",
                                            f"{act} has subject {act.subject}", (src, act, dst)))
        for q in sorted(m.states):
            moves = m.outgoing(q)
            seen: dict[Action, str] = {}
            for act, dst in moves:
                if act in seen and seen[act] != dst:
                    violations.append(Violation(p, q, "determinism",
                                                f"{act} leads to both {seen[act]} and {dst}", (q, act, dst)))
                seen.setdefault(act, dst)
            kinds = {a.is_send for a, _ in moves}
            if len(kinds) > 1:
                violations.append(Violation(p, q, "mixed-state", "state has both send and receive transitions",
                                            (q, moves[0][0], moves[0][1])))
    return violations


def directedness(system: System) -> tuple[bool, bool]:
    """Return ``(send_directed, receive_directed)`` for the whole system."""
    send_dir = recv_dir = True
    for m in system.automata.values():
        for q in m.states:
            moves = m.outgoing(q)
            partners = {a.partner for a, _ in moves}
            if len(partners) > 1:
                if m.is_sending(q):
                    send_dir = False
                elif m.is_receiving(q):
                    recv_dir = False
    return send_dir, recv_dir
