"""Predicates on recorded executions.

An execution is any sequence of :class:`~kmcheck.core.Action`.  These
functions need no system, except :func:`replay` and the bounded part of
:func:`analyse`.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .core import INF, Action, ActionDisabled, Configuration, System, successor

DEFAULT_CAP = 64


class InvalidTrace(ValueError):
    """The execution does not respect FIFO order, so the predicate is undefined."""


class ReplayError(Exception):
    def __init__(self, index: int, reason: str, action: Action | None = None):
        super().__init__(f"step {index} ({action}) cannot fire: {reason}")
        self.index = index
        self.reason = reason
        self.action = action


def _sends(phi, ch):
    return [a.label for a in phi if a.is_send and a.channel == ch]


def is_valid(phi) -> bool:
    """Every prefix receives, on every channel, a prefix of what was sent there."""
    sent: dict = {}
    got: dict = {}
    for a in phi:
        if a.is_send:
            sent.setdefault(a.channel, []).append(a.label)
        else:
            w = got.setdefault(a.channel, [])
            s = sent.get(a.channel, [])
            if len(w) >= len(s) or s[len(w)] != a.label:
                return False
            w.append(a.label)
    return True


def _require_valid(phi):
    if not is_valid(phi):
        raise InvalidTrace("execution is not valid")


def is_k_match_bounded(phi, k) -> bool:
    """For every prefix and channel, sends that are eventually matched lead receives by at most ``k``."""
    phi = tuple(phi)
    _require_valid(phi)
    total_recv: dict = {}
    for a in phi:
        if not a.is_send:
            total_recv[a.channel] = total_recv.get(a.channel, 0) + 1
    sent: dict = {}
    got: dict = {}
    for a in phi:
        ch = a.channel
        if a.is_send:
            sent[ch] = sent.get(ch, 0) + 1
        else:
            got[ch] = got.get(ch, 0) + 1
        if min(sent.get(ch, 0), total_recv.get(ch, 0)) - got.get(ch, 0) > k:
            return False
    return True


def is_k_exchange(phi, k) -> tuple[bool, list | None]:
    """Decide whether ``phi`` splits into send-then-receive phases of length at most ``2k``
    such that a message left unreceived in its own phase is never received later.

    Returns ``(holds, phases)`` where ``phases`` is a witnessing split.
    """
    phi = tuple(phi)
    _require_valid(phi)
    n = len(phi)
    limit = 2 * k if k != INF else n

    @lru_cache(maxsize=None)
    def solve(i: int, closed: frozenset):
        if i == n:
            return ()
        best = None
        seen_recv = False
        for j in range(i + 1, min(n, i + int(limit)) + 1):
            a = phi[j - 1]
            if a.is_send and seen_recv:
                break
            if not a.is_send:
                seen_recv = True
                if a.channel in closed:
                    break
            phase = phi[i:j]
            newly = set()
            for ch in {x.channel for x in phase}:
                if _sends(phase, ch) != [x.label for x in phase if not x.is_send and x.channel == ch]:
                    newly.add(ch)
            rest = solve(j, closed | frozenset(newly))
            if rest is not None:
                best = (j,) + rest
                break
        return best

    cuts = solve(0, frozenset())
    solve.cache_clear()
    if cuts is None:
        return False, None
    phases, start = [], 0
    for j in cuts:
        phases.append(list(phi[start:j]))
        start = j
    return True, phases


def _projection(phi, p):
    return tuple(a for a in phi if a.subject == p)


def _participants(*traces):
    return {x for phi in traces for a in phi for x in a.channel}


def projected_equiv(phi, psi) -> bool:
    """Per-participant projections coincide; validity is not required."""
    return all(_projection(phi, p) == _projection(psi, p) for p in _participants(phi, psi))


def causal_equiv(phi, psi) -> bool:
    return is_valid(phi) and is_valid(psi) and projected_equiv(phi, psi)


def replay(system: System, phi, k=INF) -> Configuration:
    """Fire ``phi`` from the initial configuration at bound ``k``."""
    config = system.initial()
    for i, a in enumerate(phi):
        try:
            config = successor(system, config, a, k)
        except ActionDisabled as err:
            raise ReplayError(i, err.reason, a) from None
    return config


def min_bounded(system: System, phi, cap: int = DEFAULT_CAP) -> int | None:
    """Smallest k at which ``phi`` replays from the initial configuration, or None."""
    try:
        replay(system, phi)
    except ReplayError:
        return None
    depth = 0
    config = system.initial()
    for a in phi:
        config = successor(system, config, a)
        depth = max(depth, max((len(w) for w in config.queues), default=0))
    depth = max(depth, 1)
    return depth if depth <= cap else None


def min_match_bounded(phi, cap: int = DEFAULT_CAP) -> int | None:
    for k in range(1, cap + 1):
        if is_k_match_bounded(phi, k):
            return k
    return None


def min_exchange(phi, cap: int = DEFAULT_CAP) -> tuple[int | None, list | None]:
    for k in range(1, cap + 1):
        ok, phases = is_k_exchange(phi, k)
        if ok:
            return k, phases
    return None, None


@dataclass(frozen=True)
class TraceReport:
    valid: bool
    length: int
    replay_ok: bool | None = None
    replay_index: int | None = None
    replay_reason: str | None = None
    min_bounded_k: int | None = None
    min_match_bounded_k: int | None = None
    exchange_k: int | None = None
    decomposition: tuple | None = None
    cap: int = DEFAULT_CAP


def analyse(phi, system: System | None = None, k=INF, cap: int = DEFAULT_CAP) -> TraceReport:
    """Collect every trace predicate into one report."""
    phi = tuple(phi)
    valid = is_valid(phi)
    fields = {}
    if system is not None:
        try:
            replay(system, phi, k)
            fields.update(replay_ok=True)
        except ReplayError as err:
            fields.update(replay_ok=False, replay_index=err.index, replay_reason=err.reason)
        fields["min_bounded_k"] = min_bounded(system, phi, cap)
    if valid:
        fields["min_match_bounded_k"] = min_match_bounded(phi, cap)
        ek, phases = min_exchange(phi, cap)
        fields["exchange_k"] = ek
        if phases is not None:
            fields["decomposition"] = tuple(tuple(p) for p in phases)
    return TraceReport(valid, len(phi), cap=cap, **fields)
