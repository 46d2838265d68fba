"""Simulated execution platform: virtual clock, asynchronous actions with
pre-drawn outcomes, exogenous events, and hidden environment truths."""
from __future__ import annotations

import heapq
import random
import zlib
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import UnknownAction, UnknownChannel, UnknownId
from .model import Branch, Domain, State, TaskInstance
from .values import UNKNOWN

RUNNING = "running"
DONE = "done"
FAILED = "failed"


class RngStreams:
    """Independent named ``random.Random`` streams derived from one seed."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._streams: dict[str, random.Random] = {}

    def seed_for(self, name: str) -> int:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(zlib.crc32(name.encode()),))
        return int(ss.generate_state(2, dtype=np.uint64)[0])

    def __getitem__(self, name: str) -> random.Random:
        rng = self._streams.get(name)
        if rng is None:
            rng = self._streams[name] = random.Random(self.seed_for(name))
        return rng


def draw(branches, rng: random.Random) -> int:
    u = rng.random()
    acc = 0.0
    for i, b in enumerate(branches):
        acc += b.prob
        if u < acc:
            return i
    # rounding slack: last branch with positive mass
    for i in range(len(branches) - 1, -1, -1):
        if branches[i].prob > 0:
            return i
    return len(branches) - 1


def check_args(domain: Domain, name: str, args) -> None:
    spec = domain.actions.get(name)
    if spec is None:
        raise UnknownAction(name)
    if len(args) != len(spec.params):
        raise UnknownAction(f"{name} takes {len(spec.params)} arguments, got {len(args)}")


def sample(domain: Domain, s: State, name: str, args, rng: random.Random):
    """Planner-side draw: returns ``(successor or None, cost, failed)``.

    Works on a copy; ``s`` and any platform are untouched.
    """
    check_args(domain, name, args)
    branches = domain.actions[name].branches(s, tuple(args), None)
    b = branches[draw(branches, rng)] if len(branches) > 1 else branches[0]
    if b.failed:
        return None, b.cost, True
    s2 = s.copy()
    b.apply(s2, tuple(args))
    return s2, b.cost, False


@dataclass
class Environment:
    """Hidden ground truth, read by sensing actions through channels.

    ``truth`` maps a channel name to ``{args tuple: value}``.
    """

    truth: dict = field(default_factory=dict)
    channels: frozenset = frozenset()

    def sense(self, channel: str, *args):
        if channel not in self.channels and channel not in self.truth:
            raise UnknownChannel(channel)
        return self.truth.get(channel, {}).get(tuple(args), UNKNOWN)

    def set(self, channel: str, *args, value):
        self.truth.setdefault(channel, {})[tuple(args)] = value


@dataclass(frozen=True)
class ScheduledEvent:
    """At ``time``: apply ``mutate(xi, env)`` (may be None) and deliver ``tasks``."""

    time: float
    name: str = "event"
    mutate: Callable | None = None
    tasks: tuple = ()


@dataclass
class PendingAction:
    action_id: int
    name: str
    args: tuple
    start: float
    duration: float
    branch_index: int
    branch: Branch
    job: int
    status: str = RUNNING


class Platform:
    """Single-owner discrete-event simulator.

    Outcome branches are drawn when an action is triggered. Effects and costs
    are committed when the completion time is reached by :meth:`advance`, so
    that all observers of the state see one consistent timeline.
    """

    def __init__(self, domain: Domain, xi: State, env: Environment | None = None,
                 events=(), seed: int = 0, streams: RngStreams | None = None,
                 scripted_outcomes: dict | None = None):
        self.domain = domain
        self.xi = xi
        self.env = env if env is not None else Environment(channels=frozenset(domain.channels))
        self.streams = streams if streams is not None else RngStreams(seed)
        self.rng = self.streams["platform"]
        self.now = 0.0
        self._next_id = 1
        self.actions: dict[int, PendingAction] = {}
        self._due: list = []  # heap of (time, kind, order, payload)
        self._order = 0
        self.arrivals: list[TaskInstance] = []
        self.job_cost: dict[int, float] = {}
        self.trace: list = []
        self.scripted = dict(scripted_outcomes or {})
        for ev in events:
            self.schedule(ev)

    # -- scheduling ---------------------------------------------------------

    def schedule(self, ev: ScheduledEvent):
        if ev.time < 0:
            raise ValueError("negative event time")
        self._order += 1
        heapq.heappush(self._due, (ev.time, 1, self._order, ev))

    def next_due(self) -> float | None:
        return self._due[0][0] if self._due else None

    def has_pending(self) -> bool:
        return bool(self._due)

    # -- actions -----------------------------------------------------------

    def trigger(self, name: str, args, job: int = 0) -> int:
        check_args(self.domain, name, args)
        args = tuple(args)
        branches = self.domain.actions[name].branches(self.xi, args, self.env)
        forced = self.scripted.get(name)
        if forced:
            idx = forced.pop(0)
        else:
            idx = draw(branches, self.rng) if len(branches) > 1 else 0
        b = branches[idx]
        aid = self._next_id
        self._next_id += 1
        pa = PendingAction(aid, name, args, self.now, b.duration, idx, b, job)
        self.actions[aid] = pa
        heapq.heappush(self._due, (self.now + b.duration, 0, aid, pa))
        self.trace.append(("trigger", self.now, aid, name, args, idx))
        return aid

    def poll(self, action_id: int) -> str:
        pa = self.actions.get(action_id)
        if pa is None:
            raise UnknownId(action_id)
        return pa.status

    def forget(self, action_id: int):
        self.actions.pop(action_id, None)

    # -- time ----------------------------------------------------------------

    def advance(self, dt: float) -> list:
        if dt < 0:
            raise ValueError("dt must be non-negative")
        return self.advance_to(self.now + dt)

    def advance_to(self, t: float) -> list:
        """Process everything due at or before ``t``; returns reports in order.

        At equal times action completions come first (by ascending id),
        then events in scheduling order.
        """
        reports = []
        while self._due and self._due[0][0] <= t:
            when, kind, _, payload = heapq.heappop(self._due)
            self.now = max(self.now, when)
            if kind == 0:
                self._complete(payload)
                reports.append(("action", payload.action_id, payload.status))
            else:
                if payload.mutate is not None:
                    payload.mutate(self.xi, self.env)
                self.arrivals.extend(payload.tasks)
                self.trace.append(("event", self.now, payload.name))
                reports.append(("event", payload.name, payload.tasks))
        self.now = max(self.now, t)
        return reports

    def _complete(self, pa: PendingAction):
        b = pa.branch
        b.apply(self.xi, pa.args)
        pa.status = FAILED if b.failed else DONE
        self.job_cost[pa.job] = self.job_cost.get(pa.job, 0.0) + b.cost
        self.trace.append(("complete", self.now, pa.action_id, pa.status, b.cost))

    def take_arrivals(self) -> list[TaskInstance]:
        out, self.arrivals = self.arrivals, []
        return out

    # -- sensing / sampling --------------------------------------------------

    def sense(self, channel: str, *args):
        return self.env.sense(channel, *args)

    def sample(self, s: State, name: str, args, rng: random.Random | None = None):
        return sample(self.domain, s, name, args, rng or self.streams["planner"])
