"""Domain bundles and problem instances (JSON round-trippable)."""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from ..model import Domain, Rigid, State, TaskInstance
from ..platform import Environment, Platform, RngStreams, ScheduledEvent
from ..values import UNKNOWN

_UNK = "__unknown__"


def to_jsonable(v):
    if v is UNKNOWN:
        return _UNK
    if isinstance(v, tuple):
        return [to_jsonable(x) for x in v]
    return v


def from_jsonable(v):
    if v == _UNK:
        return UNKNOWN
    if isinstance(v, list):
        return tuple(from_jsonable(x) for x in v)
    return v


@dataclass(frozen=True)
class EventSpec:
    """Exogenous event: state writes, environment writes, and new root tasks."""

    time: float
    name: str = "event"
    assignments: tuple = ()      # ((var, args, value), ...)
    env_assignments: tuple = ()  # ((channel, args, value), ...)
    tasks: tuple = ()            # (TaskInstance, ...)
    env_unless: tuple = ()       # ((channel, args, value), ...): skip env writes if any holds

    def scheduled(self) -> ScheduledEvent:
        assigns, envs, unless = self.assignments, self.env_assignments, self.env_unless

        def mutate(xi, env):
            for var, args, value in assigns:
                xi.set(var, *args, value=value)
            if any(env.sense(ch, *args) == value for ch, args, value in unless):
                return
            for ch, args, value in envs:
                env.set(ch, *args, value=value)

        return ScheduledEvent(self.time, self.name, mutate if (assigns or envs) else None, tuple(self.tasks))


@dataclass
class ProblemInstance:
    domain: str
    rigid: dict = field(default_factory=dict)          # unary relation -> list
    relations: dict = field(default_factory=dict)      # n-ary relation -> list of tuples
    initial: list = field(default_factory=list)        # [(var, args, value)]
    env: dict = field(default_factory=dict)            # channel -> [(args, value)]
    events: list = field(default_factory=list)         # [EventSpec]
    tasks: dict = field(default_factory=dict)          # time -> [TaskInstance]
    seed: int = 0
    params: dict = field(default_factory=dict)

    def make_rigid(self) -> Rigid:
        return Rigid(self.rigid, self.relations)

    def initial_state(self, domain: Domain) -> State:
        s = domain.new_state(self.make_rigid())
        for var, args, value in self.initial:
            s.set(var, *args, value=value)
        return s

    def environment(self, domain: Domain) -> Environment:
        env = Environment(channels=frozenset(domain.channels))
        for ch, pairs in self.env.items():
            for args, value in pairs:
                env.set(ch, *args, value=value)
        return env

    def scheduled(self) -> list[ScheduledEvent]:
        out = [ev.scheduled() for ev in self.events]
        for t in sorted(self.tasks):
            out.append(ScheduledEvent(float(t), "arrival", None, tuple(self.tasks[t])))
        return out

    def n_tasks(self) -> int:
        return sum(len(v) for v in self.tasks.values()) + sum(len(e.tasks) for e in self.events)

    # -- serialization -------------------------------------------------------

    def to_json(self) -> dict:
        tj = lambda t: [t.name, [to_jsonable(a) for a in t.args]]
        return {
            "domain": self.domain,
            "seed": self.seed,
            "rigid": {k: [to_jsonable(x) for x in v] for k, v in self.rigid.items()},
            "relations": {k: [to_jsonable(tuple(x)) for x in v] for k, v in self.relations.items()},
            "initial": [[v, to_jsonable(tuple(a)), to_jsonable(x)] for v, a, x in self.initial],
            "env": {k: [[to_jsonable(tuple(a)), to_jsonable(x)] for a, x in v] for k, v in self.env.items()},
            "events": [
                {
                    "time": e.time, "name": e.name,
                    "assignments": [[v, to_jsonable(tuple(a)), to_jsonable(x)] for v, a, x in e.assignments],
                    "env_assignments": [[c, to_jsonable(tuple(a)), to_jsonable(x)] for c, a, x in e.env_assignments],
                    "tasks": [tj(t) for t in e.tasks],
                    "env_unless": [[c, to_jsonable(tuple(a)), to_jsonable(x)] for c, a, x in e.env_unless],
                }
                for e in self.events
            ],
            "tasks": {str(t): [tj(x) for x in v] for t, v in sorted(self.tasks.items())},
            "params": self.params,
        }

    @classmethod
    def from_json(cls, d: dict) -> "ProblemInstance":
        fj = lambda x: TaskInstance(x[0], tuple(from_jsonable(a) for a in x[1]))
        num = lambda t: float(t) if "." in t else int(t)
        return cls(
            domain=d["domain"],
            seed=d.get("seed", 0),
            rigid={k: [from_jsonable(x) for x in v] for k, v in d.get("rigid", {}).items()},
            relations={k: [from_jsonable(x) for x in v] for k, v in d.get("relations", {}).items()},
            initial=[(v, from_jsonable(a), from_jsonable(x)) for v, a, x in d.get("initial", [])],
            env={k: [(from_jsonable(a), from_jsonable(x)) for a, x in v] for k, v in d.get("env", {}).items()},
            events=[
                EventSpec(e["time"], e.get("name", "event"),
                          tuple((v, from_jsonable(a), from_jsonable(x)) for v, a, x in e.get("assignments", [])),
                          tuple((c, from_jsonable(a), from_jsonable(x)) for c, a, x in e.get("env_assignments", [])),
                          tuple(fj(t) for t in e.get("tasks", [])),
                          tuple((c, from_jsonable(a), from_jsonable(x)) for c, a, x in e.get("env_unless", [])))
                for e in d.get("events", [])
            ],
            tasks={num(t): [fj(x) for x in v] for t, v in d.get("tasks", {}).items()},
            params=d.get("params", {}),
        )

    def dump(self, path):
        Path(path).write_text(json.dumps(self.to_json(), indent=1, sort_keys=True))

    @classmethod
    def load(cls, path) -> "ProblemInstance":
        return cls.from_json(json.loads(Path(path).read_text()))


@dataclass
class DomainBundle:
    name: str
    domain: Domain
    generator: Callable[[random.Random, float], ProblemInstance]
    default_problem: Callable[[], ProblemInstance] | None = None
    dead_ends: bool = False
    params: dict = field(default_factory=dict)

    def gen_problem(self, rng: random.Random | int, difficulty: float = 1.0) -> ProblemInstance:
        if isinstance(rng, int):
            rng = random.Random(rng)
        return self.generator(rng, difficulty)

    def platform(self, problem: ProblemInstance, seed: int, streams: RngStreams | None = None, **kw) -> Platform:
        xi = problem.initial_state(self.domain)
        env = problem.environment(self.domain)
        return Platform(self.domain, xi, env, problem.scheduled(), seed=seed, streams=streams, **kw)
