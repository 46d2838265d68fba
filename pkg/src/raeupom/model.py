"""Domain-independent data model: states, rigid relations, tasks, actions,
and the domain registry with method applicability."""
from __future__ import annotations

import itertools
import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

from .errors import DomainError, UndeclaredVariable, UnknownAction, ValueOutOfRange
from .ir import (
    Act, MethodInstance, MethodTemplate, Scope, Sub, eval_test, iter_leaves,
)
from .values import UNKNOWN, Finite, as_range, value_key

PROB_TOL = 1e-9


@dataclass(frozen=True)
class Sort:
    """Range given by a unary rigid relation of the problem, plus extra values."""

    relation: str
    extra: tuple = ()
    finite = True


@dataclass(frozen=True)
class StateVarDecl:
    name: str
    arity: int
    range: Any

    def admits(self, value, rigid) -> bool:
        if value is UNKNOWN:
            return True
        if isinstance(self.range, Sort):
            return value in self.range.extra or rigid.holds(self.range.relation, value)
        return value in self.range


class Rigid(Mapping):
    """Immutable relations fixed for a problem: name -> frozenset of tuples.

    ``unary`` maps a relation name to an iterable of objects, each stored as a
    1-tuple; ``relations`` gives n-ary relations as iterables of tuples.
    """

    def __init__(self, unary: Mapping | None = None, relations: Mapping | None = None):
        rel = {}
        order = {}
        for name, objs in (unary or {}).items():
            objs = list(objs)
            rel[name] = frozenset((o,) for o in objs)
            order[name] = tuple(objs)
        for name, tuples in (relations or {}).items():
            rel[name] = frozenset(tuple(t) for t in tuples)
        self._rel = rel
        self._order = order

    def __getitem__(self, name):
        return self._rel[name]

    def __iter__(self):
        return iter(self._rel)

    def __len__(self):
        return len(self._rel)

    def holds(self, name, *args) -> bool:
        return tuple(args) in self._rel.get(name, ())

    def objects(self, name) -> list:
        """Members of a unary relation in declaration order."""
        if name in self._order:
            return list(self._order[name])
        return sorted((t[0] for t in self._rel.get(name, ())), key=value_key)

    def to_json(self):
        return {
            "unary": {k: list(v) for k, v in self._order.items()},
            "relations": {k: sorted(map(list, v)) for k, v in self._rel.items() if k not in self._order},
        }

    def __repr__(self):
        return f"Rigid({sorted(self._rel)})"


class State:
    """Total assignment of declared state-variable instances to values.

    Unset instances read as ``UNKNOWN``. ``rigid`` is shared, never copied.
    """

    __slots__ = ("decls", "rigid", "_vals", "_key")

    def __init__(self, decls: Mapping[str, StateVarDecl], rigid: Rigid | None = None, values=None):
        self.decls = decls
        self.rigid = rigid if rigid is not None else Rigid()
        self._vals = {}
        self._key = None
        for (name, args), v in (values or {}).items():
            self.set(name, *args, value=v)

    def get(self, name, *args):
        if name not in self.decls:
            raise UndeclaredVariable(name)
        return self._vals.get((name, args), UNKNOWN)

    def set(self, name, *args, value):
        decl = self.decls.get(name)
        if decl is None:
            raise UndeclaredVariable(name)
        if len(args) != decl.arity:
            raise UndeclaredVariable(f"{name} takes {decl.arity} arguments, got {len(args)}")
        if not decl.admits(value, self.rigid):
            raise ValueOutOfRange(f"{name}{args} := {value!r}")
        self._key = None
        if value is UNKNOWN:
            self._vals.pop((name, args), None)
        else:
            self._vals[(name, args)] = value

    def __getitem__(self, key):
        if isinstance(key, tuple):
            return self.get(key[0], *key[1:])
        return self.get(key)

    def __setitem__(self, key, value):
        if isinstance(key, tuple):
            self.set(key[0], *key[1:], value=value)
        else:
            self.set(key, value=value)

    def items(self):
        return self._vals.items()

    def copy(self) -> "State":
        c = State.__new__(State)
        c.decls = self.decls
        c.rigid = self.rigid
        c._vals = dict(self._vals)
        c._key = self._key
        return c

    def key(self) -> frozenset:
        if self._key is None:
            self._key = frozenset(self._vals.items())
        return self._key

    def __eq__(self, other):
        return isinstance(other, State) and self._vals == other._vals

    def __hash__(self):
        return hash(self.key())

    def to_json(self):
        return [[name, list(args), v] for (name, args), v in sorted(self._vals.items(), key=lambda kv: (kv[0][0], value_key(kv[0][1])))]

    def __repr__(self):
        body = ", ".join(f"{n}{a!r}={v!r}" for (n, a), v in sorted(self._vals.items(), key=lambda kv: (kv[0][0], value_key(kv[0][1]))))
        return f"State({body})"


@dataclass(frozen=True)
class TaskInstance:
    name: str
    args: tuple = ()
    origin: str = field(default="root", compare=False)

    def __repr__(self):
        return f"{self.name}({', '.join(map(repr, self.args))})"


@dataclass(frozen=True)
class TaskDecl:
    name: str
    params: tuple


@dataclass(frozen=True)
class Branch:
    """One outcome of an action: ``effect(s, args)`` mutates a state in place."""

    prob: float
    effect: Callable | None = None
    cost: float = 1.0
    duration: float = 1.0
    failed: bool = False

    def apply(self, s, args):
        if self.effect is not None:
            self.effect(s, args)


FAILED = "failed"


def check_branches(name, branches: Sequence[Branch]):
    if not branches:
        raise DomainError(f"action {name}: empty outcome model")
    total = 0.0
    for b in branches:
        if not 0.0 <= b.prob <= 1.0:
            raise DomainError(f"action {name}: probability {b.prob} outside [0,1]")
        if not (math.isfinite(b.cost) and b.cost > 0):
            raise DomainError(f"action {name}: branch cost must be finite and > 0, got {b.cost}")
        if b.duration < 0:
            raise DomainError(f"action {name}: negative duration")
        total += b.prob
    if abs(total - 1.0) > PROB_TOL:
        raise DomainError(f"action {name}: probabilities sum to {total}")


@dataclass(frozen=True)
class ActionSpec:
    """Generative outcome model of an action.

    ``model`` is either a fixed list of branches or ``f(s, args, env)``
    returning one. ``env`` is the hidden environment on the acting side and
    ``None`` in planner simulation; sensing actions use it to pick the true
    reading and otherwise fall back to a prior over readings.
    """

    name: str
    params: tuple
    model: Any

    def branches(self, s, args, env=None) -> Sequence[Branch]:
        if callable(self.model):
            br = self.model(s, tuple(args), env)
            check_branches(self.name, br)
            return br
        return self.model


class Domain:
    """Registry of variables, tasks, actions, methods (declaration order kept)."""

    def __init__(self, name: str):
        self.name = name
        self.variables: dict[str, StateVarDecl] = {}
        self.tasks: dict[str, TaskDecl] = {}
        self.actions: dict[str, ActionSpec] = {}
        self.methods: list[MethodTemplate] = []
        self._by_task: dict[str, list[MethodTemplate]] = {}
        self.channels: set[str] = set()
        self.abstraction: Callable | None = None
        self.heuristic: Callable | None = None
        self.events: set[str] = set()
        self.params: dict[str, Any] = {}

    # registration ---------------------------------------------------------

    def declare_variable(self, name, arity=0, range=None):
        if name in self.variables:
            raise DomainError(f"variable {name} declared twice")
        rng = range if isinstance(range, Sort) else as_range(range)
        self.variables[name] = StateVarDecl(name, arity, rng)

    def declare_task(self, name, *params):
        if name in self.tasks:
            raise DomainError(f"task {name} declared twice")
        self.tasks[name] = TaskDecl(name, tuple(params))

    def declare_action(self, name, params=(), model=None):
        if name in self.actions:
            raise DomainError(f"action {name} declared twice")
        if model is None:
            raise DomainError(f"action {name} needs an outcome model")
        if not callable(model):
            model = tuple(model)
            check_branches(name, model)
        self.actions[name] = ActionSpec(name, tuple(params), model)

    def declare_channel(self, name):
        self.channels.add(name)

    def declare_method(self, name, task, params=(), extra=(), pre=True, body=None):
        from .ir import Seq

        if task not in self.tasks:
            raise DomainError(f"method {name}: undeclared task {task}")
        if len(params) != len(self.tasks[task].params):
            raise DomainError(f"method {name}: role arity mismatch with task {task}")
        if any(m.name == name for m in self.methods):
            raise DomainError(f"method {name} declared twice")
        t = MethodTemplate(name, task, tuple(params), tuple(extra), pre, body if body is not None else Seq(()))
        for _, leaf in iter_leaves(t.body):
            if isinstance(leaf, Act):
                spec = self.actions.get(leaf.name)
                if spec is None:
                    raise DomainError(f"method {name}: undeclared action {leaf.name}")
                if len(leaf.args) != len(spec.params):
                    raise DomainError(f"method {name}: arity mismatch for action {leaf.name}")
            elif isinstance(leaf, Sub):
                decl = self.tasks.get(leaf.name)
                if decl is None:
                    raise DomainError(f"method {name}: undeclared task {leaf.name}")
                if len(leaf.args) != len(decl.params):
                    raise DomainError(f"method {name}: arity mismatch for task {leaf.name}")
        self.methods.append(t)
        self._by_task.setdefault(task, []).append(t)
        return t

    # queries ----------------------------------------------------------------

    def methods_for(self, task_name) -> list[MethodTemplate]:
        return self._by_task.get(task_name, [])

    def method(self, name) -> MethodTemplate:
        for m in self.methods:
            if m.name == name:
                return m
        raise KeyError(name)

    def action(self, name) -> ActionSpec:
        try:
            return self.actions[name]
        except KeyError:
            raise UnknownAction(name) from None

    def task(self, name, *args) -> TaskInstance:
        decl = self.tasks.get(name)
        if decl is None:
            raise DomainError(f"undeclared task {name}")
        if len(args) != len(decl.params):
            raise DomainError(f"task {name} takes {len(decl.params)} arguments")
        return TaskInstance(name, tuple(args))

    def new_state(self, rigid: Rigid | None = None, values=None) -> State:
        return State(self.variables, rigid, values)

    def abstract(self, xi: State) -> State:
        return abstract(xi, self.abstraction)

    def __repr__(self):
        return f"Domain({self.name}: {len(self.tasks)} tasks, {len(self.methods)} methods, {len(self.actions)} actions)"


def abstract(xi: State, hook: Callable | None = None) -> State:
    """Planning abstraction of the observed state; identity unless a hook is given."""
    if hook is None:
        return xi.copy()
    return hook(xi)


def _free_values(sort, s, scope):
    if isinstance(sort, str):
        vals = s.rigid.objects(sort)
    elif callable(sort):
        vals = list(sort(s, scope))
    else:
        vals = list(sort)
    return sorted(vals, key=value_key)


def applicable(s: State, tau: TaskInstance, domain: Domain, rigid: Rigid | None = None) -> list[MethodInstance]:
    """Applicable method instances for ``tau`` in ``s``: templates in declaration
    order, free-parameter bindings in canonical value order."""
    if rigid is not None and rigid is not s.rigid:
        s = s.copy()
        s.rigid = rigid
    out = []
    for t in domain.methods_for(tau.name):
        role = dict(zip(t.params, tau.args))
        if not t.extra:
            if eval_test(t.pre, s, Scope(role)):
                out.append(MethodInstance(t, tuple(tau.args), tau))
            continue
        choices = []
        partial = dict(role)
        for pname, sort in t.extra:
            choices.append(_free_values(sort, s, Scope(partial)))
        for combo in itertools.product(*choices):
            binding = dict(role)
            binding.update(zip((p for p, _ in t.extra), combo))
            if eval_test(t.pre, s, Scope(binding)):
                out.append(MethodInstance(t, tuple(tau.args) + tuple(combo), tau))
    return out


def make_instance(domain: Domain, template_name: str, tau: TaskInstance, extra_args=()) -> MethodInstance:
    t = domain.method(template_name)
    return MethodInstance(t, tuple(tau.args) + tuple(extra_args), tau)


__all__ = [
    "ActionSpec", "Branch", "Domain", "FAILED", "Rigid", "Sort", "State", "StateVarDecl",
    "TaskDecl", "TaskInstance", "abstract", "applicable", "make_instance", "Finite",
]
