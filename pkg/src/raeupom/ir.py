"""Method bodies as instruction trees, and their stepping semantics.

Bodies are built with the small builder API at the bottom of this module
(``seq``, ``act``, ``sub``, ``assign``, ``if_``, ``while_``, ``fail``).
Program counters are tree paths; ``If``/``While``/``Seq`` are transparent, so
a counter always rests on an executable leaf or on END.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

from .errors import InvalidPC, TypeMismatch
from .values import UNKNOWN, is_numeric, value_key

DEFAULT_LOOP_CAP = 1000


# -- expressions -------------------------------------------------------------


@dataclass(frozen=True)
class Param:
    """Reference to a method parameter or body-local variable."""

    name: str


class _ParamFactory:
    def __getattr__(self, name: str) -> Param:
        if name.startswith("__"):
            raise AttributeError(name)
        return Param(name)


P = _ParamFactory()


@dataclass(frozen=True)
class Var:
    """Read of a state variable instance, arguments are expressions."""

    name: str
    args: tuple = ()

    def __init__(self, name, *args):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "args", tuple(args))


class Scope:
    """Name lookup for method parameters plus body-local variables."""

    __slots__ = ("_params", "_locals")

    def __init__(self, params: Mapping[str, Any], locals_: Mapping[str, Any] = ()):
        self._params = params
        self._locals = dict(locals_)

    def __getitem__(self, name):
        if name in self._locals:
            return self._locals[name]
        return self._params[name]

    def __getattr__(self, name):
        try:
            return self[name]
        except KeyError:
            raise AttributeError(name) from None

    def get(self, name, default=None):
        try:
            return self[name]
        except KeyError:
            return default


def evaluate(expr, s, scope: Scope):
    if isinstance(expr, Param):
        return scope[expr.name]
    if isinstance(expr, Var):
        return s.get(expr.name, *(evaluate(a, s, scope) for a in expr.args))
    if callable(expr):
        return expr(s, scope)
    return expr


# -- tests ---------------------------------------------------------------------

_ORDERED = {
    "<": lambda a, b: a < b,
    ">": lambda a, b: a > b,
    "<=": lambda a, b: a <= b,
    ">=": lambda a, b: a >= b,
}


@dataclass(frozen=True)
class Cmp:
    lhs: Any
    op: str
    rhs: Any

    def __post_init__(self):
        if self.op not in ("=", "!=", *_ORDERED):
            raise ValueError(f"unknown comparison {self.op!r}")


@dataclass(frozen=True)
class Not:
    arg: Any


@dataclass(frozen=True)
class And:
    args: tuple

    def __init__(self, *args):
        object.__setattr__(self, "args", tuple(args))


@dataclass(frozen=True)
class Or:
    args: tuple

    def __init__(self, *args):
        object.__setattr__(self, "args", tuple(args))


def compare(a, op: str, b) -> bool:
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    # unknown is an ordinary value: it is never less or greater than anything
    if a is UNKNOWN or b is UNKNOWN:
        return False
    if is_numeric(a) and is_numeric(b):
        return _ORDERED[op](a, b)
    raise TypeMismatch(f"ordered comparison of non-numeric values {a!r} {op} {b!r}")


def eval_test(test, s, scope: Scope) -> bool:
    if isinstance(test, bool):
        return test
    if isinstance(test, Cmp):
        return compare(evaluate(test.lhs, s, scope), test.op, evaluate(test.rhs, s, scope))
    if isinstance(test, Not):
        return not eval_test(test.arg, s, scope)
    if isinstance(test, And):
        return all(eval_test(t, s, scope) for t in test.args)
    if isinstance(test, Or):
        return any(eval_test(t, s, scope) for t in test.args)
    if callable(test):
        return bool(test(s, scope))
    raise TypeError(f"not a test: {test!r}")


# -- instructions --------------------------------------------------------------


@dataclass(frozen=True)
class Seq:
    steps: tuple


@dataclass(frozen=True)
class If:
    test: Any
    then: Any
    orelse: Any = Seq(())


@dataclass(frozen=True)
class While:
    test: Any
    body: Any
    cap: int = DEFAULT_LOOP_CAP


@dataclass(frozen=True)
class Assign:
    """``target`` is a local name (str) or a ``Var`` naming a state variable."""

    target: Any
    expr: Any


@dataclass(frozen=True)
class Act:
    name: str
    args: tuple = ()


@dataclass(frozen=True)
class Sub:
    name: str
    args: tuple = ()


@dataclass(frozen=True)
class FailNow:
    pass


LEAVES = (Assign, Act, Sub, FailNow)


def _children(node):
    if isinstance(node, Seq):
        return node.steps
    if isinstance(node, If):
        return (node.then, node.orelse)
    if isinstance(node, While):
        return (node.body,)
    return ()


def node_at(root, path):
    node = root
    try:
        for i in path:
            node = _children(node)[i]
    except (IndexError, TypeError):
        raise InvalidPC(f"no instruction at {path!r}") from None
    return node


# builder API

def seq(*steps):
    return Seq(tuple(steps))


def act(name, *args):
    return Act(name, tuple(args))


def sub(name, *args):
    return Sub(name, tuple(args))


def assign(target, expr):
    return Assign(target, expr)


def if_(test, then, orelse=None):
    return If(test, then, Seq(()) if orelse is None else orelse)


def while_(test, body, cap=DEFAULT_LOOP_CAP):
    return While(test, body, cap)


def fail():
    return FailNow()


# -- methods -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MethodTemplate:
    """``params`` bind the task arguments; ``extra`` are free parameters given as
    ``(name, sort)`` where sort names a unary rigid relation or is a callable
    ``f(s, scope) -> iterable`` evaluated with the role parameters bound."""

    name: str
    task: str
    params: tuple = ()
    extra: tuple = ()
    pre: Any = True
    body: Any = Seq(())

    def __post_init__(self):
        object.__setattr__(self, "all_params", tuple(self.params) + tuple(p for p, _ in self.extra))
        object.__setattr__(self, "_nodes", {})

    def node(self, path):
        """Body node at ``path`` (memoized; bodies are immutable)."""
        try:
            return self._nodes[path]
        except KeyError:
            n = self._nodes[path] = node_at(self.body, path)
            return n

    def __repr__(self):
        return f"MethodTemplate({self.name})"


@dataclass(frozen=True)
class MethodInstance:
    template: MethodTemplate = field(compare=False, hash=False)
    args: tuple
    task: Any = field(compare=False, hash=False, default=None)
    name: str = ""

    def __post_init__(self):
        if not self.name:
            object.__setattr__(self, "name", self.template.name)
        object.__setattr__(self, "_binding", dict(zip(self.template.all_params, self.args)))

    @property
    def identity(self):
        return (self.name, self.args)

    @property
    def binding(self) -> dict:
        return dict(self._binding)

    def scope(self, locals_=()) -> Scope:
        return Scope(self._binding, locals_)

    def __repr__(self):
        return f"{self.name}({', '.join(map(repr, self.args))})"


# -- program counters ------------------------------------------------------------


@dataclass(frozen=True)
class PC:
    """Tree path to the current leaf (``None`` is END), While iteration counts,
    and body-local variable values of the running method instance."""

    path: tuple | None
    loops: tuple = ()
    locals: tuple = ()

    @property
    def at_end(self):
        return self.path is None

    def local_dict(self):
        return dict(self.locals)

    def with_local(self, name, value) -> "PC":
        d = dict(self.locals)
        d[name] = value
        return PC(self.path, self.loops, tuple(sorted(d.items(), key=lambda kv: kv[0])))


END = PC(None)


class _Walker:
    def __init__(self, m: MethodInstance, pc: PC, s):
        self.root = m.template.body
        self.node = m.template.node
        self.s = s
        self.loops = dict(pc.loops)
        self.locals = pc.locals
        self.scope = m.scope(pc.locals)

    def enter(self, path):
        node = self.node(path)
        if isinstance(node, LEAVES):
            return path
        if isinstance(node, Seq):
            return self.first_from(path, 0)
        if isinstance(node, If):
            branch = 0 if eval_test(node.test, self.s, self.scope) else 1
            return self.enter(path + (branch,))
        if isinstance(node, While):
            return self.loop(path, node)
        raise InvalidPC(f"unexpected node {node!r}")

    def first_from(self, path, i):
        steps = self.node(path).steps
        for j in range(i, len(steps)):
            r = self.enter(path + (j,))
            if r is not None:
                return r
        return None

    def loop(self, path, node):
        while True:
            n = self.loops.get(path, 0)
            if n >= node.cap or not eval_test(node.test, self.s, self.scope):
                self.loops.pop(path, None)
                return None
            self.loops[path] = n + 1
            r = self.enter(path + (0,))
            if r is not None:
                return r

    def successor(self, path):
        while path:
            parent = path[:-1]
            pnode = self.node(parent)
            if isinstance(pnode, Seq):
                r = self.first_from(parent, path[-1] + 1)
                if r is not None:
                    return r
            elif isinstance(pnode, While):
                r = self.loop(parent, pnode)
                if r is not None:
                    return r
            path = parent
        return None

    def pc(self, path) -> PC:
        if path is None:
            return PC(None, (), self.locals)
        loops = tuple(sorted(self.loops.items()))
        return PC(path, loops, self.locals)


def start_pc(m: MethodInstance, s) -> PC:
    """Counter of the first executable step of ``m`` in state ``s``."""
    w = _Walker(m, PC(()), s)
    return w.pc(w.enter(()))


def next_pc(m: MethodInstance, pc: PC, s) -> PC:
    if pc.at_end:
        raise InvalidPC("END has no successor")
    node = m.template.node(pc.path)
    if not isinstance(node, LEAVES):
        raise InvalidPC(f"{pc.path!r} does not address a step")
    w = _Walker(m, pc, s)
    return w.pc(w.successor(pc.path))


# -- steps -------------------------------------------------------------------------


@dataclass(frozen=True)
class ActStep:
    name: str
    args: tuple


@dataclass(frozen=True)
class SubStep:
    name: str
    args: tuple


@dataclass(frozen=True)
class AssignStep:
    """``var`` is None for a local assignment, else the state variable name."""

    var: str | None
    name_or_args: Any
    value: Any


@dataclass(frozen=True)
class FailStep:
    pass


@dataclass(frozen=True)
class EndStep:
    pass


def current_step(m: MethodInstance, pc: PC, s):
    """Instruction at ``pc`` with arguments evaluated against the binding, the
    body-local variables, and state ``s``."""
    if pc.at_end:
        return EndStep()
    node = m.template.node(pc.path)
    scope = m.scope(pc.locals)
    if isinstance(node, Act):
        return ActStep(node.name, tuple(evaluate(a, s, scope) for a in node.args))
    if isinstance(node, Sub):
        return SubStep(node.name, tuple(evaluate(a, s, scope) for a in node.args))
    if isinstance(node, Assign):
        value = evaluate(node.expr, s, scope)
        if isinstance(node.target, Var):
            args = tuple(evaluate(a, s, scope) for a in node.target.args)
            return AssignStep(node.target.name, args, value)
        return AssignStep(None, node.target, value)
    if isinstance(node, FailNow):
        return FailStep()
    raise InvalidPC(f"{pc.path!r} does not address a step")


def apply_assign(step: AssignStep, pc: PC, s) -> PC:
    """Perform an assignment: state writes mutate ``s``; locals give a new PC."""
    if step.var is None:
        return pc.with_local(step.name_or_args, step.value)
    s.set(step.var, *step.name_or_args, value=step.value)
    return pc


def iter_leaves(node, path=()):
    """Yield ``(path, leaf)`` pairs in body order; used for static checks."""
    if isinstance(node, LEAVES):
        yield path, node
        return
    for i, child in enumerate(_children(node)):
        yield from iter_leaves(child, path + (i,))


def canonical_args(args: tuple) -> tuple:
    return tuple(value_key(a) for a in args)
