"""Exact maximal expected utility by exhaustive recursion over refinements and
action outcomes, for small static domains; plus a random micro-domain
generator used to test planner convergence against it."""
from __future__ import annotations

import random
import sys
from dataclasses import dataclass

from .errors import BlowupGuard, NonStaticDomain
from .ir import (
    ActStep, AssignStep, Cmp, FailStep, MethodInstance, SubStep, Var, act, apply_assign,
    current_step, if_, seq, sub,
)
from .model import Branch, Domain, State, TaskInstance, applicable
from .stack import EMPTY, RefinementStack, advance, push_method, settle
from .utility import EFF, Kind, one, oplus_f

DEFAULT_GUARD = 10**6


class _Evaluator:
    def __init__(self, domain: Domain, kind: Kind, guard: int):
        if domain.events:
            raise NonStaticDomain(f"domain {domain.name} has exogenous events")
        self.domain = domain
        self.kind = Kind.parse(kind)
        self.guard = guard
        self.nodes = 0
        self.memo: dict = {}

    def value(self, stack: RefinementStack, s: State) -> float:
        if not stack:
            return one(self.kind)
        key = (stack.signature(), s.key())
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        self.nodes += 1
        if self.nodes > self.guard:
            raise BlowupGuard(f"more than {self.guard} oracle nodes")
        v = self._expand(stack, s)
        self.memo[key] = v
        return v

    def _expand(self, stack, s):
        f = stack.top
        step = current_step(f.method, f.pc, s)
        if isinstance(step, AssignStep):
            s2 = s.copy()
            pc = apply_assign(step, f.pc, s2)
            return self.value(advance(stack.replace_top(f.at(pc)), s2), s2)
        if isinstance(step, ActStep):
            args = tuple(step.args)
            total = 0.0
            for b in self.domain.action(step.name).branches(s, args, None):
                if b.prob == 0.0 or b.failed:
                    continue
                s2 = s.copy()
                b.apply(s2, args)
                rest = self.value(advance(stack, s2), s2)
                total += b.prob * oplus_f(1.0 / b.cost if self.kind is EFF else 1.0, rest, self.kind)
            return total
        if isinstance(step, SubStep):
            tau = TaskInstance(step.name, step.args, "subtask")
            best = 0.0
            for m in applicable(s, tau, self.domain):
                v = self.value(push_method(stack, tau, m, (), s), s)
                if v > best:
                    best = v
            return best
        if isinstance(step, FailStep):
            return 0.0
        return self.value(settle(stack, s), s)


def _deep(fn):
    limit = sys.getrecursionlimit()
    if limit < 20000:
        sys.setrecursionlimit(20000)
    try:
        return fn()
    finally:
        sys.setrecursionlimit(limit)


def exact_utility(domain: Domain, m: MethodInstance, s: State, sigma: RefinementStack | None = None,
                  kind: Kind = EFF, guard: int = DEFAULT_GUARD) -> float:
    """Maximal expected utility of running ``m`` on top of ``sigma`` from ``s``.

    With ``sigma`` omitted the stack is ``<(m.task, m, first step, {})>``.
    """
    ev = _Evaluator(domain, kind, guard)
    base = sigma if sigma is not None else EMPTY
    stack = push_method(base, m.task, m, (), s)
    return _deep(lambda: ev.value(stack, s))


def optimal_method(domain: Domain, tau: TaskInstance, s: State, kind: Kind = EFF,
                   guard: int = DEFAULT_GUARD):
    """``(argmax instance, its utility)``; ``(None, 0.0)`` when nothing applies.
    Ties go to the earlier instance in applicable order."""
    ev = _Evaluator(domain, kind, guard)
    best, best_v = None, 0.0
    for m in applicable(s, tau, domain):
        v = _deep(lambda: ev.value(push_method(EMPTY, tau, m, (), s), s))
        if best is None or v > best_v:
            best, best_v = m, v
    return best, best_v


def utility_table(domain: Domain, tau: TaskInstance, s: State, kind: Kind = EFF, guard: int = DEFAULT_GUARD):
    ev = _Evaluator(domain, kind, guard)
    return [(m, _deep(lambda: ev.value(push_method(EMPTY, tau, m, (), s), s))) for m in applicable(s, tau, domain)]


# -- micro domains ------------------------------------------------------------------


@dataclass(frozen=True)
class MicroLimits:
    max_methods: int = 3
    max_outcomes: int = 2
    max_depth: int = 3
    max_steps: int = 3
    n_values: int = 3

    @classmethod
    def of(cls, t) -> "MicroLimits":
        if isinstance(t, MicroLimits):
            return t
        return cls(*t)


def gen_micro_domain(rng: random.Random | int, limits=MicroLimits()):
    """Random static domain with explicit outcome distributions.

    Tasks sit on levels ``0..max_depth-1`` and only refer to tasks on deeper
    levels, so every refinement tree is finite. A single state variable ``x``
    lets action outcomes steer later preconditions and branches. Returns
    ``(domain, root task, initial state)``.
    """
    if isinstance(rng, int):
        rng = random.Random(rng)
    lim = MicroLimits.of(limits)
    vals = list(range(lim.n_values))
    d = Domain("micro")
    d.declare_variable("x", 0, vals)
    n_actions = 4
    for k in range(n_actions):
        n_out = rng.randint(1, lim.max_outcomes)
        branches = []
        if n_out == 1:
            branches.append(Branch(1.0, _setter(rng.choice(vals)), float(rng.randint(1, 5))))
        else:
            p = rng.choice([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
            fail_second = rng.random() < 0.6
            branches.append(Branch(p, _setter(rng.choice(vals)), float(rng.randint(1, 5))))
            branches.append(Branch(round(1.0 - p, 10), None if fail_second else _setter(rng.choice(vals)),
                                   float(rng.randint(1, 5)), failed=fail_second))
        d.declare_action(f"a{k}", (), branches)
    levels = [[f"t{lvl}_{j}" for j in range(1 if lvl == 0 else 2)] for lvl in range(lim.max_depth)]
    for lvl in levels:
        for t in lvl:
            d.declare_task(t)
    for lvl_i, lvl in enumerate(levels):
        for t in lvl:
            n_m = rng.randint(1, lim.max_methods)
            for k in range(n_m):
                steps = []
                for _ in range(rng.randint(1, lim.max_steps)):
                    if lvl_i + 1 < lim.max_depth and rng.random() < 0.4:
                        steps.append(sub(rng.choice(levels[lvl_i + 1])))
                    elif rng.random() < 0.2:
                        steps.append(if_(Cmp(Var("x"), "=", rng.choice(vals)),
                                         act(f"a{rng.randrange(n_actions)}"), act(f"a{rng.randrange(n_actions)}")))
                    else:
                        steps.append(act(f"a{rng.randrange(n_actions)}"))
                pre = True if k == 0 else Cmp(Var("x"), "!=", rng.choice(vals))
                d.declare_method(f"m_{t}_{k}", t, (), pre=pre, body=seq(*steps))
    s = d.new_state(values={("x", ()): rng.choice(vals)})
    return d, TaskInstance(levels[0][0], ()), s


def _setter(v):
    def eff(s, args):
        s.set("x", value=v)
    eff.__name__ = f"set_x_{v}"
    return eff
