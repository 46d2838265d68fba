"""UPOM: UCT-style Monte-Carlo rollouts over refinement stacks, and the
progressive-deepening Select driver that turns them into a method choice."""
from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

from .errors import MissingModel
from .ir import ActStep, AssignStep, FailStep, MethodInstance, SubStep, apply_assign, current_step
from .model import Domain, State, TaskInstance, abstract, applicable
from .platform import sample
from .stack import Frame, RefinementStack, advance, push_method, settle
from .utility import EFF, Kind, action_value, clamp, one, oplus_f


class DepthMode(str, Enum):
    STEPS = "steps"              # every action and refinement consumes depth
    REFINEMENTS = "refinements"  # only refinements consume depth; cut off with h at 0


@dataclass
class PlanConfig:
    d_max: float = math.inf
    n_ro: int = 100
    C: float = 1.0
    utility: Kind = EFF
    depth_mode: DepthMode = DepthMode.REFINEMENTS
    heuristic: object = "h0"
    time_budget: float | None = None
    eff_cap: float = 1e9
    k_exploit: int | None = None
    max_stack: int = 200
    max_steps: int = 100_000

    def __post_init__(self):
        self.utility = Kind.parse(self.utility)
        self.depth_mode = DepthMode(self.depth_mode)
        if self.n_ro < 1:
            raise ValueError("n_ro must be >= 1")
        if self.C <= 0:
            raise ValueError("C must be > 0")
        if self.d_max < 1:
            raise ValueError("d_max must be >= 1")

    @classmethod
    def from_dict(cls, d: dict) -> "PlanConfig":
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        if "d_max" in known and known["d_max"] in (None, "inf", "infinity"):
            known["d_max"] = math.inf
        return cls(**known)


class NodeStats:
    """Visit counts and running-mean values of the candidates at one task node."""

    __slots__ = ("cands", "N", "Q", "total")

    def __init__(self, cands):
        self.cands = list(cands)
        self.N = [0] * len(self.cands)
        self.Q = [0.0] * len(self.cands)
        self.total = 0

    def update(self, i: int, lam: float):
        n = self.N[i]
        self.Q[i] = (n * self.Q[i] + lam) / (1 + n)
        self.N[i] = n + 1
        self.total += 1

    def ucb_choice(self, C: float) -> int:
        logn = math.log(self.total)
        best, best_v = 0, -math.inf
        for i, (q, n) in enumerate(zip(self.Q, self.N)):
            v = q + C * math.sqrt(logn / n)
            if v > best_v:
                best, best_v = i, v
        return best


@dataclass
class SearchStats:
    nodes: dict = field(default_factory=dict)
    rollouts: int = 0
    exploit_streak: int = 0

    def node(self, key) -> NodeStats | None:
        return self.nodes.get(key)


def node_key(stack: RefinementStack, s: State):
    return (stack.signature(), s.key())


# -- heuristics -------------------------------------------------------------------


def heuristic_eval(kind, tau, m, s, *, utility: Kind = EFF, domain: Domain | None = None, model=None) -> float:
    """Estimate of the utility left at a rollout cutoff.

    ``h0`` returns the identity (``inf`` for efficiency, 1 for success ratio);
    ``hd`` calls the domain's hand-written heuristic; ``learned`` calls a
    trained LearnH model.
    """
    utility = Kind.parse(utility)
    if callable(kind):
        return kind(tau, m, s)
    kind = str(kind).lower()
    if kind == "h0":
        return one(utility)
    if kind == "hd":
        if domain is None or domain.heuristic is None:
            raise MissingModel("domain has no hand-written heuristic")
        return domain.heuristic(tau, m, s, utility)
    if kind == "learned":
        if model is None:
            raise MissingModel("learned heuristic requires a trained model")
        return model(tau, m, s)
    raise ValueError(f"unknown heuristic {kind!r}")


def make_heuristic(config: PlanConfig, domain: Domain, model=None) -> Callable:
    h = config.heuristic
    if callable(h):
        return h
    kind = str(h).lower()
    if kind == "h0":
        v = one(config.utility)
        return lambda tau, m, s: v
    if kind == "learned" and model is None:
        raise MissingModel("learned heuristic requires a trained model")
    return lambda tau, m, s: heuristic_eval(kind, tau, m, s, utility=config.utility, domain=domain, model=model)


# -- rollouts ----------------------------------------------------------------------


def upom_rollout(s: State, sigma: RefinementStack, d, config: PlanConfig, stats: SearchStats,
                 rng: random.Random, domain: Domain, h: Callable | None = None) -> float:
    """One rollout from ``(s, sigma)`` with depth budget ``d``; returns its utility.

    The top frame may carry ``method=None``, meaning the task still has to be
    refined. The descent is iterative; node statistics are updated on the way
    back with the utility of the rollout suffix below each node.
    """
    kind = config.utility
    if h is None:
        h = make_heuristic(config, domain)
    steps_mode = config.depth_mode is DepthMode.STEPS
    trail = []  # action values (float) and (node, index) pairs, in rollout order
    stack = sigma
    own = False
    explored = False
    steps = 0
    terminal = 0.0
    while True:
        if not stack:
            terminal = one(kind)
            break
        f = stack.top
        if d <= 0:
            terminal = h(f.task, f.method, s)
            break
        steps += 1
        if steps > config.max_steps:
            terminal = 0.0
            break
        if f.method is None:
            task, tried, nil = f.task, f.tried, True
        else:
            step = current_step(f.method, f.pc, s)
            if isinstance(step, SubStep):
                task, tried, nil = TaskInstance(step.name, step.args, "subtask"), frozenset(), False
            elif isinstance(step, ActStep):
                s2, cost, failed = sample(domain, s, step.name, step.args, rng)
                if failed:
                    terminal = 0.0
                    break
                trail.append(action_value(kind, cost, False))
                s, own = s2, True
                stack = advance(stack, s)
                if steps_mode:
                    d -= 1
                continue
            elif isinstance(step, AssignStep):
                if not own:
                    s, own = s.copy(), True
                pc = apply_assign(step, f.pc, s)
                stack = advance(stack.replace_top(f.at(pc)), s)
                continue
            elif isinstance(step, FailStep):
                terminal = 0.0
                break
            else:  # EndStep: empty body pushed without settling
                stack = settle(stack, s)
                continue
        # task node: choose a refinement
        if len(stack) >= config.max_stack and not nil:
            terminal = 0.0
            break
        key = node_key(stack, s)
        node = stats.nodes.get(key)
        if node is None:
            cands = [m for m in applicable(s, task, domain) if m.identity not in tried]
            if not cands:
                terminal = 0.0
                break
            node = stats.nodes[key] = NodeStats(cands)
        untried = [i for i, n in enumerate(node.N) if n == 0]
        if untried:
            i = untried[0] if len(untried) == 1 else rng.choice(untried)
            explored = True
        else:
            i = node.ucb_choice(config.C)
        trail.append((node, i))
        m = node.cands[i]
        if nil:
            stack = push_method(stack.pop(), task, m, tried, s)
        else:
            stack = push_method(stack, task, m, (), s)
        d -= 1

    acc = terminal
    cap = config.eff_cap
    for item in reversed(trail):
        if isinstance(item, float):
            acc = oplus_f(item, acc, kind)
        else:
            node, i = item
            node.update(i, clamp(acc, cap))
    stats.rollouts += 1
    stats.exploit_streak = 0 if explored else stats.exploit_streak + 1
    return acc


# -- Select ---------------------------------------------------------------------------


def _argmax(values) -> int:
    best, best_v = 0, -math.inf
    for i, v in enumerate(values):
        if v > best_v:
            best, best_v = i, v
    return best


def plan_select(xi: State, tau: TaskInstance, sigma: RefinementStack, config: PlanConfig,
                domain: Domain, rng: random.Random, *, tried=frozenset(), heuristic: Callable | None = None,
                info: dict | None = None) -> MethodInstance | None:
    """Approximately optimal untried method instance for ``tau``.

    ``sigma`` is the acting stack under the frame of ``tau`` (empty for a root
    task; for a subtask, the parent rests on the subtask step). ``tried`` is
    the set of identities already tried for ``tau``. Fills ``info`` (when
    given) with depth reached, rollouts performed and the root Q table.
    """
    M = [m for m in applicable(xi, tau, domain) if m.identity not in tried]
    if info is not None:
        info.update(candidates=list(M), rollouts=0, depth=0, q=[])
    if not M:
        return None
    if len(M) == 1:
        return M[0]
    if config.time_budget is not None and config.time_budget <= 0:
        return M[0]
    h = heuristic if heuristic is not None else make_heuristic(config, domain)
    s = abstract(xi, domain.abstraction)
    root = sigma.push(Frame(tau, None, tried=frozenset(tried)))
    best = M[_argmax([h(tau, m, s) for m in M])]
    deadline = None if config.time_budget is None else time.perf_counter() + config.time_budget
    depths = [math.inf] if math.isinf(config.d_max) else range(1, int(config.d_max) + 1)
    total = 0
    stats = None
    reached = 0
    for d in depths:
        stats = SearchStats()
        for _ in range(config.n_ro):
            if deadline is not None and time.perf_counter() >= deadline:
                break
            upom_rollout(s, root, d, config, stats, rng, domain, h)
            total += 1
            if config.k_exploit is not None and stats.exploit_streak >= config.k_exploit:
                break
        node = stats.nodes.get(node_key(root, s))
        if node is not None and node.total > 0:
            best = node.cands[_argmax(node.Q)]
            reached = d
        if deadline is not None and time.perf_counter() >= deadline:
            break
    if info is not None:
        node = stats.nodes.get(node_key(root, s)) if stats is not None else None
        info["rollouts"] = total
        info["depth"] = reached
        if node is not None:
            info["q"] = [(m, q, n) for m, q, n in zip(node.cands, node.Q, node.N)]
    return best
