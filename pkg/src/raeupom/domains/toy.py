"""Two tiny static domains with hand-checkable optimal utilities.

``t`` has two methods: ``mA`` runs the reliable but costly ``a2``; ``mB`` runs
the cheap ``a1`` which fails one time in five. ``t2`` in the second domain
first achieves ``t`` and then runs ``a2``.
"""
from __future__ import annotations

import random

from ..ir import act, seq, sub
from ..model import Branch, Domain, TaskInstance
from .base import DomainBundle, ProblemInstance

TOY_HD = 0.6


def _toy_domain(name: str) -> Domain:
    d = Domain(name)
    d.declare_task("t")
    d.declare_action("a1", (), [Branch(0.8, None, 1.0, 1.0), Branch(0.2, None, 1.0, 1.0, failed=True)])
    d.declare_action("a2", (), [Branch(1.0, None, 2.0, 2.0)])
    d.declare_method("mA", "t", body=seq(act("a2")))
    d.declare_method("mB", "t", body=seq(act("a1")))
    d.heuristic = lambda tau, m, s, utility: TOY_HD
    return d


def _gen(root: str):
    def gen(rng: random.Random, difficulty: float = 1.0) -> ProblemInstance:
        n = rng.randint(1, 2)
        times = sorted(rng.randint(0, 5) for _ in range(n))
        tasks: dict = {}
        for t in times:
            tasks.setdefault(t, []).append(TaskInstance(root))
        return ProblemInstance(domain="toy" if root == "t" else "toy2", tasks=tasks, seed=rng.randrange(2**31))
    return gen


def build_toy() -> DomainBundle:
    d = _toy_domain("toy")
    single = lambda: ProblemInstance(domain="toy", tasks={0: [TaskInstance("t")]})
    return DomainBundle("toy", d, _gen("t"), single)


def build_toy2() -> DomainBundle:
    d = _toy_domain("toy2")
    d.declare_task("t2")
    d.declare_method("mC", "t2", body=seq(sub("t"), act("a2")))
    single = lambda: ProblemInstance(domain="toy2", tasks={0: [TaskInstance("t2")]})
    return DomainBundle("toy2", d, _gen("t2"), single)
