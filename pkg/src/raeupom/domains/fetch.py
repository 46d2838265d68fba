"""Fetch: rechargeable robots collect objects whose locations are unknown
until a robot perceives the place they lie at. Moving drains the battery by
the Manhattan distance travelled; a robot far from the charger with too little
charge left is stuck for good. Robots may take the charger along. Emergencies
arrive as exogenous root tasks that pull a robot away.

The action set and method library are a compact model written for this
package.
"""
from __future__ import annotations

import itertools
import random

from ..ir import Cmp, Not, P, Var, act, if_, seq, sub, while_
from ..model import Branch, Domain, Sort, TaskInstance
from ..values import UNKNOWN, Interval
from .base import DomainBundle, EventSpec, ProblemInstance

GRID = 3
BASE = (0, 0)
MAX_CHARGE = 6
MOVE_SUCCESS = 0.95
CHARGER = "c1"


def dist(l0, l1) -> int:
    return abs(l0[0] - l1[0]) + abs(l0[1] - l1[1])


def locations(n=GRID):
    return [(x, y) for x in range(n) for y in range(n)]


# -- command models ---------------------------------------------------------------------


def _move(s, args, env):
    r, l1, l2 = args
    if l1 == l2:
        return [Branch(1.0, None, 1.0, 1.0)]
    d = dist(l1, l2)
    charge = s.get("charge", r)
    if s.get("loc", r) != l1 or charge < d:
        return [Branch(1.0, None, 1.0, 1.0, failed=True)]

    def arrive(st, a, d=d):
        st.set("loc", r, value=l2)
        st.set("charge", r, value=max(0, st.get("charge", r) - d))

    def slip(st, a):
        st.set("charge", r, value=max(0, st.get("charge", r) - 1))

    c = 1.0 + d
    return [Branch(MOVE_SUCCESS, arrive, c, c), Branch(round(1 - MOVE_SUCCESS, 12), slip, c, c, failed=True)]


def _take(s, args, env):
    r, o = args
    here = s.get("loc", r)
    if s.get("pos", o) != here:
        return [Branch(1.0, None, 1.0, 1.0, failed=True)]
    if o != CHARGER and s.get("load", r) is not None:
        return [Branch(1.0, None, 1.0, 1.0, failed=True)]

    def grab(st, a):
        st.set("pos", o, value=r)
        if o != CHARGER:
            st.set("load", r, value=o)

    return [Branch(1.0, grab, 1.0, 1.0)]


def _put(s, args, env):
    r, o = args
    if s.get("pos", o) != r:
        return [Branch(1.0, None, 1.0, 1.0, failed=True)]

    def drop(st, a):
        st.set("pos", o, value=st.get("loc", r))
        if o != CHARGER:
            st.set("load", r, value=None)

    return [Branch(1.0, drop, 1.0, 1.0)]


def _perceive(s, args, env):
    r, l = args
    if s.get("loc", r) != l:
        return [Branch(1.0, None, 1.0, 1.0, failed=True)]
    objects = [o for o in s.rigid.objects("OBJECTS")]
    if env is not None:
        found = [o for o in objects if env.sense("realPos", o) == l]

        def look(st, a):
            st.set("view", l, value=True)
            for o in found:
                if st.get("pos", o) is UNKNOWN:
                    st.set("pos", o, value=l)

        return [Branch(1.0, look, 1.0, 1.0)]
    unknown = [o for o in objects if s.get("pos", o) is UNKNOWN]
    unviewed = sum(1 for x in s.rigid.objects("LOCATIONS") if not s.get("view", x))
    p = 1.0 / max(1, unviewed)
    out = []
    for hits in itertools.product((True, False), repeat=len(unknown)):
        prob = 1.0
        for h in hits:
            prob *= p if h else 1 - p
        if prob == 0.0:
            continue
        found = tuple(o for o, h in zip(unknown, hits) if h)

        def look(st, a, found=found):
            st.set("view", l, value=True)
            for o in found:
                st.set("pos", o, value=l)

        out.append(Branch(prob, look, 1.0, 1.0))
    return out


def _charge(s, args, env):
    r, c = args
    if s.get("pos", c) not in (s.get("loc", r), r):
        return [Branch(1.0, None, 1.0, 1.0, failed=True)]
    return [Branch(1.0, lambda st, a: st.set("charge", r, value=MAX_CHARGE), 2.0, 3.0)]


def _address_emergency(s, args, env):
    r, l, i = args
    if s.get("loc", r) != l:
        return [Branch(1.0, None, 1.0, 1.0, failed=True)]
    return [Branch(1.0, lambda st, a: st.set("emergency", l, value=False), 3.0, 2.0)]


# -- host functions -----------------------------------------------------------------


def _unviewed(s, scope):
    return [l for l in s.rigid.objects("LOCATIONS") if not s.get("view", l)]


def _charger_here(s, scope):
    r = scope["r"]
    return s.get("pos", CHARGER) in (s.get("loc", r), r)


def _charger_loc(s, scope):
    c = s.get("pos", CHARGER)
    return s.get("loc", c) if isinstance(c, str) else c


# -- domain -----------------------------------------------------------------------------


def build_domain() -> Domain:
    d = Domain("fetch")
    d.declare_variable("loc", 1, Sort("LOCATIONS"))
    d.declare_variable("charge", 1, Interval(0, MAX_CHARGE, integer=True))
    d.declare_variable("load", 1, Sort("OBJECTS", (None,)))
    d.declare_variable("pos", 1, Sort("PLACES"))
    d.declare_variable("view", 1, {True, False})
    d.declare_variable("emergency", 1, {True, False})
    d.declare_channel("realPos")

    d.declare_action("move", ("r", "l1", "l2"), _move)
    d.declare_action("take", ("r", "o"), _take)
    d.declare_action("put", ("r", "o"), _put)
    d.declare_action("perceive", ("r", "l"), _perceive)
    d.declare_action("charge", ("r", "c"), _charge)
    d.declare_action("addressEmergency", ("r", "l", "i"), _address_emergency)

    d.declare_task("fetch", "r", "o")
    d.declare_task("search", "r", "o")
    d.declare_task("moveTo", "r", "l")
    d.declare_task("recharge", "r")
    d.declare_task("emergency", "l", "i")

    d.declare_method("Fetch_Method1", "fetch", ("r", "o"), body=seq(
        while_(Cmp(Var("pos", P.o), "=", UNKNOWN), sub("search", P.r, P.o), cap=GRID * GRID),
        sub("moveTo", P.r, Var("pos", P.o)),
        act("take", P.r, P.o),
        sub("moveTo", P.r, BASE),
        act("put", P.r, P.o),
    ))

    d.declare_method("Search_Method1", "search", ("r", "o"), extra=(("l", _unviewed),), body=seq(
        sub("moveTo", P.r, P.l),
        act("perceive", P.r, P.l),
    ))

    move_direct = if_(Cmp(Var("loc", P.r), "!=", P.l), act("move", P.r, Var("loc", P.r), P.l))
    d.declare_method("MoveTo_Method1", "moveTo", ("r", "l"), body=seq(move_direct))
    d.declare_method("MoveTo_Method2", "moveTo", ("r", "l"), body=seq(sub("recharge", P.r), move_direct))

    d.declare_method("Recharge_Method1", "recharge", ("r",), pre=_charger_here, body=seq(
        act("charge", P.r, CHARGER),
    ))
    goto_charger = if_(Cmp(Var("loc", P.r), "!=", _charger_loc), act("move", P.r, Var("loc", P.r), _charger_loc))
    d.declare_method("Recharge_Method2", "recharge", ("r",), pre=Not(_charger_here), body=seq(
        goto_charger,
        act("charge", P.r, CHARGER),
    ))
    d.declare_method("Recharge_Method3", "recharge", ("r",), pre=Not(_charger_here), body=seq(
        goto_charger,
        act("charge", P.r, CHARGER),
        act("take", P.r, CHARGER),
    ))

    d.declare_method("Emergency_Method1", "emergency", ("l", "i"), extra=(("r", "ROBOTS"),), body=seq(
        sub("moveTo", P.r, P.l),
        act("addressEmergency", P.r, P.l, P.i),
    ))

    d.events = {"emergency"}
    d.heuristic = _hd
    d.params = {"move_success": MOVE_SUCCESS, "max_charge": MAX_CHARGE, "grid": GRID}
    return d


def _hd(tau, m, s, utility):
    from ..utility import SR

    if utility is SR:
        return 0.8
    return 0.05


# -- problems ------------------------------------------------------------------------


def gen_problem(rng: random.Random, difficulty: float = 1.0) -> ProblemInstance:
    """Two robots, one or two objects at hidden places, the charger at the
    base. Each root task asks a robot to bring an object to the base. With
    ``difficulty > 0`` an emergency may arrive."""
    locs = locations()
    robots = ["r1", "r2"]
    n_obj = rng.randint(1, 2)
    objects = [f"o{i + 1}" for i in range(n_obj)]
    initial = []
    for r in robots:
        initial.append(("loc", (r,), rng.choice(locs)))
        initial.append(("charge", (r,), rng.randint(2, MAX_CHARGE)))
        initial.append(("load", (r,), None))
    initial.append(("pos", (CHARGER,), BASE))
    for o in objects:
        initial.append(("pos", (o,), UNKNOWN))
    for l in locs:
        initial.append(("view", (l,), False))
        initial.append(("emergency", (l,), False))
    real = {o: rng.choice([l for l in locs if l != BASE]) for o in objects}
    tasks: dict = {}
    for i, o in enumerate(objects):
        tasks.setdefault(rng.randint(0, 3), []).append(TaskInstance("fetch", (robots[i], o)))
    events = []
    if difficulty > 0 and rng.random() < 0.3 * difficulty:
        l = rng.choice(locs)
        events.append(EventSpec(rng.randint(2, 12), "emergency", assignments=(("emergency", (l,), True),),
                                tasks=(TaskInstance("emergency", (l, 1)),)))
    return ProblemInstance(
        domain="fetch",
        rigid={"ROBOTS": robots, "OBJECTS": objects, "LOCATIONS": locs,
               "PLACES": locs + robots},
        initial=initial,
        env={"realPos": [((o,), l) for o, l in real.items()]},
        events=events,
        tasks=tasks,
        seed=rng.randrange(2**31),
    )


def default_problem() -> ProblemInstance:
    return gen_problem(random.Random(0), 0.0)


def build_fetch() -> DomainBundle:
    return DomainBundle("fetch", build_domain(), gen_problem, default_problem, dead_ends=True,
                        params={"move_success": MOVE_SUCCESS})
