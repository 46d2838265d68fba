"""Nav: robots carry objects between rooms along a corridor of doors. A door
is either ordinary (it stays open) or a spring door (it closes unless held).
A robot carrying an object cannot hold a spring door, so it may ask a free
robot to hold it. Door types are unknown until a robot tries one.

The action set and method library are a compact model written for this
package.
"""
from __future__ import annotations

import random

from ..ir import And, Cmp, P, Var, act, assign, seq, sub, while_
from ..model import Branch, Domain, Sort, TaskInstance
from .base import DomainBundle, ProblemInstance

N_ROOMS = 4
SPRING_PRIOR = 0.5
PASS_SUCCESS = 0.95


def door_between(a: int, b: int) -> str:
    return f"d{min(a, b)}"


def door_rooms(d: str) -> tuple[int, int]:
    i = int(d[1:])
    return i, i + 1


def _ok(effect=None, cost=1.0, duration=1.0, prob=1.0):
    return Branch(prob, effect, cost, duration)


def _ko(cost=1.0, duration=1.0, prob=1.0, effect=None):
    return Branch(prob, effect, cost, duration, failed=True)


# -- command models --------------------------------------------------------------------


def _open_door(s, args, env):
    r, d = args
    if s.get("loc", r) not in door_rooms(d):
        return [_ko()]
    return [_ok(lambda st, a: st.set("doorOpen", d, value=True))]


def _pass_door(s, args, env):
    r, d, l = args
    here = s.get("loc", r)
    if here not in door_rooms(d) or l not in door_rooms(d) or here == l or not s.get("doorOpen", d):
        return [_ko()]
    carrying = s.get("load", r) is not None
    held = any(s.get("holding", x) == d for x in s.rigid.objects("ROBOTS") if x != r)
    known = s.get("doorType", d)
    if env is not None:
        kind = env.sense("realDoorType", d)
        p_spring = 1.0 if kind == "spring" else 0.0
    elif known in ("spring", "ordinary"):
        p_spring = 1.0 if known == "spring" else 0.0
    else:
        p_spring = SPRING_PRIOR

    def through(kind):
        def eff(st, a):
            st.set("doorType", d, value=kind)
            st.set("loc", r, value=l)
            if kind == "spring" and not held:
                st.set("doorOpen", d, value=False)
        return eff

    def bounce(st, a):
        st.set("doorType", d, value="spring")
        st.set("doorOpen", d, value=False)

    out = []
    if p_spring > 0:
        if carrying and not held:
            out.append(_ko(2.0, 2.0, p_spring, bounce))
        else:
            out.append(_ok(through("spring"), 2.0, 2.0, p_spring * PASS_SUCCESS))
            out.append(_ko(2.0, 2.0, round(p_spring * (1 - PASS_SUCCESS), 12)))
    if p_spring < 1:
        q = 1 - p_spring
        out.append(_ok(through("ordinary"), 2.0, 2.0, q * PASS_SUCCESS))
        out.append(_ko(2.0, 2.0, round(q * (1 - PASS_SUCCESS), 12)))
    return [b for b in out if b.prob > 0]


def _hold_door(s, args, env):
    r, d = args
    if s.get("loc", r) not in door_rooms(d) or s.get("load", r) is not None:
        return [_ko()]

    def hold(st, a):
        st.set("holding", r, value=d)
        st.set("doorOpen", d, value=True)

    return [_ok(hold)]


def _release_door(s, args, env):
    r, d = args
    if s.get("holding", r) != d:
        return [_ko()]

    def release(st, a):
        st.set("holding", r, value=None)
        if st.get("doorType", d) != "ordinary":
            st.set("doorOpen", d, value=False)

    return [_ok(release)]


def _pickup(s, args, env):
    r, o = args
    if s.get("pos", o) != s.get("loc", r) or s.get("load", r) is not None or s.get("holding", r) is not None:
        return [_ko()]

    def grab(st, a):
        st.set("pos", o, value=r)
        st.set("load", r, value=o)

    return [_ok(grab)]


def _putdown(s, args, env):
    r, o = args
    if s.get("load", r) != o:
        return [_ko()]

    def drop(st, a):
        st.set("pos", o, value=st.get("loc", r))
        st.set("load", r, value=None)

    return [_ok(drop)]


# -- host functions ------------------------------------------------------------------


def _next_room(s, scope):
    here = s.get("loc", scope["r"])
    return here + 1 if scope["l"] > here else here - 1


def _next_door(s, scope):
    return door_between(s.get("loc", scope["r"]), _next_room(s, scope))


def _room_of(o_param):
    def f(s, scope):
        p = s.get("pos", scope[o_param])
        return s.get("loc", p) if isinstance(p, str) else p
    return f


def _other_free(s, scope):
    return [x for x in s.rigid.objects("ROBOTS") if x != scope["r"]]


# -- domain --------------------------------------------------------------------------------


def build_domain() -> Domain:
    d = Domain("nav")
    d.declare_variable("loc", 1, Sort("ROOMS"))
    d.declare_variable("load", 1, Sort("OBJECTS", (None,)))
    d.declare_variable("pos", 1, Sort("PLACES"))
    d.declare_variable("doorType", 1, {"spring", "ordinary"})
    d.declare_variable("doorOpen", 1, {True, False})
    d.declare_variable("holding", 1, Sort("DOORS", (None,)))
    d.declare_variable("status", 1, {"free", "busy"})
    d.declare_channel("realDoorType")

    d.declare_action("openDoor", ("r", "d"), _open_door)
    d.declare_action("passDoor", ("r", "d", "l"), _pass_door)
    d.declare_action("holdDoor", ("r", "d"), _hold_door)
    d.declare_action("releaseDoor", ("r", "d"), _release_door)
    d.declare_action("pickup", ("r", "o"), _pickup)
    d.declare_action("putdown", ("r", "o"), _putdown)

    d.declare_task("deliver", "r", "o", "l")
    d.declare_task("navigate", "r", "l")
    d.declare_task("moveThroughDoorway", "r", "d", "l")

    d.declare_method("Deliver_Method1", "deliver", ("r", "o", "l"), body=seq(
        assign(Var("status", P.r), "busy"),
        sub("navigate", P.r, _room_of("o")),
        act("pickup", P.r, P.o),
        sub("navigate", P.r, P.l),
        act("putdown", P.r, P.o),
        assign(Var("status", P.r), "free"),
    ))

    d.declare_method("Navigate_Method1", "navigate", ("r", "l"), body=seq(
        while_(Cmp(Var("loc", P.r), "!=", P.l),
               sub("moveThroughDoorway", P.r, _next_door, _next_room), cap=2 * N_ROOMS),
    ))

    d.declare_method("MoveThroughDoorway_Method1", "moveThroughDoorway", ("r", "d", "l"), body=seq(
        act("openDoor", P.r, P.d),
        act("passDoor", P.r, P.d, P.l),
    ))
    d.declare_method(
        "MoveThroughDoorway_Method2", "moveThroughDoorway", ("r", "d", "l"),
        extra=(("robot", _other_free),),
        pre=And(Cmp(Var("status", P.robot), "=", "free"), Cmp(Var("load", P.robot), "=", None)),
        body=seq(
            assign(Var("status", P.robot), "busy"),
            sub("navigate", P.robot, Var("loc", P.r)),
            act("holdDoor", P.robot, P.d),
            act("passDoor", P.r, P.d, P.l),
            act("releaseDoor", P.robot, P.d),
            assign(Var("status", P.robot), "free"),
        ),
    )

    d.heuristic = _hd
    d.params = {"spring_prior": SPRING_PRIOR, "pass_success": PASS_SUCCESS, "rooms": N_ROOMS}
    return d


def _hd(tau, m, s, utility):
    from ..utility import SR

    if utility is SR:
        return 0.9
    return 0.05


# -- problems ---------------------------------------------------------------------------


def gen_problem(rng: random.Random, difficulty: float = 1.0) -> ProblemInstance:
    """Three robots in a corridor of rooms; one or two delivery tasks. Nav has
    no exogenous events, so ``difficulty`` only raises the share of spring
    doors."""
    rooms = list(range(N_ROOMS))
    doors = [door_between(i, i + 1) for i in range(N_ROOMS - 1)]
    robots = ["r1", "r2", "r3"]
    n_obj = rng.randint(1, 2)
    objects = [f"o{i + 1}" for i in range(n_obj)]
    initial = []
    for r in robots:
        initial += [("loc", (r,), rng.choice(rooms)), ("load", (r,), None), ("holding", (r,), None),
                    ("status", (r,), "free")]
    for dr in doors:
        initial.append(("doorOpen", (dr,), False))
    p_spring = min(0.9, 0.3 + 0.4 * difficulty)
    real = {dr: "spring" if rng.random() < p_spring else "ordinary" for dr in doors}
    tasks: dict = {}
    for i, o in enumerate(objects):
        start = rng.choice(rooms)
        goal = rng.choice([x for x in rooms if x != start])
        initial.append(("pos", (o,), start))
        tasks.setdefault(rng.randint(0, 4), []).append(TaskInstance("deliver", (robots[i], o, goal)))
    return ProblemInstance(
        domain="nav",
        rigid={"ROOMS": rooms, "DOORS": doors, "ROBOTS": robots, "OBJECTS": objects,
               "PLACES": rooms + robots},
        initial=initial,
        env={"realDoorType": [((dr,), k) for dr, k in real.items()]},
        tasks=tasks,
        seed=rng.randrange(2**31),
    )


def default_problem() -> ProblemInstance:
    return gen_problem(random.Random(0), 1.0)


def build_nav() -> DomainBundle:
    return DomainBundle("nav", build_domain(), gen_problem, default_problem, dead_ends=False,
                        params={"spring_prior": SPRING_PRIOR})
