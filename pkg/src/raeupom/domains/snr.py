"""Search and rescue: ground robots (UGVs) and drones (UAVs) survey locations,
find people, clear debris and bring medical supplies.

Fourteen commands, seven tasks and sixteen methods. Notes on the encoding:

* The robot-type guards of the four ``moveTo`` methods are preconditions.
  Other type guards stay in the bodies as ``if ... fail``.
* Locks are not modeled; the ``status`` of a robot (free/busy) is the only
  resource marker.
* The post-rescue check is evaluated on the observed state. A person known to
  be at the surveyed location counts as not saved when the drone's image
  missed them, or when they or their location are observed as not fine.
* Camera reliability depends on the camera and on the (observable) weather;
  a camera miss yields an image with no person in it.
* Movement, flight and altitude changes succeed with probability
  ``SENSE_SUCCESS`` (0.9), chosen for this package.
"""
from __future__ import annotations

import math
import random

from ..ir import Cmp, Not, P, Var, act, assign, fail, if_, seq, sub
from ..model import Branch, Domain, Sort, TaskInstance
from ..values import UNKNOWN, Grid, Interval
from .base import DomainBundle, EventSpec, ProblemInstance

BASE = (1, 1)
SENSE_SUCCESS = 0.9
CAMERA_SUCCESS = {
    "frontCamera": {"clear": 0.95, "rainy": 0.9, "foggy": 0.3, "dustStorm": 0.25},
    "bottomCamera": {"clear": 0.9, "rainy": 0.35, "foggy": 0.85, "dustStorm": 0.8},
}
PERSON_PRIOR_INJURED = 0.5
LOCATION_PRIOR_DEBRIS = 0.5
STATUS = ("free", "busy", "OK", "injured", "dead", "hasDebri", "clear")
WEATHER = ("clear", "rainy", "foggy", "dustStorm")
COMMANDS = (
    "moveEuclidean", "moveCurved", "moveManhattan", "fly", "giveSupportToPerson", "clearLocation",
    "inspectLocation", "inspectPerson", "transfer", "replenishSupplies", "captureImage",
    "changeAltitude", "deadEnd", "fail",
)


# -- distances ------------------------------------------------------------------


def euclidean(l0, l1) -> float:
    (x0, y0), (x1, y1) = l0, l1
    return math.sqrt((x1 - x0) * (x1 - x0) + (y1 - y0) * (y1 - y0))


def manhattan(l0, l1) -> float:
    (x1, y1), (x2, y2) = l0, l1
    return abs(x2 - x1) + abs(y2 - y1)


def curved(l0, l1) -> float:
    diameter = euclidean(l0, l1)
    return math.pi * diameter / 2


_DIST = {"euclidean": euclidean, "manhattan": manhattan, "curved": curved}


def sr_distance(kind: str, l0, l1) -> float:
    return _DIST[kind](l0, l1)


# -- obstacle tests ----------------------------------------------------------------


def blocked_euclidean(obstacles, l1, l2) -> bool:
    (x1, y1), (x2, y2) = l1, l2
    xlow, xhigh, ylow, yhigh = min(x1, x2), max(x1, x2), min(y1, y2), max(y1, y2)
    for ox, oy in obstacles:
        if xlow <= ox <= xhigh and ylow <= oy <= yhigh:
            if ox == x1 or x2 == x1:
                return True
            if abs((oy - y1) / (ox - x1) - (y2 - y1) / (x2 - x1)) <= 0.0001:
                return True
    return False


def blocked_curved(obstacles, l1, l2) -> bool:
    (x1, y1), (x2, y2) = l1, l2
    cx, cy = (x1 + x2) / 2, (y1 + y2) / 2
    r2 = (x2 - cx) ** 2 + (y2 - cy) ** 2
    return any(abs(r2 - ((ox - cx) ** 2 + (oy - cy) ** 2)) <= 0.0001 for ox, oy in obstacles)


def blocked_manhattan(obstacles, l1, l2) -> bool:
    (x1, y1), (x2, y2) = l1, l2
    xlow, xhigh, ylow, yhigh = min(x1, x2), max(x1, x2), min(y1, y2), max(y1, y2)
    for ox, oy in obstacles:
        if abs(oy - y1) <= 0.0001 and xlow <= ox <= xhigh:
            return True
        if abs(ox - x2) <= 0.0001 and ylow <= oy <= yhigh:
            return True
    return False


_BLOCKED = {"moveEuclidean": blocked_euclidean, "moveCurved": blocked_curved, "moveManhattan": blocked_manhattan}


def move_cost(dist: float) -> float:
    return 1.0 + dist / 10.0


# -- command models ------------------------------------------------------------------


def _ok(prob=1.0, effect=None, cost=1.0, duration=1.0):
    return Branch(prob, effect, cost, duration)


def _ko(prob=1.0, cost=1.0, duration=1.0, effect=None):
    return Branch(prob, effect, cost, duration, failed=True)


def _move_model(name):
    blocked = _BLOCKED.get(name)

    def model(s, args, env):
        if name == "fly":
            r, l1, l2 = args
            dist = euclidean(l1, l2)
        else:
            r, l1, l2, dist = args
            if blocked(s.rigid.objects("OBSTACLES"), l1, l2):
                return [_ko(cost=1.0)]
        c = move_cost(dist)
        if l1 == l2:
            return [_ok()]
        if s.get("loc", r) != l1:
            return [_ko()]

        def arrive(st, a, l2=l2):
            st.set("loc", a[0], value=l2)

        return [_ok(SENSE_SUCCESS, arrive, c, c), _ko(round(1 - SENSE_SUCCESS, 12), c, c)]

    return model


def _inspect_person(s, args, env):
    r, p = args
    if env is not None:
        truth = env.sense("realStatus", p)

        def see(st, a, v=truth):
            st.set("status", p, value=v)

        return [_ok(effect=see)]
    if s.get("status", p) is not UNKNOWN:
        return [_ok()]
    return [
        _ok(PERSON_PRIOR_INJURED, lambda st, a: st.set("status", a[1], value="injured")),
        _ok(1 - PERSON_PRIOR_INJURED, lambda st, a: st.set("status", a[1], value="OK")),
    ]


def _inspect_location(s, args, env):
    r, l = args
    if env is not None:
        truth = env.sense("realStatus", l)
        return [_ok(effect=lambda st, a, v=truth: st.set("status", a[1], value=v))]
    if s.get("status", l) is not UNKNOWN:
        return [_ok()]
    return [
        _ok(LOCATION_PRIOR_DEBRIS, lambda st, a: st.set("status", a[1], value="hasDebri")),
        _ok(1 - LOCATION_PRIOR_DEBRIS, lambda st, a: st.set("status", a[1], value="clear")),
    ]


def _give_support(s, args, env):
    r, p = args
    if s.get("status", p) == "dead":
        return [_ko(cost=3.0, duration=2.0)]

    def help_(st, a):
        st.set("status", p, value="OK")
        if env is not None:
            env.set("realStatus", p, value="OK")

    return [_ok(effect=help_, cost=3.0, duration=2.0)]


def _clear_location(s, args, env):
    r, l = args

    def clear(st, a):
        st.set("status", l, value="clear")
        if env is not None:
            env.set("realStatus", l, value="clear")

    return [_ok(effect=clear, cost=5.0, duration=3.0)]


def _replenish(s, args, env):
    (r,) = args
    if s.get("loc", r) == BASE:
        return [_ok(effect=lambda st, a: st.set("hasMedicine", a[0], value=5), cost=2.0, duration=2.0)]
    return [_ko(cost=1.0)]


def _transfer(s, args, env):
    r1, r2 = args
    if s.get("loc", r1) == s.get("loc", r2) and (s.get("hasMedicine", r1) or 0) > 0:
        def give(st, a):
            st.set("hasMedicine", r2, value=st.get("hasMedicine", r2) + 1)
            st.set("hasMedicine", r1, value=st.get("hasMedicine", r1) - 1)

        return [_ok(effect=give, cost=2.0)]
    return [_ko()]


def person_at(s, l):
    for p in s.rigid.objects("PERSONS"):
        if s.get("loc", p) == l:
            return p
    return None


def _capture_image(s, args, env):
    r, camera, l = args
    p_ok = CAMERA_SUCCESS[camera].get(s.get("weather", l), 0.5)
    seen = env.sense("realPerson", l) if env is not None else person_at(s, l)
    if seen is UNKNOWN:
        seen = None

    def shot(st, a, v=seen):
        st.set("imagePerson", a[0], value=v)

    def miss(st, a):
        st.set("imagePerson", a[0], value=None)

    if p_ok >= 1.0:
        return [_ok(effect=shot)]
    return [_ok(p_ok, shot), _ok(round(1 - p_ok, 12), miss)]


def _change_altitude(s, args, env):
    r, alt = args
    if s.get("altitude", r) == alt:
        return [_ok()]
    return [
        _ok(SENSE_SUCCESS, lambda st, a: st.set("altitude", a[0], value=a[1])),
        _ko(round(1 - SENSE_SUCCESS, 12)),
    ]


# -- host functions used in bodies ---------------------------------------------------


def _not_saved(l, r=None):
    """Observed-state version of the post-rescue check at location ``l``."""

    def test(s, scope):
        loc = scope[l] if isinstance(l, str) else l(s, scope)
        p = person_at(s, loc)
        if p is None:
            return False
        if r is not None and s.get("imagePerson", scope[r]) != p:
            return True
        return s.get("status", p) in ("injured", "dead") or s.get("status", loc) == "hasDebri"

    return test


def _check_result(l, r=None):
    loc = (lambda s, sc: sc[l]) if isinstance(l, str) else l
    return if_(_not_saved(l, r), seq(act("deadEnd", lambda s, sc: person_at(s, loc(s, sc))), fail()))


def _nearest_with_medicine(s, scope):
    r = scope["r"]
    best, best_d = None, math.inf
    for r1 in s.rigid.objects("WHEELEDROBOTS"):
        if (s.get("hasMedicine", r1) or 0) > 0:
            d = euclidean(s.get("loc", r), s.get("loc", r1))
            if d < best_d:
                best, best_d = r1, d
    return best


def _free_robot_nearest_base(s, scope):
    best, best_d = None, math.inf
    for r in s.rigid.objects("WHEELEDROBOTS"):
        if s.get("status", r) == "free":
            d = euclidean(s.get("loc", r), BASE)
            if d < best_d:
                best, best_d = r, d
    return best


def _dist(kind):
    f = _DIST[kind]
    return lambda s, sc: f(sc["x"], sc["l"])


def _move_method(kind, command):
    return seq(
        assign("x", Var("loc", P.r)),
        if_(Cmp(P.x, "!=", P.l), act(command, P.r, P.x, P.l, _dist(kind))),
    )


# -- domain ------------------------------------------------------------------------------


def build_domain() -> Domain:
    d = Domain("snr")
    d.declare_variable("loc", 1, Grid(-1000, 1000, -1000, 1000))
    d.declare_variable("hasMedicine", 1, Interval(0, 100, integer=True))
    d.declare_variable("robotType", 1, {"wheeled", "uav"})
    d.declare_variable("status", 1, set(STATUS))
    d.declare_variable("altitude", 1, {"high", "low"})
    d.declare_variable("imagePerson", 1, Sort("PERSONS", (None,)))
    d.declare_variable("newRobot", 1, Sort("WHEELEDROBOTS", (None,)))
    d.declare_variable("weather", 1, set(WEATHER))
    d.declare_channel("realStatus")
    d.declare_channel("realPerson")

    for name in ("moveEuclidean", "moveCurved", "moveManhattan"):
        d.declare_action(name, ("r", "l1", "l2", "dist"), _move_model(name))
    d.declare_action("fly", ("r", "l1", "l2"), _move_model("fly"))
    d.declare_action("giveSupportToPerson", ("r", "p"), _give_support)
    d.declare_action("clearLocation", ("r", "l"), _clear_location)
    d.declare_action("inspectLocation", ("r", "l"), _inspect_location)
    d.declare_action("inspectPerson", ("r", "p"), _inspect_person)
    d.declare_action("transfer", ("r1", "r2"), _transfer)
    d.declare_action("replenishSupplies", ("r",), _replenish)
    d.declare_action("captureImage", ("r", "camera", "l"), _capture_image)
    d.declare_action("changeAltitude", ("r", "newAltitude"), _change_altitude)
    d.declare_action("deadEnd", ("p",), [_ko()])
    d.declare_action("fail", (), [_ko()])

    d.declare_task("moveTo", "r", "l")
    d.declare_task("rescue", "r", "p")
    d.declare_task("helpPerson", "r", "p")
    d.declare_task("getSupplies", "r")
    d.declare_task("survey", "r", "l")
    d.declare_task("getRobot")
    d.declare_task("adjustAltitude", "r")

    wheeled = Cmp(Var("robotType", P.r), "=", "wheeled")
    uav = Cmp(Var("robotType", P.r), "=", "uav")
    d.declare_method("MoveTo_Method4", "moveTo", ("r", "l"), pre=uav, body=seq(
        assign("x", Var("loc", P.r)),
        if_(Cmp(P.x, "!=", P.l), act("fly", P.r, P.x, P.l)),
    ))
    d.declare_method("MoveTo_Method3", "moveTo", ("r", "l"), pre=wheeled, body=_move_method("curved", "moveCurved"))
    d.declare_method("MoveTo_Method2", "moveTo", ("r", "l"), pre=wheeled, body=_move_method("manhattan", "moveManhattan"))
    d.declare_method("MoveTo_Method1", "moveTo", ("r", "l"), pre=wheeled, body=_move_method("euclidean", "moveEuclidean"))

    d.declare_method("Rescue_Method1", "rescue", ("r", "p"), body=if_(
        Not(uav),
        seq(
            if_(Cmp(Var("hasMedicine", P.r), "=", 0), sub("getSupplies", P.r)),
            sub("helpPerson", P.r, P.p),
        ),
        fail(),
    ))
    d.declare_method("Rescue_Method2", "rescue", ("r", "p"), body=seq(
        if_(uav, sub("getRobot")),
        assign("r2", Var("newRobot", 1)),
        if_(
            Cmp(P.r2, "!=", None),
            seq(
                if_(Cmp(Var("hasMedicine", P.r2), "=", 0), sub("getSupplies", P.r2)),
                sub("helpPerson", P.r2, P.p),
                assign(Var("status", P.r2), "free"),
            ),
            fail(),
        ),
    ))

    d.declare_method("HelpPerson_Method2", "helpPerson", ("r", "p"), body=seq(
        sub("moveTo", P.r, Var("loc", P.p)),
        act("inspectLocation", P.r, Var("loc", P.r)),
        if_(
            Cmp(Var("status", Var("loc", P.r)), "=", "hasDebri"),
            act("clearLocation", P.r, Var("loc", P.r)),
            seq(_check_result(lambda s, sc: s.get("loc", sc["p"])), fail()),
        ),
    ))
    d.declare_method("HelpPerson_Method1", "helpPerson", ("r", "p"), body=seq(
        sub("moveTo", P.r, Var("loc", P.p)),
        act("inspectPerson", P.r, P.p),
        if_(Cmp(Var("status", P.p), "=", "injured"), act("giveSupportToPerson", P.r, P.p), fail()),
    ))

    d.declare_method("GetSupplies_Method2", "getSupplies", ("r",), body=seq(
        sub("moveTo", P.r, BASE),
        act("replenishSupplies", P.r),
    ))
    d.declare_method("GetSupplies_Method1", "getSupplies", ("r",), body=seq(
        assign("r2", _nearest_with_medicine),
        if_(
            Cmp(P.r2, "!=", None),
            seq(sub("moveTo", P.r, Var("loc", P.r2)), act("transfer", P.r2, P.r)),
            fail(),
        ),
    ))

    for k, camera in ((1, "frontCamera"), (2, "bottomCamera")):
        d.declare_method(f"Survey_Method{k}", "survey", ("r", "l"), body=seq(
            if_(Not(uav), fail()),
            sub("adjustAltitude", P.r),
            act("captureImage", P.r, camera, P.l),
            assign("person", Var("imagePerson", P.r)),
            if_(Cmp(P.person, "!=", None), sub("rescue", P.r, P.person)),
            _check_result("l", "r"),
        ))

    d.declare_method("GetRobot_Method1", "getRobot", (), body=seq(
        assign("robot", _free_robot_nearest_base),
        if_(
            Cmp(P.robot, "=", None),
            fail(),
            seq(assign(Var("status", P.robot), "busy"), assign(Var("newRobot", 1), P.robot)),
        ),
    ))
    first_wheeled = lambda s, sc: s.rigid.objects("WHEELEDROBOTS")[0]
    d.declare_method("GetRobot_Method2", "getRobot", (), body=seq(
        assign(Var("newRobot", 1), first_wheeled),
        assign(Var("status", first_wheeled), "busy"),
    ))

    d.declare_method("AdjustAltitude_Method1", "adjustAltitude", ("r",), body=if_(
        Cmp(Var("altitude", P.r), "=", "high"), act("changeAltitude", P.r, "low")))
    d.declare_method("AdjustAltitude_Method2", "adjustAltitude", ("r",), body=if_(
        Cmp(Var("altitude", P.r), "=", "low"), act("changeAltitude", P.r, "high")))

    d.events = {"alarm", "deterioration"}
    d.heuristic = _hd
    d.params = {"sense_success": SENSE_SUCCESS, "camera_success": CAMERA_SUCCESS, "reconstructed": True}
    return d


def _hd(tau, m, s, utility):
    """Crude table: cheaper refinements of movement look better; everything else
    gets a flat estimate."""
    from ..utility import SR

    if utility is SR:
        return 0.9
    if m is not None and tau.name == "moveTo":
        return {"MoveTo_Method1": 0.2, "MoveTo_Method2": 0.15, "MoveTo_Method3": 0.12, "MoveTo_Method4": 0.2}.get(m.name, 0.1)
    return 0.05


# -- problems -----------------------------------------------------------------------------


def fixture_problem() -> ProblemInstance:
    """The fixed reference problem: three surveys over two drones."""
    initial = []
    loc = {"w1": (15, 15), "w2": (29, 29), "p1": (28, 30), "p2": (10, 30), "a1": (9, 19), "a2": (4, 5)}
    for k, v in loc.items():
        initial.append(("loc", (k,), v))
    for r in ("a1", "a2", "w1", "w2"):
        initial.append(("hasMedicine", (r,), 0))
    for r, t in {"w1": "wheeled", "a1": "uav", "a2": "uav", "w2": "wheeled"}.items():
        initial.append(("robotType", (r,), t))
    initial += [("status", ("w1",), "free"), ("status", ("w2",), "free")]
    initial += [("altitude", ("a1",), "high"), ("altitude", ("a2",), "low")]
    initial += [("imagePerson", ("a1",), None), ("imagePerson", ("a2",), None), ("newRobot", (1,), None)]
    weather = {(28, 30): "foggy", (15, 15): "rainy", (10, 30): "dustStorm"}
    initial += [("weather", (l,), w) for l, w in weather.items()]
    real_status = {"w1": "OK", "p1": "OK", "p2": "injured", "w2": "OK", "a1": "OK", "a2": "OK",
                   (28, 30): "hasDebri", (15, 15): "clear", (10, 30): "hasDebri"}
    real_person = {(28, 30): "p1", (15, 15): None, (10, 30): "p2"}
    return ProblemInstance(
        domain="snr",
        rigid={"WHEELEDROBOTS": ["w1", "w2"], "DRONES": ["a1", "a2"], "OBSTACLES": [(100, 100)],
               "PERSONS": ["p1", "p2"]},
        initial=initial,
        env={"realStatus": [((k,), v) for k, v in real_status.items()],
             "realPerson": [((k,), v) for k, v in real_person.items()]},
        tasks={
            8: [TaskInstance("survey", ("a1", (15, 15))), TaskInstance("survey", ("a2", (28, 30)))],
            20: [TaskInstance("survey", ("a1", (10, 30)))],
        },
        params={"sense_success": SENSE_SUCCESS},
    )


def _point(rng, lo=2, hi=40):
    return (rng.randint(lo, hi), rng.randint(lo, hi))


def gen_problem(rng: random.Random, difficulty: float = 1.0) -> ProblemInstance:
    """Random S&R problem: one or two survey tasks for drones over locations
    that may hide an injured or trapped person. With ``difficulty > 0``,
    obstacles sit on some curved paths, injured people may die after a
    deadline, and an alarm may raise an extra rescue task."""
    wheeled, drones = ["w1", "w2"], ["a1", "a2"]
    n_persons = rng.randint(1, 3)
    persons = [f"p{i + 1}" for i in range(n_persons)]
    used = {BASE}

    def fresh():
        while True:
            p = _point(rng)
            if p not in used:
                used.add(p)
                return p

    loc = {r: fresh() for r in wheeled + drones}
    ploc = {p: fresh() for p in persons}
    empty_locs = [fresh() for _ in range(2)]
    initial = [("loc", (k,), v) for k, v in {**loc, **ploc}.items()]
    for r in wheeled + drones:
        initial.append(("hasMedicine", (r,), rng.choice([0, 0, 1]) if r in wheeled else 0))
        initial.append(("robotType", (r,), "wheeled" if r in wheeled else "uav"))
    initial += [("status", (r,), "free") for r in wheeled]
    initial += [("altitude", (a,), rng.choice(["high", "low"])) for a in drones]
    initial += [("imagePerson", (a,), None) for a in drones] + [("newRobot", (1,), None)]
    all_locs = list(ploc.values()) + empty_locs
    weather = {l: rng.choice(WEATHER) for l in all_locs}
    initial += [("weather", (l,), w) for l, w in weather.items()]
    real_status = {r: "OK" for r in wheeled + drones}
    real_person = {}
    for p, l in ploc.items():
        real_status[p] = rng.choice(["injured", "OK"])
        real_status[l] = rng.choice(["hasDebri", "clear"]) if real_status[p] == "OK" else rng.choice(["hasDebri", "clear", "clear"])
        real_person[l] = p
    for l in empty_locs:
        real_status[l] = "clear"
        real_person[l] = None
    obstacles = [(100, 100)]
    events = []
    if difficulty > 0:
        targets = list(ploc.values()) + [BASE]
        for r in wheeled:
            if rng.random() < min(1.0, 0.6 * difficulty):
                (x1, y1), (x2, y2) = loc[r], rng.choice(targets)
                if x1 != x2 and y1 != y2:
                    obstacles.append((x1, y2))  # on the curved path only
        for p in persons:
            if real_status[p] == "injured" and rng.random() < 0.5 * difficulty:
                t = rng.randint(30, 80)
                events.append(EventSpec(t, "deterioration", env_assignments=(("realStatus", (p,), "dead"),),
                                        env_unless=(("realStatus", (p,), "OK"),)))
        if rng.random() < 0.2 * difficulty:
            p = rng.choice(persons)
            events.append(EventSpec(rng.randint(1, 15), "alarm", tasks=(TaskInstance("rescue", (rng.choice(wheeled), p)),)))
    n_tasks = rng.randint(1, 2)
    tasks: dict = {}
    for i in range(n_tasks):
        t = rng.randint(0, 10)
        l = rng.choice(list(ploc.values())) if rng.random() < 0.8 else rng.choice(empty_locs)
        tasks.setdefault(t, []).append(TaskInstance("survey", (drones[i % 2], l)))
    return ProblemInstance(
        domain="snr",
        rigid={"WHEELEDROBOTS": wheeled, "DRONES": drones, "OBSTACLES": obstacles, "PERSONS": persons},
        initial=initial,
        env={"realStatus": [((k,), v) for k, v in real_status.items()],
             "realPerson": [((k,), v) for k, v in real_person.items()]},
        events=events,
        tasks=tasks,
        seed=rng.randrange(2**31),
        params={"sense_success": SENSE_SUCCESS},
    )


def build_snr() -> DomainBundle:
    return DomainBundle("snr", build_domain(), gen_problem, fixture_problem, dead_ends=True,
                        params={"sense_success": SENSE_SUCCESS})
