import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from raeupom.domains import build
from raeupom.ir import act, seq, sub
from raeupom.model import Branch, Domain, TaskInstance, applicable
from raeupom.planner import NodeStats, PlanConfig, plan_select
from raeupom.stack import EMPTY
from raeupom.utility import EFF, SR


def fan(costs):
    d = Domain("fan")
    d.declare_task("t")
    for i, c in enumerate(costs):
        d.declare_action(f"a{i}", (), [Branch(0.7, None, c), Branch(0.3, None, c, failed=True)])
        d.declare_method(f"m{i}", "t", body=seq(act(f"a{i}")))
    return d


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 9), min_size=2, max_size=6), st.integers(0, 2**16), st.floats(0.1, 4.0))
def test_first_k_rollouts_visit_k_distinct_candidates(costs, seed, C):
    d = fan([float(c) for c in costs])
    info = {}
    plan_select(d.new_state(), TaskInstance("t"), EMPTY, PlanConfig(n_ro=len(costs), C=C), d,
                random.Random(seed), info=info)
    assert [n for _, _, n in info["q"]] == [1] * len(costs)


def test_ucb_prefers_unvisited_then_bonus():
    ns = NodeStats(["x", "y"])
    ns.update(0, 1.0)
    ns.update(1, 0.0)
    assert ns.ucb_choice(1.0) == 0
    for _ in range(30):
        ns.update(0, 1.0)
    # exploration bonus eventually pulls the starved arm
    assert ns.ucb_choice(100.0) == 1


@pytest.mark.parametrize("kind,expected", [(EFF, "mB"), (SR, "mA")])
def test_toy_choice_depends_on_utility(kind, expected):
    d = build("toy").domain
    m = plan_select(d.new_state(), TaskInstance("t"), EMPTY, PlanConfig(n_ro=400, utility=kind), d, random.Random(1))
    assert m.name == expected


def test_tried_instances_are_excluded():
    d = build("toy").domain
    s = d.new_state()
    mB = [m for m in applicable(s, TaskInstance("t"), d) if m.name == "mB"][0]
    m = plan_select(s, TaskInstance("t"), EMPTY, PlanConfig(n_ro=50), d, random.Random(0), tried={mB.identity})
    assert m.name == "mA"
    none = plan_select(s, TaskInstance("t"), EMPTY, PlanConfig(n_ro=50), d, random.Random(0),
                       tried={m.identity for m in applicable(s, TaskInstance("t"), d)})
    assert none is None


def test_q_estimates_approach_exact_values():
    d = build("toy").domain
    info = {}
    plan_select(d.new_state(), TaskInstance("t"), EMPTY, PlanConfig(n_ro=4000, C=0.5), d, random.Random(5), info=info)
    q = {m.name: (v, n) for m, v, n in info["q"]}
    assert q["mA"][0] == pytest.approx(0.5)
    assert q["mB"][0] == pytest.approx(0.8, abs=0.03)


def test_depth_cutoff_uses_heuristic():
    # at d_max=1 the subtask is cut off, so only h decides between the two methods of t2
    d = Domain("cut")
    d.declare_task("t2")
    d.declare_task("u")
    d.declare_action("cheap", (), [Branch(1.0, None, 1.0)])
    d.declare_method("u1", "u", body=seq(act("cheap")))
    d.declare_method("left", "t2", body=seq(sub("u")))
    d.declare_method("right", "t2", body=seq(sub("u")))
    h = lambda tau, m, s: 0.9 if m is not None and m.name == "right" else 0.1
    info = {}
    m = plan_select(d.new_state(), TaskInstance("t2"), EMPTY, PlanConfig(n_ro=20, d_max=1, heuristic=h), d,
                    random.Random(0), info=info)
    assert info["depth"] == 1
    assert m.name == "right"


def test_zero_time_budget_returns_first_candidate():
    d = build("toy").domain
    m = plan_select(d.new_state(), TaskInstance("t"), EMPTY, PlanConfig(n_ro=100, time_budget=0.0), d,
                    random.Random(0))
    assert m.name == "mA"


def test_config_validation():
    with pytest.raises(ValueError):
        PlanConfig(n_ro=0)
    with pytest.raises(ValueError):
        PlanConfig(C=0)
    assert PlanConfig.from_dict({"d_max": "inf", "n_ro": 3, "junk": 1}).d_max == math.inf


def test_plan_select_is_seed_deterministic():
    d = build("toy").domain
    runs = []
    for _ in range(2):
        info = {}
        plan_select(d.new_state(), TaskInstance("t"), EMPTY, PlanConfig(n_ro=37), d, random.Random(11), info=info)
        runs.append([(m.name, q, n) for m, q, n in info["q"]])
    assert runs[0] == runs[1]
