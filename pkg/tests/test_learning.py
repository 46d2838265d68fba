import math

import numpy as np
import pytest

from raeupom.domains import build
from raeupom.errors import DimensionMismatch, EmptyDataset, MissingModel, NoApplicableValue, UnknownCatalogEntry
from raeupom.learning import (
    Buckets, HeurRec, IncrementalLearner, LearnedModel, LearnedPolicy, MethodRec, Mlp, OneHotEncoder, ParamRec,
    TrainConfig, cross_entropy, generate_records, heuristic_from_model, incremental_update, load_records,
    predict_method, predict_param, save_records, train, train_heuristic_model, train_method_model,
    train_param_models,
)
from raeupom.model import TaskInstance, applicable
from raeupom.planner import PlanConfig
from raeupom.values import UNKNOWN


# -- MLP numerics -------------------------------------------------------------------


def numeric_grad(mlp, X, y, p, eps=1e-5):
    g = np.zeros_like(p)
    it = np.nditer(p, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        old = p[i]
        p[i] = old + eps
        up = mlp.loss(X, y)
        p[i] = old - eps
        down = mlp.loss(X, y)
        p[i] = old
        g[i] = (up - down) / (2 * eps)
    return g


@pytest.mark.parametrize("seed", range(10))
def test_gradients_match_central_differences(seed):
    rng = np.random.default_rng(seed)
    mlp = Mlp(5, 3, 4, rng=seed)
    mlp.b1 = rng.normal(size=4)
    mlp.b2 = rng.normal(size=3)
    X = rng.normal(size=(7, 5))
    y = rng.integers(0, 3, size=7)
    _, grads = mlp.gradients(X, y)
    for p, g in zip(mlp.params, grads):
        n = numeric_grad(mlp, X, y, p)
        rel = np.linalg.norm(g - n) / max(np.linalg.norm(g) + np.linalg.norm(n), 1e-12)
        assert rel < 1e-4


@pytest.mark.parametrize("n_out", [2, 3, 7])
def test_zero_weights_give_log_k_loss(n_out):
    mlp = Mlp(4, n_out, zero=True)
    X = np.random.default_rng(0).normal(size=(9, 4))
    assert abs(mlp.loss(X, np.zeros(9, dtype=int)) - math.log(n_out)) < 1e-9


def separable(seed, n=200):
    rng = np.random.default_rng(seed)
    w = rng.normal(size=4)
    X = rng.normal(size=(n, 4))
    margin = X @ w
    keep = np.abs(margin) > 0.1 * np.linalg.norm(w)
    return X[keep], (margin[keep] > 0).astype(int)


def test_separable_set_is_learned():
    wins = 0
    for seed in range(20):
        X, y = separable(seed)
        _, hist = train(Mlp(4, 2, rng=seed), X, y, TrainConfig(lr=0.05, epochs=200, seed=seed))
        wins += hist.val_acc[-1] >= 0.95
    assert wins >= 18


def test_cross_entropy_value():
    assert cross_entropy(np.array([[0.0, math.log(3.0)]]), [1]) == pytest.approx(math.log(4 / 3))


def test_train_rejects_bad_input():
    with pytest.raises(EmptyDataset):
        train(Mlp(2, 2), np.zeros((0, 2)), np.zeros(0, dtype=int))
    with pytest.raises(DimensionMismatch):
        train(Mlp(2, 2), np.zeros((3, 5)), np.zeros(3, dtype=int))
    with pytest.raises(DimensionMismatch):
        Mlp(2, 2).forward(np.zeros(3))
    with pytest.raises(ValueError):
        TrainConfig(lr=0.5)


def test_mlp_round_trip():
    m = Mlp(3, 2, rng=1)
    m2 = Mlp.from_dict(m.to_dict())
    X = np.eye(3)
    assert np.array_equal(m.forward(X), m2.forward(X))


# -- buckets ---------------------------------------------------------------------------


def test_equal_frequency_quartiles():
    values = np.random.default_rng(3).exponential(size=100)
    b = Buckets.equal_frequency(values, 4)
    sizes = np.bincount([b.index(v) for v in values], minlength=4)
    assert all(24 <= s <= 26 for s in sizes)
    for i in range(4):
        assert b.decode(i) == (b.edges[i] + b.edges[i + 1]) / 2


def test_bucket_top_interval_uses_cap():
    b = Buckets.equal_frequency([1, 2, 3, 4], 2, cap=100.0, unbounded_top=True)
    assert b.edges[-1] == math.inf
    assert b.decode(1) == (b.edges[1] + 100.0) / 2
    assert Buckets.from_dict(b.to_dict()) == b


# -- encoding ---------------------------------------------------------------------------


def recs():
    return [
        MethodRec({("loc", ("r1",)): "a", ("fuel", ()): 1}, TaskInstance("go", ("r1",)), "m1"),
        MethodRec({("loc", ("r1",)): "b", ("fuel", ()): 2}, TaskInstance("go", ("r1",)), "m2"),
        MethodRec({("loc", ("r1",)): "c"}, TaskInstance("stay", ("r2",)), "m1"),
    ]


def test_encoder_dimensions_and_other_slot():
    enc = OneHotEncoder.fit(recs())
    assert enc.variables == [("fuel", ()), ("loc", ("r1",))]
    assert enc.N == 4  # OTHER + a, b, c
    assert enc.state_dim == 8
    assert enc.input_dim() == 8 + 2
    assert enc.input_dim(with_method=True, with_args=True) == 8 + 2 + 2 + 3
    x = enc.encode_state({("loc", ("r1",)): "zzz"})
    assert x[4] == 1.0  # unseen value -> OTHER slot of loc
    assert x.sum() == 2.0
    with pytest.raises(UnknownCatalogEntry):
        enc.encode_task("fly")


def test_encoder_bins_wide_numeric_ranges():
    rs = [MethodRec({("v", ()): float(i)}, TaskInstance("t"), "m") for i in range(50)]
    enc = OneHotEncoder.fit(rs, max_values=10)
    assert enc.bins[0] is not None
    assert len(enc.catalogs[0]) == 1 + 10
    assert enc.encode_state({("v", ()): 0.0}).argmax() != enc.encode_state({("v", ()): 49.0}).argmax()


def test_encoder_round_trip():
    enc = OneHotEncoder.fit(recs() + [ParamRec({("x", ()): UNKNOWN}, TaskInstance("go", ("r1",)), "m1", "p", (1, 2))])
    enc2 = OneHotEncoder.from_dict(enc.to_dict())
    s = {("loc", ("r1",)): "b", ("x", ()): UNKNOWN}
    assert np.array_equal(enc.encode_input(s, TaskInstance("go", ("r1",)), with_args=True),
                          enc2.encode_input(s, TaskInstance("go", ("r1",)), with_args=True))
    assert enc2.param_catalog("m1", "p") == [(1, 2)]


def test_records_jsonl_round_trip(tmp_path):
    rs = recs() + [ParamRec({("x", ()): (1, 2)}, TaskInstance("go", ((3, 4),)), "m1", "p", "r3"),
                   HeurRec({("x", ()): UNKNOWN}, TaskInstance("go"), "m2", 0.25)]
    save_records(rs, tmp_path / "r.jsonl")
    assert load_records(tmp_path / "r.jsonl") == rs


# -- data generation -----------------------------------------------------------------------


class ForceB:
    name = "forceB"

    def select(self, engine, xi, tau, sigma, tried, info):
        cands = [m for m in applicable(xi, tau, engine.domain) if m.identity not in tried]
        info["candidates"] = cands
        return next((m for m in cands if m.name == "mB"), cands[0] if cands else None)


def test_lm1_keeps_only_successful_choices():
    lm2 = generate_records(build("toy"), 10, mode="lm2", rng=0, strategy=ForceB())
    lm1 = generate_records(build("toy"), 10, mode="lm1", rng=0, strategy=ForceB())
    assert len(lm2) == 10
    assert len(lm1) == 8
    many = generate_records(build("toy"), 300, mode="lm1", rng=1, strategy=ForceB())
    assert abs(len(many) / 300 - 0.8) < 0.07


def test_nav_parameter_records():
    rs = generate_records(build("nav"), 15, PlanConfig(n_ro=20), mode="mi", rng=0)
    assert rs and {(r.method, r.param) for r in rs} == {("MoveThroughDoorway_Method2", "robot")}
    assert {r.value for r in rs} <= {"r1", "r2", "r3"}


def test_lh_records_carry_q_values():
    rs = generate_records(build("toy"), 5, PlanConfig(n_ro=30), mode="lh", rng=0)
    assert len(rs) == 10
    assert all(r.method in ("mA", "mB") and r.utility >= 0 for r in rs)


# -- models --------------------------------------------------------------------------------------


def toy_method_records(n=120):
    # mB in states where x is low, mA otherwise
    out = []
    for i in range(n):
        x = i % 4
        out.append(MethodRec({("x", ()): x}, TaskInstance("t"), "mB" if x < 2 else "mA"))
    return out


def test_method_model_learns_rule_and_persists(tmp_path):
    d = build("toy").domain
    model = train_method_model(toy_method_records(), d, TrainConfig(lr=0.1, epochs=150))
    assert predict_method(model, {("x", ()): 0}, TaskInstance("t")) == "mB"
    assert predict_method(model, {("x", ()): 3}, TaskInstance("t")) == "mA"
    model.save(tmp_path / "m.json")
    again = LearnedModel.load(tmp_path / "m.json")
    assert np.array_equal(again.logits({("x", ()): 1}, TaskInstance("t")),
                          model.logits({("x", ()): 1}, TaskInstance("t")))


def test_predict_param_masks_inapplicable_values():
    rs = [ParamRec({("x", ()): 0}, TaskInstance("t"), "m", "p", "a")] * 30 + \
         [ParamRec({("x", ()): 0}, TaskInstance("t"), "m", "p", "b")] * 5
    models = train_param_models(rs, config=TrainConfig(epochs=50))
    model = models["m/p"]
    s = {("x", ()): 0}
    assert predict_param(model, s, TaskInstance("t"), ["a", "b"]) == "a"
    assert predict_param(model, s, TaskInstance("t"), ["b", "c"]) == "b"
    assert predict_param(model, s, TaskInstance("t"), ["c"]) == "c"
    assert predict_param(model, s, TaskInstance("t"), ["d", "c"]) == "c"
    with pytest.raises(NoApplicableValue):
        predict_param(model, s, TaskInstance("t"), [])
    with pytest.raises(MissingModel):
        predict_param(None, s, TaskInstance("t"), ["a"])


def test_heuristic_model_returns_bucket_midpoints():
    rs = [HeurRec({("x", ()): i % 2}, TaskInstance("t"), "mA" if i % 2 else "mB", 0.1 if i % 2 else 0.9)
          for i in range(100)]
    model = train_heuristic_model(rs, build("toy").domain, k=2, config=TrainConfig(lr=0.1, epochs=100))
    h = heuristic_from_model(model)
    mids = {model.buckets.midpoint(i) for i in range(2)}
    d = build("toy").domain
    [mA, mB] = applicable(d.new_state(), TaskInstance("t"), d)
    assert h(TaskInstance("t"), mA, {("x", ()): 1}) in mids
    assert h(TaskInstance("t"), mB, {("x", ()): 0}) > h(TaskInstance("t"), mA, {("x", ()): 1})


def test_learned_policy_falls_back_to_next_ranked():
    d = build("toy").domain
    model = train_method_model(toy_method_records(), d, TrainConfig(lr=0.1, epochs=150))
    pol = LearnedPolicy(model)
    s = d.new_state()
    cands = applicable(s, TaskInstance("t"), d)
    import random

    xi = {("x", ()): 0}
    assert pol.choose(xi, TaskInstance("t"), cands, random.Random(0)).name == "mB"
    assert pol.choose(xi, TaskInstance("t"), [cands[0]], random.Random(0)).name == "mA"


def test_incremental_learner_skips_small_buffers_and_keeps_last_z():
    inc = IncrementalLearner("method", Z=100, X=2, min_size=100, config=TrainConfig(epochs=5))
    data = toy_method_records(60)
    assert inc.add_run(data[:30]) is False
    assert inc.add_run(data[30:]) is False  # 60 < 100: skipped
    assert inc.model is None
    only_a = [MethodRec({("x", ()): 3}, TaskInstance("t"), "mA")] * 100
    assert incremental_update(inc, only_a) is True
    assert inc.updates == 1 and inc.model is not None
    assert len(inc.buffer) == 160
    # trained on the most recent Z records only, so mB never reached the catalog
    assert inc.model.encoder.methods == ["mA"]


def test_empty_training_sets_raise():
    with pytest.raises(EmptyDataset):
        train_method_model([])
    with pytest.raises(EmptyDataset):
        train_heuristic_model([])
