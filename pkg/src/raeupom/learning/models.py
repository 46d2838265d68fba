"""Trained predictors (LearnM, LearnMI, LearnH), their persistence, the
learned Select policy, and incremental retraining."""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import EmptyDataset, MissingModel, NoApplicableValue
from ..model import State, TaskInstance
from ..values import value_key
from .encoding import Buckets, OneHotEncoder
from .mlp import Mlp, TrainConfig, TrainHistory, train

FORMAT = "raeupom-model/1"


@dataclass
class LearnedModel:
    """One MLP with everything needed to use it without the training data."""

    kind: str                       # "method" | "param" | "heur"
    encoder: OneHotEncoder
    mlp: Mlp
    buckets: Buckets | None = None
    target: str | None = None       # "method/param" for parameter models
    history: TrainHistory | None = None

    def logits(self, s, tau, method=None):
        x = self.encoder.encode_input(s, tau, method, with_args=self.kind == "param")
        return self.mlp.forward(x)[0]

    def to_dict(self) -> dict:
        return {
            "format": FORMAT, "kind": self.kind, "target": self.target,
            "encoder": self.encoder.to_dict(), "mlp": self.mlp.to_dict(),
            "buckets": None if self.buckets is None else self.buckets.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LearnedModel":
        if d.get("format") != FORMAT:
            raise ValueError(f"not a model file (format {d.get('format')!r})")
        return cls(d["kind"], OneHotEncoder.from_dict(d["encoder"]), Mlp.from_dict(d["mlp"]),
                   None if d["buckets"] is None else Buckets.from_dict(d["buckets"]), d.get("target"))

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "LearnedModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


# -- training ----------------------------------------------------------------------


def _dataset(records, encoder, buckets=None):
    pairs = [encoder.encode(r, buckets) for r in records]
    X = np.stack([p[0] for p in pairs])
    y = np.array([p[1] for p in pairs], dtype=int)
    return X, y


def train_method_model(records, domain=None, config: TrainConfig = TrainConfig(), hidden=None,
                       encoder=None) -> LearnedModel:
    if not records:
        raise EmptyDataset("no method records")
    enc = encoder or OneHotEncoder.fit(records, domain)
    X, y = _dataset(records, enc)
    mlp = Mlp(X.shape[1], len(enc.methods), hidden, rng=config.seed)
    mlp, hist = train(mlp, X, y, config)
    return LearnedModel("method", enc, mlp, history=hist)


def train_param_models(records, domain=None, config: TrainConfig = TrainConfig(), hidden=None) -> dict:
    """One model per ``method/param`` target."""
    if not records:
        raise EmptyDataset("no parameter records")
    enc = OneHotEncoder.fit(records, domain)
    out = {}
    for target in enc.params:
        rs = [r for r in records if f"{r.method}/{r.param}" == target]
        X, y = _dataset(rs, enc)
        mlp = Mlp(X.shape[1], len(enc.params[target]), hidden, rng=config.seed)
        mlp, hist = train(mlp, X, y, config)
        out[target] = LearnedModel("param", enc, mlp, target=target, history=hist)
    return out


def train_heuristic_model(records, domain=None, k: int = 10, config: TrainConfig = TrainConfig(),
                          hidden=None, eff_cap: float = 1e9) -> LearnedModel:
    if not records:
        raise EmptyDataset("no heuristic records")
    enc = OneHotEncoder.fit(records, domain)
    buckets = Buckets.equal_frequency([r.utility for r in records], k, cap=eff_cap)
    X, y = _dataset(records, enc, buckets)
    mlp = Mlp(X.shape[1], buckets.k, hidden, rng=config.seed)
    mlp, hist = train(mlp, X, y, config)
    return LearnedModel("heur", enc, mlp, buckets, history=hist)


# -- prediction -----------------------------------------------------------------------


def _ranked(logits) -> list[int]:
    """Indices by decreasing logit; ties keep the lower index first."""
    return sorted(range(len(logits)), key=lambda i: (-logits[i], i))


def rank_methods(model: LearnedModel | None, s, tau: TaskInstance) -> list[str]:
    if model is None:
        raise MissingModel("no method model")
    return [model.encoder.methods[i] for i in _ranked(model.logits(s, tau))]


def predict_method(model: LearnedModel | None, s, tau: TaskInstance) -> str:
    """Template name with the largest output."""
    return rank_methods(model, s, tau)[0]


def predict_param(model: LearnedModel | None, s, tau: TaskInstance, applicable_values) -> object:
    """Highest-ranked value of the model's parameter among ``applicable_values``."""
    if model is None:
        raise MissingModel("no parameter model")
    allowed = list(applicable_values)
    if not allowed:
        raise NoApplicableValue(f"no applicable value for {model.target}")
    if len(allowed) == 1:
        return allowed[0]
    method, param = model.target.split("/", 1)
    cat = model.encoder.param_catalog(method, param)
    logits = model.logits(s, tau)
    for i in _ranked(logits):
        if cat[i] in allowed:
            return cat[i]
    # none of the applicable values was seen in training
    return sorted(allowed, key=value_key)[0]


def heuristic_from_model(model: LearnedModel | None):
    """``h(tau, m, s)``: midpoint of the most likely utility interval."""
    if model is None or model.buckets is None:
        raise MissingModel("no heuristic model")
    enc, buckets = model.encoder, model.buckets

    def h(tau, m, s):
        name = m.name if m is not None else None
        if name is None or name not in enc.methods or tau.name not in enc.tasks:
            return buckets.midpoint(buckets.k - 1)
        return buckets.midpoint(int(np.argmax(model.logits(s, tau, name))))

    return h


@dataclass
class LearnedPolicy:
    """Select policy from a method model, optionally refined by parameter
    models. The predicted template falls back to the next-ranked one when it
    has no applicable untried instance; among the instances of the chosen
    template, parameter models (when present) pick the free values, and
    otherwise the choice is uniform."""

    method_model: LearnedModel | None
    param_models: dict = field(default_factory=dict)

    def choose(self, xi: State, tau: TaskInstance, candidates, rng: random.Random):
        if not candidates:
            return None
        by_name: dict = {}
        for m in candidates:
            by_name.setdefault(m.name, []).append(m)
        names = [n for n in rank_methods(self.method_model, xi, tau) if n in by_name]
        names += [n for n in by_name if n not in names]
        pool = by_name[names[0]]
        if len(pool) == 1:
            return pool[0]
        t = pool[0].template
        n_role = len(t.params)
        for j, (pname, _) in enumerate(t.extra):
            model = self.param_models.get(f"{t.name}/{pname}")
            if model is None:
                continue
            values = sorted({m.args[n_role + j] for m in pool}, key=value_key)
            v = predict_param(model, xi, tau, values)
            pool = [m for m in pool if m.args[n_role + j] == v]
            if len(pool) == 1:
                return pool[0]
        return pool[rng.randrange(len(pool))]


# -- incremental learning ---------------------------------------------------------------


@dataclass
class IncrementalLearner:
    """Keeps a buffer of records from live runs and retrains on the most
    recent ``Z`` of them every ``X`` runs (or on demand)."""

    kind: str = "method"
    Z: int = 2000
    X: int = 10
    min_size: int = 100
    config: TrainConfig = field(default_factory=TrainConfig)
    domain: object = None
    k: int = 10
    buffer: list = field(default_factory=list)
    model: object = None
    runs: int = 0
    updates: int = 0

    def add_run(self, records) -> bool:
        self.buffer.extend(records)
        self.runs += 1
        if self.runs % self.X == 0:
            return self.update()
        return False

    def update(self) -> bool:
        """Retrain on the last ``Z`` records; returns False when skipped."""
        if len(self.buffer) < self.min_size:
            return False
        recent = self.buffer[-self.Z:]
        if self.kind == "method":
            new = train_method_model(recent, self.domain, self.config)
        elif self.kind == "heur":
            new = train_heuristic_model(recent, self.domain, self.k, self.config)
        elif self.kind == "param":
            new = train_param_models(recent, self.domain, self.config)
        else:
            raise ValueError(f"unknown model kind {self.kind!r}")
        self.model = new  # replaced in one assignment
        self.updates += 1
        return True


def incremental_update(learner: IncrementalLearner, new_records=(), Z: int | None = None) -> bool:
    if Z is not None:
        learner.Z = Z
    learner.buffer.extend(new_records)
    return learner.update()
