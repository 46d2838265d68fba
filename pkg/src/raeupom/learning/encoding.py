"""Training records, One-Hot encoding of (state, task, method) inputs, and
equal-frequency utility buckets."""
from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from ..domains.base import from_jsonable, to_jsonable
from ..errors import UnknownCatalogEntry
from ..model import State, TaskInstance
from ..values import UNKNOWN, is_numeric, value_key

OTHER = "<other>"


# -- records ----------------------------------------------------------------------


def state_dict(s: State | dict) -> dict:
    return dict(s.items()) if isinstance(s, State) else dict(s)


@dataclass
class MethodRec:
    state: dict
    task: TaskInstance
    method: str
    kind: str = field(default="method", init=False)


@dataclass
class ParamRec:
    state: dict
    task: TaskInstance
    method: str
    param: str
    value: Any
    kind: str = field(default="param", init=False)


@dataclass
class HeurRec:
    state: dict
    task: TaskInstance
    method: str
    utility: float
    kind: str = field(default="heur", init=False)


def record_to_json(r) -> dict:
    d = {
        "kind": r.kind,
        "state": [[n, to_jsonable(tuple(a)), to_jsonable(v)] for (n, a), v in
                  sorted(r.state.items(), key=lambda kv: (kv[0][0], value_key(kv[0][1])))],
        "task": [r.task.name, [to_jsonable(a) for a in r.task.args]],
        "method": r.method,
    }
    if r.kind == "param":
        d["param"], d["value"] = r.param, to_jsonable(r.value)
    elif r.kind == "heur":
        d["utility"] = r.utility
    return d


def record_from_json(d: dict):
    state = {(n, from_jsonable(a)): from_jsonable(v) for n, a, v in d["state"]}
    task = TaskInstance(d["task"][0], tuple(from_jsonable(a) for a in d["task"][1]))
    if d["kind"] == "method":
        return MethodRec(state, task, d["method"])
    if d["kind"] == "param":
        return ParamRec(state, task, d["method"], d["param"], from_jsonable(d["value"]))
    if d["kind"] == "heur":
        return HeurRec(state, task, d["method"], float(d["utility"]))
    raise ValueError(f"unknown record kind {d['kind']!r}")


def save_records(records: Iterable, path) -> None:
    with open(path, "w") as fh:
        for r in records:
            fh.write(json.dumps(record_to_json(r), sort_keys=True) + "\n")


def load_records(path) -> list:
    return [record_from_json(json.loads(line)) for line in Path(path).read_text().splitlines() if line.strip()]


# -- utility buckets -----------------------------------------------------------------


@dataclass
class Buckets:
    """Intervals ``[e_i, e_{i+1})`` (the last one closed); ``edges[-1]`` may be
    ``inf``, in which case the top interval is read as ``[e, cap]``."""

    edges: list
    cap: float = 1e9

    @classmethod
    def equal_frequency(cls, values, k: int, cap: float = 1e9, unbounded_top: bool = False) -> "Buckets":
        """Cut points at the ``i*n/k`` order statistics so that every interval
        holds about ``n/k`` of the values."""
        if k < 1:
            raise ValueError("k must be >= 1")
        xs = sorted(min(float(v), cap) for v in values)
        if not xs:
            raise ValueError("no values to bucket")
        n = len(xs)
        cuts = [xs[min(n - 1, round(i * n / k))] for i in range(1, k)]
        top = math.inf if unbounded_top else xs[-1]
        return cls([xs[0], *cuts, top], cap)

    @property
    def k(self) -> int:
        return len(self.edges) - 1

    def index(self, u: float) -> int:
        return min(self.k - 1, bisect.bisect_right(self.edges, min(u, self.cap), 1, self.k) - 1)

    def midpoint(self, i: int) -> float:
        lo, hi = self.edges[i], self.edges[i + 1]
        if math.isinf(hi):
            hi = self.cap
        return (lo + hi) / 2

    def decode(self, i: int) -> float:
        return self.midpoint(i)

    def to_dict(self):
        return {"edges": [e if math.isfinite(e) else "inf" for e in self.edges], "cap": self.cap}

    @classmethod
    def from_dict(cls, d):
        return cls([math.inf if e == "inf" else float(e) for e in d["edges"]], d["cap"])


# -- one-hot encoder ---------------------------------------------------------------------


def _numeric_bins(values, n_bins: int) -> list:
    lo, hi = min(values), max(values)
    if hi == lo:
        return [lo]
    return list(np.linspace(lo, hi, n_bins + 1)[1:-1])


@dataclass
class OneHotEncoder:
    """Catalog-based encoder. Each state-variable instance gets a block of
    ``N`` indicators (``N`` is the largest catalog); index 0 of every catalog
    is reserved for values never seen while fitting. Numeric variables with
    more than ``max_values`` distinct values are bucketed by equal-width bins.
    """

    variables: list = field(default_factory=list)      # [(name, args)]
    catalogs: list = field(default_factory=list)       # per variable: list of values (index 0 = OTHER)
    bins: list = field(default_factory=list)           # per variable: None or interior bin edges
    tasks: list = field(default_factory=list)
    methods: list = field(default_factory=list)
    params: dict = field(default_factory=dict)         # "method/param" -> value catalog
    arg_catalogs: list = field(default_factory=list)   # per task-argument position
    max_values: int = 10

    @classmethod
    def fit(cls, records, domain=None, max_values: int = 10) -> "OneHotEncoder":
        seen: dict = {}
        for r in records:
            for k, v in r.state.items():
                seen.setdefault(k, set()).add(v)
        variables = sorted(seen, key=lambda k: (k[0], value_key(k[1])))
        catalogs, bins = [], []
        for k in variables:
            vals = seen[k]
            num = [v for v in vals if is_numeric(v)]
            if len(num) > max_values:
                edges = _numeric_bins(num, max_values)
                bins.append(edges)
                rest = sorted((v for v in vals if not is_numeric(v)), key=value_key)
                catalogs.append([OTHER] + [("bin", i) for i in range(len(edges) + 1)] + rest)
            else:
                bins.append(None)
                catalogs.append([OTHER] + sorted(vals, key=value_key))
        if domain is not None:
            tasks = list(domain.tasks)
            methods = [m.name for m in domain.methods]
        else:
            tasks = sorted({r.task.name for r in records})
            methods = sorted({r.method for r in records})
        params: dict = {}
        for r in records:
            if r.kind == "param":
                params.setdefault(f"{r.method}/{r.param}", set()).add(r.value)
        params = {k: sorted(v, key=value_key) for k, v in sorted(params.items())}
        n_args = max((len(r.task.args) for r in records), default=0)
        arg_catalogs = []
        for i in range(n_args):
            vals = {r.task.args[i] for r in records if len(r.task.args) > i}
            arg_catalogs.append([OTHER] + sorted(vals, key=value_key))
        return cls(variables, catalogs, bins, tasks, methods, params, arg_catalogs, max_values)

    # dimensions -------------------------------------------------------------

    @property
    def N(self) -> int:
        return max((len(c) for c in self.catalogs), default=1)

    @property
    def state_dim(self) -> int:
        return len(self.variables) * self.N

    def input_dim(self, with_method=False, with_args=False) -> int:
        n = self.state_dim + len(self.tasks)
        if with_method:
            n += len(self.methods)
        if with_args:
            n += sum(len(c) for c in self.arg_catalogs)
        return n

    # encoding ---------------------------------------------------------------

    def value_index(self, j: int, v) -> int:
        cat = self.catalogs[j]
        edges = self.bins[j]
        if edges is not None and is_numeric(v):
            return cat.index(("bin", bisect.bisect_right(edges, v)))
        try:
            return cat.index(v)
        except ValueError:
            return 0

    def encode_state(self, s) -> np.ndarray:
        vals = state_dict(s)
        N = self.N
        out = np.zeros(len(self.variables) * N)
        for j, k in enumerate(self.variables):
            out[j * N + self.value_index(j, vals.get(k, UNKNOWN))] = 1.0
        return out

    def _one_hot(self, catalog, name, what) -> np.ndarray:
        v = np.zeros(len(catalog))
        try:
            v[catalog.index(name)] = 1.0
        except ValueError:
            raise UnknownCatalogEntry(f"{what} {name!r} not in catalog") from None
        return v

    def encode_task(self, tau) -> np.ndarray:
        return self._one_hot(self.tasks, tau.name if isinstance(tau, TaskInstance) else tau, "task")

    def encode_method(self, m: str) -> np.ndarray:
        return self._one_hot(self.methods, m, "method")

    def encode_args(self, args) -> np.ndarray:
        parts = []
        for i, cat in enumerate(self.arg_catalogs):
            v = np.zeros(len(cat))
            a = args[i] if i < len(args) else OTHER
            v[cat.index(a) if a in cat else 0] = 1.0
            parts.append(v)
        return np.concatenate(parts) if parts else np.zeros(0)

    def encode_input(self, s, tau, method: str | None = None, with_args=False) -> np.ndarray:
        parts = [self.encode_state(s), self.encode_task(tau)]
        if method is not None:
            parts.append(self.encode_method(method))
        if with_args:
            parts.append(self.encode_args(tau.args))
        return np.concatenate(parts)

    def method_index(self, m: str) -> int:
        try:
            return self.methods.index(m)
        except ValueError:
            raise UnknownCatalogEntry(f"method {m!r} not in catalog") from None

    def param_catalog(self, method: str, param: str) -> list:
        try:
            return self.params[f"{method}/{param}"]
        except KeyError:
            raise UnknownCatalogEntry(f"parameter {method}/{param} not in catalog") from None

    def param_index(self, method: str, param: str, value) -> int:
        cat = self.param_catalog(method, param)
        if value not in cat:
            raise UnknownCatalogEntry(f"value {value!r} of {method}/{param} not in catalog")
        return cat.index(value)

    def encode(self, record, buckets: Buckets | None = None):
        """``(feature vector, label index)`` for one record."""
        if record.kind == "method":
            return self.encode_input(record.state, record.task), self.method_index(record.method)
        if record.kind == "param":
            x = self.encode_input(record.state, record.task, with_args=True)
            return x, self.param_index(record.method, record.param, record.value)
        if record.kind == "heur":
            if buckets is None:
                raise ValueError("heuristic records need buckets")
            return self.encode_input(record.state, record.task, record.method), buckets.index(record.utility)
        raise ValueError(f"unknown record kind {record.kind!r}")

    # persistence ------------------------------------------------------------

    def to_dict(self) -> dict:
        cat = lambda c: [[x[0], x[1]] if isinstance(x, tuple) and len(x) == 2 and x[0] == "bin"
                         else {"v": to_jsonable(x)} for x in c]
        return {
            "variables": [[n, to_jsonable(tuple(a))] for n, a in self.variables],
            "catalogs": [cat(c) for c in self.catalogs],
            "bins": self.bins,
            "tasks": self.tasks,
            "methods": self.methods,
            "params": {k: [to_jsonable(v) for v in c] for k, c in self.params.items()},
            "arg_catalogs": [[to_jsonable(v) for v in c] for c in self.arg_catalogs],
            "max_values": self.max_values,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "OneHotEncoder":
        def cat(c):
            return [tuple(x) if isinstance(x, list) else from_jsonable(x["v"]) for x in c]

        return cls(
            variables=[(n, from_jsonable(a)) for n, a in d["variables"]],
            catalogs=[cat(c) for c in d["catalogs"]],
            bins=[None if b is None else list(b) for b in d["bins"]],
            tasks=list(d["tasks"]),
            methods=list(d["methods"]),
            params={k: [from_jsonable(v) for v in c] for k, c in d["params"].items()},
            arg_catalogs=[[from_jsonable(v) for v in c] for c in d["arg_catalogs"]],
            max_values=d["max_values"],
        )
