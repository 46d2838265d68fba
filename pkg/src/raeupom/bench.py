"""Experiment runner: seeded sweeps of RAE runs, CSV rows, summary metrics with
95% normal-approximation half-widths, and plain SVG/CSV plot artifacts."""
from __future__ import annotations

import csv
import io
import math
import os
import random
import time
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .actor import Engine, EngineConfig, Learned, Planner, Reactive
from .domains import build
from .errors import EmptyInput, IoError, MissingModel, RaeUpomError
from .planner import PlanConfig
from .stack import JobStatus
from .utility import Kind

COLUMNS = [
    "run_id", "problem_id", "seed", "domain", "mode", "utility", "n_ro", "d_max", "task_id", "success",
    "efficiency", "retries", "retry_ratio", "success_ratio", "wall_ms", "sim_time", "cutoff",
]
MODES = ("reactive", "learned", "plan", "plan+lh")
OUT_ENV = "RAEUPOM_OUT"
Z95 = 1.959963984540054


def default_out_dir() -> Path:
    return Path(os.environ.get(OUT_ENV, "results"))


@dataclass
class ExperimentConfig:
    domain: str = "toy"
    mode: str = "reactive"
    utility: str = "efficiency"
    n_ro: int = 50
    d_max: float = math.inf
    C: float = 1.0
    heuristic: str = "h0"
    n_problems: int = 50
    runs_per_problem: int = 50
    seed: int = 0
    wall_cutoff: float | None = 1800.0
    out: str | None = None
    difficulty: float = 1.0
    record_wall: bool = False   # wall_ms is 0 unless set, keeping CSVs byte-stable
    method_model: str | None = None
    param_models: list = field(default_factory=list)
    heur_model: str | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        self.utility = Kind.parse(self.utility).value
        if self.n_problems < 1 or self.runs_per_problem < 1:
            raise ValueError("problem and run counts must be >= 1")
        if self.mode in ("plan", "plan+lh") and self.n_ro < 1:
            raise ValueError("planning modes need n_ro >= 1")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        names = {f.name for f in fields(cls)}
        known = {k: v for k, v in d.items() if k in names}
        if known.get("d_max") in (None, "inf", "infinity"):
            known.pop("d_max", None)
        return cls(**known)

    @property
    def effective_n_ro(self) -> int:
        return self.n_ro if self.mode in ("plan", "plan+lh") else 0


@dataclass
class RunRecord:
    run_id: int
    problem_id: int
    seed: int
    tasks: list           # [(task_id, success, efficiency, retries)]
    wall_ms: float
    sim_time: float
    cutoff: bool

    @property
    def success_ratio(self) -> float:
        return sum(t[1] for t in self.tasks) / len(self.tasks) if self.tasks else 0.0

    @property
    def retry_ratio(self) -> float:
        return sum(t[3] for t in self.tasks) / len(self.tasks) if self.tasks else 0.0


def derived_seed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


# -- strategies ------------------------------------------------------------------------


def _load_models(config: ExperimentConfig):
    from .learning import LearnedModel, LearnedPolicy, heuristic_from_model

    if config.mode == "learned":
        if not config.method_model:
            raise MissingModel("mode 'learned' needs a method model")
        params = {}
        for p in config.param_models:
            m = LearnedModel.load(p)
            params[m.target] = m
        return LearnedPolicy(LearnedModel.load(config.method_model), params)
    if config.mode == "plan+lh" or config.heuristic == "learned":
        if not config.heur_model:
            raise MissingModel("a learned heuristic needs a heuristic model")
        return heuristic_from_model(LearnedModel.load(config.heur_model))
    return None


def make_strategy(config: ExperimentConfig, loaded=None):
    if config.mode == "reactive":
        return Reactive()
    if config.mode == "learned":
        return Learned(loaded)
    heuristic = loaded if loaded is not None else config.heuristic
    pc = PlanConfig(d_max=config.d_max, n_ro=config.n_ro, C=config.C, utility=config.utility, heuristic=heuristic)
    return Planner(pc)


# -- running ----------------------------------------------------------------------------


def run_one(bundle, problem, seed: int, strategy, config: ExperimentConfig, run_id: int, problem_id: int) -> RunRecord:
    t0 = time.perf_counter()
    try:
        platform = bundle.platform(problem, seed)
        engine = Engine(bundle.domain, platform, strategy, EngineConfig(wall_cutoff=config.wall_cutoff))
        outcomes = engine.run()
        sim_time = platform.now
        cut = engine.cut
    except RaeUpomError:
        outcomes, sim_time = None, 0.0
    wall = (time.perf_counter() - t0) * 1000.0 if config.record_wall else 0.0
    if outcomes is None:  # domain error: every task of the run counts as failed
        tasks = [(i + 1, False, 0.0, 0) for i in range(problem.n_tasks())]
        return RunRecord(run_id, problem_id, seed, tasks, wall, sim_time, False)
    tasks = []
    for o in sorted(outcomes, key=lambda o: o.job_id):
        ok = o.status is JobStatus.SUCCEEDED
        eff = 1.0 / o.cost if ok and o.cost > 0 else 0.0
        tasks.append((o.job_id, ok, eff, o.retries))
    if cut:
        # tasks that had not arrived when the run was cut off count as failed
        for k in range(len(tasks), problem.n_tasks()):
            tasks.append((k + 1, False, 0.0, 0))
    return RunRecord(run_id, problem_id, seed, tasks, wall, sim_time, cut)


def iter_runs(config: ExperimentConfig):
    bundle = build(config.domain)
    loaded = _load_models(config)
    run_id = 0
    for p in range(config.n_problems):
        problem = bundle.gen_problem(random.Random(derived_seed(config.seed, p)), config.difficulty)
        for r in range(config.runs_per_problem):
            seed = derived_seed(config.seed, p, r)
            strategy = make_strategy(config, loaded)
            yield run_one(bundle, problem, seed, strategy, config, run_id, p)
            run_id += 1


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        if math.isinf(v):
            return "inf"
        return repr(v)
    return str(v)


def rows_of(rec: RunRecord, config: ExperimentConfig) -> list[dict]:
    out = []
    for task_id, ok, eff, retries in rec.tasks:
        out.append({
            "run_id": rec.run_id, "problem_id": rec.problem_id, "seed": rec.seed, "domain": config.domain,
            "mode": config.mode, "utility": config.utility, "n_ro": config.effective_n_ro,
            "d_max": config.d_max, "task_id": task_id, "success": ok, "efficiency": eff, "retries": retries,
            "retry_ratio": rec.retry_ratio, "success_ratio": rec.success_ratio, "wall_ms": rec.wall_ms,
            "sim_time": float(rec.sim_time), "cutoff": rec.cutoff,
        })
    return out


def write_csv(rows, path) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(COLUMNS)
            for row in rows:
                w.writerow([_fmt(row[c]) for c in COLUMNS])
    except OSError as e:
        raise IoError(str(e)) from e


def read_csv(path) -> list[dict]:
    conv = {"run_id": int, "problem_id": int, "seed": int, "n_ro": int, "task_id": int, "retries": int,
            "success": lambda x: x == "1", "cutoff": lambda x: x == "1", "efficiency": float,
            "retry_ratio": float, "success_ratio": float, "wall_ms": float, "sim_time": float, "d_max": float}
    with open(path, newline="") as fh:
        return [{k: conv.get(k, str)(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def run_experiment(config: ExperimentConfig) -> tuple[Path, list[dict], list[dict]]:
    """Run the sweep and write its CSV; returns ``(csv path, rows, summary)``."""
    out = Path(config.out) if config.out else default_out_dir() / f"{config.domain}_{config.mode}_{config.seed}.csv"
    rows = []
    for rec in iter_runs(config):
        rows.extend(rows_of(rec, config))
    write_csv(rows, out)
    return out, rows, compute_metrics(rows)


# -- metrics ------------------------------------------------------------------------------


def mean_hw(xs) -> tuple[float, float]:
    """Mean and 95% normal-approximation half-width."""
    xs = np.asarray(list(xs), dtype=float)
    if len(xs) == 0:
        raise EmptyInput("no values")
    m = float(xs.mean())
    if len(xs) < 2:
        return m, 0.0
    return m, float(Z95 * xs.std(ddof=1) / math.sqrt(len(xs)))


def _key(row) -> tuple:
    return (row["domain"], row["mode"], row["utility"], int(row["n_ro"]), float(row["d_max"]))


METRICS = ("efficiency", "success_ratio", "retry_ratio")


def compute_metrics(records) -> list[dict]:
    """One summary row per (domain, mode, utility, n_ro, d_max) group.

    Per-task values: efficiency (0 for a failed task), success (0/1), and
    retries; the retry ratio is retries per task. When a group with
    ``n_ro = 0`` exists in the same domain, every group also gets its
    metrics divided by that baseline (``*_rel`` columns).
    """
    records = list(records)
    if not records:
        raise EmptyInput("no records")
    groups: dict = {}
    for r in records:
        groups.setdefault(_key(r), []).append(r)
    summary = []
    for key in sorted(groups, key=lambda k: (k[0], k[3], k[1], k[2], k[4])):
        rs = groups[key]
        eff = mean_hw(r["efficiency"] if r["success"] else 0.0 for r in rs)
        sr = mean_hw(1.0 if r["success"] else 0.0 for r in rs)
        rr = mean_hw(float(r["retries"]) for r in rs)
        summary.append({
            "domain": key[0], "mode": key[1], "utility": key[2], "n_ro": key[3], "d_max": key[4],
            "n_tasks": len(rs), "n_runs": len({(r.get("run_id"), r.get("problem_id")) for r in rs}),
            "efficiency": eff[0], "efficiency_hw": eff[1],
            "success_ratio": sr[0], "success_ratio_hw": sr[1],
            "retry_ratio": rr[0], "retry_ratio_hw": rr[1],
        })
    rescale(summary)
    return summary


def rescale(summary: list[dict]) -> None:
    """Add ``<metric>_rel`` relative to the ``n_ro = 0`` row of the same domain."""
    base = {}
    for row in summary:
        if row["n_ro"] == 0:
            base.setdefault(row["domain"], row)
    for row in summary:
        b = base.get(row["domain"])
        if b is None:
            continue
        for m in METRICS:
            if row is b:
                row[f"{m}_rel"] = 1.0
            else:
                row[f"{m}_rel"] = row[m] / b[m] if b[m] != 0 else math.nan


def intervals_overlap(a: dict, b: dict, metric: str) -> bool:
    lo_a, hi_a = a[metric] - a[f"{metric}_hw"], a[metric] + a[f"{metric}_hw"]
    lo_b, hi_b = b[metric] - b[f"{metric}_hw"], b[metric] + b[f"{metric}_hw"]
    return not (hi_a < lo_b or hi_b < lo_a)


# -- plots ---------------------------------------------------------------------------------


def _svg_bar(labels, values, errs, title) -> str:
    w, h, pad = 60 * max(1, len(values)) + 80, 260, 40
    top = max([v + e for v, e in zip(values, errs)] + [1e-12])
    scale = (h - 2 * pad) / top
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">',
             f'<text x="{pad}" y="20" font-size="12">{title}</text>',
             f'<line x1="{pad}" y1="{h - pad}" x2="{w - 20}" y2="{h - pad}" stroke="black"/>']
    for i, (lab, v, e) in enumerate(zip(labels, values, errs)):
        x = pad + 10 + 60 * i
        bh = v * scale
        parts.append(f'<rect x="{x}" y="{h - pad - bh:.2f}" width="40" height="{bh:.2f}" fill="steelblue"/>')
        y0, y1 = h - pad - (v - e) * scale, h - pad - (v + e) * scale
        parts.append(f'<line x1="{x + 20}" y1="{y0:.2f}" x2="{x + 20}" y2="{y1:.2f}" stroke="black"/>')
        parts.append(f'<text x="{x}" y="{h - pad + 14}" font-size="10">{lab}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _svg_line(xs, ys, title) -> str:
    w, h, pad = 360, 260, 40
    xlo, xhi = min(xs), max(xs)
    ylo, yhi = min(ys + [0.0]), max(ys + [1e-12])
    sx = (w - 2 * pad) / ((xhi - xlo) or 1)
    sy = (h - 2 * pad) / ((yhi - ylo) or 1)
    pts = " ".join(f"{pad + (x - xlo) * sx:.2f},{h - pad - (y - ylo) * sy:.2f}" for x, y in zip(xs, ys))
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">\n'
            f'<text x="{pad}" y="20" font-size="12">{title}</text>\n'
            f'<polyline points="{pts}" fill="none" stroke="steelblue"/>\n</svg>\n')


def emit_summary_plots(summary: list[dict], path) -> list[Path]:
    """Per metric: a CSV of the plotted points and an SVG chart (line over
    ``n_ro`` when a mode has several values, bars otherwise)."""
    if not summary:
        raise IoError("refusing to write plots for an empty summary")
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise IoError(str(e)) from e
    written = []
    nros = sorted({row["n_ro"] for row in summary})
    for m in METRICS:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["domain", "mode", "utility", "n_ro", "d_max", m, f"{m}_hw", f"{m}_rel"])
        for row in summary:
            w.writerow([row["domain"], row["mode"], row["utility"], row["n_ro"], _fmt(float(row["d_max"])),
                        _fmt(row[m]), _fmt(row[f"{m}_hw"]), _fmt(row.get(f"{m}_rel", math.nan))])
        if len(nros) > 1:
            pts = {}
            for row in summary:
                pts.setdefault(row["n_ro"], row[m])
            svg = _svg_line([float(x) for x in sorted(pts)], [pts[x] for x in sorted(pts)], m)
        else:
            labels = [f"{row['mode']}" for row in summary]
            svg = _svg_bar(labels, [row[m] for row in summary], [row[f"{m}_hw"] for row in summary], m)
        try:
            (out / f"{m}.csv").write_text(buf.getvalue())
            (out / f"{m}.svg").write_text(svg)
        except OSError as e:
            raise IoError(str(e)) from e
        written += [out / f"{m}.csv", out / f"{m}.svg"]
    return written


def write_summary(summary: list[dict], path) -> None:
    if not summary:
        raise IoError("empty summary")
    cols = list(summary[0])
    for row in summary:
        cols += [c for c in row if c not in cols]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in summary:
            w.writerow([_fmt(row.get(c, "")) for c in cols])


__all__ = [
    "COLUMNS", "ExperimentConfig", "RunRecord", "compute_metrics", "emit_summary_plots", "intervals_overlap",
    "read_csv", "run_experiment", "write_csv", "write_summary", "default_out_dir",
]
