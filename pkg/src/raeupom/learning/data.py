"""Training data: run RAE with UPOM offline on random root tasks and keep the
Select decisions as records."""
from __future__ import annotations

import random
from dataclasses import replace

from ..actor import Engine, EngineConfig, Planner
from ..domains.base import DomainBundle, ProblemInstance
from ..planner import PlanConfig
from ..stack import JobStatus
from .encoding import HeurRec, MethodRec, ParamRec, state_dict

MODES = ("lm1", "lm2", "mi", "lh")


def single_task(problem: ProblemInstance) -> ProblemInstance:
    """The problem reduced to its earliest root task, arriving at time 0."""
    t0 = min(problem.tasks)
    first = problem.tasks[t0][0]
    return replace(problem, tasks={0: [first]})


def records_from_run(engine: Engine, mode: str) -> list:
    """Records of one finished run. Only Select calls that faced a real choice
    (two or more candidates) produce records."""
    mode = mode.lower()
    ok_jobs = {o.job_id for o in engine.outcomes if o.status is JobStatus.SUCCEEDED}
    out = []
    for ev in engine.selects:
        if ev.chosen is None or len(ev.candidates) < 2:
            continue
        s = state_dict(ev.state)
        if mode == "lm2":
            out.append(MethodRec(s, ev.task, ev.chosen.name))
        elif mode == "lm1":
            if ev.resolved == "next" and ev.job_id in ok_jobs:
                out.append(MethodRec(s, ev.task, ev.chosen.name))
        elif mode == "mi":
            t = ev.chosen.template
            for (pname, _), value in zip(t.extra, ev.chosen.args[len(t.params):]):
                out.append(ParamRec(s, ev.task, ev.chosen.name, pname, value))
        elif mode == "lh":
            for m, q, n in ev.info.get("q", []):
                if n > 0:
                    out.append(HeurRec(s, ev.task, m.name, float(q)))
        else:
            raise ValueError(f"unknown record mode {mode!r}")
    return out


def generate_records(bundle: DomainBundle, n_tasks: int, config: PlanConfig | None = None, mode: str = "lm2",
                     rng: random.Random | int = 0, strategy=None, difficulty: float = 1.0) -> list:
    """Run RAE on ``n_tasks`` random single-root-task problems and collect
    records for one learning procedure (``lm1``, ``lm2``, ``mi``, ``lh``).

    ``strategy`` defaults to UPOM with ``config``; any strategy object works,
    which lets tests force particular choices.
    """
    if isinstance(rng, int):
        rng = random.Random(rng)
    config = config or PlanConfig(n_ro=50)
    out = []
    for _ in range(n_tasks):
        problem = single_task(bundle.gen_problem(rng, difficulty))
        seed = rng.randrange(2**31)
        platform = bundle.platform(problem, seed)
        strat = strategy if strategy is not None else Planner(config)
        engine = Engine(bundle.domain, platform, strat, EngineConfig(record_selects=True))
        engine.run()
        out.extend(records_from_run(engine, mode))
    return out
