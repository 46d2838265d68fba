"""RAE: the agenda loop, Progress, Retry, and Select dispatch."""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Any

from .errors import RaeUpomError
from .ir import ActStep, AssignStep, FailStep, MethodInstance, SubStep, apply_assign, current_step
from .model import Domain, State, TaskInstance, applicable
from .planner import PlanConfig, make_heuristic, plan_select
from .platform import FAILED, RUNNING, Platform, RngStreams
from .stack import EMPTY, Agenda, Job, JobStatus, RefinementStack, advance, push_method, settle

# -- strategies -----------------------------------------------------------------


class Reactive:
    """First untried applicable instance in declaration order."""

    name = "reactive"

    def select(self, engine, xi, tau, sigma, tried, info):
        for m in applicable(xi, tau, engine.domain):
            if m.identity not in tried:
                return m
        return None


@dataclass
class Planner:
    config: PlanConfig
    heuristic_model: Any = None
    name: str = "plan"

    def select(self, engine, xi, tau, sigma, tried, info):
        if not hasattr(self, "_h") or self._h_domain is not engine.domain:
            self._h = make_heuristic(self.config, engine.domain, self.heuristic_model)
            self._h_domain = engine.domain
        return plan_select(xi, tau, sigma, self.config, engine.domain, engine.streams["planner"],
                           tried=tried, heuristic=self._h, info=info)


@dataclass
class Learned:
    """Delegates to a learned policy with ``choose(xi, tau, candidates, rng)``."""

    policy: Any
    name: str = "learned"

    def select(self, engine, xi, tau, sigma, tried, info):
        cands = [m for m in applicable(xi, tau, engine.domain) if m.identity not in tried]
        if not cands:
            return None
        if len(cands) == 1:
            return cands[0]
        return self.policy.choose(xi, tau, cands, engine.streams["policy"])


# -- records ------------------------------------------------------------------------


@dataclass
class JobOutcome:
    job_id: int
    task: TaskInstance
    status: JobStatus
    cost: float
    retries: int
    n_actions: int
    arrival: float
    end_time: float
    cutoff: bool = False

    @property
    def succeeded(self) -> bool:
        return self.status is JobStatus.SUCCEEDED


@dataclass
class SelectEvent:
    """One Select call with its context; ``resolved`` is later set to
    ``"next"`` (the chosen frame finished normally) or ``"retry"``."""

    job_id: int
    frame_id: int | None
    state: State
    task: TaskInstance
    candidates: list
    chosen: MethodInstance | None
    info: dict = field(default_factory=dict)
    resolved: str | None = None


@dataclass
class EngineConfig:
    max_depth: int = 200
    max_steps: int = 1_000_000
    wall_cutoff: float | None = None  # seconds
    record_selects: bool = False


class Engine:
    """Single-threaded RAE control loop over one platform."""

    def __init__(self, domain: Domain, platform: Platform, strategy=None,
                 config: EngineConfig | None = None, streams: RngStreams | None = None):
        self.domain = domain
        self.platform = platform
        self.strategy = strategy if strategy is not None else Reactive()
        self.config = config or EngineConfig()
        self.streams = streams if streams is not None else platform.streams
        self.agenda = Agenda()
        self.outcomes: list[JobOutcome] = []
        self.selects: list[SelectEvent] = []
        self._frame_select: dict[int, SelectEvent] = {}
        self._next_job = 1
        self._next_frame = 1
        self.steps = 0
        self.cut = False

    @property
    def xi(self) -> State:
        return self.platform.xi

    # -- Select ------------------------------------------------------------

    def select(self, tau, sigma, tried, job_id) -> tuple[MethodInstance | None, int]:
        info: dict = {}
        xi = self.xi
        snapshot = xi.copy() if self.config.record_selects else None
        m = self.strategy.select(self, xi, tau, sigma, frozenset(tried), info)
        fid = self._next_frame
        self._next_frame += 1
        if self.config.record_selects:
            cands = info.get("candidates")
            if cands is None:
                cands = [c for c in applicable(snapshot, tau, self.domain) if c.identity not in tried]
            ev = SelectEvent(job_id, fid if m is not None else None, snapshot, tau, cands, m, info)
            self.selects.append(ev)
            if m is not None:
                self._frame_select[fid] = ev
        return m, fid

    def _resolve(self, frames, how):
        for f in frames:
            ev = self._frame_select.pop(f.frame_id, None)
            if ev is not None and ev.resolved is None:
                ev.resolved = how

    # -- jobs ----------------------------------------------------------------

    def start_job(self, tau: TaskInstance):
        jid = self._next_job
        self._next_job += 1
        job = Job(jid, tau, EMPTY, arrival=self.platform.now)
        m, fid = self.select(tau, EMPTY, frozenset(), jid)
        if m is None:
            self._finish(job, JobStatus.FAILED)
            return job
        popped = []
        job.stack = push_method(EMPTY, tau, m, (), self.xi, fid, popped)
        self._resolve(popped, "next")
        self.agenda.add(job)
        if not job.stack:
            self._finish(job, JobStatus.SUCCEEDED)
        return job

    def _finish(self, job: Job, status: JobStatus, cutoff=False):
        job.status = status
        job.end_time = self.platform.now
        self.agenda.remove(job.job_id)
        if job.stack:
            self._resolve(reversed(job.stack.frames), "next" if status is JobStatus.SUCCEEDED else "retry")
        out = JobOutcome(job.job_id, job.task, status, self.platform.job_cost.get(job.job_id, 0.0),
                         job.retries, job.n_actions, job.arrival, job.end_time, cutoff)
        self.outcomes.append(out)

    # -- Retry / Progress ------------------------------------------------------

    def retry(self, job: Job, stack: RefinementStack) -> RefinementStack | None:
        """Pop the failed frame, mark its method tried, and select another for the
        same task in the current state; move one level up when none is left."""
        while stack:
            job.retries += 1
            f = stack.top
            stack = stack.pop()
            self._resolve([f], "retry")
            tried = f.tried | {f.method.identity} if f.method is not None else f.tried
            m, fid = self.select(f.task, stack, tried, job.job_id)
            if m is not None:
                popped = []
                new = push_method(stack, f.task, m, tried, self.xi, fid, popped)
                self._resolve(popped, "next")
                return new
        return None

    def progress(self, job: Job) -> bool:
        """Progress the job's stack by one step. Returns False when it waits on
        a running action."""
        stack = job.stack
        f = stack.top
        xi = self.xi
        popped: list = []
        new: RefinementStack | None
        if f.action_id is not None:
            status = self.platform.poll(f.action_id)
            if status == RUNNING:
                return False
            self.platform.forget(f.action_id)
            job.n_actions += 1
            if status == FAILED:
                new = self.retry(job, stack)
            else:
                new = advance(stack, xi, popped)
        else:
            step = current_step(f.method, f.pc, xi)
            if isinstance(step, AssignStep):
                pc = apply_assign(step, f.pc, xi)
                new = advance(stack.replace_top(f.at(pc)), xi, popped)
            elif isinstance(step, ActStep):
                aid = self.platform.trigger(step.name, step.args, job.job_id)
                new = stack.replace_top(replace(f, action_id=aid))
            elif isinstance(step, SubStep):
                sub = TaskInstance(step.name, step.args, "subtask")
                m = None
                fid = None
                if len(stack) < self.config.max_depth:
                    m, fid = self.select(sub, stack, frozenset(), job.job_id)
                if m is None:
                    new = self.retry(job, stack)
                else:
                    new = push_method(stack, sub, m, (), xi, fid, popped)
            elif isinstance(step, FailStep):
                new = self.retry(job, stack)
            else:
                new = settle(stack, xi, popped)
        self._resolve(popped, "next")
        if new is None:
            job.stack = EMPTY
            self._finish(job, JobStatus.FAILED)
        elif not new:
            job.stack = new
            self._finish(job, JobStatus.SUCCEEDED)
        else:
            job.stack = new
        return True

    # -- main loop --------------------------------------------------------------

    def rae_step(self) -> bool:
        """One outer iteration: admit arrived tasks, then progress every stack once."""
        changed = False
        for tau in self.platform.take_arrivals():
            self.start_job(tau)
            changed = True
        for job in self.agenda.running():
            try:
                changed |= self.progress(job)
            except RaeUpomError:
                job.stack = EMPTY
                self._finish(job, JobStatus.FAILED)
                changed = True
        return changed

    def submit(self, tau: TaskInstance):
        self.platform.arrivals.append(tau)

    def run(self) -> list[JobOutcome]:
        """Run until no job is active and nothing is scheduled."""
        t0 = time.perf_counter()
        self.platform.advance_to(self.platform.now)
        while True:
            self.steps += 1
            over_time = self.config.wall_cutoff is not None and time.perf_counter() - t0 > self.config.wall_cutoff
            if over_time or self.steps > self.config.max_steps:
                self.cut = True
                for job in self.agenda.running():
                    self._finish(job, JobStatus.FAILED, cutoff=True)
                break
            if self.rae_step():
                continue
            if not self.agenda.running() and not self.platform.has_pending() and not self.platform.arrivals:
                break
            t = self.platform.next_due()
            if t is None:
                if self.platform.arrivals:
                    continue
                for job in self.agenda.running():
                    self._finish(job, JobStatus.FAILED)
                break
            self.platform.advance_to(t)
        return self.outcomes
