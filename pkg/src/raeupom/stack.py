"""Refinement stacks and the stack-level stepping shared by acting and planning."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator

from .ir import END, PC, MethodInstance, next_pc, start_pc
from .model import TaskInstance


@dataclass(frozen=True)
class Frame:
    """``(task, method, pc, tried)``; ``tried`` holds method-instance identities.

    ``action_id`` is set while the step at ``pc`` is a triggered action.
    ``frame_id`` lets callers follow one refinement through the stack's life.
    """

    task: TaskInstance
    method: MethodInstance | None
    pc: PC = END
    tried: frozenset = frozenset()
    action_id: int | None = None
    frame_id: int = 0

    def signature(self) -> tuple:
        sig = self.__dict__.get("_sig")
        if sig is not None:
            return sig
        m = self.method
        sig = (
            self.task.name,
            self.task.args,
            None if m is None else m.identity,
            self.pc.path,
            self.pc.loops,
            self.pc.locals,
            self.tried,
        )
        object.__setattr__(self, "_sig", sig)
        return sig

    def at(self, pc: PC) -> "Frame":
        """Copy resting on ``pc`` with no pending action."""
        return Frame(self.task, self.method, pc, self.tried, None, self.frame_id)


class RefinementStack:
    """Immutable LIFO of frames; index ``-1`` is the top."""

    __slots__ = ("frames",)

    def __init__(self, frames=()):
        self.frames = tuple(frames)

    def __len__(self):
        return len(self.frames)

    def __bool__(self):
        return bool(self.frames)

    def __iter__(self) -> Iterator[Frame]:
        return iter(self.frames)

    def __eq__(self, other):
        return isinstance(other, RefinementStack) and self.frames == other.frames

    def __hash__(self):
        return hash(self.frames)

    @property
    def top(self) -> Frame:
        if not self.frames:
            raise IndexError("top of empty stack")
        return self.frames[-1]

    def push(self, frame: Frame) -> "RefinementStack":
        return RefinementStack(self.frames + (frame,))

    def pop(self) -> "RefinementStack":
        if not self.frames:
            raise IndexError("pop from empty stack")
        return RefinementStack(self.frames[:-1])

    def replace_top(self, frame: Frame) -> "RefinementStack":
        return RefinementStack(self.frames[:-1] + (frame,))

    def signature(self) -> tuple:
        return tuple(f.signature() for f in self.frames)

    @property
    def root(self) -> TaskInstance:
        return self.frames[0].task

    def __repr__(self):
        inner = ", ".join(f"({f.task}, {f.method}, {f.pc.path}, {len(f.tried)})" for f in self.frames)
        return f"<{inner}>"


EMPTY = RefinementStack()


def advance(stack: RefinementStack, s, popped: list | None = None) -> RefinementStack:
    """Move past the current step of the top frame.

    Frames whose body is exhausted are popped (appended to ``popped`` when
    given) and the parent, which rests on the finished subtask, is advanced
    in turn. Returns the empty stack when the root task is finished.
    """
    while stack:
        f = stack.top
        pc = next_pc(f.method, f.pc, s)
        if not pc.at_end:
            return stack.replace_top(f.at(pc))
        if popped is not None:
            popped.append(f)
        stack = stack.pop()
    return stack


def settle(stack: RefinementStack, s, popped: list | None = None) -> RefinementStack:
    """Pop a freshly pushed frame whose body has no executable step."""
    if stack and stack.top.method is not None and stack.top.pc.at_end:
        if popped is not None:
            popped.append(stack.top)
        return advance(stack.pop(), s, popped) if len(stack) > 1 else stack.pop()
    return stack


def push_method(stack, task, m: MethodInstance, tried, s, frame_id=0, popped=None) -> RefinementStack:
    """Push ``(task, m, first step, tried)`` and settle empty bodies."""
    f = Frame(task, m, start_pc(m, s), frozenset(tried), None, frame_id)
    return settle(stack.push(f), s, popped)


class JobStatus(str, Enum):
    RUNNING = "running"
    SUCCEEDED = "succeeded"
    FAILED = "failed"


@dataclass
class Job:
    job_id: int
    task: TaskInstance
    stack: RefinementStack
    arrival: float = 0.0
    status: JobStatus = JobStatus.RUNNING
    cost: float = 0.0
    retries: int = 0
    n_actions: int = 0
    end_time: float | None = None


@dataclass
class Agenda:
    jobs: dict = field(default_factory=dict)

    def add(self, job: Job):
        self.jobs[job.job_id] = job

    def running(self) -> list[Job]:
        return [j for _, j in sorted(self.jobs.items()) if j.status is JobStatus.RUNNING]

    def remove(self, job_id):
        self.jobs.pop(job_id, None)

    def __len__(self):
        return len(self.jobs)

    def __bool__(self):
        return bool(self.jobs)
