"""RAE behaviour checked on scripted Toy traces."""
from raeupom.actor import Engine, EngineConfig, Reactive
from raeupom.domains import build
from raeupom.ir import act, seq
from raeupom.model import Branch, Domain, TaskInstance
from raeupom.platform import Platform
from raeupom.stack import JobStatus


class Prefer:
    """Pick the named method first, then fall back to declaration order."""

    name = "prefer"

    def __init__(self, first):
        self.first = first
        self.base = Reactive()

    def select(self, engine, xi, tau, sigma, tried, info):
        from raeupom.model import applicable

        for m in applicable(xi, tau, engine.domain):
            if m.name == self.first and m.identity not in tried:
                return m
        return self.base.select(engine, xi, tau, sigma, tried, info)


def toy_engine(strategy, script):
    d = build("toy").domain
    p = Platform(d, d.new_state(), scripted_outcomes=script)
    return Engine(d, p, strategy, EngineConfig(record_selects=True))


def test_running_action_leaves_stack_unchanged():
    e = toy_engine(Reactive(), {})
    job = e.start_job(TaskInstance("t"))
    assert e.progress(job)            # triggers a2
    before = job.stack
    assert job.stack.top.action_id is not None
    assert e.progress(job) is False   # a2 still running
    assert job.stack is before
    e.platform.advance(2.0)
    assert e.progress(job)
    assert job.status is JobStatus.SUCCEEDED


def test_failed_action_triggers_retry_with_other_method():
    e = toy_engine(Prefer("mB"), {"a1": [1]})
    e.submit(TaskInstance("t"))
    [out] = e.run()
    assert out.succeeded
    assert out.retries == 1
    assert [s.chosen.name for s in e.selects] == ["mB", "mA"]
    assert e.selects[0].resolved == "retry" and e.selects[1].resolved == "next"
    assert out.cost == 3.0


def test_retried_instance_never_reappears_in_frame():
    e = toy_engine(Prefer("mB"), {"a1": [1]})
    e.submit(TaskInstance("t"))
    e.run()
    second = e.selects[1]
    assert [m.name for m in second.candidates] == ["mA"]


def two_flaky():
    d = Domain("flaky")
    d.declare_task("t")
    d.declare_action("a", (), [Branch(0.5), Branch(0.5, failed=True)])
    d.declare_method("m1", "t", body=seq(act("a")))
    d.declare_method("m2", "t", body=seq(act("a")))
    return d


def test_exhausted_tried_set_at_root_is_retrial_failure():
    d = two_flaky()
    p = Platform(d, d.new_state(), scripted_outcomes={"a": [1, 1]})
    e = Engine(d, p, Reactive(), EngineConfig(record_selects=True))
    e.submit(TaskInstance("t"))
    [out] = e.run()
    assert out.status is JobStatus.FAILED
    assert out.retries == 2
    assert [s.chosen.name if s.chosen else None for s in e.selects] == ["m1", "m2", None]
    assert e.selects[-1].candidates == []


def test_subtask_failure_retries_in_parent():
    d = build("toy2").domain
    p = Platform(d, d.new_state(), scripted_outcomes={"a1": [1]})
    e = Engine(d, p, Prefer("mB"), EngineConfig(record_selects=True))
    e.submit(TaskInstance("t2"))
    [out] = e.run()
    assert out.succeeded
    assert [s.chosen.name for s in e.selects] == ["mC", "mB", "mA"]
    assert out.cost == 1.0 + 2.0 + 2.0


def test_no_applicable_method_fails_job():
    d = Domain("empty")
    d.declare_task("t")
    e = Engine(d, Platform(d, d.new_state()))
    e.submit(TaskInstance("t"))
    [out] = e.run()
    assert out.status is JobStatus.FAILED and out.n_actions == 0


def test_concurrent_jobs_each_get_an_outcome():
    e = toy_engine(Reactive(), {})
    for _ in range(3):
        e.submit(TaskInstance("t"))
    outs = e.run()
    assert sorted(o.job_id for o in outs) == [1, 2, 3]
    assert all(o.succeeded and o.cost == 2.0 for o in outs)
    assert e.platform.now == 2.0
