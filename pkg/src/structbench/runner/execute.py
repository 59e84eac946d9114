"""Run a plan: cache lookup, parallel dispatch, atomic outputs, run report."""

from __future__ import annotations

import multiprocessing
import os
import shutil
import sys
import traceback
import uuid
from collections import Counter
from concurrent.futures import FIRST_COMPLETED, Future, ProcessPoolExecutor, wait
from dataclasses import dataclass, field
from pathlib import Path

from ..learners import FAILED, OK, TIMED_OUT
from .jobs import learner_status, run_job, stage_dir
from .plan import Job, Plan

EXECUTED, CACHED, JOB_FAILED, SKIPPED = "executed", "cached", "job_failed", "skipped"
ENV_RESULTS = "BENCHPRESS_RESULTS"


@dataclass
class JobOutcome:
    key: str
    label: str
    stage: str
    state: str  # executed | cached | job_failed | skipped
    learner_status: str | None = None
    message: str = ""


@dataclass
class RunReport:
    outcomes: dict[str, JobOutcome] = field(default_factory=dict)

    def count(self, state: str) -> int:
        return sum(1 for o in self.outcomes.values() if o.state == state)

    @property
    def executed(self) -> int:
        return self.count(EXECUTED)

    @property
    def cached(self) -> int:
        return self.count(CACHED)

    def learner_counts(self) -> Counter:
        return Counter(o.learner_status for o in self.outcomes.values() if o.learner_status)

    @property
    def failed(self) -> bool:
        """True iff some job crashed, was skipped, or a learner failed (timeouts excluded)."""
        return (self.count(JOB_FAILED) > 0 or self.count(SKIPPED) > 0
                or self.learner_counts().get(FAILED, 0) > 0)

    def summary(self) -> str:
        lines = [f"jobs: {len(self.outcomes)} total, {self.executed} executed, {self.cached} cached, "
                 f"{self.count(JOB_FAILED)} failed, {self.count(SKIPPED)} skipped"]
        lc = self.learner_counts()
        if lc:
            lines.append("learner runs: " + ", ".join(f"{lc.get(s, 0)} {s}" for s in (OK, TIMED_OUT, FAILED)))
        if self.executed == 0 and self.count(JOB_FAILED) == 0 and self.count(SKIPPED) == 0:
            lines.append("all jobs cached")
        for o in self.outcomes.values():
            if o.state in (JOB_FAILED, SKIPPED) or o.learner_status == FAILED:
                lines.append(f"  {o.state if o.state != EXECUTED else 'learner failed'}: {o.label}: {o.message}")
        return "\n".join(lines)


def results_root(cli_value=None) -> Path:
    """--results-dir beats $BENCHPRESS_RESULTS beats ./results."""
    if cli_value:
        return Path(cli_value)
    env = os.environ.get(ENV_RESULTS)
    return Path(env) if env else Path("results")


def _job_dict(job: Job) -> dict:
    return {"stage": job.stage, "module": job.module, "payload": job.payload, "files": job.files,
            "label": job.label}


def is_cached(root: Path, job: Job) -> bool:
    d = stage_dir(root, job.stage, job.key)
    try:
        if (d / "key.json").read_text() != job.canonical + "\n":
            return False
    except OSError:
        return False
    # a failed learner run is retried rather than served from the cache
    return not (job.stage == "learner" and learner_status(root, job.key) == FAILED)


def _execute_one(job_d: dict, key: str, root: str) -> tuple[str, str | None, str]:
    """Worker entry point: build outputs in a temp dir and rename into place."""
    root = Path(root)
    final = stage_dir(root, job_d["stage"], key)
    tmp = final.parent / f".tmp-{key}-{uuid.uuid4().hex[:8]}"
    tmp.mkdir(parents=True)
    try:
        status = run_job(job_d, root, tmp)
        canonical = job_d["canonical"]
        (tmp / "key.json").write_text(canonical + "\n")
        if final.exists():
            shutil.rmtree(final)
        os.rename(tmp, final)
    except Exception as exc:
        shutil.rmtree(tmp, ignore_errors=True)
        detail = "".join(traceback.format_exception_only(type(exc), exc)).strip()
        return JOB_FAILED, None, detail
    return EXECUTED, status if job_d["stage"] == "learner" else None, ""


def _copy_output(root: Path, job: Job) -> None:
    if job.stage != "evaluation":
        return
    dest = root / "output" / job.module / job.payload["setup"]
    if dest.exists():
        shutil.rmtree(dest)
    dest.parent.mkdir(parents=True, exist_ok=True)
    shutil.copytree(stage_dir(root, job.stage, job.key), dest, ignore=shutil.ignore_patterns("key.json"))


def execute(plan: Plan, root, cores: int = 1, force: set[str] | frozenset = frozenset(),
            only_cached: bool = False, log=None) -> RunReport:
    """Run every job of ``plan`` under ``root``.

    ``force`` lists keys that are re-executed even when cached. With
    ``only_cached`` nothing but forced jobs runs; other missing outputs are
    reported as failures.
    """
    if cores < 1:
        raise ValueError("cores must be at least 1")
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    report = RunReport()
    done: dict[str, str] = {}  # key -> state
    pending = list(plan.order)
    running: dict[Future, str] = {}
    pool = ProcessPoolExecutor(cores, mp_context=multiprocessing.get_context("spawn")) if cores > 1 else None

    def record(key: str, state: str, lstatus=None, message=""):
        job = plan.jobs[key]
        done[key] = state
        report.outcomes[key] = JobOutcome(key, job.label, job.stage, state, lstatus, message)
        if state in (EXECUTED, CACHED):
            _copy_output(root, job)
        if log is not None:
            log(f"[{state}] {job.label}" + (f" ({lstatus})" if lstatus and lstatus != OK else ""))

    def dispatch(key: str) -> None:
        job = plan.jobs[key]
        assert all(done.get(d) in (EXECUTED, CACHED) for d in job.deps), f"{job.label} dispatched early"
        d = _job_dict(job)
        d["canonical"] = job.canonical
        if pool is None:
            record(key, *_execute_one(d, key, str(root)))
        else:
            running[pool.submit(_execute_one, d, key, str(root))] = key

    try:
        while pending or running:
            progressed = False
            for key in list(pending):
                job = plan.jobs[key]
                if any(d not in done for d in job.deps):
                    continue
                pending.remove(key)
                progressed = True
                bad = [plan.jobs[d].label for d in job.deps if done[d] in (JOB_FAILED, SKIPPED)]
                if bad:
                    record(key, SKIPPED, message=f"upstream job failed: {bad[0]}")
                elif key not in force and is_cached(root, job):
                    lst = learner_status(root, key) if job.stage == "learner" else None
                    record(key, CACHED, lst)
                elif only_cached and key not in force:
                    record(key, JOB_FAILED, message="no cached result; run the config first")
                else:
                    dispatch(key)
            if running:
                finished, _ = wait(list(running), return_when=FIRST_COMPLETED)
                for fut in finished:
                    key = running.pop(fut)
                    try:
                        record(key, *fut.result())
                    except Exception as exc:  # worker process died
                        record(key, JOB_FAILED, message=f"worker error: {exc}")
            elif not progressed and pending:
                raise RuntimeError("plan has unsatisfiable dependencies")
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
    return report


def print_report(report: RunReport, stream=None) -> None:
    print(report.summary(), file=stream or sys.stdout)
