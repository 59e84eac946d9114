from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from ..graphs import LabeledGraph
from ..io import GraphTrajectory

OK = "ok"
TIMED_OUT = "timed_out"
FAILED = "failed"


class Cancelled(Exception):
    """Raised inside a native learner when its cancellation flag is set."""


def check_cancel(cancel: threading.Event | None) -> None:
    if cancel is not None and cancel.is_set():
        raise Cancelled()


@dataclass
class LearnerSpec:
    id: str
    algorithm: str
    params: dict[str, Any] = field(default_factory=dict)
    timeout: float | None = None


@dataclass
class LearnerResult:
    estimate: LabeledGraph | GraphTrajectory | None
    wall_time: float
    ntests: int | None
    status: str = OK
    diagnostic: str = ""

    def __post_init__(self):
        if (self.estimate is not None) != (self.status == OK):
            raise ValueError("an estimate is present iff the status is ok")


def with_timeout(timeout: float | None, thunk: Callable[[threading.Event], LearnerResult],
                 grace: float = 0.5) -> LearnerResult:
    """Run ``thunk(cancel)`` under a wall-clock deadline.

    On expiry the cancel flag is set and a ``timed_out`` result is returned
    after at most ``grace`` more seconds; native learners poll the flag once
    per iteration and external plugins are killed by their runner.
    """
    cancel = threading.Event()
    start = time.perf_counter()
    if timeout is None:
        return _guarded(thunk, cancel, start)
    if timeout <= 0:
        raise ValueError("timeout must be positive")
    box: list[LearnerResult] = []
    worker = threading.Thread(target=lambda: box.append(_guarded(thunk, cancel, start)), daemon=True)
    worker.start()
    worker.join(timeout)
    if worker.is_alive() or (box and box[0].status == TIMED_OUT):
        cancel.set()
        worker.join(grace)
        return LearnerResult(None, time.perf_counter() - start, None, TIMED_OUT,
                             f"exceeded timeout of {timeout:g} s")
    return box[0]


def _guarded(thunk, cancel, start) -> LearnerResult:
    try:
        return thunk(cancel)
    except Cancelled:
        return LearnerResult(None, time.perf_counter() - start, None, TIMED_OUT, "cancelled")
    except Exception as exc:  # a learner crash is a result, not a runner crash
        return LearnerResult(None, time.perf_counter() - start, None, FAILED,
                             f"{type(exc).__name__}: {exc}")


def reachability(adj: np.ndarray) -> np.ndarray:
    """Reflexive-transitive closure of the directed adjacency matrix."""
    p = adj.shape[0]
    r = (np.eye(p, dtype=np.int64) + adj.astype(np.int64)) > 0
    while True:
        nxt = (r.astype(np.int64) @ r.astype(np.int64)) > 0
        if np.array_equal(nxt, r):
            return r
        r = nxt
