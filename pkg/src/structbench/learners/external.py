"""Child-process learners.

A plugin is a command template. Placeholders ``{data}``, ``{adjmat}``,
``{time}``, ``{ntests}`` and ``{replicate}`` are replaced by file paths and
the replicate seed, and every other parameter of the learner object is
available under its own name. The plugin reads the data CSV and writes three
files: the estimated adjacency matrix, the wall time as one real, and the
number of independence tests as an integer or the literal ``None``.
"""

from __future__ import annotations

import json
import os
import shlex
import signal
import subprocess
import threading
import time
from pathlib import Path

from ..io import FormatError, read_adjmat, read_data
from .common import FAILED, OK, TIMED_OUT, LearnerResult, LearnerSpec

_RESERVED = {"id", "command", "timeout"}


def _render(value) -> str:
    if isinstance(value, str):
        return value
    return json.dumps(value)


def build_command(spec: LearnerSpec, paths: dict[str, str], replicate) -> list[str]:
    template = spec.params.get("command")
    if not template:
        raise ValueError(f"learner {spec.id!r} ({spec.algorithm}) has no command configured")
    values = {k: _render(v) for k, v in spec.params.items() if k not in _RESERVED}
    values.update(paths)
    values["replicate"] = str(replicate)
    try:
        return [tok.format_map(values) for tok in shlex.split(template)]
    except KeyError as exc:
        raise ValueError(f"command of {spec.id!r} uses unknown placeholder {exc}") from None


def parse_time(path: Path) -> float:
    text = path.read_text().strip()
    try:
        return float(text)
    except ValueError:
        raise FormatError(path, f"time file must hold one real, got {text[:40]!r}") from None


def parse_ntests(path: Path) -> int | None:
    text = path.read_text().strip()
    if text == "None":
        return None
    try:
        value = float(text)
    except ValueError:
        raise FormatError(path, f"ntests must be an integer or None, got {text[:40]!r}") from None
    if value != int(value) or value < 0:
        raise FormatError(path, f"ntests must be a non-negative integer, got {text!r}")
    return int(value)


def run_external(spec: LearnerSpec, data_path, workdir, replicate=0,
                 cancel: threading.Event | None = None, poll: float = 0.05) -> LearnerResult:
    """Run a plugin on ``data_path`` and parse its three output files.

    Nonzero exits, missing or malformed outputs become ``failed`` results.
    Setting ``cancel`` kills the plugin's whole process group.
    """
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    paths = {
        "data": str(Path(data_path).resolve()),
        "adjmat": str((workdir / "adjmat.csv").resolve()),
        "time": str((workdir / "time.txt").resolve()),
        "ntests": str((workdir / "ntests.txt").resolve()),
    }
    start = time.perf_counter()
    try:
        argv = build_command(spec, paths, replicate)
    except ValueError as exc:
        return LearnerResult(None, 0.0, None, FAILED, str(exc))

    stderr_path = workdir / "stderr.txt"
    with open(stderr_path, "wb") as err:
        try:
            proc = subprocess.Popen(argv, stdout=subprocess.DEVNULL, stderr=err,
                                    cwd=workdir, start_new_session=True)
        except OSError as exc:
            return LearnerResult(None, 0.0, None, FAILED, f"cannot start {argv[0]!r}: {exc}")
        while True:
            try:
                code = proc.wait(timeout=poll)
                break
            except subprocess.TimeoutExpired:
                if cancel is not None and cancel.is_set():
                    _kill(proc)
                    return LearnerResult(None, time.perf_counter() - start, None, TIMED_OUT,
                                         "plugin killed at timeout")
    elapsed = time.perf_counter() - start
    if code != 0:
        tail = stderr_path.read_text(errors="replace")[-500:]
        return LearnerResult(None, elapsed, None, FAILED, f"plugin exited with status {code}: {tail}")
    try:
        graph = read_adjmat(paths["adjmat"])
        wall = parse_time(Path(paths["time"]))
        ntests = parse_ntests(Path(paths["ntests"]))
    except FileNotFoundError as exc:
        return LearnerResult(None, elapsed, None, FAILED, f"missing output file {exc.filename}")
    except (FormatError, ValueError) as exc:
        return LearnerResult(None, elapsed, None, FAILED, f"unparsable output: {exc}")
    labels = read_data(data_path).labels
    if set(graph.labels) != set(labels):
        return LearnerResult(None, elapsed, None, FAILED,
                             f"{paths['adjmat']}: labels {list(graph.labels)} do not match data")
    return LearnerResult(graph, wall, ntests, OK)


def _kill(proc: subprocess.Popen) -> None:
    try:
        os.killpg(proc.pid, signal.SIGKILL)
    except ProcessLookupError:
        pass
    proc.wait()
