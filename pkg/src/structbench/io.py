"""Readers and writers for the data, adjacency-matrix and trajectory CSV files.

All writers use LF line endings, no quoting, bare integers and the shortest
round-trip decimal for reals, so ``write(read(f))`` reproduces a canonically
formatted file byte for byte.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .graphs import LabeledGraph


class FormatError(ValueError):
    def __init__(self, path, message):
        self.path = str(path)
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True, eq=False)
class DataMatrix:
    """n x p observations with column labels.

    ``cardinalities`` is set iff the data are categorical, in which case
    ``values`` holds integer levels ``0..card-1``.
    """

    labels: tuple[str, ...]
    values: np.ndarray
    cardinalities: tuple[int, ...] | None = None

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        values = np.asarray(self.values)
        if values.ndim != 2:
            values = values.reshape(-1, len(labels))
        if values.shape[1] != len(labels):
            raise ValueError(f"{values.shape[1]} columns but {len(labels)} labels")
        if self.cardinalities is not None:
            card = tuple(int(c) for c in self.cardinalities)
            if len(card) != len(labels):
                raise ValueError("one cardinality per column required")
            values = values.astype(np.int64)
            if values.size and (values.min() < 0 or np.any(values >= np.array(card))):
                raise ValueError("categorical value outside [0, cardinality-1]")
            object.__setattr__(self, "cardinalities", card)
        else:
            values = values.astype(np.float64)
        values.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    @property
    def categorical(self) -> bool:
        return self.cardinalities is not None

    def __eq__(self, other):
        if not isinstance(other, DataMatrix):
            return NotImplemented
        return (
            self.labels == other.labels
            and self.cardinalities == other.cardinalities
            and self.values.shape == other.values.shape
            and np.array_equal(self.values, other.values)
        )


def format_number(x) -> str:
    """Bare integers; reals as the shortest round-trip decimal."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return repr(float(x))


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(f".{path.name}.tmp{os.getpid()}")
    with open(tmp, "w", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _read_rows(path) -> list[list[str]]:
    with open(path, newline="") as fh:
        text = fh.read()
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    return [line.strip().split(",") for line in lines]


def _parse_int(cell: str):
    try:
        return int(cell)
    except ValueError:
        return None


def read_data(path, discrete: bool | None = None) -> DataMatrix:
    """Read a data CSV.

    With ``discrete=None`` the second row is taken as a cardinality row only
    when it consists of integers >= 2 and every later cell of each column is a
    non-negative integer below that column's value.
    """
    rows = _read_rows(path)
    if not rows:
        raise FormatError(path, "empty file, expected a header row")
    labels = [c.strip() for c in rows[0]]
    p = len(labels)
    body = rows[1:]
    for k, row in enumerate(body, start=2):
        if len(row) != p:
            raise FormatError(path, f"line {k} has {len(row)} cells, expected {p}")

    if discrete is None:
        discrete = _looks_categorical(body)
    if discrete:
        if not body:
            raise FormatError(path, "categorical data needs a cardinality row")
        ints = []
        for k, row in enumerate(body, start=2):
            parsed = [_parse_int(c) for c in row]
            if any(v is None for v in parsed):
                raise FormatError(path, f"line {k}: non-integer cell in categorical data")
            ints.append(parsed)
        card = ints[0]
        values = np.array(ints[1:], dtype=np.int64).reshape(-1, p)
        for j in range(p):
            col = values[:, j]
            if col.size and (col.min() < 0 or col.max() >= card[j]):
                raise FormatError(path, f"column {labels[j]!r} has a value outside [0, {card[j] - 1}]")
        return DataMatrix(tuple(labels), values, tuple(card))

    try:
        values = np.array([[float(c) for c in row] for row in body], dtype=np.float64)
    except ValueError as exc:
        raise FormatError(path, f"non-numeric cell ({exc})") from None
    return DataMatrix(tuple(labels), values.reshape(-1, p))


def _looks_categorical(body: list[list[str]]) -> bool:
    if not body:
        return False
    card = [_parse_int(c) for c in body[0]]
    if any(c is None or c < 2 for c in card):
        return False
    for row in body[1:]:
        for c, cell in zip(card, row):
            v = _parse_int(cell)
            if v is None or v < 0 or v >= c:
                return False
    return True


def write_data(m: DataMatrix, path) -> None:
    lines = [",".join(m.labels)]
    if m.categorical:
        lines.append(",".join(str(c) for c in m.cardinalities))
        for row in m.values:
            lines.append(",".join(str(int(v)) for v in row))
    else:
        for row in m.values:
            lines.append(",".join(repr(float(v)) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def read_adjmat(path) -> LabeledGraph:
    rows = _read_rows(path)
    if not rows:
        raise FormatError(path, "empty file, expected a header row")
    labels = [c.strip() for c in rows[0]]
    p = len(labels)
    body = rows[1:]
    if len(body) != p:
        raise FormatError(path, f"adjacency matrix has {len(body)} rows, expected {p}")
    adj = np.zeros((p, p), dtype=np.int8)
    for i, row in enumerate(body):
        if len(row) != p:
            raise FormatError(path, f"line {i + 2} has {len(row)} cells, expected {p}")
        for j, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                raise FormatError(path, f"line {i + 2}: non-numeric entry {cell!r}") from None
            if v not in (0.0, 1.0):
                raise FormatError(path, f"line {i + 2}: entry {cell!r} is not 0 or 1")
            adj[i, j] = int(v)
    if np.any(np.diag(adj)):
        raise FormatError(path, "nonzero diagonal")
    if len(set(labels)) != p:
        raise FormatError(path, "duplicate labels in header")
    return LabeledGraph(tuple(labels), adj)


def write_adjmat(g: LabeledGraph, path) -> None:
    lines = [",".join(g.labels)]
    lines += [",".join(str(int(v)) for v in row) for row in g.adj]
    _atomic_write(path, "\n".join(lines) + "\n")


def read_weights(path) -> tuple[tuple[str, ...], np.ndarray]:
    """Read a SEM weight matrix laid out like an adjacency matrix.

    Entry (i, j) is the coefficient of node i in the equation of node j.
    """
    rows = _read_rows(path)
    if not rows:
        raise FormatError(path, "empty file")
    labels = tuple(c.strip() for c in rows[0])
    try:
        w = np.array([[float(c) for c in row] for row in rows[1:]], dtype=np.float64)
    except ValueError as exc:
        raise FormatError(path, f"non-numeric cell ({exc})") from None
    if w.shape != (len(labels), len(labels)):
        raise FormatError(path, f"weight matrix has shape {w.shape}, expected square {len(labels)}")
    if np.any(np.diag(w)):
        raise FormatError(path, "nonzero diagonal")
    return labels, w


# --- MCMC trajectories -------------------------------------------------------

@dataclass
class TrajectoryRecord:
    index: int
    score: float
    added: list[tuple[int, int]] = field(default_factory=list)
    removed: list[tuple[int, int]] = field(default_factory=list)


@dataclass
class GraphTrajectory:
    """Compact chain of graphs: the start graph plus accepted moves.

    ``records`` starts with the index-0 row; the two header rows are
    regenerated from ``labels`` on writing. ``directed`` selects ``->`` or
    ``-`` edge tokens. ``length`` is the number of iterations M when known
    (the chain may end on rejected proposals, which are not recorded).
    """

    labels: tuple[str, ...]
    records: list[TrajectoryRecord]
    directed: bool = True
    length: int | None = None

    @property
    def last_index(self) -> int:
        idx = self.records[-1].index
        return max(idx, self.length) if self.length is not None else idx

    def replay(self):
        """Yield ``(index, score, adj)`` after each record; ``adj`` is a fresh copy."""
        p = len(self.labels)
        adj = np.zeros((p, p), dtype=np.int8)
        prev = None
        for rec in self.records:
            if prev is not None and rec.index <= prev:
                raise TrajectoryError(f"index {rec.index} not after {prev}")
            prev = rec.index
            for i, j in rec.removed:
                if not self._present(adj, i, j):
                    raise TrajectoryError(
                        f"record {rec.index} removes absent edge {self._token(i, j)}"
                    )
                self._set(adj, i, j, 0)
            for i, j in rec.added:
                if self._present(adj, i, j):
                    raise TrajectoryError(
                        f"record {rec.index} adds present edge {self._token(i, j)}"
                    )
                self._set(adj, i, j, 1)
            yield rec.index, rec.score, adj.copy()

    def _present(self, adj, i, j):
        if self.directed:
            return bool(adj[i, j])
        return bool(adj[i, j] and adj[j, i])

    def _set(self, adj, i, j, v):
        adj[i, j] = v
        if not self.directed:
            adj[j, i] = v

    def _token(self, i, j):
        sep = "->" if self.directed else "-"
        return f"{self.labels[i]}{sep}{self.labels[j]}"


class TrajectoryError(ValueError):
    pass


_TOKEN = re.compile(r"^(.+?)(->|-)(.+)$")


def _format_edges(labels, edges, directed) -> str:
    sep = "->" if directed else "-"
    return "[" + ";".join(f"{labels[i]}{sep}{labels[j]}" for i, j in edges) + "]"


def _parse_edges(cell: str, path, line: int) -> list[tuple[str, str, bool]]:
    cell = cell.strip()
    if not (cell.startswith("[") and cell.endswith("]")):
        raise FormatError(path, f"line {line}: edge list {cell!r} must be bracketed")
    inner = cell[1:-1]
    if not inner:
        return []
    out = []
    for tok in inner.split(";"):
        m = _TOKEN.match(tok.strip())
        if not m:
            raise FormatError(path, f"line {line}: malformed edge token {tok!r}")
        out.append((m.group(1), m.group(3), m.group(2) == "->"))
    return out


def write_trajectory(traj: GraphTrajectory, path) -> None:
    labels = traj.labels
    header_edges = [(0, j) for j in range(1, len(labels))]
    head = _format_edges(labels, header_edges, traj.directed)
    lines = ["index,score,added,removed", f"-2,0.0,{head},[]", f"-1,0.0,[],{head}"]
    for rec in traj.records:
        lines.append(
            f"{rec.index},{format_number(float(rec.score))},"
            f"{_format_edges(labels, rec.added, traj.directed)},"
            f"{_format_edges(labels, rec.removed, traj.directed)}"
        )
    _atomic_write(path, "\n".join(lines) + "\n")


def read_trajectory(path, labels: Sequence[str] | None = None) -> GraphTrajectory:
    """Parse a trajectory file and validate it by replaying every record.

    The label alphabet comes from the index -2 row. When ``labels`` is given
    (e.g. from the data header) it must agree, and it is required for
    single-node chains where the header row carries no edges.
    """
    rows = _read_rows(path)
    if not rows or [c.strip() for c in rows[0]] != ["index", "score", "added", "removed"]:
        raise FormatError(path, "header must be 'index,score,added,removed'")
    if len(rows) < 4:
        raise FormatError(path, "expected two header rows (-2, -1) and an index-0 row")
    parsed = []
    for k, row in enumerate(rows[1:], start=2):
        if len(row) != 4:
            raise FormatError(path, f"line {k} has {len(row)} cells, expected 4")
        try:
            index = int(row[0])
            score = float(row[1])
        except ValueError:
            raise FormatError(path, f"line {k}: bad index or score") from None
        parsed.append((k, index, score, _parse_edges(row[2], path, k), _parse_edges(row[3], path, k)))

    (_, i0, s0, add0, rem0), (_, i1, s1, add1, rem1) = parsed[0], parsed[1]
    if i0 != -2 or i1 != -1:
        raise FormatError(path, "first two data rows must have indices -2 and -1")
    if rem0 or add1 or s0 != 0.0 or s1 != 0.0:
        raise FormatError(path, "header rows must have score 0 and the edge list in one column only")
    if [(a, b) for a, b, _ in add0] != [(a, b) for a, b, _ in rem1]:
        raise FormatError(path, "rows -2 and -1 must list the same edges")
    if add0:
        first = add0[0][0]
        alphabet = [first] + [b for a, b, _ in add0]
        if any(a != first for a, _, _ in add0):
            raise FormatError(path, "header edges must all start at the first variable")
        directed = add0[0][2]
        if labels is not None and tuple(labels) != tuple(alphabet):
            raise FormatError(path, f"trajectory labels {alphabet} disagree with {list(labels)}")
    else:
        if labels is None:
            raise FormatError(path, "header rows carry no labels; pass labels explicitly")
        alphabet = list(labels)
        directed = True

    index = {name: k for k, name in enumerate(alphabet)}
    records = []
    for k, idx, score, added, removed in parsed[2:]:
        def resolve(edges):
            out = []
            for a, b, d in edges:
                if a not in index or b not in index:
                    raise FormatError(path, f"line {k}: unknown node in edge {a}-{b}")
                if add0 and d != directed:
                    raise FormatError(path, f"line {k}: edge kind differs from header")
                out.append((index[a], index[b]))
            return out
        records.append(TrajectoryRecord(idx, score, resolve(added), resolve(removed)))
    if records[0].index != 0:
        raise FormatError(path, "the third data row must have index 0")
    if records[0].removed:
        raise FormatError(path, "index-0 row must have an empty removed list")
    traj = GraphTrajectory(tuple(alphabet), records, directed=directed)
    try:
        for _ in traj.replay():
            pass
    except TrajectoryError as exc:
        raise FormatError(path, f"replay violation: {exc}") from None
    return traj


def write_weights(labels: Sequence[str], weights: np.ndarray, path) -> None:
    """Inverse of :func:`read_weights`."""
    lines = [",".join(labels)]
    lines += [",".join(format_number(float(v)) for v in row) for row in weights]
    _atomic_write(path, "\n".join(lines) + "\n")
