"""Finite vector-valued trajectories and the matrix constructions over them.

A :class:`Trajectory` is a finite sequence of real vectors indexed by an
explicit integer interval ``[t_start, t_end]``.  Keeping the absolute time
index on the value (instead of an implicit 1-based convention) makes the
window bookkeeping of initial/future splits checkable instead of silent.

On top of trajectories this module provides the standard data-driven
constructions: stacking (``vec``), concatenation, block Hankel matrices,
Kronecker-extended signals ``col(w, p (x) w)`` and the block-diagonal
scheduling matrix used to impose Kronecker consistency constraints.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    IntervalMismatch,
    InvalidShape,
    NonAdjacentIntervals,
)

__all__ = [
    "Trajectory",
    "HankelMatrix",
    "vec",
    "concat",
    "hankel",
    "hankel_max",
    "kron_extend",
    "kron_signal",
    "sched_block_diag",
    "trajectory_to_csv",
    "trajectory_from_csv",
    "read_trajectory_csv",
    "write_trajectory_csv",
]


@dataclass(frozen=True)
class Trajectory:
    """A finite signal ``w_[t_start, t_end]`` with one real vector per step.

    ``samples`` has shape ``(length, dim)``.  ``dim == 0`` is allowed and
    stands for an empty (e.g. scheduling-free) channel set.  Instances are
    immutable; the sample array is stored read-only.
    """

    t_start: int
    samples: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise InvalidShape(f"samples must be (T, dim) with T >= 1, got {arr.shape}")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "t_start", int(self.t_start))

    @classmethod
    def from_values(cls, values, t_start: int = 1) -> "Trajectory":
        """Build from a list of scalars or vectors starting at ``t_start``."""
        return cls(t_start, np.asarray(values, dtype=float))

    @property
    def length(self) -> int:
        return self.samples.shape[0]

    @property
    def dim(self) -> int:
        return self.samples.shape[1]

    @property
    def t_end(self) -> int:
        return self.t_start + self.length - 1

    @property
    def interval(self) -> tuple[int, int]:
        return (self.t_start, self.t_end)

    def value(self, k: int) -> np.ndarray:
        """Sample at absolute time ``k``."""
        if not self.covers(k, k):
            raise IntervalMismatch(
                f"time {k} outside trajectory interval [{self.t_start}, {self.t_end}]"
            )
        return self.samples[k - self.t_start]

    def covers(self, t1: int, t2: int) -> bool:
        return self.t_start <= t1 and t2 <= self.t_end

    def restrict(self, t1: int, t2: int) -> "Trajectory":
        """Restriction to ``[t1, t2]`` (must lie inside the interval)."""
        if not (t1 <= t2 and self.covers(t1, t2)):
            raise IntervalMismatch(
                f"[{t1}, {t2}] not inside [{self.t_start}, {self.t_end}]"
            )
        return Trajectory(t1, self.samples[t1 - self.t_start : t2 - self.t_start + 1])

    def rebase(self, t_start: int) -> "Trajectory":
        """Same samples, re-anchored to start at ``t_start``."""
        return Trajectory(t_start, self.samples)


@dataclass(frozen=True)
class HankelMatrix:
    """Block Hankel matrix of a trajectory.

    ``data`` has shape ``(block_rows * block_dim, cols)``; column ``j`` stacks
    the samples ``j, j+1, ..., j+block_rows-1`` of the source (0-based from
    the trajectory start).
    """

    data: np.ndarray
    block_rows: int
    cols: int
    block_dim: int

    def block_row(self, i: int) -> np.ndarray:
        """Rows belonging to window position ``i`` (0-based)."""
        return self.data[i * self.block_dim : (i + 1) * self.block_dim]


def vec(w: Trajectory) -> np.ndarray:
    """Stacked column ``[w(t_start); ...; w(t_end)]`` of length ``dim * length``."""
    return w.samples.reshape(-1).copy()


def concat(w1: Trajectory, w2: Trajectory) -> Trajectory:
    """Concatenation ``w1 ^ w2``; ``w2`` must start right after ``w1`` ends."""
    if w1.dim != w2.dim:
        raise DimensionMismatch(f"dims differ: {w1.dim} vs {w2.dim}")
    if w2.t_start != w1.t_end + 1:
        raise NonAdjacentIntervals(
            f"intervals [{w1.t_start},{w1.t_end}] and [{w2.t_start},{w2.t_end}] do not abut"
        )
    return Trajectory(w1.t_start, np.vstack([w1.samples, w2.samples]))


def hankel(w: Trajectory, t1: int, t2: int | None = None) -> HankelMatrix:
    """Block Hankel matrix with ``t1`` block rows and ``t2`` columns.

    Entry block ``(i, j)`` (1-based) is the sample at window offset
    ``i + j - 2`` from the trajectory start.  ``t2`` defaults to the maximal
    number of columns ``T - t1 + 1``.
    """
    T = w.length
    if t1 < 1:
        raise InvalidShape(f"t1 must be positive, got {t1}")
    max_cols = T - t1 + 1
    if max_cols < 1:
        raise InvalidShape(f"t1={t1} too large for trajectory of length {T}")
    if t2 is None:
        t2 = max_cols
    if t2 < 1 or t2 > max_cols:
        raise InvalidShape(f"t2={t2} outside [1, {max_cols}] for T={T}, t1={t1}")
    d = w.dim
    data = np.empty((t1 * d, t2))
    for j in range(t2):
        data[:, j] = w.samples[j : j + t1].reshape(-1)
    return HankelMatrix(data, block_rows=t1, cols=t2, block_dim=d)


def hankel_max(w: Trajectory, t1: int) -> HankelMatrix:
    """Hankel matrix with the maximal number of columns ``T - t1 + 1``."""
    return hankel(w, t1)


def kron_signal(w: Trajectory, p: Trajectory) -> Trajectory:
    """Per-sample Kronecker product signal ``p(k) (x) w(k)``.

    The product is scheduling-major: component ``(j, i)`` of the output is
    ``p_j(k) * w_i(k)`` stored at index ``j * dim(w) + i``.
    """
    if w.interval != p.interval:
        raise IntervalMismatch(f"intervals differ: {w.interval} vs {p.interval}")
    prod = np.einsum("tj,ti->tji", p.samples, w.samples).reshape(w.length, -1)
    return Trajectory(w.t_start, prod)


def kron_extend(w: Trajectory, p: Trajectory) -> Trajectory:
    """Extended signal with per-sample value ``col(w(k), p(k) (x) w(k))``.

    The output dimension is ``(1 + dim(p)) * dim(w)``.
    """
    pw = kron_signal(w, p)
    return Trajectory(w.t_start, np.hstack([w.samples, pw.samples]))


def sched_block_diag(p_bar: Trajectory, n: int) -> np.ndarray:
    """Block-diagonal matrix with k-th diagonal block ``p_bar(k) (x) I_n``.

    Shape is ``(L * n_p * n, L * n)`` for a length-``L`` scheduling window.
    Multiplying the stacked window ``vec(w)`` of an ``n``-dimensional signal
    gives exactly ``vec(p_bar (x) w)``.
    """
    L, n_p = p_bar.length, p_bar.dim
    out = np.zeros((L * n_p * n, L * n))
    eye = np.eye(n)
    for k in range(L):
        block = np.kron(p_bar.samples[k][:, None], eye)
        out[k * n_p * n : (k + 1) * n_p * n, k * n : (k + 1) * n] = block
    return out


# -- CSV interchange ---------------------------------------------------------
#
# Format: header row "t,ch1,ch2,...", one row per time step, '.' decimal,
# UTF-8, no thousands separators.  Floats are written with shortest
# round-trip formatting so that identical trajectories produce identical
# bytes.


def trajectory_to_csv(w: Trajectory) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t"] + [f"ch{i + 1}" for i in range(w.dim)])
    for k in range(w.length):
        writer.writerow([w.t_start + k] + [repr(float(v)) for v in w.samples[k]])
    return buf.getvalue()


def trajectory_from_csv(text: str) -> Trajectory:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise InvalidShape("empty CSV") from None
    if not header or header[0] != "t":
        raise InvalidShape(f"expected header starting with 't', got {header!r}")
    dim = len(header) - 1
    times: list[int] = []
    rows: list[list[float]] = []
    for row in reader:
        if not row:
            continue
        if len(row) != dim + 1:
            raise InvalidShape(f"row has {len(row)} fields, expected {dim + 1}")
        times.append(int(row[0]))
        rows.append([float(v) for v in row[1:]])
    if not times:
        raise InvalidShape("CSV contains no samples")
    for a, b in zip(times, times[1:]):
        if b != a + 1:
            raise InvalidShape(f"non-consecutive time steps {a} -> {b}")
    samples = np.array(rows, dtype=float).reshape(len(times), dim)
    return Trajectory(times[0], samples)


def write_trajectory_csv(path, w: Trajectory) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(trajectory_to_csv(w))


def read_trajectory_csv(path) -> Trajectory:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return trajectory_from_csv(fh.read())
