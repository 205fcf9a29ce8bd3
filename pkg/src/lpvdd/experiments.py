"""Seeded generation of data records and query trajectories.

Shared by the command-line front end and the test suite so that an
experiment is identified by (model, horizon, seed) alone.  Inputs and
scheduling are drawn i.i.d. uniform from their boxes through the named
streams of :mod:`lpvdd.rng`; the recorded trajectory starts from a zero
initial condition, queries from a random one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import LpvIoModel, LpvSsModel
from .prediction import DataRecord
from .rng import stream
from .signals import Trajectory
from .simulation import simulate_io, simulate_ss

__all__ = ["Query", "generate_record", "generate_query"]


def _uniform_traj(rng, box_per_dim, T: int, t_start: int = 1) -> Trajectory:
    # row-major draws so that a longer horizon extends a shorter one sample
    # for sample under the same seed
    dim = len(box_per_dim)
    base = rng.random((T, dim))
    lo = np.array([b[0] for b in box_per_dim], dtype=float)
    hi = np.array([b[1] for b in box_per_dim], dtype=float)
    return Trajectory(t_start, lo + (hi - lo) * base)


def _boxes(box, dim: int):
    if box is None:
        return [(-1.0, 1.0)] * dim
    box = list(box)
    if box and np.isscalar(box[0]):
        return [tuple(box)] * dim
    if len(box) != dim:
        raise ValueError(f"need {dim} boxes, got {len(box)}")
    return [tuple(b) for b in box]


def _simulate(model, u: Trajectory, p: Trajectory, init) -> Trajectory:
    if isinstance(model, LpvIoModel):
        return simulate_io(model, u, p, init)
    if isinstance(model, LpvSsModel):
        return simulate_ss(model, init, u, p).y
    raise TypeError(f"unsupported model type {type(model).__name__}")


def _zero_init(model):
    if isinstance(model, LpvIoModel):
        return np.zeros((model.n_a, model.n_y))
    return np.zeros(model.n_x)


def generate_record(
    model,
    T: int,
    seed: int,
    input_box=None,
    scheduling_box=None,
    provenance: str = "",
) -> DataRecord:
    """Simulate one measured record from zero initial conditions."""
    u = _uniform_traj(stream(seed, "input"), _boxes(input_box, model.n_u), T)
    p = _uniform_traj(stream(seed, "scheduling"), _boxes(scheduling_box, model.n_p), T)
    y = _simulate(model, u, p, _zero_init(model))
    return DataRecord(u=u, p=p, y=y, provenance=provenance or f"seed={seed}, T={T}")


@dataclass(frozen=True)
class Query:
    """A fresh behaviour window split into initial and future parts."""

    u_ini: Trajectory
    p_ini: Trajectory
    y_ini: Trajectory
    u_r: Trajectory
    p_r: Trajectory
    y_r_truth: Trajectory


def generate_query(
    model,
    T_ini: int,
    T_r: int,
    seed: int,
    input_box=None,
    scheduling_box=None,
) -> Query:
    """Simulate a fresh length ``T_ini + T_r`` trajectory and split it.

    The initial condition is drawn uniformly from the input box through the
    ``query_init`` stream, so the query exercises a generic point of the
    behaviour rather than the zero response.
    """
    L = T_ini + T_r
    u = _uniform_traj(stream(seed, "query_input"), _boxes(input_box, model.n_u), L)
    p = _uniform_traj(
        stream(seed, "query_scheduling"), _boxes(scheduling_box, model.n_p), L
    )
    init_rng = stream(seed, "query_init")
    lo, hi = _boxes(input_box, 1)[0]
    init = init_rng.uniform(lo, hi, np.shape(_zero_init(model)))
    y = _simulate(model, u, p, init)
    return Query(
        u_ini=u.restrict(1, T_ini),
        p_ini=p.restrict(1, T_ini),
        y_ini=y.restrict(1, T_ini),
        u_r=u.restrict(T_ini + 1, L),
        p_r=p.restrict(T_ini + 1, L),
        y_r_truth=y.restrict(T_ini + 1, L),
    )
