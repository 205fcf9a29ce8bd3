"""Structural observability/reachability, minimality, and excitation checks.

"Structural" rank properties hold in the generic (almost-everywhere) sense
over scheduling trajectories.  They are decided here by randomized sampling:
the coefficient matrix function is evaluated at a batch of independently
drawn scheduling windows and the numeric rank is inspected at each draw.  A
generic full-rank property fails only on a measure-zero set of draws, so the
verdict demands success on every trial; a single structured failure is worth
surfacing rather than averaging away.

Persistence of excitation is checked for the shifted-affine dependency
class: the scheduling-extended input ``col(u, p (x) u)`` must produce a
Hankel matrix of full row rank ``(1 + n_p) n_u L``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .coeffs import CoeffMatrix
from .errors import InvalidShape
from .models import LpvSsModel
from .rng import stream
from .signals import Trajectory, hankel, kron_extend

__all__ = [
    "StructuralRankReport",
    "PeReport",
    "MinimalityReport",
    "obsv_matrix",
    "reach_matrix",
    "structural_rank",
    "is_struct_observable",
    "is_struct_reachable",
    "minimality_report",
    "check_pe",
    "numeric_rank",
]


def numeric_rank(matrix: np.ndarray, tol: float = 1e-9) -> tuple[int, np.ndarray]:
    """Rank from singular values above ``tol * sigma_max``; returns (rank, svals)."""
    if matrix.size == 0:
        return 0, np.zeros(0)
    s = np.linalg.svd(matrix, compute_uv=False)
    if s[0] == 0.0:
        return 0, s
    return int(np.sum(s > tol * s[0])), s


def obsv_matrix(model: LpvSsModel, n: int) -> CoeffMatrix:
    """n-step observability matrix function: block rows ``o_1, ..., o_n``.

    ``o_1 = C`` and ``o_{i+1}`` is the forward-shifted ``o_i`` composed with
    the state map, so block ``i`` evaluated at ``k`` reads the output map at
    ``k + i - 1`` back through the state transitions.
    """
    if n < 1:
        raise InvalidShape(f"n must be >= 1, got {n}")
    blocks = [model.C]
    for _ in range(n - 1):
        blocks.append(blocks[-1].shift(1) @ model.A)
    return CoeffMatrix.vstack(blocks)


def reach_matrix(model: LpvSsModel, n: int) -> CoeffMatrix:
    """n-step reachability matrix function: block columns ``r_1, ..., r_n``.

    ``r_1 = B`` and ``r_{i+1}`` composes the state map with the
    backward-shifted ``r_i``.
    """
    if n < 1:
        raise InvalidShape(f"n must be >= 1, got {n}")
    blocks = [model.B]
    for _ in range(n - 1):
        blocks.append(model.A @ blocks[-1].shift(-1))
    return CoeffMatrix.hstack(blocks)


@dataclass(frozen=True)
class StructuralRankReport:
    """Outcome of a randomized functional-rank test."""

    tested_rank: int
    required_rank: int
    num_trials: int
    pass_count: int
    tolerance: float
    verdict: bool

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def structural_rank(
    M: CoeffMatrix,
    required: int,
    trials: int = 20,
    tol: float = 1e-9,
    seed: int = 0,
    box: tuple[float, float] = (-1.0, 1.0),
) -> StructuralRankReport:
    """Randomized check that ``M`` has rank >= ``required`` generically.

    Evaluates ``M`` at ``k = 0`` for ``trials`` scheduling windows drawn
    i.i.d. uniform on ``box`` (per component, per needed offset).  The
    verdict requires the numeric rank to reach ``required`` on every trial.
    """
    if trials < 1:
        raise InvalidShape(f"trials must be >= 1, got {trials}")
    lo, hi = M.window if M.window is not None else (0, 0)
    rng = stream(seed, "trials")
    passes = 0
    best = 0
    for _ in range(trials):
        p = Trajectory(lo, rng.uniform(box[0], box[1], (hi - lo + 1, M.n_p)))
        rank, _ = numeric_rank(M.eval(p, 0), tol)
        best = max(best, rank)
        if rank >= required:
            passes += 1
    return StructuralRankReport(
        tested_rank=best,
        required_rank=required,
        num_trials=trials,
        pass_count=passes,
        tolerance=tol,
        verdict=passes == trials,
    )


def is_struct_observable(
    model: LpvSsModel, trials: int = 20, tol: float = 1e-9, seed: int = 0
) -> StructuralRankReport:
    """Full column rank of the ``n_x``-step observability matrix, generically."""
    return structural_rank(
        obsv_matrix(model, model.n_x), model.n_x, trials=trials, tol=tol, seed=seed
    )


def is_struct_reachable(
    model: LpvSsModel, trials: int = 20, tol: float = 1e-9, seed: int = 0
) -> StructuralRankReport:
    """Full row rank of the ``n_x``-step reachability matrix, generically."""
    return structural_rank(
        reach_matrix(model, model.n_x), model.n_x, trials=trials, tol=tol, seed=seed
    )


@dataclass(frozen=True)
class MinimalityReport:
    """Conjunction of structural observability and reachability.

    State-trimness is taken as implied for the non-autonomous reachable
    class, so reachability serves as the practical surrogate.
    """

    observable: StructuralRankReport
    reachable: StructuralRankReport

    @property
    def minimal(self) -> bool:
        return self.observable.verdict and self.reachable.verdict

    def to_json(self) -> str:
        return json.dumps(
            {
                "observable": asdict(self.observable),
                "reachable": asdict(self.reachable),
                "minimal": self.minimal,
            },
            sort_keys=True,
        )


def minimality_report(
    model: LpvSsModel, trials: int = 20, tol: float = 1e-9, seed: int = 0
) -> MinimalityReport:
    return MinimalityReport(
        observable=is_struct_observable(model, trials, tol, seed),
        reachable=is_struct_reachable(model, trials, tol, seed),
    )


@dataclass(frozen=True)
class PeReport:
    """Excitation check for the shifted-affine dependency class.

    ``extended_input_rank`` is the rank of the Hankel matrix of
    ``col(u, p (x) u)`` at depth ``order_L``; the verdict compares it to the
    full row count ``required = (1 + n_p) n_u L``.  When outputs and a model
    order hypothesis are supplied, ``hankel_rank`` additionally reports the
    rank of the Hankel matrix of the extended full signal
    ``col(w, p (x) w)``, ``w = col(u, y)``.
    """

    order_L: int
    extended_input_rank: int
    required: int
    hankel_rank: int | None
    verdict: bool
    singular_values: tuple[float, ...]

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def check_pe(
    u: Trajectory,
    p: Trajectory,
    L: int,
    n_x_hypothesis: int | None = None,
    y: Trajectory | None = None,
    tol: float = 1e-9,
) -> PeReport:
    """Persistence-of-excitation rank check of order ``L`` for ``(u, p)``."""
    if u.interval != p.interval:
        raise InvalidShape(f"u and p intervals differ: {u.interval} vs {p.interval}")
    if u.length < L:
        raise InvalidShape(f"data length {u.length} shorter than order L={L}")
    ext_in = kron_extend(u, p)
    rank_in, svals = numeric_rank(hankel(ext_in, L).data, tol)
    required = (1 + p.dim) * u.dim * L
    hankel_rank = None
    if y is not None:
        if y.interval != u.interval:
            raise InvalidShape(f"y interval {y.interval} differs from u {u.interval}")
        w = Trajectory(u.t_start, np.hstack([u.samples, y.samples]))
        hankel_rank, _ = numeric_rank(hankel(kron_extend(w, p), L).data, tol)
    return PeReport(
        order_L=L,
        extended_input_rank=rank_in,
        required=required,
        hankel_rank=hankel_rank,
        verdict=rank_in == required,
        singular_values=tuple(float(s) for s in svals),
    )
