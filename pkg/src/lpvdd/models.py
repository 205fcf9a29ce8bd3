"""LPV model representations with scheduling-dependent coefficients.

Two representation forms are supported:

* :class:`LpvSsModel`: first-order state recursion
  ``x(k+1) = A(p,k) x(k) + B(p,k) u(k)``, ``y(k) = C(p,k) x(k) + D(p,k) u(k)``
  where each coefficient matrix is a :class:`~lpvdd.coeffs.CoeffMatrix`.

* :class:`LpvIoModel`: input-output recursion with unit leading output
  coefficient,
  ``y(k) + sum_i a_i(p(k-i)) y(k-i) = sum_j b_j(p(k-j)) u(k-j)``,
  where ``a_i``/``b_j`` depend only on scheduling samples at offset ``-i``.

:func:`io_to_kernel` rewrites an IO model as a polynomial-in-shift kernel
acting on the stacked signal ``w = col(u, y)``, which is the algebraic form
the annihilator machinery works with.

Models serialize to a stable JSON schema with coefficient functions stored
term by term; see :func:`model_to_dict`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .coeffs import CoeffMatrix, PolyCoeff
from .errors import InvalidModel, WindowOutOfRange
from .signals import Trajectory

__all__ = [
    "LpvSsModel",
    "LpvIoModel",
    "KernelRep",
    "ValidationReport",
    "validate",
    "example_verhoek",
    "io_to_kernel",
    "random_affine_ss",
    "model_to_dict",
    "model_from_dict",
    "save_model",
    "load_model",
]


@dataclass(frozen=True)
class LpvSsModel:
    """Discrete-time LPV state-space model ``(A, B, C, D)``."""

    A: CoeffMatrix
    B: CoeffMatrix
    C: CoeffMatrix
    D: CoeffMatrix

    @property
    def n_x(self) -> int:
        return self.A.rows

    @property
    def n_u(self) -> int:
        return self.B.cols

    @property
    def n_y(self) -> int:
        return self.C.rows

    @property
    def n_p(self) -> int:
        return self.A.n_p

    @property
    def coeff_window(self) -> tuple[int, int]:
        """Hull of scheduling offsets used by any coefficient (0,0 if none)."""
        wins = [m.window for m in (self.A, self.B, self.C, self.D) if m.window]
        if not wins:
            return (0, 0)
        return (min(w[0] for w in wins), max(w[1] for w in wins))


@dataclass(frozen=True)
class LpvIoModel:
    """Discrete-time LPV input-output model with unit leading coefficient.

    ``a_coeffs[i-1]`` is the ``n_y x n_y`` coefficient of ``y(k-i)`` and may
    depend only on scheduling samples at offset ``-i``; ``b_coeffs`` likewise
    for ``u(k-j)``.
    """

    a_coeffs: tuple[CoeffMatrix, ...]
    b_coeffs: tuple[CoeffMatrix, ...]

    def __post_init__(self):
        object.__setattr__(self, "a_coeffs", tuple(self.a_coeffs))
        object.__setattr__(self, "b_coeffs", tuple(self.b_coeffs))
        if not self.a_coeffs or not self.b_coeffs:
            raise InvalidModel("IO model needs at least one a and one b coefficient")

    @property
    def n_a(self) -> int:
        return len(self.a_coeffs)

    @property
    def n_b(self) -> int:
        return len(self.b_coeffs)

    @property
    def n_y(self) -> int:
        return self.a_coeffs[0].rows

    @property
    def n_u(self) -> int:
        return self.b_coeffs[0].cols

    @property
    def n_p(self) -> int:
        return self.a_coeffs[0].n_p

    @property
    def is_affine(self) -> bool:
        return all(
            e.degree <= 1
            for m in self.a_coeffs + self.b_coeffs
            for row in m.entries
            for e in row
        )


@dataclass(frozen=True)
class KernelRep:
    """Polynomial-in-shift kernel ``R(q) = r_0 + r_1 q + ... + r_n q^n``.

    A trajectory pair ``(w, p)`` belongs to the represented behaviour when
    ``sum_s r_s(p, k) w(k+s) = 0`` at every admissible ``k``.
    """

    coeffs: tuple[CoeffMatrix, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        if not self.coeffs:
            raise InvalidModel("kernel needs at least one coefficient")
        if self.coeffs[-1].is_zero and len(self.coeffs) > 1:
            raise InvalidModel("leading kernel coefficient is identically zero")

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def n_w(self) -> int:
        return self.coeffs[0].cols

    @property
    def n_r(self) -> int:
        return self.coeffs[0].rows

    def admissible_range(self, w: Trajectory, p: Trajectory) -> tuple[int, int]:
        """Times ``k`` at which the residual is fully defined on the data."""
        k_lo = w.t_start
        k_hi = w.t_end - self.order
        for s, r in enumerate(self.coeffs):
            win = r.window
            if win is None:
                continue
            k_lo = max(k_lo, p.t_start - win[0])
            k_hi = min(k_hi, p.t_end - win[1])
        return (k_lo, k_hi)

    def residual(self, w: Trajectory, p: Trajectory) -> np.ndarray:
        """Residual ``(R(q) . p) w`` at every admissible time, stacked rowwise."""
        k_lo, k_hi = self.admissible_range(w, p)
        if k_hi < k_lo:
            raise WindowOutOfRange("no admissible evaluation times for kernel residual")
        out = np.zeros((k_hi - k_lo + 1, self.n_r))
        for idx, k in enumerate(range(k_lo, k_hi + 1)):
            acc = np.zeros(self.n_r)
            for s, r in enumerate(self.coeffs):
                acc += r.eval(p, k) @ w.value(k + s)
            out[idx] = acc
        return out


@dataclass(frozen=True)
class ValidationReport:
    """List of invariant violations; empty means the model is valid."""

    issues: tuple[str, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.issues

    def __bool__(self) -> bool:
        return self.ok


def _offsets_used(m: CoeffMatrix) -> set[int]:
    return {
        off
        for row in m.entries
        for e in row
        for _, mono in e.terms
        for _, off, _ in mono
    }


def validate(model) -> ValidationReport:
    """Check every structural invariant; returns a report, never raises."""
    issues: list[str] = []
    if isinstance(model, LpvSsModel):
        A, B, C, D = model.A, model.B, model.C, model.D
        if A.rows != A.cols:
            issues.append(f"A must be square, got {A.shape}")
        if B.rows != A.rows:
            issues.append(f"B has {B.rows} rows, expected n_x={A.rows}")
        if C.cols != A.rows:
            issues.append(f"C has {C.cols} cols, expected n_x={A.rows}")
        if D.rows != C.rows or D.cols != B.cols:
            issues.append(f"D shape {D.shape} does not match (n_y, n_u)")
        n_ps = {M.n_p for M in (A, B, C, D)}
        if len(n_ps) > 1:
            issues.append(f"coefficient matrices disagree on n_p: {sorted(n_ps)}")
    elif isinstance(model, LpvIoModel):
        n_y, n_u, n_p = model.n_y, model.n_u, model.n_p
        if model.n_a < model.n_b:
            issues.append(f"n_a={model.n_a} < n_b={model.n_b}")
        if model.n_b < 1:
            issues.append("n_b must be >= 1")
        for name, seq, cols in (("a", model.a_coeffs, n_y), ("b", model.b_coeffs, n_u)):
            for i, m in enumerate(seq, start=1):
                if m.rows != n_y or m.cols != cols:
                    issues.append(
                        f"{name}_{i} shape {m.shape}, expected ({n_y}, {cols})"
                    )
                if m.n_p != n_p:
                    issues.append(f"{name}_{i} has n_p={m.n_p}, expected {n_p}")
                bad = _offsets_used(m) - {-i}
                if bad:
                    issues.append(
                        f"{name}_{i} depends on offsets {sorted(bad)}, only -{i} allowed"
                    )
        if model.a_coeffs[-1].is_zero:
            issues.append(f"leading coefficient a_{model.n_a} is identically zero")
        if model.b_coeffs[-1].is_zero:
            issues.append(f"leading coefficient b_{model.n_b} is identically zero")
    else:
        issues.append(f"unknown model type {type(model).__name__}")
    return ValidationReport(tuple(issues))


def example_verhoek() -> LpvIoModel:
    """Built-in SISO demonstration model with affine scheduling dependence.

    Second-order recursion with two scheduling channels; each lag-``i``
    coefficient is affine in the two scheduling components at offset ``-i``.
    """
    a1 = CoeffMatrix.affine([[1.0]], ([[-0.5]], [[-0.1]]), offset=-1)
    a2 = CoeffMatrix.affine([[0.5]], ([[-0.7]], [[-0.1]]), offset=-2)
    b1 = CoeffMatrix.affine([[0.5]], ([[-0.4]], [[0.01]]), offset=-1)
    b2 = CoeffMatrix.affine([[0.2]], ([[-0.3]], [[-0.2]]), offset=-2)
    return LpvIoModel(a_coeffs=(a1, a2), b_coeffs=(b1, b2))


def io_to_kernel(model: LpvIoModel) -> KernelRep:
    """Kernel ``R(xi) = [-R_u(xi) | R_y(xi)]`` acting on ``w = col(u, y)``.

    ``R_y(xi) = I xi^{n_a} + sum_i a~_i xi^{n_a - i}`` and
    ``R_u(xi) = sum_j b~_j xi^{n_a - j}`` with every coefficient function
    forward-shifted by ``n_a`` so that the kernel residual evaluated at ``k``
    reproduces the IO recursion at ``k + n_a``.
    """
    report = validate(model)
    # a zero leading a_i/b_i only degrades the nominal order, the kernel is
    # still well-defined through its identity leading block
    fatal = [i for i in report.issues if "leading coefficient" not in i]
    if fatal:
        raise InvalidModel("invalid IO model: " + "; ".join(fatal))
    n_a, n_b = model.n_a, model.n_b
    n_u, n_y, n_p = model.n_u, model.n_y, model.n_p
    coeffs = []
    for s in range(n_a + 1):
        i = n_a - s  # lag index contributing at shift power s
        if i == 0:
            y_part = CoeffMatrix.identity(n_y, n_p)
        else:
            y_part = model.a_coeffs[i - 1].shift(n_a)
        if 1 <= i <= n_b:
            u_part = (-model.b_coeffs[i - 1]).shift(n_a)
        else:
            u_part = CoeffMatrix.zeros(n_y, n_u, n_p)
        coeffs.append(CoeffMatrix.hstack([u_part, y_part]))
    return KernelRep(tuple(coeffs))


def random_affine_ss(
    rng: np.random.Generator,
    n_x: int,
    n_u: int = 1,
    n_y: int = 1,
    n_p: int = 1,
    spectral_scale: float = 0.7,
) -> LpvSsModel:
    """Random dense state-space model with affine offset-0 dependence.

    The state matrix family is scaled so that short-horizon simulations stay
    numerically tame; generic draws are structurally observable/reachable.
    """

    def affine_mat(rows, cols, scale=1.0):
        const = rng.uniform(-1, 1, (rows, cols)) * scale
        linear = [rng.uniform(-1, 1, (rows, cols)) * scale for _ in range(n_p)]
        return CoeffMatrix.affine(const, linear)

    a_scale = spectral_scale / (n_x * (1 + n_p)) ** 0.5
    return LpvSsModel(
        A=affine_mat(n_x, n_x, a_scale),
        B=affine_mat(n_x, n_u),
        C=affine_mat(n_y, n_x),
        D=affine_mat(n_y, n_u),
    )


# -- JSON schema ---------------------------------------------------------------
#
# { "kind": "ss" | "io", dims..., matrices as arrays of entries }
# entry = list of terms; term = {"coeff": number,
#                                "vars": [{"comp": j, "offset": d, "power": m}]}


def _poly_to_entry(c: PolyCoeff) -> list:
    return [
        {
            "coeff": coeff,
            "vars": [
                {"comp": comp, "offset": off, "power": pw} for comp, off, pw in mono
            ],
        }
        for coeff, mono in c.terms
    ]


def _entry_to_poly(entry, n_p: int) -> PolyCoeff:
    terms = []
    for term in entry:
        mono = tuple(
            (int(v["comp"]), int(v["offset"]), int(v["power"]))
            for v in term.get("vars", [])
        )
        terms.append((float(term["coeff"]), mono))
    return PolyCoeff(n_p, tuple(terms))


def _matrix_to_lists(m: CoeffMatrix) -> list:
    return [[_poly_to_entry(e) for e in row] for row in m.entries]


def _matrix_from_lists(data, n_p: int) -> CoeffMatrix:
    return CoeffMatrix([[_entry_to_poly(e, n_p) for e in row] for row in data])


def model_to_dict(model) -> dict:
    if isinstance(model, LpvSsModel):
        return {
            "kind": "ss",
            "n_x": model.n_x,
            "n_u": model.n_u,
            "n_y": model.n_y,
            "n_p": model.n_p,
            "A": _matrix_to_lists(model.A),
            "B": _matrix_to_lists(model.B),
            "C": _matrix_to_lists(model.C),
            "D": _matrix_to_lists(model.D),
        }
    if isinstance(model, LpvIoModel):
        return {
            "kind": "io",
            "n_u": model.n_u,
            "n_y": model.n_y,
            "n_p": model.n_p,
            "n_a": model.n_a,
            "n_b": model.n_b,
            "a_coeffs": [_matrix_to_lists(m) for m in model.a_coeffs],
            "b_coeffs": [_matrix_to_lists(m) for m in model.b_coeffs],
        }
    raise InvalidModel(f"cannot serialize {type(model).__name__}")


def model_from_dict(data: dict):
    kind = data.get("kind")
    n_p = int(data["n_p"])
    if kind == "ss":
        return LpvSsModel(
            A=_matrix_from_lists(data["A"], n_p),
            B=_matrix_from_lists(data["B"], n_p),
            C=_matrix_from_lists(data["C"], n_p),
            D=_matrix_from_lists(data["D"], n_p),
        )
    if kind == "io":
        return LpvIoModel(
            a_coeffs=tuple(_matrix_from_lists(m, n_p) for m in data["a_coeffs"]),
            b_coeffs=tuple(_matrix_from_lists(m, n_p) for m in data["b_coeffs"]),
        )
    raise InvalidModel(f"unknown model kind {kind!r}")


def save_model(path, model) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path):
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
