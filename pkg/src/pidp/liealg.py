"""Vector fields, Lie brackets, and the scaled family X1..X4.

The scaled family clears the positive denominator Delta(theta):

    X1 = Delta f    X2 = Delta h    X3 = [X1, X2]    X4 = [X2, X3]

with the bracket convention [X, Y] = DY.X - DX.Y. X1 and X2 carry analytic
Jacobians; brackets get central-difference Jacobians with step
max(1e-6, 1e-6 ||z||).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from pidp import kernels
from pidp.dynamics import Params, as_state
from pidp.errors import DepthExceeded, NonFiniteEvaluation, SingularOnGamma

__all__ = [
    "AlternateFamilyValues",
    "BracketWord",
    "MAX_WORD_DEPTH",
    "NotationComponents",
    "VectorField",
    "alternate_family",
    "closed_form_check",
    "derived_field",
    "evaluate_word",
    "jacobian_fd",
    "lie_bracket",
    "notation_components",
    "scaled_family",
    "word_from_list",
    "word_str",
]

#: Default cap on bracket-word depth (the family itself needs depth 2).
MAX_WORD_DEPTH = 4


@dataclass(frozen=True, eq=False)
class VectorField:
    """A labeled vector field with value and Jacobian evaluators."""

    label: str
    evaluator: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]

    def __call__(self, z) -> np.ndarray:
        return np.asarray(self.evaluator(np.asarray(z, dtype=float)), dtype=float)

    def jac(self, z) -> np.ndarray:
        return np.asarray(self.jacobian(np.asarray(z, dtype=float)), dtype=float)


def _fd_matrix(x: VectorField, z: np.ndarray, h: float) -> np.ndarray:
    cols = []
    for j in range(4):
        zp = z.copy()
        zm = z.copy()
        zp[j] += h
        zm[j] -= h
        vp = x(zp)
        vm = x(zm)
        if not (np.all(np.isfinite(vp)) and np.all(np.isfinite(vm))):
            raise NonFiniteEvaluation(
                f"field {x.label!r} returned non-finite values near {z.tolist()}"
            )
        cols.append((vp - vm) / (2.0 * h))
    return np.column_stack(cols)


def jacobian_fd(
    x: VectorField, z, step: float | None = None, richardson: bool = False
) -> np.ndarray:
    """Central-difference Jacobian of ``x`` at ``z``.

    ``step`` defaults to max(1e-6, 1e-6 ||z||). With ``richardson`` one
    extrapolation level combines steps h and h/2.
    """
    arr = np.asarray(z, dtype=float)
    if step is None:
        step = kernels.fd_step(arr)
    if not step > 0.0:
        raise ValueError(f"step must be positive, got {step}")
    coarse = _fd_matrix(x, arr, step)
    if not richardson:
        return coarse
    fine = _fd_matrix(x, arr, 0.5 * step)
    return (4.0 * fine - coarse) / 3.0


def lie_bracket(x: VectorField, y: VectorField, z) -> np.ndarray:
    """[x, y](z) = Dy(z) x(z) - Dx(z) y(z)."""
    arr = np.asarray(z, dtype=float)
    return y.jac(arr) @ x(arr) - x.jac(arr) @ y(arr)


#: Step scale for Jacobians of derived (bracket) fields. Their values carry
#: finite-difference noise of roughly 1e-9 absolute, so the usual 1e-6 step
#: would amplify it to 5e-4 per Jacobian entry; a 1e-4 step balances that
#: noise against truncation, leaving errors near 1e-5.
NESTED_FD_SCALE = 1e-4


def _nested_step(z: np.ndarray) -> float:
    return NESTED_FD_SCALE * max(1.0, float(np.max(np.abs(z))))


def derived_field(label: str, x: VectorField, y: VectorField) -> VectorField:
    """The bracket [x, y] as a field with a finite-difference Jacobian."""

    def evaluator(z: np.ndarray) -> np.ndarray:
        return lie_bracket(x, y, z)

    def jacobian(z: np.ndarray) -> np.ndarray:
        arr = np.asarray(z, dtype=float)
        return jacobian_fd(field, arr, step=_nested_step(arr))

    field = VectorField(label=label, evaluator=evaluator, jacobian=jacobian)
    return field


def scaled_family(p: Params) -> tuple[VectorField, VectorField, VectorField, VectorField]:
    """The four fields X1..X4 at parameters ``p``.

    Values and the analytic X1/X2 Jacobians come from the kernel backend;
    X3 and X4 use central-difference Jacobians.
    """
    m1, m2, r1, r2, g = p.as_tuple()

    def make_value(k: int) -> Callable[[np.ndarray], np.ndarray]:
        def evaluator(z: np.ndarray) -> np.ndarray:
            return kernels.field_value(m1, m2, r1, r2, g, k, z)

        return evaluator

    jacobians = {
        1: lambda z: kernels.x1_jacobian(m1, m2, r1, r2, g, z),
        2: lambda z: kernels.x2_jacobian(m1, m2, r1, r2, g, z),
        3: lambda z: kernels.x3_jacobian(m1, m2, r1, r2, g, z),
        4: lambda z: kernels.x4_jacobian(m1, m2, r1, r2, g, z),
    }
    return tuple(
        VectorField(label=f"X{k}", evaluator=make_value(k), jacobian=jacobians[k])
        for k in (1, 2, 3, 4)
    )


@dataclass(frozen=True)
class BracketWord:
    """A bracket word: a leaf generator index or a node [left, right]."""

    leaf: int | None = None
    left: "BracketWord | None" = None
    right: "BracketWord | None" = None

    def __post_init__(self) -> None:
        if self.leaf is not None:
            if self.left is not None or self.right is not None:
                raise ValueError("leaf word cannot have children")
            if self.leaf < 1:
                raise ValueError(f"leaf index must be >= 1, got {self.leaf}")
        elif self.left is None or self.right is None:
            raise ValueError("node word needs both children")

    @property
    def is_leaf(self) -> bool:
        return self.leaf is not None

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())

    def to_list(self):
        if self.is_leaf:
            return self.leaf
        return [self.left.to_list(), self.right.to_list()]


def word_from_list(obj) -> BracketWord:
    """Parse the nested-array form, e.g. [2, [1, 2]] means [X2, [X1, X2]]."""
    if isinstance(obj, int) and not isinstance(obj, bool):
        return BracketWord(leaf=obj)
    if isinstance(obj, (list, tuple)) and len(obj) == 2:
        return BracketWord(left=word_from_list(obj[0]), right=word_from_list(obj[1]))
    raise ValueError(f"not a bracket word: {obj!r}")


def word_str(word: BracketWord) -> str:
    """Compact serialized form, e.g. '[2,[1,2]]'."""
    return json.dumps(word.to_list(), separators=(",", ":"))


def _word_field(
    word: BracketWord,
    family: Sequence[VectorField],
    cache: dict[BracketWord, VectorField],
) -> VectorField:
    hit = cache.get(word)
    if hit is not None:
        return hit
    if word.is_leaf:
        if word.leaf > len(family):
            raise ValueError(
                f"leaf index {word.leaf} exceeds family size {len(family)}"
            )
        field = family[word.leaf - 1]
    else:
        left = _word_field(word.left, family, cache)
        right = _word_field(word.right, family, cache)
        field = derived_field(f"[{left.label},{right.label}]", left, right)
    cache[word] = field
    return field


def evaluate_word(
    word: BracketWord,
    family: Sequence[VectorField],
    z,
    max_depth: int = MAX_WORD_DEPTH,
) -> np.ndarray:
    """Evaluate a bracket word over ``family`` at ``z``.

    Nodes become derived fields with finite-difference Jacobians; depth is
    capped at ``max_depth``.
    """
    d = word.depth()
    if d > max_depth:
        raise DepthExceeded(f"word depth {d} exceeds maximum {max_depth}")
    field = _word_field(word, family, {})
    return field(np.asarray(z, dtype=float))


@dataclass(frozen=True)
class NotationComponents:
    """Component 2-vectors of the scaled fields.

    (Omega, a) = Delta f and (0, b) = Delta h hold exactly;
    OmegaBar = -Delta b. aBar and bBar follow the printed component
    formulas (see ``closed_form_check`` for their role).
    """

    Omega: np.ndarray
    a: np.ndarray
    b: np.ndarray
    OmegaBar: np.ndarray
    aBar: np.ndarray
    bBar: np.ndarray


def _component_pieces(p: Params, arr: np.ndarray):
    m1, m2, r1, r2, g = p.as_tuple()
    dlt = kernels.delta(m1, m2, r1, r2, g, arr[0], arr[1])
    x1 = kernels.field_value(m1, m2, r1, r2, g, 1, arr)
    x2 = kernels.field_value(m1, m2, r1, r2, g, 2, arr)
    j1 = kernels.x1_jacobian(m1, m2, r1, r2, g, arr)
    j2 = kernels.x2_jacobian(m1, m2, r1, r2, g, arr)
    dthb = j2[2:4, 0:2]
    doma = j1[2:4, 2:4]
    return dlt, x1, x2, dthb, doma


def notation_components(p: Params, z) -> NotationComponents:
    """Evaluate Omega, a, b and the barred quantities at ``z``."""
    arr = as_state(z)
    m1, m2, r1, r2, g = p.as_tuple()
    dlt, x1, x2, dthb, doma = _component_pieces(p, arr)
    omega = x1[0:2]
    a = x1[2:4]
    b = x2[2:4]
    omega_bar = -dlt * b
    a_bar = dthb.T @ omega - doma.T @ b
    s = np.sin(arr[0] - arr[1])
    c = np.cos(arr[0] - arr[1])
    # G = sum_k b_k Hess_omega(a_k); both Hessians are diagonal in omega
    g11 = b[0] * (-2.0 * m2 * r1 * r2 * s * c) + b[1] * (2.0 * r1 * r1 * (m1 + m2) * s)
    g22 = b[0] * (-2.0 * m2 * r2 * r2 * s) + b[1] * (2.0 * m2 * r1 * r2 * s * c)
    gmat = np.array([[g11, 0.0], [0.0, g22]])
    b_bar = (2.0 * dlt * dthb - gmat).T @ b
    return NotationComponents(
        Omega=omega, a=a, b=b, OmegaBar=omega_bar, aBar=a_bar, bBar=b_bar
    )


def closed_form_check(p: Params, z) -> dict:
    """Compare numeric brackets against the printed closed forms at ``z``.

    The theta-components admit an unambiguous closed form (OmegaBar for X3,
    zero for X4) and their discrepancies should sit at roundoff. The printed
    omega-forms are evaluated literally and reported without a verdict: their
    compositional shape is ambiguous, so the numeric bracket is authoritative.
    """
    arr = as_state(z)
    m1, m2, r1, r2, g = p.as_tuple()
    comp = notation_components(p, arr)
    x3 = kernels.field_value(m1, m2, r1, r2, g, 3, arr)
    x4 = kernels.field_value(m1, m2, r1, r2, g, 4, arr)
    _, _, _, dthb, _ = _component_pieces(p, arr)

    x3_theta_closed = comp.OmegaBar
    x3_omega_printed = dthb.T @ comp.aBar
    x4_omega_printed = dthb.T @ comp.bBar

    # FD-vs-analytic self-consistency for the bracket defining X3
    x1f, x2f, _, _ = scaled_family(p)
    x1_fd = VectorField("X1fd", x1f.evaluator, lambda zz: jacobian_fd(x1f, zz))
    x2_fd = VectorField("X2fd", x2f.evaluator, lambda zz: jacobian_fd(x2f, zz))
    x3_fd = lie_bracket(x1_fd, x2_fd, arr)

    return {
        "point": arr,
        "x3_numeric": x3,
        "x4_numeric": x4,
        "x3_theta_closed": x3_theta_closed,
        "x3_theta_diff": float(np.max(np.abs(x3[0:2] - x3_theta_closed))),
        "x4_theta_diff": float(np.max(np.abs(x4[0:2]))),
        "x3_omega_printed": x3_omega_printed,
        "x3_omega_diff": float(np.max(np.abs(x3[2:4] - x3_omega_printed))),
        "x4_omega_printed": x4_omega_printed,
        "x4_omega_diff": float(np.max(np.abs(x4[2:4] - x4_omega_printed))),
        "fd_vs_analytic": float(np.max(np.abs(x3_fd - x3))),
    }


@dataclass(frozen=True)
class AlternateFamilyValues:
    """Values of {Y1, X2, Y3, X4} at a point outside Gamma.

    Y1 = X1 - (gamma2 X2 + gamma4 X4) and Y3 = X3 - (gamma2t X2 + gamma4t X4)
    cancel the omega-components, leaving the theta-components untouched.
    """

    y1: np.ndarray
    x2: np.ndarray
    y3: np.ndarray
    x4: np.ndarray
    gamma2: float
    gamma4: float
    gamma2t: float
    gamma4t: float


#: Relative threshold declaring the omega-system singular (point on Gamma).
GAMMA_SINGULAR_TOL = 1e-8


def alternate_family(p: Params, z, tol: float = GAMMA_SINGULAR_TOL) -> AlternateFamilyValues:
    """Solve for Y1, Y3 at ``z``; raises SingularOnGamma on the Gamma stratum."""
    arr = as_state(z)
    m1, m2, r1, r2, g = p.as_tuple()
    x1 = kernels.field_value(m1, m2, r1, r2, g, 1, arr)
    x2 = kernels.field_value(m1, m2, r1, r2, g, 2, arr)
    x3 = kernels.field_value(m1, m2, r1, r2, g, 3, arr)
    x4 = kernels.field_value(m1, m2, r1, r2, g, 4, arr)
    b1, b2 = x2[2], x2[3]
    w1, w2 = x4[2], x4[3]
    det = b1 * w2 - b2 * w1
    scale = max(b1 * b1 + b2 * b2, w1 * w1 + w2 * w2)
    if abs(det) <= tol * scale:
        raise SingularOnGamma(
            f"(X2, X4) omega-components are linearly dependent at {arr.tolist()}: "
            f"|det| = {abs(det):.3e} <= {tol:g} * {scale:.3e}"
        )

    def solve(target: np.ndarray) -> tuple[float, float]:
        c2 = (target[0] * w2 - w1 * target[1]) / det
        c4 = (b1 * target[1] - target[0] * b2) / det
        return float(c2), float(c4)

    gamma2, gamma4 = solve(x1[2:4])
    gamma2t, gamma4t = solve(x3[2:4])
    y1 = x1 - (gamma2 * x2 + gamma4 * x4)
    y3 = x3 - (gamma2t * x2 + gamma4t * x4)
    return AlternateFamilyValues(
        y1=y1,
        x2=x2,
        y3=y3,
        x4=x4,
        gamma2=gamma2,
        gamma4=gamma4,
        gamma2t=gamma2t,
        gamma4t=gamma4t,
    )
