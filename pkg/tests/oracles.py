"""Independent symbolic oracle for the pendulum dynamics and bracket family.

Rebuilds the equations of motion from the Lagrangian with the generalized
force m_i u on the right-hand side,

    dL/dtheta_i - d/dt dL/domega_i = m_i u,

solves for the accelerations with sympy, and lambdifies everything for
numerical comparison. Also constructs the displayed component forms and the
scaled family X1..X4 symbolically, with exact Jacobians, as an oracle for
the numeric bracket engine. All callables take (m1, m2, r1, r2, g) plus the
four state components, fully general in the parameters.
"""

from __future__ import annotations

import functools

import numpy as np
import sympy as sp

_STATE = ("theta1", "theta2", "omega1", "omega2")


@functools.lru_cache(maxsize=1)
def build() -> dict:
    """Symbolic system pieces and lambdified evaluators (built once)."""
    t = sp.Symbol("t")
    m1, m2, r1, r2, g, u = sp.symbols("m1 m2 r1 r2 g u", positive=True)
    th1t = sp.Function("th1")(t)
    th2t = sp.Function("th2")(t)
    w1t = th1t.diff(t)
    w2t = th2t.diff(t)

    kinetic = (
        sp.Rational(1, 2) * (m1 + m2) * r1**2 * w1t**2
        + m2 * r1 * r2 * w1t * w2t * sp.cos(th1t - th2t)
        + sp.Rational(1, 2) * m2 * r2**2 * w2t**2
    )
    potential = g * ((m1 + m2) * r1 * sp.cos(th1t) + m2 * r2 * sp.cos(th2t))
    lagrangian = kinetic - potential

    equations = [
        sp.Eq(lagrangian.diff(th1t) - lagrangian.diff(w1t).diff(t), m1 * u),
        sp.Eq(lagrangian.diff(th2t) - lagrangian.diff(w2t).diff(t), m2 * u),
    ]
    accel = [th1t.diff(t, 2), th2t.diff(t, 2)]
    solution = sp.solve(equations, accel, simplify=False, rational=False)

    th1, th2, w1, w2 = sp.symbols(" ".join(_STATE))

    def down(expr):
        expr = expr.subs({w1t: w1, w2t: w2}, simultaneous=True)
        return expr.subs({th1t: th1, th2t: th2}, simultaneous=True)

    alpha = [down(solution[a]) for a in accel]
    f_el = sp.Matrix([w1, w2, alpha[0].subs(u, 0), alpha[1].subs(u, 0)])
    h_el = sp.Matrix([0, 0, alpha[0].diff(u), alpha[1].diff(u)])
    kin_state = down(kinetic)
    pot_state = down(potential)

    s = sp.sin(th1 - th2)
    c = sp.cos(th1 - th2)
    dlt = r1 * r2 * (m1 + m2 * s**2)
    num3 = (
        -g * r2 * (m2 * sp.sin(th2) * c - (m1 + m2) * sp.sin(th1))
        - s * m2 * r2 * (r1 * c * w1**2 + r2 * w2**2)
    )
    num4 = -g * r1 * (m1 + m2) * (c * sp.sin(th1) - sp.sin(th2)) + s * r1 * (
        r1 * (m1 + m2) * w1**2 + r2 * m2 * c * w2**2
    )
    b1 = m2 * r2 * (r1 * m2 * c - r2 * m1)
    b2 = m2 * r1 * (r2 * m1 * c - r1 * (m1 + m2))
    f_printed = sp.Matrix([w1, w2, num3 / dlt, num4 / dlt])
    h_printed = sp.Matrix([0, 0, b1 / dlt, b2 / dlt])

    state = sp.Matrix([th1, th2, w1, w2])
    x1 = sp.Matrix([dlt * w1, dlt * w2, num3, num4])
    x2 = sp.Matrix([0, 0, b1, b2])
    j1 = x1.jacobian(state)
    j2 = x2.jacobian(state)
    x3 = j2 * x1 - j1 * x2
    j3 = x3.jacobian(state)
    x4 = j3 * x2 - j2 * x3

    args = (m1, m2, r1, r2, g, th1, th2, w1, w2)

    def vec(expr):
        fn = sp.lambdify(args, list(expr), "numpy")

        def call(params, z):
            return np.array(fn(*params.as_tuple(), *np.asarray(z, dtype=float)), dtype=float)

        return call

    def mat(expr):
        fn = sp.lambdify(args, expr, "numpy")

        def call(params, z):
            return np.array(fn(*params.as_tuple(), *np.asarray(z, dtype=float)), dtype=float)

        return call

    def scal(expr):
        fn = sp.lambdify(args, expr, "numpy")

        def call(params, z):
            return float(fn(*params.as_tuple(), *np.asarray(z, dtype=float)))

        return call

    return {
        "symbols": {"m1": m1, "m2": m2, "r1": r1, "r2": r2, "g": g, "u": u},
        "state_symbols": (th1, th2, w1, w2),
        "f_el": f_el,
        "h_el": h_el,
        "f_printed": f_printed,
        "h_printed": h_printed,
        "x1_sym": x1,
        "x2_sym": x2,
        "x3_sym": x3,
        "x4_sym": x4,
        "j1_sym": j1,
        "j2_sym": j2,
        "delta_sym": dlt,
        "el_f": vec(f_el),
        "el_h": vec(h_el),
        "printed_f": vec(f_printed),
        "printed_h": vec(h_printed),
        "ox1": vec(x1),
        "ox2": vec(x2),
        "ox3": vec(x3),
        "ox4": vec(x4),
        "oj1": mat(j1),
        "oj2": mat(j2),
        "kinetic": scal(kin_state),
        "potential": scal(pot_state),
    }


def fd_jacobian(fn, z: np.ndarray, step: float) -> np.ndarray:
    """Plain central-difference Jacobian, independent of the package's."""
    z = np.asarray(z, dtype=float)
    cols = []
    for j in range(z.size):
        zp = z.copy()
        zm = z.copy()
        zp[j] += step
        zm[j] -= step
        cols.append((np.asarray(fn(zp), dtype=float) - np.asarray(fn(zm), dtype=float)) / (2.0 * step))
    return np.column_stack(cols)
