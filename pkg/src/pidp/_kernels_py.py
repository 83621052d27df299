"""Pure-Python reference kernels.

The hot arithmetic shared by the public modules lives here: the model
right-hand side, the scaled field family X1..X4 with the Jacobians needed
for bracket evaluation, stratum determinants, and fixed-step RK4 loops.
A compiled twin (``pidp._kernels_cy``) implements the same functions with
identical formulas; ``pidp.kernels`` selects between the two at import.

All functions take the five physical constants unpacked (m1, m2, r1, r2, g)
followed by a state vector z = (theta1, theta2, omega1, omega2) as a
float64 ndarray of shape (4,). Scalars in, scalars out; no global state.
"""

from __future__ import annotations

import math

import numpy as np

#: Central-difference step floor for Jacobians of derived (bracketed) fields.
FD_STEP_FLOOR = 1e-6


def fd_step(z) -> float:
    """Step size for derived-field Jacobians: max(1e-6, 1e-6*||z||)."""
    n = math.sqrt(z[0] * z[0] + z[1] * z[1] + z[2] * z[2] + z[3] * z[3])
    return max(FD_STEP_FLOOR, FD_STEP_FLOOR * n)


def delta(m1, m2, r1, r2, g, th1, th2) -> float:
    s = math.sin(th1 - th2)
    return (r1 * r2) * (m1 + m2 * s * s)


def drift(m1, m2, r1, r2, g, z):
    th1 = z[0]
    th2 = z[1]
    w1 = z[2]
    w2 = z[3]
    s = math.sin(th1 - th2)
    c = math.cos(th1 - th2)
    dlt = (r1 * r2) * (m1 + m2 * s * s)
    s1 = math.sin(th1)
    s2 = math.sin(th2)
    f3 = (-g * r2 * (m2 * s2 * c - (m1 + m2) * s1) - s * m2 * r2 * (r1 * c * w1 * w1 + r2 * w2 * w2)) / dlt
    f4 = (-g * r1 * (m1 + m2) * (c * s1 - s2) + s * r1 * (r1 * (m1 + m2) * w1 * w1 + r2 * m2 * c * w2 * w2)) / dlt
    return np.array([w1, w2, f3, f4])


def control(m1, m2, r1, r2, g, z):
    th1 = z[0]
    th2 = z[1]
    s = math.sin(th1 - th2)
    c = math.cos(th1 - th2)
    dlt = (r1 * r2) * (m1 + m2 * s * s)
    b1 = m2 * r2 * (r1 * m2 * c - r2 * m1)
    b2 = m2 * r1 * (r2 * m1 * c - r1 * (m1 + m2))
    return np.array([0.0, 0.0, b1 / dlt, b2 / dlt])


def rhs(m1, m2, r1, r2, g, z, u):
    th1 = z[0]
    th2 = z[1]
    w1 = z[2]
    w2 = z[3]
    s = math.sin(th1 - th2)
    c = math.cos(th1 - th2)
    dlt = (r1 * r2) * (m1 + m2 * s * s)
    s1 = math.sin(th1)
    s2 = math.sin(th2)
    f3 = (-g * r2 * (m2 * s2 * c - (m1 + m2) * s1) - s * m2 * r2 * (r1 * c * w1 * w1 + r2 * w2 * w2)) / dlt
    f4 = (-g * r1 * (m1 + m2) * (c * s1 - s2) + s * r1 * (r1 * (m1 + m2) * w1 * w1 + r2 * m2 * c * w2 * w2)) / dlt
    b1 = m2 * r2 * (r1 * m2 * c - r2 * m1)
    b2 = m2 * r1 * (r2 * m1 * c - r1 * (m1 + m2))
    return np.array([w1, w2, f3 + u * (b1 / dlt), f4 + u * (b2 / dlt)])


def x1_jacobian(m1, m2, r1, r2, g, z):
    """Analytic Jacobian of the scaled drift X1 = Delta*f."""
    th1 = z[0]
    th2 = z[1]
    w1 = z[2]
    w2 = z[3]
    s = math.sin(th1 - th2)
    c = math.cos(th1 - th2)
    c2d = c * c - s * s
    dlt = (r1 * r2) * (m1 + m2 * s * s)
    s1 = math.sin(th1)
    c1 = math.cos(th1)
    s2 = math.sin(th2)
    cth2 = math.cos(th2)
    big = m1 + m2
    ddlt = (r1 * r2 * m2) * (2.0 * s * c)
    j = np.zeros((4, 4))
    j[0, 0] = w1 * ddlt
    j[0, 1] = -w1 * ddlt
    j[0, 2] = dlt
    j[1, 0] = w2 * ddlt
    j[1, 1] = -w2 * ddlt
    j[1, 3] = dlt
    cent1 = m2 * r2 * (r1 * c2d * w1 * w1 + r2 * c * w2 * w2)
    j[2, 0] = g * r2 * m2 * s2 * s + g * r2 * big * c1 - cent1
    j[2, 1] = -g * r2 * m2 * (cth2 * c + s2 * s) + cent1
    j[2, 2] = -2.0 * m2 * r1 * r2 * s * c * w1
    j[2, 3] = -2.0 * m2 * r2 * r2 * s * w2
    cent2 = r1 * (r1 * big * c * w1 * w1 + r2 * m2 * c2d * w2 * w2)
    j[3, 0] = -g * r1 * big * (c * c1 - s * s1) + cent2
    j[3, 1] = -g * r1 * big * (s * s1 - cth2) - cent2
    j[3, 2] = 2.0 * r1 * r1 * big * s * w1
    j[3, 3] = 2.0 * r1 * r2 * m2 * s * c * w2
    return j


def x2_jacobian(m1, m2, r1, r2, g, z):
    """Analytic Jacobian of the scaled control X2 = Delta*h."""
    th1 = z[0]
    th2 = z[1]
    s = math.sin(th1 - th2)
    j = np.zeros((4, 4))
    db1 = -(m2 * m2) * r1 * r2 * s
    db2 = -(m1 * m2) * r1 * r2 * s
    j[2, 0] = db1
    j[2, 1] = -db1
    j[3, 0] = db2
    j[3, 1] = -db2
    return j


def _x1_value(m1, m2, r1, r2, g, z):
    th1 = z[0]
    th2 = z[1]
    s = math.sin(th1 - th2)
    dlt = (r1 * r2) * (m1 + m2 * s * s)
    f = drift(m1, m2, r1, r2, g, z)
    return dlt * f


def _x2_value(m1, m2, r1, r2, g, z):
    th1 = z[0]
    th2 = z[1]
    s = math.sin(th1 - th2)
    dlt = (r1 * r2) * (m1 + m2 * s * s)
    h = control(m1, m2, r1, r2, g, z)
    return dlt * h


def _x3_value(m1, m2, r1, r2, g, z):
    x1 = _x1_value(m1, m2, r1, r2, g, z)
    x2 = _x2_value(m1, m2, r1, r2, g, z)
    j1 = x1_jacobian(m1, m2, r1, r2, g, z)
    j2 = x2_jacobian(m1, m2, r1, r2, g, z)
    return j2 @ x1 - j1 @ x2


def x3_jacobian(m1, m2, r1, r2, g, z):
    """Central-difference Jacobian of X3 = [X1, X2]."""
    h = fd_step(z)
    j = np.empty((4, 4))
    for col in range(4):
        zp = z.copy()
        zm = z.copy()
        zp[col] = zp[col] + h
        zm[col] = zm[col] - h
        j[:, col] = (_x3_value(m1, m2, r1, r2, g, zp) - _x3_value(m1, m2, r1, r2, g, zm)) / (2.0 * h)
    return j


def _x4_value(m1, m2, r1, r2, g, z):
    x2 = _x2_value(m1, m2, r1, r2, g, z)
    x3 = _x3_value(m1, m2, r1, r2, g, z)
    j2 = x2_jacobian(m1, m2, r1, r2, g, z)
    j3 = x3_jacobian(m1, m2, r1, r2, g, z)
    return j3 @ x2 - j2 @ x3


def x4_jacobian(m1, m2, r1, r2, g, z):
    """Central-difference Jacobian of X4 = [X2, X3]."""
    h = fd_step(z)
    j = np.empty((4, 4))
    for col in range(4):
        zp = z.copy()
        zm = z.copy()
        zp[col] = zp[col] + h
        zm[col] = zm[col] - h
        j[:, col] = (_x4_value(m1, m2, r1, r2, g, zp) - _x4_value(m1, m2, r1, r2, g, zm)) / (2.0 * h)
    return j


def field_value(m1, m2, r1, r2, g, k, z):
    """Value of family member k in {1, 2, 3, 4} at z."""
    if k == 1:
        return _x1_value(m1, m2, r1, r2, g, z)
    if k == 2:
        return _x2_value(m1, m2, r1, r2, g, z)
    if k == 3:
        return _x3_value(m1, m2, r1, r2, g, z)
    if k == 4:
        return _x4_value(m1, m2, r1, r2, g, z)
    raise ValueError(f"family index must be 1..4, got {k}")


def leaf_matrix(m1, m2, r1, r2, g, z):
    """4x4 matrix whose rows are X1(z), X2(z), X3(z), X4(z)."""
    out = np.empty((4, 4))
    out[0] = _x1_value(m1, m2, r1, r2, g, z)
    out[1] = _x2_value(m1, m2, r1, r2, g, z)
    out[2] = _x3_value(m1, m2, r1, r2, g, z)
    out[3] = _x4_value(m1, m2, r1, r2, g, z)
    return out


def stratum_dets(m1, m2, r1, r2, g, z):
    """Determinants and scales deciding the singular strata at z.

    Returns (gamma_det, gamma_scale, upsilon_det, upsilon_scale) where
    gamma_det is the 2x2 determinant of the omega-components of (X2, X4),
    upsilon_det that of the theta-components of (X1, X3), and each scale is
    the squared larger column norm (so |det| <= tol*scale matches the
    relative singular-value criterion within sqrt(2)).
    """
    x1 = _x1_value(m1, m2, r1, r2, g, z)
    x2 = _x2_value(m1, m2, r1, r2, g, z)
    x3 = _x3_value(m1, m2, r1, r2, g, z)
    x4 = _x4_value(m1, m2, r1, r2, g, z)
    b1 = x2[2]
    b2 = x2[3]
    w1 = x4[2]
    w2 = x4[3]
    gdet = b1 * w2 - b2 * w1
    gscale = max(b1 * b1 + b2 * b2, w1 * w1 + w2 * w2)
    o1 = x1[0]
    o2 = x1[1]
    ob1 = x3[0]
    ob2 = x3[1]
    udet = o1 * ob2 - o2 * ob1
    uscale = max(o1 * o1 + o2 * o2, ob1 * ob1 + ob2 * ob2)
    return gdet, gscale, udet, uscale


def rk4_control_steps(m1, m2, r1, r2, g, z0, u, dt, n, bound):
    """n classical RK4 steps of zdot = f(z) + u*h(z) with constant u.

    Returns (states, stop): states has one row per completed step; stop is
    the index of the first step whose result exceeded the bound (that row is
    still stored), or -1 if all n steps stayed inside.
    """
    states = np.empty((n, 4))
    z = np.array(z0, dtype=float)
    half = 0.5 * dt
    sixth = dt / 6.0
    for i in range(n):
        k1 = rhs(m1, m2, r1, r2, g, z, u)
        k2 = rhs(m1, m2, r1, r2, g, z + half * k1, u)
        k3 = rhs(m1, m2, r1, r2, g, z + half * k2, u)
        k4 = rhs(m1, m2, r1, r2, g, z + dt * k3, u)
        z = z + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        states[i] = z
        if not (abs(z[0]) <= bound and abs(z[1]) <= bound and abs(z[2]) <= bound and abs(z[3]) <= bound):
            return states[: i + 1], i
    return states, -1


def rk4_field_steps(m1, m2, r1, r2, g, k, z0, h, n, bound):
    """n RK4 steps of zdot = X_k(z) with signed step h.

    Returns (z_final, ok) where ok is False if any step left the bound
    (z_final is then the last state inside it).
    """
    z = np.array(z0, dtype=float)
    half = 0.5 * h
    sixth = h / 6.0
    for _ in range(n):
        k1 = field_value(m1, m2, r1, r2, g, k, z)
        k2 = field_value(m1, m2, r1, r2, g, k, z + half * k1)
        k3 = field_value(m1, m2, r1, r2, g, k, z + half * k2)
        k4 = field_value(m1, m2, r1, r2, g, k, z + h * k3)
        znew = z + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not (
            abs(znew[0]) <= bound
            and abs(znew[1]) <= bound
            and abs(znew[2]) <= bound
            and abs(znew[3]) <= bound
        ):
            return z, False
        z = znew
    return z, True
