"""Planar inverted double pendulum on a cart: dynamics and energies.

State is z = (theta1, theta2, omega1, omega2) with angles measured from the
upward vertical and canonical range [-pi, pi). The controlled system is

    dz/dt = f(z) + h(z) u(t)

with drift ``drift_f``, control field ``control_h``, and scalar control
acceleration u. Both fields share the positive denominator

    Delta(theta) = r1 r2 (m1 + m2 sin^2(theta1 - theta2)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from pidp import kernels
from pidp.errors import NonFiniteState
from pidp.params import (
    ADMISSIBILITY_RTOL,
    AdmissibleParams,
    Params,
    params_from_json,
    validate_params,
)

__all__ = [
    "ADMISSIBILITY_RTOL",
    "AdmissibleParams",
    "EnergyBreakdown",
    "Params",
    "as_state",
    "control_h",
    "delta",
    "drift_f",
    "energies",
    "hamiltonian",
    "hamiltonian_from_momenta",
    "mass_matrix",
    "momenta",
    "params_from_json",
    "rhs",
    "validate_params",
    "velocities",
    "wrap_angle",
    "wrap_state",
]

_PI = math.pi
_TWO_PI = 2.0 * math.pi


def as_state(z) -> np.ndarray:
    """Coerce ``z`` to a float64 4-vector, rejecting non-finite components."""
    arr = np.asarray(z, dtype=float)
    if arr.shape != (4,):
        raise NonFiniteState(f"state must have shape (4,), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteState(f"state has non-finite components: {arr.tolist()}")
    return arr


def wrap_angle(x: float) -> float:
    """Shift ``x`` by a multiple of 2*pi into [-pi, pi).

    Values already in range are returned unchanged (bit-for-bit).
    """
    if -_PI <= x < _PI:
        return x
    y = math.fmod(x + _PI, _TWO_PI)
    if y < 0.0:
        y += _TWO_PI
    y -= _PI
    # fmod rounding can land exactly on pi; fold it to the canonical endpoint
    if y >= _PI:
        y = -_PI
    return y


def wrap_state(z) -> np.ndarray:
    """Normalize both angles into [-pi, pi); velocities pass through."""
    arr = as_state(z)
    return np.array([wrap_angle(arr[0]), wrap_angle(arr[1]), arr[2], arr[3]])


def delta(p: Params, theta1: float, theta2: float) -> float:
    """Denominator Delta(theta) = r1 r2 (m1 + m2 sin^2(theta1 - theta2)) > 0."""
    return kernels.delta(p.m1, p.m2, p.r1, p.r2, p.g, theta1, theta2)


def drift_f(p: Params, z) -> np.ndarray:
    """Uncontrolled vector field f(z)."""
    return kernels.drift(p.m1, p.m2, p.r1, p.r2, p.g, as_state(z))


def control_h(p: Params, z) -> np.ndarray:
    """Control vector field h(z); components 1-2 are identically zero."""
    return kernels.control(p.m1, p.m2, p.r1, p.r2, p.g, as_state(z))


def rhs(p: Params, z, u: float) -> np.ndarray:
    """Full right-hand side f(z) + u h(z)."""
    return kernels.rhs(p.m1, p.m2, p.r1, p.r2, p.g, as_state(z), float(u))


@dataclass(frozen=True)
class EnergyBreakdown:
    """Kinetic, potential, Lagrangian, and Hamiltonian energies at a state."""

    kinetic: float
    potential: float
    lagrangian: float
    hamiltonian: float


def energies(p: Params, z) -> EnergyBreakdown:
    """Energy breakdown at ``z``: T, U, L = T - U, H = T + U."""
    arr = as_state(z)
    th1, th2, w1, w2 = arr
    c = math.cos(th1 - th2)
    t = (
        0.5 * (p.m1 + p.m2) * p.r1 * p.r1 * w1 * w1
        + p.m2 * p.r1 * p.r2 * w1 * w2 * c
        + 0.5 * p.m2 * p.r2 * p.r2 * w2 * w2
    )
    u = p.g * ((p.m1 + p.m2) * p.r1 * math.cos(th1) + p.m2 * p.r2 * math.cos(th2))
    return EnergyBreakdown(kinetic=t, potential=u, lagrangian=t - u, hamiltonian=t + u)


def hamiltonian(p: Params, states) -> float | np.ndarray:
    """Total energy H = T + U, vectorized over a (n, 4) stack of states."""
    arr = np.asarray(states, dtype=float)
    single = arr.ndim == 1
    if single:
        arr = arr[np.newaxis, :]
    th1 = arr[:, 0]
    th2 = arr[:, 1]
    w1 = arr[:, 2]
    w2 = arr[:, 3]
    c = np.cos(th1 - th2)
    t = (
        0.5 * (p.m1 + p.m2) * p.r1 * p.r1 * w1 * w1
        + p.m2 * p.r1 * p.r2 * w1 * w2 * c
        + 0.5 * p.m2 * p.r2 * p.r2 * w2 * w2
    )
    u = p.g * ((p.m1 + p.m2) * p.r1 * np.cos(th1) + p.m2 * p.r2 * np.cos(th2))
    h = t + u
    return float(h[0]) if single else h


def mass_matrix(p: Params, theta1: float, theta2: float) -> np.ndarray:
    """Inertia matrix M(theta); symmetric, positive definite.

    Identity: det M = m2 r1 r2 Delta(theta).
    """
    c = math.cos(theta1 - theta2)
    m12 = p.m2 * p.r1 * p.r2 * c
    return np.array(
        [
            [(p.m1 + p.m2) * p.r1 * p.r1, m12],
            [m12, p.m2 * p.r2 * p.r2],
        ]
    )


def momenta(p: Params, z) -> np.ndarray:
    """Generalized momenta p = M(theta) omega (the Legendre transform)."""
    arr = as_state(z)
    m = mass_matrix(p, arr[0], arr[1])
    return m @ arr[2:4]


def velocities(p: Params, theta1: float, theta2: float, pvec) -> np.ndarray:
    """Invert the Legendre transform: omega = M(theta)^-1 p."""
    pv = np.asarray(pvec, dtype=float)
    m = mass_matrix(p, theta1, theta2)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    w1 = (m[1, 1] * pv[0] - m[0, 1] * pv[1]) / det
    w2 = (m[0, 0] * pv[1] - m[1, 0] * pv[0]) / det
    return np.array([w1, w2])


def hamiltonian_from_momenta(p: Params, theta1: float, theta2: float, pvec) -> float:
    """H(theta, p) = 1/2 p^T M(theta)^-1 p + U(theta)."""
    pv = np.asarray(pvec, dtype=float)
    w = velocities(p, theta1, theta2, pv)
    t = 0.5 * float(pv @ w)
    u = p.g * ((p.m1 + p.m2) * p.r1 * math.cos(theta1) + p.m2 * p.r2 * math.cos(theta2))
    return t + u
