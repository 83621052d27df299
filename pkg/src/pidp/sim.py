"""Time integration, flow composition, energy diagnostics, and recurrence.

The integrator is classical fixed-step RK4. Piecewise-constant control
schedules are honored exactly: steps never straddle a breakpoint. Every
component of the state is guarded by a blow-up bound (default 1e6); crossing
it raises BlowUp carrying the partial trajectory.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from pidp import kernels
from pidp.dynamics import Params, as_state, hamiltonian
from pidp.errors import (
    BlowUp,
    NegativeTimeInAttainableMode,
    ParameterMisuse,
    ScheduleNotZero,
)
from pidp.liealg import VectorField

__all__ = [
    "Cloud",
    "ControlSchedule",
    "DEFAULT_BOUND",
    "DEFAULT_DT",
    "RecurrenceReport",
    "Trajectory",
    "cloud_compare",
    "cloud_sample",
    "compose_flows",
    "embed_states",
    "energy_drift",
    "flow",
    "integrate",
    "recurrence_experiment",
]

DEFAULT_DT = 1e-3
DEFAULT_BOUND = 1e6

#: Infinity-norm of the drift below which a start counts as stationary.
STATIONARY_TOL = 1e-12


@dataclass(frozen=True)
class ControlSchedule:
    """Piecewise-constant control on right-open intervals.

    values[i] applies on [breakpoints[i], breakpoints[i+1]); before the
    first breakpoint the control is 0.
    """

    breakpoints: tuple[float, ...] = ()
    values: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if len(self.breakpoints) != len(self.values):
            raise ValueError("breakpoints and values must have equal length")
        bps = self.breakpoints
        if any(bps[i] >= bps[i + 1] for i in range(len(bps) - 1)):
            raise ValueError(f"breakpoints must be strictly ascending: {bps}")
        if not all(math.isfinite(b) for b in bps):
            raise ValueError("breakpoints must be finite")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("control values must be finite")

    @classmethod
    def zero(cls) -> "ControlSchedule":
        return cls()

    @classmethod
    def constant(cls, u: float, start: float = 0.0) -> "ControlSchedule":
        return cls(breakpoints=(float(start),), values=(float(u),))

    def u_at(self, t: float) -> float:
        i = bisect_right(self.breakpoints, t) - 1
        return 0.0 if i < 0 else self.values[i]

    def is_zero(self) -> bool:
        return all(v == 0.0 for v in self.values)


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution with wrapped and unwrapped angle channels."""

    times: np.ndarray
    states: np.ndarray  # angles wrapped to [-pi, pi)
    states_unwrapped: np.ndarray
    params: Params
    schedule: ControlSchedule
    method: str
    dt: float
    bound: float

    @property
    def n_samples(self) -> int:
        return int(self.times.size)


def _wrap_columns(states: np.ndarray) -> np.ndarray:
    out = states.copy()
    for col in (0, 1):
        x = out[:, col]
        mask = (x < -math.pi) | (x >= math.pi)
        if mask.any():
            y = np.mod(x[mask] + math.pi, 2.0 * math.pi) - math.pi
            y[y >= math.pi] = -math.pi
            x[mask] = y
    return out


def _segment_steps(seg: float, dt: float) -> tuple[int, float]:
    n_full = int(math.floor(seg / dt + 1e-6))
    rem = seg - n_full * dt
    if rem < 1e-9 * dt:
        rem = 0.0
    return n_full, rem


def integrate(
    p: Params,
    z0,
    sched: ControlSchedule,
    T: float,
    dt: float = DEFAULT_DT,
    bound: float = DEFAULT_BOUND,
) -> Trajectory:
    """RK4 trajectory of dz/dt = f(z) + h(z) u(t) on [0, T].

    Samples every step, starting with z0 at t = 0. Segment boundaries land
    exactly on schedule breakpoints. Raises BlowUp (with the partial
    trajectory attached) when a component leaves [-bound, bound].
    """
    if not T > 0.0:
        raise ValueError(f"T must be positive, got {T}")
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    arr = as_state(z0)
    m1, m2, r1, r2, g = p.as_tuple()
    inner = [b for b in sched.breakpoints if 0.0 < b < T]
    boundaries = [0.0, *inner, T]

    times = [0.0]
    samples = [arr.copy()]
    z = arr.copy()

    def partial() -> Trajectory:
        stacked = np.vstack(samples)
        return Trajectory(
            times=np.array(times),
            states=_wrap_columns(stacked),
            states_unwrapped=stacked,
            params=p,
            schedule=sched,
            method="rk4",
            dt=dt,
            bound=bound,
        )

    for t0, t1 in zip(boundaries[:-1], boundaries[1:]):
        u = sched.u_at(t0)
        n_full, rem = _segment_steps(t1 - t0, dt)
        chunks: list[tuple[float, int]] = []
        if n_full:
            chunks.append((dt, n_full))
        if rem:
            chunks.append((rem, 1))
        for step, n in chunks:
            states, stop = kernels.rk4_control_steps(
                m1, m2, r1, r2, g, z, u, step, n, bound
            )
            taken = states.shape[0]
            for i in range(taken):
                times.append(t0 + (i + 1) * step if step == dt else t1)
                samples.append(states[i])
            if stop >= 0:
                raise BlowUp(
                    f"state component exceeded {bound:g} at t = {times[-1]:.6g}",
                    trajectory=partial(),
                    time=times[-1],
                )
            if taken:
                z = states[-1].copy()
        # land exactly on the boundary regardless of step roundoff
        times[-1] = t1
    return partial()


def flow(
    x: VectorField,
    z0,
    t: float,
    dt: float = DEFAULT_DT,
    bound: float = DEFAULT_BOUND,
) -> np.ndarray:
    """Endpoint of the flow of ``x`` for signed time ``t`` (RK4, uniform step)."""
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    arr = as_state(z0)
    if t == 0.0:
        return arr.copy()
    n = max(1, int(math.ceil(abs(t) / dt - 1e-9)))
    h = t / n
    z = arr.copy()
    for i in range(n):
        k1 = x(z)
        k2 = x(z + 0.5 * h * k1)
        k3 = x(z + 0.5 * h * k2)
        k4 = x(z + h * k3)
        z = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.abs(z) <= bound):
            raise BlowUp(
                f"flow of {x.label!r} exceeded {bound:g} at t = {(i + 1) * h:.6g}",
                time=(i + 1) * h,
            )
    return z


def compose_flows(
    p: Params,
    z0,
    word: Sequence[tuple[int, float]],
    dt: float = DEFAULT_DT,
    mode: str = "orbit",
    bound: float = DEFAULT_BOUND,
) -> np.ndarray:
    """Apply flows of the scaled family in sequence.

    ``word`` lists (generator index 1..4, signed time) pairs. In attainable
    mode negative times are rejected.
    """
    if mode not in ("orbit", "attainable"):
        raise ParameterMisuse(f"mode must be 'orbit' or 'attainable', got {mode!r}")
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    arr = as_state(z0)
    m1, m2, r1, r2, g = p.as_tuple()
    z = arr.copy()
    elapsed = 0.0
    for k, t in word:
        k = int(k)
        t = float(t)
        if k < 1 or k > 4:
            raise ParameterMisuse(f"generator index must be 1..4, got {k}")
        if mode == "attainable" and t < 0.0:
            raise NegativeTimeInAttainableMode(
                f"segment ({k}, {t}) has negative time in attainable mode"
            )
        if t == 0.0:
            continue
        n = max(1, int(math.ceil(abs(t) / dt - 1e-9)))
        h = t / n
        z, ok = kernels.rk4_field_steps(m1, m2, r1, r2, g, k, z, h, n, bound)
        elapsed += abs(t)
        if not ok:
            raise BlowUp(
                f"flow of X{k} exceeded {bound:g} within word segment", time=elapsed
            )
    return z


def energy_drift(traj: Trajectory) -> float:
    """Max relative Hamiltonian drift along an uncontrolled trajectory."""
    if not traj.schedule.is_zero():
        raise ScheduleNotZero(
            f"energy drift needs u = 0 throughout, got values {traj.schedule.values}"
        )
    h = hamiltonian(traj.params, traj.states_unwrapped)
    h0 = float(h[0])
    return float(np.max(np.abs(h - h0)) / max(abs(h0), 1.0))


def embed_states(states: np.ndarray) -> np.ndarray:
    """Angle-aware embedding (sin t1, cos t1, sin t2, cos t2, w1, w2)."""
    arr = np.atleast_2d(np.asarray(states, dtype=float))
    return np.column_stack(
        [
            np.sin(arr[:, 0]),
            np.cos(arr[:, 0]),
            np.sin(arr[:, 1]),
            np.cos(arr[:, 1]),
            arr[:, 2],
            arr[:, 3],
        ]
    )


@dataclass(frozen=True)
class RecurrenceReport:
    """Outcome of the return-time experiment for the uncontrolled flow."""

    start: np.ndarray
    epsilon: float
    horizon: float
    dt: float
    status: str  # returned | no_return | never_departed | stationary
    departure_time: float | None
    first_return_time: float | None
    min_distance_after_departure: float | None
    metric: str = "euclidean on (sin t1, cos t1, sin t2, cos t2, w1, w2)"


def recurrence_experiment(
    p: Params,
    z0,
    eps: float,
    T: float,
    dt: float = DEFAULT_DT,
    bound: float = DEFAULT_BOUND,
) -> RecurrenceReport:
    """First return of the u = 0 flow to the eps-ball around the start.

    Departure requires distance strictly above eps; the return is the first
    later sample back inside. A stationary start (drift below 1e-12) is
    flagged with first_return_time 0 by convention.
    """
    if not eps > 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    arr = as_state(z0)
    d0 = kernels.drift(p.m1, p.m2, p.r1, p.r2, p.g, arr)
    if float(np.max(np.abs(d0))) <= STATIONARY_TOL:
        return RecurrenceReport(
            start=arr,
            epsilon=eps,
            horizon=T,
            dt=dt,
            status="stationary",
            departure_time=None,
            first_return_time=0.0,
            min_distance_after_departure=0.0,
        )
    traj = integrate(p, arr, ControlSchedule.zero(), T, dt=dt, bound=bound)
    emb = embed_states(traj.states_unwrapped)
    dist = np.linalg.norm(emb - emb[0], axis=1)
    outside = np.flatnonzero(dist > eps)
    if outside.size == 0:
        return RecurrenceReport(
            start=arr,
            epsilon=eps,
            horizon=T,
            dt=dt,
            status="never_departed",
            departure_time=None,
            first_return_time=None,
            min_distance_after_departure=None,
        )
    j = int(outside[0])
    departure_time = float(traj.times[j])
    tail = dist[j + 1 :]
    back = np.flatnonzero(tail <= eps)
    min_after = float(tail.min()) if tail.size else None
    if back.size == 0:
        return RecurrenceReport(
            start=arr,
            epsilon=eps,
            horizon=T,
            dt=dt,
            status="no_return",
            departure_time=departure_time,
            first_return_time=None,
            min_distance_after_departure=min_after,
        )
    i = j + 1 + int(back[0])
    return RecurrenceReport(
        start=arr,
        epsilon=eps,
        horizon=T,
        dt=dt,
        status="returned",
        departure_time=departure_time,
        first_return_time=float(traj.times[i]),
        min_distance_after_departure=min_after,
    )


@dataclass(frozen=True)
class Cloud:
    """Endpoints of random flow words from a common start."""

    start: np.ndarray
    mode: str  # orbit | attainable
    seed: int
    budget: float
    points: np.ndarray  # (m, 4) endpoints, angles unwrapped
    words: tuple[str, ...]  # provenance, "k:time;k:time;..."
    defects: tuple[str, ...]


def _word_provenance(word: Sequence[tuple[int, float]]) -> str:
    return ";".join(f"{k}:{t:.{17}g}" for k, t in word)


def cloud_sample(
    p: Params,
    z0,
    n: int,
    mode: str = "orbit",
    seed: int = 0,
    budget: float = 1.0,
    max_segments: int = 6,
    dt: float = DEFAULT_DT,
    bound: float = DEFAULT_BOUND,
) -> Cloud:
    """Sample ``n`` endpoints of random flow words within a time budget.

    Generator indices are uniform over 1..4; segment durations are
    exponential with mean budget/(2 k), rescaled if the word total exceeds
    the budget; orbit mode flips signs with probability 1/2. Blow-ups are
    recorded as defects and skipped.
    """
    if n < 1:
        raise ParameterMisuse(f"need n >= 1 samples, got {n}")
    if mode not in ("orbit", "attainable"):
        raise ParameterMisuse(f"mode must be 'orbit' or 'attainable', got {mode!r}")
    arr = as_state(z0)
    rng = np.random.Generator(np.random.PCG64(seed))
    points: list[np.ndarray] = []
    words: list[str] = []
    defects: list[str] = []
    for i in range(n):
        k = int(rng.integers(1, max_segments + 1))
        gens = rng.integers(1, 5, size=k)
        durations = rng.exponential(budget / (2.0 * k), size=k)
        total = float(durations.sum())
        if total > budget and total > 0.0:
            durations *= budget / total
        if mode == "orbit":
            signs = rng.integers(0, 2, size=k) * 2 - 1
        else:
            signs = np.ones(k, dtype=int)
        word = [(int(gens[j]), float(signs[j] * durations[j])) for j in range(k)]
        try:
            end = compose_flows(p, arr, word, dt=dt, mode=mode, bound=bound)
        except BlowUp as exc:
            defects.append(f"sample {i}: {exc}")
            continue
        points.append(end)
        words.append(_word_provenance(word))
    stacked = np.vstack(points) if points else np.zeros((0, 4))
    return Cloud(
        start=arr,
        mode=mode,
        seed=seed,
        budget=budget,
        points=stacked,
        words=tuple(words),
        defects=tuple(defects),
    )


def cloud_compare(a: Cloud, b: Cloud) -> dict:
    """Symmetric mean nearest-neighbor distance between two clouds.

    Distances use the angle-aware embedding. Reported as a similarity
    metric only; no threshold is implied.
    """
    if a.points.shape[0] == 0 or b.points.shape[0] == 0:
        raise ParameterMisuse("cloud comparison needs non-empty clouds")
    ea = embed_states(a.points)
    eb = embed_states(b.points)
    d2 = np.sum((ea[:, None, :] - eb[None, :, :]) ** 2, axis=2)
    a_to_b = float(np.mean(np.sqrt(d2.min(axis=1))))
    b_to_a = float(np.mean(np.sqrt(d2.min(axis=0))))
    return {
        "mean_nn_a_to_b": a_to_b,
        "mean_nn_b_to_a": b_to_a,
        "symmetric_mean_nn": 0.5 * (a_to_b + b_to_a),
        "n_a": int(a.points.shape[0]),
        "n_b": int(b.points.shape[0]),
    }
