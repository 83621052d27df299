"""Lie-algebra rank condition, singular strata, and state-space sweeps.

The state space splits into the generic stratum, where the four fields
X1..X4 already span the tangent space, and the thin sets

    Gamma:   (X2, X4) linearly dependent in the omega-directions
    Upsilon: (X1, X3) linearly dependent in the theta-directions
    Sigma:   their intersection

Dependence is detected through 2x2 determinants thresholded relative to the
squared length of the larger column. ``sweep`` samples the space, ``lie_rank``
evaluates bracket words at a point, and ``escape_test`` checks numerically
that short flows along X2 and X3 leave Gamma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from pidp import kernels
from pidp.dynamics import Params, as_state, hamiltonian, wrap_angle
from pidp.errors import (
    DepthExceeded,
    EmptyReport,
    NonFiniteEvaluation,
    ParameterMisuse,
)
from pidp.liealg import BracketWord, VectorField, evaluate_word, scaled_family, word_str

__all__ = [
    "DEFAULT_RANK_TOL",
    "EscapeCandidate",
    "EscapeReport",
    "MAX_DEPTH",
    "RankReport",
    "Stratum",
    "SweepReport",
    "SweepSpec",
    "bracket_generating_verdict",
    "classify_stratum",
    "enumerate_words",
    "escape_test",
    "find_gamma_points",
    "find_sigma_points",
    "find_upsilon_points",
    "lie_rank",
    "stratum_from_fields",
    "sweep",
]

#: Relative singular-value cutoff for numerical rank and dependence tests.
DEFAULT_RANK_TOL = 1e-8

#: Hard cap on bracket-word depth.
MAX_DEPTH = 4


@dataclass(frozen=True)
class Stratum:
    """Classification of a point with the determinants that decided it."""

    label: str  # Generic | Gamma | Upsilon | Sigma
    gamma_det: float
    upsilon_det: float
    gamma_scale: float
    upsilon_scale: float


def _label(gamma_dep: bool, upsilon_dep: bool) -> str:
    if gamma_dep and upsilon_dep:
        return "Sigma"
    if gamma_dep:
        return "Gamma"
    if upsilon_dep:
        return "Upsilon"
    return "Generic"


def stratum_from_fields(x1, x2, x3, x4, tol: float = DEFAULT_RANK_TOL) -> Stratum:
    """Classify from explicit field values (4-vectors) at one point.

    gamma_det is the determinant of the omega-components of (X2, X4),
    upsilon_det of the theta-components of (X1, X3); each is compared
    against tol times the squared length of its larger column.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    x3 = np.asarray(x3, dtype=float)
    x4 = np.asarray(x4, dtype=float)
    b1, b2 = x2[2], x2[3]
    w1, w2 = x4[2], x4[3]
    gdet = b1 * w2 - b2 * w1
    gscale = max(b1 * b1 + b2 * b2, w1 * w1 + w2 * w2)
    o1, o2 = x1[0], x1[1]
    ob1, ob2 = x3[0], x3[1]
    udet = o1 * ob2 - o2 * ob1
    uscale = max(o1 * o1 + o2 * o2, ob1 * ob1 + ob2 * ob2)
    gamma_dep = abs(gdet) <= tol * gscale
    upsilon_dep = abs(udet) <= tol * uscale
    return Stratum(
        label=_label(gamma_dep, upsilon_dep),
        gamma_det=float(gdet),
        upsilon_det=float(udet),
        gamma_scale=float(gscale),
        upsilon_scale=float(uscale),
    )


def classify_stratum(p: Params, z, tol: float = DEFAULT_RANK_TOL) -> Stratum:
    """Classify state ``z`` into Generic, Gamma, Upsilon, or Sigma."""
    arr = as_state(z)
    gdet, gscale, udet, uscale = kernels.stratum_dets(
        p.m1, p.m2, p.r1, p.r2, p.g, arr
    )
    gamma_dep = abs(gdet) <= tol * gscale
    upsilon_dep = abs(udet) <= tol * uscale
    return Stratum(
        label=_label(gamma_dep, upsilon_dep),
        gamma_det=float(gdet),
        upsilon_det=float(udet),
        gamma_scale=float(gscale),
        upsilon_scale=float(uscale),
    )


def enumerate_words(
    n_generators: int, max_depth: int, max_words: int | None = None
) -> list[BracketWord]:
    """All bracket words up to ``max_depth`` in canonical creation order.

    Leaves come first; a node of depth d pairs a right child of depth d-1
    with any earlier-created left child. Antisymmetry makes the reversed
    pairs redundant and self-brackets vanish, so both are skipped. With
    ``max_words`` the enumeration stops once that many words exist (the
    count grows near 7 * 10^5 by depth 4).
    """
    if n_generators < 1:
        raise ValueError("need at least one generator")
    if max_depth < 0:
        raise ValueError(f"max_depth must be >= 0, got {max_depth}")
    leaves = [BracketWord(leaf=k) for k in range(1, n_generators + 1)]
    words: list[BracketWord] = list(leaves)
    if max_words is not None and len(words) >= max_words:
        return words[:max_words]
    index = {w: i for i, w in enumerate(words)}
    level = leaves
    for _ in range(max_depth):
        new_level = []
        for right in level:
            r_idx = index[right]
            # r_idx always predates this level, so appending as we go
            # cannot add new left candidates mid-level
            for left in words[:r_idx]:
                node = BracketWord(left=left, right=right)
                index[node] = len(words)
                words.append(node)
                new_level.append(node)
                if max_words is not None and len(words) >= max_words:
                    return words
        level = new_level
    return words


def _svd_rank(matrix: np.ndarray, tol: float) -> tuple[int, np.ndarray]:
    if matrix.size == 0:
        return 0, np.zeros(0)
    sv = np.linalg.svd(matrix, compute_uv=False)
    if sv[0] == 0.0:
        return 0, sv
    return int(np.sum(sv > tol * sv[0])), sv


@dataclass(frozen=True)
class RankReport:
    """Result of a Lie rank evaluation at one point."""

    point: np.ndarray
    rank: int
    singular_values: np.ndarray  # 4 entries, descending, zero-padded
    witness_words: tuple[BracketWord, ...]
    depth_used: int

    def witness_strings(self) -> tuple[str, ...]:
        return tuple(word_str(w) for w in self.witness_words)


def lie_rank(
    family: Sequence[VectorField],
    z,
    depth: int = 2,
    tol: float = DEFAULT_RANK_TOL,
    max_words: int = 256,
) -> RankReport:
    """Numerical rank of the span of bracket-word values at ``z``.

    Words are enumerated in canonical order up to ``depth`` (capped at
    ``max_words``), each evaluated at ``z`` and stacked; the rank is the
    number of singular values above ``tol`` times the largest. Evaluation
    stops early once rank 4 is reached. The witness list is a greedy
    minimal subset of words achieving the reported rank.
    """
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    if depth > MAX_DEPTH:
        raise DepthExceeded(f"depth {depth} exceeds maximum {MAX_DEPTH}")
    if not tol > 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    arr = as_state(z)
    words = enumerate_words(len(family), depth, max_words=max_words)

    evaluated: list[tuple[BracketWord, np.ndarray]] = []
    rows: list[np.ndarray] = []
    rank = 0
    sv = np.zeros(0)
    depth_used = 0
    for w in words:
        value = evaluate_word(w, family, arr, max_depth=depth)
        if not np.all(np.isfinite(value)):
            raise NonFiniteEvaluation(
                f"word {word_str(w)} evaluated to non-finite {value.tolist()}"
            )
        evaluated.append((w, value))
        rows.append(value)
        depth_used = max(depth_used, w.depth())
        rank, sv = _svd_rank(np.vstack(rows), tol)
        if rank == 4:
            break

    # Greedy minimal witness, measured against the full-stack scale so a
    # negligible row can never seed (or block) the subset.
    ref = float(sv[0]) if sv.size else 0.0
    witness: list[BracketWord] = []
    wrows: list[np.ndarray] = []
    wrank = 0
    if ref > 0.0:
        for w, value in evaluated:
            if wrank == rank:
                break
            s = np.linalg.svd(np.vstack(wrows + [value]), compute_uv=False)
            trial = int(np.sum(s > tol * ref))
            if trial > wrank:
                witness.append(w)
                wrows.append(value)
                wrank = trial
    padded = np.zeros(4)
    padded[: min(4, sv.size)] = sv[:4]
    return RankReport(
        point=arr,
        rank=rank,
        singular_values=padded,
        witness_words=tuple(witness),
        depth_used=depth_used,
    )


@dataclass(frozen=True)
class SweepSpec:
    """Sampling plan for a state-space sweep."""

    mode: str = "random"  # "random" | "grid"
    n_samples: int = 1000
    seed: int = 0
    omega_scale: float = 3.0  # random mode: omega ~ U[-scale, scale]
    grid_n: int = 32  # grid mode: points per theta axis
    omega_slices: tuple[tuple[float, float], ...] = ((0.0, 0.0),)
    depth_generic: int = 2
    depth_strata: int = 4
    tol: float = DEFAULT_RANK_TOL
    max_words: int = 128


@dataclass(frozen=True)
class SweepReport:
    """Per-point classification and rank over a sample of states."""

    params: Params
    spec: SweepSpec
    points: np.ndarray  # (n, 4)
    strata: tuple[str, ...]
    ranks: np.ndarray  # (n,) int
    gamma_dets: np.ndarray
    upsilon_dets: np.ndarray
    hamiltonians: np.ndarray
    sub_rank: tuple[RankReport, ...]  # reports for points below rank 4
    defects: tuple[str, ...]

    @property
    def n_samples(self) -> int:
        return int(self.points.shape[0])

    def counts(self) -> dict[str, int]:
        out = {"Generic": 0, "Gamma": 0, "Upsilon": 0, "Sigma": 0}
        for label in self.strata:
            out[label] += 1
        return out

    def rank4_fraction(self) -> float:
        if self.n_samples == 0:
            return 0.0
        return float(np.mean(self.ranks == 4))

    def rank4_fraction_generic(self) -> float:
        mask = np.array([s == "Generic" for s in self.strata], dtype=bool)
        if not mask.any():
            return 0.0
        return float(np.mean(self.ranks[mask] == 4))


def _sample_points(p: Params, spec: SweepSpec) -> np.ndarray:
    if spec.mode == "random":
        n = spec.n_samples
        rng = np.random.Generator(np.random.PCG64(spec.seed))
        thetas = rng.uniform(-math.pi, math.pi, size=(n, 2))
        omegas = rng.uniform(-spec.omega_scale, spec.omega_scale, size=(n, 2))
        return np.hstack([thetas, omegas])
    if spec.mode == "grid":
        axis = np.linspace(-math.pi, math.pi, spec.grid_n, endpoint=False)
        t1, t2 = np.meshgrid(axis, axis, indexing="ij")
        blocks = []
        for w1, w2 in spec.omega_slices:
            blocks.append(
                np.column_stack(
                    [
                        t1.ravel(),
                        t2.ravel(),
                        np.full(t1.size, float(w1)),
                        np.full(t1.size, float(w2)),
                    ]
                )
            )
        return np.vstack(blocks) if blocks else np.zeros((0, 4))
    raise ValueError(f"unknown sweep mode {spec.mode!r}")


def sweep(p: Params, spec: SweepSpec) -> SweepReport:
    """Classify and rank every sampled point; defects are recorded, not fatal."""
    pts = _sample_points(p, spec)
    n = pts.shape[0]
    m1, m2, r1, r2, g = p.as_tuple()
    strata: list[str] = []
    ranks = np.zeros(n, dtype=int)
    gdets = np.zeros(n)
    udets = np.zeros(n)
    sub_rank: list[RankReport] = []
    defects: list[str] = []
    family = scaled_family(p) if n else ()
    for i in range(n):
        z = pts[i]
        try:
            lm = kernels.leaf_matrix(m1, m2, r1, r2, g, z)
            st = stratum_from_fields(lm[0], lm[1], lm[2], lm[3], tol=spec.tol)
            strata.append(st.label)
            gdets[i] = st.gamma_det
            udets[i] = st.upsilon_det
            rank, _ = _svd_rank(lm, spec.tol)
            if rank < 4:
                depth = (
                    spec.depth_generic if st.label == "Generic" else spec.depth_strata
                )
                report = lie_rank(
                    family, z, depth=depth, tol=spec.tol, max_words=spec.max_words
                )
                rank = report.rank
                if rank < 4:
                    sub_rank.append(report)
            ranks[i] = rank
        except Exception as exc:  # per-point failures must not abort the sweep
            strata.append("Generic")
            ranks[i] = 0
            defects.append(f"point {i}: {type(exc).__name__}: {exc}")
    h = hamiltonian(p, pts) if n else np.zeros(0)
    return SweepReport(
        params=p,
        spec=spec,
        points=pts,
        strata=tuple(strata),
        ranks=ranks,
        gamma_dets=gdets,
        upsilon_dets=udets,
        hamiltonians=np.atleast_1d(h),
        sub_rank=tuple(sub_rank),
        defects=tuple(defects),
    )


def bracket_generating_verdict(report: SweepReport) -> dict:
    """SUPPORTED iff every sampled point reached rank 4.

    The verdict is sampled evidence over the report's points, never a proof.
    """
    if report.n_samples == 0:
        raise EmptyReport("verdict needs a non-empty sweep report")
    mask = report.ranks < 4
    counterexamples = [
        {
            "index": int(i),
            "point": report.points[i].tolist(),
            "rank": int(report.ranks[i]),
            "stratum": report.strata[i],
        }
        for i in np.flatnonzero(mask)
    ]
    return {
        "verdict": "SUPPORTED" if not counterexamples else "NOT_SUPPORTED",
        "evidence": "sampled evidence",
        "n_samples": report.n_samples,
        "rank4_fraction": report.rank4_fraction(),
        "counterexamples": counterexamples,
        "defects": list(report.defects),
    }


def _gamma_det_theta(p: Params, theta1: float, d: float) -> float:
    """gamma_det at (theta1, theta1 - d, 0, 0); it depends only on theta."""
    z = np.array([theta1, theta1 - d, 0.0, 0.0])
    gdet, _, _, _ = kernels.stratum_dets(p.m1, p.m2, p.r1, p.r2, p.g, z)
    return gdet


def find_gamma_points(
    p: Params,
    n: int = 10,
    theta1_values: Sequence[float] | None = None,
    grid: int = 720,
    bisect_steps: int = 80,
) -> list[np.ndarray]:
    """Find ``n`` points on Gamma by bisecting gamma_det along theta curves.

    The determinant of the (X2, X4) omega-components is a function of theta
    alone, so roots are located in the angle difference d = theta1 - theta2
    by a sign scan plus bisection at fixed theta1. The returned states carry
    omega perpendicular to b so the points are Gamma but not Sigma.
    """
    if theta1_values is None:
        theta1_values = np.linspace(-math.pi, math.pi, max(4, (n + 1)), endpoint=False)
    m1, m2, r1, r2, g = p.as_tuple()
    points: list[np.ndarray] = []
    for theta1 in theta1_values:
        theta1 = float(theta1)
        # scan d for sign changes of gamma_det(theta1, theta1 - d)
        ds = np.linspace(-math.pi, math.pi, grid + 1)
        vals = [_gamma_det_theta(p, theta1, float(d)) for d in ds]
        roots: list[float] = []
        for i in range(grid):
            a, b = float(ds[i]), float(ds[i + 1])
            fa, fb = vals[i], vals[i + 1]
            if fa == 0.0:
                roots.append(a)
                continue
            if fa * fb < 0.0:
                lo, hi, flo = a, b, fa
                for _ in range(bisect_steps):
                    mid = 0.5 * (lo + hi)
                    fm = _gamma_det_theta(p, theta1, mid)
                    if fm == 0.0:
                        lo = hi = mid
                        break
                    if flo * fm < 0.0:
                        hi = mid
                    else:
                        lo, flo = mid, fm
                roots.append(0.5 * (lo + hi))
        for d in roots:
            theta2 = wrap_angle(theta1 - d)
            zb = np.array([theta1, theta2, 0.0, 0.0])
            x2 = kernels.field_value(m1, m2, r1, r2, g, 2, zb)
            b1, b2 = x2[2], x2[3]
            nb = math.hypot(b1, b2)
            point = np.array([theta1, theta2, -b2 / nb, b1 / nb])
            points.append(point)
            if len(points) >= n:
                return points
    return points


def find_upsilon_points(p: Params, n: int = 10) -> list[np.ndarray]:
    """Points on Upsilon: omega parallel to b forces the theta-determinant to 0.

    The angle difference is kept away from the Gamma roots so the points are
    Upsilon but not Sigma.
    """
    m1, m2, r1, r2, g = p.as_tuple()
    out: list[np.ndarray] = []
    theta1_values = np.linspace(-math.pi, math.pi, n, endpoint=False)
    for theta1 in theta1_values:
        theta1 = float(theta1)
        theta2 = wrap_angle(theta1 - math.pi / 2.0)
        zb = np.array([theta1, theta2, 0.0, 0.0])
        x2 = kernels.field_value(m1, m2, r1, r2, g, 2, zb)
        b1, b2 = x2[2], x2[3]
        nb = math.hypot(b1, b2)
        out.append(np.array([theta1, theta2, b1 / nb, b2 / nb]))
        if len(out) >= n:
            break
    return out


def find_sigma_points(p: Params, n: int = 10) -> list[np.ndarray]:
    """Points on Sigma: equal angles kill X4, zero velocity kills Omega."""
    theta1_values = np.linspace(-math.pi, math.pi, n, endpoint=False)
    return [np.array([float(t), float(t), 0.0, 0.0]) for t in theta1_values]


@dataclass(frozen=True)
class EscapeCandidate:
    """Profile of |gamma_det| along one signed field flow from a Gamma point."""

    field_index: int
    sign: int
    times: np.ndarray
    gamma_dets: np.ndarray
    gamma_scales: np.ndarray
    labels: tuple[str, ...]
    escape_time: float | None
    truncated: bool  # flow stopped early (blow-up guard)


@dataclass(frozen=True)
class EscapeReport:
    """Outcome of the escape experiment from a point on Gamma or Sigma."""

    start: np.ndarray
    start_stratum: str
    horizon: float
    candidates: tuple[EscapeCandidate, ...]
    escaped: bool
    escape_time: float | None
    escape_field: int | None
    escape_sign: int | None
    no_escape_within_horizon: bool


def escape_test(
    p: Params,
    z0,
    fields: Sequence[int] = (2, 3),
    horizon: float = 1.0,
    steps: int = 200,
    tol: float = DEFAULT_RANK_TOL,
    bound: float = 1e6,
) -> EscapeReport:
    """Flow a Gamma point along +-X2 and +-X3, watching gamma_det.

    Reports the earliest time any candidate flow reclassifies the point off
    Gamma. A run with no escape is reported (no_escape_within_horizon), not
    raised: it is evidence to examine, not a crash.
    """
    arr = as_state(z0)
    start = classify_stratum(p, arr, tol=tol)
    if start.label not in ("Gamma", "Sigma"):
        raise ParameterMisuse(
            f"escape_test needs a start on Gamma or Sigma, got {start.label}"
        )
    m1, m2, r1, r2, g = p.as_tuple()
    candidates: list[EscapeCandidate] = []
    if horizon > 0.0 and steps > 0:
        dt = horizon / steps
        for k in fields:
            for sign in (1, -1):
                z = arr.copy()
                times = [0.0]
                gdets = [start.gamma_det]
                gscales = [start.gamma_scale]
                labels = [start.label]
                escape_time: float | None = None
                truncated = False
                for i in range(1, steps + 1):
                    z, ok = kernels.rk4_field_steps(
                        m1, m2, r1, r2, g, k, z, sign * dt, 1, bound
                    )
                    if not ok:
                        truncated = True
                        break
                    st = classify_stratum(p, z, tol=tol)
                    times.append(i * dt)
                    gdets.append(st.gamma_det)
                    gscales.append(st.gamma_scale)
                    labels.append(st.label)
                    if st.label not in ("Gamma", "Sigma"):
                        escape_time = i * dt
                        break
                candidates.append(
                    EscapeCandidate(
                        field_index=int(k),
                        sign=sign,
                        times=np.array(times),
                        gamma_dets=np.array(gdets),
                        gamma_scales=np.array(gscales),
                        labels=tuple(labels),
                        escape_time=escape_time,
                        truncated=truncated,
                    )
                )
    escaped = [c for c in candidates if c.escape_time is not None]
    best = min(escaped, key=lambda c: c.escape_time) if escaped else None
    return EscapeReport(
        start=arr,
        start_stratum=start.label,
        horizon=float(horizon),
        candidates=tuple(candidates),
        escaped=best is not None,
        escape_time=None if best is None else float(best.escape_time),
        escape_field=None if best is None else best.field_index,
        escape_sign=None if best is None else best.sign,
        no_escape_within_horizon=best is None,
    )
