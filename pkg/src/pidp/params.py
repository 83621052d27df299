"""Physical parameters and the admissibility check.

The model has five constants: bob masses m1, m2, beam lengths r1, r2, and
gravitational acceleration g, all strictly positive. Controllability of the
system additionally requires the mass ratio m1/m2 to avoid three degenerate
algebraic surfaces in the lengths; ``validate_params`` enforces both.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import AdmissibilityViolation, NonPositiveParameter

#: Relative tolerance for the three ratio conditions. Exact equality is
#: measure-zero, so a tolerance is what makes the check meaningful in floats.
ADMISSIBILITY_RTOL = 1e-10


@dataclass(frozen=True)
class Params:
    """The five physical constants (SI units)."""

    m1: float
    m2: float
    r1: float
    r2: float
    g: float

    def as_tuple(self):
        return (self.m1, self.m2, self.r1, self.r2, self.g)


@dataclass(frozen=True)
class AdmissibleParams(Params):
    """Params that passed positivity and all three ratio conditions.

    Only ``validate_params`` should construct this.
    """


def _ratio_condition_sides(p: Params, condition: int):
    """Both sides of ratio condition 1, 2 or 3 in cross-multiplied form.

    The conditions exclude m1/m2 == r1(r1+r2) / (r2^2 - r1(r1+r2)) (1),
    the same with r1-r2 (2), and m1/m2 == (r2^2 - r1^2)/r1^2 (3).
    Cross-multiplying avoids dividing by denominators that may vanish; a
    zero denominator with nonzero numerator can never satisfy the
    relative-equality test below, which makes such conditions vacuously
    satisfied, as intended.
    """
    m1, m2, r1, r2 = p.m1, p.m2, p.r1, p.r2
    if condition == 1:
        num = r1 * (r1 + r2)
        return m1 * (r2 * r2 - num), m2 * num
    if condition == 2:
        num = r1 * (r1 - r2)
        return m1 * (r2 * r2 - num), m2 * num
    if condition == 3:
        return m1 * (r1 * r1), m2 * (r2 * r2 - r1 * r1)
    raise ValueError(f"unknown condition {condition}")


def validate_params(p: Params, rtol: float = ADMISSIBILITY_RTOL) -> AdmissibleParams:
    """Check positivity and the three ratio conditions.

    Returns an ``AdmissibleParams`` wrapper on success. Raises
    ``NonPositiveParameter`` if any constant is not strictly positive and
    ``AdmissibilityViolation`` naming the violated condition otherwise.
    """
    for name in ("m1", "m2", "r1", "r2", "g"):
        value = getattr(p, name)
        if not (value > 0.0) or value != value or value == float("inf"):
            raise NonPositiveParameter(f"{name} must be strictly positive, got {value!r}")
    for condition in (1, 2, 3):
        lhs, rhs = _ratio_condition_sides(p, condition)
        if abs(lhs - rhs) <= rtol * max(abs(lhs), abs(rhs)):
            raise AdmissibilityViolation(condition, lhs, rhs)
    return AdmissibleParams(p.m1, p.m2, p.r1, p.r2, p.g)


def params_from_json(doc) -> Params:
    """Build ``Params`` from a mapping with keys m1, m2, r1, r2, g."""
    missing = [k for k in ("m1", "m2", "r1", "r2", "g") if k not in doc]
    if missing:
        raise KeyError(f"missing parameter keys: {missing}")
    extra = [k for k in doc if k not in ("m1", "m2", "r1", "r2", "g")]
    if extra:
        raise KeyError(f"unknown parameter keys: {extra}")
    return Params(*(float(doc[k]) for k in ("m1", "m2", "r1", "r2", "g")))
