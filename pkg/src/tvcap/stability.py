"""Circle-criterion stability verdicts for the first-order charge equations.

The charge equation dq/dt + k(t) q = f(t) with k(t) = 1/(R_eff C(t)) is a
linear time-varying feedback loop around the integrator 1/s. The integrator's
frequency locus fills the closed right half-plane, so the sufficient circle
test degenerates to geometry on the real axis: the critical disk spanned by
the modulation bounds must sit strictly in the open left half-plane, which
happens exactly when both bounds are positive. The test is sufficient only;
"not-proven-stable" is deliberately not "unstable".
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, PositivityError
from .modsynth import ModulationProfile

STABLE = "stable"
NOT_PROVEN = "not-proven-stable"


@dataclass(frozen=True)
class StabilityReport:
    """Bounds of the charge-equation coefficient and the resulting verdict.

    For positive bounds the critical circle has radius (1/a - 1/b)/2 and is
    centered at -1/b - radius on the real axis; its rightmost point is -1/b.
    When a bound is nonpositive the disk geometry is meaningless and the
    circle fields are NaN.
    """

    a: float
    b: float
    circle_center: float
    circle_radius: float
    verdict: str
    reason: str

    def as_dict(self) -> dict:
        return {
            "a_per_s": self.a,
            "b_per_s": self.b,
            "circle_center_s": self.circle_center,
            "circle_radius_s": self.circle_radius,
            "verdict": self.verdict,
            "reason": self.reason,
        }


@dataclass(frozen=True)
class TransientLaw:
    """Homogeneous solution amplitude*exp(rate*t) of the constant-C circuit."""

    amplitude: float
    rate: float

    @property
    def efolding_time(self) -> float:
        return 1.0 / abs(self.rate)

    @property
    def is_growing(self) -> bool:
        return self.rate > 0.0

    def value(self, t):
        return self.amplitude * np.exp(self.rate * np.asarray(t))


def parallel_resistance(r_s: float, r_c: float | None = None) -> float:
    """Effective resistance seen by the charge coefficient: R_s alone, or
    R_s || R_c when the capacitor carries a parallel loss resistor."""
    if r_c is None:
        return r_s
    return r_s * r_c / (r_s + r_c)


def modulation_bounds(profile: ModulationProfile, r_effective: float) -> tuple[float, float]:
    """Exact (min, max) of 1/(r_effective * C(t)) over the profile grid."""
    if not (np.isfinite(r_effective) and r_effective > 0.0):
        raise ParameterError(f"effective resistance must be positive, got {r_effective}")
    c = profile.capacitance.samples
    c_min = float(np.min(c))
    c_max = float(np.max(c))
    if c_min <= 0.0:
        raise PositivityError(
            f"profile is not strictly positive (min C = {c_min:g} F)")
    return 1.0 / (r_effective * c_max), 1.0 / (r_effective * c_min)


def circle_criterion(a: float, b: float) -> StabilityReport:
    """Sufficient stability test for bounds a <= b of the charge coefficient.

    Builds the critical disk over [-1/a, -1/b]; since the integrator locus
    occupies the closed right half-plane, the verdict is "stable" exactly
    when the disk lies strictly in the open left half-plane, i.e. when both
    bounds are positive.
    """
    if not (np.isfinite(a) and np.isfinite(b)):
        raise ParameterError("bounds must be finite")
    if a > b:
        raise ParameterError(f"unordered bounds: a={a} > b={b}")
    if a > 0.0:
        radius = 0.5 * (1.0 / a - 1.0 / b)
        center = -1.0 / b - radius
        # rightmost point of the disk is center + radius = -1/b < 0
        return StabilityReport(
            a=a, b=b, circle_center=center, circle_radius=radius,
            verdict=STABLE,
            reason="coefficient bounds positive; critical circle confined to "
                   "the open left half-plane, disjoint from the integrator "
                   "locus (sufficient test)")
    return StabilityReport(
        a=a, b=b, circle_center=math.nan, circle_radius=math.nan,
        verdict=NOT_PROVEN,
        reason="coefficient bounds are not both positive; the critical "
               "region meets the right half-plane and the sufficient test "
               "is inconclusive")


def analyze_profile(profile: ModulationProfile, r_effective: float) -> StabilityReport:
    """modulation_bounds + circle_criterion in one call."""
    a, b = modulation_bounds(profile, r_effective)
    return circle_criterion(a, b)


def ideal_nonfoster_transient(r: float, c0: float, amplitude: float = 1.0) -> TransientLaw:
    """Homogeneous law of the series R / constant-C circuit: rate -1/(R*C0).

    A negative C0 makes the rate positive: the transient grows exponentially
    with e-folding time |R*C0|.
    """
    if not (np.isfinite(r) and r > 0.0):
        raise ParameterError(f"resistance must be positive, got {r}")
    if not np.isfinite(c0) or c0 == 0.0:
        raise ParameterError("capacitance cannot be zero")
    return TransientLaw(amplitude=amplitude, rate=-1.0 / (r * c0))
