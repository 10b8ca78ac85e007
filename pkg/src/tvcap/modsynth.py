"""Synthesis of capacitance modulation profiles.

A time-varying capacitor carrying charge C(t)*v(t) reproduces the current of
a target one-port exactly when C(t) equals the target's running charge
divided by the voltage across it, plus a free constant over v(t). The free
constant is what makes the profile realizable: it is chosen here so the
profile never dips below a positivity margin.

All synthesis routines take the drive voltage as a sampled waveform. In the
default external-modulation mode that waveform is the analytically prescribed
steady-state voltage across the emulated element; a feedback variant instead
passes a low-pass-filtered measured voltage. Either way the formulas are the
same, only the provenance of v differs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

from .errors import ParameterError, PositivityError, UnitMismatchError, VoltageError
from .kernels import AdmittanceKernel, VolterraKernel2, convolve_first_order, convolve_second_order
from .signals import Waveform, cumulative_integral, require_same_grid

EXTERNAL = "external-steady-state"
FEEDBACK = "filtered-feedback"

_V_FLOOR_FRACTION = 1e-6


# --------------------------------------------------------------------------
# target element descriptions

@dataclass(frozen=True)
class Capacitance:
    c_eq: float

    def __post_init__(self):
        if not np.isfinite(self.c_eq):
            raise ParameterError("c_eq must be finite")


@dataclass(frozen=True)
class Resistance:
    r_eq: float

    def __post_init__(self):
        if not np.isfinite(self.r_eq) or self.r_eq == 0.0:
            raise ParameterError("r_eq must be finite and nonzero")


@dataclass(frozen=True)
class LossyInductance:
    """Series R_L + L_eq, emulated by a capacitor with parallel loss R_C."""

    l_eq: float
    r_l: float
    r_c: float

    def __post_init__(self):
        if not all(np.isfinite(x) for x in (self.l_eq, self.r_l, self.r_c)):
            raise ParameterError("lossy inductance parameters must be finite")
        if self.r_l == 0.0 or self.r_c == 0.0:
            raise ParameterError(
                "r_l and r_c cannot be zero (the synthesis divides by both)")


@dataclass(frozen=True)
class GeneralLTI:
    kernel: AdmittanceKernel


@dataclass(frozen=True)
class NonlinearElement:
    kernel: AdmittanceKernel
    kernel2: VolterraKernel2


TargetElement = Union[Capacitance, Resistance, LossyInductance, GeneralLTI, NonlinearElement]


@dataclass(frozen=True)
class ModulationProfile:
    """A synthesized capacitance profile with its provenance.

    positivity_margin records the actual grid minimum of the profile; when
    the free constant was auto-selected it equals the requested margin.
    """

    capacitance: Waveform
    constants: Mapping[str, float] = field(default_factory=dict)
    target: str = ""
    positivity_margin: float = 0.0
    voltage_source_mode: str = EXTERNAL

    def __post_init__(self):
        object.__setattr__(self, "constants", dict(self.constants))

    @property
    def c_min(self) -> float:
        return float(np.min(self.capacitance.samples))

    @property
    def c_max(self) -> float:
        return float(np.max(self.capacitance.samples))


# --------------------------------------------------------------------------
# helpers

def _check_voltage_nonzero(v: Waveform) -> None:
    floor = _V_FLOOR_FRACTION * float(np.max(np.abs(v.samples)))
    vmin = float(np.min(np.abs(v.samples)))
    if vmin < floor or vmin == 0.0:
        raise VoltageError(
            f"voltage passes through zero on the grid (min |v| = {vmin:g}); "
            "the synthesized profile would be singular")


def select_constant_for_positivity(raw: Waveform, v: Waveform, margin: float) -> float:
    """Smallest constant k such that min over the grid of (k/v + raw) equals
    margin. Requires a strictly one-signed voltage."""
    require_same_grid(raw, v)
    vs = v.samples
    if np.min(vs) > 0.0:
        return float(np.max(vs * (margin - raw.samples)))
    if np.max(vs) < 0.0:
        return float(np.min(vs * (margin - raw.samples)))
    raise VoltageError("voltage changes sign (or touches zero) on the grid; "
                       "no constant can bound the profile")


def _auto_margin(raw: np.ndarray) -> float:
    return 0.1 * abs(float(np.median(raw)))


def _finish(v: Waveform, raw: np.ndarray, constant, margin, name: str,
            target: str, extra_constants: Mapping[str, float] | None = None,
            mode: str = EXTERNAL, enforce_positive: bool = False) -> ModulationProfile:
    """Common tail of the synthesis routines: resolve the free constant,
    assemble C(t) = constant/v + raw, record metadata."""
    raw_wave = Waveform(v.t0, v.dt, raw, "F")
    if constant == "auto":
        margin = _auto_margin(raw) if margin is None else float(margin)
        constant = select_constant_for_positivity(raw_wave, v, margin)
        achieved = margin
    else:
        constant = float(constant)
        profile_min = float(np.min(constant / v.samples + raw))
        if enforce_positive and profile_min <= 0.0:
            raise PositivityError(
                f"{name}={constant:g} leaves the profile nonpositive "
                f"(min C = {profile_min:g} F)")
        achieved = profile_min
    samples = constant / v.samples + raw
    constants = {name: constant}
    if extra_constants:
        constants.update(extra_constants)
    return ModulationProfile(
        capacitance=Waveform(v.t0, v.dt, samples, "F"),
        constants=constants,
        target=target,
        positivity_margin=float(achieved),
        voltage_source_mode=mode,
    )


# --------------------------------------------------------------------------
# synthesis routines

def synth_capacitance(v: Waveform, c_eq: float, c1="auto",
                      margin: float | None = None, mode: str = EXTERNAL) -> ModulationProfile:
    """C(t) = c1/v(t) + c_eq emulates a static capacitance c_eq (any sign).

    With c1="auto" the constant is picked so min C(t) equals the margin
    (default 0.1*|c_eq|); a pinned c1 that leaves C(t) nonpositive raises
    PositivityError.
    """
    if not np.isfinite(c_eq):
        raise ParameterError("c_eq must be finite")
    _check_voltage_nonzero(v)
    if margin is None and c1 == "auto":
        margin = 0.1 * abs(c_eq)
    raw = np.full(len(v), float(c_eq))
    return _finish(v, raw, c1, margin, "c1", "capacitance",
                   mode=mode, enforce_positive=True)


def synth_resistance(v: Waveform, r_eq: float, c2="auto",
                     margin: float | None = None, mode: str = EXTERNAL) -> ModulationProfile:
    """C(t) = c2/v + (1/(r_eq*v)) * integral(v) emulates a resistance r_eq.

    Negative r_eq (gain) is legal; the running integral then drives the
    profile's envelope downward and the profile eventually crosses zero,
    which is left to the caller to manage (no positivity enforcement here).
    """
    if not np.isfinite(r_eq) or r_eq == 0.0:
        raise ParameterError("r_eq must be finite and nonzero")
    _check_voltage_nonzero(v)
    integral = cumulative_integral(v, 0.0).samples
    raw = integral / (r_eq * v.samples)
    return _finish(v, raw, c2, margin, "c2", "resistance", mode=mode)


def synth_inductance(v: Waveform, i: Waveform, l_eq: float, r_l: float, r_c: float,
                     c1="auto", c2=0.0, margin: float | None = None,
                     mode: str = EXTERNAL) -> ModulationProfile:
    """Profile emulating a series r_l + l_eq branch with a capacitor that has
    parallel loss r_c:

        C(t) = (c1/r_l + c2)/v - (l_eq/r_l)*(i/v) + (1/r_l - 1/r_c)*integral(v)/v

    Needs the branch current i as well as the voltage. Exactly one of c1/c2
    may be "auto"; the two integration constants act only through the lump
    c1/r_l + c2, so the auto pick resolves that lump and back-solves the
    free one.
    """
    if r_l == 0.0 or r_c == 0.0:
        raise ParameterError("r_l and r_c cannot be zero")
    if not all(np.isfinite(x) for x in (l_eq, r_l, r_c)):
        raise ParameterError("l_eq, r_l, r_c must be finite")
    require_same_grid(v, i)
    if i.unit and i.unit not in ("A", "A/m"):
        raise UnitMismatchError(f"current waveform has unit {i.unit!r}")
    _check_voltage_nonzero(v)
    integral = cumulative_integral(v, 0.0).samples
    raw = (-(l_eq / r_l) * i.samples + (1.0 / r_l - 1.0 / r_c) * integral) / v.samples
    if c1 == "auto" and c2 == "auto":
        c2 = 0.0
    if c1 == "auto":
        profile = _finish(v, raw, "auto", margin, "lump", "lossy-inductance", mode=mode)
        lump = profile.constants["lump"]
        c1 = (lump - float(c2)) * r_l
    elif c2 == "auto":
        profile = _finish(v, raw, "auto", margin, "lump", "lossy-inductance", mode=mode)
        lump = profile.constants["lump"]
        c2 = lump - float(c1) / r_l
    else:
        lump = float(c1) / r_l + float(c2)
        profile = _finish(v, raw, lump, margin, "lump", "lossy-inductance", mode=mode)
    return ModulationProfile(
        capacitance=profile.capacitance,
        constants={"c1": float(c1), "c2": float(c2), "lump": profile.constants["lump"]},
        target="lossy-inductance",
        positivity_margin=profile.positivity_margin,
        voltage_source_mode=mode,
    )


def _charge_from_kernel(v: Waveform, k: AdmittanceKernel,
                        k2: VolterraKernel2 | None):
    """Running charge of the kernel current, with the singular parts
    integrated analytically: the conductance contributes g0*integral(v), the
    derivative coupling contributes c0*v directly (its indefinite integral),
    and only the smooth/second-order tails are integrated numerically.

    Every running integral starts at the drive's own grid start (each tail
    current at its first available sample), so dropping a kernel part leaves
    the remaining charge contributions bit-identical on the common subgrid.
    """
    contributions = []
    start = 0
    if k.g0 != 0.0:
        contributions.append((0, k.g0 * cumulative_integral(v, 0.0).samples))
    if k.c0 != 0.0:
        contributions.append((0, k.c0 * v.samples))
    if k.smooth is not None:
        cur = convolve_first_order(AdmittanceKernel(smooth=k.smooth), v)
        offset = int(round((cur.t0 - v.t0) / v.dt))
        contributions.append((offset, cumulative_integral(cur, 0.0).samples))
        start = max(start, offset)
    if k2 is not None:
        cur2 = convolve_second_order(k2, v)
        offset = int(round((cur2.t0 - v.t0) / v.dt))
        contributions.append((offset, cumulative_integral(cur2, 0.0).samples))
        start = max(start, offset)
    v_sub = v.sliced(start)
    charge = np.zeros(len(v_sub))
    for offset, samples in contributions:
        charge += samples[start - offset:]
    return v_sub, charge


def synth_general(v: Waveform, k: AdmittanceKernel, beta="auto",
                  margin: float | None = None, mode: str = EXTERNAL) -> ModulationProfile:
    """C(t) = (beta + running charge of the kernel current) / v(t).

    Emulates any causal linear one-port given its admittance kernel. Reduces
    exactly to synth_capacitance for a pure derivative-coupling kernel
    (c1=beta) and to synth_resistance for a pure conductance kernel
    (c2=beta), because the singular parts are integrated analytically.
    """
    _check_voltage_nonzero(v)
    v_sub, charge = _charge_from_kernel(v, k, None)
    raw = charge / v_sub.samples
    return _finish(v_sub, raw, beta, margin, "beta", "general-lti", mode=mode)


def synth_nonlinear(v: Waveform, k1: AdmittanceKernel, k2: VolterraKernel2,
                    beta="auto", margin: float | None = None,
                    mode: str = EXTERNAL) -> ModulationProfile:
    """Like synth_general with an additional weakly nonlinear (second-order)
    kernel folded into the running charge."""
    _check_voltage_nonzero(v)
    v_sub, charge = _charge_from_kernel(v, k1, k2)
    raw = charge / v_sub.samples
    return _finish(v_sub, raw, beta, margin, "beta", "nonlinear", mode=mode)


def synth_for_target(v: Waveform, target: TargetElement, i: Waveform | None = None,
                     mode: str = EXTERNAL, **kwargs) -> ModulationProfile:
    """Dispatch to the element-specific synthesis routine."""
    if isinstance(target, Capacitance):
        return synth_capacitance(v, target.c_eq, mode=mode, **kwargs)
    if isinstance(target, Resistance):
        return synth_resistance(v, target.r_eq, mode=mode, **kwargs)
    if isinstance(target, LossyInductance):
        if i is None:
            raise ParameterError("lossy-inductance synthesis needs the branch current")
        return synth_inductance(v, i, target.l_eq, target.r_l, target.r_c,
                                mode=mode, **kwargs)
    if isinstance(target, GeneralLTI):
        return synth_general(v, target.kernel, mode=mode, **kwargs)
    if isinstance(target, NonlinearElement):
        return synth_nonlinear(v, target.kernel, target.kernel2, mode=mode, **kwargs)
    raise ParameterError(f"unknown target element {target!r}")
