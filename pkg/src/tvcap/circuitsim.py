"""Transient simulation of the driven time-varying-capacitor circuits.

Topology: a harmonic source behind a series resistance feeds either a
time-varying capacitor (optionally with a parallel loss resistor) or, for
reference, an ideal equivalent element. The time-varying branch integrates
the first-order charge equation with fixed-step classical RK4 on the profile
grid; the equivalent branch is evaluated analytically in steady state via
phasors and compared against the transient trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import backend
from .errors import GridError, ParameterError, PositivityError, WindowError
from .modsynth import Capacitance, LossyInductance, ModulationProfile, Resistance, TargetElement
from .signals import HarmonicSignal, Phasor, Waveform

_DIVERGENCE_FACTOR = 1e6


@dataclass(frozen=True)
class TimeVaryingCapBranch:
    profile: ModulationProfile
    r_parallel: float | None = None

    def __post_init__(self):
        if self.r_parallel is not None and not (
                np.isfinite(self.r_parallel) and self.r_parallel > 0):
            raise ParameterError(f"r_parallel must be positive, got {self.r_parallel}")


@dataclass(frozen=True)
class EquivalentBranch:
    target: TargetElement


@dataclass(frozen=True)
class CircuitSpec:
    source: HarmonicSignal
    r_s: float
    branch: Union[TimeVaryingCapBranch, EquivalentBranch]

    def __post_init__(self):
        if not (np.isfinite(self.r_s) and self.r_s > 0):
            raise ParameterError(f"source resistance must be positive, got {self.r_s}")


@dataclass(frozen=True)
class SimulationTrace:
    """Charge, capacitor voltage and branch current on the simulation grid.

    All samples are finite; when the run diverged the trace is truncated at
    the first threshold crossing and t_diverged records that time.
    """

    q: Waveform
    v_cap: Waveform
    i: Waveform
    diverged: bool = False
    t_diverged: float | None = None

    @property
    def t0(self) -> float:
        return self.q.t0

    @property
    def dt(self) -> float:
        return self.q.dt


@dataclass(frozen=True)
class SteadyState:
    """Analytic steady-state of the equivalent-element circuit."""

    i_dc: float
    i_ac: Phasor
    v_elem_dc: float
    v_elem_ac: Phasor

    def current_samples(self, t) -> np.ndarray:
        return self.i_dc + self.i_ac.value(t)

    def element_voltage(self, t0: float, dt: float, n: int) -> Waveform:
        t = t0 + dt * np.arange(n)
        return Waveform(t0, dt, self.v_elem_dc + self.v_elem_ac.value(t), "V")

    def element_current(self, t0: float, dt: float, n: int) -> Waveform:
        t = t0 + dt * np.arange(n)
        return Waveform(t0, dt, self.current_samples(t), "A")


@dataclass(frozen=True)
class EmulationReport:
    """Relative RMS mismatch between a trace and its steady-state reference."""

    rel_rms_error: float
    period_errors: tuple
    window: tuple


def _half_grid(samples: np.ndarray) -> np.ndarray:
    """Interleave samples with their midpoints: out[2k]=s[k],
    out[2k+1]=(s[k]+s[k+1])/2."""
    n = samples.size
    out = np.empty(2 * n - 1)
    out[0::2] = samples
    out[1::2] = 0.5 * (samples[:-1] + samples[1:])
    return out


def simulate_tvc(spec: CircuitSpec, t_end: float, q0: float | None = None) -> SimulationTrace:
    """Integrate the charge equation of the time-varying branch up to t_end.

    dq/dt = v_s/R_s - q * g/(R_s*C(t)) with g = 1 + R_s/R_parallel (g = 1
    without the loss resistor). C(t) is taken from the profile, linearly
    interpolated at the RK4 half steps. The default initial charge puts the
    capacitor at the DC operating point; pass q0 explicitly for a zero start
    (to exhibit the switch-on transient) or an exact steady-state start.

    A run whose |q| exceeds 1e6 times the source-driven charge scale is
    truncated and flagged as diverged instead of aborting.
    """
    if not isinstance(spec.branch, TimeVaryingCapBranch):
        raise ParameterError("simulate_tvc needs a time-varying capacitor branch")
    profile = spec.branch.profile.capacitance
    dt = profile.dt
    n_steps = int(round((t_end - profile.t0) / dt))
    if n_steps < 2:
        raise GridError("simulation span must cover at least 2 steps")
    if n_steps > len(profile) - 1:
        raise GridError(f"t_end={t_end} exceeds the profile span "
                        f"(ends at {profile.t_end})")
    c = profile.samples[:n_steps + 1]
    # A strictly negative constant profile is legal (instability studies);
    # what must never happen is C passing through zero on the grid.
    if np.min(c) <= 0.0 <= np.max(c) or np.min(np.abs(c)) == 0.0:
        raise PositivityError("profile is not one-signed away from zero on the grid")

    r_s = spec.r_s
    r_c = spec.branch.r_parallel
    g_scale = 1.0 + (r_s / r_c if r_c is not None else 0.0)

    c_half = _half_grid(c)
    t_half = profile.t0 + 0.5 * dt * np.arange(2 * n_steps + 1)
    vs_half = spec.source.value(t_half)
    a_half = g_scale / (r_s * c_half)
    b_half = vs_half / r_s

    if q0 is None:
        divider = r_c / (r_s + r_c) if r_c is not None else 1.0
        q0 = float(c[0] * spec.source.v_dc * divider)

    scale = max(float(np.max(np.abs(c)) * np.max(np.abs(vs_half))), abs(q0), 1e-30)
    q, div_idx = backend.rk4_charge(a_half, b_half, float(q0), dt,
                                    _DIVERGENCE_FACTOR * scale)

    diverged = div_idx >= 0
    t_div = None
    if diverged:
        t_div = profile.t0 + div_idx * dt
        stop = div_idx
        while stop >= 1 and not np.isfinite(q[stop]):
            stop -= 1
        stop = max(stop, 1)
        q = q[:stop + 1]
        c = c[:stop + 1]

    t0 = profile.t0
    vs = vs_half[0::2][:q.size]
    v_cap = q / c
    i = (vs - v_cap) / r_s
    return SimulationTrace(
        q=Waveform(t0, dt, q, "C"),
        v_cap=Waveform(t0, dt, v_cap, "V"),
        i=Waveform(t0, dt, i, "A"),
        diverged=diverged,
        t_diverged=t_div,
    )


def equivalent_steady_state(spec: CircuitSpec, omega: float) -> SteadyState:
    """Phasor solution of the source + R_s + equivalent-element divider.

    Supports static capacitance, resistance and lossy inductance; kernel
    targets have no single-tone phasor and are rejected.
    """
    if not isinstance(spec.branch, EquivalentBranch):
        raise ParameterError("equivalent_steady_state needs an equivalent branch")
    target = spec.branch.target
    if isinstance(target, Capacitance):
        if target.c_eq == 0.0:
            raise ParameterError("equivalent capacitance cannot be zero")
        z = 1.0 / (1j * omega * target.c_eq)
        r_dc = math.inf
    elif isinstance(target, Resistance):
        z = complex(target.r_eq)
        r_dc = target.r_eq
    elif isinstance(target, LossyInductance):
        z = target.r_l + 1j * omega * target.l_eq
        r_dc = target.r_l
    else:
        raise ParameterError(
            f"unsupported target for phasor analysis: {type(target).__name__}")

    src = spec.source
    v_ac = src.v_ac * complex(math.cos(src.phi), math.sin(src.phi))
    i_ac = v_ac / (spec.r_s + z)
    v_elem_ac = i_ac * z
    i_dc = 0.0 if math.isinf(r_dc) else src.v_dc / (spec.r_s + r_dc)
    v_elem_dc = src.v_dc - i_dc * spec.r_s
    return SteadyState(
        i_dc=float(i_dc),
        i_ac=Phasor.from_complex(i_ac, omega),
        v_elem_dc=float(v_elem_dc),
        v_elem_ac=Phasor.from_complex(v_elem_ac, omega),
    )


def steady_state_charge(profile: ModulationProfile, reference: SteadyState) -> float:
    """Initial charge that starts the trace exactly on the steady-state
    solution: q(0) = C(0) * v_elem(0)."""
    c0 = float(profile.capacitance.samples[0])
    t0 = profile.capacitance.t0
    v0 = reference.v_elem_dc + float(reference.v_elem_ac.value(t0))
    return c0 * v0


def compare_emulation(trace: SimulationTrace, reference: SteadyState,
                      settle: float) -> EmulationReport:
    """Relative RMS error between the simulated branch current and the
    reconstructed steady-state reference, over whole periods after settle."""
    omega = reference.i_ac.omega
    period = 2.0 * math.pi / omega
    i0 = max(0, int(math.ceil((trace.t0 + settle - trace.i.t0) / trace.dt - 1e-9)))
    span = (len(trace.i) - 1 - i0) * trace.dt
    n_periods = int(math.floor(span / period + 1e-9))
    if n_periods < 3:
        raise WindowError(
            f"trace covers {span / period:.2f} periods after settle, need >= 3")
    per = int(round(period / trace.dt))
    idx = np.arange(i0, i0 + n_periods * per)
    t = trace.i.t0 + trace.dt * idx
    i_ref = reference.current_samples(t)
    i_sim = trace.i.samples[idx]
    ref_rms = float(np.sqrt(np.mean(i_ref ** 2)))
    if ref_rms == 0.0:
        raise ParameterError("reference current is identically zero")
    err = i_sim - i_ref
    rel = float(np.sqrt(np.mean(err ** 2))) / ref_rms
    period_errors = tuple(
        float(np.sqrt(np.mean(err[k * per:(k + 1) * per] ** 2))
              / np.sqrt(np.mean(i_ref[k * per:(k + 1) * per] ** 2)))
        for k in range(n_periods))
    window = (float(t[0]), float(t[-1] + trace.dt))
    return EmulationReport(rel, period_errors, window)
