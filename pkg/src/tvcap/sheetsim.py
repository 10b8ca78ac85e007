"""Electromagnetic verification of the invisible time-modulated sensor.

Two models of the same device:

* a zero-thickness sheet model, exact for the equivalent circuit: the total
  tangential field at the sheet obeys a first-order charge equation with the
  free-space wave impedance acting as the source resistance, integrated with
  the same RK4 kernel as the lumped circuits;
* a 1-D FDTD model with finite-thickness dielectric slabs, one of which has
  its permittivity modulated in time, and a lumped conductance plane between
  the slabs.

The device is a static sheet capacitance in parallel with a sheet resistance;
a time-varying capacitance laid on top carries two modulation components, one
cancelling the static capacitance and one emulating the negated resistance,
so the net induced sheet current vanishes and the structure stops scattering
while the resistive layer keeps absorbing (and the modulated layer keeps
regenerating) power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import backend
from .constants import C0, ETA0
from .errors import (GridError, ParameterError, PositivityError, WindowError)
from .modsynth import synth_resistance
from .signals import HarmonicSignal, Waveform, derivative, sample

_VARIANTS = ("two-patch-arrays", "patches-on-substrate", "two-dielectric-slabs")
_DIVERGENCE_FACTOR = 1e6


@dataclass(frozen=True)
class PlaneWaveSource:
    """Normally incident plane wave E_in(t) = e_dc + e0*sin(omega*t), V/m.

    The DC bias keeps the total field away from zero so it can serve as the
    denominator of the modulation functions (e_dc > e0 required).
    """

    e_dc: float
    e0: float
    omega: float

    def __post_init__(self):
        if not (np.isfinite(self.omega) and self.omega > 0):
            raise ParameterError(f"omega must be positive, got {self.omega}")
        if not (self.e_dc > self.e0 >= 0.0):
            raise ParameterError(
                f"need e_dc > e0 >= 0 for a nonvanishing field, got "
                f"e_dc={self.e_dc}, e0={self.e0}")

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega

    @property
    def wavelength(self) -> float:
        return 2.0 * math.pi * C0 / self.omega

    def as_harmonic(self) -> HarmonicSignal:
        # sin(x) = cos(x - pi/2)
        return HarmonicSignal(self.e_dc, self.e0, self.omega, -0.5 * math.pi)

    def value(self, t):
        return self.e_dc + self.e0 * np.sin(self.omega * np.asarray(t))


@dataclass(frozen=True)
class SensorModulation:
    """The two modulation components of the sensor's time-varying layer.

    c_c cancels the static sheet capacitance; c_r emulates the negated sheet
    resistance and decays linearly, so the layer capacitance c_c + c_r
    eventually crosses zero: stop_time is the first grid time where it would,
    and simulations must end before it.
    """

    c_c: Waveform
    c_r: Waveform
    c1: float
    c2: float
    stop_time: float

    def layer_capacitance(self) -> Waveform:
        return Waveform(self.c_c.t0, self.c_c.dt,
                        self.c_c.samples + self.c_r.samples, "F")


@dataclass(frozen=True)
class SheetSpec:
    """One realization of the sensor.

    Variants: "two-patch-arrays" (capacitive sheets only),
    "patches-on-substrate" (static sheet realized as a thin dielectric
    substrate), "two-dielectric-slabs" (both layers realized as thin slabs;
    the one the FDTD model simulates directly). The substrate/slab variants
    must satisfy the thin-sheet equivalence (eps_r - 1)*d/(eta0*c0) = c0_sheet
    to 0.1% and d <= lambda/100.
    """

    variant: str
    c0_sheet: float
    r0: float | None
    source: PlaneWaveSource
    modulation: SensorModulation | None = None
    d: float | None = None
    eps_r: float | None = None

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise ParameterError(f"unknown variant {self.variant!r}; "
                                 f"expected one of {_VARIANTS}")
        if not (np.isfinite(self.c0_sheet) and self.c0_sheet >= 0):
            raise ParameterError("static sheet capacitance must be >= 0")
        if self.r0 is not None and not (np.isfinite(self.r0) and self.r0 > 0):
            raise ParameterError("sheet resistance must be positive (or None)")
        if self.variant != "two-patch-arrays":
            if self.d is None or self.eps_r is None:
                raise ParameterError(
                    f"variant {self.variant!r} needs slab thickness d and eps_r")
            c_eff = (self.eps_r - 1.0) * self.d / (ETA0 * C0)
            if abs(c_eff - self.c0_sheet) > 1e-3 * self.c0_sheet:
                raise ParameterError(
                    f"slab equivalence violated: (eps_r-1)*d/(eta0*c0) = "
                    f"{c_eff:.6g} F vs sheet capacitance {self.c0_sheet:.6g} F")
            if self.d > self.source.wavelength / 100.0:
                raise ParameterError(
                    f"slab too thick: d={self.d:g} m exceeds lambda/100")


@dataclass(frozen=True)
class FieldProbeRecord:
    """Fields at the two probes plus per-layer sheet currents and powers.

    All waveforms use the sheet clock: time zero is when the incident wave
    front reaches the sheet plane, so sheet-model and FDTD records align.
    Probe traces carry the raw propagation delay; the matching incident
    waveforms are provided at the same points for delay-free comparison.
    """

    e_above: Waveform
    e_below: Waveform
    e_inc_above: Waveform
    e_inc_below: Waveform
    e_sheet: Waveform
    j_layers: Mapping[str, Waveform]
    p_layers: Mapping[str, Waveform]
    source: PlaneWaveSource
    modulation_on: bool
    probe_distance: float
    model: str
    diverged: bool = False
    t_diverged: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "j_layers", dict(self.j_layers))
        object.__setattr__(self, "p_layers", dict(self.p_layers))


@dataclass(frozen=True)
class PowerReport:
    """Time-averaged per-layer powers and the flux bookkeeping, W/m^2."""

    p_static: float
    p_modulated: float
    net: float
    s_incident: float
    s_reflected: float
    s_transmitted: float

    @property
    def balance_error(self) -> float:
        """Residual of incident = reflected + transmitted + absorbed."""
        return self.s_incident - self.s_reflected - self.s_transmitted - self.net

    def as_dict(self) -> dict:
        return {
            "p_static_W_per_m2": self.p_static,
            "p_modulated_W_per_m2": self.p_modulated,
            "net_W_per_m2": self.net,
            "s_incident_W_per_m2": self.s_incident,
            "s_reflected_W_per_m2": self.s_reflected,
            "s_transmitted_W_per_m2": self.s_transmitted,
            "balance_error_W_per_m2": self.balance_error,
        }


# --------------------------------------------------------------------------
# modulation synthesis

def synth_sensor_modulation(source: PlaneWaveSource, c0_sheet: float,
                            r0: float | None, c1: float | None = None,
                            c2: float | None = None, periods: int | None = None,
                            samples_per_period: int = 2000) -> SensorModulation:
    """Build the two modulation components from the incident field.

    Defaults follow the sensor design point: c1 = 7*c0_sheet (per V/m of
    field) and c2 = 14*c1. The capacitive component is c1/E_in - c0_sheet,
    periodic and positive for the default c1; the resistive component comes
    from the resistance synthesis rule with target -r0 and decays linearly.
    With r0=None (negligible absorption) the resistive component is zero and
    the modulation never expires.
    """
    if not c0_sheet > 0:
        raise ParameterError("modulation synthesis needs a positive sheet "
                             "capacitance")
    if c1 is None:
        c1 = 7.0 * c0_sheet
    if c2 is None:
        c2 = 14.0 * c1
    t_period = source.period
    if periods is None:
        if r0 is not None:
            stop_estimate = (c1 + c2) * r0 / source.e_dc
            periods = int(math.ceil(stop_estimate / t_period)) + 2
        else:
            periods = 12
    dt = t_period / samples_per_period
    n = periods * samples_per_period + 1
    e_in = sample(source.as_harmonic(), 0.0, dt, n, unit="V/m")

    c_c = Waveform(0.0, dt, c1 / e_in.samples - c0_sheet, "F")
    if r0 is not None:
        c_r = synth_resistance(e_in, -r0, c2).capacitance
    else:
        c_r = Waveform(0.0, dt, np.zeros(n), "F")
        c2 = 0.0

    layer = c_c.samples + c_r.samples
    below = np.flatnonzero(layer <= 0.0)
    stop_time = float(below[0] * dt) if below.size else math.inf
    return SensorModulation(c_c=c_c, c_r=c_r, c1=float(c1), c2=float(c2),
                            stop_time=stop_time)


# --------------------------------------------------------------------------
# analytic oracles

def static_sheet_coefficients(c0_sheet: float, r0: float | None, omega: float):
    """(reflection, transmission) phasor coefficients of the static sheet."""
    y = 1j * omega * c0_sheet + (1.0 / r0 if r0 is not None else 0.0)
    load = 0.5 * ETA0 * y
    tau = 1.0 / (1.0 + load)
    gamma = -load / (1.0 + load)
    return gamma, tau


# --------------------------------------------------------------------------
# zero-thickness sheet model

def simulate_sheet(spec: SheetSpec, t_end: float, modulation_on: bool,
                   samples_per_period: int = 2000) -> FieldProbeRecord:
    """Integrate the sheet boundary equation and record probe fields.

    The total tangential field E at the sheet satisfies
    E = E_in - (eta0/2) * (d/dt[C_tot(t) E] + E/R0): the same first-order
    charge equation as the lumped circuits with source resistance eta0/2 and
    parallel loss R0, integrated in the charge variable psi = C_tot*E. Probe
    fields at +/- one probe distance are the delayed sheet quantities; with
    the exact modulation the induced sheet current vanishes and both probes
    see the incident field unchanged.
    """
    t_period = spec.source.period
    dt = t_period / samples_per_period
    n_steps = int(round(t_end / dt))
    if n_steps < 2:
        raise GridError("simulation span must cover at least 2 steps")
    t_grid = dt * np.arange(n_steps + 1)

    if modulation_on:
        if spec.modulation is None:
            raise ParameterError("modulation_on requires a synthesized modulation")
        if t_end >= spec.modulation.stop_time:
            raise PositivityError(
                f"t_end={t_end:g} s reaches the modulation stop time "
                f"{spec.modulation.stop_time:g} s (layer capacitance would "
                "cross zero)")
        layer = spec.modulation.layer_capacitance()
        if t_end > layer.t_end + 1e-9 * dt:
            raise GridError("modulation profile does not cover the simulation span")
        layer_c = np.interp(t_grid, layer.times, layer.samples)
        c_c = np.interp(t_grid, layer.times, spec.modulation.c_c.samples)
        c_r = np.interp(t_grid, layer.times, spec.modulation.c_r.samples)
    else:
        layer_c = np.zeros(n_steps + 1)
        c_c = c_r = layer_c
    c_tot = spec.c0_sheet + layer_c

    r_s = 0.5 * ETA0
    g_scale = 1.0 + (r_s / spec.r0 if spec.r0 is not None else 0.0)
    e_in = spec.source.value(t_grid)

    if np.max(np.abs(c_tot)) == 0.0:
        # capacitance-free sheet: the boundary relation is algebraic, the
        # field responds instantaneously (free space when R0 is absent too)
        e_sheet = e_in / g_scale
        return _assemble_sheet_record(spec, dt, n_steps, t_grid, e_in,
                                      e_sheet, c_c, c_r, modulation_on,
                                      diverged=False, t_div=None)

    c_half = np.empty(2 * n_steps + 1)
    c_half[0::2] = c_tot
    c_half[1::2] = 0.5 * (c_tot[:-1] + c_tot[1:])
    t_half = 0.5 * dt * np.arange(2 * n_steps + 1)
    vs_half = spec.source.value(t_half)
    a_half = g_scale / (r_s * c_half)
    b_half = vs_half / r_s

    if modulation_on:
        psi0 = c_tot[0] * e_in[0]
    else:
        gamma, tau = static_sheet_coefficients(spec.c0_sheet, spec.r0,
                                               spec.source.omega)
        e_dc_sheet = spec.source.e_dc / (
            1.0 + (0.5 * ETA0 / spec.r0 if spec.r0 is not None else 0.0))
        e0_complex = tau * (-1j * spec.source.e0)
        psi0 = c_tot[0] * (e_dc_sheet + e0_complex.real)

    scale = max(float(np.max(c_tot) * np.max(np.abs(e_in))), abs(psi0), 1e-30)
    psi, div_idx = backend.rk4_charge(a_half, b_half, float(psi0), dt,
                                      _DIVERGENCE_FACTOR * scale)
    diverged = div_idx >= 0
    t_div = None
    if diverged:
        t_div = div_idx * dt
        stop = div_idx
        while stop >= 1 and not np.isfinite(psi[stop]):
            stop -= 1
        n_steps = max(stop, 1)
        psi = psi[:n_steps + 1]
        t_grid = t_grid[:n_steps + 1]
        c_tot = c_tot[:n_steps + 1]
        c_c = c_c[:n_steps + 1]
        c_r = c_r[:n_steps + 1]
        e_in = e_in[:n_steps + 1]

    e_sheet = psi / c_tot
    return _assemble_sheet_record(spec, dt, n_steps, t_grid, e_in, e_sheet,
                                  c_c, c_r, modulation_on, diverged, t_div)


def _assemble_sheet_record(spec: SheetSpec, dt: float, n_steps: int,
                           t_grid: np.ndarray, e_in: np.ndarray,
                           e_sheet: np.ndarray, c_c: np.ndarray,
                           c_r: np.ndarray, modulation_on: bool,
                           diverged: bool, t_div: float | None) -> FieldProbeRecord:
    j_total = (2.0 / ETA0) * (e_in - e_sheet)

    e_wave = Waveform(0.0, dt, e_sheet, "V/m")
    j_static = spec.c0_sheet * derivative(e_wave).samples
    if spec.r0 is not None:
        j_static = j_static + e_sheet / spec.r0
    if modulation_on:
        layer_charge = Waveform(0.0, dt, (c_c + c_r) * e_sheet, "C/m")
        j_tv = derivative(layer_charge).samples
    else:
        j_tv = np.zeros(n_steps + 1)

    probe_distance = spec.source.wavelength
    n_d = int(round(probe_distance / (C0 * dt)))
    if n_steps - n_d < 1:
        raise WindowError("t_end shorter than the probe transit time")
    t_rec = t_grid[n_d:]
    delay = n_d * dt
    e_below = e_sheet[:n_steps + 1 - n_d]
    e_inc_below = e_in[:n_steps + 1 - n_d]
    e_inc_above = spec.source.value(t_rec + delay)
    e_above = e_inc_above + (e_sheet - e_in)[:n_steps + 1 - n_d]

    return FieldProbeRecord(
        e_above=Waveform(delay, dt, e_above, "V/m"),
        e_below=Waveform(delay, dt, e_below, "V/m"),
        e_inc_above=Waveform(delay, dt, e_inc_above, "V/m"),
        e_inc_below=Waveform(delay, dt, e_inc_below, "V/m"),
        e_sheet=Waveform(0.0, dt, e_sheet, "V/m"),
        j_layers={
            "static": Waveform(0.0, dt, j_static, "A/m"),
            "modulated": Waveform(0.0, dt, j_tv, "A/m"),
            "total": Waveform(0.0, dt, j_total, "A/m"),
        },
        p_layers={
            "static": Waveform(0.0, dt, e_sheet * j_static, "W/m^2"),
            "modulated": Waveform(0.0, dt, e_sheet * j_tv, "W/m^2"),
        },
        source=spec.source,
        modulation_on=modulation_on,
        probe_distance=probe_distance,
        model="sheet",
        diverged=diverged,
        t_diverged=t_div,
    )


# --------------------------------------------------------------------------
# finite-thickness FDTD model

def _ramp(u: np.ndarray, t_ramp: float) -> np.ndarray:
    r = np.clip(u / t_ramp, 0.0, 1.0)
    return 0.5 * (1.0 - np.cos(math.pi * r))


def _steady_fields(spec: SheetSpec, n_nodes: int, src_idx: int, sheet_idx: int,
                   tv_start: int, tv_end: int, dx: float, dt: float,
                   incident, modulation_on: bool):
    """First-order steady fields of the invisible operating point.

    E equals the incident wave everywhere in the total-field region (the
    layers are thin and the net sheet current vanishes); H equals the
    incident wave plus the running sum of the per-layer currents crossed so
    far, each distributed uniformly over its slab's cells.
    """
    idx = np.arange(n_nodes)
    ez0 = np.where(idx >= src_idx,
                   incident(-(idx - src_idx) * dx / C0), 0.0)

    cells = tv_end - tv_start
    e_sheet0 = spec.source.e_dc  # sin tone is zero at the sheet clock origin
    de_sheet0 = spec.source.e0 * spec.source.omega
    j_c0 = spec.c0_sheet * de_sheet0
    j_r = e_sheet0 / spec.r0 if spec.r0 is not None else 0.0
    if modulation_on and spec.modulation is not None:
        layer = spec.modulation.layer_capacitance()
        prod = layer.samples * spec.source.value(layer.times)
        j_tv = float(np.gradient(prod, layer.dt, edge_order=2)[0])
    else:
        j_tv = 0.0

    hi = np.arange(n_nodes - 1)
    hy0 = np.where(hi >= src_idx,
                   -incident(-0.5 * dt - (hi + 0.5 - src_idx) * dx / C0) / ETA0,
                   0.0)
    n_tv = np.clip(hi - tv_start + 1, 0, cells)
    n_st = np.clip(hi - sheet_idx + 1, 0, cells)
    hy0 = hy0 + (j_tv * n_tv / cells + j_c0 * n_st / cells
                 + j_r * (hi >= sheet_idx))
    return ez0, hy0


def simulate_fdtd(spec: SheetSpec, t_end: float, modulation_on: bool,
                  cells_per_slab: int = 20, courant: float = 1.0,
                  ramp_periods: float = 2.0,
                  warm_start: bool | None = None) -> FieldProbeRecord:
    """1-D FDTD of the two-slab realization with a conductance plane between.

    The modulated slab converts the layer capacitance into a time-varying
    relative permittivity eps(t) = C_layer(t)*eta0*c0/d + 1. The incident
    wave (DC bias plus tone) enters through a total-field/scattered-field
    plane; at the default Courant number 1 the vacuum grid propagates it
    exactly. Probe records are re-timed to the sheet clock (time zero = the
    incident phase reference at the sheet) so they compare directly against
    simulate_sheet output. t_end is the sheet-clock duration.

    Start modes: a static run turns the source on with a raised-cosine ramp
    and relaxes within a fraction of a period. A modulated run instead warm
    starts from the invisible operating point (grid pre-filled with the
    incident wave, layer currents seeded to their steady values), because
    the resistive modulation component starts large and makes the sheet
    relaxation so slow that a ramped start could not settle before the
    modulation expires.
    """
    if spec.variant != "two-dielectric-slabs":
        raise ParameterError("FDTD model needs the two-dielectric-slabs variant")
    if cells_per_slab < 20:
        raise GridError(f"grid too coarse: {cells_per_slab} cells per slab, "
                        "need >= 20")
    if not (0.0 < courant <= 1.0):
        raise GridError(f"Courant factor must be in (0, 1], got {courant}")
    if warm_start is None:
        warm_start = modulation_on

    lam = spec.source.wavelength
    t_period = spec.source.period
    dx = spec.d / cells_per_slab
    dt = courant * dx / C0

    pad = int(round(0.25 * lam / dx))
    n_lam = int(round(lam / dx))
    src_idx = pad
    probe_above = src_idx + pad
    sheet_idx = probe_above + n_lam
    tv_start = sheet_idx - cells_per_slab
    tv_end = sheet_idx
    probe_below = sheet_idx + n_lam
    n_nodes = probe_below + pad + 1

    eps_r = np.ones(n_nodes)
    eps_r[sheet_idx:sheet_idx + cells_per_slab] = spec.eps_r
    sheet_g = 1.0 / spec.r0 if spec.r0 is not None else 0.0

    t_geo = (sheet_idx - src_idx) * dx / C0
    t_exit = (probe_below - sheet_idx) * dx / C0
    if warm_start:
        # sheet clock == global clock: the wave is already everywhere and the
        # source phase is advanced so the sheet sees e_dc + e0*sin(omega*t)
        t_arr = 0.0
        phase_lead = t_geo
        t_ramp = 0.0
    else:
        t_arr = t_geo
        phase_lead = 0.0
        t_ramp = ramp_periods * t_period
    n_steps = int(math.ceil((t_arr + t_end + t_exit) / dt))
    step_t = dt * np.arange(n_steps + 1)

    def incident(u: np.ndarray) -> np.ndarray:
        shifted = np.asarray(u) + phase_lead
        if t_ramp > 0.0:
            return _ramp(shifted, t_ramp) * spec.source.value(shifted)
        return spec.source.value(shifted)

    einc_src = incident(step_t[:-1])
    hinc_src = -incident(step_t[:-1] + 0.5 * dt + 0.5 * dx / C0) / ETA0

    if modulation_on:
        if spec.modulation is None:
            raise ParameterError("modulation_on requires a synthesized modulation")
        if t_end >= spec.modulation.stop_time:
            raise PositivityError(
                f"t_end={t_end:g} s reaches the modulation stop time "
                f"{spec.modulation.stop_time:g} s")
        layer = spec.modulation.layer_capacitance()
        tau_grid = step_t - t_arr
        if tau_grid[-1] > layer.t_end + 1e-9 * dt:
            raise GridError("modulation profile does not cover the simulation span")
        c_layer = np.interp(tau_grid, layer.times, layer.samples,
                            left=float(layer.samples[0]))
        eps_tv = c_layer * ETA0 * C0 / spec.d + 1.0
        if np.min(eps_tv) < 1.0 - 1e-9:
            raise PositivityError("modulated slab permittivity fell below 1")
    else:
        eps_tv = np.ones(n_steps + 1)

    ez_init = hy_init = None
    if warm_start:
        ez_init, hy_init = _steady_fields(
            spec, n_nodes, src_idx, sheet_idx, tv_start, tv_end, dx, dt,
            incident, modulation_on)

    probe_idx = np.array([probe_above, probe_below, sheet_idx], dtype=np.int64)
    probes, p_tv, p_static, j_tv, j_static = backend.fdtd_run(
        eps_r, tv_start, tv_end, eps_tv, sheet_idx, sheet_g, src_idx,
        einc_src, hinc_src, dt, dx, probe_idx, n_steps,
        ez_init=ez_init, hy_init=hy_init)

    diverged = False
    t_div = None
    keep = n_steps + 1
    if not np.all(np.isfinite(probes)):
        diverged = True
        bad = np.flatnonzero(~np.all(np.isfinite(probes), axis=0))
        keep = max(int(bad[0]), 2)
        t_div = keep * dt - t_arr
        probes = probes[:, :keep]
        p_tv, p_static = p_tv[:keep - 1], p_static[:keep - 1]
        j_tv, j_static = j_tv[:keep - 1], j_static[:keep - 1]

    rec_t0 = -t_arr
    tau_rec = rec_t0 + dt * np.arange(keep)
    d_above = (sheet_idx - probe_above) * dx / C0
    d_below = (probe_below - sheet_idx) * dx / C0
    # incident at a node: incident(t_global - (node - src)*dx/c0)
    e_inc_above = incident(tau_rec + t_arr - t_geo + d_above)
    e_inc_below = incident(tau_rec + t_arr - t_geo - d_below)

    half_t0 = 0.5 * dt - t_arr
    return FieldProbeRecord(
        e_above=Waveform(rec_t0, dt, probes[0], "V/m"),
        e_below=Waveform(rec_t0, dt, probes[1], "V/m"),
        e_inc_above=Waveform(rec_t0, dt, e_inc_above, "V/m"),
        e_inc_below=Waveform(rec_t0, dt, e_inc_below, "V/m"),
        e_sheet=Waveform(rec_t0, dt, probes[2], "V/m"),
        j_layers={
            "static": Waveform(half_t0, dt, j_static, "A/m"),
            "modulated": Waveform(half_t0, dt, j_tv, "A/m"),
        },
        p_layers={
            "static": Waveform(half_t0, dt, p_static, "W/m^2"),
            "modulated": Waveform(half_t0, dt, p_tv, "W/m^2"),
        },
        source=spec.source,
        modulation_on=modulation_on,
        probe_distance=n_lam * dx,
        model="fdtd",
        diverged=diverged,
        t_diverged=t_div,
    )


# --------------------------------------------------------------------------
# analysis

def _periodic_mean(w: Waveform, omega: float, t_start: float) -> float:
    """Mean over the largest whole number of periods (>= 3) after t_start."""
    period = 2.0 * math.pi / omega
    i0 = max(0, int(math.ceil((t_start - w.t0) / w.dt - 1e-9)))
    span = (len(w) - 1 - i0) * w.dt
    n_periods = int(math.floor(span / period + 1e-9))
    if n_periods < 3:
        raise WindowError(
            f"window covers {span / period:.2f} periods after t_start, need >= 3")
    n_win = int(round(n_periods * period / w.dt))
    return float(np.mean(w.samples[i0:i0 + n_win]))


def power_balance(rec: FieldProbeRecord, settle: float) -> PowerReport:
    """Time-averaged per-layer powers and flux bookkeeping after settle.

    The modulated layer's average is negative when it generates (returns)
    the power the static layer absorbs; their sum is the net power taken
    from the wave, which the flux difference must match.
    """
    omega = rec.source.omega
    p_static = _periodic_mean(rec.p_layers["static"], omega, settle)
    p_mod = _periodic_mean(rec.p_layers["modulated"], omega, settle)

    def flux(samples: np.ndarray) -> float:
        w = Waveform(rec.e_above.t0, rec.e_above.dt, samples ** 2, "")
        return _periodic_mean(w, omega, settle) / ETA0

    s_inc = flux(rec.e_inc_below.samples)
    s_ref = flux(rec.e_above.samples - rec.e_inc_above.samples)
    s_tra = flux(rec.e_below.samples)

    return PowerReport(
        p_static=p_static,
        p_modulated=p_mod,
        net=p_static + p_mod,
        s_incident=s_inc,
        s_reflected=s_ref,
        s_transmitted=s_tra,
    )


def invisibility_residual(rec: FieldProbeRecord, settle: float) -> dict:
    """Max |E_total - E_incident| at each probe after settle, absolute and
    relative to the source tone amplitude."""
    out = {}
    for name, total, inc in (("above", rec.e_above, rec.e_inc_above),
                             ("below", rec.e_below, rec.e_inc_below)):
        i0 = max(0, int(math.ceil((settle - total.t0) / total.dt - 1e-9)))
        if i0 >= len(total) - 1:
            raise WindowError("record does not extend past the settle time")
        resid = float(np.max(np.abs(total.samples[i0:] - inc.samples[i0:])))
        out[name] = resid
        out[f"{name}_rel"] = resid / rec.source.e0
    return out


def reflection_magnitude(rec: FieldProbeRecord, settle: float) -> float:
    """|reflected/incident| at the source tone, from the above-probe record."""
    from .signals import steady_state_phasor
    refl = Waveform(rec.e_above.t0, rec.e_above.dt,
                    rec.e_above.samples - rec.e_inc_above.samples, "V/m")
    ph = steady_state_phasor(refl, rec.source.omega, rec.e_above.t0 + settle)
    return ph.amplitude / rec.source.e0


@dataclass(frozen=True)
class VariantComparison:
    """Pairwise post-settle field differences between sensor realizations."""

    records: Mapping[str, FieldProbeRecord]
    differences: Mapping[tuple, dict]

    def __post_init__(self):
        object.__setattr__(self, "records", dict(self.records))
        object.__setattr__(self, "differences", dict(self.differences))


def _pair_difference(rec_a: FieldProbeRecord, rec_b: FieldProbeRecord,
                     settle: float) -> dict:
    out = {}
    for name in ("above", "below"):
        wa = getattr(rec_a, f"e_{name}")
        wb = getattr(rec_b, f"e_{name}")
        t_lo = max(wa.t0, wb.t0, settle)
        t_hi = min(wa.t_end, wb.t_end)
        if t_hi - t_lo <= 0:
            raise WindowError("records do not overlap after the settle time")
        coarse, fine = (wa, wb) if wa.dt >= wb.dt else (wb, wa)
        i0 = max(0, int(math.ceil((t_lo - coarse.t0) / coarse.dt - 1e-9)))
        i1 = int(math.floor((t_hi - coarse.t0) / coarse.dt + 1e-9))
        t = coarse.t0 + coarse.dt * np.arange(i0, i1 + 1)
        a = np.interp(t, wa.times, wa.samples)
        b = np.interp(t, wb.times, wb.samples)
        out[name] = float(np.max(np.abs(a - b)))
        out[f"{name}_rel"] = out[name] / rec_a.source.e0
    return out


def compare_variants(specs: Mapping[str, SheetSpec], t_end: float,
                     modulation_on: bool = True, settle: float = 0.0,
                     samples_per_period: int = 2000,
                     cells_per_slab: int = 20) -> VariantComparison:
    """Run every realization with the same source and modulation and report
    pairwise max field differences at the probes."""
    items = list(specs.items())
    if len(items) < 2:
        raise ParameterError("need at least two variants to compare")
    src0 = items[0][1].source
    mod0 = items[0][1].modulation
    for _, sp in items[1:]:
        if sp.source != src0:
            raise ParameterError("variants drive different sources")
        if (mod0 is None) != (sp.modulation is None):
            raise ParameterError("variants disagree about having a modulation")
        if mod0 is not None and not (
                math.isclose(sp.modulation.c1, mod0.c1, rel_tol=1e-12)
                and math.isclose(sp.modulation.c2, mod0.c2, rel_tol=1e-12)):
            raise ParameterError("variants carry different modulation constants")

    records = {}
    for name, sp in items:
        if sp.variant == "two-dielectric-slabs":
            records[name] = simulate_fdtd(sp, t_end, modulation_on,
                                          cells_per_slab=cells_per_slab)
        else:
            records[name] = simulate_sheet(sp, t_end, modulation_on,
                                           samples_per_period=samples_per_period)

    diffs = {}
    names = [n for n, _ in items]
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            diffs[(names[i], names[j])] = _pair_difference(
                records[names[i]], records[names[j]], settle)
    return VariantComparison(records=records, differences=diffs)
