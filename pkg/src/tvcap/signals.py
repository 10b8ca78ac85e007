"""Uniformly sampled waveforms and the numerical calculus on them.

Every other module consumes these primitives, so they stay deliberately
simple: immutable float64 arrays on a fixed grid, trapezoidal integration,
second-order differences, a zero-phase single-pole smoother, and a
least-squares single-tone fit for steady-state readout.

Units are carried as plain metadata strings ("V", "A", "F", "V/m", ...).
Operations that combine two waveforms insist on equal units and equal grids;
voltage-like signals from different domains can therefore never mix silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate as _integrate
from scipy import signal as _signal

from .errors import GridError, UnitMismatchError, WindowError

# Unit algebra is a lookup, not a parser: only the handful of combinations the
# toolkit actually produces are special-cased, everything else is tagged
# generically with "*s" / "/s".
_INTEGRAL_UNITS = {"A": "C", "A/m": "C/m"}
_DERIVATIVE_UNITS = {"C": "A", "C/m": "A/m"}

_GRID_RTOL = 1e-9


def integral_unit(unit: str) -> str:
    return _INTEGRAL_UNITS.get(unit, f"{unit}*s" if unit else "s")


def derivative_unit(unit: str) -> str:
    return _DERIVATIVE_UNITS.get(unit, f"{unit}/s" if unit else "1/s")


@dataclass(frozen=True)
class Waveform:
    """A real-valued signal sampled on a uniform time grid.

    Attributes:
        t0: time of the first sample, s.
        dt: sample spacing, s (strictly positive and finite).
        samples: float64 array, length >= 2, all finite.
        unit: physical unit of the samples, carried as a plain string.
    """

    t0: float
    dt: float
    samples: np.ndarray
    unit: str = ""

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size < 2:
            raise GridError("waveform needs at least 2 samples on a 1-D grid")
        if not np.isfinite(self.dt) or self.dt <= 0.0:
            raise GridError(f"dt must be positive and finite, got {self.dt}")
        if not np.isfinite(self.t0):
            raise GridError("t0 must be finite")
        if not np.all(np.isfinite(samples)):
            raise GridError("waveform samples must all be finite")
        samples = samples.copy()
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.samples.size)

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * (self.samples.size - 1)

    @property
    def duration(self) -> float:
        return self.dt * (self.samples.size - 1)

    def with_samples(self, samples: np.ndarray, unit: str | None = None,
                     t0: float | None = None) -> "Waveform":
        """New waveform on the same grid (or shifted start) with new samples."""
        return Waveform(self.t0 if t0 is None else t0, self.dt, samples,
                        self.unit if unit is None else unit)

    def sliced(self, start: int, stop: int | None = None) -> "Waveform":
        """Sub-waveform over sample indices [start, stop)."""
        stop = self.samples.size if stop is None else stop
        return Waveform(self.t0 + start * self.dt, self.dt,
                        self.samples[start:stop], self.unit)

    def index_at(self, t: float) -> int:
        """Nearest grid index for time t (clipped to the valid range)."""
        k = int(round((t - self.t0) / self.dt))
        return min(max(k, 0), self.samples.size - 1)


def same_grid(a: Waveform, b: Waveform) -> bool:
    return (a.samples.size == b.samples.size
            and math.isclose(a.dt, b.dt, rel_tol=_GRID_RTOL)
            and abs(a.t0 - b.t0) <= _GRID_RTOL * max(a.dt, abs(a.t0), abs(b.t0)) + a.dt * _GRID_RTOL)


def require_same_grid(a: Waveform, b: Waveform) -> None:
    if not same_grid(a, b):
        raise GridError("waveforms live on different grids "
                        f"(t0={a.t0}/{b.t0}, dt={a.dt}/{b.dt}, n={len(a)}/{len(b)})")


def require_same_unit(a: Waveform, b: Waveform) -> None:
    if a.unit != b.unit:
        raise UnitMismatchError(f"unit mismatch: {a.unit!r} vs {b.unit!r}")


@dataclass(frozen=True)
class HarmonicSignal:
    """DC-biased cosine v(t) = v_dc + v_ac*cos(omega0*t + phi)."""

    v_dc: float
    v_ac: float
    omega0: float
    phi: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.omega0) and self.omega0 > 0.0):
            raise GridError(f"omega0 must be positive, got {self.omega0}")
        if not (np.isfinite(self.v_ac) and self.v_ac >= 0.0):
            raise GridError(f"v_ac must be nonnegative, got {self.v_ac}")

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega0

    def value(self, t):
        """Evaluate at scalar or array time."""
        return self.v_dc + self.v_ac * np.cos(self.omega0 * np.asarray(t) + self.phi)


@dataclass(frozen=True)
class Phasor:
    """Single-tone steady-state component amplitude*cos(omega*t + phase)."""

    amplitude: float
    phase: float
    omega: float

    def __post_init__(self):
        if not (np.isfinite(self.amplitude) and self.amplitude >= 0.0):
            raise GridError(f"phasor amplitude must be >= 0, got {self.amplitude}")
        # normalize phase into (-pi, pi]
        phase = float(self.phase)
        phase = math.remainder(phase, 2.0 * math.pi)
        if phase <= -math.pi:
            phase += 2.0 * math.pi
        object.__setattr__(self, "phase", phase)

    @classmethod
    def from_complex(cls, z: complex, omega: float) -> "Phasor":
        return cls(abs(z), math.atan2(z.imag, z.real), omega)

    def as_complex(self) -> complex:
        return self.amplitude * complex(math.cos(self.phase), math.sin(self.phase))

    def value(self, t):
        return self.amplitude * np.cos(self.omega * np.asarray(t) + self.phase)


def sample(h: HarmonicSignal, t0: float, dt: float, n: int, unit: str = "V") -> Waveform:
    """Sample a harmonic signal on a uniform grid of n points."""
    if n < 2 or dt <= 0.0 or not np.isfinite(dt):
        raise GridError(f"invalid grid: n={n}, dt={dt}")
    t = t0 + dt * np.arange(n)
    return Waveform(t0, dt, h.value(t), unit)


def cumulative_integral(w: Waveform, initial: float = 0.0) -> Waveform:
    """Trapezoidal running integral; out[0] = initial."""
    out = _integrate.cumulative_trapezoid(w.samples, dx=w.dt, initial=0.0) + initial
    return Waveform(w.t0, w.dt, out, integral_unit(w.unit))


def derivative(w: Waveform) -> Waveform:
    """Second-order finite-difference derivative (central interior,
    one-sided at the endpoints)."""
    if len(w) < 3:
        raise GridError("derivative needs at least 3 samples")
    out = np.gradient(w.samples, w.dt, edge_order=2)
    return Waveform(w.t0, w.dt, out, derivative_unit(w.unit))


def lowpass(w: Waveform, f_cut: float) -> Waveform:
    """Zero-phase single-pole low-pass (forward-backward, unity DC gain).

    The Gustafsson edge handling keeps the overall mean intact to machine
    precision, so smoothing never shifts the DC bias of a modulation voltage.
    """
    nyquist = 0.5 / w.dt
    if not (0.0 < f_cut < nyquist):
        raise GridError(f"cutoff {f_cut} Hz outside (0, Nyquist={nyquist} Hz)")
    b, a = _signal.butter(1, f_cut, fs=1.0 / w.dt)
    out = _signal.filtfilt(b, a, w.samples, method="gust")
    return Waveform(w.t0, w.dt, out, w.unit)


def lowpass_gain(f_signal: float, f_cut: float, dt: float) -> float:
    """Two-pass amplitude gain of lowpass() at a given frequency (oracle for
    attenuation checks)."""
    b, a = _signal.butter(1, f_cut, fs=1.0 / dt)
    _, h = _signal.freqz(b, a, worN=[f_signal], fs=1.0 / dt)
    return float(abs(h[0]) ** 2)


def steady_state_phasor(w: Waveform, omega: float, t_start: float) -> Phasor:
    """Least-squares fit of a + b*cos(omega t) + c*sin(omega t) over
    [t_start, end], trimmed to whole periods; returns the omega component.

    The window must span at least 3 full periods.
    """
    period = 2.0 * math.pi / omega
    i0 = max(0, int(math.ceil((t_start - w.t0) / w.dt - _GRID_RTOL)))
    span = (len(w) - 1 - i0) * w.dt
    n_periods = int(math.floor(span / period + _GRID_RTOL))
    if n_periods < 3:
        raise WindowError(
            f"window spans {span / period:.2f} periods, need >= 3 whole periods")
    n_win = int(round(n_periods * period / w.dt))
    idx = np.arange(i0, i0 + n_win)
    t = w.t0 + w.dt * idx
    basis = np.column_stack([np.ones_like(t), np.cos(omega * t), np.sin(omega * t)])
    coef, *_ = np.linalg.lstsq(basis, w.samples[idx], rcond=None)
    _, b, c = coef
    return Phasor(math.hypot(b, c), math.atan2(-c, b), omega)


def fit_offset(w: Waveform, omega: float, t_start: float) -> float:
    """DC offset from the same whole-period least-squares fit as
    steady_state_phasor."""
    period = 2.0 * math.pi / omega
    i0 = max(0, int(math.ceil((t_start - w.t0) / w.dt - _GRID_RTOL)))
    span = (len(w) - 1 - i0) * w.dt
    n_periods = int(math.floor(span / period + _GRID_RTOL))
    if n_periods < 3:
        raise WindowError("window too short for offset fit")
    n_win = int(round(n_periods * period / w.dt))
    idx = np.arange(i0, i0 + n_win)
    t = w.t0 + w.dt * idx
    basis = np.column_stack([np.ones_like(t), np.cos(omega * t), np.sin(omega * t)])
    coef, *_ = np.linalg.lstsq(basis, w.samples[idx], rcond=None)
    return float(coef[0])


def waveform_to_csv(w: Waveform, path) -> None:
    """Write `t,<unit>` CSV at full double precision (17 significant digits)."""
    data = np.column_stack([w.times, w.samples])
    np.savetxt(path, data, fmt="%.17g", delimiter=",",
               header=f"t,{w.unit}", comments="")


def waveform_from_csv(path) -> Waveform:
    """Read a waveform written by waveform_to_csv."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        data = np.loadtxt(fh, delimiter=",")
    parts = header.split(",", 1)
    unit = parts[1] if len(parts) == 2 else ""
    if data.ndim != 2 or data.shape[0] < 2 or data.shape[1] != 2:
        raise GridError(f"CSV {path} does not hold a sampled waveform")
    t = data[:, 0]
    dt = float(np.median(np.diff(t)))
    if dt <= 0 or np.max(np.abs(np.diff(t) - dt)) > 1e-6 * dt:
        raise GridError(f"CSV {path} is not uniformly sampled")
    return Waveform(float(t[0]), dt, data[:, 1], unit)
