"""Admittance kernels and their convolution with voltage histories.

A one-port network driven by a voltage is described here by its impulse
response in retardation time. The singular parts (an instantaneous
conductance and a derivative-coupling capacitance) are stored symbolically
as scalar weights; only the smooth tail is sampled. A weakly nonlinear
network additionally carries a sampled second-order kernel on a finite
square support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridError, HistoryError, UnitMismatchError
from .signals import Waveform, derivative

# Voltage-like drive units and the current-like units they produce.
_CURRENT_UNITS = {"V": "A", "V/m": "A/m"}


def _current_unit(unit: str) -> str:
    try:
        return _CURRENT_UNITS[unit]
    except KeyError:
        raise UnitMismatchError(
            f"cannot convolve a kernel with a {unit!r} signal; expected one of "
            f"{sorted(_CURRENT_UNITS)}") from None


@dataclass(frozen=True)
class AdmittanceKernel:
    """First-order (linear) admittance kernel.

    Attributes:
        g0: weight of the instantaneous part, S. A plain conductance.
        c0: weight of the derivative-coupling part, F. A plain capacitance;
            may be negative (non-Foster).
        smooth: optional sampled tail over retardation >= 0, unit S/s.
    """

    g0: float = 0.0
    c0: float = 0.0
    smooth: Waveform | None = None

    def __post_init__(self):
        if not (np.isfinite(self.g0) and np.isfinite(self.c0)):
            raise GridError("kernel weights g0/c0 must be finite")
        if self.smooth is not None and abs(self.smooth.t0) > 1e-12 * self.smooth.dt:
            raise GridError("smooth kernel part must start at retardation 0 "
                            f"(got t0={self.smooth.t0})")

    @property
    def is_zero(self) -> bool:
        return self.g0 == 0.0 and self.c0 == 0.0 and self.smooth is None


@dataclass(frozen=True)
class VolterraKernel2:
    """Second-order kernel on a finite square grid [0, Gamma]^2.

    Only the symmetric part contributes to the response, so the stored array
    is symmetrized at construction.
    """

    dgamma: float
    values: np.ndarray

    def __post_init__(self):
        if not (np.isfinite(self.dgamma) and self.dgamma > 0.0):
            raise GridError(f"dgamma must be positive, got {self.dgamma}")
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != values.shape[1] or values.shape[0] < 2:
            raise GridError("second-order kernel must be a square array, size >= 2")
        if not np.all(np.isfinite(values)):
            raise GridError("second-order kernel values must be finite")
        values = 0.5 * (values + values.T)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def support(self) -> float:
        return self.dgamma * (self.values.shape[0] - 1)

    def mass(self) -> float:
        """2-D trapezoidal integral of the kernel over its support."""
        w = _trapezoid_weights(self.values.shape[0], self.dgamma)
        return float(w @ self.values @ w)


def _trapezoid_weights(m: int, dx: float) -> np.ndarray:
    w = np.full(m, dx)
    w[0] = w[-1] = 0.5 * dx
    return w


def _integer_ratio(a: float, b: float) -> bool:
    ratio = a / b
    return (math.isclose(ratio, round(ratio), rel_tol=0, abs_tol=1e-9)
            and round(ratio) >= 1)


def _resample_to(dt: float, kernel_dt: float, samples: np.ndarray) -> np.ndarray:
    """Resample kernel samples onto step dt; grids must match or differ by an
    integer ratio (linear interpolation in between)."""
    if math.isclose(kernel_dt, dt, rel_tol=1e-9):
        return samples
    if not (_integer_ratio(kernel_dt, dt) or _integer_ratio(dt, kernel_dt)):
        raise GridError(f"kernel grid ({kernel_dt}) and signal grid ({dt}) "
                        "differ by a non-integer ratio")
    support = kernel_dt * (samples.size - 1)
    gamma_new = np.arange(int(round(support / dt)) + 1) * dt
    gamma_old = np.arange(samples.size) * kernel_dt
    return np.interp(gamma_new, gamma_old, samples)


def convolve_first_order(k: AdmittanceKernel, v: Waveform) -> Waveform:
    """Current response of a first-order kernel to a voltage history.

    i = g0*v + c0*dv/dt + (smooth part (*) v), with the smooth tail folded by
    trapezoidal quadrature. The output is defined only where the full smooth
    support has history available, so it may start later than v does.
    """
    unit = _current_unit(v.unit)
    out = k.g0 * v.samples
    if k.c0 != 0.0:
        # Same code path as an explicit C*dv/dt element law, so a pure-c0
        # kernel matches c0*derivative(v) bit for bit.
        out = out + k.c0 * derivative(v).samples
    start = 0
    if k.smooth is not None:
        tail = _resample_to(v.dt, k.smooth.dt, k.smooth.samples)
        m = tail.size
        if len(v) < m:
            raise HistoryError(
                f"signal ({len(v)} samples) shorter than kernel support ({m})")
        weights = _trapezoid_weights(m, v.dt)
        i_smooth = np.convolve(v.samples, tail * weights, mode="valid")
        start = m - 1
        out = out[start:] + i_smooth
    if np.ndim(out) == 0 or out.size < 2:
        raise HistoryError("kernel support leaves fewer than 2 output samples")
    return Waveform(v.t0 + start * v.dt, v.dt, out, unit)


def convolve_second_order(k2: VolterraKernel2, v: Waveform) -> Waveform:
    """Current response of a second-order kernel: the double convolution of
    the kernel with two copies of the voltage history (2-D trapezoid rule)."""
    unit = _current_unit(v.unit)
    if not (math.isclose(k2.dgamma, v.dt, rel_tol=1e-9)
            or _integer_ratio(k2.dgamma, v.dt) or _integer_ratio(v.dt, k2.dgamma)):
        raise GridError(f"second-order kernel grid ({k2.dgamma}) incommensurate "
                        f"with signal grid ({v.dt})")
    values = k2.values
    if not math.isclose(k2.dgamma, v.dt, rel_tol=1e-9):
        support = k2.support
        g_new = np.arange(int(round(support / v.dt)) + 1) * v.dt
        g_old = np.arange(values.shape[0]) * k2.dgamma
        tmp = np.empty((g_new.size, values.shape[1]))
        for j in range(values.shape[1]):
            tmp[:, j] = np.interp(g_new, g_old, values[:, j])
        out2 = np.empty((g_new.size, g_new.size))
        for i in range(g_new.size):
            out2[i] = np.interp(g_new, g_old, tmp[i])
        values = out2
    m = values.shape[0]
    if len(v) < m:
        raise HistoryError(
            f"signal ({len(v)} samples) shorter than kernel support ({m})")
    w = _trapezoid_weights(m, v.dt)
    # window[t] holds v[t-m+1 .. t]; index a of the window is retardation
    # m-1-a, hence the double flip of the weighted kernel.
    kern = (values * np.outer(w, w))[::-1, ::-1]
    windows = np.lib.stride_tricks.sliding_window_view(v.samples, m)
    out = np.einsum("ta,ab,tb->t", windows, kern, windows, optimize=True)
    if out.size < 2:
        raise HistoryError("kernel support leaves fewer than 2 output samples")
    return Waveform(v.t0 + (m - 1) * v.dt, v.dt, out, unit)


def smooth_part_to_csv(k: AdmittanceKernel, path) -> None:
    """Write the sampled tail as `gamma,value` CSV (g0/c0 live in the
    scenario config, not in the file)."""
    if k.smooth is None:
        raise GridError("kernel has no smooth part to serialize")
    data = np.column_stack([k.smooth.times, k.smooth.samples])
    np.savetxt(path, data, fmt="%.17g", delimiter=",",
               header="gamma,value", comments="")


def smooth_part_from_csv(path) -> Waveform:
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] < 2:
        raise GridError(f"CSV {path} does not hold a sampled kernel")
    gamma = data[:, 0]
    dg = float(np.median(np.diff(gamma)))
    if dg <= 0 or np.max(np.abs(np.diff(gamma) - dg)) > 1e-6 * dg:
        raise GridError(f"CSV {path} is not uniformly sampled")
    return Waveform(float(gamma[0]), dg, data[:, 1], "S/s")


def volterra_to_csv(k2: VolterraKernel2, path) -> None:
    """Write the 2-D kernel as a CSV matrix with a one-line header carrying
    the grid step."""
    np.savetxt(path, k2.values, fmt="%.17g", delimiter=",",
               header=f"dgamma={k2.dgamma:.17g}", comments="")


def volterra_from_csv(path) -> VolterraKernel2:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().lstrip("# ")
        values = np.loadtxt(fh, delimiter=",")
    if not header.startswith("dgamma="):
        raise GridError(f"CSV {path} is missing the dgamma header")
    return VolterraKernel2(float(header.split("=", 1)[1]), values)
