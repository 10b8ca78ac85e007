"""NumPy implementations of the hot kernels.

These match tvcap._core (the compiled extension) operation for operation; the
backend module picks whichever is available at import time. Keep the two in
lockstep: tests/test_backend.py asserts they agree to rounding error.
"""

from __future__ import annotations

import numpy as np

from .constants import C0, EPS0, MU0

BACKEND_NAME = "numpy"


def rk4_charge(a_half: np.ndarray, b_half: np.ndarray, q0: float, dt: float,
               q_limit: float):
    """Classical RK4 for dq/dt = b(t) - a(t)*q with a, b sampled on the
    half-step grid (index 2k is step k, 2k+1 the midpoint).

    Returns (q, div_idx): q holds n+1 samples where len(a_half) == 2n+1;
    div_idx is the first index with |q| > q_limit (integration stops there
    and the remaining samples repeat the last value), or -1.
    """
    a = np.asarray(a_half, dtype=np.float64)
    b = np.asarray(b_half, dtype=np.float64)
    n = (a.size - 1) // 2
    q = np.empty(n + 1)
    q[0] = q0
    div_idx = -1
    qk = float(q0)
    h = dt
    for k in range(n):
        i0, i1, i2 = 2 * k, 2 * k + 1, 2 * k + 2
        k1 = b[i0] - a[i0] * qk
        k2 = b[i1] - a[i1] * (qk + 0.5 * h * k1)
        k3 = b[i1] - a[i1] * (qk + 0.5 * h * k2)
        k4 = b[i2] - a[i2] * (qk + h * k3)
        qk = qk + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        q[k + 1] = qk
        if abs(qk) > q_limit or not np.isfinite(qk):
            div_idx = k + 1
            q[k + 2:] = qk if np.isfinite(qk) else 0.0
            break
    return q, div_idx


def fdtd_run(eps_r, tv_start, tv_end, eps_tv, sheet_idx, sheet_g,
             src_idx, einc_src, hinc_src, dt, dx, probe_idx, n_steps,
             ez_init=None, hy_init=None):
    """1-D FDTD (Ez/Hy Yee grid) with one time-varying slab, one static slab,
    a lumped conductance plane, and a total-field/scattered-field source.

    Args:
        eps_r: static relative permittivity per E node (1 in vacuum and in
            the time-varying slab, whose permittivity comes from eps_tv).
        tv_start, tv_end: node range [tv_start, tv_end) of the modulated slab.
        eps_tv: per-step slab permittivity, length n_steps + 1 (index = step).
        sheet_idx: node of the conductance plane (surface conductance
            sheet_g = 1/R0, S per square; 0 disables it).
        src_idx: first total-field node; einc_src[n] is the incident E there
            at integer step n, hinc_src[n] the incident H at src_idx - 1/2 at
            the half step following n.
        probe_idx: int array of E nodes to record after every full update.
        ez_init, hy_init: optional warm-start fields (E at step 0, H half a
            step earlier); zeros when omitted.

    Returns:
        probes: (len(probe_idx), n_steps + 1) E samples,
        p_tv, p_static: per-step layer powers, W/m^2 (half-step timing),
        j_tv, j_static: per-step layer sheet currents, A/m.
    """
    eps_r = np.asarray(eps_r, dtype=np.float64)
    n_nodes = eps_r.size
    ez = np.zeros(n_nodes) if ez_init is None else np.array(ez_init, dtype=np.float64)
    hy = np.zeros(n_nodes - 1) if hy_init is None else np.array(hy_init, dtype=np.float64)
    eps_node0 = EPS0 * eps_r.copy()
    eps_node0[tv_start:tv_end] = EPS0 * eps_tv[0]
    dz = eps_node0 * ez
    ch = dt / (MU0 * dx)
    cd = dt / dx
    mur = (dt * C0 - dx) / (dt * C0 + dx)

    probes = np.zeros((len(probe_idx), n_steps + 1))
    probes[:, 0] = ez[probe_idx]
    p_tv = np.zeros(n_steps)
    p_static = np.zeros(n_steps)
    j_tv = np.zeros(n_steps)
    j_static = np.zeros(n_steps)

    inv_eps = 1.0 / (EPS0 * eps_r)
    static_nodes = np.flatnonzero(eps_r != 1.0)
    static_nodes = static_nodes[static_nodes != sheet_idx]
    sheet_eps = EPS0 * eps_r[sheet_idx]
    beta = sheet_g * dt / (2.0 * dx)

    tv = slice(tv_start, tv_end)
    for n in range(n_steps):
        # magnetic half step
        hy += ch * (ez[1:] - ez[:-1])
        hy[src_idx - 1] -= ch * einc_src[n]

        ez_left_old = ez[0]
        ez_l1_old = ez[1]
        ez_right_old = ez[-1]
        ez_r1_old = ez[-2]
        ez_old_tv = ez[tv].copy()
        ez_old_static = ez[static_nodes].copy()
        ez_old_sheet = ez[sheet_idx]

        # electric full step via D
        dz[1:-1] += cd * (hy[1:] - hy[:-1])
        dz[src_idx] -= cd * hinc_src[n]
        ez[1:-1] = dz[1:-1] * inv_eps[1:-1]
        ez[tv] = dz[tv] / (EPS0 * eps_tv[n + 1])
        # conductance plane: semi-implicit in E, then refold into D
        e_new = (dz[sheet_idx] - beta * ez_old_sheet) / (sheet_eps + beta)
        ez[sheet_idx] = e_new
        dz[sheet_idx] = sheet_eps * e_new

        # first-order Mur boundaries (exact at Courant 1)
        ez[0] = ez_l1_old + mur * (ez[1] - ez_left_old)
        dz[0] = EPS0 * ez[0]
        ez[-1] = ez_r1_old + mur * (ez[-2] - ez_right_old)
        dz[-1] = EPS0 * ez[-1]

        # layer currents and powers at the half step
        e_half_tv = 0.5 * (ez_old_tv + ez[tv])
        dp_tv = EPS0 * ((eps_tv[n + 1] - 1.0) * ez[tv] - (eps_tv[n] - 1.0) * ez_old_tv)
        j_tv[n] = float(np.sum(dp_tv) / dt * dx)
        p_tv[n] = float(np.sum(e_half_tv * dp_tv) / dt * dx)

        e_half_st = 0.5 * (ez_old_static + ez[static_nodes])
        dp_st = EPS0 * (eps_r[static_nodes] - 1.0) * (ez[static_nodes] - ez_old_static)
        e_half_sheet = 0.5 * (ez_old_sheet + ez[sheet_idx])
        dp_sheet = EPS0 * (eps_r[sheet_idx] - 1.0) * (ez[sheet_idx] - ez_old_sheet)
        j_static[n] = float((np.sum(dp_st) + dp_sheet) / dt * dx
                            + sheet_g * e_half_sheet)
        p_static[n] = float((np.sum(e_half_st * dp_st) + e_half_sheet * dp_sheet) / dt * dx
                            + sheet_g * e_half_sheet ** 2)

        probes[:, n + 1] = ez[probe_idx]

    return probes, p_tv, p_static, j_tv, j_static
