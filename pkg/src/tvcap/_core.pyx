# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled implementations of the hot kernels.

Mirrors tvcap._fallback exactly; see that module for the interface docs.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, isfinite

cnp.import_array()

BACKEND_NAME = "compiled"

# Match tvcap.constants (scipy CODATA values) so both backends integrate the
# same equations bit for bit where possible.
cdef double C0 = 299792458.0
cdef double MU0 = 1.25663706127e-06
cdef double EPS0 = 8.8541878188e-12


def rk4_charge(double[::1] a_half, double[::1] b_half, double q0, double dt,
               double q_limit):
    cdef Py_ssize_t n = (a_half.shape[0] - 1) // 2
    q_arr = np.empty(n + 1, dtype=np.float64)
    cdef double[::1] q = q_arr
    cdef double qk = q0
    cdef double h = dt
    cdef double k1, k2, k3, k4
    cdef Py_ssize_t k, i0, i1, i2, j
    cdef Py_ssize_t div_idx = -1
    q[0] = q0
    for k in range(n):
        i0 = 2 * k
        i1 = 2 * k + 1
        i2 = 2 * k + 2
        k1 = b_half[i0] - a_half[i0] * qk
        k2 = b_half[i1] - a_half[i1] * (qk + 0.5 * h * k1)
        k3 = b_half[i1] - a_half[i1] * (qk + 0.5 * h * k2)
        k4 = b_half[i2] - a_half[i2] * (qk + h * k3)
        qk = qk + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        q[k + 1] = qk
        if fabs(qk) > q_limit or not isfinite(qk):
            div_idx = k + 1
            if not isfinite(qk):
                qk = 0.0
            for j in range(k + 2, n + 1):
                q[j] = qk
            break
    return q_arr, int(div_idx)


def fdtd_run(double[::1] eps_r, Py_ssize_t tv_start, Py_ssize_t tv_end,
             double[::1] eps_tv, Py_ssize_t sheet_idx, double sheet_g,
             Py_ssize_t src_idx, double[::1] einc_src, double[::1] hinc_src,
             double dt, double dx, long[::1] probe_idx, Py_ssize_t n_steps,
             ez_init=None, hy_init=None):
    cdef Py_ssize_t n_nodes = eps_r.shape[0]
    cdef Py_ssize_t n_probes = probe_idx.shape[0]

    if ez_init is None:
        ez_arr = np.zeros(n_nodes, dtype=np.float64)
    else:
        ez_arr = np.array(ez_init, dtype=np.float64)
    if hy_init is None:
        hy_arr = np.zeros(n_nodes - 1, dtype=np.float64)
    else:
        hy_arr = np.array(hy_init, dtype=np.float64)
    eps_np = np.asarray(eps_r)
    eps_node0 = EPS0 * eps_np.copy()
    eps_node0[tv_start:tv_end] = EPS0 * eps_tv[0]
    dz_arr = eps_node0 * ez_arr
    ez_old_arr = np.zeros(n_nodes, dtype=np.float64)
    inv_eps_arr = 1.0 / (EPS0 * eps_np)
    static_idx_arr = np.flatnonzero(eps_np != 1.0)
    static_idx_arr = static_idx_arr[static_idx_arr != sheet_idx].astype(np.int64)
    probes_arr = np.zeros((n_probes, n_steps + 1), dtype=np.float64)
    probes_arr[:, 0] = ez_arr[np.asarray(probe_idx)]
    p_tv_arr = np.zeros(n_steps, dtype=np.float64)
    p_static_arr = np.zeros(n_steps, dtype=np.float64)
    j_tv_arr = np.zeros(n_steps, dtype=np.float64)
    j_static_arr = np.zeros(n_steps, dtype=np.float64)

    cdef double[::1] ez = ez_arr
    cdef double[::1] hy = hy_arr
    cdef double[::1] dz = dz_arr
    cdef double[::1] ez_old = ez_old_arr
    cdef double[::1] inv_eps = inv_eps_arr
    cdef long[::1] static_idx = static_idx_arr
    cdef Py_ssize_t n_static = static_idx_arr.size
    cdef double[:, ::1] probes = probes_arr
    cdef double[::1] p_tv = p_tv_arr
    cdef double[::1] p_static = p_static_arr
    cdef double[::1] j_tv = j_tv_arr
    cdef double[::1] j_static = j_static_arr

    cdef double ch = dt / (MU0 * dx)
    cdef double cd = dt / dx
    cdef double mur = (dt * C0 - dx) / (dt * C0 + dx)
    cdef double sheet_eps = EPS0 * eps_r[sheet_idx]
    cdef double beta = sheet_g * dt / (2.0 * dx)

    cdef Py_ssize_t n, i, p, s
    cdef double inv_tv, e_new, e_half, dp, sum_j, sum_p, eps_new, eps_now

    for n in range(n_steps):
        # magnetic half step
        for i in range(n_nodes - 1):
            hy[i] += ch * (ez[i + 1] - ez[i])
        hy[src_idx - 1] -= ch * einc_src[n]

        for i in range(n_nodes):
            ez_old[i] = ez[i]

        # electric full step via D
        for i in range(1, n_nodes - 1):
            dz[i] += cd * (hy[i] - hy[i - 1])
        dz[src_idx] -= cd * hinc_src[n]

        eps_now = eps_tv[n]
        eps_new = eps_tv[n + 1]
        inv_tv = 1.0 / (EPS0 * eps_new)
        for i in range(1, n_nodes - 1):
            if tv_start <= i < tv_end:
                ez[i] = dz[i] * inv_tv
            else:
                ez[i] = dz[i] * inv_eps[i]
        # conductance plane: semi-implicit in E, then refold into D
        e_new = (dz[sheet_idx] - beta * ez_old[sheet_idx]) / (sheet_eps + beta)
        ez[sheet_idx] = e_new
        dz[sheet_idx] = sheet_eps * e_new

        # first-order Mur boundaries (exact at Courant 1)
        ez[0] = ez_old[1] + mur * (ez[1] - ez_old[0])
        dz[0] = EPS0 * ez[0]
        ez[n_nodes - 1] = ez_old[n_nodes - 2] + mur * (ez[n_nodes - 2] - ez_old[n_nodes - 1])
        dz[n_nodes - 1] = EPS0 * ez[n_nodes - 1]

        # layer currents and powers at the half step
        sum_j = 0.0
        sum_p = 0.0
        for i in range(tv_start, tv_end):
            dp = EPS0 * ((eps_new - 1.0) * ez[i] - (eps_now - 1.0) * ez_old[i])
            e_half = 0.5 * (ez_old[i] + ez[i])
            sum_j += dp
            sum_p += e_half * dp
        j_tv[n] = sum_j / dt * dx
        p_tv[n] = sum_p / dt * dx

        sum_j = 0.0
        sum_p = 0.0
        for s in range(n_static):
            i = static_idx[s]
            dp = EPS0 * (eps_r[i] - 1.0) * (ez[i] - ez_old[i])
            e_half = 0.5 * (ez_old[i] + ez[i])
            sum_j += dp
            sum_p += e_half * dp
        e_half = 0.5 * (ez_old[sheet_idx] + ez[sheet_idx])
        dp = EPS0 * (eps_r[sheet_idx] - 1.0) * (ez[sheet_idx] - ez_old[sheet_idx])
        j_static[n] = (sum_j + dp) / dt * dx + sheet_g * e_half
        p_static[n] = (sum_p + e_half * dp) / dt * dx + sheet_g * e_half * e_half

        for p in range(n_probes):
            probes[p, n + 1] = ez[probe_idx[p]]

    return probes_arr, p_tv_arr, p_static_arr, j_tv_arr, j_static_arr
