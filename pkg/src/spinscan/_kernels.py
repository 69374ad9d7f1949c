"""Compiled RK4 inner loop.

Same math as the numpy path in simulate.py, written out per cell so numba
can fuse the field evaluation, the torque and the stage update into one
pass.  Kept separate so the reference implementation stays importable with
no compiler in sight; equivalence between the two is pinned by a test.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _rhs(m, out, nb, inv_dx2, inv_dy2, bsx, bsy, bsz, b_edge, cex, b_sat,
         bz_t, gamma_eff, alpha):
    n = m.shape[0]
    for c in range(n):
        mx = m[c, 0]
        my = m[c, 1]
        mz = m[c, 2]
        lx = 0.0
        ly = 0.0
        lz = 0.0
        j = nb[c, 0]
        if j >= 0:
            lx += (m[j, 0] - mx) * inv_dx2
            ly += (m[j, 1] - my) * inv_dx2
            lz += (m[j, 2] - mz) * inv_dx2
        j = nb[c, 1]
        if j >= 0:
            lx += (m[j, 0] - mx) * inv_dx2
            ly += (m[j, 1] - my) * inv_dx2
            lz += (m[j, 2] - mz) * inv_dx2
        j = nb[c, 2]
        if j >= 0:
            lx += (m[j, 0] - mx) * inv_dy2
            ly += (m[j, 1] - my) * inv_dy2
            lz += (m[j, 2] - mz) * inv_dy2
        j = nb[c, 3]
        if j >= 0:
            lx += (m[j, 0] - mx) * inv_dy2
            ly += (m[j, 1] - my) * inv_dy2
            lz += (m[j, 2] - mz) * inv_dy2
        bx = bsx + b_edge[c, 0] + cex * lx
        by = bsy + b_edge[c, 1] + cex * ly
        bz = bsz + b_edge[c, 2] + cex * lz + bz_t - b_sat * mz
        tx = my * bz - mz * by
        ty = mz * bx - mx * bz
        tz = mx * by - my * bx
        mdotb = mx * bx + my * by + mz * bz
        m2 = mx * mx + my * my + mz * mz
        out[c, 0] = -gamma_eff * (tx + alpha * (mx * mdotb - bx * m2))
        out[c, 1] = -gamma_eff * (ty + alpha * (my * mdotb - by * m2))
        out[c, 2] = -gamma_eff * (tz + alpha * (mz * mdotb - bz * m2))


@njit(cache=True)
def rk4_steps(m, nb, inv_dx2, inv_dy2, b_static, b_edge, cex, b_sat, b_mw,
              omega, gamma_eff, alpha, t0, dt, n_steps):
    n = m.shape[0]
    k1 = np.empty((n, 3))
    k2 = np.empty((n, 3))
    k3 = np.empty((n, 3))
    k4 = np.empty((n, 3))
    tmp = np.empty((n, 3))
    bsx = b_static[0]
    bsy = b_static[1]
    bsz = b_static[2]
    for i in range(n_steps):
        t = t0 + i * dt
        bz_a = b_mw * math.sin(omega * t)
        bz_b = b_mw * math.sin(omega * (t + 0.5 * dt))
        bz_c = b_mw * math.sin(omega * (t + dt))
        _rhs(m, k1, nb, inv_dx2, inv_dy2, bsx, bsy, bsz, b_edge, cex, b_sat,
             bz_a, gamma_eff, alpha)
        for c in range(n):
            for d in range(3):
                tmp[c, d] = m[c, d] + 0.5 * dt * k1[c, d]
        _rhs(tmp, k2, nb, inv_dx2, inv_dy2, bsx, bsy, bsz, b_edge, cex, b_sat,
             bz_b, gamma_eff, alpha)
        for c in range(n):
            for d in range(3):
                tmp[c, d] = m[c, d] + 0.5 * dt * k2[c, d]
        _rhs(tmp, k3, nb, inv_dx2, inv_dy2, bsx, bsy, bsz, b_edge, cex, b_sat,
             bz_b, gamma_eff, alpha)
        for c in range(n):
            for d in range(3):
                tmp[c, d] = m[c, d] + dt * k3[c, d]
        _rhs(tmp, k4, nb, inv_dx2, inv_dy2, bsx, bsy, bsz, b_edge, cex, b_sat,
             bz_c, gamma_eff, alpha)
        for c in range(n):
            for d in range(3):
                m[c, d] += (dt / 6.0) * (k1[c, d] + 2.0 * k2[c, d] + 2.0 * k3[c, d] + k4[c, d])
            nrm = math.sqrt(m[c, 0] ** 2 + m[c, 1] ** 2 + m[c, 2] ** 2)
            m[c, 0] = m[c, 0] / nrm
            m[c, 1] = m[c, 1] / nrm
            m[c, 2] = m[c, 2] / nrm
