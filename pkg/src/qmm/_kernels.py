"""Compiled right-hand sides and the delay-aware fixed-step RK4 engine.

The engine advances on a uniform grid ``t_k = k h`` with ``a = N h``. The
grid nodes ``0..N`` form the memory pool (filled beforehand), the remaining
nodes are produced by RK4. Delayed states needed by the RK4 stages are read
from a ring buffer by cubic Hermite interpolation between stored nodes and
stored node derivatives.

State layout: Cartesian states are Bloch vectors ``(x, y, z)``; polar states
store ``(theta, phi, 0)``.
"""

from __future__ import annotations

import numpy as np
from numba import njit

QMM11, QMM22, QMM23, QMM33, HYBRID22 = 0, 1, 2, 3, 4
CARTESIAN, POLAR = 0, 1

STATUS_OK, STATUS_DRIFT, STATUS_POLE = 0, 1, 2

# indices into the flat parameter vector produced by CouplingSet.as_params
P_MU, P_LRE, P_LIM, P_ETA, P_KRE, P_KIM, P_BX, P_BY, P_BZ = range(9)

POLE_TOL = 1e-9


@njit(cache=True, inline="always")
def _dot(u, v):
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


@njit(cache=True)
def field(model, r, ra, rb, p, out):
    """Memory-made magnetic field ``B`` of each model (external field included)."""
    cx = ra[1] * r[2] - ra[2] * r[1]
    cy = ra[2] * r[0] - ra[0] * r[2]
    cz = ra[0] * r[1] - ra[1] * r[0]
    if model == QMM11:
        mu = p[P_MU]
        out[0] = mu * ra[0]
        out[1] = mu * ra[1]
        out[2] = mu * ra[2]
    elif model == QMM33:
        kre = 0.5 * p[P_KRE]
        kim = 0.5 * p[P_KIM]
        dab = _dot(ra, rb)
        dar = _dot(ra, r)
        dbr = _dot(rb, r)
        abx = ra[1] * rb[2] - ra[2] * rb[1]
        aby = ra[2] * rb[0] - ra[0] * rb[2]
        abz = ra[0] * rb[1] - ra[1] * rb[0]
        brx = rb[1] * r[2] - rb[2] * r[1]
        bry = rb[2] * r[0] - rb[0] * r[2]
        brz = rb[0] * r[1] - rb[1] * r[0]
        out[0] = kre * (ra[0] + rb[0] + r[0] + dab * r[0] - dar * rb[0] + dbr * ra[0]) - kim * (abx + brx + cx)
        out[1] = kre * (ra[1] + rb[1] + r[1] + dab * r[1] - dar * rb[1] + dbr * ra[1]) - kim * (aby + bry + cy)
        out[2] = kre * (ra[2] + rb[2] + r[2] + dab * r[2] - dar * rb[2] + dbr * ra[2]) - kim * (abz + brz + cz)
    else:
        lre = p[P_LRE]
        lim = p[P_LIM]
        c = p[P_MU] + lre
        if model == QMM23:
            c += 0.5 * p[P_ETA] * (1.0 + _dot(ra, r))
        out[0] = c * ra[0] + lre * r[0] - lim * cx
        out[1] = c * ra[1] + lre * r[1] - lim * cy
        out[2] = c * ra[2] + lre * r[2] - lim * cz
        if model == HYBRID22:
            out[0] += p[P_BX]
            out[1] += p[P_BY]
            out[2] += p[P_BZ]


@njit(cache=True)
def rhs_cartesian(model, r, ra, rb, p, out):
    """Bloch-vector velocity ``B x r``; tangent to the sphere through every point."""
    field(model, r, ra, rb, p, out)
    bx, by, bz = out[0], out[1], out[2]
    out[0] = by * r[2] - bz * r[1]
    out[1] = bz * r[0] - bx * r[2]
    out[2] = bx * r[1] - by * r[0]


@njit(cache=True)
def fg(th, ph, tha, pha):
    """The F and G functions of the two-memory polar equations."""
    f = np.cos(tha) * np.sin(th) - np.sin(tha) * np.cos(th) * np.cos(ph - pha)
    g = -np.sin(tha) * np.sin(ph - pha)
    return f, g


@njit(cache=True)
def a_theta_phi(th, ph, tha, pha):
    """The A^theta and A^phi functions of the (2,3) polar equations."""
    d = ph - pha
    s2t = np.sin(2.0 * th)
    aphi = 0.25 * (
        -np.cos(d) * (s2t * np.sin(tha) ** 2 * np.cos(d) + 2.0 * np.cos(th) * np.sin(tha)
                      + np.cos(2.0 * th) * np.sin(2.0 * tha))
        + s2t * np.cos(tha) ** 2 + 2.0 * np.sin(th) * np.cos(tha)
    )
    ath = -0.5 * np.sin(tha) * np.sin(d) * (
        np.sin(th) * np.sin(tha) * np.cos(d) + np.cos(th) * np.cos(tha) + 1.0)
    return ath, aphi


@njit(cache=True)
def fg_tilde(th, ph, tha, pha, thb, phb):
    """The F-tilde and G-tilde functions of the (3,3) polar equations."""
    st, ct = np.sin(th), np.cos(th)
    sa, ca = np.sin(tha), np.cos(tha)
    sb, cb = np.sin(thb), np.cos(thb)
    ft = 0.5 * (-sa * np.cos(ph - pha) * cb + ca * sb * np.cos(ph - phb) + st * ca
                - ct * sa * np.cos(ph - pha) + st * cb - ct * sb * np.cos(ph - phb))
    gt = 0.5 * (-ct * sa * np.sin(ph - pha) * cb
                + sb * np.cos(phb) * (st * sa * np.sin(pha) - np.sin(ph))
                + ct * ca * sb * np.sin(ph - phb)
                + sb * np.sin(phb) * (np.cos(ph) - st * sa * np.cos(pha))
                + sa * np.sin(pha - ph))
    return ft, gt


@njit(cache=True)
def rhs_polar(model, s, sa, sb, p, out):
    """Angle rates ``(dtheta, dphi)``; returns False near a pole."""
    th, ph = s[0], s[1]
    tha, pha = sa[0], sa[1]
    st = np.sin(th)
    if abs(st) < POLE_TOL:
        return False
    if model == QMM33:
        ft, gt = fg_tilde(th, ph, tha, pha, sb[0], sb[1])
        kre, kim = p[P_KRE], p[P_KIM]
        dth = kre * gt - kim * ft
        sdph = kre * ft + kim * gt
    else:
        f, g = fg(th, ph, tha, pha)
        lim = p[P_LIM]
        if model == QMM11:
            mu = p[P_MU]
            dth = mu * g
            sdph = mu * f
        elif model == QMM23:
            ath, aphi = a_theta_phi(th, ph, tha, pha)
            c = p[P_MU] + p[P_LRE]
            eta = p[P_ETA]
            dth = eta * ath + c * g - lim * f
            sdph = eta * aphi + c * f + lim * g
        else:
            mh = p[P_MU] + p[P_LRE]
            dth = mh * g - lim * f
            sdph = mh * f + lim * g
            if model == HYBRID22:
                # project B_ext x r onto the polar unit vectors
                bx, by, bz = p[P_BX], p[P_BY], p[P_BZ]
                cp, sp = np.cos(ph), np.sin(ph)
                dth += by * cp - bx * sp
                sdph += -np.cos(th) * (bx * cp + by * sp) + bz * st
    out[0] = dth
    out[1] = sdph / st
    out[2] = 0.0
    return True


@njit(cache=True)
def _to_vec(s, out):
    st = np.sin(s[0])
    out[0] = st * np.cos(s[1])
    out[1] = st * np.sin(s[1])
    out[2] = np.cos(s[0])


@njit(cache=True)
def _interp(ys, ds, L, n_pool, d_left_pool, s, h, rep, out):
    """Hermite interpolation at fractional node position ``s`` (ring buffer)."""
    j = int(np.floor(s))
    frac = s - j
    i0 = j % L
    if frac < 1e-13:
        for c in range(3):
            out[c] = ys[i0, c]
    else:
        i1 = (j + 1) % L
        f2 = frac * frac
        f3 = f2 * frac
        h00 = 2.0 * f3 - 3.0 * f2 + 1.0
        h10 = f3 - 2.0 * f2 + frac
        h01 = -2.0 * f3 + 3.0 * f2
        h11 = f3 - f2
        for c in range(3):
            d1 = d_left_pool[c] if j + 1 == n_pool else ds[i1, c]
            out[c] = h00 * ys[i0, c] + h10 * h * ds[i0, c] + h01 * ys[i1, c] + h11 * h * d1
    if rep == CARTESIAN:
        n = np.sqrt(_dot(out, out))
        for c in range(3):
            out[c] /= n


@njit(cache=True)
def _eval(model, rep, y, t_node, ys, ds, L, n_pool, d_left, lag_a, lag_b, h, p,
          ya, yb, out):
    """Evaluate the rhs at fractional node ``t_node``; fills delayed states."""
    _interp(ys, ds, L, n_pool, d_left, t_node - lag_a, h, rep, ya)
    if model == QMM33:
        _interp(ys, ds, L, n_pool, d_left, t_node - lag_b, h, rep, yb)
    if rep == CARTESIAN:
        rhs_cartesian(model, y, ya, yb, p, out)
        ok = True
    else:
        ok = rhs_polar(model, y, ya, yb, p, out)
    return ok


@njit(cache=True, nogil=True)
def run_rk4_delay(model, rep, p, pool_y, pool_d, d_left, lag_b, h, n_total, decim,
                  drift_limit):
    """Integrate from node ``N = len(pool_y) - 1`` up to node ``n_total``.

    Returns ``(status, last_node, out_t_idx, out_y, out_d, out_ya, out_yb,
    max_drift, sum_drift)``. Outputs are taken every ``decim`` nodes starting
    at node 0; delayed states are NaN inside the pool.
    """
    n_pool = pool_y.shape[0] - 1
    lag_a = float(n_pool)
    L = n_pool + 4
    ys = np.zeros((L, 3))
    ds = np.zeros((L, 3))
    n_out = n_total // decim + 1
    out_idx = np.zeros(n_out, dtype=np.int64)
    out_y = np.full((n_out, 3), np.nan)
    out_d = np.full((n_out, 3), np.nan)
    out_ya = np.full((n_out, 3), np.nan)
    out_yb = np.full((n_out, 3), np.nan)

    ya = np.zeros(3)
    yb = np.zeros(3)
    k1 = np.zeros(3)
    k2 = np.zeros(3)
    k3 = np.zeros(3)
    k4 = np.zeros(3)
    tmp = np.zeros(3)

    # pool outputs
    o = 0
    for k in range(n_pool + 1):
        if k % decim == 0 and o < n_out:
            out_idx[o] = k
            for c in range(3):
                out_y[o, c] = pool_y[k, c]
                out_d[o, c] = pool_d[k, c]
            o += 1
    # fill ring with the pool tail (the whole pool fits: L > n_pool)
    for k in range(n_pool + 1):
        for c in range(3):
            ys[k % L, c] = pool_y[k, c]
            ds[k % L, c] = pool_d[k, c]

    y = np.zeros(3)
    for c in range(3):
        y[c] = pool_y[n_pool, c]
    max_drift = 0.0
    sum_drift = 0.0
    status = 0
    k = n_pool
    # derivative at node N on the memory side (right derivative)
    ok = _eval(model, rep, y, float(k), ys, ds, L, n_pool, d_left, lag_a, lag_b, h, p,
               ya, yb, k1)
    if not ok:
        return STATUS_POLE, k, out_idx[:o], out_y[:o], out_d[:o], out_ya[:o], out_yb[:o], 0.0, 0.0
    for c in range(3):
        ds[k % L, c] = k1[c]
    if k % decim == 0:
        # node N output carries the memory-side derivative and its delayed states
        oo = k // decim
        for c in range(3):
            out_d[oo, c] = k1[c]
            out_ya[oo, c] = ya[c]
            out_yb[oo, c] = yb[c]

    while k < n_total:
        # stage 1 derivative is ds[k]
        for c in range(3):
            k1[c] = ds[k % L, c]
            tmp[c] = y[c] + 0.5 * h * k1[c]
        ok = _eval(model, rep, tmp, k + 0.5, ys, ds, L, n_pool, d_left, lag_a, lag_b, h, p,
                   ya, yb, k2)
        for c in range(3):
            tmp[c] = y[c] + 0.5 * h * k2[c]
        ok = ok and _eval(model, rep, tmp, k + 0.5, ys, ds, L, n_pool, d_left, lag_a, lag_b,
                          h, p, ya, yb, k3)
        for c in range(3):
            tmp[c] = y[c] + h * k3[c]
        ok = ok and _eval(model, rep, tmp, k + 1.0, ys, ds, L, n_pool, d_left, lag_a, lag_b,
                          h, p, ya, yb, k4)
        if not ok:
            status = STATUS_POLE
            break
        for c in range(3):
            y[c] = y[c] + h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c])
        if rep == CARTESIAN:
            n = np.sqrt(_dot(y, y))
            drift = abs(n - 1.0)
            for c in range(3):
                y[c] /= n
            sum_drift += drift
            if drift > max_drift:
                max_drift = drift
            if drift > drift_limit:
                status = STATUS_DRIFT
                k += 1
                break
        k += 1
        for c in range(3):
            ys[k % L, c] = y[c]
        ok = _eval(model, rep, y, float(k), ys, ds, L, n_pool, d_left, lag_a, lag_b, h, p,
                   ya, yb, k1)
        if not ok:
            status = STATUS_POLE
            break
        for c in range(3):
            ds[k % L, c] = k1[c]
        if k % decim == 0:
            oo = k // decim
            out_idx[oo] = k
            for c in range(3):
                out_y[oo, c] = y[c]
                out_d[oo, c] = k1[c]
                out_ya[oo, c] = ya[c]
                out_yb[oo, c] = yb[c]
            o = oo + 1
    return status, k, out_idx[:o], out_y[:o], out_d[:o], out_ya[:o], out_yb[:o], max_drift, sum_drift
