"""Pure numpy implementation of the kernels in ``_kernels.pyx``.

Selected by :mod:`superband.kernels` when the compiled module is missing or
``SUPERBAND_PURE=1`` is set. Results agree with the compiled path to rounding.
"""
import math

import numpy as np

ENVELOPE_FLOOR = 1e-150
STAGE_FLOOR = 1e-10


def _consts(t, k0, hbar, mass, amps, widths):
    beta = hbar * t / (2.0 * mass)
    a = 1.0 / np.asarray(widths) ** 2 + 1j * beta
    c = np.asarray(amps) / np.sqrt(2.0 * a)
    return hbar * k0 * t / mass, c, 1.0 / (4.0 * a), 1.0 / (2.0 * a)


def _envelope(x, consts):
    shift, c, p, q = consts
    xi = x - shift
    g = np.zeros(np.shape(x), dtype=np.complex128)
    dg = np.zeros(np.shape(x), dtype=np.complex128)
    for cj, pj, qj in zip(c, p, q):
        term = cj * np.exp(-xi * xi * pj)
        g += term
        dg -= term * xi * qj
    return g, dg


def superband_field(x, t, k0, hbar, mass, amps, widths):
    x = np.asarray(x, dtype=np.float64)
    g, dg = _envelope(x, _consts(t, k0, hbar, mass, amps, widths))
    beta = hbar * t / (2.0 * mass)
    carrier = np.exp(1j * (k0 * x - beta * k0 * k0))
    return g * carrier, (dg + 1j * k0 * g) * carrier


def _velocity(x, consts, k0, vscale):
    g, dg = _envelope(x, consts)
    bad = np.abs(g) < ENVELOPE_FLOOR
    with np.errstate(divide="ignore", invalid="ignore"):
        v = vscale * (k0 + np.imag(dg / g))
    v[bad] = np.nan
    return v, bad


def guiding_velocity(x, t, k0, hbar, mass, amps, widths):
    x = np.asarray(x, dtype=np.float64)
    v, bad = _velocity(x, _consts(t, k0, hbar, mass, amps, widths), k0, hbar / mass)
    return v, bad.astype(np.uint8)


def _rk4_step(x, h, c0, ch, c1, k0, vscale, stage_tol):
    # returns (x_new, code): 0 accepted, 1 node underflow, 2 stage spread too large
    k1, b1 = _velocity(x, c0, k0, vscale)
    k2, b2 = _velocity(x + 0.5 * h * k1, ch, k0, vscale)
    k3, b3 = _velocity(x + 0.5 * h * k2, ch, k0, vscale)
    k4, b4 = _velocity(x + h * k3, c1, k0, vscale)
    bad = b1 | b2 | b3 | b4
    ks = np.stack([k1, k2, k3, k4])
    with np.errstate(invalid="ignore"):
        stiff = h * (ks.max(axis=0) - ks.min(axis=0)) > stage_tol
    code = np.where(bad, 1, np.where(stiff, 2, 0))
    return x + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0, code


def _substep(x, t, h, min_dt, k0, hbar, mass, t_shift, amps, widths, stage_tol):
    vscale = hbar / mass
    sub = 0.5 * h
    done = 0.0
    x = np.array([x], dtype=np.float64)
    while done < h:
        step = min(sub, h - done)
        c0 = _consts(t + done - t_shift, k0, hbar, mass, amps, widths)
        ch = _consts(t + done + 0.5 * step - t_shift, k0, hbar, mass, amps, widths)
        c1 = _consts(t + done + step - t_shift, k0, hbar, mass, amps, widths)
        tol = stage_tol if sub >= 2.0 * STAGE_FLOOR else math.inf
        xt, code = _rk4_step(x, step, c0, ch, c1, k0, vscale, tol)
        if code[0]:
            sub *= 0.5
            if code[0] == 1 and sub < min_dt:
                return None
            continue
        x = xt
        done += step
        if 2.0 * sub <= h:
            sub *= 2.0
    return float(x[0])


def rk4_trajectories(x0, t_out, dt, t_shift, k0, hbar, mass, amps, widths,
                     min_dt=1e-6, num_threads=1, stage_tol=1e-4):
    cur = np.array(x0, dtype=np.float64, copy=True)
    t_out = np.asarray(t_out, dtype=np.float64)
    n, m = cur.size, t_out.size
    pos = np.empty((n, m))
    failed = np.zeros(n, dtype=bool)
    vscale = hbar / mass
    pos[:, 0] = cur
    for k in range(1, m):
        span = t_out[k] - t_out[k - 1]
        nsteps = max(1, math.ceil(span / dt - 1e-9))
        h = span / nsteps
        for s in range(nsteps):
            t = t_out[k - 1] + s * h
            c0 = _consts(t - t_shift, k0, hbar, mass, amps, widths)
            ch = _consts(t + 0.5 * h - t_shift, k0, hbar, mass, amps, widths)
            c1 = _consts(t + h - t_shift, k0, hbar, mass, amps, widths)
            live = ~failed
            xt, code = _rk4_step(cur[live], h, c0, ch, c1, k0, vscale, stage_tol)
            bad = code != 0
            idx = np.flatnonzero(live)
            ok = ~bad
            cur[idx[ok]] = xt[ok]
            for i in idx[bad]:
                res = _substep(cur[i], t, h, min_dt, k0, hbar, mass, t_shift, amps, widths,
                               stage_tol)
                if res is None:
                    failed[i] = True
                else:
                    cur[i] = res
        pos[:, k] = np.where(failed, np.nan, cur)
    return pos, failed
