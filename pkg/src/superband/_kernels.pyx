# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the closed-form superposition field.

The field is a sum of freely evolving complex Gaussians

    psi(x, t) = sum_j c_j exp(-xi**2 / (4 a_j)) * exp(i k0 x - i beta k0**2),

with ``a_j = 1/w_j**2 + i beta``, ``beta = hbar t / (2 m)``, ``xi = x - hbar k0 t / m``
and ``c_j = A_j / sqrt(2 a_j)``. The guiding velocity only needs the envelope
``g = sum_j c_j exp(-xi**2 / (4 a_j))`` and its derivative.

Mirrors ``superband._pykernels`` function for function.
"""
import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange

cdef extern from "complex.h" nogil:
    double complex cexp(double complex)
    double complex csqrt(double complex)
    double cabs(double complex)
    double cimag(double complex)
    double creal(double complex)

cdef extern from "math.h" nogil:
    double ceil(double)
    double fabs(double)
    double INFINITY

DEF MAX_TERMS = 8
# |g|**2 below this is treated as a node underflow
DEF ENVELOPE_FLOOR = 1e-150
# smallest substep for stage-spread refinement (node underflow uses min_dt)
DEF STAGE_FLOOR = 1e-10

cnp.import_array()


cdef struct TimeConsts:
    int n
    double shift
    double complex c[MAX_TERMS]
    double complex p[MAX_TERMS]
    double complex q[MAX_TERMS]


cdef inline void _consts(TimeConsts* tc, double t, double k0, double hbar, double mass,
                         const double* amps, const double* widths, int n) noexcept nogil:
    cdef int j
    cdef double beta = hbar * t / (2.0 * mass)
    cdef double complex a
    tc.n = n
    tc.shift = hbar * k0 * t / mass
    for j in range(n):
        a = 1.0 / (widths[j] * widths[j]) + 1j * beta
        tc.c[j] = amps[j] / csqrt(2.0 * a)
        tc.p[j] = 1.0 / (4.0 * a)
        tc.q[j] = 1.0 / (2.0 * a)


cdef inline int _velocity(const TimeConsts* tc, double x, double k0, double vscale,
                          double* out) noexcept nogil:
    cdef int j
    cdef double xi = x - tc.shift
    cdef double complex g = 0.0
    cdef double complex dg = 0.0
    cdef double complex term
    for j in range(tc.n):
        term = tc.c[j] * cexp(-xi * xi * tc.p[j])
        g = g + term
        dg = dg - term * xi * tc.q[j]
    if cabs(g) < ENVELOPE_FLOOR:
        return 1
    out[0] = vscale * (k0 + cimag(dg / g))
    return 0


def superband_field(double[::1] x, double t, double k0, double hbar, double mass,
                    double[::1] amps, double[::1] widths):
    """Return ``(psi, dpsi_dx)`` of the superposition at time ``t``."""
    cdef Py_ssize_t i, n = x.shape[0]
    cdef int j, nt = amps.shape[0]
    if nt > MAX_TERMS:
        raise ValueError("too many Gaussian terms")
    cdef TimeConsts tc
    _consts(&tc, t, k0, hbar, mass, &amps[0], &widths[0], nt)
    cdef double beta = hbar * t / (2.0 * mass)
    psi_arr = np.empty(n, dtype=np.complex128)
    dpsi_arr = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] psi = psi_arr
    cdef double complex[::1] dpsi = dpsi_arr
    cdef double complex g, dg, term, carrier
    cdef double xi
    with nogil:
        for i in range(n):
            xi = x[i] - tc.shift
            g = 0.0
            dg = 0.0
            for j in range(nt):
                term = tc.c[j] * cexp(-xi * xi * tc.p[j])
                g = g + term
                dg = dg - term * xi * tc.q[j]
            carrier = cexp(1j * (k0 * x[i] - beta * k0 * k0))
            psi[i] = g * carrier
            dpsi[i] = (dg + 1j * k0 * g) * carrier
    return psi_arr, dpsi_arr


def guiding_velocity(double[::1] x, double t, double k0, double hbar, double mass,
                     double[::1] amps, double[::1] widths):
    """Return ``(v, underflow)``; ``v`` is NaN wherever ``underflow`` is set."""
    cdef Py_ssize_t i, n = x.shape[0]
    cdef int nt = amps.shape[0]
    if nt > MAX_TERMS:
        raise ValueError("too many Gaussian terms")
    cdef TimeConsts tc
    _consts(&tc, t, k0, hbar, mass, &amps[0], &widths[0], nt)
    v_arr = np.empty(n, dtype=np.float64)
    bad_arr = np.zeros(n, dtype=np.uint8)
    cdef double[::1] v = v_arr
    cdef unsigned char[::1] bad = bad_arr
    cdef double vscale = hbar / mass
    with nogil:
        for i in range(n):
            if _velocity(&tc, x[i], k0, vscale, &v[i]):
                v[i] = 0.0 / 0.0
                bad[i] = 1
    return v_arr, bad_arr


cdef inline int _rk4_step(double* x, double t, double h, const TimeConsts* t0,
                          const TimeConsts* th, const TimeConsts* t1,
                          double k0, double vscale, double stage_tol) noexcept nogil:
    # 0 accepted, 1 node underflow, 2 stages disagree by more than stage_tol
    cdef double k1, k2, k3, k4, lo, hi
    if _velocity(t0, x[0], k0, vscale, &k1):
        return 1
    if _velocity(th, x[0] + 0.5 * h * k1, k0, vscale, &k2):
        return 1
    if _velocity(th, x[0] + 0.5 * h * k2, k0, vscale, &k3):
        return 1
    if _velocity(t1, x[0] + h * k3, k0, vscale, &k4):
        return 1
    lo = min(min(k1, k2), min(k3, k4))
    hi = max(max(k1, k2), max(k3, k4))
    if h * (hi - lo) > stage_tol:
        return 2
    x[0] = x[0] + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
    return 0


cdef int _substep(double* x, double t, double h, double min_dt, double k0, double hbar,
                  double mass, double t_shift, const double* amps, const double* widths,
                  int nt, double stage_tol) noexcept nogil:
    # covers [t, t + h] with halved steps after a rejection; steps regrow after success
    cdef TimeConsts c0, ch, c1
    cdef double sub = 0.5 * h
    cdef double done = 0.0
    cdef double step, xt, tol
    cdef double vscale = hbar / mass
    cdef int code
    while done < h:
        step = sub
        if done + step > h:
            step = h - done
        _consts(&c0, t + done - t_shift, k0, hbar, mass, amps, widths, nt)
        _consts(&ch, t + done + 0.5 * step - t_shift, k0, hbar, mass, amps, widths, nt)
        _consts(&c1, t + done + step - t_shift, k0, hbar, mass, amps, widths, nt)
        xt = x[0]
        # at the smallest step only underflow can reject
        tol = stage_tol if sub >= 2.0 * STAGE_FLOOR else INFINITY
        code = _rk4_step(&xt, t + done, step, &c0, &ch, &c1, k0, vscale, tol)
        if code:
            sub = 0.5 * sub
            if code == 1 and sub < min_dt:
                return 1
            continue
        x[0] = xt
        done = done + step
        if 2.0 * sub <= h:
            sub = 2.0 * sub
    return 0


def rk4_trajectories(double[::1] x0, double[::1] t_out, double dt, double t_shift,
                     double k0, double hbar, double mass, double[::1] amps,
                     double[::1] widths, double min_dt=1e-6, int num_threads=1,
                     double stage_tol=1e-4):
    """Integrate ``dx/dt = v(x, t)`` with classical RK4 for every start in ``x0``.

    Output times must start at 0 and increase. Each output interval is split
    into equal steps no longer than ``dt``. A step is retried with halved
    substeps when it underflows at a node or when ``h * (max k - min k)`` over
    its four stages exceeds ``stage_tol``. Returns ``(positions, failed)``
    with positions of shape ``(len(x0), len(t_out))``.
    """
    cdef Py_ssize_t n = x0.shape[0], m = t_out.shape[0]
    cdef int nt = amps.shape[0]
    if nt > MAX_TERMS:
        raise ValueError("too many Gaussian terms")
    pos_arr = np.empty((n, m), dtype=np.float64)
    failed_arr = np.zeros(n, dtype=np.uint8)
    cur_arr = np.array(x0, dtype=np.float64, copy=True)
    cdef double[:, ::1] pos = pos_arr
    cdef unsigned char[::1] failed = failed_arr
    cdef double[::1] cur = cur_arr
    cdef double vscale = hbar / mass
    cdef TimeConsts c0, ch, c1
    cdef Py_ssize_t i, k, s, nsteps
    cdef double t, h, span, xt
    cdef const double* pa = &amps[0]
    cdef const double* pw = &widths[0]

    for i in range(n):
        pos[i, 0] = cur[i]
    for k in range(1, m):
        span = t_out[k] - t_out[k - 1]
        nsteps = <Py_ssize_t> ceil(span / dt - 1e-9)
        if nsteps < 1:
            nsteps = 1
        h = span / nsteps
        for s in range(nsteps):
            t = t_out[k - 1] + s * h
            _consts(&c0, t - t_shift, k0, hbar, mass, pa, pw, nt)
            _consts(&ch, t + 0.5 * h - t_shift, k0, hbar, mass, pa, pw, nt)
            _consts(&c1, t + h - t_shift, k0, hbar, mass, pa, pw, nt)
            for i in prange(n, nogil=True, num_threads=num_threads, schedule="static"):
                if failed[i]:
                    continue
                xt = cur[i]
                if _rk4_step(&xt, t, h, &c0, &ch, &c1, k0, vscale, stage_tol):
                    xt = cur[i]
                    if _substep(&xt, t, h, min_dt, k0, hbar, mass, t_shift, pa, pw, nt,
                                stage_tol):
                        failed[i] = 1
                        continue
                cur[i] = xt
        for i in range(n):
            pos[i, k] = cur[i] if not failed[i] else 0.0 / 0.0
    return pos_arr, failed_arr.astype(bool)
