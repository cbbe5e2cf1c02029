# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twin of _pykernels: fixed-step integration of the cell's flow.

Semantics and status codes match _pykernels exactly; the python module is
the reference. Hot loops are scalar over the (small) state dimension.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, tanh, fabs, sqrt

cnp.import_array()

BACKEND_NAME = "cython"

EULER = 0
RK4 = 1

ST_MAXED = 0
ST_CONVERGED = 1
ST_ESCAPED = 2
ST_BLOWUP = 3

DEF MAXD = 64


cdef inline double _sig(double x) nogil:
    cdef double e
    if x >= 0.0:
        e = exp(-x)
        return 1.0 / (1.0 + e)
    e = exp(x)
    return e / (1.0 + e)


cdef void _field(const double[:, ::1] Uz, const double[:, ::1] Ur,
                 const double[:, ::1] Uh, const double[::1] bz,
                 const double[::1] br, const double[::1] bh,
                 const double* h, double sign, int d, double* out) nogil:
    cdef double rh[MAXD]
    cdef double az, ar, ah, z, r, t
    cdef int i, j
    for i in range(d):
        ar = br[i]
        for j in range(d):
            ar += Ur[i, j] * h[j]
        rh[i] = _sig(ar) * h[i]
    for i in range(d):
        az = bz[i]
        ah = bh[i]
        for j in range(d):
            az += Uz[i, j] * h[j]
            ah += Uh[i, j] * rh[j]
        z = _sig(az)
        t = tanh(ah)
        out[i] = sign * ((z - 1.0) * (h[i] - t))


cdef void _advance(const double[:, ::1] Uz, const double[:, ::1] Ur,
                   const double[:, ::1] Uh, const double[::1] bz,
                   const double[::1] br, const double[::1] bh,
                   double* h, double dt, int method, double sign, int d) nogil:
    cdef double k1[MAXD]
    cdef double k2[MAXD]
    cdef double k3[MAXD]
    cdef double k4[MAXD]
    cdef double tmp[MAXD]
    cdef int i
    _field(Uz, Ur, Uh, bz, br, bh, h, sign, d, k1)
    if method == EULER:
        for i in range(d):
            h[i] += dt * k1[i]
        return
    for i in range(d):
        tmp[i] = h[i] + 0.5 * dt * k1[i]
    _field(Uz, Ur, Uh, bz, br, bh, tmp, sign, d, k2)
    for i in range(d):
        tmp[i] = h[i] + 0.5 * dt * k2[i]
    _field(Uz, Ur, Uh, bz, br, bh, tmp, sign, d, k3)
    for i in range(d):
        tmp[i] = h[i] + dt * k3[i]
    _field(Uz, Ur, Uh, bz, br, bh, tmp, sign, d, k4)
    for i in range(d):
        h[i] += (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])


def integrate_record(double[:, ::1] Uz, double[:, ::1] Ur, double[:, ::1] Uh,
                     double[::1] bz, double[::1] br, double[::1] bh,
                     double[::1] h0, double dt, int max_steps, int method,
                     double sign, double conv_tol, double escape):
    cdef int d = h0.shape[0]
    if d > MAXD:
        raise ValueError(f"state dimension {d} exceeds kernel limit {MAXD}")
    states_arr = np.empty((max_steps + 1, d))
    cdef double[:, ::1] states = states_arr
    cdef double h[MAXD]
    cdef double f[MAXD]
    cdef double fn, mx, v
    cdef int i, k, last = 0
    cdef int status = ST_MAXED
    cdef bint finite
    for i in range(d):
        h[i] = h0[i]
        states[0, i] = h0[i]
    for k in range(1, max_steps + 1):
        _advance(Uz, Ur, Uh, bz, br, bh, h, dt, method, sign, d)
        finite = True
        mx = 0.0
        for i in range(d):
            v = h[i]
            if v != v or v > 1e300 or v < -1e300:
                finite = False
            if fabs(v) > mx:
                mx = fabs(v)
        if not finite:
            status = ST_BLOWUP
            break
        last = k
        for i in range(d):
            states[k, i] = h[i]
        if mx > escape:
            status = ST_ESCAPED
            break
        _field(Uz, Ur, Uh, bz, br, bh, h, 1.0, d, f)
        fn = 0.0
        for i in range(d):
            fn += f[i] * f[i]
        if sqrt(fn) < conv_tol:
            status = ST_CONVERGED
            break
    return states_arr[: last + 1], status, last


def integrate_final_batch(double[:, ::1] Uz, double[:, ::1] Ur,
                          double[:, ::1] Uh, double[::1] bz, double[::1] br,
                          double[::1] bh, double[:, ::1] H0, double dt,
                          int max_steps, int method, double sign,
                          double conv_tol, double escape):
    cdef int n = H0.shape[0]
    cdef int d = H0.shape[1]
    if d > MAXD:
        raise ValueError(f"state dimension {d} exceeds kernel limit {MAXD}")
    H_arr = np.array(H0, copy=True)
    status_arr = np.zeros(n, dtype=np.int64)
    steps_arr = np.full(n, max_steps, dtype=np.int64)
    cdef double[:, ::1] H = H_arr
    cdef long[::1] status = status_arr
    cdef long[::1] steps = steps_arr
    cdef double h[MAXD]
    cdef double f[MAXD]
    cdef double fn, mx, v
    cdef int i, k, p, st
    cdef bint finite
    with nogil:
        for p in range(n):
            for i in range(d):
                h[i] = H[p, i]
            st = ST_MAXED
            for k in range(1, max_steps + 1):
                _advance(Uz, Ur, Uh, bz, br, bh, h, dt, method, sign, d)
                finite = True
                mx = 0.0
                for i in range(d):
                    v = h[i]
                    if v != v or v > 1e300 or v < -1e300:
                        finite = False
                    if fabs(v) > mx:
                        mx = fabs(v)
                if not finite:
                    st = ST_BLOWUP
                    break
                for i in range(d):
                    H[p, i] = h[i]
                if mx > escape:
                    st = ST_ESCAPED
                    break
                _field(Uz, Ur, Uh, bz, br, bh, h, 1.0, d, f)
                fn = 0.0
                for i in range(d):
                    fn += f[i] * f[i]
                if sqrt(fn) < conv_tol:
                    st = ST_CONVERGED
                    break
            status[p] = st
            if st != ST_MAXED:
                steps[p] = k
    return H_arr, status_arr, steps_arr


def scan_batch(double[:, ::1] Uz, double[:, ::1] Ur, double[:, ::1] Uh,
               double[::1] bz, double[::1] br, double[::1] bh,
               double[:, ::1] H0, double dt, int max_steps, int method,
               double sign, stop_pts, double stop_tol, track_pts,
               double track_r, double escape):
    cdef int n = H0.shape[0]
    cdef int d = H0.shape[1]
    if d > MAXD:
        raise ValueError(f"state dimension {d} exceeds kernel limit {MAXD}")
    cdef double[:, ::1] stops
    cdef double[:, ::1] tracks
    if stop_pts is None:
        stops = np.empty((0, d))
    else:
        stops = np.ascontiguousarray(stop_pts, dtype=np.float64)
    tracks = np.ascontiguousarray(track_pts, dtype=np.float64)
    cdef int n_stop = stops.shape[0]
    cdef int n_track = tracks.shape[0]
    H_arr = np.array(H0, copy=True)
    status_arr = np.zeros(n, dtype=np.int64)
    ever_arr = np.zeros((n, max(1, n_track)), dtype=np.uint8)
    cdef double[:, ::1] H = H_arr
    cdef long[::1] status = status_arr
    cdef unsigned char[:, ::1] ever = ever_arr
    cdef double h[MAXD]
    cdef double mx, v, dist, dd
    cdef int i, j, k, p, st
    cdef bint finite, hit
    cdef double tr2 = track_r * track_r
    cdef double st2 = stop_tol * stop_tol
    with nogil:
        for p in range(n):
            for i in range(d):
                h[i] = H[p, i]
            for j in range(n_track):
                dist = 0.0
                for i in range(d):
                    dd = h[i] - tracks[j, i]
                    dist += dd * dd
                if dist > tr2:
                    ever[p, j] = 1
            st = ST_MAXED
            for k in range(1, max_steps + 1):
                _advance(Uz, Ur, Uh, bz, br, bh, h, dt, method, sign, d)
                finite = True
                mx = 0.0
                for i in range(d):
                    v = h[i]
                    if v != v or v > 1e300 or v < -1e300:
                        finite = False
                    if fabs(v) > mx:
                        mx = fabs(v)
                if not finite:
                    st = ST_BLOWUP
                    break
                for i in range(d):
                    H[p, i] = h[i]
                for j in range(n_track):
                    if not ever[p, j]:
                        dist = 0.0
                        for i in range(d):
                            dd = h[i] - tracks[j, i]
                            dist += dd * dd
                        if dist > tr2:
                            ever[p, j] = 1
                hit = False
                for j in range(n_stop):
                    dist = 0.0
                    for i in range(d):
                        dd = h[i] - stops[j, i]
                        dist += dd * dd
                    if dist < st2:
                        hit = True
                        break
                if hit:
                    st = ST_CONVERGED
                    break
                if mx > escape:
                    st = ST_ESCAPED
                    break
            status[p] = st
    return H_arr, status_arr, ever_arr
