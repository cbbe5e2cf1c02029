"""Reference numpy kernels for fixed-step integration of the cell's flow.

The compiled extension (_fastkern) implements the same three entry points
with identical semantics; the backend module picks whichever is available.
Status codes: 0 = step budget exhausted, 1 = converged/stopped, 2 = escaped,
3 = non-finite state.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

EULER = 0
RK4 = 1

ST_MAXED = 0
ST_CONVERGED = 1
ST_ESCAPED = 2
ST_BLOWUP = 3


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    np.exp(-x, where=pos, out=out)
    out[pos] = 1.0 / (1.0 + out[pos])
    neg = ~pos
    ex = np.exp(x[neg])
    out[neg] = ex / (1.0 + ex)
    return out


def _field(Uz, Ur, Uh, bz, br, bh, H, sign):
    z = _sigmoid(H @ Uz.T + bz)
    r = _sigmoid(H @ Ur.T + br)
    t = np.tanh((r * H) @ Uh.T + bh)
    return sign * ((z - 1.0) * (H - t))


def _advance(Uz, Ur, Uh, bz, br, bh, H, dt, method, sign):
    if method == EULER:
        return H + dt * _field(Uz, Ur, Uh, bz, br, bh, H, sign)
    k1 = _field(Uz, Ur, Uh, bz, br, bh, H, sign)
    k2 = _field(Uz, Ur, Uh, bz, br, bh, H + 0.5 * dt * k1, sign)
    k3 = _field(Uz, Ur, Uh, bz, br, bh, H + 0.5 * dt * k2, sign)
    k4 = _field(Uz, Ur, Uh, bz, br, bh, H + dt * k3, sign)
    return H + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_record(Uz, Ur, Uh, bz, br, bh, h0, dt, max_steps, method, sign,
                     conv_tol, escape):
    """Integrate one trajectory, recording every step.

    Returns (states, status, n_steps) where states has shape (n_steps+1, d)
    and includes h0 as its first row.
    """
    d = h0.shape[0]
    states = np.empty((max_steps + 1, d))
    states[0] = h0
    H = h0[None, :].copy()
    status = ST_MAXED
    k = 0
    for k in range(1, max_steps + 1):
        H = _advance(Uz, Ur, Uh, bz, br, bh, H, dt, method, sign)
        if not np.all(np.isfinite(H)):
            k -= 1
            status = ST_BLOWUP
            break
        states[k] = H[0]
        if np.max(np.abs(H)) > escape:
            status = ST_ESCAPED
            break
        if np.linalg.norm(_field(Uz, Ur, Uh, bz, br, bh, H, 1.0)) < conv_tol:
            status = ST_CONVERGED
            break
    return states[: k + 1], status, k


def integrate_final_batch(Uz, Ur, Uh, bz, br, bh, H0, dt, max_steps, method,
                          sign, conv_tol, escape):
    """Advance each row of H0 until its field norm drops below conv_tol,
    it escapes, or the budget runs out. Returns (H, status, steps)."""
    n = H0.shape[0]
    H = H0.copy()
    status = np.zeros(n, dtype=np.int64)
    steps = np.full(n, max_steps, dtype=np.int64)
    active = np.ones(n, dtype=bool)
    for k in range(1, max_steps + 1):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        A = _advance(Uz, Ur, Uh, bz, br, bh, H[idx], dt, method, sign)
        bad = ~np.all(np.isfinite(A), axis=1)
        if bad.any():
            A[bad] = H[idx][bad]
        H[idx] = A
        fn = np.linalg.norm(_field(Uz, Ur, Uh, bz, br, bh, A, 1.0), axis=1)
        esc = np.max(np.abs(A), axis=1) > escape
        conv = fn < conv_tol
        done = bad | esc | conv
        st = np.zeros(idx.size, dtype=np.int64)
        st[conv] = ST_CONVERGED
        st[esc] = ST_ESCAPED
        st[bad] = ST_BLOWUP
        fin = idx[done]
        status[fin] = st[done]
        steps[fin] = k
        active[fin] = False
    return H, status, steps


def scan_batch(Uz, Ur, Uh, bz, br, bh, H0, dt, max_steps, method, sign,
               stop_pts, stop_tol, track_pts, track_r, escape):
    """Grid-scan integrator used by the homoclinic machinery.

    Each row runs until within stop_tol of a stop point (typically the
    hyperbolic sinks, where the fate is settled), escapes, or exhausts the
    budget. ever_beyond[i, j] records whether row i was ever farther than
    track_r from track point j.
    """
    n = H0.shape[0]
    H = H0.copy()
    status = np.zeros(n, dtype=np.int64)
    ever = np.zeros((n, max(1, track_pts.shape[0])), dtype=np.uint8)
    if track_pts.shape[0]:
        dist0 = np.linalg.norm(H[:, None, :] - track_pts[None, :, :], axis=2)
        ever[:, : track_pts.shape[0]] = dist0 > track_r
    active = np.ones(n, dtype=bool)
    for _ in range(max_steps):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        A = _advance(Uz, Ur, Uh, bz, br, bh, H[idx], dt, method, sign)
        bad = ~np.all(np.isfinite(A), axis=1)
        if bad.any():
            A[bad] = H[idx][bad]
        H[idx] = A
        if track_pts.shape[0]:
            dist = np.linalg.norm(A[:, None, :] - track_pts[None, :, :], axis=2)
            ever[idx] |= (dist > track_r).astype(np.uint8)
        st = np.zeros(idx.size, dtype=np.int64)
        esc = np.max(np.abs(A), axis=1) > escape
        st[esc] = ST_ESCAPED
        if stop_pts is not None and stop_pts.shape[0]:
            sd = np.linalg.norm(A[:, None, :] - stop_pts[None, :, :], axis=2)
            st[np.min(sd, axis=1) < stop_tol] = ST_CONVERGED
        st[bad] = ST_BLOWUP
        done = st != 0
        fin = idx[done]
        status[fin] = st[done]
        active[fin] = False
    return H, status, ever
