"""Gate evaluation, discrete update, continuous vector field, analytic Jacobian.

The autonomous cell follows

    z = sigmoid(Uz h + bz)
    r = sigmoid(Ur h + br)
    dh/dt = (z - 1) * (h - tanh(Uh (r * h) + bh))

and its forward-Euler step with dt = 1 is exactly the discrete update with no
input. bh is added outside the Uh product throughout.
"""

from __future__ import annotations

import numpy as np

from .params import GruParams, InputParams, ShapeError


def sigmoid(x):
    """Numerically stable logistic function, elementwise."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    np.exp(-x, where=pos, out=out)
    out[pos] = 1.0 / (1.0 + out[pos])
    neg = ~pos
    ex = np.exp(x[neg])
    out[neg] = ex / (1.0 + ex)
    return out


def _check_state(params: GruParams, h) -> np.ndarray:
    h = np.asarray(h, dtype=np.float64)
    if h.shape != (params.d,):
        raise ShapeError(f"state must have shape ({params.d},), got {h.shape}")
    return h


def gates(params: GruParams, h):
    """Update and reset gate values at state h; both lie strictly in (0, 1)."""
    h = _check_state(params, h)
    z = sigmoid(params.Uz @ h + params.bz)
    r = sigmoid(params.Ur @ h + params.br)
    return z, r


def vector_field(params: GruParams, h):
    """Time derivative of the hidden state at h (the autonomous flow)."""
    h = _check_state(params, h)
    z, r = gates(params, h)
    t = np.tanh(params.Uh @ (r * h) + params.bh)
    return (z - 1.0) * (h - t)


def vector_field_batch(params: GruParams, H):
    """vector_field evaluated on rows of H with shape (n, d)."""
    H = np.asarray(H, dtype=np.float64)
    if H.ndim != 2 or H.shape[1] != params.d:
        raise ShapeError(f"batch must have shape (n, {params.d}), got {H.shape}")
    z = sigmoid(H @ params.Uz.T + params.bz)
    r = sigmoid(H @ params.Ur.T + params.br)
    t = np.tanh((r * H) @ params.Uh.T + params.bh)
    return (z - 1.0) * (H - t)


def jacobian(params: GruParams, h):
    """Exact derivative of the vector field at h.

    With a = Uh (r*h) + bh, t = tanh(a):
      J = diag(h - t) Dz Uz + diag(z - 1) (I - Dt Uh (diag(r) + diag(h) Dr Ur))
    where Dz = diag(z(1-z)), Dr = diag(r(1-r)), Dt = diag(1 - t^2).
    """
    h = _check_state(params, h)
    d = params.d
    z, r = gates(params, h)
    t = np.tanh(params.Uh @ (r * h) + params.bh)
    dz = z * (1.0 - z)
    dr = r * (1.0 - r)
    dt = 1.0 - t * t
    inner = params.Uh * r[None, :] + (params.Uh * (h * dr)[None, :]) @ params.Ur
    J = ((h - t) * dz)[:, None] * params.Uz
    J += (z - 1.0)[:, None] * (np.eye(d) - dt[:, None] * inner)
    return J


def jacobian_batch(params: GruParams, H):
    """Jacobians at each row of H; returns shape (n, d, d)."""
    H = np.asarray(H, dtype=np.float64)
    n, d = H.shape
    z = sigmoid(H @ params.Uz.T + params.bz)
    r = sigmoid(H @ params.Ur.T + params.br)
    t = np.tanh((r * H) @ params.Uh.T + params.bh)
    dz = z * (1.0 - z)
    dr = r * (1.0 - r)
    dt = 1.0 - t * t
    inner = params.Uh[None, :, :] * r[:, None, :]
    inner += np.einsum("ik,nk,kj->nij", params.Uh, H * dr, params.Ur)
    J = ((H - t) * dz)[:, :, None] * params.Uz[None, :, :]
    J += (z - 1.0)[:, :, None] * (np.eye(d)[None, :, :] - dt[:, :, None] * inner)
    return J


def discrete_step(params: GruParams, h, inputs: InputParams = None, x=None):
    """One step of the discrete cell.

    Without input this is computed as h + vector_field(h), which is the exact
    forward-Euler identity and keeps the two routes bit-equal. With an input,
    the gate pre-activations gain the W x terms.
    """
    if (inputs is None) != (x is None):
        raise ShapeError("x must be given if and only if inputs is given")
    h = _check_state(params, h)
    if inputs is None:
        return h + vector_field(params, h)
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (inputs.p,):
        raise ShapeError(f"input must have shape ({inputs.p},), got {x.shape}")
    z = sigmoid(inputs.Wz @ x + params.Uz @ h + params.bz)
    r = sigmoid(inputs.Wr @ x + params.Ur @ h + params.br)
    c = np.tanh(inputs.Wh @ x + params.Uh @ (r * h) + params.bh)
    return z * h + (1.0 - z) * c
