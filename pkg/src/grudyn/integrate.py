"""Fixed-step time integration of the continuous cell flow.

Forward and backward (negated field) integration with convergence,
escape, and recurrence detection. Fixed-step RK4 is the default: the field
is smooth and globally bounded, and reproducibility matters more here than
adaptivity.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .backend import kernels, EULER, RK4, ST_MAXED, ST_CONVERGED, ST_ESCAPED, ST_BLOWUP
from .dynamics import vector_field_batch
from .params import GruParams, ShapeError

SEARCH_HALF_WIDTH = 1.5  # default analysis window is [-1.5, 1.5]^d
ESCAPE_FACTOR = 10.0

_METHODS = {"euler": EULER, "rk4": RK4}


class NumericalBlowupError(RuntimeError):
    """Integration produced a non-finite state; carries the last valid step."""

    def __init__(self, last_state, step):
        super().__init__(f"non-finite state after step {step}")
        self.last_state = np.asarray(last_state)
        self.step = step


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk4"
    dt: float = 0.05
    max_steps: int = 20000
    convergence_tol: float = 1e-8
    recurrence_tol: float = 1e-4

    def __post_init__(self):
        if self.method not in _METHODS:
            raise ValueError(f"method must be one of {sorted(_METHODS)}")
        if self.dt <= 0 or self.max_steps < 1:
            raise ValueError("dt and max_steps must be positive")
        if self.convergence_tol <= 0 or self.recurrence_tol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    direction: str
    status: str

    def to_csv(self, path_or_file):
        """CSV export: header t,h1,...,hd, 17 significant digits."""
        d = self.states.shape[1]
        close = False
        if isinstance(path_or_file, (str, bytes)):
            f = open(path_or_file, "w")
            close = True
        else:
            f = path_or_file
        try:
            f.write("t," + ",".join(f"h{i+1}" for i in range(d)) + "\n")
            for t, row in zip(self.times, self.states):
                f.write(f"{t:.17g}," + ",".join(f"{v:.17g}" for v in row) + "\n")
        finally:
            if close:
                f.close()

    def to_csv_string(self) -> str:
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue()


_STATUS_NAMES = {ST_MAXED: "timeout", ST_CONVERGED: "converged", ST_ESCAPED: "escaped"}


def _kernel_args(params: GruParams):
    return (params.Uz, params.Ur, params.Uh, params.bz, params.br, params.bh)


def integrate(params: GruParams, h0, cfg: IntegratorConfig = IntegratorConfig(),
              direction: str = "forward", escape: float = None) -> Trajectory:
    """Integrate the flow from h0, recording every step."""
    if direction not in ("forward", "backward"):
        raise ValueError("direction must be 'forward' or 'backward'")
    h0 = np.asarray(h0, dtype=np.float64)
    if h0.shape != (params.d,):
        raise ShapeError(f"h0 must have shape ({params.d},), got {h0.shape}")
    if escape is None:
        escape = ESCAPE_FACTOR * SEARCH_HALF_WIDTH
    sign = 1.0 if direction == "forward" else -1.0
    states, status, n = kernels.integrate_record(
        *_kernel_args(params), h0, cfg.dt, cfg.max_steps, _METHODS[cfg.method],
        sign, cfg.convergence_tol, escape)
    if status == ST_BLOWUP:
        raise NumericalBlowupError(states[-1], n)
    times = cfg.dt * np.arange(states.shape[0])
    return Trajectory(times, np.asarray(states), direction, _STATUS_NAMES[status])


def _detect_recurrence(states, times, speeds, recurrence_tol):
    """Recurrence against a post-transient reference point.

    The reference sits at the midpoint of the recorded arc (the first half is
    discarded as transient). A later state must first leave the reference
    neighborhood and then re-enter within recurrence_tol while the flow speed
    stays above zero; the recurrence time is refined by parabolic
    interpolation of the sampled closest approach.
    """
    n = states.shape[0]
    ref_idx = n // 2
    if n - ref_idx < 10:
        return None
    ref = states[ref_idx]
    dist = np.linalg.norm(states[ref_idx:] - ref, axis=1)
    leave_r = 10.0 * recurrence_tol
    left = np.nonzero(dist > leave_r)[0]
    if left.size == 0:
        return None
    k0 = left[0]
    back = np.nonzero(dist[k0:] < recurrence_tol)[0]
    if back.size == 0:
        return None
    k1 = k0 + back[0]
    # walk to the local minimum of the approach
    while k1 + 1 < dist.size and dist[k1 + 1] < dist[k1]:
        k1 += 1
    t_ref = times[ref_idx]
    j = ref_idx + k1
    if 0 < j < n - 1:
        d0, d1, d2 = dist[k1 - 1], dist[k1], dist[k1 + 1]
        denom = d0 - 2 * d1 + d2
        off = 0.5 * (d0 - d2) / denom if abs(denom) > 1e-300 else 0.0
        off = float(np.clip(off, -1.0, 1.0))
    else:
        off = 0.0
    period = times[j] + off * (times[1] - times[0]) - t_ref
    if period <= 0 or speeds[ref_idx] <= 0:
        return None
    return ref, period


def integrate_until_convergence(params: GruParams, h0,
                                cfg: IntegratorConfig = IntegratorConfig(),
                                direction: str = "forward"):
    """Run the flow to a verdict.

    Returns (endpoint, status) with status in {"converged", "periodic",
    "timeout", "escaped"}. Periodic verdicts report a point on the orbit.
    """
    traj = integrate(params, h0, cfg, direction)
    if traj.status == "converged":
        return traj.states[-1], "converged"
    if traj.status == "escaped":
        return traj.states[-1], "escaped"
    speeds = np.linalg.norm(vector_field_batch(params, traj.states), axis=1)
    rec = _detect_recurrence(traj.states, traj.times, speeds, cfg.recurrence_tol)
    if rec is not None and speeds[traj.states.shape[0] // 2] > cfg.convergence_tol:
        return rec[0], "periodic"
    return traj.states[-1], "timeout"
