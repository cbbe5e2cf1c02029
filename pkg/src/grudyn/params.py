"""Parameter containers for the gated recurrent cell and its JSON model format."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


class ShapeError(ValueError):
    """Raised when an array argument has an inconsistent shape."""


def _as_matrix(a, d, p, name):
    m = np.asarray(a, dtype=np.float64)
    if m.shape != (d, p):
        raise ShapeError(f"{name} must have shape {(d, p)}, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def _as_vector(v, d, name):
    x = np.asarray(v, dtype=np.float64)
    if x.shape != (d,):
        raise ShapeError(f"{name} must have shape {(d,)}, got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite entries")
    return x


@dataclass(frozen=True)
class GruParams:
    """Recurrent weights and biases of a d-dimensional gated cell.

    These are the parameters of the autonomous system; input weights live in
    :class:`InputParams`. Arrays are copied and frozen at construction.
    """

    d: int
    Uz: np.ndarray
    Ur: np.ndarray
    Uh: np.ndarray
    bz: np.ndarray
    br: np.ndarray
    bh: np.ndarray

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be a positive integer")
        for name in ("Uz", "Ur", "Uh"):
            m = _as_matrix(getattr(self, name), self.d, self.d, name)
            m.flags.writeable = False
            object.__setattr__(self, name, m)
        for name in ("bz", "br", "bh"):
            v = _as_vector(getattr(self, name), self.d, name)
            v.flags.writeable = False
            object.__setattr__(self, name, v)

    @classmethod
    def zeros(cls, d: int) -> "GruParams":
        z = np.zeros((d, d))
        return cls(d, z, z.copy(), z.copy(), np.zeros(d), np.zeros(d), np.zeros(d))

    @classmethod
    def from_matrices(cls, Uh, Ur=None, Uz=None, bh=None, br=None, bz=None) -> "GruParams":
        Uh = np.atleast_2d(np.asarray(Uh, dtype=np.float64))
        d = Uh.shape[0]
        mk = lambda m: np.zeros((d, d)) if m is None else np.asarray(m, dtype=np.float64)
        vk = lambda v: np.zeros(d) if v is None else np.asarray(v, dtype=np.float64)
        return cls(d, mk(Uz), mk(Ur), Uh, vk(bz), vk(br), vk(bh))

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "Uz": self.Uz.tolist(),
            "Ur": self.Ur.tolist(),
            "Uh": self.Uh.tolist(),
            "bz": self.bz.tolist(),
            "br": self.br.tolist(),
            "bh": self.bh.tolist(),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "GruParams":
        d = int(obj["d"])
        return cls(d, obj["Uz"], obj["Ur"], obj["Uh"], obj["bz"], obj["br"], obj["bh"])


@dataclass(frozen=True)
class InputParams:
    """Input-to-cell weights; only the training harness drives nonzero inputs."""

    d: int
    p: int
    Wz: np.ndarray
    Wr: np.ndarray
    Wh: np.ndarray

    def __post_init__(self):
        if self.d < 1 or self.p < 1:
            raise ValueError("d and p must be positive integers")
        for name in ("Wz", "Wr", "Wh"):
            m = _as_matrix(getattr(self, name), self.d, self.p, name)
            m.flags.writeable = False
            object.__setattr__(self, name, m)

    @classmethod
    def zeros(cls, d: int, p: int) -> "InputParams":
        z = np.zeros((d, p))
        return cls(d, p, z, z.copy(), z.copy())

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "Wz": self.Wz.tolist(),
            "Wr": self.Wr.tolist(),
            "Wh": self.Wh.tolist(),
        }

    @classmethod
    def from_dict(cls, d: int, obj: dict) -> "InputParams":
        p = int(obj["p"])
        return cls(d, p, obj["Wz"], obj["Wr"], obj["Wh"])


def save_model(path, params: GruParams, inputs: InputParams = None, extra: dict = None):
    """Write the JSON model file: row-major matrices, explicit d/p fields."""
    obj = params.to_dict()
    if inputs is not None:
        if inputs.d != params.d:
            raise ShapeError("inputs.d must match params.d")
        obj["input"] = inputs.to_dict()
    if extra:
        obj.update(extra)
    with open(path, "w") as f:
        json.dump(obj, f, indent=1)
        f.write("\n")


def load_model(path):
    """Read a JSON model file; returns (GruParams, InputParams or None, extras)."""
    with open(path) as f:
        obj = json.load(f)
    params = GruParams.from_dict(obj)
    inputs = None
    if "input" in obj:
        inputs = InputParams.from_dict(params.d, obj["input"])
    known = {"d", "Uz", "Ur", "Uh", "bz", "br", "bh", "input"}
    extras = {k: v for k, v in obj.items() if k not in known}
    return params, inputs, extras
