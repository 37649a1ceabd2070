"""Grid-sampled scalar fields and the snapshot file format.

A snapshot is a flat little-endian float64 binary (C order) next to a JSON
sidecar carrying shape, spacing, origin, time, shear amplitude, model flag
and the frame tag (sheared or lab).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np


def _is_pow2(n):
    return n >= 1 and (n & (n - 1)) == 0


@dataclass
class Field:
    """Real scalar on a uniform periodic grid (2-D or 3-D)."""

    values: np.ndarray
    spacing: tuple
    origin: tuple
    time: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.spacing = tuple(float(s) for s in self.spacing)
        self.origin = tuple(float(o) for o in self.origin)
        if self.values.ndim not in (2, 3):
            raise ValueError("field must be 2-D or 3-D")
        if len(self.spacing) != self.values.ndim or len(self.origin) != self.values.ndim:
            raise ValueError("spacing/origin rank must match field rank")
        if any(s <= 0 for s in self.spacing):
            raise ValueError("spacing must be positive")
        if not all(_is_pow2(n) for n in self.values.shape):
            raise ValueError("grid dimensions must be powers of two")

    @property
    def ndim(self):
        return self.values.ndim

    @property
    def cell_volume(self):
        return math.prod(self.spacing)

    def axes(self):
        """Physical coordinates along each axis."""
        return [
            o + s * np.arange(n)
            for o, s, n in zip(self.origin, self.spacing, self.values.shape)
        ]

    def is_finite(self):
        return bool(np.all(np.isfinite(self.values)))

    def mass(self):
        return float(np.sum(self.values)) * self.cell_volume

    def lp_norm(self, p):
        if p == math.inf:
            return float(np.max(np.abs(self.values)))
        return float(np.sum(np.abs(self.values) ** p) * self.cell_volume) ** (1.0 / p)

    def with_values(self, values, time=None):
        return replace(
            self, values=values, time=self.time if time is None else float(time)
        )


def write_snapshot(fld: Field, base, A, epsilon, frame="sheared", shear=None):
    """Write <base>.bin and <base>.json; returns the sidecar path.

    ``shear`` is the frame shear S such that lab x = x' + S y.  The
    integrator remaps S into a bounded range, so it need not equal A*t;
    it defaults to A*t for sheared snapshots and 0 for lab ones.
    """
    if frame not in ("sheared", "lab"):
        raise ValueError("frame must be 'sheared' or 'lab'")
    if shear is None:
        shear = 0.0 if frame == "lab" else float(A) * fld.time
    base = Path(base)
    data = np.ascontiguousarray(fld.values, dtype="<f8")
    base.with_suffix(".bin").write_bytes(data.tobytes())
    sidecar = {
        "shape": list(fld.values.shape),
        "spacing": list(fld.spacing),
        "origin": list(fld.origin),
        "time": fld.time,
        "A": float(A),
        "epsilon": int(epsilon),
        "frame": frame,
        "shear": float(shear),
    }
    path = base.with_suffix(".json")
    path.write_text(json.dumps(sidecar, indent=1))
    return path


def read_snapshot(base):
    """Read a snapshot pair; returns (Field, sidecar dict)."""
    base = Path(base)
    meta = json.loads(base.with_suffix(".json").read_text())
    shape = tuple(meta["shape"])
    raw = base.with_suffix(".bin").read_bytes()
    expected = 8 * math.prod(shape)
    if len(raw) != expected:
        raise ValueError(
            f"snapshot byte length {len(raw)} inconsistent with shape {shape}"
        )
    values = np.frombuffer(raw, dtype="<f8").reshape(shape).astype(float)
    fld = Field(
        values=values,
        spacing=tuple(meta["spacing"]),
        origin=tuple(meta["origin"]),
        time=float(meta["time"]),
    )
    return fld, meta
