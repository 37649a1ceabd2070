"""Simulation configuration: schema, key-value file parser, validation.

Config files are plain text, one ``key = value`` pair per line, ``#``
comments allowed.  Multi-valued keys (box, resolution, snapshot_times)
take whitespace-separated numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class SimConfig:
    epsilon: int = 0
    A: float = 0.0
    dims: int = 2
    box: tuple = (40.0, 40.0)
    resolution: tuple = (128, 128)
    dt: float = 0.01
    t_final: float = 1.0
    split_order: str = "strang"  # or "lie"
    dealias: bool = True
    remap: bool = True
    init_shape: str = "gaussian"  # or "exponential"
    C0: float = 1.0
    Cstar: float = 2.0
    C0star: float = 0.0
    init_center: tuple = (0.0, 0.0)
    theta: float = 0.8
    gamma: float = 0.5
    diag_every: int = 10
    snapshot_times: tuple = ()
    supnorm_cap: float = 50.0
    tail_cap: float = 0.1
    seed: int = 0
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        self.box = tuple(float(b) for b in self.box)
        self.resolution = tuple(int(r) for r in self.resolution)
        if self.epsilon not in (0, 1):
            raise ValueError("epsilon must be 0 or 1")
        if self.dims not in (2, 3):
            raise ValueError("dims must be 2 or 3")
        if len(self.box) != self.dims or len(self.resolution) != self.dims:
            raise ValueError("box/resolution rank must equal dims")
        if any(b <= 0 for b in self.box) or self.dt <= 0 or self.t_final <= 0:
            raise ValueError("box, dt and t_final must be positive")
        if any(n < 2 or n & (n - 1) for n in self.resolution):
            raise ValueError("resolution entries must be powers of two >= 2")
        if self.split_order not in ("strang", "lie"):
            raise ValueError("split_order must be strang or lie")
        if self.init_shape not in ("gaussian", "exponential"):
            raise ValueError("init_shape must be gaussian or exponential")
        if self.A < 0 or self.C0 < 0 or self.Cstar <= 0 or self.C0star < 0:
            raise ValueError("A, C0 >= 0 and Cstar > 0, C0star >= 0 required")
        if len(self.init_center) < self.dims:
            self.init_center = tuple(self.init_center) + (0.0,) * (
                self.dims - len(self.init_center)
            )
        if any(b < 20.0 * self.Cstar for b in self.box):
            raise ValueError("each box length must be >= 20 * Cstar")
        if not self.remap and self.box[0] < 2.0 * self.A * self.t_final * self.box[1]:
            raise ValueError(
                "with remap off, box_x must be >= 2 * A * t_final * box_y so the "
                "sheared support never wraps"
            )
        if self.epsilon == 1 and self.A * self.C0star >= self.C0 > 0:
            self.warnings.append(
                "shear window violated: A * C0star >= C0 (run proceeds)"
            )

    @property
    def spacing(self):
        return tuple(b / n for b, n in zip(self.box, self.resolution))

    @property
    def origin(self):
        return tuple(-0.5 * b for b in self.box)


_BOOLS = {"on": True, "off": False, "true": True, "false": False, "1": True, "0": False}

_INT_KEYS = {"epsilon", "dims", "diag_every", "seed"}
_FLOAT_KEYS = {
    "A", "dt", "t_final", "C0", "Cstar", "C0star", "theta", "gamma",
    "supnorm_cap", "tail_cap",
}
_TUPLE_KEYS = {"box", "resolution", "snapshot_times", "init_center"}
_BOOL_KEYS = {"dealias", "remap"}
_STR_KEYS = {"split_order", "init_shape"}


def parse_config(text):
    """Parse the key-value schema into a SimConfig."""
    kwargs = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, val = (part.strip() for part in line.split("=", 1))
        if key in _INT_KEYS:
            kwargs[key] = int(val)
        elif key in _FLOAT_KEYS:
            kwargs[key] = float(val)
        elif key in _TUPLE_KEYS:
            vals = val.split()
            kwargs[key] = tuple(
                int(v) if key == "resolution" else float(v) for v in vals
            )
        elif key in _BOOL_KEYS:
            try:
                kwargs[key] = _BOOLS[val.lower()]
            except KeyError:
                raise ValueError(f"line {lineno}: bad boolean {val!r}") from None
        elif key in _STR_KEYS:
            kwargs[key] = val.lower()
        else:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
    return SimConfig(**kwargs)


def load_config(path):
    return parse_config(Path(path).read_text())


def dump_config(cfg: SimConfig):
    """Serialize back to the text schema (round-trips through parse_config)."""
    lines = [
        f"epsilon = {cfg.epsilon}",
        f"A = {cfg.A!r}",
        f"dims = {cfg.dims}",
        "box = " + " ".join(repr(b) for b in cfg.box),
        "resolution = " + " ".join(str(r) for r in cfg.resolution),
        f"dt = {cfg.dt!r}",
        f"t_final = {cfg.t_final!r}",
        f"split_order = {cfg.split_order}",
        f"dealias = {'on' if cfg.dealias else 'off'}",
        f"remap = {'on' if cfg.remap else 'off'}",
        f"init_shape = {cfg.init_shape}",
        f"C0 = {cfg.C0!r}",
        f"Cstar = {cfg.Cstar!r}",
        f"C0star = {cfg.C0star!r}",
        "init_center = " + " ".join(repr(c) for c in cfg.init_center),
        f"theta = {cfg.theta!r}",
        f"gamma = {cfg.gamma!r}",
        f"diag_every = {cfg.diag_every}",
        f"supnorm_cap = {cfg.supnorm_cap!r}",
        f"tail_cap = {cfg.tail_cap!r}",
        f"seed = {cfg.seed}",
    ]
    if cfg.snapshot_times:
        lines.append(
            "snapshot_times = " + " ".join(repr(t) for t in cfg.snapshot_times)
        )
    return "\n".join(lines) + "\n"
