"""Simulation and verification laboratory for chemotaxis in a shear flow.

A Keller-Segel system is placed in a Couette background on a periodic
box.  The package provides

- closed-form advection-diffusion kernels, wave-pattern profiles, and
  the three-regime decay envelope (kernels),
- a pseudo-spectral solver in the sheared frame with blow-up detection
  (solver), plus slow quadrature/Picard reference oracles (oracle),
- numerical verification of the convolution and interaction estimates
  that drive the decay analysis (lemmas),
- suppression sweeps, decay-rate fits, and the elliptic-vs-parabolic
  chemoattractant comparison (experiments),
- a command-line interface wrapping all of the above (cli).
"""

from .config import SimConfig, dump_config, load_config, parse_config
from .fields import Field, read_snapshot, write_snapshot
from .kernels import (
    EnvelopeParams,
    KernelQuery,
    envelope_A,
    green_couette_2d,
    green_couette_3d,
    yukawa,
)
from .solver import Grid, RunResult, run

__all__ = [
    "SimConfig", "dump_config", "load_config", "parse_config",
    "Field", "read_snapshot", "write_snapshot",
    "EnvelopeParams", "KernelQuery", "envelope_A",
    "green_couette_2d", "green_couette_3d", "yukawa",
    "Grid", "RunResult", "run",
]
