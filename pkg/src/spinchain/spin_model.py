"""Physical problem description: couplings, Hamiltonian classes, time grid.

The chain is 1-D with open boundary, sites 0..N-1, nearest-neighbor bonds
(i, i+1). hbar is fixed to 1 throughout; couplings and times are
dimensionless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

ZERO_TOL = 1e-12


class HamiltonianClass(Enum):
    """Which subset of {XX, YY, ZZ} couplings is active."""

    X = "X"
    Y = "Y"
    Z = "Z"
    XY = "XY"
    XZ = "XZ"
    YZ = "YZ"
    XYZ = "XYZ"

    @property
    def axes(self) -> str:
        return self.value.lower()


@dataclass(frozen=True)
class CouplingParams:
    """Exchange couplings (jx, jy, jz) of the nearest-neighbor model."""

    jx: float
    jy: float
    jz: float

    def __post_init__(self) -> None:
        for name in ("jx", "jy", "jz"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"coupling {name} must be finite, got {value!r}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.jx, self.jy, self.jz)


@dataclass(frozen=True)
class Angles3:
    """Per-bond rotation angles (theta_x, theta_y, theta_z) for one time step."""

    theta_x: float
    theta_y: float
    theta_z: float

    def __post_init__(self) -> None:
        for name in ("theta_x", "theta_y", "theta_z"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"angle {name} must be finite, got {value!r}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.theta_x, self.theta_y, self.theta_z)


@dataclass(frozen=True)
class TrotterPlan:
    """Uniform time grid: num_steps = round(t_final / dt), at least 1."""

    t_final: float
    dt: float
    num_steps: int = field(init=False)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive and finite, got {self.dt!r}")
        if not math.isfinite(self.t_final):
            raise ValueError(f"t_final must be finite, got {self.t_final!r}")
        steps = round(self.t_final / self.dt)
        if steps < 1:
            raise ValueError(
                f"t_final/dt rounds to {steps} steps; need at least 1 "
                f"(t_final={self.t_final}, dt={self.dt})"
            )
        object.__setattr__(self, "num_steps", steps)

    def times(self) -> list[float]:
        return [k * self.dt for k in range(self.num_steps + 1)]


def classify(j: CouplingParams, zero_tol: float = ZERO_TOL) -> HamiltonianClass:
    """Map couplings to their Hamiltonian class, treating |J| <= zero_tol as zero.

    All-zero couplings classify as X (identity dynamics) so the pipeline
    stays total.
    """
    if zero_tol < 0:
        raise ValueError("zero_tol must be nonnegative")
    name = "".join(
        axis
        for axis, value in zip("XYZ", j.as_tuple())
        if abs(value) > zero_tol
    )
    return HamiltonianClass(name or "X")


def step_angles(j: CouplingParams, dt: float) -> Angles3:
    """Per-step rotation angles theta_alpha = J_alpha * dt (hbar = 1)."""
    if not math.isfinite(dt):
        raise ValueError(f"dt must be finite, got {dt!r}")
    return Angles3(j.jx * dt, j.jy * dt, j.jz * dt)
