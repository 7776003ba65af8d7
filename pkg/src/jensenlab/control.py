"""Control functions φ : X × X → [0, ∞) that dominate the Jensen defect.

Three shapes are supported:

  constant  φ(x, y) = ε
  mixed     φ(x, y) = ε + δ(‖x‖^p + ‖y‖^p), p in [0, 1), with 0^p := 0
  table     φ(x, y) = w(‖x‖) + w(‖y‖), w piecewise-linear on sampled radii
            with power-law tail w(ρmax)·(ρ/ρmax)^q beyond the last knot, q < 1

The growth restriction (p < 1, q < 1) is what makes the dyadic and triadic
comparison series converge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spaces import NormedSpaceSpec, as_point, norm_many

CONSTANT = "constant"
MIXED = "mixed"
TABLE = "table"


class ControlError(ValueError):
    """Raised for malformed control specs."""


@dataclass(frozen=True, eq=False)
class RadialControlTable:
    """Sampled nonnegative radial profile w(ρ) with declared growth exponent q."""

    radii: np.ndarray  # (K,) increasing, radii[0] == 0
    values: np.ndarray  # (K,) nonnegative
    q: float

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        if radii.ndim != 1 or radii.size < 2 or values.shape != radii.shape:
            raise ControlError("table needs matching 1-d radii and values, K >= 2")
        if radii[0] != 0.0 or np.any(np.diff(radii) <= 0):
            raise ControlError("radii must start at 0 and increase")
        if np.any(values < 0.0):
            raise ControlError("table values must be nonnegative")
        if not (self.q < 1.0):
            raise ControlError(f"growth exponent must satisfy q < 1, got {self.q}")
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "values", values)

    def eval_many(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=np.float64)
        inside = np.interp(rho, self.radii, self.values)
        rmax = self.radii[-1]
        vmax = self.values[-1]
        with np.errstate(invalid="ignore"):
            tail = vmax * (rho / rmax) ** self.q
        return np.where(rho <= rmax, inside, tail)

    def to_dict(self) -> dict:
        return {"radii": self.radii.tolist(), "values": self.values.tolist(), "q": self.q}

    @classmethod
    def from_dict(cls, d: dict) -> "RadialControlTable":
        return cls(radii=np.asarray(d["radii"]), values=np.asarray(d["values"]), q=d["q"])


@dataclass(frozen=True)
class ControlFunctionSpec:
    kind: str = CONSTANT
    epsilon: float = 0.0
    delta: float = 0.0
    p: float = 0.0
    table: RadialControlTable | None = None

    def __post_init__(self):
        if self.kind not in (CONSTANT, MIXED, TABLE):
            raise ControlError(f"unknown control kind {self.kind!r}")
        if self.epsilon < 0.0 or self.delta < 0.0:
            raise ControlError("control magnitudes must be nonnegative")
        if self.kind == MIXED and not (0.0 <= self.p < 1.0):
            raise ControlError(f"mixed control needs p in [0, 1), got {self.p}")
        if self.kind == TABLE and self.table is None:
            raise ControlError("table control needs a RadialControlTable")

    def with_epsilon(self, epsilon: float) -> "ControlFunctionSpec":
        """Same shape with the constant part replaced (used for measured ε)."""
        if self.kind == TABLE:
            raise ControlError("table controls have no constant part to replace")
        return ControlFunctionSpec(
            kind=self.kind, epsilon=epsilon, delta=self.delta, p=self.p
        )

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "epsilon": self.epsilon}
        if self.kind == MIXED:
            out["delta"] = self.delta
            out["p"] = self.p
        if self.kind == TABLE:
            out = {"kind": self.kind, "table": self.table.to_dict()}
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ControlFunctionSpec":
        if d.get("kind") == TABLE:
            return cls(kind=TABLE, table=RadialControlTable.from_dict(d["table"]))
        return cls(
            kind=d.get("kind", CONSTANT),
            epsilon=d.get("epsilon", 0.0),
            delta=d.get("delta", 0.0),
            p=d.get("p", 0.0),
        )


def constant_control(epsilon: float) -> ControlFunctionSpec:
    return ControlFunctionSpec(kind=CONSTANT, epsilon=epsilon)


def mixed_control(epsilon: float, delta: float, p: float) -> ControlFunctionSpec:
    return ControlFunctionSpec(kind=MIXED, epsilon=epsilon, delta=delta, p=p)


def _powered(nrm: np.ndarray, p: float) -> np.ndarray:
    # 0^p := 0 for every p in [0, 1), including p = 0.
    return np.where(nrm > 0.0, nrm**p, 0.0)


def control_phi_norms(spec: ControlFunctionSpec, nx: np.ndarray, ny: np.ndarray) -> np.ndarray:
    """Evaluate φ from the two argument norms (vectorized)."""
    nx = np.asarray(nx, dtype=np.float64)
    ny = np.asarray(ny, dtype=np.float64)
    if spec.kind == CONSTANT:
        return np.full(np.broadcast(nx, ny).shape, spec.epsilon)
    if spec.kind == MIXED:
        return spec.epsilon + spec.delta * (_powered(nx, spec.p) + _powered(ny, spec.p))
    return spec.table.eval_many(nx) + spec.table.eval_many(ny)


def control_phi_eval(spec: ControlFunctionSpec, space: NormedSpaceSpec, x, y) -> float:
    """φ(x, y) for a single pair of domain vectors."""
    nx = norm_many(space, as_point(x, space.dim)[None, :])[0]
    ny = norm_many(space, as_point(y, space.dim)[None, :])[0]
    return float(control_phi_norms(spec, np.asarray([nx]), np.asarray([ny]))[0])
