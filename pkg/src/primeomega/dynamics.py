"""Demo dynamical systems: finite periodic shifts, circle rotations, tables.

Orbits are tabulated eagerly; the regrouping identities only ever need
f(T^k x) for k up to floor(log2 N), which is tiny at any reachable N.
"""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PeriodicSystem:
    """Shift on Z/m started at s, observing the indicator of hit_set."""

    modulus: int
    start: int = 0
    hit_set: frozenset[int] = frozenset({0})

    def __post_init__(self):
        if self.modulus < 2:
            raise ValueError("modulus must be >= 2")
        object.__setattr__(self, "hit_set", frozenset(int(v) % self.modulus for v in self.hit_set))


@dataclass(frozen=True)
class RotationSystem:
    """Rotation by alpha on [0, 1), observing the indicator of [a, b).

    alpha is stored as a float; the irrational-rotation behaviour is a
    machine-precision heuristic, not exact.
    """

    alpha: float
    x0: float = 0.0
    interval: tuple[float, float] = (0.0, 0.5)

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        a, b = self.interval
        if not (0.0 <= a < b <= 1.0):
            raise ValueError("observable interval must satisfy 0 <= a < b <= 1")


@dataclass(frozen=True)
class TableSystem:
    """Explicit orbit values; the observable is the table itself."""

    values: tuple[float, ...]

    def __post_init__(self):
        if not self.values:
            raise ValueError("table must be non-empty")


DynamicalSystem = PeriodicSystem | RotationSystem | TableSystem


@dataclass
class OrbitTable:
    values: np.ndarray  # f(T^k x) for k = 0..k_max
    ground_truth_mean: float

    @property
    def k_max(self) -> int:
        return len(self.values) - 1


def orbit_values(system: DynamicalSystem, k_max: int) -> OrbitTable:
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    if isinstance(system, PeriodicSystem):
        ks = np.arange(k_max + 1)
        pos = (system.start + ks) % system.modulus
        hits = np.isin(pos, sorted(system.hit_set))
        return OrbitTable(
            values=hits.astype(np.float64),
            ground_truth_mean=len(system.hit_set) / system.modulus,
        )
    if isinstance(system, RotationSystem):
        a, b = system.interval
        ks = np.arange(k_max + 1, dtype=np.float64)
        pos = np.mod(system.x0 + ks * system.alpha, 1.0)
        vals = ((pos >= a) & (pos < b)).astype(np.float64)
        return OrbitTable(values=vals, ground_truth_mean=b - a)
    if isinstance(system, TableSystem):
        if k_max >= len(system.values):
            raise ValueError("table shorter than requested orbit")
        vals = np.asarray(system.values[: k_max + 1], dtype=np.float64)
        return OrbitTable(values=vals, ground_truth_mean=float(np.mean(system.values)))
    raise TypeError(f"unknown system {type(system)!r}")


def birkhoff_average(orbit: OrbitTable, k: int) -> float:
    """Plain mean of f(T^j x) over j = 0..k-1 (the first k orbit points)."""
    if not 1 <= k <= orbit.k_max + 1:
        raise ValueError("k out of range")
    return float(math.fsum(orbit.values[:k]) / k)


def read_system_config(path: str) -> DynamicalSystem:
    """Read a system from key=value lines.

    kind=periodic with modulus/start/hits (hits as v1+v2+...), kind=rotation
    with alpha/x0/a/b, or kind=table with values (comma-separated).
    """
    fields: dict[str, str] = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            fields[key.strip()] = value.strip()
    kind = fields.get("kind")
    if kind == "periodic":
        hits = frozenset(int(v) for v in fields.get("hits", "0").split("+"))
        return PeriodicSystem(modulus=int(fields["modulus"]),
                              start=int(fields.get("start", "0")), hit_set=hits)
    if kind == "rotation":
        return RotationSystem(
            alpha=float(fields["alpha"]), x0=float(fields.get("x0", "0")),
            interval=(float(fields.get("a", "0")), float(fields.get("b", "0.5"))),
        )
    if kind == "table":
        return TableSystem(values=tuple(float(v) for v in fields["values"].split(",")))
    raise ValueError(f"unknown system kind {kind!r} in {path}")


def parse_system(spec: str) -> DynamicalSystem:
    """Parse CLI system specs.

    periodic:m[:s[:e1+e2+...]]    rotation:alpha[:x0[:a:b]]    table:path
    config:path (key=value lines)
    """
    parts = spec.split(":")
    kind = parts[0]
    if kind == "config":
        return read_system_config(parts[1])
    if kind == "periodic":
        m = int(parts[1])
        s = int(parts[2]) if len(parts) > 2 else 0
        hits = frozenset(int(v) for v in parts[3].split("+")) if len(parts) > 3 else frozenset({0})
        return PeriodicSystem(modulus=m, start=s, hit_set=hits)
    if kind == "rotation":
        alpha = float(parts[1])
        x0 = float(parts[2]) if len(parts) > 2 else 0.0
        interval = (float(parts[3]), float(parts[4])) if len(parts) > 4 else (0.0, 0.5)
        return RotationSystem(alpha=alpha, x0=x0, interval=interval)
    if kind == "table":
        with open(parts[1]) as fh:
            vals = tuple(float(line.strip()) for line in fh if line.strip())
        return TableSystem(values=vals)
    raise ValueError(f"unknown system spec {spec!r}")
