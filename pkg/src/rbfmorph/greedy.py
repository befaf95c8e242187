"""Greedy control-point selection, repeated over residual levels."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from .mesh_io import DisplacementField
from .rbf_kernel import BasisFunction, IncrementalCholesky, WeightSet, assemble_matrix


@dataclass(frozen=True)
class GreedyConfig:
    tolerance: float = 0.1
    max_levels: int = 5
    max_points_per_level: int = 5000
    basis: BasisFunction = field(default_factory=BasisFunction)

    def __post_init__(self):
        if not 0.0 < self.tolerance < 1.0:
            raise ValueError(f"tolerance must lie in (0, 1), got {self.tolerance}")
        if self.max_levels < 1:
            raise ValueError(f"max_levels must be >= 1, got {self.max_levels}")
        if self.max_points_per_level < 1:
            raise ValueError(f"max_points_per_level must be >= 1, got {self.max_points_per_level}")


@dataclass
class ConvergenceRecord:
    """One row per control-set size: (points, normalized max error, cumulative seconds)."""

    level: int
    points: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    seconds: list = field(default_factory=list)

    def add(self, points, error, seconds):
        self.points.append(int(points))
        self.errors.append(float(error))
        self.seconds.append(float(seconds))

    def rows(self):
        return [(self.level, p, e, s) for p, e, s in zip(self.points, self.errors, self.seconds)]

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True, eq=False)
class RbfLevel:
    """Result of one greedy level.

    ``level`` counts from 1.  ``target`` and ``residual`` are the level's
    surface target and what remains after subtracting its interpolant; the
    residual is the next level's target.
    """

    level: int
    control_indices: np.ndarray
    weights: WeightSet
    achieved_error: float
    elapsed: float
    target: np.ndarray
    residual: np.ndarray
    capped: bool = False
    exhausted: bool = False

    @property
    def n_control(self) -> int:
        return len(self.control_indices)

    @property
    def target_max(self) -> float:
        return _max_norm(self.target)

    @property
    def hit_limit(self) -> bool:
        return self.capped or self.exhausted


def _max_norm(values) -> float:
    if len(values) == 0:
        return 0.0
    return float(np.linalg.norm(values, axis=1).max())


def greedy_level(surface_positions, target, config: GreedyConfig, level: int = 1):
    """Select control points until max|E| / max|target| < tolerance.

    Starts from node 0, and at each step adds the node with the largest
    residual magnitude (lowest index on ties).  Returns ``(RbfLevel,
    ConvergenceRecord)``.  Stops early, with ``capped`` set, when the point cap
    is reached, and with ``exhausted`` set when every node is already a
    control point.
    """
    t0 = time.perf_counter()
    pos = np.atleast_2d(np.asarray(surface_positions, dtype=float))
    target = np.asarray(target, dtype=float).reshape(len(pos), -1)
    if len(pos) == 0:
        raise ValueError("greedy selection needs at least one surface node")
    if not np.all(np.isfinite(target)):
        raise ValueError("non-finite displacement target")
    basis = config.basis
    n_s, dim = target.shape
    record = ConvergenceRecord(level)
    scale = _max_norm(target)

    if scale == 0.0:
        record.add(1, 0.0, time.perf_counter() - t0)
        weights = WeightSet(pos[:1], np.zeros((1, dim)))
        return (
            RbfLevel(level, np.array([0]), weights, 0.0, time.perf_counter() - t0,
                     target, target.copy()),
            record,
        )

    cap = min(config.max_points_per_level, n_s)
    chol = IncrementalCholesky(capacity=min(cap, 64))
    cols = np.empty((n_s, min(cap, 64)))  # Phi_{s,c}, one column per control point
    selected = np.zeros(n_s, dtype=bool)
    control = []

    def insert(i):
        nonlocal cols
        k = len(control)
        if k == cols.shape[1]:
            cols = np.concatenate([cols, np.empty_like(cols)], axis=1)
        col = assemble_matrix(pos, pos[i : i + 1], basis)[:, 0]
        chol.append(col[control], col[i])
        cols[:, k] = col
        control.append(i)
        selected[i] = True

    insert(0)
    capped = exhausted = False
    while True:
        alpha = chol.solve(target[control])
        residual = target - cols[:, : len(control)] @ alpha
        mag = np.linalg.norm(residual, axis=1)
        error = float(mag.max()) / scale
        record.add(len(control), error, time.perf_counter() - t0)
        if error < config.tolerance:
            break
        if len(control) >= cap:
            exhausted = len(control) == n_s
            capped = not exhausted
            break
        mag[selected] = -np.inf
        insert(int(np.argmax(mag)))

    weights = WeightSet(pos[control], alpha)
    return (
        RbfLevel(level, np.array(control), weights, error, time.perf_counter() - t0,
                 target, residual, capped=capped, exhausted=exhausted),
        record,
    )


def run_multilevel(surface_positions, displacement, config: GreedyConfig):
    """Multi-level greedy interpolation of ``displacement`` at ``surface_positions``.

    Level 1 targets the displacement; each later level targets the previous
    level's residual.  Stops after ``config.max_levels`` levels, or before a
    level whose entering residual is already below tolerance**max_levels of
    the original maximum.  Returns ``(levels, records)``.
    """
    if isinstance(displacement, DisplacementField):
        displacement = displacement.values
    pos = np.atleast_2d(np.asarray(surface_positions, dtype=float))
    target = np.asarray(displacement, dtype=float).reshape(len(pos), -1)
    floor = config.tolerance**config.max_levels * _max_norm(target)
    levels, records = [], []
    for level in range(1, config.max_levels + 1):
        if level > 1 and _max_norm(target) < floor:
            break
        result, record = greedy_level(pos, target, config, level=level)
        levels.append(result)
        records.append(record)
        if result.achieved_error == 0.0:
            break
        target = result.residual
    return levels, records


def surface_values(levels, surface_positions, basis: BasisFunction) -> np.ndarray:
    """Sum of all level interpolants at the surface nodes."""
    pos = np.atleast_2d(np.asarray(surface_positions, dtype=float))
    total = np.zeros_like(levels[0].target)
    for lv in levels:
        total += assemble_matrix(pos, lv.weights.control_positions, basis) @ lv.weights.alpha
    return total


CSV_HEADER = ("level", "points", "error", "seconds")


def write_convergence_csv(records, path) -> int:
    """Write ``level,points,error,seconds`` rows; returns the row count."""
    n = 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for rec in records:
            for level, points, error, seconds in rec.rows():
                writer.writerow([level, points, repr(error), f"{seconds:.6f}"])
                n += 1
    return n


def read_convergence_csv(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [
            (int(r["level"]), int(r["points"]), float(r["error"]), float(r["seconds"]))
            for r in reader
        ]
