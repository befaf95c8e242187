"""Wendland compact-support radial basis functions and the dense RBF solve."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.spatial.distance import cdist

PIVOT_TOL = 1e-14


class ConditioningError(np.linalg.LinAlgError):
    """The basis matrix is numerically not positive definite.

    ``pair`` holds the two offending point indices when known.
    """

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


def _c0(eta):
    return (1.0 - eta) ** 2


def _c2(eta):
    return (1.0 - eta) ** 4 * (4.0 * eta + 1.0)


def _c4(eta):
    return (1.0 - eta) ** 6 * (35.0 / 3.0 * eta**2 + 6.0 * eta + 1.0)


def _c6(eta):
    return (1.0 - eta) ** 8 * (32.0 * eta**3 + 25.0 * eta**2 + 8.0 * eta + 1.0)


WENDLAND = {"C0": _c0, "C2": _c2, "C4": _c4, "C6": _c6}


@dataclass(frozen=True)
class BasisFunction:
    """Wendland kernel of a given smoothness with support radius ``radius``."""

    kind: str = "C2"
    radius: float = 1.0

    def __post_init__(self):
        kind = self.kind.upper()
        if kind not in WENDLAND:
            raise ValueError(f"unknown Wendland kind {self.kind!r}; use one of {sorted(WENDLAND)}")
        if not (self.radius > 0 and np.isfinite(self.radius)):
            raise ValueError(f"support radius must be positive, got {self.radius}")
        object.__setattr__(self, "kind", kind)

    def __call__(self, distance):
        return eval_basis(self, distance)


def eval_basis(basis: BasisFunction, distance):
    """phi(distance / R); exactly zero for eta >= 1.  Accepts scalars or arrays."""
    eta = np.asarray(distance, dtype=float) / basis.radius
    inside = eta < 1.0
    out = np.zeros_like(eta)
    out[inside] = WENDLAND[basis.kind](eta[inside])
    if out.ndim == 0:
        return float(out)
    return out


def assemble_surface_matrix(points, basis: BasisFunction) -> np.ndarray:
    """Symmetric basis matrix with entries phi(|r_i - r_j|)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    dist = cdist(points, points)
    off = dist + np.eye(len(points))
    if len(points) > 1 and off.min() == 0.0:
        i, j = np.unravel_index(np.argmin(off), off.shape)
        i, j = sorted((int(i), int(j)))
        raise ConditioningError(f"points {i} and {j} coincide; basis matrix is singular", (i, j))
    return eval_basis(basis, dist)


def assemble_matrix(queries, centers, basis: BasisFunction) -> np.ndarray:
    """Rectangular basis matrix, rows = queries, columns = centers."""
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    return eval_basis(basis, cdist(queries, centers))


class IncrementalCholesky:
    """Lower Cholesky factor of an SPD matrix that grows one row/column at a time.

    Appending costs O(n^2) (one triangular solve); the factor of the first n
    rows never changes, so weights after each insertion cost two more
    triangular solves.
    """

    def __init__(self, capacity: int = 64):
        self._L = np.zeros((capacity, capacity))
        self.n = 0
        self.min_pivot = np.inf

    @property
    def L(self) -> np.ndarray:
        return self._L[: self.n, : self.n]

    def _grow(self):
        cap = self._L.shape[0]
        bigger = np.zeros((2 * cap, 2 * cap))
        bigger[:cap, :cap] = self._L
        self._L = bigger

    def append(self, column, diagonal: float) -> None:
        """Append the new column's off-diagonal part ``column`` and its diagonal.

        Raises ConditioningError when the new squared pivot falls below
        ``PIVOT_TOL * diagonal``; ``pair`` then names the new row and the
        existing row it is most strongly coupled to.
        """
        n = self.n
        column = np.asarray(column, dtype=float)
        if n == self._L.shape[0]:
            self._grow()
        if n:
            w = solve_triangular(self.L, column, lower=True, check_finite=False)
            pivot_sq = diagonal - w @ w
        else:
            w = column[:0]
            pivot_sq = diagonal
        if not pivot_sq > PIVOT_TOL * diagonal:
            partner = int(np.argmax(column)) if n else None
            raise ConditioningError(
                f"basis matrix not positive definite at row {n} "
                f"(pivot^2 = {pivot_sq:.3e}); nearly coincident with row {partner}",
                (partner, n),
            )
        pivot = np.sqrt(pivot_sq)
        self._L[n, :n] = w
        self._L[n, n] = pivot
        self.n = n + 1
        self.min_pivot = min(self.min_pivot, pivot)

    def solve(self, rhs) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        y = solve_triangular(self.L, rhs, lower=True, check_finite=False)
        return solve_triangular(self.L.T, y, lower=False, check_finite=False)

    @classmethod
    def factor(cls, matrix) -> "IncrementalCholesky":
        """Factor a full SPD matrix, locating the failing row on breakdown."""
        matrix = np.asarray(matrix, dtype=float)
        n = matrix.shape[0]
        chol = cls(capacity=max(n, 1))
        try:
            L = np.linalg.cholesky(matrix)
        except np.linalg.LinAlgError:
            L = None
        if L is not None:
            diag = np.diag(L)
            if np.all(diag**2 > PIVOT_TOL * np.diag(matrix)):
                chol._L[:n, :n] = L
                chol.n = n
                chol.min_pivot = float(diag.min()) if n else np.inf
                return chol
        # slow path: replay row by row to name the offending pair
        chol = cls(capacity=max(n, 1))
        for k in range(n):
            chol.append(matrix[k, :k], matrix[k, k])
        return chol


@dataclass(frozen=True, eq=False)
class WeightSet:
    """RBF centres and per-dimension weights; ``alpha`` is ``(N_c, dim)``."""

    control_positions: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        pos = np.atleast_2d(np.array(self.control_positions, dtype=float))
        alpha = np.array(self.alpha, dtype=float).reshape(len(pos), -1)
        if not np.all(np.isfinite(alpha)):
            raise ValueError("non-finite RBF weights")
        pos.setflags(write=False)
        alpha.setflags(write=False)
        object.__setattr__(self, "control_positions", pos)
        object.__setattr__(self, "alpha", alpha)

    def __len__(self):
        return len(self.control_positions)


def solve_weights(points, displacements, basis: BasisFunction) -> WeightSet:
    """Solve Phi alpha = displacements with one Cholesky factorization.

    ``displacements`` is ``(N, dim)``; all columns share the factor, which is
    reused for one refinement step.  An all-zero
    right-hand side returns zero weights without factorizing.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    rhs = np.asarray(displacements, dtype=float).reshape(len(points), -1)
    if not np.any(rhs):
        return WeightSet(points, np.zeros_like(rhs))
    phi = assemble_surface_matrix(points, basis)
    chol = IncrementalCholesky.factor(phi)
    alpha = chol.solve(rhs)
    # one step of iterative refinement recovers digits lost to conditioning
    alpha += chol.solve(rhs - phi @ alpha)
    return WeightSet(points, alpha)


def evaluate(weights: WeightSet, basis: BasisFunction, queries, block: int = 4096) -> np.ndarray:
    """Interpolant at many query points, ``(M, dim)``; evaluated in row blocks."""
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    out = np.zeros((len(queries), weights.alpha.shape[1]))
    for start in range(0, len(queries), block):
        rows = slice(start, start + block)
        out[rows] = assemble_matrix(queries[rows], weights.control_positions, basis) @ weights.alpha
    return out


def eval_interpolant(weights: WeightSet, basis: BasisFunction, query) -> np.ndarray:
    """f(r) = sum_i alpha_i phi(|r - r_i|) for a single query position."""
    return evaluate(weights, basis, np.asarray(query, dtype=float)[None, :])[0]
