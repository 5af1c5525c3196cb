"""
FIDE Solver - Grids and Trapezium Quadrature
============================================

Uniform grids on [0, 1] and the composite trapezium rule used by every
discrete operator of the scheme.
"""

from dataclasses import dataclass, field

import numpy as np

from fide_solver.exceptions import GridError


@dataclass(frozen=True)
class Grid:
    """
    Uniform partition of [0, 1] into N subintervals.

    Nodes are computed as i*h and both endpoints are pinned, so kernel
    evaluations at 0 and 1 hit the boundary zeros exactly.
    """

    N: int
    h: float = field(init=False)
    nodes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if isinstance(self.N, bool) or int(self.N) != self.N:
            raise GridError(f"N must be an integer, got {self.N!r}")
        if self.N < 2:
            raise GridError(f"N must be at least 2, got {self.N}")
        N = int(self.N)
        nodes = np.arange(N + 1, dtype=np.float64) / N
        nodes[0] = 0.0
        nodes[-1] = 1.0
        nodes.setflags(write=False)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "h", 1.0 / N)
        object.__setattr__(self, "nodes", nodes)

    @property
    def size(self):
        return self.N + 1


class GridFunction:
    """Values of a function at the nodes of a grid."""

    __slots__ = ("grid", "values")

    def __init__(self, grid, values):
        values = np.array(values, dtype=np.float64)
        if values.ndim != 1 or values.shape[0] != grid.size:
            raise GridError(
                f"grid function has {values.size} values, grid N={grid.N} needs {grid.size}"
            )
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise GridError(f"grid function is not finite at node {bad}")
        values.setflags(write=False)
        self.grid = grid
        self.values = values

    def __len__(self):
        return self.values.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def max_norm(self):
        return float(np.max(np.abs(self.values)))

    @classmethod
    def sample(cls, grid, func):
        return cls(grid, [func(x) for x in grid.nodes])


def make_grid(N):
    """Build the uniform grid with N subintervals (N >= 2)."""
    return Grid(N)


def trapezoid_weights(grid):
    """
    Trapezium weights rho_j: 1/2 at both endpoints, 1 in the interior.

    Args:
        grid (Grid): Grid the weights belong to

    Returns:
        numpy.ndarray: Array of N+1 weights (not multiplied by h)
    """
    rho = np.ones(grid.size, dtype=np.float64)
    rho[0] = rho[-1] = 0.5
    return rho


def _as_values(grid, values):
    if isinstance(values, GridFunction):
        if values.grid.N != grid.N:
            raise GridError(f"grid function lives on N={values.grid.N}, expected N={grid.N}")
        return values.values
    arr = np.asarray(values, dtype=np.float64)
    if arr.shape[-1] != grid.size:
        raise GridError(f"expected {grid.size} values along the last axis, got {arr.shape[-1]}")
    return arr


def integrate(grid, values):
    """
    Composite trapezium approximation of the integral over [0, 1].

    A 2-D array is integrated along its last axis, one integral per row.
    """
    arr = _as_values(grid, values)
    return arr @ (grid.h * trapezoid_weights(grid))


def max_norm(values):
    """Discrete max norm over grid nodes."""
    return float(np.max(np.abs(np.asarray(values, dtype=np.float64))))
