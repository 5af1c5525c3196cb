"""
FIDE Solver - Green's Function of the Hinged Beam Operator
==========================================================

This module provides the Green's function of u'''' = 0 under Navier
(hinged) conditions u(0) = u(1) = u''(0) = u''(1) = 0, the quadrature
operator it induces on a grid, the cubic that carries non-homogeneous
boundary data, and a direct finite-difference solver used as an
independent oracle.

The kernel is

    G(x, s) = s (1 - x) (2x - x^2 - s^2) / 6,   0 <= s <= x <= 1,

extended symmetrically for x <= s. It is nonnegative on the unit square,
G(1/2, 1/2) = 1/48 and max_x of its integral over s is 5/384.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from fide_solver.exceptions import GridError
from fide_solver.grid_quadrature import GridFunction, trapezoid_weights

M0 = 5.0 / 384.0


@dataclass(frozen=True)
class BoundaryValues:
    """u(0) = c1, u(1) = c2, u''(0) = c3, u''(1) = c4."""

    c1: float = 0.0
    c2: float = 0.0
    c3: float = 0.0
    c4: float = 0.0

    def __post_init__(self):
        for name in ("c1", "c2", "c3", "c4"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ValueError(f"boundary value {name} must be finite, got {value}")
            object.__setattr__(self, name, value)

    @classmethod
    def from_sequence(cls, values):
        values = list(values)
        if len(values) != 4:
            raise ValueError(f"expected 4 boundary values, got {len(values)}")
        return cls(*values)

    def as_tuple(self):
        return (self.c1, self.c2, self.c3, self.c4)

    @property
    def is_homogeneous(self):
        return self.as_tuple() == (0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class BoundaryCubic:
    """p(x) = a0 + a1 x + a2 x^2 + a3 x^3."""

    a0: float
    a1: float
    a2: float
    a3: float

    def __call__(self, x):
        return eval_cubic(self, x)


# ----------------------------
# Kernel Evaluation
# ----------------------------

def _check_unit_interval(values, what):
    arr = np.asarray(values, dtype=np.float64)
    if arr.size and (not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0):
        bad = arr[~((arr >= 0.0) & (arr <= 1.0))].ravel()[0]
        raise ValueError(f"{what} must lie in [0, 1], got {bad}")
    return arr


def _green(x, s):
    lo = np.minimum(x, s)
    hi = np.maximum(x, s)
    return lo * (1.0 - hi) * (2.0 * hi - hi * hi - lo * lo) / 6.0


def green_value(x, s):
    """
    Evaluate G(x, s) for x, s in [0, 1].

    Raises:
        ValueError: If either argument lies outside [0, 1]
    """
    _check_unit_interval(x, "x")
    _check_unit_interval(s, "s")
    return float(_green(float(x), float(s)))


def m0_constant():
    """max over x of the integral of G(x, s) ds, i.e. 5/384."""
    return M0


def green_matrix(grid, targets=None):
    """
    Weighted quadrature matrix W[i, j] = h * rho_j * G(targets[i], x_j).

    Args:
        grid (Grid): Quadrature grid
        targets (array-like, optional): First arguments of G; grid nodes
            when omitted. Need not lie on the grid.

    Returns:
        numpy.ndarray: Matrix of shape (len(targets), N+1)
    """
    targets = grid.nodes if targets is None else _check_unit_interval(targets, "target")
    weights = grid.h * trapezoid_weights(grid)
    return _green(targets[:, None], grid.nodes[None, :]) * weights[None, :]


def apply_green(grid, psi, targets=None):
    """Trapezium approximation of the integral of G(tau, s) psi(s) for each target tau."""
    values = psi.values if isinstance(psi, GridFunction) else np.asarray(psi, dtype=np.float64)
    if values.shape != (grid.size,):
        raise GridError(f"psi has {values.size} values, grid N={grid.N} needs {grid.size}")
    return green_matrix(grid, targets) @ values


# ----------------------------
# Non-homogeneous Boundary Data
# ----------------------------

def boundary_cubic(bv):
    """Cubic p with p(0) = c1, p(1) = c2, p''(0) = c3, p''(1) = c4."""
    c1, c2, c3, c4 = bv.as_tuple()
    return BoundaryCubic(
        a0=c1,
        a1=-c1 + c2 - c3 / 3.0 - c4 / 6.0,
        a2=c3 / 2.0,
        a3=(c4 - c3) / 6.0,
    )


def eval_cubic(p, x):
    """Horner evaluation; accepts scalars or arrays."""
    result = ((p.a3 * np.asarray(x, dtype=np.float64) + p.a2) * x + p.a1) * x + p.a0
    return float(result) if np.ndim(result) == 0 else result


# ----------------------------
# Finite-Difference Oracle
# ----------------------------

def _second_difference_solve(grid, rhs, left, right):
    # (w[i-1] - 2 w[i] + w[i+1]) / h^2 = rhs[i], i = 1..N-1
    n = grid.N - 1
    b = grid.h ** 2 * np.asarray(rhs[1:-1], dtype=np.float64)
    b[0] -= left
    b[-1] -= right
    bands = np.zeros((3, n))
    bands[0, 1:] = 1.0
    bands[1, :] = -2.0
    bands[2, :-1] = 1.0
    interior = solve_banded((1, 1), bands, b)
    return np.concatenate(([left], interior, [right]))


def finite_difference_solve(grid, psi, bv=None):
    """
    Solve u'''' = psi with Navier data by central differences.

    The fourth-order problem is split as w = u'', w'' = psi with
    w(0) = c3, w(1) = c4, then u'' = w with u(0) = c1, u(1) = c2; each
    stage is one tridiagonal banded solve. Second-order accurate.

    Args:
        grid (Grid): Grid to solve on
        psi (GridFunction or array-like): Right-hand side at the nodes
        bv (BoundaryValues, optional): Boundary data (homogeneous by default)

    Returns:
        numpy.ndarray: u at the N+1 nodes
    """
    bv = bv or BoundaryValues()
    values = psi.values if isinstance(psi, GridFunction) else np.asarray(psi, dtype=np.float64)
    if values.shape != (grid.size,):
        raise GridError(f"psi has {values.size} values, grid N={grid.N} needs {grid.size}")
    w = _second_difference_solve(grid, values, bv.c3, bv.c4)
    return _second_difference_solve(grid, w, bv.c1, bv.c2)
