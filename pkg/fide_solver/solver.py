"""
FIDE Solver - Discrete Fixed-Point Iteration
============================================

This module contains the FixedPointSolver class, which runs the discrete
iteration for u'''' = f(x, u, u(phi), K0 u, K1 u(phi)) with Navier data:

    Psi_0(x_i)     = f(x_i, 0, 0, 0, 0)
    U_m(x_i)       = sum_j h rho_j G(x_i, x_j) Psi_m(x_j)         + p(x_i)
    Y_m(x_i)       = sum_j h rho_j G(phi(x_i), x_j) Psi_m(x_j)    + p(phi(x_i))
    V_m(x_i)       = sum_j h rho_j k0(x_i, x_j) U_m(x_j)
    Z_m(x_i)       = sum_j h rho_j k1(x_i, x_j) Y_m(x_j)
    Psi_{m+1}(x_i) = f(x_i, U_m, Y_m, V_m, Z_m)

where p is the boundary cubic (zero for homogeneous data). All quadrature
matrices are built once per solver; each step is four matrix-vector
products and one evaluation of f.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from fide_solver.exceptions import ExpressionError, ProblemDefinitionError, DivergenceError, SolverError
from fide_solver.green_kernel import boundary_cubic, eval_cubic, green_matrix
from fide_solver.grid_quadrature import Grid, GridFunction, max_norm, trapezoid_weights
from fide_solver.logger import SolverLogger
from fide_solver.solver_config import get_solver_config

SUCCESSIVE = "successive"
EXACT_H2 = "exact-h2"

CRITERION_MET = "criterion-met"
MAX_ITERATIONS = "max-iterations"


@dataclass(frozen=True)
class StoppingRule:
    """
    When to stop iterating.

    successive: ||Psi_m - Psi_{m-1}|| <= tol
    exact-h2:   ||U_m - u|| <= h^2 (needs an exact solution)

    max_iterations caps every variant.
    """

    kind: str = SUCCESSIVE
    tol: float = 1e-9
    max_iterations: int = 100

    def __post_init__(self):
        errors = []
        if self.kind not in (SUCCESSIVE, EXACT_H2):
            errors.append(f"unknown criterion '{self.kind}'")
        if not self.tol > 0:
            errors.append(f"tol must be positive, got {self.tol}")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            errors.append(f"max_iterations must be a positive integer, got {self.max_iterations}")
        if errors:
            raise ValueError("; ".join(errors))

    @classmethod
    def successive(cls, tol=1e-9, max_iterations=100):
        return cls(SUCCESSIVE, tol, max_iterations)

    @classmethod
    def exact_h2(cls, max_iterations=100):
        return cls(EXACT_H2, max_iterations=max_iterations)

    @classmethod
    def from_config(cls, config=None):
        config = config or get_solver_config()
        return cls(config["criterion"], float(config["tol"]), int(config["max_iterations"]))

    def is_met(self, residual_history, error, h):
        if self.kind == SUCCESSIVE:
            return bool(residual_history) and residual_history[-1] <= self.tol
        return error is not None and error <= h * h

    def to_dict(self):
        data = {"criterion": self.kind, "max_iterations": self.max_iterations}
        if self.kind == SUCCESSIVE:
            data["tol"] = self.tol
        return data


@dataclass(frozen=True)
class IterationState:
    """Grid functions of iteration m and the updated Psi_{m+1}."""

    m: int
    Psi: GridFunction
    U: GridFunction
    Y: GridFunction
    V: GridFunction
    Z: GridFunction
    Psi_next: GridFunction


@dataclass
class SolveReport:
    problem: str
    U: GridFunction
    iterations: int
    stop_reason: str
    residual_history: list = field(default_factory=list)
    error_vs_exact: Optional[float] = None
    d_measured: Optional[float] = None
    rule: dict = field(default_factory=dict)

    @property
    def grid(self):
        return self.U.grid

    @property
    def min_value(self):
        return float(np.min(self.U.values))

    @property
    def max_value(self):
        return float(np.max(self.U.values))

    def to_dict(self):
        return {
            "problem": self.problem,
            "N": self.grid.N,
            "h": self.grid.h,
            "iterations": self.iterations,
            "stop_reason": self.stop_reason,
            "rule": dict(self.rule),
            "residual_history": [float(r) for r in self.residual_history],
            "error_vs_exact": self.error_vs_exact,
            "d_measured": self.d_measured,
            "min_value": self.min_value,
            "max_value": self.max_value,
            "x": [float(x) for x in self.grid.nodes],
            "u": [float(u) for u in self.U.values],
        }

    @classmethod
    def from_dict(cls, data):
        grid = Grid(int(data["N"]))
        return cls(
            problem=data["problem"],
            U=GridFunction(grid, data["u"]),
            iterations=int(data["iterations"]),
            stop_reason=data["stop_reason"],
            residual_history=list(data["residual_history"]),
            error_vs_exact=data.get("error_vs_exact"),
            d_measured=data.get("d_measured"),
            rule=dict(data.get("rule", {})),
        )


class FixedPointSolver:
    """
    Discrete fixed-point iteration for one problem on one grid.

    The solver precomputes the weighted Green rows at the nodes and at
    phi(nodes), the weighted kernel matrices and the boundary cubic samples,
    and is read-only afterwards.
    """

    def __init__(self, spec, grid, divergence_threshold=None):
        self.spec = spec
        self.grid = grid
        if divergence_threshold is None:
            divergence_threshold = get_solver_config()["divergence_threshold"]
        self.divergence_threshold = float(divergence_threshold)
        self._build_operators()

    # ----------------------------
    # Setup
    # ----------------------------

    def _evaluate(self, quantity, func, *args):
        args = np.broadcast_arrays(*(np.asarray(a, dtype=np.float64) for a in args))
        shape = args[0].shape
        try:
            with np.errstate(all="ignore"):
                values = np.asarray(func(*args), dtype=np.float64)
        except ExpressionError:
            values = np.full(shape, np.nan)
            for index in np.ndindex(*shape):
                try:
                    values[index] = func(*(a[index] for a in args))
                except ExpressionError:
                    break
        values = np.array(np.broadcast_to(values, shape))
        self._require_finite(quantity, values)
        return values

    @staticmethod
    def _require_finite(quantity, values):
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            node = np.unravel_index(bad[0], np.shape(values))
            node = int(node[0]) if len(node) == 1 else tuple(int(i) for i in node)
            raise SolverError(quantity, node, values.ravel()[bad[0]])

    def _build_operators(self):
        grid, spec = self.grid, self.spec
        nodes = grid.nodes

        self.phi_nodes = self._evaluate("phi", spec.phi, nodes)
        outside = np.flatnonzero((self.phi_nodes < 0.0) | (self.phi_nodes > 1.0))
        if outside.size:
            i = int(outside[0])
            raise ProblemDefinitionError(
                f"phi(x_{i}) = {self.phi_nodes[i]} is outside [0, 1]", field="phi"
            )

        weights = grid.h * trapezoid_weights(grid)
        X, T = np.meshgrid(nodes, nodes, indexing="ij")
        self.G = green_matrix(grid)
        self.G_phi = green_matrix(grid, self.phi_nodes)
        self.K0 = self._evaluate("k0", spec.k0, X, T) * weights[None, :]
        self.K1 = self._evaluate("k1", spec.k1, X, T) * weights[None, :]

        cubic = boundary_cubic(spec.bv)
        self.p_nodes = eval_cubic(cubic, nodes)
        self.p_phi = eval_cubic(cubic, self.phi_nodes)

        if spec.exact is not None:
            self.exact_nodes = self._evaluate("exact", spec.exact, nodes)
        else:
            self.exact_nodes = None

    # ----------------------------
    # Iteration
    # ----------------------------

    def _right_hand_side(self, u, y, v, z):
        nodes = self.grid.nodes
        if not self.spec.singular_at_zero:
            return self._evaluate("Psi", self.spec.f, nodes, u, y, v, z)
        # G(., 0) vanishes, so the node x = 0 contributes nothing to the sums
        psi = np.zeros_like(nodes)
        psi[1:] = self._evaluate("Psi", self.spec.f, nodes[1:], u[1:], y[1:], v[1:], z[1:])
        return psi

    def init_psi(self):
        """Psi_0(x_i) = f(x_i, 0, 0, 0, 0), zero at x = 0 for singular problems."""
        zero = np.zeros(self.grid.size)
        return GridFunction(self.grid, self._right_hand_side(zero, zero, zero, zero))

    def step(self, psi, m=0):
        """
        Compute U_m, Y_m, V_m, Z_m from Psi_m and the update Psi_{m+1}.

        Args:
            psi (GridFunction or array-like): Psi_m on the solver's grid
            m (int): Iteration counter recorded in the state

        Returns:
            IterationState: All five grid functions of step m plus Psi_{m+1}

        Raises:
            SolverError: If any intermediate is not finite
        """
        psi = psi if isinstance(psi, GridFunction) else GridFunction(self.grid, psi)
        values = psi.values
        with np.errstate(all="ignore"):
            u = self.G @ values + self.p_nodes
            self._require_finite("U", u)
            y = self.G_phi @ values + self.p_phi
            self._require_finite("Y", y)
            v = self.K0 @ u
            self._require_finite("V", v)
            z = self.K1 @ y
            self._require_finite("Z", z)
        psi_next = self._right_hand_side(u, y, v, z)

        def wrap(arr):
            return GridFunction(self.grid, arr)

        return IterationState(m, psi, wrap(u), wrap(y), wrap(v), wrap(z), wrap(psi_next))

    def error_vs_exact(self, U):
        if self.exact_nodes is None:
            return None
        return max_norm(np.asarray(U) - self.exact_nodes)

    def solve(self, rule=None):
        """
        Iterate until the stopping rule fires or the iteration cap is hit.

        Args:
            rule (StoppingRule, optional): Defaults to the configured rule

        Returns:
            SolveReport: Final U_m, iteration count, residual history and,
            when an exact solution is known, the max-norm error

        Raises:
            ProblemDefinitionError: exact-h2 requested without an exact solution
            DivergenceError: If ||Psi_m|| exceeds the divergence threshold
            SolverError: If an intermediate becomes non-finite
        """
        rule = rule or StoppingRule.from_config()
        if rule.kind == EXACT_H2 and self.exact_nodes is None:
            raise ProblemDefinitionError(
                f"criterion '{EXACT_H2}' requires an exact solution", field="exact"
            )

        name = self.spec.name
        SolverLogger.log_solve_start(name, self.grid.N, rule.to_dict())
        try:
            report = self._iterate(rule)
        except Exception as e:
            SolverLogger.log_solve_end(name, success=False, error=e)
            raise
        SolverLogger.log_solve_end(name, True, report.iterations, report.stop_reason)
        return report

    def _iterate(self, rule):
        h = self.grid.h
        psi = self.init_psi()
        history = []
        d_measured = None
        m = 0
        while True:
            state = self.step(psi, m)
            error = self.error_vs_exact(state.U)
            residual = max_norm(state.Psi_next.values - psi.values)
            if m == 0:
                d_measured = residual

            if rule.is_met(history, error, h):
                stop_reason = CRITERION_MET
                break
            if m >= rule.max_iterations:
                stop_reason = MAX_ITERATIONS
                break

            history.append(residual)
            psi = state.Psi_next
            m += 1
            norm = psi.max_norm()
            SolverLogger.log_iteration(m, residual, norm)
            if norm > self.divergence_threshold:
                raise DivergenceError(m, norm, self.divergence_threshold)

        return SolveReport(
            problem=self.spec.name,
            U=state.U,
            iterations=m,
            stop_reason=stop_reason,
            residual_history=history,
            error_vs_exact=error,
            d_measured=d_measured,
            rule=rule.to_dict(),
        )


# ----------------------------
# Functional Interface
# ----------------------------

def init_psi(spec, grid):
    return FixedPointSolver(spec, grid).init_psi()


def step(spec, grid, Psi_m, m=0):
    return FixedPointSolver(spec, grid).step(Psi_m, m)


def solve(spec, grid, rule=None):
    return FixedPointSolver(spec, grid).solve(rule)
