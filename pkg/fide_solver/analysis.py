"""
FIDE Solver - Certificates, Error Bounds and Convergence Studies
================================================================

This module turns the contraction argument behind the fixed-point iteration
into computable checks:

- estimate_kernel_norms(): K_i = max_x int |k_i(x, s)| ds on a grid
- make_certificate(): contraction factor q = (L0 + L1 + L2 K0 + L3 K1) M0
- a_priori_bound() / a_posteriori_bound(): M0 q^m / (1 - q) d (+ C h^2)
- check_bound_condition() / estimate_lipschitz(): sampling heuristics over
  the domain D_M, never used as proofs
- positivity_check(): 0 <= U <= M0 M on the grid
- convergence_study() / observed_orders(): error tables and fitted orders
"""

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from fide_solver.exceptions import CertificateError, ProblemDefinitionError
from fide_solver.green_kernel import M0
from fide_solver.grid_quadrature import make_grid, trapezoid_weights
from fide_solver.logger import SolverLogger
from fide_solver.solver import FixedPointSolver, StoppingRule
from fide_solver.solver_config import get_study_config


@dataclass(frozen=True)
class ContractionCertificate:
    M: float
    L0: float
    L1: float
    L2: float
    L3: float
    K0: float
    K1: float
    M0: float
    q: float
    contractive: bool
    domain_bound: float
    lipschitz_source: str = "given"

    def recompute_q(self):
        return (self.L0 + self.L1 + self.L2 * self.K0 + self.L3 * self.K1) * self.M0

    def domain_box(self):
        """Half-widths of D_M in (u, y, v, z)."""
        return {
            "u": self.domain_bound,
            "y": self.domain_bound,
            "v": self.domain_bound * self.K0,
            "z": self.domain_bound * self.K1,
        }

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class StudyRow:
    N: int
    h2: float
    m: int
    error: float
    stop_reason: str = "criterion-met"


@dataclass
class ConvergenceStudy:
    problem: str
    rows: list = field(default_factory=list)
    fitted_order: Optional[float] = None
    fit_residual: Optional[float] = None
    rule: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "problem": self.problem,
            "rule": dict(self.rule),
            "rows": [asdict(row) for row in self.rows],
            "fitted_order": self.fitted_order,
            "fit_residual": self.fit_residual,
        }


@dataclass(frozen=True)
class BoundCheck:
    passed: bool
    max_abs_value: float
    worst_point: tuple
    samples: int


@dataclass(frozen=True)
class PositivityCheck:
    passed: bool
    min_value: float
    max_value: float
    upper_bound: float


# ----------------------------
# Kernel Norms and Certificates
# ----------------------------

def _kernel_norm(kernel, grid, name):
    X, T = np.meshgrid(grid.nodes, grid.nodes, indexing="ij")
    with np.errstate(all="ignore"):
        values = np.broadcast_to(np.asarray(kernel(X, T), dtype=np.float64), X.shape)
    if not np.all(np.isfinite(values)):
        raise ProblemDefinitionError("kernel is not finite on the grid", field=name)
    return float(np.max(np.abs(values) @ (grid.h * trapezoid_weights(grid))))


def estimate_kernel_norms(spec, grid):
    """
    Trapezium estimates of K0 and K1.

    Args:
        spec (ProblemSpec): Problem whose kernels are measured
        grid (Grid): Quadrature grid; N >= 200 recommended

    Returns:
        tuple: (K0, K1)
    """
    return _kernel_norm(spec.k0, grid, "k0"), _kernel_norm(spec.k1, grid, "k1")


def make_certificate(M, L, K0, K1, lipschitz_source="given"):
    """
    Build the contraction certificate for the ball of radius M.

    Args:
        M (float): Bound on |f| over D_M, M > 0
        L (sequence): Lipschitz constants (L0, L1, L2, L3) of f in u, y, v, z
        K0, K1 (float): Kernel norms

    Returns:
        ContractionCertificate: q, contractivity and the bound M0 * M on |u|
    """
    L = [float(c) for c in L]
    errors = []
    if not M > 0:
        errors.append(f"M must be positive, got {M}")
    if len(L) != 4:
        errors.append(f"expected 4 Lipschitz constants, got {len(L)}")
    elif any(c < 0 for c in L):
        errors.append(f"Lipschitz constants must be nonnegative, got {L}")
    if errors:
        raise ValueError("; ".join(errors))

    L0, L1, L2, L3 = L
    q = (L0 + L1 + L2 * K0 + L3 * K1) * M0
    cert = ContractionCertificate(
        M=float(M), L0=L0, L1=L1, L2=L2, L3=L3, K0=float(K0), K1=float(K1),
        M0=M0, q=q, contractive=q < 1.0, domain_bound=M0 * M,
        lipschitz_source=lipschitz_source,
    )
    SolverLogger.log_certificate(q, cert.contractive, details=cert.to_dict())
    return cert


def a_priori_bound(cert, d, m):
    """M0 * q^m / (1 - q) * d, the bound on ||u_m - u|| of the continuous iteration."""
    if not cert.contractive:
        raise CertificateError(f"certificate is not contractive (q = {cert.q:.6g})")
    if d < 0 or m < 0:
        raise ValueError(f"need d >= 0 and m >= 0, got d={d}, m={m}")
    return cert.M0 * (cert.q ** m / (1.0 - cert.q)) * d


def a_posteriori_bound(cert, d, m, h, C=1.0):
    """Total-error form for the discrete iteration: a_priori_bound + C h^2."""
    return a_priori_bound(cert, d, m) + C * h * h


# ----------------------------
# Sampling Heuristics
# ----------------------------

def _domain_lattice(spec, cert, points_per_axis):
    box = cert.domain_box()
    start = 1.0 / (points_per_axis - 1) if spec.singular_at_zero else 0.0
    axes = [np.linspace(start, 1.0, points_per_axis)]
    axes += [np.linspace(-box[k], box[k], points_per_axis) for k in ("u", "y", "v", "z")]
    grids = np.meshgrid(*axes, indexing="ij")
    return [g.ravel() for g in grids]


def check_bound_condition(spec, cert, points_per_axis=7):
    """
    Sample |f| <= M over a lattice of D_M.

    This is a heuristic: passing means no sampled point violated the bound,
    not that the bound holds everywhere.
    """
    x, u, y, v, z = _domain_lattice(spec, cert, points_per_axis)
    with np.errstate(all="ignore"):
        values = np.abs(np.broadcast_to(np.asarray(spec.f(x, u, y, v, z), dtype=np.float64), x.shape))
    values = np.where(np.isfinite(values), values, np.inf)
    worst = int(np.argmax(values))
    check = BoundCheck(
        passed=bool(values[worst] <= cert.M),
        max_abs_value=float(values[worst]),
        worst_point=(x[worst], u[worst], y[worst], v[worst], z[worst]),
        samples=x.size,
    )
    SolverLogger.log(
        "Certificate", "Info" if check.passed else "Failed",
        f"|f| <= M sampled over D_M: max {check.max_abs_value:.6g} vs M={cert.M:.6g}",
        details={"worst_point": check.worst_point, "samples": check.samples},
    )
    return check


def estimate_lipschitz(spec, M, K0, K1, points_per_axis=7, delta=1e-6):
    """
    Heuristic Lipschitz constants of f in u, y, v, z over D_M.

    Takes the largest central-difference partial derivative found on a
    lattice. Not a rigorous bound; use supplied constants for proofs.

    Returns:
        tuple: (L0, L1, L2, L3)
    """
    probe = make_certificate(M, (0.0, 0.0, 0.0, 0.0), K0, K1, lipschitz_source="heuristic")
    x, *state = _domain_lattice(spec, probe, points_per_axis)
    constants = []
    with np.errstate(all="ignore"):
        for k in range(4):
            plus = [s + delta if i == k else s for i, s in enumerate(state)]
            minus = [s - delta if i == k else s for i, s in enumerate(state)]
            slope = (np.asarray(spec.f(x, *plus)) - np.asarray(spec.f(x, *minus))) / (2.0 * delta)
            slope = np.abs(np.broadcast_to(slope, x.shape))
            constants.append(float(np.max(np.where(np.isfinite(slope), slope, 0.0))))
    SolverLogger.log("Certificate", "Info", "Heuristic Lipschitz estimate", details={"L": constants})
    return tuple(constants)


def positivity_check(report, cert=None, upper_bound=None):
    """0 <= U(x_i) <= M0 * M on every node (the upper bound from the certificate)."""
    if upper_bound is None:
        upper_bound = cert.domain_bound if cert is not None else np.inf
    return PositivityCheck(
        passed=report.min_value >= 0.0 and report.max_value <= upper_bound,
        min_value=report.min_value,
        max_value=report.max_value,
        upper_bound=float(upper_bound),
    )


# ----------------------------
# Convergence Studies
# ----------------------------

def fit_order(rows, error_floor=1e-12):
    """
    Least-squares slope of log(error) against log(h).

    Rows at or below the error floor are excluded; with fewer than three
    usable rows the order is not applicable and (None, None) is returned.
    """
    usable = [row for row in rows if row.error > error_floor]
    if len(usable) < 3:
        return None, None
    log_h = np.log([1.0 / row.N for row in usable])
    log_e = np.log([row.error for row in usable])
    slope, intercept = np.polyfit(log_h, log_e, 1)
    residual = float(np.sqrt(np.mean((log_e - (slope * log_h + intercept)) ** 2)))
    return float(slope), residual


def observed_orders(study):
    """Order estimates log(e1/e2) / log(h1/h2) between adjacent rows."""
    orders = []
    for a, b in itertools.pairwise(study.rows):
        if a.error > 0 and b.error > 0:
            orders.append((a.N, b.N, float(np.log(a.error / b.error) / np.log(b.N / a.N))))
    return orders


def _study_row(spec, n, rule):
    report = FixedPointSolver(spec, make_grid(n)).solve(rule)
    SolverLogger.log_study_row(spec.name, n, report.iterations, report.error_vs_exact)
    return StudyRow(
        N=n,
        h2=report.grid.h ** 2,
        m=report.iterations,
        error=report.error_vs_exact,
        stop_reason=report.stop_reason,
    )


def convergence_study(spec, N_list, rule=None, workers=None):
    """
    Solve on every grid size and tabulate (N, h^2, m, error).

    Args:
        spec (ProblemSpec): Problem with an exact solution
        N_list (iterable of int): At least three grid sizes
        rule (StoppingRule, optional): Defaults to the configured rule
        workers (int, optional): Concurrent solves; rows are ordered by N

    Returns:
        ConvergenceStudy: Rows, fitted order and fit residual
    """
    if spec.exact is None:
        raise ProblemDefinitionError("a convergence study needs an exact solution", field="exact")
    sizes = sorted({int(n) for n in N_list})
    if len(sizes) < 3:
        raise ValueError(f"a convergence study needs at least 3 distinct grid sizes, got {sizes}")

    config = get_study_config()
    rule = rule or StoppingRule.from_config()
    workers = workers or config["workers"]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda n: _study_row(spec, n, rule), sizes))
    else:
        rows = [_study_row(spec, n, rule) for n in sizes]
    rows.sort(key=lambda row: row.N)

    order, residual = fit_order(rows, config["order_error_floor"])
    return ConvergenceStudy(
        problem=spec.name,
        rows=rows,
        fitted_order=order,
        fit_residual=residual,
        rule=rule.to_dict(),
    )
