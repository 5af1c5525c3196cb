"""
FIDE Solver - Problem Definitions
=================================

This module holds the data of a fourth-order functional integro-differential
boundary value problem

    u''''(x) = f(x, u(x), u(phi(x)), int k0(x,t) u(t) dt, int k1(x,t) u(phi(t)) dt),
    u(0) = c1, u(1) = c2, u''(0) = c3, u''(1) = c4,

together with validation, JSON config loading and the built-in registry of
four reference problems.

Functions:
- builtin(): Look up a registered problem by name
- from_config(): Build a problem from a ProblemConfig
- load_config(): Read a ProblemConfig from a JSON file
- to_config(): Serialize an expression-backed problem
- validate(): Sample-based sanity checks of a problem
"""

import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from fide_solver.exceptions import ExpressionError, ProblemDefinitionError
from fide_solver.expression import parse
from fide_solver.green_kernel import BoundaryValues
from fide_solver.logger import SolverLogger

FIELD_VARIABLES = {
    "f": ("x", "u", "y", "v", "z"),
    "k0": ("x", "t"),
    "k1": ("x", "t"),
    "phi": ("t",),
    "exact": ("x",),
}

CONFIG_FIELDS = {"f", "k0", "k1", "phi", "exact", "bc", "singular_at_zero", "name", "description"}
REQUIRED_FIELDS = ("f", "k0", "k1", "phi", "bc")


class ExprFunction:
    """Positional-argument callable backed by a parsed expression."""

    __slots__ = ("expr", "argnames")

    def __init__(self, expr, argnames):
        self.expr = expr
        self.argnames = tuple(argnames)

    @property
    def source(self):
        return self.expr.source

    def __call__(self, *args):
        if len(args) != len(self.argnames):
            raise TypeError(f"expected {len(self.argnames)} arguments ({', '.join(self.argnames)}), got {len(args)}")
        return self.expr.evaluate(dict(zip(self.argnames, args)))

    def __repr__(self):
        return f"ExprFunction({', '.join(self.argnames)} -> {self.expr})"


@dataclass(frozen=True)
class ProblemSpec:
    """
    Data of one problem.

    f takes (x, u, y, v, z); k0 and k1 take (x, t); phi takes t; exact takes
    x. All callables must accept numpy arrays. singular_at_zero marks a
    right-hand side with an integrable blow-up at x = 0.
    """

    f: Callable
    k0: Callable
    k1: Callable
    phi: Callable
    bv: BoundaryValues = field(default_factory=BoundaryValues)
    exact: Optional[Callable] = None
    singular_at_zero: bool = False
    name: str = "problem"
    description: str = ""

    @property
    def has_exact(self):
        return self.exact is not None


@dataclass(frozen=True)
class ProblemConfig:
    """Textual problem definition as read from a JSON config file."""

    f: str
    k0: str
    k1: str
    phi: str
    bc: tuple = (0.0, 0.0, 0.0, 0.0)
    exact: Optional[str] = None
    singular_at_zero: bool = False
    name: str = "config"
    description: str = ""

    @classmethod
    def from_dict(cls, data):
        """
        Build a config from a decoded JSON object.

        Unknown fields and missing required fields are collected and
        reported together.
        """
        if not isinstance(data, dict):
            raise ProblemDefinitionError(f"expected a JSON object, got {type(data).__name__}")
        errors = []
        unknown = sorted(set(data) - CONFIG_FIELDS)
        if unknown:
            errors.append(f"unknown field(s): {', '.join(unknown)}")
        for name in REQUIRED_FIELDS:
            if name not in data:
                errors.append(f"missing field '{name}'")
        for name in ("f", "k0", "k1", "phi", "exact", "name", "description"):
            if name in data and data[name] is not None and not isinstance(data[name], str):
                errors.append(f"field '{name}' must be a string")
        if "bc" in data and (not isinstance(data["bc"], (list, tuple)) or len(data["bc"]) != 4):
            errors.append("field 'bc' must be an array of 4 numbers")
        if "singular_at_zero" in data and not isinstance(data["singular_at_zero"], bool):
            errors.append("field 'singular_at_zero' must be a boolean")
        if errors:
            raise ProblemDefinitionError("; ".join(errors))
        return cls(
            f=data["f"],
            k0=data["k0"],
            k1=data["k1"],
            phi=data["phi"],
            bc=tuple(data["bc"]),
            exact=data.get("exact"),
            singular_at_zero=data.get("singular_at_zero", False),
            name=data.get("name", "config"),
            description=data.get("description", ""),
        )

    def to_dict(self):
        data = {
            "name": self.name,
            "f": self.f,
            "k0": self.k0,
            "k1": self.k1,
            "phi": self.phi,
            "bc": [float(c) for c in self.bc],
            "singular_at_zero": self.singular_at_zero,
        }
        if self.exact is not None:
            data["exact"] = self.exact
        if self.description:
            data["description"] = self.description
        return data


@dataclass
class ValidationIssue:
    check: str
    point: tuple
    message: str


@dataclass
class ValidationReport:
    passed: bool = True
    issues: list = field(default_factory=list)

    @property
    def first_failure(self):
        return self.issues[0] if self.issues else None

    def add(self, check, point, message):
        self.passed = False
        self.issues.append(ValidationIssue(check, tuple(float(p) for p in point), message))


# ----------------------------
# Built-in Registry
# ----------------------------

_EXAMPLE2_F = "1 + pi^2*sin(pi*x) + 2*u^2 + 2*y^2 + exp(-(u^2)) + 3*v^2*z^2"

BUILTIN_CONFIGS = {
    "example1": ProblemConfig(
        name="example1",
        description="nonlinear FIDE with phi(t) = t/2 and exact solution sin(pi x)",
        f=(
            "pi^4*sin(pi*x) - 0.5*sin(pi*x)^2 - 0.5*sin(pi*x/2)^2"
            " + 0.5*u^2 + 0.5*y^2 - 8/(3*pi)*v + z"
        ),
        k0="exp(x)*sin(pi*t)",
        k1="exp(x)*sin(pi*t)",
        phi="t/2",
        exact="sin(pi*x)",
    ),
    "example2": ProblemConfig(
        name="example2",
        description="positive solution bounded by 0.1628, no closed form",
        f=_EXAMPLE2_F,
        k0="exp(x)*sin(pi*t)",
        k1="exp(x)*sin(pi*t*x/2)",
        phi="t/2",
    ),
    "example3": ProblemConfig(
        name="example3",
        description="non-homogeneous data u''(0) = u''(1) = 2, exact solution x^2 (1-x)^2",
        f=(
            "24 - x^4*(1-x)^4 - (x/3)^4*(1-x/3)^4 - exp(x)/60"
            " - 4*(pi^4 - 3*pi^2 + 12)/(81*pi^5)*x^2*(1-x)^2*sin(pi*x)"
            " + u^2 + y^2 + v + u*z"
        ),
        k0="exp(x)*t",
        k1="sin(pi*x)*sin(pi*t)",
        phi="t/3",
        bc=(0.0, 0.0, 2.0, 2.0),
        exact="x^2*(1-x)^2",
    ),
    "example4": ProblemConfig(
        name="example4",
        description="example2 with a 1/sqrt(x) weak singularity at x = 0",
        f=f"1/sqrt(x)*({_EXAMPLE2_F})",
        k0="exp(x)*sin(pi*t)",
        k1="exp(x)*sin(pi*t*x/2)",
        phi="t/2",
        singular_at_zero=True,
    ),
}


def list_builtins():
    """Return {name: description} for every registered problem."""
    return {name: doc.description for name, doc in BUILTIN_CONFIGS.items()}


def builtin(name):
    """
    Look up a registered problem.

    Args:
        name (str): One of example1, example2, example3, example4

    Returns:
        ProblemSpec: Fully populated problem

    Raises:
        ProblemDefinitionError: If the name is not registered
    """
    try:
        doc = BUILTIN_CONFIGS[name]
    except KeyError:
        known = ", ".join(sorted(BUILTIN_CONFIGS))
        raise ProblemDefinitionError(f"unknown built-in problem '{name}' (known: {known})") from None
    return from_config(doc)


# ----------------------------
# Config Files
# ----------------------------

def _compile(doc, name):
    source = getattr(doc, name)
    try:
        return ExprFunction(parse(source, FIELD_VARIABLES[name]), FIELD_VARIABLES[name])
    except ExpressionError as e:
        raise ProblemDefinitionError(str(e), field=name) from e


def from_config(doc, samples=1000):
    """
    Build a ProblemSpec whose functions evaluate the parsed expressions.

    The result is validated; a failed validation raises with the first
    offending point.
    """
    try:
        bv = BoundaryValues.from_sequence(doc.bc)
    except (TypeError, ValueError) as e:
        raise ProblemDefinitionError(str(e), field="bc") from e

    spec = ProblemSpec(
        f=_compile(doc, "f"),
        k0=_compile(doc, "k0"),
        k1=_compile(doc, "k1"),
        phi=_compile(doc, "phi"),
        bv=bv,
        exact=_compile(doc, "exact") if doc.exact is not None else None,
        singular_at_zero=bool(doc.singular_at_zero),
        name=doc.name,
        description=doc.description,
    )
    report = validate(spec, samples)
    if not report.passed:
        issue = report.first_failure
        SolverLogger.log_error(
            f"Problem {doc.name} failed validation",
            details={"check": issue.check, "point": issue.point, "message": issue.message},
            log_type="Problem",
        )
        raise ProblemDefinitionError(f"{issue.message} at {issue.point}", field=issue.check)
    return spec


def load_config(path):
    """Read a problem config JSON document from disk."""
    with open(path, encoding="utf-8") as f:
        try:
            data = json.load(f)
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise ProblemDefinitionError(f"invalid JSON in {path}: {e}") from e
    return ProblemConfig.from_dict(data)


def to_config(spec):
    """Serialize an expression-backed ProblemSpec back to a ProblemConfig."""
    sources = {}
    for name in ("f", "k0", "k1", "phi", "exact"):
        func = getattr(spec, name)
        if func is None:
            sources[name] = None
            continue
        if not isinstance(func, ExprFunction):
            raise ProblemDefinitionError("only expression-backed problems can be serialized", field=name)
        sources[name] = func.source
    return ProblemConfig(
        bc=spec.bv.as_tuple(),
        singular_at_zero=spec.singular_at_zero,
        name=spec.name,
        description=spec.description,
        **sources,
    )


# ----------------------------
# Validation
# ----------------------------

def _first_nonfinite(values, points):
    values = np.broadcast_to(np.asarray(values, dtype=np.float64), points[0].shape)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size == 0:
        return None
    return tuple(p.ravel()[bad[0]] for p in points)


def _safe_call(func, *args):
    try:
        with np.errstate(all="ignore"):
            return func(*args), None
    except ExpressionError as e:
        return None, e


def _locate_failure(func, points):
    for index in range(points[0].size):
        args = tuple(p.ravel()[index] for p in points)
        value, error = _safe_call(func, *args)
        if error is not None or not np.isfinite(value):
            return args
    return tuple(p.ravel()[0] for p in points)


def _check_finite(report, check, func, points):
    values, error = _safe_call(func, *points)
    if error is None:
        bad = _first_nonfinite(values, points)
        if bad is None:
            return
    else:
        bad = _locate_failure(func, points)
    report.add(check, bad, f"{check} is not finite")


def validate(spec, samples=1000):
    """
    Sample-based checks of a problem definition.

    Checks that phi maps [0, 1] into [0, 1] on a uniform sample and that
    f (at zero and unit state), k0 and k1 evaluate finitely, skipping x = 0
    when the problem is flagged singular there.

    Args:
        spec (ProblemSpec): Problem to check
        samples (int): Number of sample points, at least 100

    Returns:
        ValidationReport: passed flag and the offending points, if any
    """
    if samples < 100:
        raise ValueError(f"samples must be at least 100, got {samples}")
    report = ValidationReport()
    t = np.linspace(0.0, 1.0, samples)

    phi_values, error = _safe_call(spec.phi, t)
    if error is not None:
        report.add("phi", _locate_failure(spec.phi, (t,)), "phi is not finite")
    else:
        phi_values = np.broadcast_to(np.asarray(phi_values, dtype=np.float64), t.shape)
        outside = np.flatnonzero(~((phi_values >= 0.0) & (phi_values <= 1.0)))
        if outside.size:
            i = outside[0]
            report.add("phi", (t[i],), f"phi(t) = {phi_values[i]} is outside [0, 1]")

    x = t[1:] if spec.singular_at_zero else t
    for level in (0.0, 1.0):
        state = np.full_like(x, level)
        _check_finite(report, "f", spec.f, (x, state, state, state, state))

    side = max(10, int(np.ceil(np.sqrt(samples))))
    xs, ts = np.meshgrid(np.linspace(0.0, 1.0, side), np.linspace(0.0, 1.0, side), indexing="ij")
    _check_finite(report, "k0", spec.k0, (xs, ts))
    _check_finite(report, "k1", spec.k1, (xs, ts))

    if spec.exact is not None:
        _check_finite(report, "exact", spec.exact, (t,))
    return report
