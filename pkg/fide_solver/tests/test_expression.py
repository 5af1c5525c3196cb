import numpy as np
import pytest

from fide_solver.exceptions import (
    ArityError,
    EvaluationDomainError,
    ExpressionSyntaxError,
    MissingBindingError,
    UnknownIdentifierError,
)
from fide_solver.expression import (
    CONSTANTS,
    FUNCTIONS,
    BinaryOp,
    Call,
    Constant,
    Negate,
    Number,
    Variable,
    evaluate,
    parse,
)


@pytest.mark.parametrize(
    "source, expected",
    [
        ("2+3*4^2", 50.0),
        ("(1+2)*3", 9.0),
        ("8/4/2", 1.0),
        ("1-2-3", -4.0),
        ("-2^2", -4.0),
        ("2^3^2", 512.0),
        ("2^-1", 0.5),
        ("-3*-2", 6.0),
        ("--4", 4.0),
        ("1.5e2 + .5", 150.5),
        ("  e ^ 0  ", 1.0),
    ],
)
def test_precedence(source, expected):
    assert evaluate(parse(source), {}) == pytest.approx(expected)


def test_variables_and_functions():
    expr = parse("sin(pi*x)", {"x"})
    assert expr(x=0.5) == pytest.approx(1.0)
    assert expr.variables == {"x"}
    assert evaluate(parse("x^2*(1-x)^2", {"x"}), {"x": 0.5}) == pytest.approx(0.0625)
    assert evaluate(parse("exp(-(u^2))", {"u"}), {"u": 0.0}) == 1.0
    assert evaluate(parse("abs(x) + sqrt(4) + log(e) + cos(0)", {"x"}), {"x": -1}) == pytest.approx(5.0)


def test_vectorized_evaluation():
    x = np.linspace(0, 1, 5)
    values = evaluate(parse("x^2 + 1", {"x"}), {"x": x})
    assert np.allclose(values, x ** 2 + 1)
    assert evaluate(parse("3", set()), {"x": x}) == 3.0


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError) as info:
        parse("sin(q)", {"x"})
    assert info.value.name == "q"
    assert "q" in str(info.value)
    with pytest.raises(UnknownIdentifierError):
        parse("foo(x)", {"x"})


@pytest.mark.parametrize(
    "source, position",
    [("2+*3", 2), ("(1+2", 4), ("2 $ 3", 2), ("1 2", 2), ("sin(x", 5)],
)
def test_syntax_errors_report_position(source, position):
    with pytest.raises(ExpressionSyntaxError) as info:
        parse(source, {"x"})
    assert info.value.position == position


def test_nesting_depth_is_capped():
    assert evaluate(parse("(" * 50 + "x" + ")" * 50, {"x"}), {"x": 2.0}) == 2.0
    with pytest.raises(ExpressionSyntaxError) as info:
        parse("(" * 3000 + "x" + ")" * 3000, {"x"})
    assert info.value.position == 100
    with pytest.raises(ExpressionSyntaxError):
        parse("-" * 500 + "1")


def test_empty_source():
    with pytest.raises(ExpressionSyntaxError):
        parse("   ")


def test_arity():
    with pytest.raises(ArityError):
        parse("sin(1, 2)")
    with pytest.raises(ArityError):
        parse("sqrt + 1")


def test_missing_binding():
    with pytest.raises(MissingBindingError) as info:
        evaluate(parse("x + y", {"x", "y"}), {"x": 1.0})
    assert info.value.name == "y"


@pytest.mark.parametrize(
    "source, bad",
    [("1/sqrt(x)", "1 / sqrt(x)"), ("log(x)", "log(x)"), ("sqrt(x - 1)", "sqrt(x - 1)"), ("x^-1", "x^-1")],
)
def test_domain_errors_name_subexpression(source, bad):
    with pytest.raises(EvaluationDomainError) as info:
        evaluate(parse(source, {"x"}), {"x": 0.0})
    assert info.value.subexpression == bad


def test_domain_error_on_any_array_entry():
    with pytest.raises(EvaluationDomainError):
        evaluate(parse("1/x", {"x"}), {"x": np.array([1.0, 0.5, 0.0])})


def test_integer_powers_use_repeated_multiplication():
    x = 1.1
    assert evaluate(parse("x^3", {"x"}), {"x": x}) == x * x * x
    assert evaluate(parse("(-2)^3"), {}) == -8.0
    assert evaluate(parse("2^0.5"), {}) == pytest.approx(np.sqrt(2.0))


# ----------------------------
# Generated expressions
# ----------------------------

VARIABLES = ("x", "y")
SAFE_FUNCTIONS = ("sin", "cos", "exp", "sqrt", "abs", "log")


def random_tree(rng, depth):
    if depth == 0 or rng.random() < 0.2:
        kind = rng.integers(3)
        if kind == 0:
            return Number(float(rng.choice([0.5, 1.0, 2.0, 3.0, 0.25, 10.0, 1.5e-3])))
        if kind == 1:
            return Variable(str(rng.choice(VARIABLES)))
        return Constant(str(rng.choice(sorted(CONSTANTS))))
    kind = rng.integers(4)
    if kind == 0:
        return Negate(random_tree(rng, depth - 1))
    if kind == 1:
        return Call(str(rng.choice(SAFE_FUNCTIONS)), random_tree(rng, depth - 1))
    if kind == 2:
        return BinaryOp("^", random_tree(rng, depth - 1), Number(float(rng.integers(0, 4))))
    op = str(rng.choice(["+", "-", "*", "/"]))
    return BinaryOp(op, random_tree(rng, depth - 1), random_tree(rng, depth - 1))


class NonFinite(Exception):
    pass


def reference_eval(node, env):
    """Direct tree walk, independent of the parser."""
    if isinstance(node, Number):
        return np.float64(node.value)
    if isinstance(node, Constant):
        return np.float64(CONSTANTS[node.name])
    if isinstance(node, Variable):
        return np.float64(env[node.name])
    if isinstance(node, Negate):
        return -reference_eval(node.operand, env)
    if isinstance(node, Call):
        value = FUNCTIONS[node.func](reference_eval(node.arg, env))
    else:
        a = reference_eval(node.left, env)
        b = reference_eval(node.right, env)
        if node.op == "+":
            value = a + b
        elif node.op == "-":
            value = a - b
        elif node.op == "*":
            value = a * b
        elif node.op == "/":
            value = a / b
        elif float(b).is_integer() and abs(b) <= 64:
            value = np.float64(1.0)
            for _ in range(int(abs(b))):
                value = value * a
            if b < 0:
                value = 1.0 / value
        else:
            value = np.power(a, b)
    if not np.isfinite(value):
        raise NonFinite()
    return value


def test_pretty_print_round_trip():
    rng = np.random.default_rng(1234)
    for _ in range(100):
        tree = random_tree(rng, 4)
        printed = str(tree)
        reparsed = parse(printed, VARIABLES)
        assert reparsed.root == tree, printed
        assert str(reparsed) == printed
        assert str(parse(str(reparsed), VARIABLES)) == printed


def test_evaluator_matches_reference():
    rng = np.random.default_rng(4321)
    checked = 0
    for _ in range(1000):
        tree = random_tree(rng, 4)
        env = {"x": float(rng.uniform(-2, 2)), "y": float(rng.uniform(-2, 2))}
        expr = parse(str(tree), VARIABLES)
        with np.errstate(all="ignore"):
            try:
                expected = reference_eval(tree, env)
            except NonFinite:
                with pytest.raises(EvaluationDomainError):
                    evaluate(expr, env)
                continue
        assert np.isclose(evaluate(expr, env), expected, rtol=1e-12, atol=1e-300)
        checked += 1
    assert checked > 500
