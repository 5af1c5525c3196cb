"""Reference values and problem helpers shared by the test modules."""

from fide_solver.problem import ProblemConfig, from_config

STUDY_SIZES = (50, 100, 150, 200, 300, 400, 500, 800, 1000)

# (N, m, error)
EXAMPLE1_EXACT_H2 = [
    (50, 2, 1.1564e-04),
    (100, 3, 2.2752e-06),
    (150, 3, 1.9519e-06),
    (200, 3, 1.8386e-06),
    (300, 3, 1.7575e-06),
    (400, 3, 1.7292e-06),
    (500, 3, 1.7160e-06),
    (800, 4, 3.4384e-08),
    (1000, 4, 3.1098e-08),
]

EXAMPLE1_SUCCESSIVE = [
    (50, 6, 2.3139e-06),
    (100, 6, 5.8292e-07),
    (150, 6, 2.5941e-07),
    (200, 6, 1.4600e-07),
    (300, 6, 6.4911e-08),
    (400, 6, 3.6519e-08),
    (500, 6, 2.3376e-08),
    (800, 6, 9.1351e-09),
    (1000, 6, 5.8485e-09),
]

EXAMPLE3_SUCCESSIVE = [
    (50, 5, 1.0091e-04),
    # printed as 5.2227e-05; every other row follows 0.2523 * h^2, so the digits are transposed
    (100, 5, 2.5227e-05),
    (150, 5, 1.1212e-05),
    (200, 5, 6.3068e-06),
    (300, 5, 2.8030e-06),
    (400, 5, 1.5767e-06),
    (500, 5, 1.0091e-06),
    (800, 5, 3.9417e-07),
    (1000, 6, 2.5227e-07),
]

EXAMPLE1_LIPSCHITZ = (1.3672, 1.4714, 0.8488, 1.0)
EXAMPLE1_Q = 0.0773


def config_problem(f="1", k0="0", k1="0", phi="t", bc=(0, 0, 0, 0), exact=None, name="test"):
    return from_config(ProblemConfig(f=f, k0=k0, k1=k1, phi=phi, bc=bc, exact=exact, name=name))


def uniform_load_solution(x):
    """u'''' = 1 with zero Navier data."""
    return (x ** 4 - 2 * x ** 3 + x) / 24
