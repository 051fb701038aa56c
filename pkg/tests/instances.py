"""Small hand-built problems shared by several test modules."""
from lagskel.energy import ConstraintSpec, LagrangianProblem, PairwiseEnergy


def toy(b=None, box=((-2, 2), (-2, 2))):
    """f = x1 + x2 with h1 = x1 - x2 and h2 = 2|x1 - x2|."""
    f = PairwiseEnergy(2, ((0, 1), (0, 1)), ((0, 1, (0, 0, 0, 0)),))
    specs = (ConstraintSpec((1, -1), name="difference"), ConstraintSpec((0, 0), 2, name="boundary"))
    return LagrangianProblem(f, specs, box, b)


def chain(n, unary, beta, coeffs=None, box=((-10, 10),)):
    f = PairwiseEnergy(n, tuple(unary), tuple((i, i + 1, (0, beta, beta, 0)) for i in range(n - 1)))
    spec = ConstraintSpec(tuple(coeffs or (1,) * n), name="size")
    return LagrangianProblem(f, (spec,), box)
