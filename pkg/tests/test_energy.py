import itertools
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

import naive
from lagskel.energy import (ConstraintSpec, Edge, LagrangianProblem, PairwiseEnergy,
                            assemble_lagrangian, evaluate_constraints, evaluate_energy,
                            is_submodular, rational, submodularity_lambda_bound)
from lagskel.errors import DimensionError, DomainError, UnsupportedDirectionError
from lagskel.verify import random_problem, random_submodular_energy


def toy(box=((-2, 2), (-2, 2)), b=None):
    f = PairwiseEnergy(2, ((0, 1), (0, 1)), ((0, 1, (0, 0, 0, 0)),))
    return LagrangianProblem(f, (ConstraintSpec((1, -1)), ConstraintSpec((0, 0), 2)), box, b)


def test_toy_energy_values():
    p = toy()
    assert evaluate_energy(p.f, (1, 0)) == 1
    assert evaluate_energy(p.f, (0, 0)) == 0


def test_random_energy_matches_hand_evaluation():
    f = PairwiseEnergy(3, ((F(1, 2), -1), (2, F(-3, 4)), (0, 5)), ((0, 2, (1, F(7, 3), -2, 4)),))
    for x in itertools.product((0, 1), repeat=3):
        hand = [F(1, 2), -1][x[0]] + [2, F(-3, 4)][x[1]] + [0, 5][x[2]] + [1, F(7, 3), -2, 4][2 * x[0] + x[2]]
        assert evaluate_energy(f, x) == hand


def test_length_mismatch_is_dimension_error():
    with pytest.raises(DimensionError):
        evaluate_energy(toy().f, (1,))
    with pytest.raises(DimensionError):
        evaluate_constraints(toy(), (1, 0, 1))


@pytest.mark.parametrize("x, h", [((1, 0), (1, 2)), ((0, 0), (0, 0)), ((1, 1), (0, 0))])
def test_toy_constraints(x, h):
    assert evaluate_constraints(toy(), x) == h


def test_assemble_toy_values():
    p = toy()
    assert evaluate_energy(assemble_lagrangian(p, (-2, -2)), (1, 0)) == -5
    at = assemble_lagrangian(p, (2, 2))
    assert evaluate_energy(at, (1, 1)) == 2
    assert evaluate_energy(at, (1, 0)) == 7


def test_assemble_at_zero_is_f():
    p = random_problem(random.Random(3), n=6, m=2).with_box(((-1, 1), (-1, 1)))
    zero = assemble_lagrangian(p, (0, 0))
    for x in naive.labelings(6):
        assert evaluate_energy(zero, x) == evaluate_energy(p.f, x)


def test_assemble_outside_box_is_domain_error():
    with pytest.raises(DomainError):
        assemble_lagrangian(toy(), (3, 0))


@given(st.integers(0, 10 ** 6), st.lists(st.fractions(-5, 5, max_denominator=7), min_size=4, max_size=4))
def test_assembled_energy_equals_lagrangian(seed, raw):
    rng = random.Random(seed)
    p = random_problem(rng, n=rng.randint(1, 6), m=2, box_radius=5)
    lam = tuple(max(lo, min(hi, v)) for (lo, hi), v in zip(p.box, raw))
    target = tuple(raw[2:])
    p = p.with_target(target)
    g = assemble_lagrangian(p, lam)
    for x in naive.labelings(p.n):
        assert evaluate_energy(g, x) == naive.lagrangian(p, x, lam)


@given(st.integers(0, 10 ** 6))
def test_lagrangian_affine_in_lambda(seed):
    rng = random.Random(seed)
    p = random_problem(rng, n=rng.randint(1, 6), m=2)
    pick = lambda: tuple(lo + (hi - lo) * F(rng.randint(0, 9), 9) for lo, hi in p.box)
    a, b = pick(), pick()
    mid = tuple((u + v) / 2 for u, v in zip(a, b))
    x = tuple(rng.randint(0, 1) for _ in range(p.n))
    ea = evaluate_energy(assemble_lagrangian(p, a), x)
    eb = evaluate_energy(assemble_lagrangian(p, b), x)
    assert evaluate_energy(assemble_lagrangian(p, mid), x) == (ea + eb) / 2


def test_constraint_order_permutes_h():
    p = toy()
    swapped = LagrangianProblem(p.f, tuple(reversed(p.constraints)), p.box)
    for x in naive.labelings(2):
        assert evaluate_constraints(swapped, x) == tuple(reversed(evaluate_constraints(p, x)))


def test_is_submodular_cases():
    assert is_submodular(PairwiseEnergy(2, ((0, 0), (0, 0)), ((0, 1, (0, 0, 0, 0)),)))
    assert not is_submodular(PairwiseEnergy(2, ((0, 0), (0, 0)), ((0, 1, (1, 0, 0, 1)),)))


def _single_constraint(f, w=1):
    return LagrangianProblem(f, (ConstraintSpec((0,) * f.n, w),), ((-10, 10),))


def test_bound_negative_for_strict_submodular():
    f = PairwiseEnergy(2, ((0, 0), (0, 0)), ((0, 1, (0, 1, 1, 0)),))
    assert submodularity_lambda_bound(_single_constraint(f))[0] < 0


def test_bound_zero_for_modular_table():
    f = PairwiseEnergy(2, ((0, 1), (0, 1)), ((0, 1, (0, 0, 0, 0)),))
    assert submodularity_lambda_bound(_single_constraint(f))[0] == 0


def test_bound_none_without_edge_coefficient():
    assert submodularity_lambda_bound(toy())[0] is None


def test_negative_edge_coefficient_unsupported():
    f = PairwiseEnergy(2, ((0, 0), (0, 0)), ((0, 1, (0, 1, 1, 0)),))
    with pytest.raises(UnsupportedDirectionError):
        submodularity_lambda_bound(_single_constraint(f, -1))


@pytest.mark.parametrize("seed", range(20))
def test_bound_is_tight(seed):
    rng = random.Random(seed)
    f = random_submodular_energy(rng, 9, edge_prob=0.5)
    if not f.edges:
        return
    w = F(rng.choice((1, 2, 3)))
    p = LagrangianProblem(f, (ConstraintSpec((0,) * 9, w),), ((-100, 100),))
    k = submodularity_lambda_bound(p)[0]
    assert is_submodular(assemble_lagrangian(p, (k,)))
    assert not is_submodular(assemble_lagrangian(p, (k - F(1, 1000),)))
    assert not is_submodular(assemble_lagrangian(p, (k - 1,)))


def test_rational_parsing_is_exact():
    assert rational("0.3") == F(3, 10)
    assert rational("-7/2") == F(-7, 2)
    with pytest.raises(TypeError):
        rational(0.3)


def test_invalid_energies_rejected():
    with pytest.raises(ValueError):
        PairwiseEnergy(2, ((0, 0), (0, 0)), ((0, 0, (0, 0, 0, 0)),))
    with pytest.raises(ValueError):
        PairwiseEnergy(2, ((0, 0), (0, 0)), ((0, 1, (0, 0, 0, 0)), (1, 0, (0, 0, 0, 0))))
    with pytest.raises(ValueError):
        ConstraintSpec((0, 0), 0)
    with pytest.raises(ValueError):
        LagrangianProblem(toy().f, (), ())
    with pytest.raises(ValueError):
        LagrangianProblem(toy().f, (ConstraintSpec((1, 0)),), ((1, 1),))
