from fractions import Fraction

import pytest
from sympy import Matrix
from sympy.matrices.normalforms import smith_normal_form as sympy_smith_normal_form
from sympy.polys.domains import ZZ

from src.noriq.exactlin import (
    BlockConstraint,
    IntMatrix,
    RatMatrix,
    ShapeError,
    Subspace,
    as_rational,
    coordinates,
    format_rational,
    image_basis,
    integer_inverse,
    intersect,
    kernel_basis,
    kron,
    smith_normal_form,
    solve_linear_system,
    solve_right,
)


def test_as_rational_accepts_strings_and_ints():
    assert as_rational("3/6") == Fraction(1, 2)
    assert as_rational(-4) == Fraction(-4)
    assert format_rational(Fraction(6, -4)) == "-3/2"
    assert format_rational(Fraction(5)) == "5"


@pytest.mark.parametrize("value", [True, 1.5, "1/0", "x"])
def test_as_rational_rejects_inexact_values(value):
    with pytest.raises(ShapeError):
        as_rational(value)


def test_matrix_product_and_inverse():
    m = RatMatrix.from_rows([[2, 1], [1, 1]])
    inverse = m.inverse()
    assert inverse == RatMatrix.from_rows([[1, -1], [-1, 2]])
    assert m @ inverse == RatMatrix.identity(2)
    assert m.format() == "[[2, 1], [1, 1]]"


def test_singular_and_ragged_matrices_raise():
    with pytest.raises(ShapeError):
        RatMatrix.from_rows([[1, 2], [2, 4]]).inverse()
    with pytest.raises(ShapeError):
        RatMatrix.from_rows([[1, 2], [3]])
    with pytest.raises(ShapeError):
        RatMatrix.identity(2) @ RatMatrix.identity(3)


def test_kernel_and_image_are_canonical():
    m = RatMatrix.from_rows([[1, 2, 3], [2, 4, 6]])
    kernel = kernel_basis(m)
    assert kernel.ambient_dim == 3
    assert kernel.dim == 2
    assert (m @ kernel.basis).is_zero()
    # reduced column echelon form does not depend on the spanning set
    doubled = image_basis(kernel.basis.scale(2))
    assert doubled.basis == kernel.basis
    assert image_basis(m).dim == 1


def test_kernel_of_empty_system_is_everything():
    kernel = kernel_basis(RatMatrix.zeros(0, 3))
    assert kernel.basis == RatMatrix.identity(3)


def test_intersect_subspaces():
    plane_xy = Subspace(3, RatMatrix.from_columns([[1, 0, 0], [0, 1, 0]], rows=3))
    plane_yz = Subspace(3, RatMatrix.from_columns([[0, 1, 0], [0, 0, 1]], rows=3))
    line = intersect([plane_xy, plane_yz])
    assert line.basis == RatMatrix.from_columns([[0, 1, 0]], rows=3)
    assert intersect([], ambient_dim=2).dim == 2
    with pytest.raises(ShapeError):
        intersect([])
    with pytest.raises(ShapeError):
        intersect([plane_xy, Subspace.full(2)])


def test_solve_right_and_coordinates():
    a = RatMatrix.from_rows([[1, 0], [0, 2], [1, 1]])
    x = RatMatrix.from_rows([[3], ["1/2"]])
    assert solve_right(a, a @ x) == x
    assert coordinates(a, a @ x) == x
    with pytest.raises(ShapeError):
        solve_right(a, RatMatrix.from_rows([[1], [0], [0]]))


def test_kron_layout():
    a = RatMatrix.from_rows([[1, 2]])
    b = RatMatrix.from_rows([[0], [1]])
    assert kron(a, b) == RatMatrix.from_rows([[0, 0], [1, 2]])


def test_smith_normal_form_divisibility():
    m = IntMatrix.from_rows([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])
    u, d, v = smith_normal_form(m)
    assert u @ m @ v == d
    diagonal = [d[i, i] for i in range(3)]
    assert diagonal == [2, 6, 12]
    assert abs(u.determinant()) == 1
    assert abs(v.determinant()) == 1


@pytest.mark.parametrize(
    "rows",
    [
        [[2, 4, 4], [-6, 6, 12], [10, -4, -16]],
        [[1, 2], [3, 4]],
        [[0, 3], [4, 0]],
        [[12, 18], [8, 6]],
    ],
)
def test_smith_normal_form_matches_sympy(rows):
    _, d, _ = smith_normal_form(IntMatrix.from_rows(rows))
    expected = sympy_smith_normal_form(Matrix(rows), domain=ZZ)
    size = min(d.rows, d.cols)
    assert [d[i, i] for i in range(size)] == [abs(int(expected[i, i])) for i in range(size)]


def test_integer_products_and_determinants():
    a = IntMatrix.from_rows([[1, 2], [3, 4]])
    b = IntMatrix.from_rows([[0, 1], [1, 0]])
    assert a @ b == IntMatrix.from_rows([[2, 1], [4, 3]])
    assert a.determinant() == -2
    assert IntMatrix(0, 0, ()).determinant() == 1
    assert (IntMatrix(2, 0, ()) @ IntMatrix(0, 3, ())) == IntMatrix(2, 3, (0,) * 6)


def test_kron_with_fractions_and_empty_factors():
    a = RatMatrix.from_rows([["1/2", 0], [0, 2]])
    b = RatMatrix.from_rows([[1, -1]])
    assert kron(a, b) == RatMatrix.from_rows([["1/2", "-1/2", 0, 0], [0, 0, 2, -2]])
    assert kron(RatMatrix.zeros(0, 2), b).shape == (0, 4)


def test_integer_inverse_requires_unimodular():
    m = IntMatrix.from_rows([[2, 1], [1, 1]])
    assert integer_inverse(m) @ m == IntMatrix.identity(2)
    with pytest.raises(ShapeError):
        integer_inverse(IntMatrix.from_rows([[2, 0], [0, 1]]))


def test_commutation_system_on_single_block():
    a = RatMatrix.from_rows([[0, 1], [0, 0]])
    solutions = solve_linear_system([2], [(a, a)])
    assert len(solutions) == 2
    for (x,) in solutions:
        assert a @ x == x @ a


def test_commutation_system_across_blocks():
    # x0 · m = m · x1 forces both scalars to agree
    m = RatMatrix.identity(1)
    solutions = solve_linear_system([1, 1], [BlockConstraint(0, 1, m)])
    assert len(solutions) == 1
    x0, x1 = solutions[0]
    assert x0 == x1
    with pytest.raises(ShapeError):
        solve_linear_system([1, 1], [BlockConstraint(0, 2, m)])
