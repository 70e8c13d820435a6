import cmath
import math
from fractions import Fraction

import numpy as np
import pytest

from siegeltheta.foundation import (
    DomainError, StructuralError, Tolerance, check_siegel_point, decode_matrix, encode_matrix,
    halfplane_det_power, is_positive_definite, multiindex_abs, multiindex_count, multiindex_factorial,
    multiindex_iter, principal_halfplane_sqrt_det,
)


def test_positive_definite_examples():
    assert is_positive_definite(np.eye(2, dtype=int))
    assert not is_positive_definite([[1, 0], [0, -1]])
    assert is_positive_definite([[2, 1], [1, 2]])
    assert is_positive_definite([[2.0, 1.0], [1.0, 2.0]])


def test_positive_definite_exact_boundary():
    # det = 0 exactly: semidefinite, not definite
    assert not is_positive_definite([[Fraction(1), Fraction(1)], [Fraction(1), Fraction(1)]])


def test_positive_definite_rejects_bad_shapes():
    with pytest.raises(StructuralError):
        is_positive_definite([[1, 2], [0, 1]])
    with pytest.raises(StructuralError):
        is_positive_definite([[1, 2, 3]])


def test_sqrt_det_branch():
    assert abs(principal_halfplane_sqrt_det(1j * np.eye(2)) - 1) < 1e-15
    assert abs(principal_halfplane_sqrt_det([[2j]]) - math.sqrt(2)) < 1e-15
    expected = 2 ** 0.25 * cmath.exp(-1j * math.pi / 8)
    assert abs(principal_halfplane_sqrt_det([[1 + 1j]]) - expected) < 1e-15


def test_sqrt_det_squares_to_det(rng):
    from conftest import random_siegel_point
    for n in (1, 2, 3):
        W = random_siegel_point(rng, n)
        s = principal_halfplane_sqrt_det(W)
        assert abs(s * s - np.linalg.det(W / 1j)) < 1e-12
        assert s.real > 0 or n > 1


def test_det_power_domain_error():
    with pytest.raises(DomainError):
        halfplane_det_power([[-1j]], Fraction(1, 2))


def test_siegel_point_validation():
    with pytest.raises(StructuralError):
        check_siegel_point([[1j, 0.1], [0.2, 1j]])
    with pytest.raises(DomainError):
        check_siegel_point([[1j, 0], [0, -1j]])


def test_multiindex_iter_examples():
    assert list(multiindex_iter((1, 1), 2)) == [((0,),), ((1,),), ((2,),)]
    assert list(multiindex_iter((1, 2), 1)) == [((0, 0),), ((1, 0),), ((0, 1),)]
    assert multiindex_count((2, 2), 2) == 15
    assert len(list(multiindex_iter((2, 2), 2))) == 15


def test_multiindex_factorial_is_exact():
    J = ((30, 25), (0, 1))
    assert multiindex_abs(J) == 56
    assert multiindex_factorial(J) == math.factorial(30) * math.factorial(25)


def test_tolerance_positive():
    Tolerance()
    with pytest.raises(DomainError):
        Tolerance(abs_tol=0.0)


def test_matrix_json_roundtrip():
    M = np.array([[1 + 2j, 0.5], [0.5, -1j]])
    assert np.array_equal(decode_matrix(encode_matrix(M)), M)
    Q = np.array([[Fraction(1, 3), Fraction(2)]], dtype=object)
    assert (decode_matrix(encode_matrix(Q)) == Q).all()
    assert decode_matrix([[1, 2]]).dtype.kind == "i"
    with pytest.raises(StructuralError):
        decode_matrix([[1, 2], [3]])
