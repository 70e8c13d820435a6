import numpy as np
import pytest
import sympy
from sympy import I

from siegeltheta.foundation import DomainError
from siegeltheta.harmonic import (
    Polynomial, corollary_residual, decompose, derivative_identity_residual, dimension_bookkeeping,
    differential_operator, freitag_modularity_ratio, freitag_theta, gl_o_action, is_pluriharmonic,
    is_pluriharmonic_form, pairing, theta_harmonic, theta_transform_residual, zmatrix,
)
from siegeltheta.symplectic import inversion, translation
from siegeltheta.theta import ThetaSpec, e8_gram, theta_char, theta_S

I2 = np.eye(2, dtype=int)


def poly(expr, m, n):
    return Polynomial(expr, m, n)


def test_pairing_examples():
    Z = zmatrix(1, 2)
    assert pairing(poly(Z[0, 0] ** 2, 1, 2), poly(Z[0, 0] ** 2, 1, 2)) == 2
    assert pairing(poly(Z[0, 0], 1, 2), poly(Z[0, 1], 1, 2)) == 0


def test_pairing_adjointness(rng):
    Z = list(zmatrix(2, 1))

    def rand(d):
        return poly(sum(int(rng.integers(-3, 4)) * sympy.prod([Z[int(rng.integers(2))] for _ in range(d)])
                        + I * int(rng.integers(-2, 3)) * Z[0] ** d for _ in range(3)), 2, 1)

    for _ in range(5):
        P, Q, R = rand(3), rand(1), rand(2)
        assert pairing(P, Q * R) == pairing(differential_operator(Q, P), R)


def test_pluriharmonic_examples():
    Z = zmatrix(2, 2)
    assert is_pluriharmonic(poly(3 * Z[0, 0] - Z[1, 1] + 2, 2, 2), I2)
    z = zmatrix(1, 1)[0, 0]
    assert not is_pluriharmonic(poly(z ** 2, 1, 1), [[1]])
    assert is_pluriharmonic(poly(Z[0, 0] * Z[1, 1] - Z[0, 1] * Z[1, 0], 2, 2), I2)


def test_dimension_bookkeeping():
    for (m, n) in [(2, 1), (2, 2), (3, 2)]:
        S = np.eye(m, dtype=int)
        for d in range(7):
            total, h, ideal = dimension_bookkeeping(S, m, n, d)
            assert total == h + ideal
    assert dimension_bookkeeping(np.eye(3, dtype=int), 3, 2, 6) == (462, 146, 316)
    S = np.array([[2, 1], [1, 2]])
    for d in range(5):
        total, h, ideal = dimension_bookkeeping(S, 2, 2, d)
        assert total == h + ideal


def test_decomposition_examples():
    z = zmatrix(1, 1)[0, 0]
    D = decompose(poly(z ** 2, 1, 1), [[1]])
    assert D.h.is_zero() and D.ideal_part == poly(z ** 2, 1, 1)
    Z = zmatrix(2, 1)
    lin = poly(3 * Z[0] - I * Z[1], 2, 1)
    D = decompose(lin, I2)
    assert D.h == lin and D.ideal_part.is_zero()
    D = decompose(poly(Z[0] ** 2 + Z[1] ** 2, 2, 1), I2)
    assert D.h.is_zero()
    D = decompose(poly(Z[0] ** 2 - Z[1] ** 2, 2, 1), I2)
    assert D.ideal_part.is_zero()


def test_decomposition_is_orthogonal_and_exact():
    Z = list(zmatrix(3, 2))
    rng = np.random.default_rng(1)
    e = sum(int(rng.integers(-3, 4)) * sympy.prod([Z[int(i)] for i in rng.integers(0, 6, 3)]) for _ in range(8))
    e += I * Z[0] ** 2 * Z[3] + 5
    S = np.array([[2, 1, 0], [1, 2, 0], [0, 0, 1]])
    P = poly(e, 3, 2)
    D = decompose(P, S)
    assert D.h + D.ideal_part == P
    assert is_pluriharmonic(D.h, S)
    assert pairing(D.h, D.ideal_part) == 0


def test_harmonic_theta_constant_and_odd():
    Om = [[0.2 + 1.1j]]
    S = np.array([[2, 1], [1, 2]])
    zero = np.zeros((2, 1))
    r = theta_harmonic(S, poly(1, 2, 1), zero, zero, Om)
    assert abs(r.value - theta_char(ThetaSpec(S, zero, zero), Om, zero).value) < 1e-13
    Z = zmatrix(2, 1)
    odd = theta_harmonic(S, poly(Z[0] ** 3 - 2 * Z[1], 2, 1), zero, zero, Om)
    assert abs(odd.value) <= odd.tail_bound + 1e-13


def test_transform_law_documented_cases():
    Z = zmatrix(2, 1)
    zero = [[0], [0]]
    assert theta_transform_residual(2 * I2, poly(Z[0] - I * Z[1], 2, 1), zero, zero, np.eye(2), [[1j]]) < 1e-12
    assert theta_transform_residual(2 * I2, poly(Z[0] - I * Z[1], 2, 1), zero, zero, inversion(1), [[1j]]) < 1e-8
    assert theta_transform_residual(2 * I2, poly(Z[0] ** 2 - Z[1] ** 2, 2, 1), zero, zero, translation([[3]]),
                                    [[0.2 + 1.1j]]) < 1e-8
    assert theta_transform_residual(e8_gram(), poly(1, 8, 1), np.zeros((8, 1)), np.zeros((8, 1)), inversion(1),
                                    [[0.2 + 1.1j]]) < 1e-8


def test_derivative_identity():
    Z = zmatrix(2, 1)
    P = poly((Z[0] + I * Z[1]) ** 3, 2, 1)
    assert derivative_identity_residual(2 * I2, P, [[0.1], [0.3]], [[0.2], [-0.1]], [[0.3 + 1.2j]]) < 1e-9
    P = poly(Z[0] * Z[1], 2, 1)
    assert derivative_identity_residual([[2, 1], [1, 3]], P, [[0.0], [0.5]], [[0.0], [0.0]], [[0.1 + 1.0j]]) < 1e-9


def test_derivative_identity_needs_homogeneous():
    Z = zmatrix(2, 1)
    with pytest.raises(DomainError):
        derivative_identity_residual(2 * I2, poly(Z[0] + 1, 2, 1), [[0], [0]], [[0], [0]], [[1j]])


def test_gl_o_action_preserves_harmonicity():
    Z = zmatrix(2, 2)
    P = poly(Z[0, 0] * Z[1, 1] - Z[0, 1] * Z[1, 0] + Z[0, 0] ** 2 - Z[1, 0] ** 2, 2, 2)
    assert is_pluriharmonic(P, I2)
    A = np.array([[1, 2], [0, 1]])
    B = np.array([[0, 1], [-1, 0]])  # orthogonal for S = I
    assert is_pluriharmonic(gl_o_action(P, A, B), I2)


def test_corollary_identity():
    Z = zmatrix(2, 1)
    P = poly((Z[0] + I * Z[1]) ** 2, 2, 1)
    assert corollary_residual(P, I2, [[1]], degree=4).is_zero()


def test_freitag_constant_matches_theta():
    E = e8_gram()
    Om = [[0.1 + 1.05j]]
    r = freitag_theta(E, poly(1, 8, 1), Om, 0)
    assert abs(r.value - theta_S(E, Om).value) < 1e-12
    ratio, expected = freitag_modularity_ratio(E, poly(1, 8, 1), Om, 0)
    assert abs(ratio - expected) < 1e-7 * abs(expected)


def test_freitag_odd_form_vanishes():
    z = zmatrix(8, 1)
    P = poly(z[0] + I * z[1], 8, 1)
    assert is_pluriharmonic_form(P, 1)
    r = freitag_theta(e8_gram(), P, [[0.1 + 1.05j]], 1)
    assert abs(r.value) <= r.tail_bound + 1e-12


def test_freitag_rejects_wrong_type():
    z = zmatrix(8, 1)
    with pytest.raises(DomainError):
        freitag_theta(e8_gram(), poly(z[0] ** 2, 8, 1), [[1j]], 2)
    with pytest.raises(DomainError):
        freitag_theta(2 * I2, poly(1, 2, 1), [[1j]], 0)


def test_polynomial_json_roundtrip():
    Z = zmatrix(2, 2)
    P = poly(sympy.Rational(3, 4) * Z[0, 1] ** 2 * Z[1, 0] - I / 5 * Z[1, 1] + 2, 2, 2)
    assert Polynomial.from_json(P.to_json(), 2, 2) == P


def _e8_isotropic_power(k):
    """(ᵗw S N)^k with w = r1 + i r2 for orthogonal E8 roots, so ᵗw S w = 0 and P is pluriharmonic."""
    E = np.asarray(e8_gram(), dtype=int)
    r1 = np.eye(8, dtype=int)[0]
    r2 = next(v for v in np.eye(8, dtype=int)[1:] if v @ E @ r1 == 0)
    w = sympy.Matrix([int(a) + I * int(b) for a, b in zip(r1, r2)])
    Sw = sympy.Matrix(E.tolist()) * w
    Z = zmatrix(8, 1)
    return poly(sum(Sw[i] * Z[i] for i in range(8)) ** k, 8, 1)


@pytest.mark.slow
def test_e8_degree8_transform_law():
    # degree 8 gives a weight-12 cusp form, the first case where the polynomial substitution matters
    P = _e8_isotropic_power(8)
    assert is_pluriharmonic(P, e8_gram())
    zero = np.zeros((8, 1))
    corrected = theta_transform_residual(e8_gram(), P, zero, zero, inversion(1), [[0.1 + 1.05j]], corrected=True)
    literal = theta_transform_residual(e8_gram(), P, zero, zero, inversion(1), [[0.1 + 1.05j]])
    assert corrected < 1e-8
    assert literal > 0.1


@pytest.mark.slow
def test_freitag_weight_twelve():
    z = zmatrix(8, 1)
    Q = poly((z[0] + I * z[1]) ** 8, 8, 1)
    ratio, expected = freitag_modularity_ratio(e8_gram(), Q, [[0.1 + 1.05j]], 8)
    assert abs(ratio - expected) < 1e-7 * abs(expected)
