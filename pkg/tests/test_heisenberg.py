from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from conftest import random_siegel_point
from siegeltheta.foundation import StructuralError
from siegeltheta.heisenberg import (
    CIRCLE, DIAMOND, CoadjointFunctional, HeisenbergAlgebraElement, HeisenbergElement, algebra_basis, bracket,
    coadjoint, embed_sp, identity, inverse, jacobi_act, jacobi_mul, mul, schrodinger_act,
)
from siegeltheta.states import GaussianPolynomialState, xvars
from siegeltheta.symplectic import J_matrix, dilation, inversion, translation

ints = st.integers(-5, 5)


def frac_matrix(draw, m, n):
    return np.array([[Fraction(draw(ints), draw(st.integers(1, 4))) for _ in range(n)] for _ in range(m)],
                    dtype=object)


@st.composite
def elements(draw, m=2, n=2):
    lam, mu = frac_matrix(draw, m, n), frac_matrix(draw, m, n)
    s = frac_matrix(draw, m, m)
    kappa = (s + s.T) - mu @ lam.T  # kappa + mu ᵗlambda symmetric
    return HeisenbergElement(lam, mu, kappa, CIRCLE)


def test_identity_and_inverse():
    g = HeisenbergElement([[1, 2]], [[3, -1]], [[-1]])
    e = identity(1, 2)
    assert mul(g, e).equals(g) and mul(e, g).equals(g)
    assert mul(g, inverse(g)).equals(e)
    d = g.to_diamond()
    assert mul(d, inverse(d)).equals(identity(1, 2, DIAMOND))


def test_symmetry_constraint():
    with pytest.raises(StructuralError):
        HeisenbergElement(np.array([[1, 0], [0, 0]]), np.array([[0, 0], [1, 0]]), np.zeros((2, 2), dtype=int))
    with pytest.raises(StructuralError):
        mul(HeisenbergElement([[1]], [[0]], [[0]]), HeisenbergElement([[1]], [[0]], [[0]], DIAMOND))


@settings(max_examples=40, deadline=None)
@given(elements(), elements(), elements())
def test_associativity_exact(g1, g2, g3):
    assert mul(mul(g1, g2), g3).equals(mul(g1, mul(g2, g3)))
    d1, d2, d3 = (g.to_diamond() for g in (g1, g2, g3))
    assert mul(mul(d1, d2), d3).equals(mul(d1, mul(d2, d3)))
    assert mul(d1, d2).to_circle().equals(mul(g1, g2))


@settings(max_examples=40, deadline=None)
@given(elements(), elements())
def test_embedding_homomorphism_exact(g1, g2):
    E1, E2 = embed_sp(g1), embed_sp(g2)
    assert (embed_sp(mul(g1, g2)) - E1 @ E2 == 0).all()
    J = J_matrix(4).astype(object)
    assert (E1.T @ J @ E1 - J == 0).all()


def test_embedding_of_identity():
    assert (embed_sp(identity(2, 3)) == np.eye(10, dtype=int)).all()


@st.composite
def algebra_elements(draw, m=2, n=2):
    a, b = frac_matrix(draw, m, n), frac_matrix(draw, m, n)
    s = frac_matrix(draw, m, m)
    return HeisenbergAlgebraElement(a, b, s + s.T)


@settings(max_examples=40, deadline=None)
@given(algebra_elements(), algebra_elements(), algebra_elements())
def test_bracket_closed_form_and_nilpotency(X, Y, Z):
    A, B = X.matrix(), Y.matrix()
    assert bracket(X, Y).equals(HeisenbergAlgebraElement(*_from_matrix(A @ B - B @ A, 2, 2)))
    assert (bracket(X, X).matrix() == 0).all()
    # 2-step nilpotent: brackets are central
    assert (bracket(bracket(X, Y), Z).matrix() == 0).all()


def _from_matrix(M, m, n):
    return M[n:n + m, :n], M[n:n + m, n + m:2 * n + m], M[n:n + m, 2 * n + m:]


def test_basis_brackets():
    m, n = 2, 2
    B = algebra_basis(m, n)
    for k in range(m):
        for a in range(n):
            for l in range(m):
                for b in range(n):
                    Z = bracket(B[("X", k, a)], B[("Xhat", l, b)])
                    expected = np.zeros((m, m), dtype=int)
                    if a == b:
                        expected[k, l] += 1
                        expected[l, k] += 1
                    assert (Z.gamma == expected).all()
                    assert not bracket(B[("X", k, a)], B[("X", l, b)]).gamma.any()
                    assert not bracket(B[("Xhat", k, a)], B[("Xhat", l, b)]).gamma.any()


@st.composite
def functionals(draw, m=2, n=2):
    s = frac_matrix(draw, m, m)
    return CoadjointFunctional(frac_matrix(draw, m, n), frac_matrix(draw, m, n), s + s.T)


@settings(max_examples=40, deadline=None)
@given(elements(), elements(), functionals())
def test_coadjoint_action_property(g1, g2, F):
    lhs = coadjoint(mul(g1, g2), F)
    rhs = coadjoint(g1, coadjoint(g2, F))
    assert lhs.equals(rhs)


def test_coadjoint_examples():
    F = CoadjointFunctional([[1, 2]], [[0, 3]], [[0]])
    g = HeisenbergElement([[5, 7]], [[1, 1]], [[-12]])
    assert coadjoint(g, F).equals(F)
    g2 = HeisenbergElement([[5, 7]], [[1, 1]], [[30]])
    G = CoadjointFunctional([[1, 2]], [[0, 3]], [[2]])
    assert coadjoint(g, G).equals(coadjoint(g2, G))


def _state():
    x = xvars(1, 2)
    c = sympy.Matrix([[1]])
    Om = sympy.Matrix([[sympy.I, sympy.Rational(1, 3)], [sympy.Rational(1, 3), 2 * sympy.I]])
    return GaussianPolynomialState(x[0, 0] ** 2 - 3 * x[0, 1] + 1, c, Om)


def test_schrodinger_identity_and_center():
    f = _state()
    assert schrodinger_act([[1]], identity(1, 2), f).equals(f)
    g = HeisenbergElement([[0, 0]], [[0, 0]], [[Fraction(1, 8)]])
    out = schrodinger_act([[1]], g, f)
    assert out.equals(f.scale(sympy.exp(2 * sympy.pi * sympy.I / 8)))


@settings(max_examples=15, deadline=None)
@given(elements(1, 2), elements(1, 2))
def test_schrodinger_composition_exact(g1, g2):
    f = _state()
    lhs = schrodinger_act([[1]], g1, schrodinger_act([[1]], g2, f))
    rhs = schrodinger_act([[1]], mul(g1, g2), f)
    assert lhs.equals(rhs)


def test_jacobi_action(rng):
    W = random_siegel_point(rng, 2)
    Z = rng.normal(size=(1, 2)) + 1j * rng.normal(size=(1, 2))
    e = identity(1, 2)
    Om, Z2 = jacobi_act(np.eye(4), e, W, Z)
    assert np.allclose(Om, W) and np.allclose(Z2, Z)
    g = HeisenbergElement([[1.0, -2.0]], [[0.5, 3.0]], [[1.0]])
    _, Z3 = jacobi_act(np.eye(4), g, W, Z)
    assert np.allclose(Z3, Z + g.lam @ W + g.mu)
    M1 = translation(np.array([[1.0, 0.5], [0.5, 0.0]])) @ inversion(2)
    M2 = dilation(np.array([[1.0, 1.0], [0.0, 2.0]])) @ inversion(2)
    g1 = HeisenbergElement([[0.3, -1.0]], [[0.2, 0.7]], [[0.0]])
    g2 = HeisenbergElement([[-0.5, 0.4]], [[1.1, 0.1]], [[0.0]])
    M, g12 = jacobi_mul(M1, g1, M2, g2)
    a = jacobi_act(M, g12, W, Z)
    b = jacobi_act(M1, g1, *jacobi_act(M2, g2, W, Z))
    assert np.max(np.abs(a[0] - b[0])) < 1e-10 and np.max(np.abs(a[1] - b[1])) < 1e-10
