"""Hermite functions, ladder operators, Fourier eigenvalues and the Fock model.

Everything on the Schrödinger side is exact: states are
``GaussianPolynomialState`` objects and scalars live in Q(i)[pi^{1/2},
pi^{-1/2}] as sympy expressions.  The Fock side and the Bargmann transform
are numerical (Gauss-Hermite quadrature), with an exact Gaussian-integral
route kept alongside as an independent check.

Conventions: A^+_{ka} = (d_{ka} - 4 pi xi_{ka}) / 2, A^-_{ka} = (d_{ka} + 4 pi xi_{ka}) / 2,
f_0 = 2^{mn/2} exp(-2 pi |xi|^2), h_J = (2 pi)^{-|J|/2} (J!)^{-1/2} (A^+)^J f_0.
"""

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
import sympy
from sympy import I, pi

from .foundation import DomainError, NumericError, ResourceError, StructuralError, multiindex_abs, multiindex_factorial
from .states import GaussianPolynomialState, fourier, inner, xvars

CREATE = "create"
ANNIHILATE = "annihilate"
DEGREE_CAP = 12


def canonical(x):
    """Canonical form of a scalar in Q(i)[pi^{1/2}, pi^{-1/2}]."""
    return sympy.nsimplify(sympy.expand(sympy.powsimp(sympy.simplify(x))), [pi])


def _as_J(J):
    J = tuple(tuple(int(j) for j in row) for row in J)
    if any(j < 0 for row in J for j in row):
        raise DomainError("multi-index entries must be nonnegative")
    return J


# ladder calculus ---------------------------------------------------------------------

def raise_op(f, k, a):
    """A^+_{ka} f = (d_{ka} f - 4 pi xi_{ka} f) / 2."""
    d = f.derivative(k, a).P
    return f.with_poly(sympy.expand((d - 4 * pi * f.x[k, a] * f.P) / 2))


def lower_op(f, k, a):
    """A^-_{ka} f = (d_{ka} f + 4 pi xi_{ka} f) / 2."""
    d = f.derivative(k, a).P
    return f.with_poly(sympy.expand((d + 4 * pi * f.x[k, a] * f.P) / 2))


@dataclass(frozen=True)
class LadderWord:
    """Operator product; ``letters[0]`` is the leftmost factor, so it acts last."""

    letters: tuple

    def __post_init__(self):
        for kind, pos in self.letters:
            if kind not in (CREATE, ANNIHILATE) or len(pos) != 2:
                raise StructuralError(f"bad ladder letter {(kind, pos)}")


def ladder_apply(word, f):
    if isinstance(word, (list, tuple)):
        word = LadderWord(tuple(word))
    for kind, (k, a) in reversed(word.letters):
        if not (0 <= k < f.m and 0 <= a < f.n):
            raise StructuralError("ladder position outside the matrix shape")
        f = raise_op(f, k, a) if kind == CREATE else lower_op(f, k, a)
    return f


def ground_state(m, n):
    """f_0 = 2^{mn/2} exp(-2 pi |xi|^2)."""
    return GaussianPolynomialState(sympy.sqrt(2) ** (m * n), sympy.eye(m), I * sympy.eye(n))


@lru_cache(maxsize=None)
def _f_state(J):
    m, n = len(J), len(J[0])
    if multiindex_abs(J) == 0:
        return ground_state(m, n)
    for k in range(m):
        for a in range(n):
            if J[k][a]:
                lower = [list(r) for r in J]
                lower[k][a] -= 1
                return raise_op(_f_state(tuple(tuple(r) for r in lower)), k, a)


def f_state(J):
    """f_J = (A^+)^J f_0 (the A^+_{ka} commute)."""
    J = _as_J(J)
    if multiindex_abs(J) > DEGREE_CAP:
        raise ResourceError(f"|J| exceeds the degree cap {DEGREE_CAP}")
    return _f_state(J)


def hermite_h(J):
    """Normalized Hermite function h_J as an exact state."""
    J = _as_J(J)
    f = f_state(J)
    c = (2 * pi) ** sympy.Rational(-multiindex_abs(J), 2) / sympy.sqrt(multiindex_factorial(J))
    return f.scale(c)


def hermite_P(J):
    """Hermite polynomial P_J with h_J = P_J exp(-2 pi |xi|^2) (sympy expression in the x variables)."""
    return hermite_h(J).P


def _shift(J, k, a, step):
    out = [list(r) for r in J]
    out[k][a] += step
    return tuple(tuple(r) for r in out)


def ladder_residuals(J, k, a):
    """Exact residual polynomials of A^+ h_J = (2 pi (J_ka + 1))^{1/2} h_{J+e} and A^- h_J = -(2 pi J_ka)^{1/2} h_{J-e}."""
    J = _as_J(J)
    h = hermite_h(J)
    up = raise_op(h, k, a)
    r_up = up.difference(hermite_h(_shift(J, k, a, 1)).scale(sympy.sqrt(2 * pi * (J[k][a] + 1))))
    down = lower_op(h, k, a)
    if J[k][a] == 0:
        r_down = sympy.expand(down.P)
    else:
        r_down = down.difference(hermite_h(_shift(J, k, a, -1)).scale(-sympy.sqrt(2 * pi * J[k][a])))
    return sympy.simplify(r_up), sympy.simplify(r_down)


def number_operator_residual(J, k, a):
    """A^+ A^- h_J + 2 pi J_ka h_J, as an exact polynomial (zero when the relation holds)."""
    h = hermite_h(J)
    return sympy.simplify(raise_op(lower_op(h, k, a), k, a).P + 2 * pi * J[k][a] * h.P)


def commutator_residual(f, k, a):
    """[A^+, A^-] f - 2 pi f for a state f, exact."""
    lhs = raise_op(lower_op(f, k, a), k, a).P - lower_op(raise_op(f, k, a), k, a).P
    return sympy.simplify(sympy.expand(lhs - 2 * pi * f.P))


def hamiltonian(f, k, a):
    """H_{ka} f = -d^2_{ka} f + 16 pi^2 xi_{ka}^2 f."""
    d2 = f.derivative(k, a).derivative(k, a).P
    return f.with_poly(sympy.expand(-d2 + 16 * pi ** 2 * f.x[k, a] ** 2 * f.P))


def hermite_operator_residual(J, pos):
    """H_{ka} h_J - 8 pi (J_ka + 1/2) h_J as an exact polynomial factor."""
    J = _as_J(J)
    k, a = pos
    h = hermite_h(J)
    return sympy.simplify(hamiltonian(h, k, a).P - 8 * pi * (J[k][a] + sympy.Rational(1, 2)) * h.P)


def hermite_ode_residual(J, pos):
    """d^2 P_J - 8 pi xi d P_J + 8 pi J_ka P_J, exact."""
    J = _as_J(J)
    k, a = pos
    x = xvars(len(J), len(J[0]))[k, a]
    P = hermite_P(J)
    return sympy.simplify(sympy.diff(P, x, 2) - 8 * pi * x * sympy.diff(P, x) + 8 * pi * J[k][a] * P)


def hermite_recurrence_residuals(J, pos):
    """The raising and lowering recurrences for the Hermite polynomials, exact."""
    J = _as_J(J)
    k, a = pos
    x = xvars(len(J), len(J[0]))[k, a]
    c = 2 * sympy.sqrt(2 * pi * (J[k][a] + 1))
    P, Pu = hermite_P(J), hermite_P(_shift(J, k, a, 1))
    r1 = sympy.diff(P, x) - 8 * pi * x * P - c * Pu
    r2 = sympy.diff(Pu, x) + c * P
    return sympy.simplify(r1), sympy.simplify(r2)


def gaussian_inner(f, g):
    """Exact (f, g) = integral of f conj(g) over R^(m,n)."""
    return canonical(inner(f, g))


def hermite_fourier_residual(J):
    """fourier(h_J) - (-i)^{|J|} h_J for the Hermite-adapted transform (scale 2), exact."""
    h = hermite_h(J)
    return sympy.simplify(fourier(h, 2).difference(h.scale((-I) ** multiindex_abs(_as_J(J)))))


def cofourier(f, scale=1):
    """Fourier cotransform: the transform with the opposite sign in the kernel."""
    return fourier(f, scale).reflect()


# Fock model --------------------------------------------------------------------------

def _sqrtm(M):
    w, U = np.linalg.eigh(np.asarray(M, dtype=float))
    if w.min() <= 0:
        raise DomainError("index must be positive definite")
    return (U * np.sqrt(w)) @ U.T


def _index(Mi, m):
    Mi = np.atleast_2d(np.asarray(Mi, dtype=float))
    if Mi.shape != (m, m) or not np.allclose(Mi, Mi.T):
        raise StructuralError("index must be a symmetric m x m matrix")
    if not np.allclose(2 * Mi, np.round(2 * Mi)):
        raise DomainError("index must be half-integral")
    _sqrtm(Mi)
    return Mi


def fock_basis_eval(Mi, J, W):
    """Phi_{M,J}(W) = 2^{n/2} det(M)^{n/2} (J!)^{-1/2} ((2 pi M)^{1/2} W)^J."""
    J = _as_J(J)
    W = np.atleast_2d(np.asarray(W, dtype=complex))
    m, n = W.shape
    Mi = _index(Mi, m)
    X = _sqrtm(2 * math.pi * Mi) @ W
    mono = np.prod([X[k, a] ** J[k][a] for k in range(m) for a in range(n)])
    return complex(2 ** (n / 2) * np.linalg.det(Mi) ** (n / 2) / math.sqrt(multiindex_factorial(J)) * mono)


def fock_kernel(Mi, W, W2):
    """Reproducing kernel sum_J Phi_J(W) conj(Phi_J(W2)) = 2^n det(M)^n exp(2 pi sigma(M W ᵗconj(W2)))."""
    W = np.atleast_2d(np.asarray(W, dtype=complex))
    W2 = np.atleast_2d(np.asarray(W2, dtype=complex))
    m, n = W.shape
    Mi = _index(Mi, m)
    return complex(2 ** n * np.linalg.det(Mi) ** n * np.exp(2 * math.pi * np.trace(Mi @ W @ W2.conj().T)))


def fock_kernel_literal(Mi, W, W2):
    """The kernel as it is usually printed for this normalization: exp(pi sigma(M W ᵗconj(W2)))."""
    W = np.atleast_2d(np.asarray(W, dtype=complex))
    W2 = np.atleast_2d(np.asarray(W2, dtype=complex))
    return complex(np.exp(math.pi * np.trace(np.asarray(Mi, dtype=float).reshape(W.shape[0], -1) @ W @ W2.conj().T)))


def fock_kernel_series(Mi, W, W2, degree):
    """Truncated sum over |J| <= degree of Phi_J(W) conj(Phi_J(W2))."""
    from .foundation import multiindex_iter
    W = np.atleast_2d(np.asarray(W, dtype=complex))
    total = 0j
    for J in multiindex_iter(W.shape, degree):
        total += fock_basis_eval(Mi, J, W) * np.conj(fock_basis_eval(Mi, J, W2))
    return total


def fock_inner_quadrature(Mi, J, K, nodes=40):
    """(Phi_J, Phi_K)_M for m = n = 1 by tensor Gauss-Hermite quadrature in Re W, Im W."""
    Mi = float(np.asarray(Mi, dtype=float).reshape(()))
    x, w = np.polynomial.hermite.hermgauss(nodes)
    s = 1 / math.sqrt(2 * math.pi * Mi)
    X, Y = np.meshgrid(x * s, x * s, indexing="ij")
    Wt = np.outer(w, w) * s * s
    vals = np.vectorize(lambda a, b: fock_basis_eval([[Mi]], J, [[a + 1j * b]]) * np.conj(fock_basis_eval([[Mi]], K, [[a + 1j * b]])))(X, Y)
    return complex(np.sum(Wt * vals))


# Bargmann transform -------------------------------------------------------------------

def bargmann_kernel(Mi, U, W):
    """k_M(U, W) = exp(2 pi sigma{M(-U ᵗU - W ᵗW / 2 + 2 U ᵗW)})."""
    U = np.atleast_2d(np.asarray(U, dtype=complex))
    W = np.atleast_2d(np.asarray(W, dtype=complex))
    Mi = np.atleast_2d(np.asarray(Mi, dtype=float))
    return complex(np.exp(2 * math.pi * np.trace(Mi @ (-U @ U.T - W @ W.T / 2 + 2 * U @ W.T))))


def _gauss_hermite(fn, alpha, tol=1e-9, start=20, max_nodes=1280):
    """Integral over R of fn(x) exp(-alpha x^2) with node doubling until two values agree to ``tol``."""
    prev = None
    nodes = start
    while nodes <= max_nodes:
        x, w = np.polynomial.hermite.hermgauss(nodes)
        s = 1 / math.sqrt(alpha)
        val = complex(np.sum(w * fn(x * s)) * s)
        if prev is not None and abs(val - prev) <= tol * max(1.0, abs(val)):
            return val
        prev = val
        nodes *= 2
    raise NumericError("Gauss-Hermite quadrature did not settle")


def _state_1d(f):
    if (f.m, f.n) != (1, 1):
        raise DomainError("quadrature support is limited to m = n = 1")
    x = f.x[0, 0]
    expo = sympy.expand(f.exponent())
    q = sympy.Poly(expo, x)
    a2 = complex(q.coeff_monomial(x ** 2))
    rest = sympy.lambdify(x, f.P * sympy.exp(expo - q.coeff_monomial(x ** 2) * x ** 2), "numpy")
    return a2, rest


def bargmann(Mi, f, W, tol=1e-9):
    """(I_M f)(W) = integral of k_M(xi, W) f(xi) d xi, m = n = 1, by adaptive Gauss-Hermite quadrature."""
    Mi = float(np.asarray(Mi, dtype=float).reshape(()))
    w = complex(np.asarray(W).reshape(()))
    if isinstance(f, GaussianPolynomialState) and sympy.simplify(f.P) == 0:
        return 0j
    a2, rest = _state_1d(f)
    # exp(a2 x^2) exp(-2 pi M x^2) = exp(-alpha x^2) exp(i Im(a2) x^2)
    alpha = 2 * math.pi * Mi - a2.real
    if alpha <= 0:
        raise DomainError("integrand does not decay")

    def fn(x):
        x = np.asarray(x, dtype=float)
        return (np.exp(1j * a2.imag * x ** 2) * np.exp(2 * math.pi * Mi * (-w * w / 2 + 2 * x * w))
                * np.asarray(rest(x), dtype=complex))

    return _gauss_hermite(fn, alpha, tol)


def bargmann_exact(Mi, f):
    """I_M f as an exact sympy expression in the entries w_{ka} of W (any m, n)."""
    from .states import _exponent_data, _vec, gaussian_integral
    m, n = f.m, f.n
    Mi = sympy.Matrix(np.atleast_2d(np.asarray(Mi)).tolist()).applyfunc(sympy.nsimplify)
    Wv = sympy.Matrix(m, n, lambda k, a: sympy.Symbol(f"w_{k + 1}_{a + 1}"))
    A, b, c = _exponent_data(f)
    A = A + 2 * pi * sympy.kronecker_product(Mi, sympy.eye(n))
    MW = Mi * Wv
    b = b + sympy.Matrix([4 * pi * MW[k, a] for k in range(m) for a in range(n)])
    c = c - pi * (Mi * Wv * Wv.T).trace()
    val, expo = gaussian_integral(f.P, _vec(f.x), A, b, c)
    return sympy.simplify(val * sympy.exp(expo)), Wv


def kernel_inner_quadrature(Mi, W, W2, tol=1e-9):
    """Integral over U of k_M(U, W) conj(k_M(U, W2)), m = n = 1."""
    Mi = float(np.asarray(Mi, dtype=float).reshape(()))
    w, w2 = complex(W), complex(W2)

    def fn(x):
        k1 = np.exp(2 * math.pi * Mi * (-w * w / 2 + 2 * x * w))
        k2 = np.conj(np.exp(2 * math.pi * Mi * (-w2 * w2 / 2 + 2 * x * w2)))
        return k1 * k2

    return _gauss_hermite(fn, 4 * math.pi * Mi, tol)


def kernel_identity_residual(Mi, W, W2, corrected=False):
    """Relative residual of the kernel inner-product identity, m = n = 1.

    The literal right side is det(M)^{-1/2} exp(2 pi M W conj(W2)); the
    Gaussian integral over U carries an extra factor 2^{-mn}, included when
    ``corrected`` is set.
    """
    Mi_f = float(np.asarray(Mi, dtype=float).reshape(()))
    lhs = kernel_inner_quadrature(Mi, W, W2)
    rhs = Mi_f ** -0.5 * np.exp(2 * math.pi * Mi_f * complex(W) * np.conj(complex(W2)))
    if corrected:
        rhs = rhs / 2
    return abs(lhs - rhs) / max(abs(rhs), 1e-300)


def intertwiner_residual(Mi, J, W, corrected=False):
    """Residual of I_M conj(h_J) = Phi_{M,J} at W, m = n = 1, relative once |Phi| >= 1.

    With ``corrected`` the right side is (-1)^J Phi_{M,J} / 2, the constant the
    quadrature actually produces for M = 1.
    """
    J = _as_J(J)
    h = hermite_h(J)
    hbar = GaussianPolynomialState(h.conjugate_poly(), h.c, h.Omega.applyfunc(lambda z: -sympy.conjugate(z)),
                                   -h.L.applyfunc(sympy.conjugate), -sympy.conjugate(h.s))
    lhs = bargmann(Mi, hbar, W)
    rhs = fock_basis_eval(np.atleast_2d(Mi), J, np.atleast_2d(W))
    if corrected:
        rhs = rhs * (-1) ** multiindex_abs(J) / 2
    return abs(lhs - rhs) / max(abs(rhs), 1.0)
