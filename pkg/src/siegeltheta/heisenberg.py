"""The Heisenberg group H_R^(n,m) and its actions.

Elements are triples (lambda, mu, kappa) with lambda, mu real m x n and kappa
real m x m.  Two coordinate systems are supported:

* ``circle``:  (l, m, k) o (l0, m0, k0) = (l + l0, m + m0, k + k0 + l ᵗm0 - m ᵗl0),
  with k + m ᵗl symmetric;
* ``diamond``: [l, m, k] = (l, m, k - m ᵗl), giving
  [l, m, k] * [l0, m0, k0] = [l + l0, m + m0, k + k0 + l ᵗm0 + m0 ᵗl], k symmetric.

Integer, Fraction or object arrays give exact arithmetic throughout.
"""

from dataclasses import dataclass

import numpy as np
import sympy

from .foundation import StructuralError, as_matrix, check_siegel_point
from .states import GaussianPolynomialState
from .symplectic import act, blocks, degree

CIRCLE = "circle"
DIAMOND = "diamond"


def _is_zero(M):
    M = np.asarray(M)
    if M.dtype == object or M.dtype.kind in "iu":
        return all(v == 0 for v in M.flat)
    return bool(np.abs(M).max(initial=0.0) <= 1e-12 * max(1.0, np.abs(M).max(initial=0.0)))


@dataclass(frozen=True, eq=False)
class HeisenbergElement:
    lam: np.ndarray
    mu: np.ndarray
    kappa: np.ndarray
    law: str = CIRCLE

    def __post_init__(self):
        lam, mu, kappa = as_matrix(self.lam), as_matrix(self.mu), as_matrix(self.kappa)
        if lam.shape != mu.shape:
            raise StructuralError("lambda and mu must have the same shape")
        m = lam.shape[0]
        if kappa.shape != (m, m):
            raise StructuralError(f"kappa must be {m} x {m}")
        if self.law not in (CIRCLE, DIAMOND):
            raise StructuralError(f"unknown law {self.law!r}")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "kappa", kappa)
        sym = kappa + mu @ lam.T if self.law == CIRCLE else kappa
        if not _is_zero(sym - sym.T):
            raise StructuralError("kappa + mu ᵗlambda must be symmetric" if self.law == CIRCLE
                                  else "kappa must be symmetric")

    @property
    def shape(self):
        return self.lam.shape

    def to_circle(self):
        if self.law == CIRCLE:
            return self
        return HeisenbergElement(self.lam, self.mu, self.kappa - self.mu @ self.lam.T, CIRCLE)

    def to_diamond(self):
        if self.law == DIAMOND:
            return self
        return HeisenbergElement(self.lam, self.mu, self.kappa + self.mu @ self.lam.T, DIAMOND)

    def equals(self, other):
        return (self.law == other.law and self.shape == other.shape and _is_zero(self.lam - other.lam)
                and _is_zero(self.mu - other.mu) and _is_zero(self.kappa - other.kappa))


def identity(m, n, law=CIRCLE):
    Z = np.zeros((m, n), dtype=int)
    return HeisenbergElement(Z, Z, np.zeros((m, m), dtype=int), law)


def mul(g1, g2):
    """Group product in the coordinates shared by g1 and g2."""
    if g1.law != g2.law:
        raise StructuralError("cannot multiply elements given in different coordinates")
    if g1.shape != g2.shape:
        raise StructuralError("shape mismatch")
    l, m, k = g1.lam, g1.mu, g1.kappa
    l0, m0, k0 = g2.lam, g2.mu, g2.kappa
    if g1.law == CIRCLE:
        kap = k + k0 + l @ m0.T - m @ l0.T
    else:
        kap = k + k0 + l @ m0.T + m0 @ l.T
    return HeisenbergElement(l + l0, m + m0, kap, g1.law)


def inverse(g):
    l, m, k = g.lam, g.mu, g.kappa
    if g.law == CIRCLE:
        return HeisenbergElement(-l, -m, -k + l @ m.T - m @ l.T, CIRCLE)
    return HeisenbergElement(-l, -m, -k + l @ m.T + m @ l.T, DIAMOND)


def embed_sp(g):
    """Block-unipotent image of g in Sp(m + n, R).

    With the block order (n, m, n, m) the image is
    [[I, 0, 0, ᵗmu], [lambda, I, mu, kappa], [0, 0, I, -ᵗlambda], [0, 0, 0, I]].
    """
    g = g.to_circle()
    m, n = g.shape
    l, mu, k = g.lam, g.mu, g.kappa
    dt = object if object in (l.dtype, mu.dtype, k.dtype) else np.result_type(l, mu, k)

    def Z(p, q):
        return np.zeros((p, q), dtype=int).astype(dt)

    def I(p):
        return np.eye(p, dtype=int).astype(dt)

    return np.block([
        [I(n), Z(n, m), Z(n, n), mu.T.astype(dt)],
        [l.astype(dt), I(m), mu.astype(dt), k.astype(dt)],
        [Z(n, n), Z(n, m), I(n), (-l.T).astype(dt)],
        [Z(m, n), Z(m, m), Z(m, n), I(m)],
    ])


# Lie algebra --------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HeisenbergAlgebraElement:
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        a, b, c = as_matrix(self.alpha), as_matrix(self.beta), as_matrix(self.gamma)
        if a.shape != b.shape or c.shape != (a.shape[0], a.shape[0]):
            raise StructuralError("inconsistent algebra element shapes")
        if not _is_zero(c - c.T):
            raise StructuralError("gamma must be symmetric")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        object.__setattr__(self, "gamma", c)

    def matrix(self):
        """X(alpha, beta, gamma) = [[0,0,0,ᵗbeta],[alpha,0,beta,gamma],[0,0,0,-ᵗalpha],[0,0,0,0]]."""
        a, b, c = self.alpha, self.beta, self.gamma
        m, n = a.shape
        dt = object if object in (a.dtype, b.dtype, c.dtype) else np.result_type(a, b, c)

        def Z(p, q):
            return np.zeros((p, q), dtype=int).astype(dt)

        return np.block([
            [Z(n, n), Z(n, m), Z(n, n), b.T.astype(dt)],
            [a.astype(dt), Z(m, m), b.astype(dt), c.astype(dt)],
            [Z(n, n), Z(n, m), Z(n, n), (-a.T).astype(dt)],
            [Z(m, n), Z(m, m), Z(m, n), Z(m, m)],
        ])

    def equals(self, other):
        return (_is_zero(self.alpha - other.alpha) and _is_zero(self.beta - other.beta)
                and _is_zero(self.gamma - other.gamma))


def bracket(X1, X2):
    """[X(a, b, c), X(d, e, f)] = X(0, 0, a ᵗe + e ᵗa - b ᵗd - d ᵗb)."""
    if X1.alpha.shape != X2.alpha.shape:
        raise StructuralError("shape mismatch")
    a, b, d, e = X1.alpha, X1.beta, X2.alpha, X2.beta
    g = a @ e.T + e @ a.T - b @ d.T - d @ b.T
    Z = np.zeros(a.shape, dtype=int)
    return HeisenbergAlgebraElement(Z, Z, g)


def algebra_basis(m, n):
    """The basis X0_{kl} (k <= l), X_{ka}, Xhat_{lb}, as a dict keyed by labels."""
    out = {}
    for k in range(m):
        for l in range(k, m):
            g = np.zeros((m, m), dtype=object)
            g[k, l] += sympy.Rational(1, 2)
            g[l, k] += sympy.Rational(1, 2)
            Z = np.zeros((m, n), dtype=int)
            out[("X0", k, l)] = HeisenbergAlgebraElement(Z, Z, g)
    for k in range(m):
        for a in range(n):
            E = np.zeros((m, n), dtype=int)
            E[k, a] = 1
            Z = np.zeros((m, n), dtype=int)
            Zm = np.zeros((m, m), dtype=int)
            out[("X", k, a)] = HeisenbergAlgebraElement(E, Z, Zm)
            out[("Xhat", k, a)] = HeisenbergAlgebraElement(Z, E, Zm)
    return out


# coadjoint action -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CoadjointFunctional:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        a, b, c = as_matrix(self.a), as_matrix(self.b), as_matrix(self.c)
        if a.shape != b.shape or c.shape != (a.shape[0], a.shape[0]):
            raise StructuralError("inconsistent functional shapes")
        if not _is_zero(c - c.T):
            raise StructuralError("c must be symmetric")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    def equals(self, other):
        return _is_zero(self.a - other.a) and _is_zero(self.b - other.b) and _is_zero(self.c - other.c)


def coadjoint(g, F):
    """Ad*(g) F(a, b, c) = F(a + c mu, b - c lambda, c); kappa does not enter."""
    if g.shape != F.a.shape:
        raise StructuralError("shape mismatch")
    return CoadjointFunctional(F.a + F.c @ g.mu, F.b - F.c @ g.lam, F.c)


# Schrodinger representation ---------------------------------------------------

def schrodinger_act(c, g, f):
    """U_c(g) f (x) = exp(2 pi i sigma{c (kappa + mu ᵗlambda + 2 x ᵗmu)}) f(x + lambda).

    ``f`` is a GaussianPolynomialState whose index must equal c; the result is
    again such a state, obtained by exact exponent bookkeeping.
    """
    if not isinstance(f, GaussianPolynomialState):
        raise StructuralError("f must be a GaussianPolynomialState")
    c = sympy.Matrix(as_matrix(c).tolist()).applyfunc(sympy.nsimplify)
    if c != f.c:
        raise StructuralError("index c of the state does not match")
    g = g.to_circle()
    if g.shape != (f.m, f.n):
        raise StructuralError("shape mismatch")
    lam = sympy.Matrix(g.lam.tolist()).applyfunc(sympy.nsimplify)
    mu = sympy.Matrix(g.mu.tolist()).applyfunc(sympy.nsimplify)
    kap = sympy.Matrix(g.kappa.tolist()).applyfunc(sympy.nsimplify)
    out = f.translate(lam)
    return out.times_character(2 * c * mu, (c * (kap + mu * lam.T)).trace())


# Jacobi group ------------------------------------------------------------------

def jacobi_mul(M, g, M2, g2):
    """(M, g)(M', g') = (M M', (lt + l', mt + m', k + k' + lt ᵗm' - mt ᵗl')) with (lt, mt) = (l, m) M'."""
    g, g2 = g.to_circle(), g2.to_circle()
    A2, B2, C2, D2 = blocks(as_matrix(M2))
    lt = g.lam @ A2 + g.mu @ C2
    mt = g.lam @ B2 + g.mu @ D2
    kap = g.kappa + g2.kappa + lt @ g2.mu.T - mt @ g2.lam.T
    return as_matrix(M) @ as_matrix(M2), HeisenbergElement(lt + g2.lam, mt + g2.mu, kap, CIRCLE)


def jacobi_act(M, g, Omega, Z):
    """(M, (lambda, mu, kappa)) . (Omega, Z) = (M Omega, (Z + lambda Omega + mu)(C Omega + D)^{-1})."""
    W = check_siegel_point(Omega)
    g = g.to_circle()
    M = as_matrix(M)
    if degree(M) != W.shape[0]:
        raise StructuralError("degree of M does not match Omega")
    Z = np.asarray(as_matrix(Z), dtype=complex)
    if Z.shape != g.shape or Z.shape[1] != W.shape[0]:
        raise StructuralError("Z must be m x n")
    _, _, C, D = (np.asarray(X, dtype=complex) for X in blocks(M))
    Om2 = act(M, W)
    lam, mu = np.asarray(g.lam, dtype=float), np.asarray(g.mu, dtype=float)
    Z2 = np.linalg.solve((C @ W + D).T, (Z + lam @ W + mu).T).T
    return Om2, Z2
