"""Gaussian-polynomial states on R^(m,n) in exact symbolic form.

A state is P(x) exp(2 pi i [sigma(c x Omega ᵗx) + sigma(ᵗL x) + s]) with P a
polynomial, c a positive symmetric m x m matrix, Omega in H_n, L a complex
m x n matrix and s a complex constant.  All entries are sympy objects, so
translations, multiplications by characters, derivatives, Gaussian integrals
and Fourier transforms are exact algebra rather than quadrature.

Vectorization of x is row-major: x_{ka} sits at position k*n + a.
"""

from functools import lru_cache

import numpy as np
import sympy
from sympy import I, pi

from .foundation import DomainError, StructuralError


@lru_cache(maxsize=None)
def xvars(m, n, name="x"):
    """sympy Matrix of the coordinates x_{ka} (1-based names)."""
    return sympy.Matrix(m, n, lambda k, a: sympy.Symbol(f"{name}_{k + 1}_{a + 1}", real=True))


def _mat(M, shape=None):
    M = sympy.Matrix(M) if not isinstance(M, sympy.MatrixBase) else M
    if shape is not None and M.shape != shape:
        raise StructuralError(f"expected shape {shape}, got {M.shape}")
    return M.applyfunc(sympy.nsimplify)


def _sigma(M):
    return M.trace()


def quad_matrix(c, Omega):
    """The mn x mn matrix K with sigma(c x Omega ᵗx) = vec(x)ᵀ K vec(x)."""
    m, n = c.shape[0], Omega.shape[0]
    K = sympy.zeros(m * n, m * n)
    for k in range(m):
        for l in range(m):
            for a in range(n):
                for b in range(n):
                    K[k * n + a, l * n + b] = c[k, l] * Omega[a, b]
    return K


class GaussianPolynomialState:
    """P(x) exp(2 pi i [sigma(c x Omega ᵗx) + sigma(ᵗL x) + s])."""

    def __init__(self, P, c, Omega, L=None, s=0):
        self.c = _mat(c)
        self.Omega = _mat(Omega)
        m, n = self.c.shape[0], self.Omega.shape[0]
        if self.c != self.c.T or self.Omega != self.Omega.T:
            raise StructuralError("c and Omega must be symmetric")
        self.m, self.n = m, n
        self.L = sympy.zeros(m, n) if L is None else _mat(L, (m, n))
        self.s = sympy.nsimplify(s)
        self.P = sympy.expand(sympy.sympify(P))
        Y = np.array(self.Omega.applyfunc(sympy.im).evalf(), dtype=float)
        cf = np.array(self.c.evalf(), dtype=float)
        if np.linalg.eigvalsh(cf).min() <= 0 or np.linalg.eigvalsh(Y).min() <= 0:
            raise DomainError("state must have c > 0 and Im Omega > 0")

    # basic structure -------------------------------------------------------
    @property
    def x(self):
        return xvars(self.m, self.n)

    def exponent(self):
        """The full exponent 2 pi i [ ... ] as a sympy expression in x."""
        x = self.x
        q = _sigma(self.c * x * self.Omega * x.T) + _sigma(self.L.T * x) + self.s
        return sympy.expand(2 * pi * I * q)

    def expr(self):
        return self.P * sympy.exp(self.exponent())

    def evaluate(self, X):
        """Numerical value at a real m x n matrix X."""
        X = np.asarray(X, dtype=float).reshape(self.m, self.n)
        subs = {self.x[k, a]: X[k, a] for k in range(self.m) for a in range(self.n)}
        return complex(self.expr().evalf(subs=subs))

    def with_poly(self, P):
        return GaussianPolynomialState(P, self.c, self.Omega, self.L, self.s)

    def same_exponent(self, other):
        if (self.m, self.n) != (other.m, other.n):
            return False
        dK = quad_matrix(self.c, self.Omega) - quad_matrix(other.c, other.Omega)
        return dK.applyfunc(sympy.simplify).is_zero_matrix and (self.L - other.L).applyfunc(sympy.simplify).is_zero_matrix

    def difference(self, other):
        """Polynomial D with self - other = D exp(E_self); requires equal quadratic and linear parts."""
        if not self.same_exponent(other):
            raise StructuralError("states have different Gaussian exponents")
        ratio = sympy.exp(2 * pi * I * (other.s - self.s))
        D = sympy.expand(sympy.simplify(self.P - ratio * other.P))
        if D != 0:
            # products of square roots of Gaussian integers, e.g. sqrt(1-i) sqrt(1+i), need rectangular form
            D2 = sympy.expand(sympy.simplify(sympy.expand_complex(D)))
            if D2 == 0:
                return D2
        return D

    def equals(self, other):
        try:
            return self.difference(other) == 0
        except StructuralError:
            return False

    def scale(self, lam):
        return self.with_poly(sympy.expand(lam * self.P))

    def __add__(self, other):
        if not self.same_exponent(other):
            raise StructuralError("states have different Gaussian exponents")
        ratio = sympy.exp(2 * pi * I * (other.s - self.s))
        return self.with_poly(sympy.expand(self.P + ratio * other.P))

    # operators -------------------------------------------------------------
    def translate(self, lam):
        """x -> f(x + lam)."""
        lam = _mat(lam, (self.m, self.n))
        x = self.x
        P = self.P.subs({x[k, a]: x[k, a] + lam[k, a] for k in range(self.m) for a in range(self.n)}, simultaneous=True)
        L = self.L + 2 * self.c * lam * self.Omega
        s = self.s + _sigma(self.c * lam * self.Omega * lam.T) + _sigma(self.L.T * lam)
        return GaussianPolynomialState(sympy.expand(P), self.c, self.Omega, L, sympy.expand(s))

    def times_character(self, L_add, s_add=0):
        """Multiply by exp(2 pi i [sigma(ᵗL_add x) + s_add])."""
        L_add = _mat(L_add, (self.m, self.n))
        return GaussianPolynomialState(self.P, self.c, self.Omega, self.L + L_add, self.s + sympy.nsimplify(s_add))

    def derivative(self, k, a):
        """d/dx_{ka} of the state."""
        x = self.x
        E = self.exponent()
        P = sympy.diff(self.P, x[k, a]) + self.P * sympy.diff(E, x[k, a])
        return self.with_poly(sympy.expand(P))

    def multiply_x(self, k, a):
        return self.with_poly(sympy.expand(self.x[k, a] * self.P))

    def reflect(self):
        """x -> f(-x)."""
        x = self.x
        P = self.P.subs({x[k, a]: -x[k, a] for k in range(self.m) for a in range(self.n)}, simultaneous=True)
        return GaussianPolynomialState(sympy.expand(P), self.c, self.Omega, -self.L, self.s)

    def conjugate_poly(self):
        """Complex-conjugated polynomial (x is real)."""
        return sympy.expand(sympy.conjugate(self.P))


# Gaussian integrals ---------------------------------------------------------------

def _vec(x):
    return [x[k, a] for k in range(x.shape[0]) for a in range(x.shape[1])]


def _sqrt_det_branch(A):
    """det(A)^{1/2} for complex symmetric A with positive definite real part.

    The exact candidate is the principal square root of det A; its sign is
    fixed by comparing with the product of principal square roots of the
    eigenvalues, which all lie in the open right half-plane.
    """
    d = sympy.nsimplify(sympy.simplify(A.det()))
    cand = sympy.sqrt(d)
    num = np.prod(np.sqrt(np.linalg.eigvals(np.array(A.evalf(), dtype=complex))))
    val = complex(cand.evalf())
    if abs(val - num) > abs(val + num):
        cand = -cand
    return cand


def gaussian_integral(poly, vars_, A, b, const=0):
    """Exact value of the integral over R^N of poly(v) exp(-vᵀAv + bᵀv + const).

    Uses the moment formula d_b^alpha [pi^{N/2} det(A)^{-1/2} exp(bᵀA^{-1}b/4)].
    ``b`` may contain free symbols (then the result is a function of them).
    """
    N = len(vars_)
    A = sympy.Matrix(A)
    Ar = np.array(A.applyfunc(sympy.re).evalf(), dtype=float)
    if np.linalg.eigvalsh((Ar + Ar.T) / 2).min() <= 0:
        raise DomainError("Gaussian integrand does not decay")
    Ainv = A.inv()
    beta = sympy.symbols(f"beta_0:{N}")
    bvec = sympy.Matrix(beta)
    q = sympy.expand((bvec.T * Ainv * bvec)[0, 0] / 4)
    grads = [sympy.diff(q, bi) for bi in beta]
    memo = {tuple([0] * N): sympy.Integer(1)}

    def H(alpha):
        # d_beta^alpha e^q = H_alpha(beta) e^q
        if alpha in memo:
            return memo[alpha]
        i = next(j for j, e in enumerate(alpha) if e)
        lower = list(alpha)
        lower[i] -= 1
        lower = tuple(lower)
        h = H(lower)
        out = sympy.expand(sympy.diff(h, beta[i]) + h * grads[i])
        memo[alpha] = out
        return out

    p = sympy.Poly(sympy.expand(poly), *vars_) if N else None
    total = 0
    terms = p.terms() if p is not None else [((), sympy.sympify(poly))]
    for mono, coeff in terms:
        total += coeff * H(tuple(mono))
    subs = dict(zip(beta, list(b)))
    pref = pi ** sympy.Rational(N, 2) / _sqrt_det_branch(A)
    expo = q.subs(subs, simultaneous=True) + const
    return sympy.expand(pref * sympy.expand(total.subs(subs, simultaneous=True))), sympy.expand(expo)


def _exponent_data(f):
    """(A, b, const) with E(x) = -vᵀAv + bᵀv + const for the state f."""
    K = quad_matrix(f.c, f.Omega)
    A = -2 * pi * I * K
    b = sympy.Matrix([2 * pi * I * f.L[k, a] for k in range(f.m) for a in range(f.n)])
    return A, b, 2 * pi * I * f.s


def inner(f, g):
    """Exact L^2 inner product (f, g) = integral of f * conj(g)."""
    if (f.m, f.n) != (g.m, g.n):
        raise StructuralError("states live on different spaces")
    Af, bf, cf = _exponent_data(f)
    Ag, bg, cg = _exponent_data(g)
    A = Af + Ag.applyfunc(sympy.conjugate)
    b = bf + bg.applyfunc(sympy.conjugate)
    const = cf + sympy.conjugate(cg)
    v = _vec(f.x)
    val, expo = gaussian_integral(sympy.expand(f.P * g.conjugate_poly()), v, A, b, const)
    return sympy.simplify(val * sympy.exp(expo))


def fourier(f, scale=1):
    """Unitary Fourier transform with kernel scale^{mn/2} exp(-2 pi i scale <xi, eta>).

    scale = 1 is the plain transform  integral of f(xi) e^{-2 pi i sigma(xi ᵗeta)} d xi;
    scale = 2 is the transform adapted to the weight exp(-2 pi |xi|^2) of the
    Hermite functions, under which h_J has eigenvalue (-i)^{|J|}.
    The result is again a state, with c replaced by scale^2 c^{-1}/4 and
    Omega by -Omega^{-1}.
    """
    scale = sympy.nsimplify(scale)
    A, b, const = _exponent_data(f)
    v = _vec(f.x)
    b_eta = b - 2 * pi * I * scale * sympy.Matrix(v)
    val, expo = gaussian_integral(f.P, v, A, b_eta, const)
    c_new = (scale ** 2 / 4) * f.c.inv()
    Om_new = -f.Omega.inv()
    # expo = 2 pi i [sigma(c' eta Om' ᵗeta) + sigma(ᵗL' eta) + s']
    base = GaussianPolynomialState(1, c_new, Om_new)
    quad = sympy.expand(base.exponent())
    rest = sympy.expand(expo - quad)
    poly_rest = sympy.Poly(rest, *v)
    L_new = sympy.zeros(f.m, f.n)
    s_new = 0
    for mono, coeff in poly_rest.terms():
        deg = sum(mono)
        if deg == 1:
            j = mono.index(1)
            L_new[j // f.n, j % f.n] = coeff / (2 * pi * I)
        elif deg == 0:
            s_new = coeff / (2 * pi * I)
        else:
            raise AssertionError("Fourier exponent is not of Gaussian form")
    P_new = sympy.expand(scale ** sympy.Rational(f.m * f.n, 2) * val)
    return GaussianPolynomialState(P_new, c_new, Om_new, L_new.applyfunc(sympy.simplify), sympy.simplify(s_new))
