"""The Weil representation on the Gaussian family F^(c)(Omega)(x) = exp(2 pi i sigma(c x Omega ᵗx)).

A Gaussian state is an amplitude times F^(c)(Omega).  The generators t_b,
d_a and sigma_n act in closed form.  Omega and the squared amplitude are
tracked exactly (sympy, Gaussian rationals) so covariance can be checked as
an exact identity of squares; the amplitude itself is tracked numerically on
a definite branch.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import math

import numpy as np
import sympy

from .foundation import DomainError, StructuralError, as_matrix, det_power, is_positive_definite
from .symplectic import automorphic_factor, inversion, translation
from .theta import DEFAULT_POLICY, ThetaResult, lattice_sum


def _smat(M):
    if isinstance(M, sympy.MatrixBase):
        return M.applyfunc(sympy.nsimplify)
    A = np.asarray(M, dtype=object) if not np.isscalar(M) else np.array([[M]], dtype=object)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    return sympy.Matrix(A.tolist()).applyfunc(lambda v: sympy.nsimplify(v) if not isinstance(v, Fraction)
                                               else sympy.Rational(v.numerator, v.denominator))


def _cplx(M):
    return np.array(sympy.Matrix(M).evalf(30).tolist(), dtype=complex)


@dataclass
class GaussianState:
    """amplitude * exp(2 pi i sigma(c x Omega ᵗx)) on R^(m,n).

    ``amp2`` is the exact square of the amplitude (None when unknown).
    """

    amplitude: complex
    Omega: sympy.Matrix
    c: sympy.Matrix
    amp2: object = None
    branch_flags: list = field(default_factory=list)

    def __post_init__(self):
        self.Omega = _smat(self.Omega)
        self.c = _smat(self.c)
        if self.Omega != self.Omega.T or self.c != self.c.T:
            raise StructuralError("Omega and c must be symmetric")
        if not is_positive_definite(np.array(_cplx(self.Omega).imag)):
            raise DomainError("Im Omega must be positive definite")
        if not is_positive_definite(np.array(_cplx(self.c).real)):
            raise DomainError("c must be positive definite")
        if self.amp2 is None:
            a = sympy.nsimplify(self.amplitude)
            self.amp2 = sympy.expand(a * a)

    @property
    def m(self):
        return self.c.shape[0]

    @property
    def n(self):
        return self.Omega.shape[0]

    def value(self, x):
        x = np.asarray(x, dtype=float).reshape(self.m, self.n)
        q = np.trace(_cplx(self.c) @ x @ _cplx(self.Omega) @ x.T)
        return complex(self.amplitude * np.exp(2j * math.pi * q))


def covariant_state(c, Omega):
    """F^(c)(Omega) with amplitude 1."""
    return GaussianState(1.0, Omega, c, sympy.Integer(1))


# generator words -------------------------------------------------------------------

@dataclass(frozen=True)
class Generator:
    """kind is 't' (t_b, arg b symmetric), 'd' (d_a, arg a invertible) or 's' (sigma_n)."""

    kind: str
    arg: object = None

    def matrix(self, n):
        if self.kind == "t":
            return _smat(translation(np.asarray(self.arg, dtype=object)))
        if self.kind == "d":
            a = _smat(self.arg)
            return sympy.diag(a.T, a.inv())
        if self.kind == "s":
            return _smat(inversion(n))
        raise StructuralError(f"unknown generator {self.kind}")


def word_matrix(word, n):
    """The symplectic matrix g_1 g_2 ... g_k of a word."""
    M = sympy.eye(2 * n)
    for g in word:
        M = M * g.matrix(n)
    return M


def _act_exact(M, Omega):
    n = Omega.shape[0]
    A, B, C, D = M[:n, :n], M[:n, n:], M[n:, :n], M[n:, n:]
    return ((A * Omega + B) * (C * Omega + D).inv()).applyfunc(sympy.nsimplify).applyfunc(sympy.simplify)


def _near_cut(z, eps=1e-9):
    return z.real < 0 and abs(z.imag) <= eps * max(1.0, abs(z))


def omega_apply(word, f):
    """omega_c(g_1) ... omega_c(g_k) f; the rightmost generator acts first."""
    amp, amp2, Om = complex(f.amplitude), sympy.sympify(f.amp2), f.Omega
    m, n = f.m, f.n
    flags = list(f.branch_flags)
    for g in reversed(list(word)):
        if g.kind == "t":
            b = _smat(g.arg)
            if b != b.T or b.shape != (n, n):
                raise StructuralError("t_b needs a symmetric n x n matrix")
            Om = Om + b
        elif g.kind == "d":
            a = _smat(g.arg)
            da = a.det()
            if da == 0:
                raise DomainError("d_a needs an invertible matrix")
            dz = complex(sympy.N(da))
            if _near_cut(dz) and m % 2:
                flags.append("d_a: det(a) < 0 with odd m, principal branch used")
            amp *= dz ** (m / 2)
            amp2 = amp2 * da ** m
            Om = (a.T * Om * a).applyfunc(sympy.simplify)
        elif g.kind == "s":
            amp *= det_power(_cplx(Om), Fraction(-m, 2))
            amp2 = amp2 * Om.det() ** (-m)
            Om = (-Om.inv()).applyfunc(sympy.simplify)
        else:
            raise StructuralError(f"unknown generator {g.kind}")
    return GaussianState(amp, Om, f.c, sympy.simplify(amp2), flags)


def covariance_residual(word, Omega, c=None):
    """Compare omega_c(word) F(Omega) with J_m(M, Omega)^{-1} F(M Omega).

    Returns a dict with the exact Omega match, the exact squared ratio r^2,
    the numerical ratio r and |r - 1|.
    """
    Om = _smat(Omega)
    n = Om.shape[0]
    c = sympy.eye(1) if c is None else _smat(c)
    m = c.shape[0]
    out = omega_apply(word, covariant_state(c, Om))
    M = word_matrix(word, n)
    target = _act_exact(M, Om)
    C, D = M[n:, :n], M[n:, n:]
    J = sympy.simplify((C * Om + D).det())
    r2 = sympy.simplify(sympy.expand(out.amp2 * J ** m))
    Jm = automorphic_factor(np.array(M.evalf().tolist(), dtype=float), _cplx(Om), m)
    r = out.amplitude * Jm
    flags = list(out.branch_flags)
    if _near_cut(complex(sympy.N(J))):
        flags.append("det(C Omega + D) on the principal cut")
    return {
        "omega_match": bool(sympy.simplify(out.Omega - target).is_zero_matrix),
        "r2": r2,
        "r2_is_one": bool(sympy.simplify(r2 - 1) == 0),
        "r": complex(r),
        "abs_r_minus_1": abs(r - 1),
        "branch_flags": flags,
    }


def sigma_operator_quadrature(c, Omega, x, tol=1e-10):
    """omega_c(sigma_1) F^(c)(Omega) at x for m = n = 1, from the integral operator.

    (2/i)^{1/2} c^{1/2} times the integral of exp(2 pi i c y^2 Omega) exp(-4 pi i c y x) dy,
    by Gauss-Hermite quadrature with node doubling.
    """
    from .hermite_fock import _gauss_hermite
    c = float(c)
    w = complex(Omega)
    alpha = 2 * math.pi * c * w.imag

    def fn(y):
        return np.exp(2j * math.pi * c * w.real * y ** 2) * np.exp(-4j * math.pi * c * y * x)

    integral = _gauss_hermite(fn, alpha, tol)
    return complex(np.sqrt(2 / 1j)) * math.sqrt(c) * integral


def sigma_closed_form(c, Omega, x):
    """det(Omega)^{-1/2} F^(c)(-1/Omega)(x) on the branch of det_power, m = n = 1."""
    w = complex(Omega)
    return det_power([[w]], Fraction(-1, 2)) * complex(np.exp(2j * math.pi * float(c) * x * x * (-1 / w)))


# cocycle ------------------------------------------------------------------------

def j_star(M, Omega=None):
    """J*(M, Omega) = J^{1/2} / |J^{1/2}| with J = det(C Omega + D) (principal root)."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0] // 2
    Om = 1j * np.eye(n) if Omega is None else np.asarray(Omega, dtype=complex)
    J = complex(np.linalg.det(M[n:, :n] @ Om + M[n:, n:]))
    s = complex(np.sqrt(J))
    return s / abs(s)


def cocycle(M1, M2):
    """alpha(M1, M2) = J*(M1, iI) J*(M2, iI) / J*(M1 M2, iI)."""
    M1, M2 = np.asarray(M1, dtype=float), np.asarray(M2, dtype=float)
    return j_star(M1) * j_star(M2) / j_star(M1 @ M2)


def cocycle_residual(M1, M2, M3):
    """|alpha(M1M2, M3) alpha(M1, M2) - alpha(M1, M2M3) alpha(M2, M3)|."""
    M1, M2, M3 = (np.asarray(M, dtype=float) for M in (M1, M2, M3))
    return abs(cocycle(M1 @ M2, M3) * cocycle(M1, M2) - cocycle(M1, M2 @ M3) * cocycle(M2, M3))


# theta lift and its functional equation ----------------------------------------------

def theta_lift(Mi, Omega, policy=DEFAULT_POLICY):
    """Theta_M(Omega) = sum over xi in Z^(m,n) of F^(M)(Omega)(xi), i.e. the theta series of S = 2M."""
    S = 2 * np.asarray(as_matrix(Mi), dtype=float)
    n = np.asarray(as_matrix(Omega)).shape[0]
    m = S.shape[0]
    return lattice_sum(S, Omega, np.zeros((m, n)), np.zeros((m, n)), policy)


def lift_rho(Mi, Omega, gamma=None, policy=DEFAULT_POLICY):
    """rho with Theta(gamma Omega) = rho J_m(gamma, Omega) Theta(Omega); gamma defaults to sigma_n.

    Returns (rho, |rho^8 - 1|).
    """
    from .symplectic import act
    Om = np.asarray(as_matrix(Omega), dtype=complex)
    n = Om.shape[0]
    m = np.asarray(as_matrix(Mi)).shape[0]
    gamma = inversion(n) if gamma is None else np.asarray(gamma)
    a = theta_lift(Mi, act(gamma, Om), policy).value
    b = theta_lift(Mi, Om, policy).value
    rho = a / (automorphic_factor(gamma, Om, m) * b)
    return rho, abs(rho ** 8 - 1)


def lift_translation_residual(Mi, Omega, b, policy=DEFAULT_POLICY):
    """|Theta(Omega + b) - Theta(Omega)| / |Theta(Omega)| for integral symmetric b."""
    Om = np.asarray(as_matrix(Omega), dtype=complex)
    b = np.asarray(as_matrix(b), dtype=float)
    x = theta_lift(Mi, Om + b, policy).value
    y = theta_lift(Mi, Om, policy).value
    return abs(x - y) / max(abs(y), 1e-300)


# Poisson summation ---------------------------------------------------------------

def fourier_gaussian(f):
    """Closed-form Fourier transform of a Gaussian state (kernel exp(-2 pi i sigma(x ᵗeta))).

    f = lam F^(c)(Omega)  ->  lam det(c)^{-n/2} 2^{-mn/2} det(Omega/i)^{-m/2} F^(c^{-1}/4)(-Omega^{-1}).
    """
    from .foundation import halfplane_det_power
    m, n = f.m, f.n
    cf, Om = _cplx(f.c).real, _cplx(f.Omega)
    amp = (f.amplitude * np.linalg.det(cf) ** (-n / 2) * 2 ** (-m * n / 2)
           * halfplane_det_power(Om, Fraction(-m, 2)))
    c2 = f.c.inv() / 4
    Om2 = -f.Omega.inv()
    return GaussianState(complex(amp), Om2, c2, None)


def _gauss_sum(f, policy):
    S = 2 * _cplx(f.c).real
    r = lattice_sum(S, _cplx(f.Omega), np.zeros((f.m, f.n)), np.zeros((f.m, f.n)), policy)
    a = abs(f.amplitude)
    return ThetaResult(f.amplitude * r.value, a * r.tail_bound, r.radius, r.terms)


def poisson_residual(f, policy=DEFAULT_POLICY):
    """(|sum f(xi) - sum f^(xi)|, combined certified tail) over xi in Z^(m,n)."""
    lhs = _gauss_sum(f, policy)
    rhs = _gauss_sum(fourier_gaussian(f), policy)
    return abs(lhs.value - rhs.value), lhs.tail_bound + rhs.tail_bound, lhs.value, rhs.value


# the character nu_S -----------------------------------------------------------------

def level(S):
    """Smallest q > 0 with q S^{-1} even (integral with even diagonal)."""
    Sm = _smat(S)
    Si = Sm.inv()
    den = sympy.ilcm(1, *[sympy.Rational(v).q for v in Si])
    for q in range(1, 2 * int(den) + 1):
        T = q * Si
        if all(v.is_integer for v in T) and all(T[i, i] % 2 == 0 for i in range(T.shape[0])):
            return q
    raise DomainError("no level found")


def random_gamma0(q, rng, size=20):
    """A random element of Gamma_0(q) in SL(2, Z) with C = q k."""
    while True:
        k = int(rng.integers(-size, size + 1))
        cc = q * k
        d = int(rng.integers(-size, size + 1))
        if math.gcd(cc, d) != 1:
            continue
        # a d - b c = 1
        g, x, y = _egcd(d, -cc)
        if g == -1:
            x, y = -x, -y
        a, b = x, y
        t = int(rng.integers(-3, 4))
        a, b = a + t * cc, b + t * d
        M = np.array([[a, b], [cc, d]], dtype=np.int64)
        if round(np.linalg.det(M)) == 1:
            return M


def _egcd(a, b):
    if b == 0:
        return (a, 1, 0) if a >= 0 else (-a, -1, 0)
    g, x, y = _egcd(b, a % b)
    return g, y, x - (a // b) * y


def nu_ratio(S, gamma, samples=3, rng=None, policy=DEFAULT_POLICY):
    """theta_S(gamma Omega) / (det(C Omega + D)^{m/2} theta_S(Omega)) at a few random Omega.

    Returns (values, max |nu| deviation from 1, max pairwise deviation).
    """
    from .symplectic import act
    from .theta import theta_S
    rng = np.random.default_rng(0) if rng is None else rng
    S = np.asarray(as_matrix(S))
    m = S.shape[0]
    gamma = np.asarray(gamma)
    n = gamma.shape[0] // 2
    vals = []
    tries = 0
    while len(vals) < samples:
        tries += 1
        if tries > 50 * samples:
            raise DomainError("could not find sample points with |theta_S| >= 1e-6")
        if n == 1 and gamma[1, 0] != 0:
            # near the cusp -d/c both Omega and gamma Omega keep Im of size 1/|c|
            cc, d = float(gamma[1, 0]), float(gamma[1, 1])
            t = rng.uniform(0.7, 1.4)
            Om = np.array([[-d / cc + rng.uniform(-0.3, 0.3) / abs(cc) + 1j * t / abs(cc)]])
        else:
            X = rng.uniform(-0.5, 0.5, (n, n))
            Y = rng.uniform(0.6, 1.4, (n, n)) * 0.2
            Y = (Y + Y.T) / 2 + np.eye(n) * rng.uniform(0.8, 1.5)
            Om = (X + X.T) / 2 + 1j * Y
        base = theta_S(S, Om, policy).value
        if abs(base) < 1e-6:
            continue
        top = theta_S(S, act(gamma, Om), policy).value
        vals.append(top / (automorphic_factor(gamma, Om, m) * base))
    mod = max(abs(abs(v) - 1) for v in vals)
    spread = max(abs(a - b) for a in vals for b in vals)
    return vals, mod, spread
