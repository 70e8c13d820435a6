"""Theta series with certified truncation.

Every lattice sum here has the form

    sum over N in Z^(m,n) of w(V) exp(pi i sigma{S (V Omega ᵗV + 2 W ᵗV)}),   V = N + A,

and is evaluated by enumerating the integer points of an ellipsoid
Q(N + c) <= T, where Q(y) = sigma(S y Y ᵗy), Y = Im Omega and
c = A + Im W Y^{-1} is the point where |term| peaks.  The omitted tail is
bounded by

    e^{pi sigma(S ImW Y^{-1} ᵗImW)} g(T) sum_N e^{-pi theta Q(N)},
    g(T) = C (1 + delta + sqrt(T/lam))^k e^{-pi (1 - theta) T},

for a weight with |w(V)| <= C (1 + |V|)^k; the lattice sum on the right is
bounded both directly and through its Poisson dual, and theta in (0, 1) is
chosen to make the bound smallest.
"""

from dataclasses import dataclass
from fractions import Fraction
import itertools
import math

import numpy as np

from .foundation import (
    DomainError, StructuralError, TruncationError, as_matrix, check_siegel_point,
    halfplane_det_power, is_exact_array, is_positive_definite, to_fraction,
)
from .symplectic import act, blocks


@dataclass(frozen=True)
class TruncationPolicy:
    target_tail: float = 1e-14
    max_radius: int = 400

    def __post_init__(self):
        if not self.target_tail > 0:
            raise DomainError("target_tail must be positive")
        if self.max_radius < 1:
            raise DomainError("max_radius must be at least 1")


DEFAULT_POLICY = TruncationPolicy()


@dataclass(frozen=True)
class ThetaResult:
    value: complex
    tail_bound: float
    radius: float
    terms: int

    def __complex__(self):
        return complex(self.value)

    def to_json(self):
        return {"value": [self.value.real, self.value.imag], "tail_bound": self.tail_bound,
                "radius": self.radius, "terms": self.terms}


@dataclass(frozen=True, eq=False)
class ThetaSpec:
    S: np.ndarray
    A: np.ndarray
    B: np.ndarray
    policy: TruncationPolicy = DEFAULT_POLICY

    def __post_init__(self):
        S = as_matrix(self.S)
        if not is_positive_definite(S):
            raise DomainError("S must be symmetric positive definite")
        A, B = as_matrix(self.A, dtype=float), as_matrix(self.B, dtype=float)
        if A.shape != B.shape or A.shape[0] != S.shape[0]:
            raise StructuralError("characteristics must be m x n with m = deg S")
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)


# ellipsoid enumeration --------------------------------------------------------

def enumerate_ellipsoid(K, c, T):
    """All integer vectors N with (N + c)ᵀ K (N + c) <= T, as an int64 array.

    Fincke-Pohst recursion on the Cholesky factor, with the innermost
    coordinate produced as a whole integer range.
    """
    K = np.asarray(K, dtype=float)
    d = K.shape[0]
    c = np.asarray(c, dtype=float).reshape(d)
    R = np.linalg.cholesky(K).T  # K = Rᵀ R, R upper triangular
    qd = np.diag(R) ** 2
    qo = R / np.diag(R)[:, None]
    slack = 1e-9 * max(1.0, T)
    segments = []
    y = np.zeros(d)
    N = np.zeros(d, dtype=np.int64)

    def rec(i, rem):
        t = float(qo[i, i + 1:] @ y[i + 1:]) if i + 1 < d else 0.0
        r = math.sqrt(max(rem, 0.0) / qd[i])
        lo = math.ceil(-t - c[i] - r - 1e-12)
        hi = math.floor(-t - c[i] + r + 1e-12)
        if i == 0:
            if hi >= lo:
                segments.append((N[1:].copy(), lo, hi))
            return
        for k in range(lo, hi + 1):
            N[i] = k
            y[i] = k + c[i]
            rec(i - 1, rem - qd[i] * (y[i] + t) ** 2)

    rec(d - 1, T + slack)
    total = sum(hi - lo + 1 for _, lo, hi in segments)
    out = np.empty((total, d), dtype=np.int64)
    pos = 0
    for rest, lo, hi in segments:
        cnt = hi - lo + 1
        out[pos:pos + cnt, 0] = np.arange(lo, hi + 1)
        out[pos:pos + cnt, 1:] = rest
        pos += cnt
    Y = out + c
    keep = np.einsum("ij,jk,ik->i", Y, K, Y) <= T + slack
    return out[keep]


def _kron_sym(S, Y):
    """Matrix of V -> sigma(S V Y ᵗV) on row-major vec(V)."""
    return np.kron(S, Y)


def _lattice_gauss_bound(lmin, lmax, det, d, theta):
    """Upper bound for sum_N exp(-pi theta Q(N + c)) valid for every shift c."""
    direct = (1 + 1 / math.sqrt(theta * lmin)) ** d
    dual = (theta ** d * det) ** -0.5 * (1 + math.sqrt(theta * lmax)) ** d
    return min(direct, dual)


_THETAS = (0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


def tail_bound(T, eig, d, pref, delta=0.0, degree=0, const=1.0):
    """Certified bound on the sum of |term| over Q(N + c) > T."""
    lmin, lmax, det = eig
    best = math.inf
    for th in _THETAS:
        if T < degree / (2 * math.pi * (1 - th)):
            continue
        log_g = math.log(const) + degree * math.log1p(delta + math.sqrt(T / lmin)) - math.pi * (1 - th) * T
        b = pref * math.exp(log_g) * _lattice_gauss_bound(lmin, lmax, det, d, th)
        best = min(best, b)
    return best


def lattice_sum(S, Omega, A, W, policy=DEFAULT_POLICY, weight=None, weight_bound=(1.0, 0)):
    """sum_N w(N + A) exp(pi i sigma{S ((N+A) Omega ᵗ(N+A) + 2 W ᵗ(N+A))}).

    ``weight`` maps an array of shape (count, m, n) of the points V = N + A to
    complex weights, and ``weight_bound = (C, k)`` certifies
    |w(V)| <= C (1 + |V|)^k with |V| the Frobenius norm.
    """
    Om = check_siegel_point(Omega)
    S = np.asarray(as_matrix(S), dtype=float)
    m, n = S.shape[0], Om.shape[0]
    A = np.asarray(as_matrix(A), dtype=float).reshape(m, n)
    W = np.asarray(as_matrix(W), dtype=complex).reshape(m, n)
    if not np.all(np.isfinite(W)) or not np.all(np.isfinite(A)):
        raise DomainError("non-finite characteristic or argument")
    Y = Om.imag
    d = m * n
    K = _kron_sym(S, Y)
    ev = np.linalg.eigvalsh(K)
    eig = (float(ev[0]), float(ev[-1]), float(np.prod(ev)))
    if eig[0] <= 0:
        raise DomainError("S and Im Omega must be positive definite")
    V0 = W.imag @ np.linalg.inv(Y)
    c = A + V0
    pref = math.exp(math.pi * float(np.trace(S @ V0 @ Y @ V0.T)))
    C, k = weight_bound
    delta = float(np.linalg.norm(c - A))
    target = policy.target_tail
    T = max(1.0, k / (2 * math.pi * 0.5))
    while tail_bound(T, eig, d, pref, delta, k, C) > target:
        T *= 1.1
        if math.sqrt(T / eig[0]) > policy.max_radius:
            Tcap = eig[0] * policy.max_radius ** 2
            raise TruncationError("tail target not reached within max_radius",
                                  achieved_bound=tail_bound(Tcap, eig, d, pref, delta, k, C))
    Ns = enumerate_ellipsoid(K, c.reshape(d), T)
    V = Ns.astype(float) + A.reshape(d)
    KO = _kron_sym(S, Om)
    lin = 2 * (S @ W).reshape(d)
    expo = 1j * math.pi * (np.einsum("ij,jk,ik->i", V, KO, V) + V @ lin)
    terms = np.exp(expo)
    if weight is not None:
        terms = terms * np.asarray(weight(V.reshape(-1, m, n)), dtype=complex)
    val = complex(math.fsum(terms.real), math.fsum(terms.imag))
    return ThetaResult(val, tail_bound(T, eig, d, pref, delta, k, C), math.sqrt(T / eig[0]), int(len(Ns)))


# theta functions --------------------------------------------------------------

def theta_char(spec, Omega, W):
    """theta^(S)[A, B](Omega, W) = sum_N e^{pi i sigma{S((N+A) Omega ᵗ(N+A) + 2 (W+B) ᵗ(N+A))}}."""
    W = np.asarray(as_matrix(W), dtype=complex)
    if W.shape != spec.A.shape:
        raise StructuralError("W must have the shape of the characteristics")
    return lattice_sum(spec.S, Omega, spec.A, W + spec.B, spec.policy)


def _rel(x, y, floor=1e-300):
    """|x - y| relative to the larger of |x|, |y| (and ``floor``)."""
    return abs(x - y) / max(abs(x), abs(y), floor)


def _e(x):
    return complex(np.exp(1j * math.pi * x))


def _sig(M):
    return complex(np.trace(M))


def theta_law_residuals(spec, Omega, W, lam=None, mu=None, xi=None, eta=None):
    """Relative residuals of the quasi-periodicity laws (theta.1)-(theta.5).

    ``lam, mu`` are real shifts for (theta.2); ``xi, eta`` are integral shifts
    for (theta.4) and (theta.5), which also require integral S.
    """
    S = np.asarray(spec.S, dtype=float)
    A, B = spec.A, spec.B
    Om = check_siegel_point(Omega)
    W = np.asarray(as_matrix(W), dtype=complex)
    pol = spec.policy
    th = theta_char(spec, Om, W).value
    scale = max(abs(th), 1e-300)
    out = {}
    # (theta.1)
    neg = ThetaSpec(spec.S, -A, -B, pol)
    out["theta1"] = abs(theta_char(spec, Om, -W).value - theta_char(neg, Om, W).value) / scale
    # (theta.3)
    zero = ThetaSpec(spec.S, np.zeros_like(A), np.zeros_like(B), pol)
    f3 = _e(_sig(S @ (A @ Om @ A.T + 2 * (W + B) @ A.T)))
    out["theta3"] = abs(th - f3 * theta_char(zero, Om, W + A @ Om + B).value) / scale
    if lam is not None:
        lam, mu = as_matrix(lam, dtype=float), as_matrix(mu, dtype=float)
        lhs = theta_char(spec, Om, W + lam @ Om + mu).value
        f2 = _e(-_sig(S @ (lam @ Om @ lam.T + 2 * (W + mu) @ lam.T))) * _e(-2 * _sig(S @ B @ lam.T))
        shifted = ThetaSpec(spec.S, A + lam, B + mu, pol)
        out["theta2"] = _rel(lhs, f2 * theta_char(shifted, Om, W).value)
    if xi is not None:
        if not is_exact_array(spec.S) and not np.allclose(S, np.round(S)):
            raise DomainError("(theta.4) and (theta.5) need integral S")
        xi, eta = as_matrix(xi, dtype=float), as_matrix(eta, dtype=float)
        shifted = ThetaSpec(spec.S, A + xi, B + eta, pol)
        out["theta4"] = abs(theta_char(shifted, Om, W).value - _e(2 * _sig(S @ A @ eta.T)) * th) / scale
        out["theta5"] = theta_quasiperiodicity_residual(spec, Om, W, xi, eta)
    return out


def theta_quasiperiodicity_residual(spec, Omega, W, xi, eta):
    """(theta.5): |theta(W + xi Omega + eta) - factor theta(W)|, relative to the larger side."""
    S = np.asarray(spec.S, dtype=float)
    A, B = spec.A, spec.B
    Om = check_siegel_point(Omega)
    W = np.asarray(as_matrix(W), dtype=complex)
    xi, eta = as_matrix(xi, dtype=float), as_matrix(eta, dtype=float)
    if not (np.allclose(xi, np.round(xi)) and np.allclose(eta, np.round(eta))):
        raise DomainError("xi and eta must be integral")
    th = theta_char(spec, Om, W).value
    lhs = theta_char(spec, Om, W + xi @ Om + eta).value
    fac = _e(-_sig(S @ (xi @ Om @ xi.T + 2 * W @ xi.T))) * _e(2 * _sig(S @ (A @ eta.T - B @ xi.T)))
    return _rel(lhs, fac * th)


def theta_S(S, Omega, policy=DEFAULT_POLICY):
    """sum over xi in Z^(m,n) of e^{pi i sigma(S xi Omega ᵗxi)}."""
    S = as_matrix(S)
    n = as_matrix(Omega).shape[0]
    m = S.shape[0]
    return lattice_sum(S, Omega, np.zeros((m, n)), np.zeros((m, n)), policy)


def theta_SAB(S, A, B, Omega, policy=DEFAULT_POLICY):
    """sum over xi of e^{pi i sigma{S (xi + A/2) Omega ᵗ(xi + A/2) + ᵗB xi}}."""
    Sf = np.asarray(as_matrix(S), dtype=float)
    A = np.asarray(as_matrix(A), dtype=float)
    B = np.asarray(as_matrix(B), dtype=float)
    W = np.linalg.solve(Sf, B) / 2
    r = lattice_sum(Sf, Omega, A / 2, W, policy)
    ph = _e(-_sig(B.T @ A) / 2)
    return ThetaResult(ph * r.value, r.tail_bound, r.radius, r.terms)


def inversion_residual(S, Omega, policy=DEFAULT_POLICY):
    """Residual (relative once the values exceed 1) of theta_{S^{-1}}(-Omega^{-1}) = (det S)^{n/2} det(Omega/i)^{m/2} theta_S(Omega)."""
    Om = check_siegel_point(Omega)
    S = np.asarray(as_matrix(S), dtype=float)
    m, n = S.shape[0], Om.shape[0]
    lhs = theta_S(np.linalg.inv(S), -np.linalg.inv(Om), policy).value
    rhs = np.linalg.det(S) ** (n / 2) * halfplane_det_power(Om, Fraction(m, 2)) * theta_S(S, Om, policy).value
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1.0)


def char_inversion_residual(S, A, B, Omega, policy=DEFAULT_POLICY):
    """Residual (relative once the values exceed 1) of
    theta_{S^{-1};A,B}(-Omega^{-1}) = e^{-pi i sigma(ᵗA B)/2} (det S)^{n/2} det(Omega/i)^{m/2} theta_{S;B,-A}(Omega).
    """
    Om = check_siegel_point(Omega)
    S = np.asarray(as_matrix(S), dtype=float)
    A = np.asarray(as_matrix(A), dtype=float)
    B = np.asarray(as_matrix(B), dtype=float)
    m, n = S.shape[0], Om.shape[0]
    lhs = theta_SAB(np.linalg.inv(S), A, B, -np.linalg.inv(Om), policy).value
    rhs = (_e(-_sig(A.T @ B) / 2) * np.linalg.det(S) ** (n / 2)
           * halfplane_det_power(Om, Fraction(m, 2)) * theta_SAB(S, B, -A, Om, policy).value)
    # some characteristics make both sides vanish identically, hence the floor of 1
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1.0)


# thetanullwerte ----------------------------------------------------------------

@dataclass(frozen=True)
class IntCharacteristic:
    a: tuple
    b: tuple

    def __post_init__(self):
        a, b = tuple(int(v) for v in self.a), tuple(int(v) for v in self.b)
        if len(a) != len(b):
            raise StructuralError("a and b must have the same length")
        if any(v not in (0, 1) for v in a + b):
            raise DomainError("characteristic entries must be 0 or 1")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def parity(self):
        return sum(x * y for x, y in zip(self.a, self.b)) % 2

    @property
    def is_even(self):
        return self.parity == 0


def characteristics(n):
    for a in itertools.product((0, 1), repeat=n):
        for b in itertools.product((0, 1), repeat=n):
            yield IntCharacteristic(a, b)


def even_characteristics(n):
    return [ch for ch in characteristics(n) if ch.is_even]


def even_count_formula(n):
    return (2 ** n + 1) * 2 ** (n - 1)


def theta_null(Omega, char, policy=DEFAULT_POLICY, a=None, b=None):
    """theta(Omega; a, b) = sum over xi in Z^n of e^{pi i [ᵗ(xi + a/2) Omega (xi + a/2) + ᵗb xi]}.

    ``char`` is an IntCharacteristic; arbitrary integer vectors may be passed
    instead through ``a`` and ``b`` (then ``char`` is ignored).
    """
    if a is None:
        a, b = char.a, char.b
    a = np.asarray(a, dtype=float).reshape(1, -1)
    b = np.asarray(b, dtype=float).reshape(1, -1)
    return theta_SAB([[1]], a, b, Omega, policy)


def char_action(gamma, char):
    """gamma <> (a, b) = [[D, -C], [-B, A]] (a; b) + ((C ᵗD)_0; (A ᵗB)_0) mod 2."""
    g = np.asarray(as_matrix(gamma))
    if not np.allclose(np.asarray(g, dtype=float), np.round(np.asarray(g, dtype=float))):
        raise DomainError("gamma must be integral")
    g = np.round(np.asarray(g, dtype=float)).astype(np.int64)
    A, B, C, D = blocks(g)
    a = np.array(char.a, dtype=np.int64)
    b = np.array(char.b, dtype=np.int64)
    na = (D @ a - C @ b + np.diag(C @ D.T)) % 2
    nb = (-B @ a + A @ b + np.diag(A @ B.T)) % 2
    return IntCharacteristic(tuple(int(v) for v in na), tuple(int(v) for v in nb))


def translation_law_residual(Omega, char, S, policy=DEFAULT_POLICY):
    """|theta(Omega + S; a, b) - e^{pi i ᵗa S a/4} theta(Omega; a, b + S a + S_0)| / max(|lhs|, |rhs|, 1)."""
    Om = check_siegel_point(Omega)
    S = np.round(np.asarray(as_matrix(S), dtype=float)).astype(np.int64)
    a = np.array(char.a)
    b = np.array(char.b)
    lhs = theta_null(Om + S, None, policy, a=a, b=b).value
    b2 = b + S @ a + np.diag(S)
    rhs = _e(float(a @ S @ a) / 4) * theta_null(Om, None, policy, a=a, b=b2).value
    return _rel(lhs, rhs, 1.0)


DELTA_EXPONENT = {1: 8, 2: 2}
DELTA_WEIGHT = {1: 12, 2: 10}


def delta_n(Omega, policy=DEFAULT_POLICY):
    """Product over even characteristics of theta(Omega; a, b)^{k_n}, for n <= 2.

    The returned tail bound propagates the individual bounds through the
    product.
    """
    Om = check_siegel_point(Omega)
    n = Om.shape[0]
    if n not in DELTA_EXPONENT:
        raise DomainError("delta_n is implemented for n = 1 and n = 2")
    k = DELTA_EXPONENT[n]
    val = 1 + 0j
    upper = 1.0
    absval = 1.0
    terms = 0
    for ch in even_characteristics(n):
        r = theta_null(Om, ch, policy)
        val *= r.value ** k
        absval *= abs(r.value) ** k
        upper *= (abs(r.value) + r.tail_bound) ** k
        terms += r.terms
    return ThetaResult(val, upper - absval, float("nan"), terms)


def delta_modularity_residual(gamma, Omega, policy=DEFAULT_POLICY):
    """|Delta(gamma Omega) - det(C Omega + D)^w Delta(Omega)| / |Delta(gamma Omega)|."""
    Om = check_siegel_point(Omega)
    n = Om.shape[0]
    _, _, C, D = (np.asarray(X, dtype=complex) for X in blocks(as_matrix(gamma)))
    lhs = delta_n(act(gamma, Om), policy).value
    rhs = np.linalg.det(C @ Om + D) ** DELTA_WEIGHT[n] * delta_n(Om, policy).value
    return abs(lhs - rhs) / abs(lhs)


# lattices ---------------------------------------------------------------------

def e8_gram():
    """Gram matrix of the E8 root lattice (Cartan matrix, even unimodular)."""
    E = 2 * np.eye(8, dtype=np.int64)
    for a, b in [(0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (1, 3)]:
        E[a, b] = E[b, a] = -1
    return E


def count_vectors(S, norm):
    """Exact number of xi in Z^m with ᵗxi S xi = norm (S integral)."""
    S = np.asarray(S, dtype=np.int64)
    pts = enumerate_ellipsoid(S.astype(float), np.zeros(S.shape[0]), float(norm))
    q = np.einsum("ij,jk,ik->i", pts, S, pts)
    return int(np.count_nonzero(q == norm))


# second-degree characters --------------------------------------------------------

def _frac_matrix(M):
    M = np.asarray(as_matrix(M))
    if M.dtype.kind == "f":
        if not np.allclose(M, np.round(M)):
            raise DomainError("expected an exact matrix")
        M = np.round(M).astype(np.int64)
    return np.vectorize(to_fraction, otypes=[object])(M)


def _trace(M):
    return sum((M[i, i] for i in range(M.shape[0])), Fraction(0))


def psi_exponent(S, xi, eta):
    """x with psi_{S,Omega}(xi Omega + eta) = e^{pi i x}, x = sigma(S eta ᵗxi)."""
    S, xi, eta = _frac_matrix(S), _frac_matrix(xi), _frac_matrix(eta)
    return _trace(S @ eta @ xi.T)


def chi_exponent(S, A, B, xi, eta):
    """x with chi_{S,Omega,A,B}(xi Omega + eta) = e^{pi i x}, x = 2 sigma{S(A ᵗeta - B ᵗxi)}."""
    S, A, B, xi, eta = (_frac_matrix(v) for v in (S, A, B, xi, eta))
    return 2 * _trace(S @ (A @ eta.T - B @ xi.T))


def alternating_form(S, xi1, eta1, xi2, eta2):
    """A_{S,Omega}(l1, l2) = sigma{S (xi1 ᵗeta2 - eta1 ᵗxi2)}."""
    S, xi1, eta1, xi2, eta2 = (_frac_matrix(v) for v in (S, xi1, eta1, xi2, eta2))
    return _trace(S @ (xi1 @ eta2.T - eta1 @ xi2.T))


def _root_of_unity_gap(x):
    """|1 - e^{pi i x}| for rational x, exactly 0.0 when x is an even integer."""
    r = Fraction(x) % 2
    if r == 0:
        return 0.0
    return abs(1 - _e(float(r)))


def second_degree_character(S, xi1, eta1, xi2, eta2, A=None, B=None):
    """|psi(l1 + l2) - e^{pi i A(l1, l2)} psi(l1) psi(l2)| in exact exponent arithmetic.

    With characteristics A, B the twisted character psi * chi is tested
    instead.
    """
    S = _frac_matrix(S)
    m = S.shape[0]
    if np.any([v.denominator != 1 for v in S.flat]):
        raise DomainError("S must be integral")

    def ex(xi, eta):
        x = psi_exponent(S, xi, eta)
        if A is not None:
            x += chi_exponent(S, A, B, xi, eta)
        return x

    xi1, eta1, xi2, eta2 = (_frac_matrix(v) for v in (xi1, eta1, xi2, eta2))
    if xi1.shape[0] != m:
        raise StructuralError("lattice points must be m x n")
    lhs = ex(xi1 + xi2, eta1 + eta2)
    rhs = alternating_form(S, xi1, eta1, xi2, eta2) + ex(xi1, eta1) + ex(xi2, eta2)
    return _root_of_unity_gap(lhs - rhs)


# lattice representation theta --------------------------------------------------

def lattice_rep_theta(M, J, A_alpha, Omega, g, policy=DEFAULT_POLICY):
    """Phi_J^(M)[A_alpha, 0](Omega | (lambda, mu, kappa)).

    e^{2 pi i sigma{M(kappa - lambda ᵗmu)}} sum_N (lambda+N+A)^J
    e^{2 pi i sigma{M((lambda+N+A) Omega ᵗ(lambda+N+A) + 2 (lambda+N+A) ᵗmu)}}.
    """
    from .heisenberg import HeisenbergElement

    if not isinstance(g, HeisenbergElement):
        raise StructuralError("g must be a HeisenbergElement")
    g = g.to_circle()
    Mf = np.asarray(as_matrix(M), dtype=float)
    if not is_positive_definite(Mf) or not np.allclose(2 * Mf, np.round(2 * Mf)):
        raise DomainError("M must be positive definite and half-integral")
    Aa = np.asarray(as_matrix(A_alpha), dtype=float)
    if not np.allclose(2 * Mf @ Aa, np.round(2 * Mf @ Aa)):
        raise DomainError("A_alpha must lie in (2M)^{-1} Z^(m,n)")
    lam = np.asarray(g.lam, dtype=float)
    mu = np.asarray(g.mu, dtype=float)
    kap = np.asarray(g.kappa, dtype=float)
    m, n = lam.shape
    Jm = np.asarray(J, dtype=np.int64).reshape(m, n)
    k = int(Jm.sum())

    def weight(V):
        out = np.ones(V.shape[0], dtype=complex)
        for a in range(m):
            for b in range(n):
                if Jm[a, b]:
                    out = out * V[:, a, b] ** Jm[a, b]
        return out

    r = lattice_sum(2 * Mf, Omega, lam + Aa, mu, policy, weight=weight if k else None,
                    weight_bound=(1.0, k))
    ph = complex(np.exp(2j * math.pi * np.trace(Mf @ (kap - lam @ mu.T))))
    return ThetaResult(ph * r.value, r.tail_bound, r.radius, r.terms)


def lattice_rep_invariance_residual(M, J, A_alpha, Omega, gamma, g, policy=DEFAULT_POLICY):
    """|Phi(gamma o g) - Phi(g)| / max(|Phi(g)|, tiny) for integral gamma."""
    from .heisenberg import mul

    a = lattice_rep_theta(M, J, A_alpha, Omega, mul(gamma, g.to_circle()), policy).value
    b = lattice_rep_theta(M, J, A_alpha, Omega, g, policy).value
    return abs(a - b) / max(abs(b), 1e-300)
