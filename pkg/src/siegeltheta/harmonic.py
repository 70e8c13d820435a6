"""Polynomials on C^(m,n), pluriharmonicity and theta series with harmonic coefficients.

Polynomials are sympy Polys over the Gaussian rationals QQ_I in the
variables z_{kj} (row-major, 1-based names).  The pairing
<P, Q> = (P(d) Q)(0) and the orthogonal splitting P = H(S) + I are exact;
floating point only enters when a polynomial is evaluated inside a lattice
sum.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import itertools
import math

import numpy as np
import sympy
from sympy import QQ, QQ_I
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.sdm import SDM

from .foundation import DomainError, StructuralError, as_matrix, check_siegel_point, is_positive_definite
from .symplectic import act, blocks
from .theta import DEFAULT_POLICY, ThetaResult, _kron_sym, enumerate_ellipsoid, lattice_sum


@lru_cache(maxsize=None)
def zvars(m, n):
    """Flat tuple of the symbols z_{kj}, row-major."""
    return tuple(sympy.Symbol(f"z_{k + 1}_{j + 1}") for k in range(m) for j in range(n))


def zmatrix(m, n):
    return sympy.Matrix(m, n, list(zvars(m, n)))


class Polynomial:
    """Polynomial on C^(m,n) with Gaussian-rational coefficients."""

    def __init__(self, expr, m, n):
        self.m, self.n = m, n
        if isinstance(expr, sympy.Poly):
            if expr.gens != zvars(m, n):
                expr = expr.as_expr()
            else:
                self.poly = expr.set_domain(QQ_I)
                return
        self.poly = sympy.Poly(sympy.expand(sympy.sympify(expr)), *zvars(m, n), domain=QQ_I)

    @classmethod
    def from_terms(cls, terms, m, n):
        """Build from {exponent tuple (flat, row-major): coefficient}."""
        gens = zvars(m, n)
        expr = sum(sympy.nsimplify(c) * sympy.Mul(*[g ** e for g, e in zip(gens, ex)]) for ex, c in terms.items())
        return cls(expr, m, n)

    def to_json(self):
        """[{"coef": [num, den, num_i, den_i], "exps": [[k, j, e], ...]}, ...] with 1-based k, j."""
        out = []
        for ex, c in sorted(self.terms().items()):
            re, im = QQ.to_sympy(c.x), QQ.to_sympy(c.y)
            exps = [[i // self.n + 1, i % self.n + 1, e] for i, e in enumerate(ex) if e]
            out.append({"coef": [int(re.p), int(re.q), int(im.p), int(im.q)], "exps": exps})
        return out

    @classmethod
    def from_json(cls, data, m, n):
        gens = zvars(m, n)
        expr = sympy.Integer(0)
        for t in data:
            a, b, c, d = t["coef"]
            mono = sympy.Mul(*[gens[(k - 1) * n + (j - 1)] ** e for k, j, e in t["exps"]])
            expr += (sympy.Rational(a, b) + sympy.I * sympy.Rational(c, d)) * mono
        return cls(expr, m, n)

    @property
    def gens(self):
        return zvars(self.m, self.n)

    def terms(self):
        """{exponent tuple: QQ_I coefficient}, no zero coefficients."""
        return {ex: c for ex, c in self.poly.rep.to_dict().items() if c}

    def is_zero(self):
        return self.poly.is_zero

    def total_degree(self):
        return -1 if self.is_zero() else self.poly.total_degree()

    def is_homogeneous(self):
        return self.is_zero() or self.poly.is_homogeneous

    def homogeneous_components(self):
        parts = {}
        for ex, c in self.terms().items():
            parts.setdefault(sum(ex), {})[ex] = c
        return {d: self._from_qqi(t) for d, t in sorted(parts.items())}

    def _from_qqi(self, terms):
        p = sympy.Poly.from_dict(terms, *self.gens, domain=QQ_I) if terms else sympy.Poly(0, *self.gens, domain=QQ_I)
        return Polynomial(p, self.m, self.n)

    def as_expr(self):
        return self.poly.as_expr()

    def __add__(self, other):
        return Polynomial(self.poly + other.poly, self.m, self.n)

    def __sub__(self, other):
        return Polynomial(self.poly - other.poly, self.m, self.n)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return Polynomial(self.poly * other.poly, self.m, self.n)
        return Polynomial(self.poly * sympy.nsimplify(other), self.m, self.n)

    def __eq__(self, other):
        return isinstance(other, Polynomial) and (self.poly - other.poly).is_zero

    def __hash__(self):
        return hash(tuple(sorted(self.terms())))

    def __repr__(self):
        return f"Polynomial({self.as_expr()}, m={self.m}, n={self.n})"

    def diff(self, k, j):
        return Polynomial(self.poly.diff(self.gens[k * self.n + j]), self.m, self.n)

    def coefficient_l1(self):
        return float(sum(abs(complex(QQ_I.to_sympy(c))) for c in self.terms().values()))

    def evaluate(self, V):
        """Values at an array of points of shape (count, m, n) (or a single m x n point)."""
        V = np.asarray(V, dtype=complex)
        single = V.ndim == 2
        if single:
            V = V[None]
        flat = V.reshape(V.shape[0], -1)
        out = np.zeros(V.shape[0], dtype=complex)
        for ex, c in self.terms().items():
            t = np.full(V.shape[0], complex(QQ_I.to_sympy(c)))
            for i, e in enumerate(ex):
                if e:
                    t = t * flat[:, i] ** e
            out += t
        return out[0] if single else out

    def compose_right(self, M):
        """Z -> P(Z M) for an n x n matrix M (exact if M is exact, else complex floats)."""
        M = sympy.Matrix(np.asarray(M).tolist())
        Z = zmatrix(self.m, self.n) * M
        subs = dict(zip(self.gens, list(Z)))
        expr = sympy.expand(self.as_expr().subs(subs, simultaneous=True))
        return expr


def differential_operator(Q, P):
    """Q(d) P, with d = (d/dz_{kj})."""
    out = sympy.Poly(0, *P.gens, domain=QQ_I)
    for ex, c in Q.terms().items():
        t = P.poly
        for g, e in zip(P.gens, ex):
            if e:
                t = t.diff((g, e))
        out += t * QQ_I.to_sympy(c)
    return Polynomial(out, P.m, P.n)


def pairing(P, Q):
    """<P, Q> = (P(d) Q)(0); monomials pair to a! delta_{a,b}."""
    if (P.m, P.n) != (Q.m, Q.n):
        raise StructuralError("polynomials live on different spaces")
    tq = Q.terms()
    total = QQ_I.zero
    for ex, c in P.terms().items():
        d = tq.get(ex)
        if d:
            total += c * d * QQ_I(math.prod(math.factorial(e) for e in ex))
    return QQ_I.to_sympy(total)


# pluriharmonicity ---------------------------------------------------------------

def _exact_inverse(S):
    Sm = sympy.Matrix(np.asarray(as_matrix(S)).tolist()).applyfunc(sympy.nsimplify)
    if Sm != Sm.T or not is_positive_definite(np.array(Sm.tolist(), dtype=object)):
        raise DomainError("S must be rational, symmetric and positive definite")
    return Sm.inv()


def h_generators(S, n):
    """{(i, j): h_ij} for i <= j, h_ij = sum_{k,l} t_kl z_ki z_lj with T = S^{-1}."""
    T = _exact_inverse(S)
    m = T.shape[0]
    Z = zmatrix(m, n)
    out = {}
    for i in range(n):
        for j in range(i, n):
            e = sum(T[k, l] * Z[k, i] * Z[l, j] for k in range(m) for l in range(m))
            out[(i, j)] = Polynomial(e, m, n)
    return out


def is_pluriharmonic(P, S):
    """True iff h_ij(d) P = 0 for all i <= j."""
    return all(differential_operator(h, P).is_zero() for h in h_generators(S, P.n).values())


def _monomials(N, d):
    """Exponent tuples of total degree d in N variables (lexicographically decreasing)."""
    if N == 0:
        return [()] if d == 0 else []
    out = []

    def rec(i, rem, cur):
        if i == N - 1:
            out.append(tuple(cur + [rem]))
            return
        for e in range(rem, -1, -1):
            rec(i + 1, rem - e, cur + [e])

    rec(0, d, [])
    return out


def dim_polynomials(m, n, d):
    N = m * n
    return math.comb(d + N - 1, N - 1)


def _ideal_spanning_rows(S, m, n, d):
    """Sparse vectors (in the degree-d monomial basis) of f * h_ij, f a monomial of degree d - 2."""
    hs = h_generators(S, n)
    basis = _monomials(m * n, d)
    index = {ex: i for i, ex in enumerate(basis)}
    rows, labels = [], []
    for (i, j), h in hs.items():
        ht = h.terms()
        for f in _monomials(m * n, d - 2) if d >= 2 else []:
            row = {}
            for ex, c in ht.items():
                e = tuple(a + b for a, b in zip(ex, f))
                row[index[e]] = row.get(index[e], QQ.zero) + QQ.convert(QQ_I.to_sympy(c))
            row = {k: v for k, v in row.items() if v}
            rows.append(row)
            labels.append((f, (i, j)))
    return rows, labels, basis


def _derivative_rows(S, m, n, d):
    """Matrix of P -> (h_ij(d) P)_{i<=j} from P_d to a sum of copies of P_{d-2}, one row per input monomial."""
    hs = h_generators(S, n)
    basis = _monomials(m * n, d)
    low = {ex: i for i, ex in enumerate(_monomials(m * n, d - 2))} if d >= 2 else {}
    width = len(low)
    rows = {}
    for r, ex in enumerate(basis):
        row = {}
        for b, (key, h) in enumerate(sorted(hs.items())):
            for hex_, c in h.terms().items():
                if all(x >= y for x, y in zip(ex, hex_)):
                    coef = math.prod(math.factorial(x) // math.factorial(x - y) for x, y in zip(ex, hex_))
                    e2 = tuple(x - y for x, y in zip(ex, hex_))
                    col = b * width + low[e2]
                    row[col] = row.get(col, QQ.zero) + QQ.convert(QQ_I.to_sympy(c)) * coef
        row = {k: v for k, v in row.items() if v}
        if row:
            rows[r] = row
    return rows, (len(basis), len(hs) * width)


def _rank(rows, shape):
    rows = {i: r for i, r in enumerate(rows)} if isinstance(rows, list) else rows
    rows = {i: r for i, r in rows.items() if r}
    if not rows:
        return 0
    _, piv = SDM(rows, shape, QQ).rref()
    return len(piv)


def ideal_dimension(S, m, n, d):
    """dim I_d as the rank of the multiplication map (f_ij) -> sum f_ij h_ij."""
    if d < 2:
        return 0
    rows, _, basis = _ideal_spanning_rows(S, m, n, d)
    return _rank(rows, (len(rows), len(basis)))


def harmonic_dimension(S, m, n, d):
    """dim H(S)_d as the kernel dimension of P -> (h_ij(d) P)."""
    if d < 2:
        return dim_polynomials(m, n, d)
    rows, shape = _derivative_rows(S, m, n, d)
    return shape[0] - _rank(rows, shape)


def dimension_bookkeeping(S, m, n, d):
    """(dim P_d, dim H(S)_d, dim I_d), each computed independently."""
    return dim_polynomials(m, n, d), harmonic_dimension(S, m, n, d), ideal_dimension(S, m, n, d)


# decomposition -------------------------------------------------------------------

@dataclass
class HarmonicDecomposition:
    h: Polynomial
    ideal_part: Polynomial
    certificates: list = field(default_factory=list)


def _decompose_homogeneous(P, S, d):
    m, n = P.m, P.n
    zero = Polynomial(0, m, n)
    if d < 2:
        return P, zero, []
    rows, labels, basis = _ideal_spanning_rows(S, m, n, d)
    # independent subset of the spanning set: pivot columns of the transposed system
    cols = {}
    for r, row in enumerate(rows):
        for c, v in row.items():
            cols.setdefault(c, {})[r] = v
    _, piv = SDM(cols, (len(basis), len(rows)), QQ).rref()
    gens = [rows[p] for p in piv]
    glabels = [labels[p] for p in piv]
    if not gens:
        return P, zero, []
    weight = [QQ(math.prod(math.factorial(e) for e in ex)) for ex in basis]
    k = len(gens)
    G = {}
    for a in range(k):
        ra = gens[a]
        row = {}
        for b in range(k):
            rb = gens[b]
            small, big = (ra, rb) if len(ra) <= len(rb) else (rb, ra)
            s = sum((v * big[c] * weight[c] for c, v in small.items() if c in big), QQ.zero)
            if s:
                row[b] = s
        G[a] = row
    index = {ex: i for i, ex in enumerate(basis)}
    pt = P.terms()
    re = [QQ.zero] * len(basis)
    im = [QQ.zero] * len(basis)
    for ex, c in pt.items():
        re[index[ex]] = QQ.convert(c.x)
        im[index[ex]] = QQ.convert(c.y)
    rhs = []
    for g in gens:
        rhs.append([sum((v * re[c] * weight[c] for c, v in g.items()), QQ.zero),
                    sum((v * im[c] * weight[c] for c, v in g.items()), QQ.zero)])
    Gm = DomainMatrix.from_rep(SDM(G, (k, k), QQ)).to_dense()
    sol = Gm.lu_solve(DomainMatrix(rhs, (k, 2), QQ)).to_Matrix()
    ideal_terms = {}
    certs = []
    for a in range(k):
        coef = QQ_I(QQ.from_sympy(sol[a, 0]), QQ.from_sympy(sol[a, 1]))
        if not coef:
            continue
        certs.append((glabels[a][0], glabels[a][1], QQ_I.to_sympy(coef)))
        for c, v in gens[a].items():
            ideal_terms[basis[c]] = ideal_terms.get(basis[c], QQ_I.zero) + coef * QQ_I.convert(v)
    ideal_terms = {e: c for e, c in ideal_terms.items() if c}
    ideal = P._from_qqi(ideal_terms)
    return P - ideal, ideal, certs


def decompose(P, S):
    """Split P = h + i with h pluriharmonic and i in the ideal I, degree by degree.

    The ideal part is the orthogonal projection onto I_d for the pairing,
    found by solving the Gram system over Q on an independent subset of
    {f h_ij}; real and imaginary parts are solved separately because the
    pairing and the generators are real.
    """
    m, n = P.m, P.n
    h, ideal = Polynomial(0, m, n), Polynomial(0, m, n)
    certs = []
    for d, comp in P.homogeneous_components().items():
        hd, idd, cd = _decompose_homogeneous(comp, S, d)
        h, ideal = h + hd, ideal + idd
        certs.extend((d,) + c for c in cd)
    return HarmonicDecomposition(h, ideal, certs)


# theta series with harmonic coefficients -------------------------------------------

def _weight_bound(P, scale=1.0):
    k = max(P.total_degree(), 0)
    return P.coefficient_l1() * max(1.0, scale) ** k, k


def theta_harmonic(S, P, alpha, beta, Omega, Z=None, policy=DEFAULT_POLICY, poly_map=None):
    """theta_{S,P}[alpha, beta](Omega, Z) = sum over N in alpha + Z^(m,n) of
    e^{2 pi i sigma(ᵗN beta)} P(N) e^{pi i sigma(ᵗN S N Omega + 2 ᵗN Z)}.

    ``poly_map`` optionally replaces P(N) by P(N M) for an n x n matrix M.
    """
    Om = check_siegel_point(Omega)
    Sf = np.asarray(as_matrix(S), dtype=float)
    m, n = Sf.shape[0], Om.shape[0]
    if (P.m, P.n) != (m, n):
        raise StructuralError("polynomial has the wrong shape")
    alpha = np.asarray(as_matrix(alpha), dtype=float).reshape(m, n)
    beta = np.asarray(as_matrix(beta), dtype=float).reshape(m, n)
    Z = np.zeros((m, n), dtype=complex) if Z is None else np.asarray(as_matrix(Z), dtype=complex)
    W = np.linalg.solve(Sf, beta + Z)
    scale = 1.0
    if poly_map is not None:
        Mm = np.asarray(poly_map, dtype=complex)
        scale = float(np.linalg.norm(Mm, 2))

        def weight(V):
            return P.evaluate(V @ Mm)
    else:
        def weight(V):
            return P.evaluate(V)
    wb = _weight_bound(P, scale)
    if P.total_degree() <= 0:
        r = lattice_sum(Sf, Om, alpha, W, policy)
        c = complex(QQ_I.to_sympy(P.terms().get((0,) * (m * n), QQ_I.zero))) if not P.is_zero() else 0j
        return ThetaResult(c * r.value, abs(c) * r.tail_bound, r.radius, r.terms)
    return lattice_sum(Sf, Om, alpha, W, policy, weight=weight, weight_bound=wb)


def theta_transform_residual(S, P, alpha, beta, gamma, Omega, policy=DEFAULT_POLICY, corrected=False):
    """Residual of theta_{S,P}[a,b](Omega) = det(C Omega + D)^{-m/2} theta_{S,P~}[a,b](gamma Omega).

    The literal statement uses P~(Z) = P(Z (C Omega + D)); with
    ``corrected=True`` P~(Z) = P(Z ᵗ(C Omega + D)^{-1}) is used instead, which
    is what the chain rule gives for a homogeneous P.  The residual is
    |lhs - rhs| / max(|lhs|, |rhs|, 1).
    """
    Om = check_siegel_point(Omega)
    Sf = np.asarray(as_matrix(S), dtype=float)
    m = Sf.shape[0]
    _, _, C, D = (np.asarray(X, dtype=complex) for X in blocks(as_matrix(gamma)))
    J = C @ Om + D
    Mmap = np.linalg.inv(J).T if corrected else J
    lhs = theta_harmonic(S, P, alpha, beta, Om, policy=policy).value
    rhs_theta = theta_harmonic(S, P, alpha, beta, act(gamma, Om), policy=policy, poly_map=Mmap).value
    detJ = complex(np.linalg.det(J))
    if m % 2 == 0:
        fac = detJ ** (-(m // 2))
    else:
        fac = complex(np.sqrt(detJ)) ** (-m)
    rhs = fac * rhs_theta
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1.0)


def derivative_identity_residual(S, P, alpha, beta, Omega, radius=0.4, points=24, policy=DEFAULT_POLICY):
    """Residual of (2 pi i)^{-k} (P(d) theta_S[a,b])(Omega, 0) = theta_{S,P}[a,b](Omega).

    The left side is computed without the termwise formula: theta_S[a,b]
    is evaluated on a torus |z_kj| = radius and the Taylor coefficients at
    Z = 0 are extracted by the trapezoid rule for the Cauchy integral (an
    FFT over the grid).
    """
    Om = check_siegel_point(Omega)
    Sf = np.asarray(as_matrix(S), dtype=float)
    m, n = Sf.shape[0], Om.shape[0]
    d = m * n
    if not P.is_homogeneous():
        raise DomainError("P must be homogeneous")
    k = P.total_degree()
    alpha = np.asarray(as_matrix(alpha), dtype=float).reshape(m, n)
    beta = np.asarray(as_matrix(beta), dtype=float).reshape(m, n)
    # lattice points: enough for every Z on the torus
    K = _kron_sym(Sf, Om.imag)
    lam = np.linalg.eigvalsh(K)[0]
    base = lattice_sum(Sf, Om, alpha, np.linalg.solve(Sf, beta), policy)
    T = (base.radius ** 2) * lam
    grow = 2 * math.pi * radius * math.sqrt(d)
    T = T + 2 * grow * math.sqrt(T / lam) + grow ** 2 / lam + 10
    Ns = enumerate_ellipsoid(K, alpha.reshape(d), T)
    V = Ns.astype(float) + alpha.reshape(d)
    KO = _kron_sym(Sf, Om)
    base_terms = np.exp(1j * math.pi * np.einsum("ij,jk,ik->i", V, KO, V)) * np.exp(2j * math.pi * V @ beta.reshape(d))
    grid1 = radius * np.exp(2j * math.pi * np.arange(points) / points)
    shape = (points,) * d
    vals = np.empty(shape, dtype=complex)
    for idx in itertools.product(range(points), repeat=d):
        z = grid1[list(idx)]
        vals[idx] = np.sum(base_terms * np.exp(2j * math.pi * V @ z))
    coeffs = np.fft.fftn(vals) / points ** d
    lhs = 0j
    for ex, c in P.terms().items():
        taylor = coeffs[tuple(ex)] / radius ** sum(ex)
        lhs += complex(QQ_I.to_sympy(c)) * taylor * math.prod(math.factorial(e) for e in ex)
    lhs /= (2j * math.pi) ** k
    rhs = theta_harmonic(S, P, alpha, beta, Om, policy=policy).value
    return abs(lhs - rhs) / max(abs(rhs), 1.0)


# Freitag's theta series --------------------------------------------------------

def _is_even_unimodular(S):
    S = np.asarray(as_matrix(S))
    Si = np.round(np.asarray(S, dtype=float)).astype(np.int64)
    if not np.allclose(np.asarray(S, dtype=float), Si):
        return False
    return (np.all(np.diag(Si) % 2 == 0) and round(abs(np.linalg.det(Si))) == 1
            and is_positive_definite(Si))


def is_pluriharmonic_form(P, k, trials=3, seed=0):
    """Checks sum_k d^2P/dz_ki dz_kj = 0 exactly and P(ZA) = det(A)^k P(Z) on random diagonal A."""
    if not is_pluriharmonic(P, np.eye(P.m, dtype=int)):
        return False
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        a = [sympy.Rational(int(v), int(w)) for v, w in zip(rng.integers(1, 9, P.n), rng.integers(1, 9, P.n))]
        A = sympy.diag(*a)
        lhs = P.compose_right(A)
        if sympy.expand(lhs - sympy.prod(a) ** k * P.as_expr()) != 0:
            return False
    return True


def _sqrtm_spd(S):
    w, U = np.linalg.eigh(np.asarray(S, dtype=float))
    return (U * np.sqrt(w)) @ U.T


def freitag_theta(S, P, Omega, k, policy=DEFAULT_POLICY):
    """sum over N in Z^(m,n) of P(S^{1/2} N) e^{pi i sigma(ᵗN S N Omega)} for a pluriharmonic form P of type det^k."""
    if not _is_even_unimodular(S):
        raise DomainError("S must be even unimodular")
    if not is_pluriharmonic_form(P, k):
        raise DomainError("P is not a pluriharmonic form of type det^k")
    Om = check_siegel_point(Omega)
    Sf = np.asarray(as_matrix(S), dtype=float)
    m, n = Sf.shape[0], Om.shape[0]
    R = _sqrtm_spd(Sf)

    def weight(V):
        return P.evaluate(np.einsum("kl,clj->ckj", R, V))

    C, deg = _weight_bound(P, float(np.linalg.norm(R, 2)))
    return lattice_sum(Sf, Om, np.zeros((m, n)), np.zeros((m, n)), policy, weight=weight, weight_bound=(C, deg))


def freitag_modularity_ratio(S, P, Omega, k, policy=DEFAULT_POLICY):
    """(Theta(-Omega^{-1}) / Theta(Omega), det(Omega)^{k + m/2})."""
    Om = check_siegel_point(Omega)
    m = as_matrix(S).shape[0]
    a = freitag_theta(S, P, -np.linalg.inv(Om), k, policy).value
    b = freitag_theta(S, P, Om, k, policy).value
    # even unimodular forces 8 | m, so the weight k + m/2 is integral
    return a / b, complex(np.linalg.det(Om)) ** (k + m // 2)


# structural identities -------------------------------------------------------------

def gl_o_action(P, A, B):
    """(A, B) P (Z) = P(B^{-1} Z A), exact."""
    A = sympy.Matrix(np.asarray(A).tolist()).applyfunc(sympy.nsimplify)
    B = sympy.Matrix(np.asarray(B).tolist()).applyfunc(sympy.nsimplify)
    Z = zmatrix(P.m, P.n)
    Z2 = B.inv() * Z * A
    return Polynomial(P.as_expr().subs(dict(zip(P.gens, list(Z2))), simultaneous=True), P.m, P.n)


def corollary_residual(P, S, C, degree=6):
    """Exact check of P(d) e^{sigma(Z C ᵗZ S^{-1})} = P(2 S^{-1} Z C) e^{sigma(Z C ᵗZ S^{-1})} up to total degree ``degree``.

    Both sides are compared as truncated power series; returns the
    truncated difference (zero when the identity holds).
    """
    m, n = P.m, P.n
    T = _exact_inverse(S)
    C = sympy.Matrix(np.asarray(C).tolist()).applyfunc(sympy.nsimplify)
    Z = zmatrix(m, n)
    h = sympy.expand((Z * C * Z.T * T).trace())
    kdeg = max(P.total_degree(), 0)
    top = degree + kdeg
    E = sympy.Integer(0)
    hp = sympy.Integer(1)
    for j in range(top // 2 + 1):
        E += hp / sympy.factorial(j)
        hp = sympy.expand(hp * h)
    Epoly = Polynomial(E, m, n)
    lhs = differential_operator(P, Epoly)
    arg = 2 * T * Z * C
    Pt = sympy.expand(P.as_expr().subs(dict(zip(P.gens, list(arg))), simultaneous=True))
    rhs = Polynomial(sympy.expand(Pt * E), m, n)
    diff = lhs - rhs
    kept = {ex: c for ex, c in diff.terms().items() if sum(ex) <= degree}
    return diff._from_qqi(kept)
