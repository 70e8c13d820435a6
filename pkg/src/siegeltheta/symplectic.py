"""The symplectic group Sp(n, R) and the Siegel upper half-space H_n.

Action of Sp(n, R) on H_n, automorphic factors, the invariant distance via
the matrix cross-ratio, the Cayley transform onto the generalized unit
disk, Minkowski and Siegel reduction for n <= 2, the volume of the Siegel
fundamental domain and the Maslov index of Lagrangian triples.
"""

from fractions import Fraction
import math

import numpy as np
import sympy

from .foundation import (
    ConditioningError, ConvergenceError, DomainError, StructuralError,
    as_matrix, check_siegel_point, check_square, is_exact_array, to_fraction,
)


def J_matrix(n, dtype=int):
    """The standard alternating form J_n = [[0, I], [-I, 0]]."""
    Z = np.zeros((n, n), dtype=dtype)
    I = np.eye(n, dtype=dtype)
    return np.block([[Z, I], [-I, Z]])


def degree(M):
    M = check_square(M, "symplectic matrix")
    if M.shape[0] % 2:
        raise StructuralError("symplectic matrix must have even size")
    return M.shape[0] // 2


def blocks(M):
    """The n x n blocks (A, B, C, D) of M."""
    n = degree(M)
    return M[:n, :n], M[:n, n:], M[n:, :n], M[n:, n:]


def symplectic_defect(M):
    """ᵗM J M - J; exactly zero for exact symplectic input."""
    M = as_matrix(M)
    n = degree(M)
    if M.dtype == object or M.dtype.kind in "iu":
        J = J_matrix(n).astype(object)
        return M.T.astype(object) @ J @ M.astype(object) - J
    J = J_matrix(n, float)
    return M.T @ J @ M - J


def is_symplectic(M, tol=1e-12):
    D = symplectic_defect(M)
    if D.dtype == object:
        return all(v == 0 for v in D.flat)
    return float(np.abs(D).max()) <= tol * max(1.0, float(np.abs(M).max()) ** 2)


def translation(b):
    """t_b = [[I, b], [0, I]] for symmetric b."""
    b = as_matrix(b)
    n = b.shape[0]
    dt = b.dtype if b.dtype != bool else int
    I = np.eye(n, dtype=dt)
    return np.block([[I, b], [np.zeros((n, n), dtype=dt), I]])


def dilation(a):
    """d_a = [[ᵗa, 0], [0, a^{-1}]] for invertible a."""
    a = as_matrix(a)
    n = a.shape[0]
    if is_exact_array(a):
        ainv = np.array(sympy.Matrix(a.tolist()).inv().tolist(), dtype=object)
        ainv = np.vectorize(to_fraction, otypes=[object])(ainv)
        if all(v.denominator == 1 for v in ainv.flat):
            ainv = np.array([[int(v) for v in row] for row in ainv], dtype=object)
        aT = a.T.astype(object)
        Z = np.zeros((n, n), dtype=int).astype(object)
    else:
        ainv = np.linalg.inv(a)
        aT = a.T
        Z = np.zeros((n, n))
    return np.block([[aT, Z], [Z, ainv]])


def inversion(n, dtype=int):
    """sigma_n = [[0, -I], [I, 0]]."""
    Z = np.zeros((n, n), dtype=dtype)
    I = np.eye(n, dtype=dtype)
    return np.block([[Z, -I], [I, Z]])


def sp_inverse(M):
    """M^{-1} = [[ᵗD, -ᵗB], [-ᵗC, ᵗA]] for symplectic M."""
    A, B, C, D = blocks(as_matrix(M))
    return np.block([[D.T, -B.T], [-C.T, A.T]])


def _solve_right(X, Y, tol=1e-13):
    """X Y^{-1} with a conditioning check on Y."""
    if np.linalg.cond(Y) > 1 / tol:
        raise ConditioningError("C Omega + D is numerically singular")
    return np.linalg.solve(Y.T, X.T).T


def act(M, Omega):
    """(A Omega + B)(C Omega + D)^{-1}."""
    W = check_siegel_point(Omega)
    A, B, C, D = (np.asarray(X, dtype=complex) for X in blocks(as_matrix(M)))
    if A.shape != W.shape:
        raise StructuralError("degree of M does not match Omega")
    out = _solve_right(A @ W + B, C @ W + D)
    return (out + out.T) / 2


def act_exact(M, Omega):
    """Exact action for sympy matrices (rational complex entries)."""
    M = sympy.Matrix(M)
    n = M.shape[0] // 2
    A, B, C, D = M[:n, :n], M[:n, n:], M[n:, :n], M[n:, n:]
    Omega = sympy.Matrix(Omega)
    return ((A * Omega + B) * (C * Omega + D).inv()).applyfunc(sympy.nsimplify)


def automorphic_factor(M, Omega, weight_num=1):
    """J(M, Omega)^{m/2} with J(M, Omega) = det(C Omega + D).

    ``weight_num`` is m.  For even m the power is unambiguous; for odd m the
    principal square root of det(C Omega + D) is used.
    """
    W = check_siegel_point(Omega)
    _, _, C, D = (np.asarray(X, dtype=complex) for X in blocks(as_matrix(M)))
    j = complex(np.linalg.det(C @ W + D))
    m = int(weight_num)
    if m % 2 == 0:
        return j ** (m // 2)
    return complex(np.sqrt(j)) ** m


def im_transform(M, Omega):
    """Im(M Omega) via ᵗ(C Omega-bar + D)^{-1} Y (C Omega + D)^{-1}."""
    W = check_siegel_point(Omega)
    _, _, C, D = (np.asarray(X, dtype=complex) for X in blocks(as_matrix(M)))
    P = np.linalg.inv(C @ W + D)
    Q = np.linalg.inv(C @ W.conj() + D)
    return (Q.T @ W.imag @ P).real


def cross_ratio(Omega0, Omega1):
    """R = (W0 - W1)(W0 - W1-bar)^{-1}(W0-bar - W1-bar)(W0-bar - W1)^{-1}."""
    W0 = check_siegel_point(Omega0)
    W1 = check_siegel_point(Omega1)
    return (W0 - W1) @ np.linalg.inv(W0 - W1.conj()) @ (W0.conj() - W1.conj()) @ np.linalg.inv(W0.conj() - W1)


def geodesic_distance(Omega0, Omega1, tol=1e-9):
    """Invariant distance from the eigenvalues r_j of the cross-ratio.

    rho^2 = sum_j log^2((1 + sqrt r_j)/(1 - sqrt r_j)).
    """
    R = cross_ratio(Omega0, Omega1)
    r = np.linalg.eigvals(R)
    if np.abs(r.imag).max() > tol or r.real.min() < -tol or r.real.max() >= 1:
        raise ConditioningError(f"cross-ratio eigenvalues outside [0, 1): {r}")
    s = np.sqrt(np.clip(r.real, 0.0, None))
    return float(np.sqrt(np.sum((2 * np.arctanh(s)) ** 2)))


def cayley(W):
    """Psi(W) = i(I + W)(I - W)^{-1} from the disk D_n to H_n."""
    W = as_matrix(W, dtype=complex)
    n = W.shape[0]
    I = np.eye(n)
    if np.linalg.cond(I - W) > 1e13:
        raise DomainError("I - W is singular")
    out = 1j * _solve_right(I + W, I - W)
    return (out + out.T) / 2


def cayley_inv(Omega):
    """Psi^{-1}(Omega) = (Omega - iI)(Omega + iI)^{-1}."""
    W = check_siegel_point(Omega)
    I = np.eye(W.shape[0])
    out = _solve_right(W - 1j * I, W + 1j * I)
    return (out + out.T) / 2


def in_disk(W, tol=0.0):
    W = as_matrix(W, dtype=complex)
    H = np.eye(W.shape[0]) - W @ W.conj()
    H = (H + H.conj().T) / 2
    return bool(np.linalg.eigvalsh(H).min() > tol)


def cayley_conjugate(M):
    """M_* = T^{-1} M T = [[P, Q], [Q-bar, P-bar]] acting on D_n."""
    A, B, C, D = (np.asarray(X, dtype=float) for X in blocks(as_matrix(M)))
    P = ((A + D) + 1j * (B - C)) / 2
    Q = ((A - D) - 1j * (B + C)) / 2
    return np.block([[P, Q], [Q.conj(), P.conj()]])


def disk_act(Mstar, W):
    """(P W + Q)(Q-bar W + P-bar)^{-1} for M_* = [[P, Q], [Q-bar, P-bar]]."""
    W = as_matrix(W, dtype=complex)
    n = W.shape[0]
    P, Q, Qb, Pb = Mstar[:n, :n], Mstar[:n, n:], Mstar[n:, :n], Mstar[n:, n:]
    out = _solve_right(P @ W + Q, Qb @ W + Pb)
    return (out + out.T) / 2


# Maslov index -----------------------------------------------------------------

def lagrangian_check(L, tol=1e-9):
    """Validate an n x 2n basis of a Lagrangian subspace and return it."""
    L = as_matrix(L)
    n = L.shape[0]
    if L.shape[1] != 2 * n:
        raise StructuralError("Lagrangian basis must be n x 2n")
    if L.dtype == object or L.dtype.kind in "iu":
        F = sympy.Matrix(L.tolist())
        iso = F * sympy.Matrix(J_matrix(n)) * F.T
        if any(v != 0 for v in iso) or F.rank() != n:
            raise DomainError("subspace is not Lagrangian")
        return L
    Lf = L.astype(float)
    iso = Lf @ J_matrix(n, float) @ Lf.T
    if np.abs(iso).max() > tol * max(1.0, np.abs(Lf).max() ** 2) or np.linalg.matrix_rank(Lf) != n:
        raise DomainError("subspace is not Lagrangian")
    return L


def maslov_gram(L1, L2, L3):
    """Symmetrized Gram matrix of B(x1,x2) + B(x2,x3) + B(x3,x1) on L1+L2+L3."""
    n = as_matrix(L1).shape[0]
    exact = all(is_exact_array(L) for L in (L1, L2, L3))
    if exact:
        Ls = [sympy.Matrix(as_matrix(L).tolist()) for L in (L1, L2, L3)]
        J = sympy.Matrix(J_matrix(n))
        F = sympy.zeros(3 * n, 3 * n)
    else:
        Ls = [as_matrix(L).astype(float) for L in (L1, L2, L3)]
        J = J_matrix(n, float)
        F = np.zeros((3 * n, 3 * n))
    for i, j in ((0, 1), (1, 2), (2, 0)):
        block = Ls[i] * J * Ls[j].T if exact else Ls[i] @ J @ Ls[j].T
        F[i * n:(i + 1) * n, j * n:(j + 1) * n] = block
    return (F + F.T) / 2


def maslov_index(L1, L2, L3, rel_cutoff=1e-9):
    """Signature of the Maslov triple form.

    Exact (integer or rational) bases are handled with Descartes' rule of
    signs on the characteristic polynomial, which is exact for symmetric
    matrices since all roots are real.  Float bases count eigenvalues with
    |lambda| < rel_cutoff * ||Gram|| as zero.
    """
    for L in (L1, L2, L3):
        lagrangian_check(L)
    G = maslov_gram(L1, L2, L3)
    if isinstance(G, sympy.MatrixBase):
        return _exact_signature(G)
    ev = np.linalg.eigvalsh(G)
    cut = rel_cutoff * max(np.abs(G).max(), 1e-300)
    return int(np.sum(ev > cut) - np.sum(ev < -cut))


def _exact_signature(G):
    x = sympy.Symbol("x")
    p = sympy.Poly(G.charpoly(x).as_expr(), x)
    coeffs = [c for c in p.all_coeffs()]

    def changes(cs):
        cs = [c for c in cs if c != 0]
        return sum(1 for a, b in zip(cs, cs[1:]) if (a > 0) != (b > 0))

    pos = changes(coeffs)
    deg = len(coeffs) - 1
    neg = changes([c * (-1) ** (deg - k) for k, c in enumerate(coeffs)])
    return pos - neg


# Reduction theory (n <= 2) ------------------------------------------------------

def minkowski_reduce(Y, tol=1e-12):
    """Minkowski-reduce a positive definite Y of size 1 or 2.

    Returns (R, U) with U in GL(n, Z) and R = U Y ᵗU satisfying
    y11 <= y22, 2|y12| <= y11 and y12 >= 0 (Lagrange-Gauss reduction).
    """
    Y = as_matrix(Y, dtype=float)
    n = Y.shape[0]
    if n == 1:
        return Y.copy(), np.eye(1, dtype=int)
    if n != 2:
        raise StructuralError("Minkowski reduction is implemented for n <= 2 only")
    U = np.eye(2, dtype=int)
    R = Y.copy()
    for _ in range(10000):
        if R[0, 0] > R[1, 1] + tol * R[1, 1]:
            P = np.array([[0, 1], [1, 0]])
        else:
            q = int(np.round(R[0, 1] / R[0, 0]))
            if q == 0:
                break
            P = np.array([[1, 0], [-q, 1]])
        U = P @ U
        R = P @ R @ P.T
    else:
        raise ConvergenceError("Minkowski reduction did not terminate")
    if R[0, 1] < 0:
        P = np.diag([1, -1])
        U = P @ U
        R = P @ R @ P.T
    return (R + R.T) / 2, U


def is_minkowski_reduced(Y, tol=1e-10):
    Y = as_matrix(Y, dtype=float)
    if Y.shape[0] == 1:
        return True
    return bool(Y[0, 0] <= Y[1, 1] * (1 + tol) and 2 * abs(Y[0, 1]) <= Y[0, 0] * (1 + tol) and Y[0, 1] >= -tol)


def _siegel_candidates(n):
    """Finite set of Gamma_n elements used for the highest-point test."""
    cands = []
    if n == 1:
        for d in (-1, 0, 1):
            cands.append(np.array([[0, -1], [1, d]], dtype=int))
        return cands
    S = inversion(2)
    vals = (-1, 0, 1)
    for a in vals:
        for b in vals:
            for c in vals:
                cands.append(S @ translation(np.array([[a, b], [b, c]])))
    for k in range(2):
        e = np.zeros((2, 2), dtype=int)
        e[k, k] = 1
        I = np.eye(2, dtype=int)
        P = np.block([[I - e, -e], [e, I - e]])
        for d in vals:
            cands.append(P @ translation(d * e))
    return cands


def siegel_reduce(Omega, max_iter=200, tol=1e-12):
    """Highest-point reduction for n <= 2.

    Returns (Omega_red, gamma) with gamma integral symplectic and
    Omega_red = gamma . Omega satisfying |x_ij| <= 1/2, Im Omega_red
    Minkowski reduced, and |det(C Omega_red + D)| >= 1 over a finite
    candidate set of inversions.
    """
    W = check_siegel_point(Omega)
    n = W.shape[0]
    if n > 2:
        raise StructuralError("Siegel reduction is implemented for n <= 2 only")
    gamma = np.eye(2 * n, dtype=int)
    cands = _siegel_candidates(n)
    for _ in range(max_iter):
        # (S.2) Minkowski-reduce the imaginary part with d_a, a = ᵗU
        if n == 2:
            _, U = minkowski_reduce(W.imag)
            if not np.array_equal(U, np.eye(2, dtype=int)):
                g = dilation(U.T.astype(int)).astype(int)
                W = act(g, W)
                gamma = g @ gamma
        # (S.3) shift the real part into [-1/2, 1/2]
        b = -np.round(W.real).astype(int)
        b = (b + b.T) // 2 if n == 2 else b
        if np.any(b):
            g = translation(b)
            W = act(g, W)
            gamma = g @ gamma
        # (S.1) look for a candidate that raises det Im
        best, best_g = np.linalg.det(W.imag), None
        for g in cands:
            _, _, C, D = blocks(g)
            j = abs(np.linalg.det(C @ W + D))
            if j < 1 - tol:
                val = np.linalg.det(W.imag) / j ** 2
                if val > best * (1 + tol):
                    best, best_g = val, g
        if best_g is None:
            if n == 1 or is_minkowski_reduced(W.imag):
                return W, gamma
            continue
        W = act(best_g, W)
        gamma = best_g @ gamma
    raise ConvergenceError("Siegel reduction did not converge")


def siegel_volume(n):
    """vol(F_n) = 2 prod_{k=1}^n pi^{-k} Gamma(k) zeta(2k), exactly.

    Returns (coefficient, power) with vol = coefficient * pi^power and the
    coefficient a Fraction.  zeta(2k) is expanded through Bernoulli numbers.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    coeff = Fraction(2)
    power = 0
    for k in range(1, n + 1):
        B = sympy.bernoulli(2 * k)
        zeta_coeff = Fraction((-1) ** (k + 1)) * Fraction(int(B.p), int(B.q)) * 2 ** (2 * k) / (2 * math.factorial(2 * k))
        coeff *= math.factorial(k - 1) * zeta_coeff
        power += 2 * k - k
    return coeff, power


def format_pi_multiple(coeff, power):
    """Render c * pi^p as a string such as 'pi^3/270'."""
    coeff = Fraction(coeff)
    pi = "pi" if power == 1 else f"pi^{power}"
    num = "" if coeff.numerator == 1 else f"{coeff.numerator}*"
    out = num + pi
    if coeff.denominator != 1:
        out += f"/{coeff.denominator}"
    return out
