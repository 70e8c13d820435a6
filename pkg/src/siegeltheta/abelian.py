"""The complex torus A_Omega = C^(m,n) / (Z^(m,n) + Z^(m,n) Omega).

Coordinates: Z = U + iV, Omega = X + iY.  The diffeomorphism with the flat
torus is Phi(P + iQ) = (P + QX) + iQY, so Z = P + Q Omega with P, Q real.
E_{Omega;A,B}(Z) = exp(2 pi i [sigma(ᵗA U) + sigma((B - AX) Y^{-1} ᵗV)]) is the
pullback of the character exp(2 pi i sigma(ᵗA P + ᵗB Q)).
"""

from dataclasses import dataclass
import itertools
import math

import numpy as np
import sympy

from .foundation import DomainError, StructuralError, as_matrix, check_siegel_point
from .symplectic import J_matrix, blocks, act, siegel_reduce


def _int_matrix(A, shape=None):
    A = np.atleast_2d(np.asarray(A))
    Ai = np.round(A.astype(float)).astype(np.int64)
    if not np.allclose(A.astype(float), Ai):
        raise DomainError("eigenfunction indices must be integral")
    if shape is not None and Ai.shape != shape:
        raise StructuralError(f"expected shape {shape}, got {Ai.shape}")
    return Ai


@dataclass(frozen=True)
class AbelianVariety:
    Omega: np.ndarray
    m: int

    def __post_init__(self):
        W = check_siegel_point(self.Omega)
        object.__setattr__(self, "Omega", W)
        B = self.real_basis()
        if np.linalg.matrix_rank(B) != 2 * self.m * W.shape[0]:
            raise DomainError("lattice basis is not R-linearly independent")

    @property
    def n(self):
        return self.Omega.shape[0]

    def lattice_basis(self):
        """[(E_kj, F_kj = E_kj Omega)] over all k, j."""
        out = []
        for k in range(self.m):
            for j in range(self.n):
                E = np.zeros((self.m, self.n), dtype=complex)
                E[k, j] = 1
                out.append((E, E @ self.Omega))
        return out

    def real_basis(self):
        """2mn x 2mn real matrix whose columns are the basis vectors as points of R^{2mn}."""
        cols = []
        for E, F in self.lattice_basis():
            for v in (E, F):
                cols.append(np.concatenate([v.real.ravel(), v.imag.ravel()]))
        return np.array(cols).T

    def contains(self, Z, tol=1e-9):
        """True if Z lies in the lattice L_Omega."""
        P, Q = torus_coords(self.Omega, Z)
        return bool(np.allclose(P, np.round(P), atol=tol) and np.allclose(Q, np.round(Q), atol=tol))


def riemann_conditions(Omega):
    """(RC.1) residual max|Omega_b J ᵗOmega_b| and (RC.2) min eigenvalue of -(1/i) Omega_b J ᵗconj(Omega_b)."""
    W = check_siegel_point(Omega)
    n = W.shape[0]
    Ob = np.hstack([np.eye(n), W])
    J = J_matrix(n)
    rc1 = float(np.max(np.abs(Ob @ J @ Ob.T)))
    H = -(1 / 1j) * (Ob @ J @ Ob.conj().T)
    H = (H + H.conj().T) / 2
    return rc1, float(np.linalg.eigvalsh(H).min())


def riemann_conditions_exact(Omega):
    """Exact version for a sympy Omega: (RC.1 matrix, RC.2 Hermitian matrix)."""
    W = sympy.Matrix(Omega)
    n = W.shape[0]
    Ob = sympy.Matrix.hstack(sympy.eye(n), W)
    J = sympy.Matrix(J_matrix(n).tolist())
    rc1 = (Ob * J * Ob.T).applyfunc(sympy.simplify)
    rc2 = (-1 / sympy.I) * (Ob * J * Ob.conjugate().T)
    return rc1, rc2.applyfunc(sympy.simplify)


# coordinates ---------------------------------------------------------------------------

def torus_coords(Omega, Z):
    """(P, Q) with Z = P + Q Omega, i.e. Phi^{-1}(U + iV) = (U - V Y^{-1} X) + i V Y^{-1}."""
    W = check_siegel_point(Omega)
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    if Z.shape[1] != W.shape[0]:
        raise StructuralError("Z must have n columns")
    X, Y = W.real, W.imag
    U, V = Z.real, Z.imag
    Q = np.linalg.solve(Y.T, V.T).T
    P = U - Q @ X
    return P, Q


def from_torus_coords(Omega, P, Q):
    """Phi(P + iQ) = (P + QX) + iQY."""
    W = check_siegel_point(Omega)
    P, Q = np.atleast_2d(np.asarray(P, dtype=float)), np.atleast_2d(np.asarray(Q, dtype=float))
    return (P + Q @ W.real) + 1j * (Q @ W.imag)


def torus_character(A, B, P, Q):
    """E_{A,B}(P + iQ) = exp(2 pi i sigma(ᵗA P + ᵗB Q)) on the flat torus."""
    A, B = np.atleast_2d(A).astype(float), np.atleast_2d(B).astype(float)
    return complex(np.exp(2j * math.pi * (np.trace(A.T @ P) + np.trace(B.T @ Q))))


# eigenfunctions ------------------------------------------------------------------------

def eigenfunction_eval(Omega, A, B, Z):
    """E_{Omega;A,B}(Z) = exp(2 pi i [sigma(ᵗA U) + sigma((B - AX) Y^{-1} ᵗV)])."""
    W = check_siegel_point(Omega)
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    A = _int_matrix(A, Z.shape).astype(float)
    B = _int_matrix(B, Z.shape).astype(float)
    X, Y = W.real, W.imag
    G = (B - A @ X) @ np.linalg.inv(Y)
    return complex(np.exp(2j * math.pi * (np.trace(A.T @ Z.real) + np.trace(G @ Z.imag.T))))


def periodicity_residual(Omega, A, B, Z, lam, mu):
    """|E(Z + lam Omega + mu) - E(Z)| for integral lam, mu."""
    W = check_siegel_point(Omega)
    lam = _int_matrix(lam).astype(float)
    mu = _int_matrix(mu).astype(float)
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    return abs(eigenfunction_eval(W, A, B, Z + lam @ W + mu) - eigenfunction_eval(W, A, B, Z))


def laplacian_eigenvalue(Omega, A, B):
    """Delta_Omega E = lambda E with Delta_Omega = sigma(Y d_Z ᵗ(d_Zbar)).

    E is exp(2 pi i L) with L = sigma(ᵗA U) + sigma(G ᵗV), G = (B - AX) Y^{-1};
    d_{z_ki} E = pi i (A - iG)_{ki} E and d_{zbar_kj} E = pi i (A + iG)_{kj} E give
    lambda = -pi^2 sigma((A - iG) Y ᵗ(A + iG)) = -pi^2 [sigma(A Y ᵗA) + sigma(G Y ᵗG)].
    """
    W = check_siegel_point(Omega)
    n = W.shape[0]
    A = _int_matrix(A).astype(float)
    B = _int_matrix(B, A.shape).astype(float)
    if A.shape[1] != n:
        raise StructuralError("indices must have n columns")
    X, Y = W.real, W.imag
    G = (B - A @ X) @ np.linalg.inv(Y)
    return -math.pi ** 2 * float(np.trace(A @ Y @ A.T) + np.trace(G @ Y @ G.T))


def laplacian_ratio_symbolic(Omega, A, B):
    """Delta_Omega E / E computed by sympy differentiation, as a simplified expression in u, v.

    Omega is taken exactly (nsimplify of its entries), so a constant result
    is an exact statement about the given point.
    """
    W = sympy.Matrix(np.asarray(Omega, dtype=object).tolist()).applyfunc(sympy.nsimplify)
    n = W.shape[0]
    A = sympy.Matrix(_int_matrix(A).tolist())
    B = sympy.Matrix(_int_matrix(B, (A.shape[0], A.shape[1])).tolist())
    m = A.shape[0]
    X = W.applyfunc(sympy.re)
    Y = W.applyfunc(sympy.im)
    U = sympy.Matrix(m, n, lambda k, j: sympy.Symbol(f"u_{k + 1}_{j + 1}", real=True))
    V = sympy.Matrix(m, n, lambda k, j: sympy.Symbol(f"v_{k + 1}_{j + 1}", real=True))
    L = (A.T * U).trace() + ((B - A * X) * Y.inv() * V.T).trace()
    E = sympy.exp(2 * sympy.pi * sympy.I * L)

    def dz(f, k, j):
        return (sympy.diff(f, U[k, j]) - sympy.I * sympy.diff(f, V[k, j])) / 2

    def dzb(f, k, j):
        return (sympy.diff(f, U[k, j]) + sympy.I * sympy.diff(f, V[k, j])) / 2

    total = 0
    for i in range(n):
        for j in range(n):
            if Y[j, i] == 0:
                continue
            for k in range(m):
                total += Y[j, i] * dz(dzb(E, k, j), k, i)
    return sympy.simplify(total / E)


def eigenratio_constancy(Omega, A, B, points):
    """Max relative deviation of the sympy ratio over sample points from the closed form."""
    expr = laplacian_ratio_symbolic(Omega, A, B)
    lam = laplacian_eigenvalue(Omega, A, B)
    free = sorted(expr.free_symbols, key=str)
    worst = 0.0
    for Z in points:
        Z = np.atleast_2d(np.asarray(Z, dtype=complex))
        subs = {}
        for s in free:
            kind, k, j = str(s).split("_")
            val = Z[int(k) - 1, int(j) - 1]
            subs[s] = val.real if kind == "u" else val.imag
        v = complex(expr.subs(subs).evalf())
        worst = max(worst, abs(v - lam) / max(abs(lam), 1.0))
    return worst


# inner products ------------------------------------------------------------------------

def orthonormality(A, B, A2, B2):
    """(E_{Omega;A,B}, E_{Omega;A2,B2})_Omega: pulled back to the flat torus it is a Kronecker delta."""
    same = np.array_equal(_int_matrix(A), _int_matrix(A2)) and np.array_equal(_int_matrix(B), _int_matrix(B2))
    return 1 if same else 0


def orthonormality_quadrature(Omega, A, B, A2, B2, grid=32):
    """The same inner product for m = n = 1 by the trapezoid rule on [0,1)^2 in (P, Q), integrand in Z."""
    W = check_siegel_point(Omega)
    if W.shape != (1, 1) or np.atleast_2d(A).shape != (1, 1):
        raise DomainError("quadrature cross-check is for m = n = 1")
    t = np.arange(grid) / grid
    total = 0j
    for p in t:
        for q in t:
            Z = from_torus_coords(W, [[p]], [[q]])
            total += eigenfunction_eval(W, A, B, Z) * np.conj(eigenfunction_eval(W, A2, B2, Z))
    return total / grid ** 2


# metric ----------------------------------------------------------------------------------

def metric_invariance_residual(Omega, gamma, dZ):
    """Residuals for ds^2 = sigma(Y^{-1} ᵗdZ conj(dZ)) under (Omega, Z) -> (gamma Omega, Z (C Omega + D)^{-1}).

    Returns (matrix residual of Ytilde^{-1} ᵗdZt conj(dZt) against
    conj(J) Y^{-1} ᵗdZ conj(dZ) conj(J)^{-1}, scalar residual of the metric).
    """
    W = check_siegel_point(Omega)
    _, _, C, D = (np.asarray(X, dtype=complex) for X in blocks(as_matrix(gamma)))
    J = C @ W + D
    Wt = act(gamma, W)
    dZ = np.atleast_2d(np.asarray(dZ, dtype=complex))
    dZt = dZ @ np.linalg.inv(J)
    Y, Yt = W.imag, Wt.imag
    lhs = np.linalg.inv(Yt) @ dZt.T @ dZt.conj()
    rhs = J.conj() @ np.linalg.inv(Y) @ dZ.T @ dZ.conj() @ np.linalg.inv(J.conj())
    scale = max(1.0, float(np.max(np.abs(rhs))))
    g0 = np.trace(np.linalg.inv(Y) @ dZ.T @ dZ.conj())
    g1 = np.trace(lhs)
    return float(np.max(np.abs(lhs - rhs))) / scale, abs(g1 - g0) / max(1.0, abs(g0))


# fundamental domain ---------------------------------------------------------------------

def is_reduced(Omega, tol=1e-9):
    """True if the highest-point reduction leaves Omega in place (n <= 2)."""
    W = check_siegel_point(Omega)
    R, _ = siegel_reduce(W)
    return bool(np.allclose(R, W, atol=tol))


def fundamental_domain_member(Omega, Z, check_reduced=True):
    """(inside, Z0, (lam, mu)) with Z = Z0 + lam Omega + mu and Z0 in the parallelepiped P_Omega."""
    W = check_siegel_point(Omega)
    if check_reduced and not is_reduced(W):
        raise DomainError("Omega is not Siegel reduced")
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    P, Q = torus_coords(W, Z)
    # snap round-off so that a coordinate of -1e-17 does not land on the far face
    P = np.where(np.abs(P - np.round(P)) < 1e-12, np.round(P), P)
    Q = np.where(np.abs(Q - np.round(Q)) < 1e-12, np.round(Q), Q)
    mu = np.floor(P).astype(np.int64)
    lam = np.floor(Q).astype(np.int64)
    Z0 = from_torus_coords(W, P - mu, Q - lam)
    inside = not (np.any(mu) or np.any(lam))
    return inside, Z0, (lam, mu)


def spectrum(Omega, m, radius):
    """Sorted list of (eigenvalue, A, B) with all entries of A, B in [-radius, radius]."""
    W = check_siegel_point(Omega)
    n = W.shape[0]
    rng = range(-radius, radius + 1)
    out = []
    for vals in itertools.product(rng, repeat=2 * m * n):
        A = np.array(vals[:m * n]).reshape(m, n)
        B = np.array(vals[m * n:]).reshape(m, n)
        out.append((laplacian_eigenvalue(W, A, B), A, B))
    out.sort(key=lambda t: -t[0])
    return out
