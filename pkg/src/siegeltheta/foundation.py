"""Matrix plumbing shared by every other module.

Positive-definiteness tests, the principal branch of det(Omega/i)^{1/2} on
the Siegel upper half-space, multi-index enumeration and the JSON encoding
of complex numbers, matrices and rationals.
"""

from dataclasses import dataclass
from fractions import Fraction
import math

import numpy as np


class SiegelThetaError(Exception):
    """Base class for the errors raised by this package."""


class StructuralError(SiegelThetaError):
    """Wrong shape, missing symmetry or mismatched arguments."""


class DomainError(SiegelThetaError):
    """Argument outside the domain of the operation."""


class ConditioningError(SiegelThetaError):
    """A matrix that should be invertible is numerically singular."""


class ConvergenceError(SiegelThetaError):
    """An iterative procedure ran out of its iteration budget."""


class TruncationError(SiegelThetaError):
    """A lattice sum could not reach its tail target within the radius cap."""

    def __init__(self, message, achieved_bound=None):
        super().__init__(message)
        self.achieved_bound = achieved_bound


class NumericError(SiegelThetaError):
    """Quadrature or another numerical routine did not converge."""


class ResourceError(SiegelThetaError):
    """A configured size cap (degree, term count) would be exceeded."""


@dataclass(frozen=True)
class Tolerance:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    truncation_tail: float = 1e-14

    def __post_init__(self):
        if min(self.abs_tol, self.rel_tol, self.truncation_tail) <= 0:
            raise DomainError("tolerances must be strictly positive")


def as_matrix(M, dtype=None):
    """Return ``M`` as a 2-d numpy array (scalars become 1x1)."""
    A = np.array(M, dtype=dtype)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2:
        raise StructuralError(f"expected a matrix, got an array of shape {A.shape}")
    return A


def is_exact_array(M):
    """True when every entry is an int, Fraction or sympy Rational."""
    A = np.asarray(M)
    if A.dtype.kind in "iub":
        return True
    if A.dtype != object:
        return False
    for v in A.flat:
        if isinstance(v, (int, Fraction)):
            continue
        if getattr(v, "is_Rational", False):
            continue
        return False
    return True


def check_square(M, name="matrix"):
    A = as_matrix(M)
    if A.shape[0] != A.shape[1]:
        raise StructuralError(f"{name} must be square, got shape {A.shape}")
    return A


def check_symmetric(M, tol=0.0, name="matrix"):
    A = check_square(M, name)
    if A.dtype == object:
        ok = all(A[i, j] == A[j, i] for i in range(A.shape[0]) for j in range(i))
    else:
        ok = np.all(np.abs(A - A.T) <= tol * max(1.0, np.abs(A).max(initial=0.0)))
    if not ok:
        raise StructuralError(f"{name} must be symmetric")
    return A


def is_positive_definite(M, tol=0.0):
    """True iff the real symmetric matrix ``M`` has only positive eigenvalues.

    Exact input (ints or Fractions) is decided exactly by Sylvester's
    criterion on leading principal minors; float input uses a Cholesky
    factorization.
    """
    A = check_symmetric(M, tol=1e-12 if tol == 0.0 else tol)
    if is_exact_array(A):
        F = [[to_fraction(v) for v in row] for row in A.tolist()]
        return all(_fraction_det([r[:k] for r in F[:k]]) > 0 for k in range(1, len(F) + 1))
    try:
        np.linalg.cholesky(np.asarray(A, dtype=float))
    except np.linalg.LinAlgError:
        return False
    return True


def to_fraction(v):
    """Convert an int, Fraction or sympy Rational to a Fraction."""
    if isinstance(v, (int, np.integer, Fraction)):
        return Fraction(v)
    if getattr(v, "is_Rational", False):
        return Fraction(int(v.p), int(v.q))
    raise StructuralError(f"not an exact rational: {v!r}")


def _fraction_det(rows):
    """Determinant of a small Fraction matrix by Gaussian elimination."""
    M = [list(r) for r in rows]
    n = len(M)
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if M[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            M[c], M[p] = M[p], M[c]
            det = -det
        det *= M[c][c]
        for r in range(c + 1, n):
            f = M[r][c] / M[c][c]
            if f:
                for k in range(c, n):
                    M[r][k] -= f * M[c][k]
    return det


def check_siegel_point(Omega, tol=1e-12):
    """Validate Omega in H_n and return it as a complex array."""
    W = as_matrix(Omega, dtype=complex)
    if W.shape[0] != W.shape[1]:
        raise StructuralError("Omega must be square")
    if np.abs(W - W.T).max(initial=0.0) > tol * max(1.0, np.abs(W).max()):
        raise StructuralError("Omega must be symmetric")
    if not np.all(np.isfinite(W)):
        raise DomainError("Omega has non-finite entries")
    if not is_positive_definite((W.imag + W.imag.T) / 2):
        raise DomainError("Im Omega is not positive definite")
    return W


def principal_halfplane_sqrt_det(Omega):
    """det(Omega/i)^{1/2} on the branch with value (det Y)^{1/2} at Omega = iY.

    The eigenvalues of Omega/i lie in the open right half-plane, so summing
    their principal logarithms gives a single-valued branch.
    """
    return halfplane_det_power(Omega, Fraction(1, 2))


def halfplane_det_power(Omega, k):
    """det(Omega/i)^k on the principal branch described above."""
    W = check_siegel_point(Omega)
    lam = np.linalg.eigvals(W / 1j)
    return complex(np.exp(float(k) * np.sum(np.log(lam))))


def det_power(Omega, k):
    """det(Omega)^k for Omega in H_n.

    Defined as (e^{i pi n/2} det(Omega/i))^k with the half-plane branch for
    det(Omega/i); for k = -1/2 and n = 1 this is the branch produced by the
    Gaussian integral of a Fourier transform.
    """
    W = check_siegel_point(Omega)
    n = W.shape[0]
    return complex(np.exp(1j * math.pi * n * float(k) / 2)) * halfplane_det_power(W, k)


def multiindex_iter(shape, radius):
    """Yield every J of the given shape with |J| <= radius.

    Order is graded lexicographic: by total degree, then lexicographically
    decreasing in the flattened (row-major) entries.  Each yielded value is
    a tuple of tuples.
    """
    m, n = shape
    N = m * n
    if radius < 0:
        return
    for d in range(radius + 1):
        for flat in _compositions(d, N):
            yield tuple(tuple(flat[k * n:(k + 1) * n]) for k in range(m))


def _compositions(d, N):
    """Weak compositions of d into N parts, lexicographically decreasing."""
    if N == 1:
        yield (d,)
        return
    for first in range(d, -1, -1):
        for rest in _compositions(d - first, N - 1):
            yield (first,) + rest


def multiindex_count(shape, radius):
    """Number of J of the given shape with |J| <= radius."""
    N = shape[0] * shape[1]
    return math.comb(radius + N, N)


def multiindex_abs(J):
    return sum(sum(row) for row in J)


def multiindex_factorial(J):
    out = 1
    for row in J:
        for j in row:
            out *= math.factorial(j)
    return out


def monomial(X, J):
    """X^J = prod X_{ka}^{J_{ka}} for a matrix X and multi-index J."""
    out = 1
    for k, row in enumerate(J):
        for a, j in enumerate(row):
            if j:
                out = out * X[k][a] ** j
    return out


# JSON encoding ---------------------------------------------------------------

def encode_complex(z):
    z = complex(z)
    return [z.real, z.imag]


def decode_scalar(v):
    """Decode a number, [re, im] pair or {"num", "den"} rational."""
    if isinstance(v, dict):
        return Fraction(int(v["num"]), int(v["den"]))
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise StructuralError(f"complex scalar must be [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise StructuralError(f"not a scalar: {v!r}")
    return v


def encode_matrix(M):
    A = as_matrix(M)
    if np.iscomplexobj(A):
        return [[encode_complex(v) for v in row] for row in A]
    if A.dtype == object:
        return [[encode_rational(v) if isinstance(v, Fraction) else _plain(v) for v in row] for row in A]
    return [[_plain(v) for v in row] for row in A.tolist()]


def _plain(v):
    if isinstance(v, (int, np.integer)):
        return int(v)
    return float(v)


def decode_matrix(data):
    """Decode a row-major nested list whose entries follow decode_scalar."""
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise StructuralError("matrix must be a non-empty list of rows")
    rows = [[decode_scalar(v) for v in row] for row in data]
    if len({len(r) for r in rows}) != 1:
        raise StructuralError("ragged matrix")
    flat = [v for r in rows for v in r]
    if any(isinstance(v, complex) for v in flat):
        return np.array(rows, dtype=complex)
    if any(isinstance(v, Fraction) for v in flat):
        return np.array([[Fraction(v) for v in r] for r in rows], dtype=object)
    if all(isinstance(v, int) for v in flat):
        return np.array(rows, dtype=np.int64)
    return np.array(rows, dtype=float)


def encode_rational(q):
    q = Fraction(q)
    return {"num": str(q.numerator), "den": str(q.denominator)}
