"""Dense linear-algebra substrate.

Thin, checked wrappers around LAPACK (via numpy/scipy): Hermitian
eigendecomposition, fractional powers, inertia, singular values and linear
solves. A sparse factorization helper with a condition estimate is included
for the banded interior solves used elsewhere in the package.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NotHermitian, NotPositiveDefinite, SingularSystem

HERMITIAN_TOL = 1e-10
INERTIA_REL_THRESHOLD = 1e-8
EPS = np.finfo(float).eps
SINGULAR_COND = 1.0 / (100.0 * EPS)


def as_matrix(M):
    M = np.asarray(M)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def hermitian_defect(M):
    """Relative asymmetry ||M - M*||_F / ||M||_F (0 for the zero matrix)."""
    if sp.issparse(M):
        diff = spla.norm(M - M.conj().T)
        scale = spla.norm(M)
    else:
        M = np.asarray(M)
        diff = np.linalg.norm(M - M.conj().T)
        scale = np.linalg.norm(M)
    return 0.0 if scale == 0 else float(diff / scale)


def symmetrize(M, tol=HERMITIAN_TOL):
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise NotHermitian(f"matrix is not square: {M.shape}")
    defect = hermitian_defect(M)
    if defect > tol:
        raise NotHermitian(f"relative asymmetry {defect:.3e} exceeds {tol:.1e}")
    return 0.5 * (M + M.conj().T)


def hermitian_eigen(M, tol=HERMITIAN_TOL):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix."""
    H = symmetrize(M, tol)
    w, V = sla.eigh(H)
    return w, V


def spectral_norm(M):
    M = as_matrix(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def fractional_power(M, s, zero_threshold=None):
    """V diag(lambda**s) V* for Hermitian positive definite M.

    ``zero_threshold`` defaults to 1e-14 ||M||; eigenvalues at or below it
    make the power undefined for negative ``s`` and raise.
    """
    w, V = hermitian_eigen(M)
    if zero_threshold is None:
        zero_threshold = 1e-14 * max(np.max(np.abs(w)), 1e-300)
    if w[0] <= zero_threshold:
        raise NotPositiveDefinite(f"minimum eigenvalue {w[0]:.3e} <= {zero_threshold:.3e}")
    P = (V * w**s) @ V.conj().T
    if np.isrealobj(M) or np.allclose(np.imag(P), 0.0, atol=0.0):
        P = np.real(P)
    return P


@dataclass(frozen=True)
class Inertia:
    n_minus: int
    n_zero: int
    n_plus: int
    zero_threshold: float
    ambiguous: bool = False
    ldl_agrees: bool | None = None

    @property
    def dimension(self):
        return self.n_minus + self.n_zero + self.n_plus

    def scaled(self, multiplicity):
        return Inertia(
            self.n_minus * multiplicity,
            self.n_zero * multiplicity,
            self.n_plus * multiplicity,
            self.zero_threshold,
            self.ambiguous,
            self.ldl_agrees,
        )

    def __add__(self, other):
        return Inertia(
            self.n_minus + other.n_minus,
            self.n_zero + other.n_zero,
            self.n_plus + other.n_plus,
            max(self.zero_threshold, other.zero_threshold),
            self.ambiguous or other.ambiguous,
            _and_optional(self.ldl_agrees, other.ldl_agrees),
        )


def _and_optional(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a and b


def ldl_inertia(H):
    """Sign counts of the block-diagonal factor of a Bunch-Kaufman LDL* factorization."""
    _, D, _ = sla.ldl(H, hermitian=True)
    d = np.linalg.eigvalsh(0.5 * (D + D.conj().T))
    return int(np.sum(d < 0)), int(np.sum(d > 0))


def inertia(M, zero_threshold=None, tol=HERMITIAN_TOL):
    """Counts of negative / zero / positive eigenvalues of a Hermitian matrix.

    ``zero_threshold`` defaults to 1e-8 ||M||_2. The result is flagged
    ``ambiguous`` when an eigenvalue lies within a factor 10 of the threshold.
    When no eigenvalue is in the zero band the counts are cross-checked
    against an LDL* congruence.
    """
    H = symmetrize(M, tol)
    if H.shape[0] == 0:
        t = 0.0 if zero_threshold is None else float(zero_threshold)
        return Inertia(0, 0, 0, t)
    w = sla.eigvalsh(H)
    if zero_threshold is None:
        zero_threshold = INERTIA_REL_THRESHOLD * float(np.max(np.abs(w)))
    t = float(zero_threshold)
    n_minus = int(np.sum(w < -t))
    n_zero = int(np.sum(np.abs(w) <= t))
    n_plus = len(w) - n_minus - n_zero
    a = np.abs(w)
    ambiguous = bool(np.any((a > t / 10.0) & (a < 10.0 * t))) if t > 0 else False
    agrees = None
    if n_zero == 0 and not ambiguous:
        lm, lp = ldl_inertia(H)
        agrees = (lm, lp) == (n_minus, n_plus)
    return Inertia(n_minus, n_zero, n_plus, t, ambiguous, agrees)


def singular_values(M):
    """Singular values in descending order, counting multiplicity."""
    M = as_matrix(M)
    if M.size == 0:
        return np.zeros(0)
    return sla.svdvals(M)


def solve_linear(M, rhs):
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"matrix is not square: {M.shape}")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            lu, piv = sla.lu_factor(M, check_finite=True)
    except (sla.LinAlgError, ValueError) as exc:
        raise SingularSystem(str(exc)) from exc
    if np.any(np.diag(lu) == 0):
        raise SingularSystem("exactly singular matrix")
    cond = np.linalg.cond(M, 1)
    if not np.isfinite(cond) or cond > SINGULAR_COND:
        raise SingularSystem(f"estimated condition number {cond:.3e} exceeds {SINGULAR_COND:.3e}")
    return sla.lu_solve((lu, piv), rhs)


class SparseFactor:
    """LU factorization of a sparse square matrix with a 2-norm condition estimate.

    The estimate comes from a few seeded power iterations on ``M^{-*} M^{-1}``
    so it is deterministic; it is a lower bound, which is what a near-singular
    detector needs.
    """

    def __init__(self, M, exc=SingularSystem, iterations=4):
        M = sp.csc_matrix(M)
        if not np.all(np.isfinite(M.data)):
            raise ValueError("matrix has non-finite entries")
        self.shape = M.shape
        self.dtype = M.dtype
        try:
            self._lu = spla.splu(M)
        except RuntimeError as exc_:
            raise exc("exactly singular system") from exc_
        norm = spla.norm(M, 1)
        rng = np.random.default_rng(12345)
        x = rng.standard_normal(M.shape[0])
        x /= np.linalg.norm(x)
        inv_norm = 0.0
        for _ in range(iterations):
            y = self._lu.solve(x.astype(np.result_type(M.dtype, float)))
            if not np.all(np.isfinite(y)):
                raise exc("exactly singular system")
            x = self._lu.solve(y, trans="H")
            nx = np.linalg.norm(x)
            inv_norm = np.sqrt(nx)
            if nx == 0:
                break
            x = x / nx
        self.condition = float(norm * inv_norm)
        if not np.isfinite(self.condition) or self.condition > SINGULAR_COND:
            raise exc(f"estimated condition number {self.condition:.3e} exceeds {SINGULAR_COND:.3e}")

    def solve(self, b, adjoint=False):
        b = np.asarray(b)
        trans = "H" if adjoint else "N"
        if np.iscomplexobj(b) and not np.iscomplexobj(np.empty(0, self.dtype)):
            re = self._lu.solve(np.ascontiguousarray(b.real, dtype=float), trans=trans)
            im = self._lu.solve(np.ascontiguousarray(b.imag, dtype=float), trans=trans)
            return re + 1j * im
        dtype = np.result_type(self.dtype, b.dtype, float)
        return self._lu.solve(b.astype(dtype), trans=trans)
