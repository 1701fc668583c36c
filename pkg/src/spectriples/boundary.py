"""Calderon operators, regularized trace maps and Weyl functions.

For a mode block with stiffness S and mass W, the discrete solution operator
P(z) solves the interior rows of (S - zW)u = 0 with prescribed boundary dofs,
and the discrete conormal trace is Cu = -(S - zW)_B u / omega.  This is the
central-difference interior-normal derivative with the boundary row of the
equation used to eliminate the ghost value, so that

    Lambda(z) = -Schur_B(S - zW) / omega

and realizations with Cu = KBu differ from (S - zW) by omega K on the
boundary block.  Sylvester inertia of the Schur complement then links
eigenvalue counts of the realization to boundary matrices exactly.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DirichletEigenvalueHit
from .numerics import Inertia, SparseFactor, hermitian_defect, inertia


@dataclass
class BoundaryOperator:
    """Operator on the boundary space, stored on the mode-reduced basis.

    Each reduced basis element stands for ``multiplicity`` orthogonal copies
    (spherical harmonics of one degree); operators are assumed to act
    identically on every copy.
    """

    matrix: np.ndarray
    labels: list
    multiplicity: np.ndarray
    trace_orders: np.ndarray
    z: complex | None = None
    name: str = ""

    @classmethod
    def like(cls, problem, matrix, z=None, name=""):
        return cls(np.asarray(matrix), list(problem.boundary_labels),
                   problem.boundary_multiplicity, problem.boundary_trace_orders, z, name)

    def _new(self, matrix, name=""):
        return BoundaryOperator(matrix, self.labels, self.multiplicity, self.trace_orders,
                                self.z, name)

    def __sub__(self, other):
        return self._new(self.matrix - _mat(other))

    def __add__(self, other):
        return self._new(self.matrix + _mat(other))

    def __matmul__(self, other):
        return self._new(self.matrix @ _mat(other))

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def dimension(self):
        return int(np.sum(self.multiplicity))

    @property
    def hermitian_defect(self):
        return hermitian_defect(self.matrix)

    def adjoint(self):
        return self._new(self.matrix.conj().T)

    def modes(self):
        return np.array([lab[0] for lab in self.labels])

    def dense(self):
        """Matrix on the multiplicity-expanded basis."""
        if np.all(self.multiplicity == 1):
            return self.matrix.copy()
        red = np.repeat(np.arange(len(self.multiplicity)), self.multiplicity)
        copy = np.concatenate([np.arange(k) for k in self.multiplicity])
        full = self.matrix[np.ix_(red, red)]
        return np.where(copy[:, None] == copy[None, :], full, 0.0)

    def inertia(self, zero_threshold=None):
        """Multiplicity-aware inertia (requires a Hermitian operator)."""
        return weighted_inertia(self.matrix, self.multiplicity, self.modes(), zero_threshold)

    def eigenvalues(self):
        w = np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T))
        return w


def _mat(x):
    return x.matrix if isinstance(x, BoundaryOperator) else np.asarray(x)


def weighted_inertia(H, multiplicity, modes, zero_threshold=None):
    H = np.asarray(H)
    if np.all(multiplicity == 1):
        return inertia(H, zero_threshold)
    if zero_threshold is None:
        w = np.linalg.eigvalsh(0.5 * (H + H.conj().T))
        zero_threshold = 1e-8 * float(np.max(np.abs(w))) if len(w) else 0.0
    total = Inertia(0, 0, 0, zero_threshold)
    for mode in np.unique(modes):
        idx = np.flatnonzero(modes == mode)
        other = np.setdiff1d(np.arange(len(modes)), idx)
        if np.any(H[np.ix_(idx, other)] != 0):
            raise ValueError("operator couples degenerate modes; use the expanded basis")
        part = inertia(H[np.ix_(idx, idx)], zero_threshold)
        total = total + part.scaled(int(multiplicity[idx[0]]))
    return total


# ------------------------------------------------------------ block solvers


def _split(b, z):
    M = (b.stiffness - z * sp.diags(b.mass)).tocsr()
    I, B = b.interior, b.boundary
    M_II = M[I][:, I]
    M_IB = M[I][:, B].toarray()
    M_BI = M[B][:, I].toarray()
    M_BB = M[B][:, B].toarray()
    return M_II, M_IB, M_BI, M_BB


def _block_poisson(b, z):
    """Interior response X with u_I = -X u_B, plus the Schur pieces."""
    M_II, M_IB, M_BI, M_BB = _split(b, z)
    try:
        fac = SparseFactor(M_II, exc=DirichletEigenvalueHit)
    except DirichletEigenvalueHit as exc:
        raise DirichletEigenvalueHit(f"z = {z} hits the Dirichlet spectrum of mode "
                                     f"{b.label}: {exc}") from None
    X = fac.solve(M_IB)
    return X, M_BI, M_BB


def _block_calderon(b, z):
    X, M_BI, M_BB = _block_poisson(b, z)
    return -(M_BB - M_BI @ X) / b.weight


def _cache(problem):
    if not hasattr(problem, "_calderon_cache"):
        problem._calderon_cache = {}
    return problem._calderon_cache


def calderon(problem, z):
    """Lambda(z): boundary datum -> conormal trace of the solution of (A - z)u = 0."""
    z = complex(z)
    if z.imag == 0:
        z = z.real
    cache = _cache(problem)
    key = complex(z)
    if key not in cache:
        n = problem.reduced_boundary_size
        dtype = complex if isinstance(z, complex) else float
        L = np.zeros((n, n), dtype=dtype)
        for b, sl in zip(problem.blocks, problem.boundary_slices):
            L[sl, sl] = _block_calderon(b, z)
        cache[key] = L
    return BoundaryOperator.like(problem, cache[key].copy(), z, "calderon")


def pz_solve(problem, z, phi):
    """Discrete solution of (A - z)u = 0 with Bu = phi, as nodal values.

    Returns an array of length N + 1 for single-block problems and shape
    (number of modes, N + 1) otherwise; truncation nodes carry zero.
    """
    z = complex(z)
    if z.imag == 0:
        z = z.real
    phi = np.asarray(phi)
    if phi.ndim == 0:
        phi = phi.reshape(1)
    if phi.shape != (problem.reduced_boundary_size,):
        raise ValueError(f"boundary datum must have length {problem.reduced_boundary_size}")
    out = np.zeros((len(problem.blocks), problem.N + 1), dtype=np.result_type(phi, z, float))
    for k, (b, sl) in enumerate(zip(problem.blocks, problem.boundary_slices)):
        X, _, _ = _block_poisson(b, z)
        u = np.zeros(b.stiffness.shape[0], dtype=out.dtype)
        u[b.boundary] = phi[sl]
        u[b.interior] = -X @ phi[sl]
        out[k, b.nodes] = u[b.node_dofs]
    return out[0] if len(problem.blocks) == 1 else out


def smoothing_exponents(problem, side):
    """Per-trace-order exponents of the shifted boundary Laplacian."""
    m = problem.m
    j = problem.boundary_trace_orders
    if side in ("m", "m-side"):
        return j / 2.0 + 0.25
    if side in ("mu", "mu-side"):
        mu = 2 * m - 1 - j
        return m - mu / 2.0 - 0.25
    raise ValueError(f"side must be 'm' or 'mu', got {side!r}")


def smoothing_operator(problem, side="m", power=1.0):
    """Diagonal matrix (-Delta_boundary + 1)^(power * exponent_j) on the boundary basis."""
    e = smoothing_exponents(problem, side)
    lb = np.array([problem.laplace_beltrami(k) for k in problem.boundary_modes], dtype=float)
    return BoundaryOperator.like(problem, np.diag((lb + 1.0) ** (power * e)), None,
                                 f"smoothing_{side}")


def t_operator(problem, z):
    """T(z) = Lambda(z) - Lambda(0)."""
    T = calderon(problem, z) - calderon(problem, 0.0)
    T.z, T.name = z, "T"
    return T


def weyl_function(problem, z):
    """M(z) = smoothing_mu (Lambda(z) - Lambda(0)) smoothing_m."""
    if z == 0:
        n = problem.reduced_boundary_size
        return BoundaryOperator.like(problem, np.zeros((n, n)), 0.0, "weyl")
    Sm = smoothing_operator(problem, "m").matrix
    Smu = smoothing_operator(problem, "mu").matrix
    T = t_operator(problem, z).matrix
    return BoundaryOperator.like(problem, Smu @ T @ Sm, z, "weyl")


# --------------------------------------------------------- sampled traces


def fd_weights(offsets, order):
    """Finite-difference weights for the ``order``-th derivative at 0."""
    offsets = np.asarray(offsets, dtype=float)
    n = len(offsets)
    V = np.vander(offsets, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[order] = float(np.prod(np.arange(1, order + 1)))
    return np.linalg.solve(V, rhs)


def _end_derivative(u, h, order, side, npts):
    """d_n^order u at an end node, with d_n the interior normal derivative."""
    k = np.arange(npts)
    w = fd_weights(k, order) / h**order
    vals = u[..., k] if side == "left" else u[..., -1 - k]
    return vals @ w


def sampled_traces(problem, u):
    """(Bu, Cu) of sampled nodal values via second-order one-sided stencils.

    B = (d_n^j u)_{j < m}; C = d_n u for m = 1 and (-d_n^3 u, d_n^2 u) for m = 2.
    """
    U = np.atleast_2d(u)
    h = problem.h
    n = problem.reduced_boundary_size
    Bu = np.zeros(n, dtype=U.dtype)
    Cu = np.zeros(n, dtype=np.result_type(U.dtype, float))
    for k, (b, sl) in enumerate(zip(problem.blocks, problem.boundary_slices)):
        for i, (j, pt) in enumerate(zip(b.trace_orders, b.points)):
            row = U[k]
            Bu[sl.start + i] = row[0] if (j == 0 and pt == "left") else (
                row[-1] if j == 0 else _end_derivative(row, h, j, pt, j + 2))
            if problem.m == 1:
                Cu[sl.start + i] = _end_derivative(row, h, 1, pt, 3)
            elif j == 0:
                Cu[sl.start + i] = -_end_derivative(row, h, 3, pt, 5)
            else:
                Cu[sl.start + i] = _end_derivative(row, h, 2, pt, 4)
    return Bu, Cu


def maximal_operator(problem, block_index):
    """Sparse matrix of the differential expression on all grid nodes of one block.

    Interior rows use the same central stencil as the realizations; the end
    rows use second-order one-sided stencils.
    """
    b = problem.blocks[block_index]
    x, h, N = problem.grid, problem.h, problem.N
    q = problem.q_on_grid()
    A = sp.lil_matrix((N + 1, N + 1))
    if problem.m == 1:
        p = problem.rho_power
        rho = x**p if p else np.ones_like(x)
        mid = 0.5 * (x[:-1] + x[1:])
        rm = mid**p if p else np.ones(N)
        V = q + b.centrifugal / x**2 if b.centrifugal else q
        for i in range(1, N):
            A[i, i - 1] = -rm[i - 1] / (rho[i] * h**2)
            A[i, i + 1] = -rm[i] / (rho[i] * h**2)
            A[i, i] = (rm[i - 1] + rm[i]) / (rho[i] * h**2) + V[i]
        w2 = fd_weights(np.arange(4), 2) / h**2
        w1 = fd_weights(np.arange(3), 1) / h
        for end, s in ((0, 1), (N, -1)):
            drift = p / x[end] if p else 0.0
            for k in range(4):
                A[end, end + s * k] += -w2[k]
            for k in range(3):
                A[end, end + s * k] += -drift * s * w1[k]
            A[end, end] += V[end]
    else:
        c = np.array([1.0, -4.0, 6.0, -4.0, 1.0]) / h**4
        for i in range(2, N - 1):
            for k, ck in enumerate(c):
                A[i, i - 2 + k] = ck
            A[i, i] += q[i]
        for i in (0, 1):
            w = fd_weights(np.arange(6) - i, 4) / h**4
            for k in range(6):
                A[i, k] = w[k]
                A[N - i, N - k] = w[k]
            A[i, i] += q[i]
            A[N - i, N - i] += q[N - i]
    return A.tocsr()


@dataclass
class TraceMaps:
    """Regularized boundary maps Gamma0 = S_m^{-1} B, Gamma1 = S_mu (C - Lambda(0) B)."""

    problem: object
    lambda0: np.ndarray
    smooth_m: np.ndarray
    smooth_mu: np.ndarray

    def gamma0(self, u):
        Bu, _ = sampled_traces(self.problem, u)
        return np.linalg.solve(self.smooth_m, Bu)

    def gamma1(self, u):
        Bu, Cu = sampled_traces(self.problem, u)
        return self.smooth_mu @ (Cu - self.lambda0 @ Bu)


def trace_maps(problem):
    return TraceMaps(problem, calderon(problem, 0.0).matrix,
                     smoothing_operator(problem, "m").matrix,
                     smoothing_operator(problem, "mu").matrix)


def _inner(problem, f, g):
    F, G = np.atleast_2d(f), np.atleast_2d(g)
    w = problem.node_weights
    return complex(np.sum(problem.multiplicity[:, None] * w[None, :] * F * np.conj(G)))


def _boundary_inner(problem, a, b):
    wt = problem.boundary_weight * problem.boundary_multiplicity
    return complex(np.sum(wt * a * np.conj(b)))


def green_residual(problem, u, v, relative=False):
    """|(A u, v) - (u, A v) - [(Gamma1 u, Gamma0 v) - (Gamma0 u, Gamma1 v)]|.

    ``u`` and ``v`` are nodal samples (shape (N + 1,) or (modes, N + 1)).
    With ``relative=True`` the residual is divided by ||u|| ||v|| ||A||.
    """
    U = np.atleast_2d(np.asarray(u))
    V = np.atleast_2d(np.asarray(v))
    ops = [maximal_operator(problem, k) for k in range(len(problem.blocks))]
    AU = np.vstack([op @ U[k] for k, op in enumerate(ops)])
    AV = np.vstack([op @ V[k] for k, op in enumerate(ops)])
    tm = trace_maps(problem)
    bulk = _inner(problem, AU, V) - _inner(problem, U, AV)
    edge = (_boundary_inner(problem, tm.gamma1(U), tm.gamma0(V))
            - _boundary_inner(problem, tm.gamma0(U), tm.gamma1(V)))
    res = abs(bulk - edge)
    if relative:
        norm_A = max(abs(op).sum(axis=1).max() for op in ops)
        nu = np.sqrt(abs(_inner(problem, U, U)))
        nv = np.sqrt(abs(_inner(problem, V, V)))
        scale = norm_A * nu * nv
        return 0.0 if scale == 0 else res / scale
    return res
