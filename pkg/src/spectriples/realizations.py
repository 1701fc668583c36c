"""Dirichlet and Robin-type (Cu = KBu) realizations and their spectra."""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.csgraph as csgraph
import scipy.sparse.linalg as spla

from .errors import DimensionMismatch, InvalidConfig
from .numerics import HERMITIAN_TOL, hermitian_defect


# --------------------------------------------------------------------------- K


@dataclass(frozen=True)
class Scalar:
    """sigma times the identity on every boundary component."""

    sigma: complex

    def matrix(self, problem):
        return complex(self.sigma) * np.eye(problem.reduced_boundary_size)


@dataclass(frozen=True)
class ModeMultiplier:
    """Diagonal multiplier f(mode label) on the boundary basis."""

    func: object
    name: str = "custom"
    params: dict = field(default_factory=dict)

    @classmethod
    def smoothing_growth(cls, coefficient=1.0, power=0.25):
        """c (-Delta_boundary + 1)^power, i.e. growth |k|^{2 power} on the circle."""
        return cls(None, "smoothing_growth", {"coefficient": float(coefficient),
                                              "power": float(power)})

    def values(self, problem):
        modes = problem.boundary_modes
        if self.name == "smoothing_growth":
            lb = np.array([problem.laplace_beltrami(k) for k in modes])
            return self.params["coefficient"] * (lb + 1.0) ** self.params["power"]
        return np.array([complex(self.func(int(k))) for k in modes])

    def matrix(self, problem):
        return np.diag(self.values(problem).astype(complex))


@dataclass(frozen=True)
class DenseK:
    """Explicit matrix on the (mode-reduced) boundary basis."""

    values: np.ndarray

    def matrix(self, problem):
        K = np.asarray(self.values, dtype=complex)
        n = problem.reduced_boundary_size
        if K.shape != (n, n):
            raise DimensionMismatch(f"K has shape {K.shape}, boundary basis has size {n}")
        mult = problem.boundary_multiplicity
        if np.any(mult > 1):
            modes = problem.boundary_modes
            cross = modes[:, None] != modes[None, :]
            if np.any(K[cross] != 0):
                raise DimensionMismatch("dense K must be mode-diagonal on a problem with "
                                        "degenerate modes")
        return K


@dataclass(frozen=True)
class AngularFunction:
    """Multiplication by sigma(theta) on the circle, as a Toeplitz matrix in Fourier modes.

    ``samples`` are values on the uniform grid theta_j = 2 pi j / M; a callable
    may be given instead and is sampled finely enough to avoid aliasing.
    """

    samples: object

    def matrix(self, problem):
        if problem.kind != "annulus_m1":
            raise DimensionMismatch("angular functions are defined on the circle only")
        modes = problem.boundary_modes
        span = 2 * int(np.max(np.abs(modes)))
        if callable(self.samples):
            M = 4 * (span + 1)
            theta = 2 * np.pi * np.arange(M) / M
            vals = np.asarray(self.samples(theta), dtype=complex)
        else:
            vals = np.asarray(self.samples, dtype=complex)
            M = len(vals)
            if M < span + 1:
                raise DimensionMismatch(f"need at least {span + 1} angular samples, got {M}")
        coeffs = np.fft.fft(vals) / M
        floor = 1e-14 * np.max(np.abs(coeffs))
        coeffs.real[np.abs(coeffs.real) < floor] = 0.0
        coeffs.imag[np.abs(coeffs.imag) < floor] = 0.0
        diff = modes[:, None] - modes[None, :]
        return coeffs[diff % M]


def k_matrix(problem, K):
    if K is None:
        return np.zeros((problem.reduced_boundary_size,) * 2, dtype=complex)
    if hasattr(K, "matrix"):
        return K.matrix(problem)
    if np.isscalar(K):
        return Scalar(K).matrix(problem)
    return DenseK(np.asarray(K)).matrix(problem)


# ------------------------------------------------------------------ realization


@dataclass
class RealizationBlock:
    """A decoupled piece of a realization: generalized pencil (stiffness, mass).

    ``embed`` lists, per problem block it covers, the rows of this block and
    the matching positions in that problem block's node dofs.
    """

    stiffness: sp.csr_matrix
    mass: np.ndarray
    multiplicity: int
    embed: list
    labels: tuple

    @property
    def size(self):
        return self.stiffness.shape[0]

    def matrix(self):
        """Mass-symmetrized operator W^{-1/2} S W^{-1/2}."""
        d = sp.diags(1.0 / np.sqrt(self.mass))
        return (d @ self.stiffness @ d).tocsr()


@dataclass
class Realization:
    problem: object
    condition: str
    K: np.ndarray
    kspec: object
    blocks: list
    hermitian: bool

    @property
    def mode_diagonal(self):
        return len(self.blocks) == len(self.problem.blocks)

    @property
    def dimension(self):
        return int(sum(b.size * b.multiplicity for b in self.blocks))

    @property
    def matrix(self):
        """Block-diagonal mass-symmetrized matrix (modes counted once)."""
        return sp.block_diag([b.matrix() for b in self.blocks], format="csr")

    def dense(self):
        return self.matrix.toarray()

    def asymmetry(self):
        return hermitian_defect(self.matrix)


def _eliminate_zero_mass(S, mass):
    """Schur-eliminate zero-mass (trace) dofs; returns reduced S and kept indices."""
    ghost = np.flatnonzero(mass == 0.0)
    keep = np.flatnonzero(mass != 0.0)
    if len(ghost) == 0:
        return S.tocsr(), keep
    S = S.tocsr()
    S_kk = S[keep][:, keep]
    S_kg = S[keep][:, ghost].toarray()
    S_gk = S[ghost][:, keep].toarray()
    S_gg = S[ghost][:, ghost].toarray()
    corr = S_kg @ np.linalg.solve(S_gg, S_gk)
    rows, cols = np.nonzero(np.abs(corr) > 0)
    update = sp.csr_matrix((corr[rows, cols], (rows, cols)), shape=S_kk.shape)
    return (S_kk - update).tocsr(), keep


def dirichlet_realization(problem):
    """All Dirichlet-system traces set to zero; the boundary rows are removed."""
    blocks = []
    for bi, b in enumerate(problem.blocks):
        idx = b.interior
        S = b.stiffness[idx][:, idx].tocsr()
        pos = np.searchsorted(b.node_dofs, idx)
        blocks.append(RealizationBlock(S, b.mass[idx], b.multiplicity,
                                       [(bi, np.arange(len(idx)), pos)], (b.label,)))
    return Realization(problem, "dirichlet", None, None, blocks, True)


def _is_mode_diagonal(problem, K):
    if not problem.multi_mode:
        return True
    for a, sa in enumerate(problem.boundary_slices):
        for c, sc in enumerate(problem.boundary_slices):
            if a != c and np.any(K[sa, sc] != 0):
                return False
    return True


def _boundary_weight(problem):
    w = problem.boundary_weight
    if not np.allclose(w, w[0]):
        raise InvalidConfig("boundary measure must be uniform over the boundary basis")
    return float(w[0])


def realization_with_K(problem, K=None):
    """Realization with boundary condition Cu = K Bu (K = None gives Cu = 0).

    The condition enters the quadratic form as omega * (K Bu, Bu) on the
    boundary dofs, which is the symmetric ghost-node elimination of a
    central-difference conormal row.
    """
    Kmat = k_matrix(problem, K)
    n = problem.reduced_boundary_size
    if Kmat.shape != (n, n):
        raise DimensionMismatch(f"K has shape {Kmat.shape}, boundary basis has size {n}")
    omega = _boundary_weight(problem)
    herm = hermitian_defect(Kmat) <= HERMITIAN_TOL
    if np.allclose(np.imag(Kmat), 0.0, atol=0.0):
        Kmat = np.real(Kmat)
    blocks = []
    if _is_mode_diagonal(problem, Kmat):
        for bi, b in enumerate(problem.blocks):
            sl = problem.boundary_slices[bi]
            Kb = Kmat[sl, sl]
            S = b.stiffness.astype(np.result_type(Kb.dtype, float)).tolil()
            for i, di in enumerate(b.boundary):
                for j, dj in enumerate(b.boundary):
                    if Kb[i, j] != 0:
                        S[di, dj] = S[di, dj] + omega * Kb[i, j]
            S, keep = _eliminate_zero_mass(S.tocsr(), b.mass)
            pos = np.searchsorted(b.node_dofs, keep)
            blocks.append(RealizationBlock(S, b.mass[keep], b.multiplicity,
                                           [(bi, np.arange(len(keep)), pos)], (b.label,)))
    else:
        if np.any(problem.boundary_multiplicity > 1):
            raise DimensionMismatch("mode-coupling K requires simple modes")
        S_all = sp.block_diag([b.stiffness for b in problem.blocks], format="lil")
        S_all = S_all.astype(np.result_type(Kmat.dtype, float))
        offsets = np.cumsum([0] + [b.stiffness.shape[0] for b in problem.blocks])
        bdofs = np.concatenate([offsets[i] + b.boundary for i, b in enumerate(problem.blocks)])
        for i, di in enumerate(bdofs):
            for j, dj in enumerate(bdofs):
                if Kmat[i, j] != 0:
                    S_all[di, dj] = S_all[di, dj] + omega * Kmat[i, j]
        mass = np.concatenate([b.mass for b in problem.blocks])
        S, keep = _eliminate_zero_mass(S_all.tocsr(), mass)
        embed = []
        for bi, b in enumerate(problem.blocks):
            lo, hi = offsets[bi], offsets[bi + 1]
            rows = np.flatnonzero((keep >= lo) & (keep < hi))
            pos = np.searchsorted(b.node_dofs, keep[rows] - lo)
            embed.append((bi, rows, pos))
        blocks.append(RealizationBlock(S, mass[keep], 1, embed,
                                       tuple(int(b.label) for b in problem.blocks)))
    return Realization(problem, "K", Kmat, K, blocks, bool(herm))


# --------------------------------------------------------------------- spectra


@dataclass
class SpectrumList:
    eigenvalues: np.ndarray
    hermitian: bool
    window: tuple | None = None
    source: str = ""

    def __len__(self):
        return len(self.eigenvalues)


def _bandwidth(A):
    A = A.tocoo()
    if A.nnz == 0:
        return 0
    return int(np.max(np.abs(A.row - A.col)))


def _gershgorin(A):
    A = A.tocsr()
    d = np.real(A.diagonal())
    r = np.asarray(abs(A).sum(axis=1)).ravel() - np.abs(d)
    return float(np.min(d - r)), float(np.max(d + r))


LANCZOS_MIN_SIZE = 6000


def _lowest_by_lanczos(A, hi, shift):
    """All eigenvalues below ``hi`` of a large sparse Hermitian matrix.

    Shift-invert Lanczos about ``shift`` (below the spectrum) returns the
    lowest eigenvalues first.
    k grows until an eigenvalue at or above ``hi`` has been found, so the
    returned set is complete up to Lanczos convergence.
    """
    n = A.shape[0]
    k = 8
    v0 = np.random.default_rng(0).standard_normal(n)
    while True:
        w = spla.eigsh(A.tocsc(), k=k, sigma=shift, which="LM", v0=v0, tol=1e-12,
                       return_eigenvectors=False)
        w = np.sort(np.real(w))
        if w[-1] >= hi or k >= n // 4:
            if w[-1] < hi:
                return sla.eigvalsh(A.toarray())
            return w
        k *= 2


def hermitian_block_eigenvalues(A, window=None):
    """Eigenvalues of a sparse Hermitian matrix, optionally only inside an open window."""
    A = sp.csr_matrix(A)
    A = 0.5 * (A + A.conj().T)
    n = A.shape[0]
    if n == 0:
        return np.zeros(0)
    lo_g, hi_g = _gershgorin(A)
    lo, hi = (-np.inf, np.inf) if window is None else window
    if lo >= hi_g or hi <= lo_g:
        return np.zeros(0)
    sel_lo = max(lo, lo_g - 1.0)
    sel_hi = min(hi, hi_g + 1.0)
    pad = 1e-9 * max(abs(lo_g), abs(hi_g), 1.0)
    select = "a" if window is None else "v"
    rng = (sel_lo - pad, sel_hi + pad)
    real = not np.iscomplexobj(A.data) or np.all(np.imag(A.data) == 0)
    if real:
        A = A.real
    perm = None
    bw = _bandwidth(A)
    if bw > 1:
        perm = csgraph.reverse_cuthill_mckee(A.tocsr(), symmetric_mode=True)
        Ap = A[perm][:, perm]
        if _bandwidth(Ap) < bw:
            A, bw = Ap.tocsr(), _bandwidth(Ap)
    if bw <= 1 and real:
        d = A.diagonal()
        e = A.diagonal(1) if n > 1 else np.zeros(0)
        if select == "a":
            w = sla.eigh_tridiagonal(d, e, eigvals_only=True)
        else:
            w = sla.eigh_tridiagonal(d, e, eigvals_only=True, select="v", select_range=rng)
    elif n > LANCZOS_MIN_SIZE and lo <= lo_g and np.isfinite(hi):
        w = _lowest_by_lanczos(A, hi, lo_g - 1.0)
    elif bw <= 64 and n > 4 * (bw + 1):
        ab = np.zeros((bw + 1, n), dtype=A.dtype)
        for k in range(bw + 1):
            diag = A.diagonal(-k)
            ab[k, : n - k] = diag
        # value selection in ?sbevx/?hbevx allocates an n x n work matrix
        w = sla.eig_banded(ab, lower=True, eigvals_only=True)
    else:
        w = sla.eigvalsh(A.toarray())
    w = np.sort(np.real(w))
    if window is not None:
        w = w[(w > lo) & (w < hi)]
    return w


def spectrum(realization, window=None):
    """All (mass-weighted) eigenvalues, multiplicity-expanded, optionally windowed."""
    vals = []
    herm = realization.hermitian
    for b in realization.blocks:
        A = b.matrix()
        if herm:
            w = hermitian_block_eigenvalues(A, window)
        else:
            w = sla.eigvals(A.toarray())
            if window is not None:
                w = w[(w.real > window[0]) & (w.real < window[1])]
        vals.append(np.repeat(w, b.multiplicity))
    ev = np.concatenate(vals) if vals else np.zeros(0)
    ev = np.sort(ev) if herm else ev[np.lexsort((ev.imag, ev.real))]
    return SpectrumList(ev, herm, window, realization.condition)
