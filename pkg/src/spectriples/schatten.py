"""Resolvent-power differences, singular-value decay fits and Schatten verdicts.

Resolvents act on nodal functions in the lumped-mass inner product; all
matrices here are written in the orthonormal coordinates W^{1/2} u, where a
realization with pencil (S, W) has resolvent W^{1/2} (S - zW)^{-1} W^{1/2},
extended by zero on nodes the realization removes.
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import DimensionMismatch, InsufficientTail, InvalidCombination, SpectrumHit
from .numerics import SparseFactor

CLASSES = ("general", "dirichlet_bounded", "elliptic")
FLOOR = 1e-12


# ------------------------------------------------------------ resolvent pieces


class _BlockResolvent:
    """Resolvent of one realization block, acting on the node space of its modes."""

    def __init__(self, block, problem, z):
        self.n_nodes = problem.N + 1
        self.sqrt_w = np.sqrt(block.mass)
        M = (block.stiffness - z * sp.diags(block.mass)).tocsc()
        try:
            self.factor = SparseFactor(M, exc=SpectrumHit)
        except SpectrumHit as exc:
            raise SpectrumHit(f"z = {z} is in the spectrum of block {block.labels}: {exc}") from None
        # global node position of each row of the block
        self.rows = np.empty(block.size, dtype=int)
        self.covers = []
        for bi, rows, pos in block.embed:
            self.rows[rows] = bi * self.n_nodes + problem.blocks[bi].nodes[pos]
            self.covers.append(bi)

    def apply(self, x, adjoint=False):
        """x: (total nodes, k) in orthonormal coordinates."""
        y = self.sqrt_w[:, None] * x[self.rows]
        y = self.factor.solve(y, adjoint=adjoint)
        out = np.zeros(x.shape, dtype=np.result_type(x, y))
        out[self.rows] = self.sqrt_w[:, None] * y
        return out


def _resolvents(r, z, scope=None):
    out = []
    for b in r.blocks:
        covers = [e[0] for e in b.embed]
        if scope is None or set(covers) & set(scope):
            if scope is not None and not set(covers) <= set(scope):
                raise DimensionMismatch("realization block straddles the requested modes")
            out.append(_BlockResolvent(b, r.problem, z))
    return out


def _apply_power(res, x, ell, adjoint=False):
    for _ in range(ell):
        x = sum(R.apply(x, adjoint) for R in res) if res else np.zeros_like(x)
    return x


def _check_pair(r1, r2):
    if r1.problem is not r2.problem:
        raise DimensionMismatch("realizations must belong to the same model problem")


def resolvent_power_difference(r1, r2, z, ell=1):
    """Dense (r1 - z)^{-ell} - (r2 - z)^{-ell} on the full nodal space.

    The matrix has one (N + 1)-row slab per mode block (modes counted once);
    intended for problems small enough to hold it densely.
    """
    _check_pair(r1, r2)
    if ell < 1:
        raise InvalidCombination("ell must be a positive integer")
    p = r1.problem
    n = len(p.blocks) * (p.N + 1)
    if n > 20000:
        raise DimensionMismatch(f"dense difference of size {n} is too large; use "
                                "difference_singular_values")
    eye = np.eye(n)
    R1, R2 = _resolvents(r1, z), _resolvents(r2, z)
    return _apply_power(R1, eye, ell) - _apply_power(R2, eye, ell)


@dataclass
class SingularValueList:
    """Descending singular values, multiplicity-expanded, with per-mode bookkeeping."""

    values: np.ndarray
    modes: np.ndarray
    multiplicity: np.ndarray
    per_mode: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.values)

    def collapsed(self):
        """One value per mode group (largest), each counted once."""
        order = np.argsort(-self.per_mode, kind="stable")
        return SingularValueList(self.per_mode[order], self.modes[order],
                                 np.ones(len(order), dtype=int), self.per_mode[order],
                                 dict(self.meta, collapsed=True))


def _randomized_svd(apply, apply_adj, n, rank, rng, oversample=10, power=0):
    k = min(n, rank + oversample)
    Y = apply(rng.standard_normal((n, k)))
    for _ in range(power):
        Q, _ = np.linalg.qr(Y)
        Y = apply(apply_adj(Q))
    Q, _ = np.linalg.qr(Y)
    B = apply_adj(Q).conj().T
    return sla.svdvals(B)


def difference_singular_values(r1, r2, z, ell=1, seed=0, top=None):
    """Singular values of the resolvent-power difference, without forming it.

    For mode-diagonal pairs each mode is handled separately; the difference
    has rank at most ell * (boundary dofs of the mode), so a randomized range
    finder with that rank plus oversampling is exact up to roundoff.  ``top``
    keeps only the largest ``top`` values per mode (default: all computed).
    The returned list keeps the largest value of each mode (repeated by its
    multiplicity) as ``values``; all values are in ``meta['all']``.
    """
    _check_pair(r1, r2)
    if ell < 1:
        raise InvalidCombination("ell must be a positive integer")
    p = r1.problem
    rng = np.random.default_rng(seed)
    n_nodes = p.N + 1
    if r1.mode_diagonal and r2.mode_diagonal:
        scopes = [[bi] for bi in range(len(p.blocks))]
    else:
        scopes = [list(range(len(p.blocks)))]
    per_mode, everything = [], []
    for scope in scopes:
        R1 = _resolvents(r1, z, scope)
        R2 = _resolvents(r2, z, scope)
        n = len(p.blocks) * n_nodes
        idx = np.concatenate([np.arange(bi * n_nodes, (bi + 1) * n_nodes) for bi in scope])

        def apply(X, adjoint=False):
            full = np.zeros((n, X.shape[1]), dtype=X.dtype)
            full[idx] = X
            out = _apply_power(R1, full, ell, adjoint) - _apply_power(R2, full, ell, adjoint)
            return out[idx]

        rank = ell * sum(len(p.blocks[bi].boundary) for bi in scope)
        s = _randomized_svd(apply, lambda X: apply(X, True), len(idx), rank, rng)
        s = s[:top] if top else s
        mult = p.blocks[scope[0]].multiplicity if len(scope) == 1 else 1
        everything.append(np.repeat(s, mult))
        per_mode.append(s[0] if len(scope) == 1 else s)
    labels = np.array([p.blocks[sc[0]].label for sc in scopes]) if len(scopes) > 1 else None
    meta = {"z": complex(z), "ell": ell, "pair": (r1.condition, r2.condition),
            "all": np.sort(np.concatenate(everything))[::-1]}
    if labels is None:
        vals = np.sort(everything[0])[::-1]
        return SingularValueList(vals, np.zeros(len(vals), dtype=int),
                                 np.ones(len(vals), dtype=int), vals, meta)
    per_mode = np.asarray(per_mode)
    mult = np.array([p.blocks[sc[0]].multiplicity for sc in scopes])
    expanded = np.repeat(per_mode, mult)
    order = np.argsort(-expanded, kind="stable")
    return SingularValueList(expanded[order], np.repeat(labels, mult)[order],
                             mult, per_mode, meta)


# ----------------------------------------------------------------- exponents


def predicted_schatten_exponent(n, m, ell, cls):
    """Schatten index p for the resolvent-power difference, as an exact fraction.

    general: 2(n - 1)/(4 m ell - 1); dirichlet_bounded: (n - 1)/(2m), ell = 1 only;
    elliptic: (n - 1)/(2 m ell).  Singular values then decay like j^{-1/p}.
    """
    if cls not in CLASSES:
        raise InvalidCombination(f"class must be one of {CLASSES}, got {cls!r}")
    if n < 2 or m < 1 or ell < 1:
        raise InvalidCombination(f"need n >= 2, m >= 1, ell >= 1 (got n={n}, m={m}, ell={ell})")
    if cls == "general":
        return Fraction(2 * (n - 1), 4 * m * ell - 1)
    if cls == "dirichlet_bounded":
        if ell != 1:
            raise InvalidCombination("the Dirichlet-bounded class is stated for ell = 1 only")
        return Fraction(n - 1, 2 * m)
    return Fraction(n - 1, 2 * m * ell)


@dataclass
class DecayFit:
    fitted_exponent: float
    r_squared: float
    window: tuple
    predicted_p: Fraction | None = None

    @property
    def predicted_exponent(self):
        return None if self.predicted_p is None else float(1 / self.predicted_p)


def fit_decay_exponent(s, tail_fraction=1.0, drop_head=None, predicted_p=None, floor=FLOOR):
    """Least-squares slope of -log s_j against log j.

    Values below ``floor * s_1`` are discarded; ``drop_head`` (default 10% of
    the remaining indices) are skipped at the start, and only the last
    ``tail_fraction`` of what is left enters the fit.  ``window`` is the
    1-based inclusive index range used.
    """
    vals = np.asarray(s.values if isinstance(s, SingularValueList) else s, dtype=float)
    if vals.size == 0 or vals[0] <= 0:
        raise InsufficientTail("no positive singular values")
    keep = int(np.sum(vals >= floor * vals[0]))
    if drop_head is None:
        drop_head = int(0.1 * keep)
    start = drop_head
    if not 0 < tail_fraction <= 1:
        raise InsufficientTail("tail_fraction must lie in (0, 1]")
    start = max(start, keep - int(np.ceil(tail_fraction * (keep - start))))
    j = np.arange(start + 1, keep + 1, dtype=float)
    y = vals[start:keep]
    if len(j) < 10:
        raise InsufficientTail(f"only {len(j)} points in the fit window (need 10)")
    if np.any(y <= 0):
        raise InsufficientTail("non-positive singular values in the fit window")
    x, ly = np.log(j), np.log(y)
    slope, intercept = np.polyfit(x, ly, 1)
    resid = ly - (slope * x + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - float(np.sum(resid**2)) / ss_tot)
    exponent = -float(slope)
    if exponent == 0:
        exponent = 0.0
    return DecayFit(exponent, r2, (start + 1, keep), predicted_p)


def schatten_verdict(fit, margin=0.15):
    """'pass' iff the fitted exponent reaches the predicted one minus ``margin``."""
    if fit.predicted_p is None:
        raise InvalidCombination("fit carries no predicted exponent")
    return "pass" if fit.fitted_exponent >= fit.predicted_exponent - margin else "fail"


def numerical_rank(s, rel=1e-10):
    s = np.asarray(s)
    return 0 if s.size == 0 or s[0] == 0 else int(np.sum(s > rel * s[0]))
