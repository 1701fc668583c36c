"""Spectral gaps and boundary index formulas for eigenvalue counts.

Both formulas rest on one congruence: with X = -Lambda(0) > 0 and
T(t) = Lambda(t) - Lambda(0),

    kappa_-(A_K - t) = kappa_-(A_D - t) + kappa_-(I + X^{-1/2} (K - T(t)) X^{-1/2}),

where A_D is the Dirichlet realization.  At t = 0 this gives the
negative-eigenvalue count; differencing two points of a Dirichlet gap gives
the number of eigenvalues of A_K inside the gap.
"""

from dataclasses import dataclass, field

import numpy as np

from .boundary import calderon
from .errors import (CalderonNotNegative, EpsilonTooLarge, InvalidConfig, NotAGap,
                     NotHermitianK)
from .numerics import HERMITIAN_TOL, fractional_power, hermitian_defect
from .boundary import weighted_inertia
from .realizations import dirichlet_realization, k_matrix, realization_with_K, spectrum

CONVENTIONS = ("negative_root", "principal")


@dataclass(frozen=True)
class SpectralGap:
    alpha: float
    beta: float
    source: str = ""

    def __post_init__(self):
        if not self.alpha < self.beta:
            raise InvalidConfig(f"gap needs alpha < beta, got ({self.alpha}, {self.beta})")

    @property
    def width(self):
        return self.beta - self.alpha

    def satisfies_gap_inequality(self, eigenvalues, rtol=1e-12):
        """|2 lambda - (alpha + beta)| >= beta - alpha for every eigenvalue."""
        lam = np.asarray(eigenvalues, dtype=float)
        return bool(np.all(np.abs(2 * lam - (self.alpha + self.beta))
                           >= self.width * (1 - rtol)))


@dataclass
class CountReport:
    formula_count: int
    direct_count: int | None = None
    ambiguous: bool = False
    context: dict = field(default_factory=dict)

    @property
    def agree(self):
        return self.direct_count is not None and self.formula_count == self.direct_count


def find_gaps(s, window, min_width):
    """Open intervals between consecutive eigenvalues in ``window`` wider than ``min_width``."""
    if not s.hermitian:
        raise InvalidConfig("gaps are defined for Hermitian spectra only")
    lo, hi = window
    ev = np.sort(np.real(s.eigenvalues))
    ev = ev[(ev >= lo) & (ev <= hi)]
    gaps = []
    for a, b in zip(ev[:-1], ev[1:]):
        if b - a > min_width:
            gaps.append(SpectralGap(float(a), float(b), str(s.source)))
    return gaps


def count_direct(r, interval):
    """Number of eigenvalues of the realization in the open interval, with multiplicity."""
    a, b = interval
    if not a < b:
        return 0
    if not r.hermitian:
        raise NotHermitianK("direct counts need a Hermitian realization")
    return int(len(spectrum(r, (a, b)).eigenvalues))


# ------------------------------------------------------------------ formulas


def _negative_calderon_root(problem):
    L0 = calderon(problem, 0.0)
    if hermitian_defect(L0.matrix) > 1e-8:
        raise CalderonNotNegative("Lambda(0) is not Hermitian")
    L0.matrix = 0.5 * (L0.matrix + L0.matrix.conj().T)
    w = np.linalg.eigvalsh(L0.matrix)
    if w[-1] >= 0:
        raise CalderonNotNegative(f"Lambda(0) has largest eigenvalue {w[-1]:.3e} >= 0")
    return L0, fractional_power(-L0.matrix, -0.5)


def _hermitian_k(problem, K):
    Kmat = k_matrix(problem, K)
    if hermitian_defect(Kmat) > HERMITIAN_TOL:
        raise NotHermitianK(f"K has relative asymmetry {hermitian_defect(Kmat):.3e}")
    Kmat = 0.5 * (Kmat + Kmat.conj().T)
    if np.allclose(Kmat.imag, 0.0, atol=0.0):
        Kmat = Kmat.real
    return Kmat


def boundary_matrix(problem, K, t=0.0, convention="negative_root", t_sign=-1):
    """I + X^{-1/2} (K + t_sign T(t)) X^{-1/2} with X = -Lambda(0).

    ``convention="principal"`` instead reads Lambda^{-1/2} with the principal
    branch, which replaces X^{-1/2} by -i X^{-1/2} and flips the sign of the
    congruence term.
    """
    if convention not in CONVENTIONS:
        raise InvalidConfig(f"lambda_root_convention must be one of {CONVENTIONS}")
    L0, R = _negative_calderon_root(problem)
    Kmat = _hermitian_k(problem, K)
    inner = Kmat
    if t != 0:
        inner = inner + t_sign * (calderon(problem, t).matrix - L0.matrix)
    M = R @ inner @ R
    sign = 1.0 if convention == "negative_root" else -1.0
    return np.eye(len(M)) + sign * 0.5 * (M + M.conj().T), L0


def _kappa(problem, K, t, convention, t_sign):
    M, L0 = boundary_matrix(problem, K, t, convention, t_sign)
    inr = weighted_inertia(M, L0.multiplicity, L0.modes())
    return inr


def unresolved_trace_modes(problem, K):
    """Negative directions of the form restricted to massless derivative-trace dofs.

    Those dofs are eliminated when the realization is assembled, which is an
    inertia-preserving step only when this count is zero.  A positive value
    means K is too large for the grid (its derivative-trace block must stay
    above roughly -2/h) and the direct count will fall short of the formula.
    """
    Kmat = k_matrix(problem, K)
    omega = float(problem.boundary_weight[0])
    total = 0
    for b, sl in zip(problem.blocks, problem.boundary_slices):
        massless = np.flatnonzero(b.mass[b.boundary] == 0)
        if massless.size == 0:
            continue
        dofs = np.asarray(b.boundary)[massless]
        S = b.stiffness.toarray()[np.ix_(dofs, dofs)]
        Kb = Kmat[sl, sl][np.ix_(massless, massless)]
        H = S + omega * Kb
        w = np.linalg.eigvalsh(0.5 * (H + H.conj().T))
        total += int(np.sum(w < 0)) * b.multiplicity
    return total


def count_negative_formula(problem, K, convention="negative_root"):
    """Negative eigenvalues of A_K from the inertia of the boundary matrix at t = 0."""
    inr = _kappa(problem, K, 0.0, convention, -1)
    return CountReport(inr.n_minus, None, inr.ambiguous or inr.n_zero > 0,
                       {"problem": problem.kind, "interval": (-np.inf, 0.0),
                        "unresolved_trace_modes": unresolved_trace_modes(problem, K)})


def _check_gap(problem, gap, rtol=1e-9):
    # endpoints are Dirichlet eigenvalues themselves; recomputation may move them by roundoff
    slack = rtol * max(1.0, abs(gap.alpha), abs(gap.beta))
    D = spectrum(dirichlet_realization(problem), (gap.alpha + slack, gap.beta - slack)).eigenvalues
    if len(D):
        raise NotAGap(f"Dirichlet eigenvalue {D[0]:.6g} inside ({gap.alpha:.6g}, {gap.beta:.6g})")


def gap_count_formula(problem, K, gap, eps, lambda_root_convention="negative_root",
                      t_sign=-1, check_gap=True):
    """Eigenvalues of A_K in the gap, as a difference of two boundary inertias.

    Evaluated at alpha + eps and beta - eps.  ``t_sign=+1`` gives the variant
    with K + T(t) in place of K - T(t).
    """
    if eps <= 0:
        raise InvalidConfig(f"epsilon must be positive, got {eps}")
    if eps >= gap.width:
        raise EpsilonTooLarge(f"epsilon {eps} >= gap width {gap.width}")
    if check_gap:
        _check_gap(problem, gap)
    right = _kappa(problem, K, gap.beta - eps, lambda_root_convention, t_sign)
    left = _kappa(problem, K, gap.alpha + eps, lambda_root_convention, t_sign)
    amb = right.ambiguous or left.ambiguous or right.n_zero > 0 or left.n_zero > 0
    return CountReport(right.n_minus - left.n_minus, None, amb,
                       {"problem": problem.kind, "gap": (gap.alpha, gap.beta), "eps": eps,
                        "interval": (gap.alpha, gap.beta - eps),
                        "lambda_root_convention": lambda_root_convention})


def left_edge_buffer(problem, K, gap, eps_grid):
    """Largest grid value eps0 such that A_K has no eigenvalue in (alpha, alpha + eps0).

    Returns 0.0 when every grid value captures an eigenvalue.
    """
    grid = np.sort(np.asarray(list(eps_grid), dtype=float))
    if grid.size == 0:
        raise InvalidConfig("eps_grid must not be empty")
    _check_gap(problem, gap)
    ev = spectrum(realization_with_K(problem, K), (gap.alpha, gap.beta)).eigenvalues
    best = 0.0
    for e in grid:
        if np.sum((ev > gap.alpha) & (ev < gap.alpha + e)) == 0:
            best = float(e)
    return best


# ----------------------------------------------------------------- harnesses


def check_negative_count(problem, K, convention="negative_root", perturb=1e-3):
    """Formula vs direct count over (-inf, 0); an ambiguous case is rerun with K * (1 + perturb)."""
    rep = count_negative_formula(problem, K, convention)
    if rep.ambiguous:
        K = _scaled(problem, K, 1.0 + perturb)
        rep = count_negative_formula(problem, K, convention)
        rep.context["perturbed"] = perturb
    rep.direct_count = count_direct(realization_with_K(problem, K), (-np.inf, 0.0))
    return rep


def check_gap_count(problem, K, gap, eps, lambda_root_convention="negative_root",
                    perturb=1e-3):
    """Formula vs direct count over (alpha, beta - eps); ambiguity reruns with eps * (1 + perturb)."""
    rep = gap_count_formula(problem, K, gap, eps, lambda_root_convention)
    if rep.ambiguous:
        eps = eps * (1.0 + perturb)
        rep = gap_count_formula(problem, K, gap, eps, lambda_root_convention, check_gap=False)
        rep.context["perturbed"] = perturb
    rep.direct_count = count_direct(realization_with_K(problem, K), (gap.alpha, gap.beta - eps))
    return rep


def _scaled(problem, K, factor):
    return factor * _hermitian_k(problem, K)


def sector_check(r, vertex=0.0, semi_angle=0.0, slack=1e-6):
    """True iff every eigenvalue lies in the closed sector |arg(lambda - vertex)| <= angle + slack."""
    if not 0 <= semi_angle < np.pi / 2:
        raise InvalidConfig("semi-angle must lie in [0, pi/2)")
    ev = np.asarray(spectrum(r).eigenvalues, dtype=complex) - vertex
    scale = max(1.0, float(np.max(np.abs(ev)))) if ev.size else 1.0
    ev = ev[np.abs(ev) > 1e-14 * scale]
    return bool(np.all(np.abs(np.angle(ev)) <= semi_angle + slack))
