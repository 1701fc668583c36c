"""Discretized model elliptic problems.

Every problem is a family of one-dimensional (radial or Cartesian) blocks,
one per angular mode, each carrying a symmetric stiffness form and a lumped
mass.  For order 2 (m = 1) the form is the flux-weighted central difference

    sum_e rho(x_{e+1/2}) |u_{e+1} - u_e|^2 / h + sum_i w_i V_i |u_i|^2

with trapezoid masses ``w_i = rho(x_i) h`` (halved at kept end nodes).  This
is exactly what ghost-node elimination of a central-difference Robin row
produces, so boundary conditions can be added to the form without breaking
symmetry.  For order 4 (m = 2) the form is ``sum_i w_i |delta^2 u_i|^2 +
w_i q_i |u_i|^2`` over nodes plus one ghost per end; the ghost is traded for
the interior-normal derivative trace, which is a zero-mass degree of freedom.

Boundary degrees of freedom are always ordered trace-order-major: all
order-0 traces first, then order-1 traces.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import InvalidConfig
from .potentials import Potential, as_potential


@dataclass
class ModeBlock:
    """One separated-variables block of a model problem."""

    label: int
    multiplicity: int
    stiffness: sp.csr_matrix
    mass: np.ndarray
    boundary: np.ndarray
    interior: np.ndarray
    node_dofs: np.ndarray
    nodes: np.ndarray
    trace_orders: tuple
    points: tuple
    weight: float
    centrifugal: float = 0.0

    @property
    def ghost(self):
        return np.flatnonzero(self.mass == 0.0)


@dataclass
class ModelProblem:
    kind: str
    n: int
    m: int
    N: int
    h: float
    grid: np.ndarray
    potential: Potential
    modes: np.ndarray
    multiplicity: np.ndarray
    blocks: list
    rho_power: int
    ends: tuple
    geometry: dict = field(default_factory=dict)

    def __post_init__(self):
        self.boundary_labels = []
        self.boundary_slices = []
        start = 0
        for b in self.blocks:
            nb = len(b.boundary)
            self.boundary_slices.append(slice(start, start + nb))
            for j, pt in zip(b.trace_orders, b.points):
                self.boundary_labels.append((int(b.label), pt, int(j)))
            start += nb

    @property
    def reduced_boundary_size(self):
        """Boundary basis size with each mode counted once."""
        return len(self.boundary_labels)

    @property
    def boundary_dimension(self):
        return int(sum(len(b.boundary) * b.multiplicity for b in self.blocks))

    @property
    def boundary_multiplicity(self):
        return np.concatenate([np.full(len(b.boundary), b.multiplicity) for b in self.blocks])

    @property
    def boundary_weight(self):
        return np.concatenate([np.full(len(b.boundary), b.weight) for b in self.blocks])

    @property
    def boundary_trace_orders(self):
        return np.array([lab[2] for lab in self.boundary_labels], dtype=int)

    @property
    def boundary_modes(self):
        return np.array([lab[0] for lab in self.boundary_labels], dtype=int)

    @property
    def multi_mode(self):
        return len(self.blocks) > 1

    @property
    def rho(self):
        return self.grid ** self.rho_power if self.rho_power else np.ones_like(self.grid)

    @property
    def node_weights(self):
        """Trapezoid quadrature weights rho(x) h on all grid nodes."""
        w = self.rho * self.h
        w[0] *= 0.5
        w[-1] *= 0.5
        return w

    def laplace_beltrami(self, label):
        """Eigenvalue of -Delta on the boundary manifold for a mode label."""
        radius = self.geometry.get("r_inner", 1.0)
        if self.kind == "annulus_m1":
            return label**2 / radius**2
        if self.kind == "ball_exterior_m1":
            return label * (label + 1) / radius**2
        return 0.0

    def q_on_grid(self):
        return self.potential(self.grid)


def _flux_form(x, rho_power, V, keep_left, keep_right):
    """Tridiagonal stiffness and lumped mass on all nodes of ``x``."""
    N = len(x) - 1
    h = x[1] - x[0]
    rho = x**rho_power if rho_power else np.ones_like(x)
    mid = 0.5 * (x[:-1] + x[1:])
    c = (mid**rho_power if rho_power else np.ones(N)) / h
    w = rho * h
    if keep_left:
        w[0] *= 0.5
    if keep_right:
        w[-1] *= 0.5
    diag = w * V
    diag[:-1] += c
    diag[1:] += c
    S = sp.diags([-c, diag, -c], [-1, 0, 1], shape=(N + 1, N + 1), format="csr")
    return S, w


def _m1_block(x, rho_power, V, keep_right, label, multiplicity, weight, centrifugal):
    N = len(x) - 1
    S, w = _flux_form(x, rho_power, V, True, keep_right)
    kept = np.arange(N + 1) if keep_right else np.arange(N)
    S = S[kept][:, kept].tocsr()
    w = w[kept]
    if keep_right:
        boundary = np.array([0, N])
        points = ("left", "right")
    else:
        boundary = np.array([0])
        points = ("left",)
    interior = np.setdiff1d(np.arange(len(kept)), boundary)
    return ModeBlock(
        label=label,
        multiplicity=multiplicity,
        stiffness=S,
        mass=w,
        boundary=boundary,
        interior=interior,
        node_dofs=np.arange(len(kept)),
        nodes=kept,
        trace_orders=(0,) * len(boundary),
        points=points,
        weight=weight,
        centrifugal=centrifugal,
    )


def _m2_block(x, q):
    """Order-4 block with ghost values traded for normal-derivative traces.

    Raw unknowns are (u_{-1}, u_0, ..., u_N, u_{N+1}); dofs are
    (u_0, ..., u_N, d_left, d_right) with u_{-1} = u_1 - 2h d_left and
    u_{N+1} = u_{N-1} - 2h d_right, d being the interior-normal derivative.
    """
    N = len(x) - 1
    h = x[1] - x[0]
    w = np.full(N + 1, h)
    w[0] = w[-1] = 0.5 * h
    n_raw = N + 3
    rows = np.repeat(np.arange(N + 1), 3)
    cols = (np.arange(N + 1)[:, None] + np.arange(3)[None, :]).ravel()
    vals = np.tile([1.0, -2.0, 1.0], N + 1) / h**2
    D2 = sp.csr_matrix((vals, (rows, cols)), shape=(N + 1, n_raw))
    Q = sp.diags(np.concatenate([[0.0], w * q, [0.0]]))
    raw = (D2.T @ sp.diags(w) @ D2 + Q).tocsr()
    n_dof = N + 3
    T = sp.lil_matrix((n_raw, n_dof))
    for i in range(N + 1):
        T[i + 1, i] = 1.0
    T[0, 1] = 1.0
    T[0, N + 1] = -2.0 * h
    T[N + 2, N - 1] = 1.0
    T[N + 2, N + 2] = -2.0 * h
    T = T.tocsr()
    S = (T.T @ raw @ T).tocsr()
    S = 0.5 * (S + S.T)
    mass = np.concatenate([w, [0.0, 0.0]])
    return ModeBlock(
        label=0,
        multiplicity=1,
        stiffness=S.tocsr(),
        mass=mass,
        boundary=np.array([0, N, N + 1, N + 2]),
        interior=np.arange(1, N),
        node_dofs=np.arange(N + 1),
        nodes=np.arange(N + 1),
        trace_orders=(0, 0, 1, 1),
        points=("left", "right", "left", "right"),
        weight=1.0,
    )


def _check_potential(q):
    q = as_potential(q)
    return q


def build_interval_m1(length, N, potential=1.0):
    """-u'' + q u on (0, length); boundary = both endpoints."""
    if not length > 0:
        raise InvalidConfig("interval length must be positive")
    if int(N) < 16:
        raise InvalidConfig("interval_m1 needs N >= 16")
    N = int(N)
    q = _check_potential(potential)
    x = np.linspace(0.0, float(length), N + 1)
    block = _m1_block(x, 0, q(x), True, 0, 1, 1.0, 0.0)
    return ModelProblem("interval_m1", 1, 1, N, x[1] - x[0], x, q, np.array([0]), np.array([1]),
                        [block], 0, ("boundary", "boundary"), {"length": float(length)})


def build_halfline_m1(length, N, potential=1.0):
    """-u'' + q u on (0, inf), truncated at ``length`` with a Dirichlet closure."""
    if not length > 0:
        raise InvalidConfig("truncation length must be positive")
    if int(N) < 16:
        raise InvalidConfig("halfline_m1 needs N >= 16")
    N = int(N)
    q = _check_potential(potential)
    q_inf = q.at_infinity()
    if q_inf is None:
        q_inf = q.lower_bound()
    if not q_inf > 0:
        raise InvalidConfig("halfline_m1 needs q -> q_inf > 0 for decaying solutions")
    x = np.linspace(0.0, float(length), N + 1)
    block = _m1_block(x, 0, q(x), False, 0, 1, 1.0, 0.0)
    return ModelProblem("halfline_m1", 1, 1, N, x[1] - x[0], x, q, np.array([0]), np.array([1]),
                        [block], 0, ("boundary", "dirichlet"),
                        {"length": float(length), "q_inf": float(q_inf),
                         "truncation_error": float(np.exp(-2.0 * np.sqrt(q_inf) * length))})


def build_interval_m2(length, N, potential=1.0):
    """u'''' + q u on (0, length); B = (u, d_n u), C = (-d_n^3 u, d_n^2 u)."""
    if not length > 0:
        raise InvalidConfig("interval length must be positive")
    if int(N) < 32:
        raise InvalidConfig("interval_m2 needs N >= 32")
    N = int(N)
    q = _check_potential(potential)
    x = np.linspace(0.0, float(length), N + 1)
    block = _m2_block(x, q(x))
    return ModelProblem("interval_m2", 1, 2, N, x[1] - x[0], x, q, np.array([0]), np.array([1]),
                        [block], 0, ("boundary", "boundary"), {"length": float(length)})


def build_annulus_m1(r_inner, r_outer, N, K_max, potential=0.0):
    """-Delta + q(r) on r_inner < r < r_outer in the plane, Fourier modes |k| <= K_max.

    The inner circle is the boundary of interest; r_outer carries a Dirichlet
    closure.  Mode blocks are weighted by r.
    """
    if not 0 < r_inner < r_outer:
        raise InvalidConfig("annulus needs 0 < r_inner < r_outer")
    if int(K_max) < 8:
        raise InvalidConfig("annulus needs K_max >= 8")
    if int(N) < 16:
        raise InvalidConfig("annulus needs N >= 16")
    N, K_max = int(N), int(K_max)
    q = _check_potential(potential)
    x = np.linspace(float(r_inner), float(r_outer), N + 1)
    qx = q(x)
    modes = np.arange(-K_max, K_max + 1)
    blocks = [_m1_block(x, 1, qx + k**2 / x**2, False, int(k), 1, float(r_inner), float(k**2))
              for k in modes]
    return ModelProblem("annulus_m1", 2, 1, N, x[1] - x[0], x, q, modes, np.ones_like(modes),
                        blocks, 1, ("boundary", "dirichlet"),
                        {"r_inner": float(r_inner), "r_outer": float(r_outer), "K_max": K_max})


def build_ball_exterior_m1(r_inner=1.0, R=40.0, N=4000, L_max=16, potential=1.0):
    """-Delta + q(r) outside the ball of radius r_inner in R^3, truncated at R.

    Spherical degrees 0..L_max with multiplicity 2l+1; blocks weighted by r^2.
    The interior normal on the sphere points in +r.
    """
    if not 0 < r_inner < R:
        raise InvalidConfig("ball exterior needs 0 < r_inner < R")
    if int(N) < 16:
        raise InvalidConfig("ball exterior needs N >= 16")
    if int(L_max) < 0:
        raise InvalidConfig("L_max must be nonnegative")
    N, L_max = int(N), int(L_max)
    q = _check_potential(potential)
    q_inf = q.at_infinity()
    if q_inf is None:
        q_inf = q.lower_bound()
    if not q_inf > 0:
        raise InvalidConfig("ball exterior needs q -> q_inf > 0")
    x = np.linspace(float(r_inner), float(R), N + 1)
    qx = q(x)
    degrees = np.arange(L_max + 1)
    blocks = [_m1_block(x, 2, qx + l * (l + 1) / x**2, False, int(l), 2 * int(l) + 1,
                        float(r_inner) ** 2, float(l * (l + 1)))
              for l in degrees]
    return ModelProblem("ball_exterior_m1", 3, 1, N, x[1] - x[0], x, q, degrees, 2 * degrees + 1,
                        blocks, 2, ("boundary", "dirichlet"),
                        {"r_inner": float(r_inner), "R": float(R), "L_max": L_max,
                         "q_inf": float(q_inf),
                         "truncation_error": float(np.exp(-2.0 * np.sqrt(q_inf) * (R - r_inner)))})


BUILDERS = {
    "interval_m1": build_interval_m1,
    "halfline_m1": build_halfline_m1,
    "interval_m2": build_interval_m2,
    "annulus_m1": build_annulus_m1,
    "ball_exterior_m1": build_ball_exterior_m1,
}
