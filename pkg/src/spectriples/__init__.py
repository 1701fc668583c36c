"""Boundary triples, Calderon operators and spectral counts for discretized elliptic problems."""

from .boundary import (BoundaryOperator, calderon, green_residual, pz_solve, smoothing_operator,
                       t_operator, trace_maps, weyl_function)
from .counting import (CountReport, SpectralGap, count_direct, count_negative_formula,
                       find_gaps, gap_count_formula, left_edge_buffer, sector_check)
from .potentials import Potential
from .problems import (build_annulus_m1, build_ball_exterior_m1, build_halfline_m1,
                       build_interval_m1, build_interval_m2)
from .realizations import (AngularFunction, DenseK, ModeMultiplier, Scalar,
                           dirichlet_realization, realization_with_K, spectrum)
from .schatten import (DecayFit, SingularValueList, difference_singular_values,
                       fit_decay_exponent, predicted_schatten_exponent,
                       resolvent_power_difference, schatten_verdict)

__version__ = "0.1.0"

__all__ = [
    "AngularFunction",
    "BoundaryOperator",
    "CountReport",
    "DecayFit",
    "DenseK",
    "ModeMultiplier",
    "Potential",
    "Scalar",
    "SingularValueList",
    "SpectralGap",
    "build_annulus_m1",
    "build_ball_exterior_m1",
    "build_halfline_m1",
    "build_interval_m1",
    "build_interval_m2",
    "calderon",
    "count_direct",
    "count_negative_formula",
    "difference_singular_values",
    "dirichlet_realization",
    "find_gaps",
    "fit_decay_exponent",
    "gap_count_formula",
    "green_residual",
    "left_edge_buffer",
    "predicted_schatten_exponent",
    "pz_solve",
    "realization_with_K",
    "resolvent_power_difference",
    "schatten_verdict",
    "sector_check",
    "smoothing_operator",
    "spectrum",
    "t_operator",
    "trace_maps",
    "weyl_function",
]
