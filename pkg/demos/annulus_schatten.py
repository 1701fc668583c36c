"""Singular-value decay of resolvent differences on an annulus.

For the Laplacian on 1 < r < 2 the difference of Robin and Dirichlet
resolvents at z = -1 is compact; its singular values decay like j^(-2) for the
first power and j^(-4) for the second, and the Calderon operator difference
T(z) = Lambda(z) - Lambda(0) only decays like 1/|k| in the Fourier mode k.
"""

from fractions import Fraction

import numpy as np

from spectriples import (build_annulus_m1, difference_singular_values, dirichlet_realization,
                         fit_decay_exponent, realization_with_K, t_operator)

p = build_annulus_m1(1.0, 2.0, 800, 64, 0.0)
r1, r2 = realization_with_K(p, -1.0), dirichlet_realization(p)
for ell, pred in ((1, Fraction(1, 2)), (2, Fraction(1, 4))):
    sv = difference_singular_values(r1, r2, -1.0, ell)
    fit = fit_decay_exponent(sv, predicted_p=pred)
    print(f"ell={ell}: fitted exponent {fit.fitted_exponent:.3f} "
          f"(predicted {fit.predicted_exponent:.0f}), window {fit.window}, "
          f"R^2 {fit.r_squared:.5f}")

T = t_operator(p, -1.0)
d, modes = np.diag(T.matrix), T.modes()
print("\n  k     T_k(-1)    k*|T_k|")
for k in (0, 4, 8, 16, 32, 64):
    v = d[np.flatnonzero(modes == k)[0]]
    print(f"{k:3d} {v:11.6f} {k * abs(v):10.5f}")
