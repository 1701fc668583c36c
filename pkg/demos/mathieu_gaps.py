"""Eigenvalues of Robin realizations inside spectral gaps of a Mathieu operator.

The Dirichlet problem for -u'' + (2 cos 2x + 3) u on (0, 40 pi) has a band-gap
spectrum.  Imposing u'(0) = sigma u(0) instead pulls a few surface states into
the first two gaps; the boundary formula counts them from two inertias.
"""

import numpy as np

from spectriples import build_halfline_m1, dirichlet_realization, find_gaps, spectrum
from spectriples.counting import check_gap_count, left_edge_buffer
from spectriples.potentials import Potential
from spectriples.realizations import realization_with_K

p = build_halfline_m1(40 * np.pi, 4000, Potential.mathieu())
gaps = find_gaps(spectrum(dirichlet_realization(p), (0.0, 8.0)), (0.0, 8.0), 0.25)[:2]
for i, g in enumerate(gaps):
    print(f"gap {i}: ({g.alpha:.4f}, {g.beta:.4f}), width {g.width:.4f}")

print(f"\n{'gap':>3} {'sigma':>6} {'eps':>6} {'formula':>8} {'direct':>7}  eigenvalues in gap")
for i, g in enumerate(gaps):
    for sigma in (-1.5, -1.0, -0.5, -0.25):
        ev = spectrum(realization_with_K(p, sigma), (g.alpha, g.beta)).eigenvalues
        for frac in (0.02, 0.1):
            rep = check_gap_count(p, sigma, g, frac * g.width)
            print(f"{i:3d} {sigma:6.2f} {frac:6.2f} {rep.formula_count:8d} "
                  f"{rep.direct_count:7d}  {np.round(ev, 4)}")

g = gaps[0]
grid = g.width * np.arange(1, 200) / 200
for sigma in (-1.5, -1.0):
    print(f"\nleft-edge buffer, gap 0, sigma={sigma}: eps0 = "
          f"{left_edge_buffer(p, sigma, g, grid):.4f}")
