"""Negative eigenvalues of a Robin half-line operator, counted two ways.

-u'' + u on (0, L) with u'(0) = sigma u(0) has exactly one negative eigenvalue,
1 - sigma**2, when sigma < -1.  The boundary formula reads the same count off
a 1 x 1 matrix built from the Calderon operator Lambda(0) = -1.
"""

from spectriples import build_halfline_m1, calderon, realization_with_K, spectrum
from spectriples.counting import boundary_matrix, check_negative_count

p = build_halfline_m1(40.0, 4000, 1.0)
print(f"Lambda(0) = {calderon(p, 0.0).matrix[0, 0]:.6f}   (exact -1)")

print(f"{'sigma':>7} {'boundary matrix':>16} {'formula':>8} {'direct':>7} {'eigenvalue':>11}")
for sigma in (-3.0, -2.0, -1.5, -1.01, -0.99, -0.5, 0.0, 1.0):
    M, _ = boundary_matrix(p, sigma)
    rep = check_negative_count(p, sigma)
    ev = spectrum(realization_with_K(p, sigma), (-20.0, 0.0)).eigenvalues
    low = f"{ev[0]:.5f}" if len(ev) else "-"
    print(f"{sigma:7.2f} {M[0, 0].real:16.5f} {rep.formula_count:8d} {rep.direct_count:7d} {low:>11}")

print("\nexact negative eigenvalues 1 - sigma^2:",
      [1 - s**2 for s in (-3.0, -2.0, -1.5) if s < -1])
