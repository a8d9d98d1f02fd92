"""
Monodromy, resonances and resolvent bounds
==========================================

1 is outside the spectrum of exp(2 pi A) exactly when no eigenvalue of A
sits on i Z. The report checks that and the resolvent scan side by side.
"""

import numpy as np

from evodich import equivalence_report, resolvent_fourier

for label, A in [("diag(-1,-2)", np.diag([-1.0, -2.0])),
                 ("diag(2i,-1)", np.diag([2j, -1.0])),
                 ("diag(0.5i)", np.diag([0.5j]))]:
    rep = equivalence_report(A)
    print(f"{label:12s} 1 in rho(monodromy): {rep.one_in_rho_monodromy!s:5}  "
          f"iZ in rho(A): {rep.iZ_in_rho!s:5}  nearest k {rep.nearest_k:2d}  "
          f"sup {rep.resolvent_sup:.3g}  consistent {rep.consistent}")

# (A - ik)^{-1} is also a Fourier coefficient of s -> (exp(2 pi A) - I)^{-1} exp(sA)
A = np.array([[-0.5, 1.0], [0.0, -1.5]])
direct = np.linalg.inv(A - 3j * np.eye(2))
for nodes in (256, 512, 1024):
    err = np.linalg.norm(resolvent_fourier(A, 3, nodes) - direct, 2)
    print(f"{nodes:5d} nodes: error {err:.2e}")
