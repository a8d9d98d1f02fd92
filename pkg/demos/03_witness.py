"""
Approximate fixed points and the witness quotient
=================================================

When exp(2 pi A) has eigenvalue 1 the periodic generator is not invertible.
A near-fixed vector v gives a cut-off witness g with |Bg| / |g| of order 1/m.
"""

import numpy as np

from evodich import near_fixed_vector, witness_quotient

A = np.array([[0.0, 1.0], [0.0, 0.0]])

print(" m      norm   ratio        bound")
for m in (10, 100, 1000):
    v = near_fixed_vector(A, m)
    for norm in ("C", "L2"):
        q = witness_quotient(A, v, m, norm)
        print(f"{m:<6} {norm:<6} {q.ratio:.3e}    {q.bound:.3e}")
