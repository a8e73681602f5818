"""Smallest nontrivial case: one even and one odd pair with binary parameters.

Run with ``python3 demos/binary_walkthrough.py``.
"""

import numpy as np

from superkraw import basis, binary_paramset, eval_p, eval_p1, p_matrix, transition_matrix
from superkraw.krawtchouk import TILDE_TO_PLAIN, orthogonality_residual
from superkraw.superpoly import bits_of

ps = binary_paramset()  # p = p~ = (1/2, 1/2), U = [[1, 1], [1, -1]], same for the odd part
print("p  =", ps.p, " q  =", ps.q)
print("U  =\n", ps.U)

# the odd factor is a normalized minor of V
for e in (0b01, 0b10):
    for et in (0b01, 0b10):
        print(f"P1(xi{bits_of(e)}, xi~{bits_of(et)}) = {eval_p1(e, et, ps.odd).real:+.3f}")

# degree D = 2 splits by odd degree d
D = 2
for d in range(3):
    P = p_matrix(ps, D, d).real
    print(f"\nd = {d}, block {P.shape}")
    print(np.round(P, 4))
    print("orthogonality residual:", orthogonality_residual(ps, D, d).value)

# a single entry with its labels
bas = basis(1, 1, D)
(a, e), (at, et) = bas.monomials[0], bas.monomials[1]
print(f"\nP({a}, {bits_of(e)}; {at}, {bits_of(et)}) = {eval_p(a, e, at, et, ps).real:.4f}")

T = transition_matrix(TILDE_TO_PLAIN, ps, D)
print("\ntilde -> plain, block sizes:", {d: T.block(d).shape for d in T.basis.blocks})
