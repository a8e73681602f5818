"""Occupation probabilities of free fermions after a rotation.

For real positive odd parameters the matrix V rescales to a rotation g.
Squared minors of g give the chance of finding modes J occupied in I.
"""

import math

from superkraw.numkern import enumerate_subsets
from superkraw.params import OddParams, random_admissible
from superkraw.spherical import build_g, occupation_probs, sample_occupation

odd = random_admissible(3, 2, OddParams)
frame = build_g(odd)
print("g g^T - 1 :", frame.orthogonality_residual())
print("det g - 1 :", frame.det_residual())

J = (0, 2)
dist = occupation_probs(odd, J, frame=frame, seed=1)
print(f"\nstart occupied {J}; total probability {dist.total():.15f}")

N = 20_000
freq, _ = sample_occupation(dist, N)
for I in enumerate_subsets(4, 2):
    p = dist.probs[I]
    sd = math.sqrt(p * (1 - p) / N) or 1.0
    print(f"  {I}: p={p:.4f}  sampled={freq.get(I, 0.0):.4f}  z={(freq.get(I, 0.0) - p) / sd:+.2f}")
