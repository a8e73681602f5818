"""Orthogonality and duality on random admissible parameters.

Draws a few parameter sets, checks the weighted orthogonality block by block
and prints the worst residual per size.
"""

from superkraw import dualize, random_paramset, validate
from superkraw.krawtchouk import duality_residual, orthogonality_residual, transition_residuals

for m, n in [(1, 1), (2, 1), (1, 3), (3, 2)]:
    ps = random_paramset(m, n, seed=10 * m + n)
    assert validate(ps).ok
    worst = 0.0
    for D in range(4):
        for d in range(min(D, n + 1) + 1):
            worst = max(worst, orthogonality_residual(ps, D, d).value)
    tr = transition_residuals(ps, 3)
    print(
        f"m={m} n={n}: orthogonality {worst:.2e}  duality {duality_residual(ps, 3).value:.2e}"
        f"  round trip {tr['round_trip']:.2e}"
    )

# swapping the roles of the tuples gives the dual family
ps = random_paramset(1, 1, seed=3)
print("dual of dual is the original:", dualize(dualize(ps)).even == ps.even)
