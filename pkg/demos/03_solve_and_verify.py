"""
Solving and verifying
=====================

For an invertible Pick matrix every unitary constant ``e`` gives a solution
``s = (a e + b) * (c e + d)^-*`` built from the 2x2 function Theta. Checks
near the boundary go through closed forms, since truncated series are useless
there.
"""

from pathlib import Path

import numpy as np

from qnp.io import load_problem
from qnp.pick import necessity_check, solve, verify
from qnp.quaternion import ONE

HERE = Path(__file__).resolve().parent

prob = load_problem(HERE / "problems" / "two_nodes.json").problem()
sol = solve(prob)
print("provenance:", sol.provenance, " rank:", sol.rank)
print("max |s| over 10^4 interior samples:", sol.schur_max)
print("Theta(1) - I:", np.abs(sol.theta.evaluate(ONE) - np.eye(2)[..., None] * ONE).max())
print("s * D - N residual:", sol.defining_residual())

###############################################################################
# Radial sweep
# ------------
# Gaps |s(r p_u) - s_u| shrink like 1 - r, and the difference quotient
# approaches a real number beta_u no larger than kappa_u.

rep = verify(sol, prob)
for nr in rep.nodes:
    print(f"node {nr.index}: kappa = {nr.kappa:.4f}")
    for r, gap, quot in zip(nr.radii, nr.gaps, nr.quotients):
        print(f"  r = {r:<7} gap = {gap:.3e}  quotient = {np.round(quot, 5)}")
    print(f"  limit error {nr.limit_error:.1e}, beta = {np.round(nr.beta, 6)}, margin {nr.bastille_margin:.1e}")

###############################################################################
# Other parameters
# ----------------
# Any unitary constant works; the boundary values do not move.

for e in ([0.0, 1.0, 0.0, 0.0], [np.cos(2.0), 0.0, np.sin(2.0), 0.0]):
    other = solve(prob, e=np.array(e), samples=1000)
    errs = [n.limit_error for n in verify(other, prob).nodes]
    print("e =", e, " s(0) =", np.round(other.evaluate(np.zeros(4)), 4), " limit errors", errs)

###############################################################################
# P(r) converges to P
# -------------------

report = necessity_check(prob, sol)
for row in report.radial:
    print(f"r = {row['r']}: max |P_uv(r) - P_uv| = {row['max_offdiag_deviation']:.3e}, min eig {row['min_eig']:.3e}")
