"""
The Pick matrix
===============

Boundary data: nodes on the unit sphere, unimodular values and bounds on the
angular derivative. The Pick matrix must be positive semidefinite for a Schur
interpolant to exist.
"""

from pathlib import Path

import numpy as np

from qnp.io import load_problem
from qnp.pick import InterpolationProblem, build_system, necessity_check, r1_structural_check

HERE = Path(__file__).resolve().parent

prob = load_problem(HERE / "problems" / "two_nodes.json").problem()
system = build_system(prob)

print("P =")
print(np.round(system.P, 4))
print("eigenvalues:", system.eigenvalues())

# the off-diagonal entries solve the Stein equation exactly
print("Stein residual (off-diagonal):", system.offdiag_stein_residual())
print("structural identity residual:", r1_structural_check(system))

###############################################################################
# Shrinking the bounds
# --------------------
# The diagonal holds the bounds. Small bounds cannot absorb the coupling
# between the nodes and P stops being positive.

for scale in (1.0, 0.5, 0.25, 0.1):
    report = necessity_check(InterpolationProblem(prob.nodes, prob.values, scale * prob.kappas))
    print(f"bounds x {scale:4}: min eigenvalue {report.eigs[0]: .4f}  psd {report.psd}")
