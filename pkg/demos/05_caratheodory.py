"""
A Caratheodory-type limit
=========================

The limit of the radial sums of ``(s_u - s(r p)) conj(s_u)`` has a closed form
in the radial derivative ``a_u``. Unlike the complex case it is not simply
``a_u conj(s_u)``: node and derivative need not commute.
"""

from pathlib import Path

import numpy as np

from qnp.io import load_problem
from qnp.pick import caratheodory_limit, solve
from qnp.quaternion import ONE, qabs, qconj, qmul

a = np.array([0.0, 0.6, 0.8, 0.0])
node = np.array([0.0, 0.0, 0.6, 0.8])


def s(p):
    return 0.5 * (ONE + qmul(p, a))


res = caratheodory_limit(s, node)
print("a p - p a:", qmul(a, node) - qmul(node, a))
print("limit of sums:", np.round(res.lhs, 8))
print("closed form:  ", np.round(res.rhs, 8))
print("a conj(s_u):  ", np.round(qmul(res.derivative, qconj(res.value)), 8))
print("gap:", res.gap)

###############################################################################
# On an interpolant
# -----------------

prob = load_problem(Path(__file__).resolve().parent / "problems" / "two_nodes.json").problem()
sol = solve(prob, samples=1000)
for u in range(prob.n):
    res = caratheodory_limit(sol, prob.nodes[u], prob.values[u])
    print(f"node {u}: gap {res.gap:.2e}, |a_u| = {qabs(res.derivative):.4f}")
