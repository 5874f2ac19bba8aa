"""
Recovering a Blaschke factor
============================

Data read off a Blaschke factor at a few boundary points give a Pick matrix of
rank one. The solution is then unique: a principal minor fixes Theta, and one
remaining node fixes the unitary constant.
"""

import numpy as np

from qnp.pick import blaschke_problem, interior_samples, necessity_check, solve
from qnp.quaternion import qabs
from qnp.series import blaschke_factor

zero = np.array([0.3, 0.0, 0.4, 0.0])
nodes = np.array([[0.0, 1.0, 0.0, 0.0], [np.cos(1.0), 0.0, 0.0, np.sin(1.0)], [-0.6, 0.0, 0.8, 0.0]])
prob = blaschke_problem(zero, nodes)
print("values:", np.round(prob.values, 4))
print("kappas:", np.round(prob.kappas, 6))
print("Pick eigenvalues:", necessity_check(prob).eigs)

sol = solve(prob)
print("provenance:", sol.provenance, " rank:", sol.rank, " minor:", sol.minor)
print("parameters from the other nodes:", sol.diagnostics["parameters"])

b = blaschke_factor(zero)
p = interior_samples(50, seed=1)
print("max |s - b| inside:", np.max(qabs(sol.evaluate(p) - b.eval(p))))
print("boundary modulus error:", sol.diagnostics["boundary_modulus_error"])
