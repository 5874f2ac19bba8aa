"""
Quaternions, star products and slices
=====================================

Quaternions are plain ``(..., 4)`` arrays ``[w, x, y, z]``. Series act with
coefficients on the right of the variable, and their natural product (the star
product) convolves coefficients instead of multiplying values.
"""

import numpy as np

from qnp.quaternion import I, J, K, chi_embed, qabs, qmul, random_units
from qnp.series import PowerSeries, extend, slice_point, star_eval_shortcut, star_mul

rng = np.random.default_rng(0)

# i j = k but j i = -k
print("ij =", qmul(I, J), " ji =", qmul(J, I))

# the 2x2 complex lift turns products into matrix products
p, q = random_units(rng, 2)
print("lift error:", np.abs(chi_embed(qmul(p, q)) - chi_embed(p) @ chi_embed(q)).max())

###############################################################################
# Star product versus pointwise product
# -------------------------------------
# f(p) = j + p and g(p) = i + p k. Pointwise products of values are not the
# values of the star product unless f has real coefficients.

f = PowerSeries(np.array([J, [1.0, 0, 0, 0]])).truncate(4)
g = PowerSeries(np.array([I, K])).truncate(4)
fg = star_mul(f, g)
x = 0.5 * random_units(rng)
print("(f*g)(x)       =", fg.eval(x))
print("f(x) g(x)      =", qmul(f.eval(x), g.eval(x)))
print("shortcut value =", star_eval_shortcut(f.eval, g.eval, x))

###############################################################################
# Slices
# ------
# x + I y belongs to the sphere of the complex number x + i y. Knowing a slice
# function on the complex plane C_i is enough to evaluate it anywhere.

z, unit = slice_point(x)
print("slice point:", z, " unit:", unit)
print("extension error:", qabs(extend(fg.eval, x) - fg.eval(x)))
