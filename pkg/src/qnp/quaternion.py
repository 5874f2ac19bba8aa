"""Quaternion scalars stored as float arrays.

Conventions
-----------
- A quaternion is a trailing axis of length 4 holding ``[w, x, y, z]`` for
  ``w + x i + y j + z k``. Every function accepts batches ``(..., 4)``.
- The complex lift is ``p = z1 + z2 j`` with ``z1 = w + x i`` and
  ``z2 = y + z i``, mapped to ``[[z1, z2], [-conj(z2), conj(z1)]]``.
- ``left_op(p) @ q == p * q`` and ``right_op(q) @ p == p * q`` on component
  vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError

DEFAULT_TOL = 1e-10

ONE = np.array([1.0, 0.0, 0.0, 0.0])
I = np.array([0.0, 1.0, 0.0, 0.0])
J = np.array([0.0, 0.0, 1.0, 0.0])
K = np.array([0.0, 0.0, 0.0, 1.0])


def asquat(p) -> np.ndarray:
    """Coerce a real scalar, a `Quaternion` or an array to a ``(..., 4)`` array."""
    if isinstance(p, Quaternion):
        return p.array
    arr = np.asarray(p, dtype=float)
    if arr.ndim == 0:
        return np.array([float(arr), 0.0, 0.0, 0.0])
    if arr.shape[-1] != 4:
        raise ValueError(f"quaternion arrays need a trailing axis of 4, got {arr.shape}")
    return arr


def real(x) -> np.ndarray:
    """Embed real numbers (any shape) as quaternions."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape + (4,))
    out[..., 0] = x
    return out


def qmul(p, q) -> np.ndarray:
    """Hamilton product, broadcasting over leading axes."""
    p = asquat(p)
    q = asquat(q)
    p0, p1, p2, p3 = np.moveaxis(p, -1, 0)
    q0, q1, q2, q3 = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            p0 * q0 - p1 * q1 - p2 * q2 - p3 * q3,
            p0 * q1 + p1 * q0 + p2 * q3 - p3 * q2,
            p0 * q2 - p1 * q3 + p2 * q0 + p3 * q1,
            p0 * q3 + p1 * q2 - p2 * q1 + p3 * q0,
        ],
        axis=-1,
    )


def qconj(p) -> np.ndarray:
    p = asquat(p)
    out = -p
    out[..., 0] = p[..., 0]
    return out


def qabs2(p) -> np.ndarray:
    p = asquat(p)
    return np.sum(p * p, axis=-1)


def qabs(p) -> np.ndarray:
    return np.sqrt(qabs2(p))


def qinv(p) -> np.ndarray:
    p = asquat(p)
    n2 = qabs2(p)
    if np.any(n2 == 0.0):
        raise ZeroDivisionError("quaternion inverse of zero")
    return qconj(p) / n2[..., None]


def qre(p) -> np.ndarray:
    return asquat(p)[..., 0]


def qim(p) -> np.ndarray:
    """Imaginary part as a quaternion (real component zeroed)."""
    out = np.array(asquat(p), dtype=float, copy=True)
    out[..., 0] = 0.0
    return out


def imaginary_unit(p) -> np.ndarray:
    """The unit ``I_p`` with ``p = Re(p) + I_p |Im(p)|``.

    Raises `DegenerateInputError` for real input, where every unit qualifies.
    """
    v = qim(p)
    n = qabs(v)
    if np.any(n == 0.0):
        raise DegenerateInputError("imaginary unit of a real quaternion is not unique")
    return v / n[..., None]


def qpow(p, n: int) -> np.ndarray:
    p = asquat(p)
    out = np.broadcast_to(ONE, p.shape).copy()
    base = p
    while n > 0:
        if n & 1:
            out = qmul(out, base)
        base = qmul(base, base)
        n >>= 1
    return out


def powers(p, count: int) -> np.ndarray:
    """Stack ``p**0 .. p**(count-1)`` along a new leading axis."""
    p = asquat(p)
    out = np.empty((count,) + p.shape)
    out[0] = ONE
    for n in range(1, count):
        out[n] = qmul(out[n - 1], p)
    return out


def same_sphere(p, q, tol: float = DEFAULT_TOL) -> bool | np.ndarray:
    """True when ``p`` and ``q`` share real part and modulus, i.e. ``[p] == [q]``."""
    res = (np.abs(qre(p) - qre(q)) <= tol) & (np.abs(qabs(p) - qabs(q)) <= tol)
    return bool(res) if np.ndim(res) == 0 else res


def to_complex_pair(p) -> tuple[np.ndarray, np.ndarray]:
    """Split ``p = z1 + z2 j`` into complex arrays ``(z1, z2)``."""
    p = asquat(p)
    return p[..., 0] + 1j * p[..., 1], p[..., 2] + 1j * p[..., 3]


def from_complex_pair(z1, z2) -> np.ndarray:
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    return np.stack([z1.real, z1.imag, z2.real, z2.imag], axis=-1)


def chi_embed(p) -> np.ndarray:
    """Complex 2x2 lift of ``p`` (batched to ``(..., 2, 2)``)."""
    z1, z2 = to_complex_pair(p)
    return np.stack(
        [np.stack([z1, z2], axis=-1), np.stack([-np.conj(z2), np.conj(z1)], axis=-1)],
        axis=-2,
    )


def chi_unembed(m) -> np.ndarray:
    """Inverse of `chi_embed`, reading the first row only."""
    m = np.asarray(m)
    return from_complex_pair(m[..., 0, 0], m[..., 0, 1])


def left_op(p) -> np.ndarray:
    """4x4 real matrix of ``x -> p x``."""
    p0, p1, p2, p3 = np.moveaxis(asquat(p), -1, 0)
    return np.stack(
        [
            np.stack([p0, -p1, -p2, -p3], axis=-1),
            np.stack([p1, p0, -p3, p2], axis=-1),
            np.stack([p2, p3, p0, -p1], axis=-1),
            np.stack([p3, -p2, p1, p0], axis=-1),
        ],
        axis=-2,
    )


def right_op(q) -> np.ndarray:
    """4x4 real matrix of ``x -> x q``."""
    q0, q1, q2, q3 = np.moveaxis(asquat(q), -1, 0)
    return np.stack(
        [
            np.stack([q0, -q1, -q2, -q3], axis=-1),
            np.stack([q1, q0, q3, -q2], axis=-1),
            np.stack([q2, -q3, q0, q1], axis=-1),
            np.stack([q3, q2, -q1, q0], axis=-1),
        ],
        axis=-2,
    )


def mul_ops(p, side: str = "left") -> np.ndarray:
    if side == "left":
        return left_op(p)
    if side == "right":
        return right_op(p)
    raise ValueError(f"side must be 'left' or 'right', not {side!r}")


def random_quaternions(rng: np.random.Generator, size=(), scale: float = 1.0) -> np.ndarray:
    """Gaussian quaternions; ``size`` is the batch shape."""
    size = (size,) if isinstance(size, int) else tuple(size)
    return scale * rng.standard_normal(size + (4,))


def random_units(rng: np.random.Generator, size=()) -> np.ndarray:
    """Quaternions uniform on the unit 3-sphere."""
    q = random_quaternions(rng, size)
    return q / qabs(q)[..., None]


def random_imaginary_units(rng: np.random.Generator, size=()) -> np.ndarray:
    q = qim(random_quaternions(rng, size))
    return q / qabs(q)[..., None]


@dataclass(frozen=True)
class Quaternion:
    """Immutable single quaternion ``w + x i + y j + z k``.

    Thin convenience wrapper; the numerical code works on raw arrays.
    """

    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @classmethod
    def from_array(cls, a) -> "Quaternion":
        a = asquat(a)
        return cls(*(float(v) for v in a))

    @property
    def array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def __add__(self, other):
        return Quaternion.from_array(self.array + asquat(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Quaternion.from_array(self.array - asquat(other))

    def __rsub__(self, other):
        return Quaternion.from_array(asquat(other) - self.array)

    def __neg__(self):
        return Quaternion.from_array(-self.array)

    def __mul__(self, other):
        return Quaternion.from_array(qmul(self.array, asquat(other)))

    def __rmul__(self, other):
        return Quaternion.from_array(qmul(asquat(other), self.array))

    def __truediv__(self, other):
        return Quaternion.from_array(qmul(self.array, qinv(asquat(other))))

    def __abs__(self) -> float:
        return float(qabs(self.array))

    def conj(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def inverse(self) -> "Quaternion":
        return Quaternion.from_array(qinv(self.array))

    @property
    def real(self) -> float:
        return self.w

    def imaginary_unit(self) -> "Quaternion":
        return Quaternion.from_array(imaginary_unit(self.array))

    def chi(self) -> np.ndarray:
        return chi_embed(self.array)

    def tolist(self) -> list[float]:
        return [self.w, self.x, self.y, self.z]
