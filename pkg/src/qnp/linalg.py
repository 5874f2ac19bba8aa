"""Dense quaternion matrices.

A quaternion matrix is an array of shape ``(rows, cols, 4)`` (leading batch
axes are allowed where noted). Inversion and spectra go through the complex
lift, which maps an ``n x m`` quaternion matrix to a ``2n x 2m`` complex one
blockwise by `chi_embed`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    CompanionSingularError,
    NotHermitianError,
    SingularMatrixError,
    SylvesterSingularError,
)
from .quaternion import (
    DEFAULT_TOL,
    ONE,
    asquat,
    chi_embed,
    from_complex_pair,
    left_op,
    qabs2,
    qconj,
    qmul,
    qre,
    right_op,
)

COND_LIMIT = 1e14


def qmatrix(entries) -> np.ndarray:
    """Build a quaternion matrix from nested lists of 4-arrays."""
    m = np.asarray(entries, dtype=float)
    if m.ndim != 3 or m.shape[-1] != 4:
        raise ValueError(f"expected shape (rows, cols, 4), got {m.shape}")
    return m


def identity(n: int) -> np.ndarray:
    out = np.zeros((n, n, 4))
    out[np.arange(n), np.arange(n), 0] = 1.0
    return out


def diag(entries) -> np.ndarray:
    entries = asquat(entries)
    n = entries.shape[0]
    out = np.zeros((n, n, 4))
    out[np.arange(n), np.arange(n)] = entries
    return out


def diagonal(M) -> np.ndarray:
    M = np.asarray(M)
    n = min(M.shape[-3], M.shape[-2])
    return M[..., np.arange(n), np.arange(n), :]


def scalar_matrix(x, n: int) -> np.ndarray:
    """``x * I_n`` for a quaternion (or real) ``x``."""
    return diag(np.broadcast_to(asquat(x), (n, 4)))


def qmatmul(M, N) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    N = np.asarray(N, dtype=float)
    return qmul(M[..., :, :, None, :], N[..., None, :, :, :]).sum(axis=-3)


def left_scale(p, M) -> np.ndarray:
    """Entrywise ``p * M[i, j]``."""
    return qmul(asquat(p), M)


def right_scale(M, p) -> np.ndarray:
    return qmul(M, asquat(p))


def adjoint(M) -> np.ndarray:
    return np.swapaxes(qconj(M), -3, -2)


def lift(M) -> np.ndarray:
    """Blockwise complex lift, ``(..., n, m, 4) -> (..., 2n, 2m)``."""
    M = np.asarray(M, dtype=float)
    *batch, n, m, _ = M.shape
    blocks = chi_embed(M)  # (..., n, m, 2, 2)
    blocks = np.moveaxis(blocks, -2, -3)  # (..., n, 2, m, 2)
    return blocks.reshape(*batch, 2 * n, 2 * m)


def unlift(L) -> np.ndarray:
    """Inverse of `lift`; reads the first row of each 2x2 block."""
    L = np.asarray(L)
    *batch, n2, m2 = L.shape
    blocks = L.reshape(*batch, n2 // 2, 2, m2 // 2, 2)
    return from_complex_pair(blocks[..., :, 0, :, 0], blocks[..., :, 0, :, 1])


def norm(M) -> float:
    """Operator 2-norm (the lift preserves it)."""
    return float(np.linalg.norm(lift(M), 2))


def invert(M) -> np.ndarray:
    """Inverse through the complex lift.

    Raises `SingularMatrixError` when the lift condition number exceeds 1e14.
    """
    M = np.asarray(M, dtype=float)
    if M.shape[-3] != M.shape[-2]:
        raise ValueError("invert needs a square matrix")
    L = lift(M)
    cond = np.linalg.cond(L)
    if np.any(~np.isfinite(cond) | (cond > COND_LIMIT)):
        raise SingularMatrixError(f"matrix is numerically singular (cond={np.max(cond):.3g})")
    return unlift(np.linalg.inv(L))


def solve(M, B) -> np.ndarray:
    """Solve ``M X = B`` for square ``M``."""
    L = lift(M)
    cond = np.linalg.cond(L)
    if np.any(~np.isfinite(cond) | (cond > COND_LIMIT)):
        raise SingularMatrixError(f"matrix is numerically singular (cond={np.max(cond):.3g})")
    return unlift(np.linalg.solve(L, lift(B)))


def is_hermitian(M, tol: float = DEFAULT_TOL) -> bool:
    M = np.asarray(M, dtype=float)
    scale = max(1.0, float(np.max(np.abs(M), initial=0.0)))
    return bool(np.max(np.abs(M - adjoint(M)), initial=0.0) <= tol * scale)


def hermitian_eigs(M, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Sorted real eigenvalues of a Hermitian quaternion matrix.

    The lift doubles every eigenvalue; one copy of each pair is returned.
    """
    M = np.asarray(M, dtype=float)
    if M.shape[0] != M.shape[1]:
        raise NotHermitianError("matrix is not square")
    if not is_hermitian(M, tol):
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    L = lift(M)
    vals = np.linalg.eigvalsh(0.5 * (L + L.conj().T))
    pairs = vals.reshape(-1, 2)
    scale = max(1.0, float(np.max(np.abs(vals), initial=0.0)))
    gap = float(np.max(pairs[:, 1] - pairs[:, 0], initial=0.0))
    if gap > 1e-8 * scale:
        raise ArithmeticError(f"lift eigenvalues failed to pair (gap {gap:.3g})")
    return pairs.mean(axis=1)


def is_psd(M, tol: float = DEFAULT_TOL) -> bool:
    eigs = hermitian_eigs(M, tol)
    return bool(eigs.size == 0 or eigs[0] >= -tol)


def rank(M, tol: float = DEFAULT_TOL) -> int:
    eigs = hermitian_eigs(M, tol)
    if eigs.size == 0:
        return 0
    threshold = tol * max(1.0, float(np.max(np.abs(eigs))))
    return int(np.count_nonzero(eigs > threshold))


@dataclass(frozen=True)
class SylvesterProblem:
    """The scalar equation ``x - a x b = rhs``."""

    a: np.ndarray
    b: np.ndarray
    rhs: np.ndarray

    def operator(self) -> np.ndarray:
        return sylvester_operator(self.a, self.b)

    def residual(self, x) -> np.ndarray:
        return asquat(x) - qmul(qmul(self.a, x), self.b) - asquat(self.rhs)


def sylvester_operator(a, b) -> np.ndarray:
    """4x4 real matrix of ``x -> x - a x b``."""
    return np.eye(4) - left_op(a) @ right_op(b)


def _checked_solve(op, rhs, error_cls, what):
    cond = np.linalg.cond(op)
    bad = ~np.isfinite(cond) | (cond > COND_LIMIT)
    if np.any(bad):
        raise error_cls(f"{what} is singular (cond={np.max(cond):.3g})")
    return np.linalg.solve(op, rhs[..., None])[..., 0]


def solve_sylvester(a, b=None, rhs=None) -> np.ndarray:
    """Unique ``x`` with ``x - a x b = rhs``; batched over leading axes.

    Accepts either a `SylvesterProblem` or the three quaternions. Raises
    `SylvesterSingularError` when the real 4x4 system is singular, which for
    unit ``a, b`` happens exactly when ``a`` lies on the sphere of ``conj(b)``.
    """
    if isinstance(a, SylvesterProblem):
        a, b, rhs = a.a, a.b, a.rhs
    a, b, rhs = asquat(a), asquat(b), asquat(rhs)
    a, b, rhs = np.broadcast_arrays(a, b, rhs)
    return _checked_solve(sylvester_operator(a, b), rhs, SylvesterSingularError, "Sylvester operator")


def geometric_sum(p, alpha, q, beta=ONE) -> np.ndarray:
    """Closed form of ``sum_t p**t alpha q**t beta``; batched.

    Computed as ``((Id - L(p) R(q))^{-1} alpha) beta``. The series meaning
    needs ``|p| |q| < 1``; the closed form is the analytic continuation.
    """
    p, alpha, q, beta = (asquat(v) for v in (p, alpha, q, beta))
    p, alpha, q = np.broadcast_arrays(p, alpha, q)
    x = _checked_solve(sylvester_operator(p, q), alpha, SingularMatrixError, "geometric-sum operator")
    return qmul(x, beta)


def geometric_sum_fast(p, alpha, q, beta=ONE) -> np.ndarray:
    """`geometric_sum` without the conditioning check (hot evaluation loops)."""
    p, alpha, q, beta = (asquat(v) for v in (p, alpha, q, beta))
    p, alpha, q = np.broadcast_arrays(p, alpha, q)
    x = np.linalg.solve(sylvester_operator(p, q), alpha[..., None])[..., 0]
    return qmul(x, beta)


def companion_matrix(p, A) -> np.ndarray:
    """``Id - 2 Re(p) A + |p|^2 A^2``."""
    p = asquat(p)
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    return identity(n) - 2.0 * qre(p) * A + qabs2(p) * qmatmul(A, A)


def magic_sum(p, G, A) -> np.ndarray:
    """Closed form of ``sum_t p**t G A**t`` for an ``n x m`` G and ``m x m`` A.

    ``(G - conj(p) G A)(Id - 2 Re(p) A + |p|^2 A^2)^{-1}``.
    """
    p = asquat(p)
    G = np.asarray(G, dtype=float)
    num = G - left_scale(qconj(p), qmatmul(G, A))
    try:
        den_inv = invert(companion_matrix(p, A))
    except SingularMatrixError as exc:
        raise CompanionSingularError(str(exc)) from exc
    return qmatmul(num, den_inv)


def star_resolvent(p, A) -> np.ndarray:
    """``(Id - p A)^{-*} = (Id - conj(p) A)(|p|^2 A^2 - 2 Re(p) A + Id)^{-1}``.

    Equals ``sum_n p**n A**n`` wherever ``|p| ||A|| < 1``.
    """
    A = np.asarray(A, dtype=float)
    return magic_sum(p, identity(A.shape[0]), A)


def s_spectrum_member(A, s, tol: float = DEFAULT_TOL) -> bool:
    """Whether ``A^2 - 2 Re(s) A + |s|^2 Id`` is numerically singular."""
    A = np.asarray(A, dtype=float)
    s = asquat(s)
    n = A.shape[0]
    Q = qmatmul(A, A) - 2.0 * qre(s) * A + qabs2(s) * identity(n)
    cond = np.linalg.cond(lift(Q))
    return bool(not np.isfinite(cond) or cond > 1.0 / tol)
