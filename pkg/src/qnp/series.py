"""Truncated power series ``f(p) = sum_n p**n a_n`` on the quaternionic unit ball.

Coefficients multiply on the right of the variable. The star product of two
series is the Cauchy convolution of their coefficients; pointwise it is *not*
the product of values unless the left factor has real coefficients.

Two series flavours live here:

`PowerSeries`
    explicit coefficients ``a_0 .. a_T``, evaluated by Horner's rule.
`StructuredSeries`
    coefficients ``head_n + sum_k alpha_k q_k**n beta_k``; evaluated in closed
    form through `geometric_sum`, so it stays accurate right up to (and past)
    the unit sphere where truncated series are useless.

The slice helpers split a function on the complex plane ``C_i`` as
``f(z) = F(z) + G(z) j``. Star products then become products of the 2x2
complex matrices ``[[F(z), G(z)], [-conj(G(conj z)), conj(F(conj z))]]``,
which is how left-fractional expressions are evaluated pointwise.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, DivergenceWarning, ZeroConstantTermError
from .linalg import geometric_sum, geometric_sum_fast
from .quaternion import (
    I as UNIT_I,
    ONE,
    asquat,
    chi_embed,
    from_complex_pair,
    qabs,
    qconj,
    qim,
    qinv,
    qmul,
    qre,
    to_complex_pair,
)

DEFAULT_TRUNCATION = 512


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def _pad(a: np.ndarray, length: int) -> np.ndarray:
    if len(a) >= length:
        return a[:length]
    out = np.zeros((length,) + a.shape[1:])
    out[: len(a)] = a
    return out


def quat_convolve(a: np.ndarray, b: np.ndarray, length: int | None = None) -> np.ndarray:
    """``c_n = sum_r a_r b_{n-r}`` for quaternion sequences ``(n, 4)``."""
    a1, a2 = to_complex_pair(a)
    b1, b2 = to_complex_pair(b)
    c1 = np.convolve(a1, b1) - np.convolve(a2, np.conj(b2))
    c2 = np.convolve(a1, b2) + np.convolve(a2, np.conj(b1))
    c = from_complex_pair(c1, c2)
    return c if length is None else _pad(c, length)


def horner(coeffs: np.ndarray, p: np.ndarray) -> np.ndarray:
    """``sum_n p**n coeffs[n]`` with ``p`` batched ``(..., 4)``."""
    acc = np.broadcast_to(coeffs[-1], p.shape).copy()
    for a in coeffs[-2::-1]:
        acc = a + qmul(p, acc)
    return acc


@dataclass(frozen=True)
class PowerSeries:
    """Truncated series with quaternion coefficients ``coeffs[n] = a_n``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim == 1:
            c = c[None, :]
        if c.ndim != 2 or c.shape[1] != 4 or len(c) == 0:
            raise ValueError(f"coefficients must have shape (T+1, 4), got {c.shape}")
        object.__setattr__(self, "coeffs", _readonly(c))

    @classmethod
    def constant(cls, a, order: int = 0) -> "PowerSeries":
        c = np.zeros((order + 1, 4))
        c[0] = asquat(a)
        return cls(c)

    @classmethod
    def monomial(cls, n: int, a=ONE, order: int | None = None) -> "PowerSeries":
        c = np.zeros(((n if order is None else order) + 1, 4))
        c[n] = asquat(a)
        return cls(c)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def truncate(self, order: int) -> "PowerSeries":
        return PowerSeries(_pad(self.coeffs, order + 1))

    def __call__(self, p) -> np.ndarray:
        return self.eval(p)

    def eval(self, p, warn: bool = True) -> np.ndarray:
        p = asquat(p)
        if warn and np.any(qabs(p) >= 1.0) and self.order > 8:
            warnings.warn("evaluating a truncated series outside the open unit ball", DivergenceWarning, stacklevel=2)
        return horner(self.coeffs, p)

    def tail_bound(self, p) -> np.ndarray:
        """``(|p|^(T+1) + (T+2) eps) max|a_n| / (1 - |p|)``; infinite for ``|p| >= 1``.

        Valid for any continuation whose coefficients do not exceed
        ``max|a_n|``; the ``eps`` term covers Horner rounding.
        """
        r = qabs(asquat(p))
        amax = float(np.max(qabs(self.coeffs)))
        slack = (self.order + 2) * np.finfo(float).eps
        with np.errstate(divide="ignore"):
            return np.where(r < 1.0, (r ** (self.order + 1) + slack) * amax / np.maximum(1.0 - r, 0.0), np.inf)

    def eval_with_tail(self, p) -> tuple[np.ndarray, np.ndarray]:
        return self.eval(p), self.tail_bound(p)

    def __add__(self, other: "PowerSeries") -> "PowerSeries":
        n = max(self.order, other.order) + 1
        return PowerSeries(_pad(self.coeffs, n) + _pad(other.coeffs, n))

    def __sub__(self, other: "PowerSeries") -> "PowerSeries":
        n = max(self.order, other.order) + 1
        return PowerSeries(_pad(self.coeffs, n) - _pad(other.coeffs, n))

    def __neg__(self) -> "PowerSeries":
        return PowerSeries(-self.coeffs)

    def right_mul(self, c) -> "PowerSeries":
        """``f * c`` for a constant quaternion ``c`` (equals ``f star c``)."""
        return PowerSeries(qmul(self.coeffs, asquat(c)))

    def left_mul(self, c) -> "PowerSeries":
        """The constant star product ``c star f``, coefficients ``c a_n``."""
        return PowerSeries(qmul(asquat(c), self.coeffs))

    def star(self, other: "PowerSeries") -> "PowerSeries":
        return star_mul(self, other)

    def conjugate(self) -> "PowerSeries":
        return conjugate_series(self)

    def symmetrize(self) -> "PowerSeries":
        return symmetrize(self)

    def star_inverse(self) -> "PowerSeries":
        return star_inverse(self)

    def is_real(self, tol: float = 1e-12) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.coeffs))))
        return bool(np.max(np.abs(self.coeffs[:, 1:])) <= tol * scale)

    def to_dict(self) -> dict:
        return {"coeffs": self.coeffs.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "PowerSeries":
        return cls(np.asarray(d["coeffs"], dtype=float))


def star_mul(f: PowerSeries, g: PowerSeries) -> PowerSeries:
    """Cauchy product truncated at ``min(T_f, T_g)``."""
    order = min(f.order, g.order)
    return PowerSeries(quat_convolve(f.coeffs[: order + 1], g.coeffs[: order + 1], order + 1))


def conjugate_series(f: PowerSeries) -> PowerSeries:
    return PowerSeries(qconj(f.coeffs))


def symmetrize(f: PowerSeries) -> PowerSeries:
    """``f^s = f^c star f``; its coefficients are real."""
    return star_mul(conjugate_series(f), f)


def real_series_reciprocal(c: np.ndarray) -> np.ndarray:
    """Reciprocal of a real power series ``c`` (1-d array), same length."""
    c = np.asarray(c, dtype=float)
    if c[0] == 0.0:
        raise ZeroConstantTermError("real series has zero constant term")
    g = np.zeros_like(c)
    g[0] = 1.0 / c[0]
    for n in range(1, len(c)):
        g[n] = -np.dot(c[1 : n + 1], g[n - 1 :: -1]) / c[0]
    return g


def star_inverse(f: PowerSeries, real_tol: float = 1e-12) -> PowerSeries:
    """``f^{-*} = (f^s)^{-1} f^c``.

    The symmetrization must come out real; a violation means corrupted input
    and is raised as `ArithmeticError` rather than silently dropped.
    """
    if qabs(f.coeffs[0]) == 0.0:
        raise ZeroConstantTermError("star inverse needs a nonzero constant term")
    fs = symmetrize(f)
    scale = max(1.0, float(np.max(np.abs(fs.coeffs))))
    if np.max(np.abs(fs.coeffs[:, 1:])) > real_tol * scale:
        raise ArithmeticError("symmetrized series is not real")
    g = real_series_reciprocal(fs.coeffs[:, 0])
    fc = conjugate_series(f).coeffs
    out = np.stack([np.convolve(g, fc[:, k])[: len(g)] for k in range(4)], axis=-1)
    return PowerSeries(out)


def star_divide_right(num: PowerSeries, den: PowerSeries, tol: float = 1e-14) -> PowerSeries:
    """Solve ``s star den = num`` for ``s`` by forward substitution."""
    order = min(num.order, den.order)
    d = den.coeffs[: order + 1]
    if qabs(d[0]) <= tol:
        raise ZeroConstantTermError("denominator has a vanishing constant term")
    d0_inv = qinv(d[0])
    d1, d2 = to_complex_pair(d)
    n1, n2 = to_complex_pair(num.coeffs[: order + 1])
    s1 = np.zeros(order + 1, dtype=complex)
    s2 = np.zeros(order + 1, dtype=complex)
    d01, d02 = to_complex_pair(d0_inv)
    for n in range(order + 1):
        # (s star d)_n restricted to r < n, in complex-pair form
        r1 = n1[n] - (np.dot(s1[:n], d1[n:0:-1]) - np.dot(s2[:n], np.conj(d2[n:0:-1])))
        r2 = n2[n] - (np.dot(s1[:n], d2[n:0:-1]) + np.dot(s2[:n], np.conj(d1[n:0:-1])))
        # times d0^{-1}
        s1[n] = r1 * d01 - r2 * np.conj(d02)
        s2[n] = r1 * d02 + r2 * np.conj(d01)
    return PowerSeries(from_complex_pair(s1, s2))


def recenter_at_one(f: PowerSeries) -> np.ndarray:
    """Coefficients ``g_t`` with ``f(p) = sum_t (p - 1)**t g_t`` (polynomials only)."""
    from scipy.special import comb

    n = len(f.coeffs)
    binom = comb(np.arange(n)[:, None], np.arange(n)[None, :])  # binom[n, t]
    return np.einsum("nt,nk->tk", binom, f.coeffs)


def from_center_one(g: np.ndarray) -> PowerSeries:
    """Inverse of `recenter_at_one`."""
    from scipy.special import comb

    n = len(g)
    t = np.arange(n)
    binom = comb(t[:, None], t[None, :])  # binom[t, m] = C(t, m)
    sign = (-1.0) ** (t[:, None] - t[None, :])
    return PowerSeries(np.einsum("tm,tk->mk", binom * sign * (t[:, None] >= t[None, :]), g))


def backward_shift_at_one(f: PowerSeries) -> PowerSeries:
    """``(p - 1)^{-1} (f(p) - f(1))`` for a polynomial ``f``.

    Coefficient ``k`` of the result is ``sum_{n > k} a_n``.
    """
    c = f.coeffs
    if len(c) == 1:
        return PowerSeries(np.zeros((1, 4)))
    suffix = np.cumsum(c[::-1], axis=0)[::-1]
    return PowerSeries(suffix[1:])


@dataclass(frozen=True)
class StructuredSeries:
    """Series with coefficients ``head[n] + sum_k alphas[k] qs[k]**n betas[k]``.

    ``head`` is zero beyond its length. Closed-form evaluation sums the
    geometric terms through `geometric_sum`, which is the analytic
    continuation of the series wherever ``Id - L(p) R(q_k)`` is invertible.
    """

    head: np.ndarray = field(default_factory=lambda: np.zeros((0, 4)))
    alphas: np.ndarray = field(default_factory=lambda: np.zeros((0, 4)))
    qs: np.ndarray = field(default_factory=lambda: np.zeros((0, 4)))
    betas: np.ndarray = field(default_factory=lambda: np.zeros((0, 4)))

    def __post_init__(self):
        for name in ("head", "alphas", "qs", "betas"):
            arr = np.asarray(getattr(self, name), dtype=float).reshape(-1, 4)
            object.__setattr__(self, name, _readonly(arr))
        if not (len(self.alphas) == len(self.qs) == len(self.betas)):
            raise ValueError("alphas, qs and betas must have equal length")

    @property
    def n_terms(self) -> int:
        return len(self.qs)

    def __call__(self, p) -> np.ndarray:
        return self.eval(p)

    def eval(self, p, check: bool = False) -> np.ndarray:
        p = asquat(p)
        out = np.zeros(p.shape)
        if len(self.head):
            out = out + horner(self.head, p)
        if self.n_terms:
            gs = geometric_sum if check else geometric_sum_fast
            pk = p[..., None, :]
            out = out + gs(pk, self.alphas, self.qs, self.betas).sum(axis=-2)
        return out

    def coefficients(self, order: int) -> PowerSeries:
        c = _pad(np.array(self.head), order + 1)
        if self.n_terms:
            qn = np.broadcast_to(ONE, self.qs.shape).copy()
            for n in range(order + 1):
                c[n] += qmul(qmul(self.alphas, qn), self.betas).sum(axis=0)
                qn = qmul(qn, self.qs)
        return PowerSeries(c)

    def __add__(self, other: "StructuredSeries") -> "StructuredSeries":
        h = max(len(self.head), len(other.head))
        return StructuredSeries(
            _pad(np.array(self.head), h) + _pad(np.array(other.head), h),
            np.concatenate([self.alphas, other.alphas]),
            np.concatenate([self.qs, other.qs]),
            np.concatenate([self.betas, other.betas]),
        )

    def __neg__(self) -> "StructuredSeries":
        return StructuredSeries(-self.head, -self.alphas, self.qs, self.betas)

    def __sub__(self, other: "StructuredSeries") -> "StructuredSeries":
        return self + (-other)

    def right_mul(self, c) -> "StructuredSeries":
        c = asquat(c)
        return StructuredSeries(qmul(self.head, c), self.alphas, self.qs, qmul(self.betas, c))

    def conjugate(self) -> "StructuredSeries":
        """Series with conjugated coefficients."""
        return StructuredSeries(qconj(self.head), qconj(self.betas), qconj(self.qs), qconj(self.alphas))

    def one_minus_p(self) -> "StructuredSeries":
        """``(1 - p) star f``: coefficients ``c_n - c_{n-1}``."""
        h = np.array(self.head)
        head = _pad(h, len(h) + 1)
        head[1:] -= h
        if self.n_terms:
            qinv_ = qinv(self.qs)
            head = _pad(head, max(len(head), 1))
            head[0] += qmul(qmul(self.alphas, qinv_), self.betas).sum(axis=0)
            betas = self.betas - qmul(qinv_, self.betas)
        else:
            betas = self.betas
        return StructuredSeries(head, self.alphas, self.qs, betas)

    def to_dict(self) -> dict:
        return {
            "head": self.head.tolist(),
            "terms": [
                {"alpha": a.tolist(), "q": q.tolist(), "beta": b.tolist()}
                for a, q, b in zip(self.alphas, self.qs, self.betas)
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StructuredSeries":
        terms = d.get("terms", [])
        return cls(
            np.asarray(d.get("head", []), dtype=float).reshape(-1, 4),
            np.asarray([t["alpha"] for t in terms], dtype=float).reshape(-1, 4),
            np.asarray([t["q"] for t in terms], dtype=float).reshape(-1, 4),
            np.asarray([t["beta"] for t in terms], dtype=float).reshape(-1, 4),
        )


def blaschke_factor(a) -> StructuredSeries:
    """``b_a(p) = (1 - p conj(a))^{-*} star (a - p) conj(a)/|a|`` in closed form.

    Coefficients are ``|a|`` at ``n = 0`` and
    ``conj(a)**n (a - a/|a|^2) conj(a)/|a|`` beyond, i.e. one geometric term
    with ratio ``conj(a)`` plus a constant correction.
    """
    a = asquat(a)
    r = float(qabs(a))
    if not 0.0 < r < 1.0:
        raise DegenerateInputError(f"Blaschke factor needs 0 < |a| < 1, got |a| = {r}")
    abar = qconj(a)
    beta = qmul(a - a / r**2, abar / r)
    return StructuredSeries(
        head=np.array([[1.0 / r, 0.0, 0.0, 0.0]]),
        alphas=ONE[None, :],
        qs=abar[None, :],
        betas=beta[None, :],
    )


def blaschke_series(a, order: int = DEFAULT_TRUNCATION) -> PowerSeries:
    """`blaschke_factor` built literally from star products of series."""
    a = asquat(a)
    abar = qconj(a)
    geo = np.empty((order + 1, 4))
    geo[0] = ONE
    for n in range(1, order + 1):
        geo[n] = qmul(geo[n - 1], abar)
    lin = np.zeros((order + 1, 4))
    lin[0] = a
    lin[1] = -ONE
    prod = star_mul(PowerSeries(geo), PowerSeries(lin))
    return prod.right_mul(abar / qabs(a))


# --- slice machinery -------------------------------------------------------


def slice_point(p) -> tuple[np.ndarray, np.ndarray]:
    """Map ``p = x + I y`` (``y >= 0``) to the complex number ``x + i y``.

    Returns ``(z, unit)`` where ``unit`` is ``I_p`` (or ``i`` for real ``p``).
    """
    p = asquat(p)
    v = qim(p)
    y = qabs(v)
    x = qre(p)
    safe = np.where(y > 0.0, y, 1.0)
    unit = np.where((y > 0.0)[..., None], v / safe[..., None], UNIT_I)
    return x + 1j * y, unit


def complex_to_quat(z) -> np.ndarray:
    """Embed complex numbers in ``C_i``."""
    z = np.asarray(z, dtype=complex)
    return np.stack([z.real, z.imag, np.zeros(z.shape), np.zeros(z.shape)], axis=-1)


@dataclass(frozen=True)
class SliceSample:
    """Values of ``f`` on ``C_i`` split as ``f(z) = F(z) + G(z) j``."""

    z: np.ndarray
    F: np.ndarray
    G: np.ndarray

    @classmethod
    def of(cls, f, z) -> "SliceSample":
        z = np.asarray(z, dtype=complex)
        F, G = to_complex_pair(f(complex_to_quat(z)))
        return cls(z, F, G)

    def reconstruct(self) -> np.ndarray:
        return from_complex_pair(self.F, self.G)


def slice_split(f: PowerSeries, z) -> tuple[np.ndarray, np.ndarray]:
    """Holomorphic components ``(F(z), G(z))`` of a series on ``C_i``.

    Each is an ordinary complex polynomial in ``z``, evaluated without any
    quaternion arithmetic.
    """
    z = np.asarray(z, dtype=complex)
    a1, a2 = to_complex_pair(f.coeffs)
    return np.polyval(a1[::-1], z), np.polyval(a2[::-1], z)


def slice_star_product(FG, HL, FG_bar, HL_bar) -> tuple[np.ndarray, np.ndarray]:
    """Split components of ``f star g`` at ``z`` from values at ``z`` and ``conj(z)``.

    ``(F H - G conj(L(conj z)), G conj(H(conj z)) + F L)``.
    """
    F, G = FG
    H, L = HL
    Hb, Lb = HL_bar
    return F * H - G * np.conj(Lb), G * np.conj(Hb) + F * L


def slice_matrix(f_z, f_zbar) -> np.ndarray:
    """2x2 complex matrix of a slice function at ``z`` from its values at ``z, conj(z)``.

    Rows are the first row of ``chi(f(z))`` and the second row of
    ``chi(f(conj z))``. Star products map to matrix products.
    """
    cz = chi_embed(f_z)
    czb = chi_embed(f_zbar)
    return np.stack([cz[..., 0, :], czb[..., 1, :]], axis=-2)


def values_from_slice_matrix(m) -> tuple[np.ndarray, np.ndarray]:
    """Recover ``(f(z), f(conj z))`` as quaternions from `slice_matrix` output."""
    m = np.asarray(m)
    fz = from_complex_pair(m[..., 0, 0], m[..., 0, 1])
    fzb = from_complex_pair(np.conj(m[..., 1, 1]), -np.conj(m[..., 1, 0]))
    return fz, fzb


def ext_eval(f_plus, f_minus, target, unit=UNIT_I) -> np.ndarray:
    """Slice extension: value at ``x + J y`` from values at ``x + I y`` and ``x - I y``.

    ``unit`` is ``I``; ``J`` is the imaginary unit of ``target`` (irrelevant
    when ``target`` is real, where both inputs coincide).
    """
    f_plus = asquat(f_plus)
    f_minus = asquat(f_minus)
    _, J = slice_point(target)
    JI = qmul(J, asquat(unit))
    return 0.5 * (f_plus + f_minus + qmul(JI, f_minus - f_plus))


def extend(h, target, unit=UNIT_I) -> np.ndarray:
    """Evaluate the slice extension of ``h`` (a callable on ``C_unit``) at ``target``."""
    target = asquat(target)
    z, _ = slice_point(target)
    unit = asquat(unit)
    x = z.real[..., None]
    y = z.imag[..., None]
    plus = x * ONE + y * unit
    minus = x * ONE - y * unit
    return ext_eval(h(plus), h(minus), target, unit)


def slice_evaluate(matrix_fn, p) -> np.ndarray:
    """Evaluate a slice function at quaternions ``p`` from its slice matrix.

    ``matrix_fn(zq, zbq)`` receives the points ``x + i y`` and ``x - i y`` as
    quaternions and returns the `slice_matrix` at ``x + i y``.
    """
    p = asquat(p)
    z, _ = slice_point(p)
    zq = complex_to_quat(z)
    zbq = complex_to_quat(np.conj(z))
    fz, fzb = values_from_slice_matrix(matrix_fn(zq, zbq))
    return ext_eval(fz, fzb, p)


def star_eval_shortcut(f, g, p) -> np.ndarray:
    """``(f star g)(p) = f(p) g(f(p)^{-1} p f(p))``, zero where ``f(p) = 0``.

    Oracle only: silently wrong if ``f`` nearly vanishes at ``p``.
    """
    p = asquat(p)
    fp = f(p)
    n = qabs(fp)
    safe = np.where((n > 0)[..., None], fp, ONE)
    moved = qmul(qmul(qinv(safe), p), safe)
    out = qmul(fp, g(moved))
    return np.where((n > 0)[..., None], out, 0.0)
