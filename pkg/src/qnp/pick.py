"""Boundary Nevanlinna-Pick interpolation for quaternionic Schur functions.

Given unit nodes ``p_u`` (not 1, on pairwise disjoint 2-spheres), unit values
``s_u`` and bounds ``kappa_u >= 0``, look for a Schur function ``s`` on the
unit ball with radial limits ``s(r p_u) -> s_u`` and
``(1 - s(r p_u) conj(s_u)) / (1 - r) -> beta_u <= kappa_u``.

Pipeline:

1. `build_system` forms ``A = diag(conj p_u)``, ``C = [1 ...; conj s_u ...]``,
   ``J = diag(1, -1)`` and the Pick matrix ``P`` (off-diagonal entries from
   ``P_uv - p_u P_uv conj(p_v) = 1 - s_u conj(s_v)``, diagonal ``kappa_u``).
2. ``P >= 0`` is necessary (`necessity_check`).
3. For invertible ``P``, `build_theta` gives the 2x2 function
   ``Theta(p) = I - (1 - p) F(p) P^{-1} (I - A)^{-*} C^* J`` with
   ``F(p) = sum_t p^t C A^t``, and `solve` returns the linear fractional
   transform ``(a e + b) star (c e + d)^{-star}`` for a Schur parameter ``e``.
4. For singular ``P`` (`degenerate_solve`) the solution, if any, is a finite
   Blaschke product of degree ``rank P`` obtained from a principal minor and a
   unitary constant ``e`` fixed by one remaining node.

Everything evaluated close to the unit sphere goes through closed forms
(`geometric_sum`); coefficient series are kept for cross-checks and export.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import linalg as ql
from .errors import (
    DenominatorDegenerateError,
    DegenerateInputError,
    InconsistentDataError,
    InfeasibleError,
    NoUnitaryParameterError,
    NonAnalyticWarning,
    SchurViolationWarning,
    SingularMatrixError,
    SphereCollisionError,
    SylvesterSingularError,
)
from .linalg import geometric_sum, geometric_sum_fast, sylvester_operator
from .quaternion import (
    DEFAULT_TOL,
    ONE,
    asquat,
    chi_embed,
    qabs,
    qabs2,
    qconj,
    qinv,
    qmul,
    qre,
    random_units,
)
from .series import (
    DEFAULT_TRUNCATION,
    PowerSeries,
    StructuredSeries,
    complex_to_quat,
    ext_eval,
    quat_convolve,
    slice_matrix,
    slice_point,
    star_divide_right,
    values_from_slice_matrix,
)

DEFAULT_GRID = (0.9, 0.99, 0.999, 0.9999)
SCHUR_SAMPLES = 10_000
RANK_TOL = 1e-9

Parameter = "np.ndarray | PowerSeries"


# --- problem data ----------------------------------------------------------


@dataclass(frozen=True)
class InterpolationProblem:
    """Nodes, boundary values, derivative bounds and the Schur parameter ``e``."""

    nodes: np.ndarray
    values: np.ndarray
    kappas: np.ndarray
    parameter: np.ndarray | PowerSeries = field(default_factory=lambda: ONE.copy())
    tol: float = 1e-12

    def __post_init__(self):
        nodes = np.atleast_2d(np.asarray(self.nodes, dtype=float))
        values = np.atleast_2d(np.asarray(self.values, dtype=float))
        kappas = np.atleast_1d(np.asarray(self.kappas, dtype=float))
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "kappas", kappas)
        if not isinstance(self.parameter, PowerSeries):
            object.__setattr__(self, "parameter", asquat(self.parameter))
        self.validate()

    @property
    def n(self) -> int:
        return len(self.nodes)

    def validate(self) -> None:
        tol = self.tol
        if not (len(self.nodes) == len(self.values) == len(self.kappas)):
            raise DegenerateInputError("nodes, values and kappas must have equal length")
        if self.nodes.shape[-1] != 4 or self.values.shape[-1] != 4:
            raise DegenerateInputError("nodes and values must be quaternion 4-arrays")
        for arr in (self.nodes, self.values, self.kappas):
            if not np.all(np.isfinite(arr)):
                raise DegenerateInputError("non-finite problem data")
        if np.any(np.abs(qabs(self.nodes) - 1.0) > tol):
            raise DegenerateInputError("interpolation nodes must have modulus 1")
        if np.any(qabs(self.nodes - ONE) <= tol):
            raise DegenerateInputError("the node p = 1 is excluded")
        if np.any(np.abs(qabs(self.values) - 1.0) > tol):
            raise DegenerateInputError("boundary values must have modulus 1")
        if np.any(self.kappas < 0.0):
            raise DegenerateInputError("kappa bounds must be nonnegative")
        re = qre(self.nodes)
        gap = np.abs(re[:, None] - re[None, :]) + np.eye(self.n)
        if np.any(gap <= DEFAULT_TOL):
            u, v = np.argwhere(gap <= DEFAULT_TOL)[0]
            raise SphereCollisionError(f"nodes {u} and {v} lie on the same sphere")
        if not isinstance(self.parameter, PowerSeries) and abs(float(qabs(self.parameter)) - 1.0) > 1e-8:
            raise DegenerateInputError("a constant Schur parameter must be unitary")

    def subproblem(self, indices: Sequence[int]) -> "InterpolationProblem":
        idx = list(indices)
        return InterpolationProblem(self.nodes[idx], self.values[idx], self.kappas[idx], self.parameter, self.tol)

    def with_values(self, values) -> "InterpolationProblem":
        return InterpolationProblem(self.nodes, values, self.kappas, self.parameter, self.tol)

    def with_parameter(self, e) -> "InterpolationProblem":
        return InterpolationProblem(self.nodes, self.values, self.kappas, e, self.tol)


@dataclass(frozen=True)
class PickSystem:
    """``(A, C, J, P)`` with ``P - A^* P A = C^* J C``."""

    nodes: np.ndarray
    A: np.ndarray
    C: np.ndarray
    J: np.ndarray
    P: np.ndarray

    @property
    def n(self) -> int:
        return self.P.shape[0]

    def stein_residual(self) -> np.ndarray:
        Ah = ql.adjoint(self.A)
        rhs = ql.qmatmul(ql.qmatmul(ql.adjoint(self.C), self.J), self.C)
        return self.P - ql.qmatmul(ql.qmatmul(Ah, self.P), self.A) - rhs

    def offdiag_stein_residual(self) -> float:
        R = self.stein_residual()
        mask = ~np.eye(self.n, dtype=bool)
        return float(np.max(qabs(R[mask]), initial=0.0))

    def eigenvalues(self, tol: float = DEFAULT_TOL) -> np.ndarray:
        return ql.hermitian_eigs(self.P, tol)

    def one_minus_A_inv(self) -> np.ndarray:
        """``(I - A)^{-1}``, diagonal with entries ``(1 - conj p_u)^{-1}``."""
        return ql.diag(qinv(ONE - qconj(self.nodes)))

    def F(self, p) -> np.ndarray:
        """``F(p) = sum_t p^t C A^t`` in closed form, shape ``(..., 2, N, 4)``."""
        p = asquat(p)[..., None, None, :]
        return geometric_sum_fast(p, self.C, qconj(self.nodes)[None, :, :])


SIGNATURE = ql.diag(np.array([[1.0, 0, 0, 0], [-1.0, 0, 0, 0]]))


def build_system(prob: InterpolationProblem) -> PickSystem:
    n = prob.n
    A = ql.diag(qconj(prob.nodes))
    C = np.stack([np.broadcast_to(ONE, (n, 4)), qconj(prob.values)])
    P = np.zeros((n, n, 4))
    P[np.arange(n), np.arange(n), 0] = prob.kappas
    iu, iv = np.triu_indices(n, k=1)
    if len(iu):
        rhs = ONE - qmul(prob.values[iu], qconj(prob.values[iv]))
        try:
            x = ql.solve_sylvester(prob.nodes[iu], qconj(prob.nodes[iv]), rhs)
        except SylvesterSingularError as exc:
            raise SphereCollisionError(f"nodes on intersecting spheres: {exc}") from exc
        P[iu, iv] = x
        P[iv, iu] = qconj(x)
    return PickSystem(prob.nodes.copy(), A, C, SIGNATURE.copy(), P)


def companion_values(nodes) -> np.ndarray:
    """``|1 - 2 Re(p_u) conj(p_v) + conj(p_v)^2|`` for all ordered pairs (diagonal zeroed)."""
    nodes = asquat(nodes)
    pv = qconj(nodes)[None, :, :]
    val = ONE - 2.0 * qre(nodes)[:, None, None] * pv + qmul(pv, pv)
    out = qabs(val)
    np.fill_diagonal(out, 0.0)
    return out


# --- necessity -------------------------------------------------------------


@dataclass
class NecessityReport:
    psd: bool
    eigs: np.ndarray
    rank: int
    P_of_r: Callable[[float], np.ndarray] | None = None
    radial: list[dict] = field(default_factory=list)


def pick_of_r(s: Callable, nodes, r: float) -> np.ndarray:
    """``P(r)_{uv} = K_s(r p_u, r p_v)`` via the closed geometric sum."""
    nodes = asquat(nodes)
    n = len(nodes)
    sv = s(r * nodes)
    G = ONE - qmul(sv[:, None, :], qconj(sv)[None, :, :])
    P = geometric_sum(r * r * nodes[:, None, :], G, qconj(nodes)[None, :, :])
    idx = np.arange(n)
    P[idx, idx] = 0.0
    P[idx, idx, 0] = (1.0 - qabs2(sv)) / (1.0 - r * r)
    return P


def necessity_check(
    prob: InterpolationProblem,
    candidate: Callable | None = None,
    radii: Sequence[float] = (0.9, 0.99, 0.999),
    tol: float = DEFAULT_TOL,
) -> NecessityReport:
    """PSD test of ``P``; with a candidate ``s`` also the radial sweep of ``P(r)``."""
    system = build_system(prob)
    eigs = system.eigenvalues()
    scale = max(1.0, float(np.max(np.abs(eigs))))
    report = NecessityReport(
        psd=bool(eigs[0] >= -tol * scale),
        eigs=eigs,
        rank=int(np.count_nonzero(eigs > RANK_TOL * scale)),
    )
    if candidate is not None:
        s = candidate.evaluate if hasattr(candidate, "evaluate") else candidate
        report.P_of_r = lambda r: pick_of_r(s, prob.nodes, r)
        mask = ~np.eye(prob.n, dtype=bool)
        for r in radii:
            Pr = report.P_of_r(r)
            dev = qabs(Pr - system.P)
            report.radial.append(
                {
                    "r": float(r),
                    "min_eig": float(ql.hermitian_eigs(0.5 * (Pr + ql.adjoint(Pr)))[0]),
                    "offdiag_deviation": dev * mask,
                    "max_offdiag_deviation": float(np.max(dev[mask], initial=0.0)),
                }
            )
    return report


def pivot_order(P, tol: float = RANK_TOL) -> list[int]:
    """Greedy diagonal-pivoted Cholesky order of a PSD quaternion matrix.

    Returns the pivots taken before the remaining Schur complement drops
    below ``tol`` relative to the largest diagonal entry.
    """
    R = np.array(P, dtype=float, copy=True)
    n = R.shape[0]
    scale = max(1.0, float(np.max(np.abs(R[np.arange(n), np.arange(n), 0]), initial=0.0)))
    remaining = list(range(n))
    order: list[int] = []
    while remaining:
        d = R[remaining, remaining, 0]
        k = int(np.argmax(d))
        if d[k] <= tol * scale:
            break
        piv = remaining.pop(k)
        order.append(piv)
        col = R[:, piv : piv + 1].copy()
        row = R[piv : piv + 1, :].copy()
        R = R - ql.qmatmul(col, row) / R[piv, piv, 0]
    return order


# --- Theta -----------------------------------------------------------------


@dataclass(frozen=True)
class ThetaFunction:
    """``Theta(p) = I_2 - (1 - p) sum_v G_v(p) W[v]`` with ``G_v(p) = sum_t p^t C[:, v] q_v^t``.

    ``qs[v] = conj(p_v)`` and ``W = P^{-1} (I - A)^{-*} C^* J``.
    """

    qs: np.ndarray  # (N, 4)
    C: np.ndarray  # (2, N, 4)
    W: np.ndarray  # (N, 2, 4)

    @property
    def n(self) -> int:
        return len(self.qs)

    def F(self, p, check: bool = False) -> np.ndarray:
        """Model-space function ``F(p)``, shape ``(..., 2, N, 4)``."""
        p = asquat(p)
        op = sylvester_operator(p[..., None, :], self.qs)  # (..., N, 4, 4)
        if check:
            cond = np.linalg.cond(op)
            if np.any(~np.isfinite(cond) | (cond > ql.COND_LIMIT)):
                raise SingularMatrixError("Theta evaluated on a node sphere")
        rhs = np.moveaxis(self.C, 0, -1)  # (N, 4, 2)
        x = np.linalg.solve(op, np.broadcast_to(rhs, op.shape[:-2] + (4, 2)))
        return np.moveaxis(x, -1, -3)  # (..., 2, N, 4)

    def evaluate(self, p, check: bool = False) -> np.ndarray:
        """Closed-form ``Theta(p)``, shape ``(..., 2, 2, 4)``."""
        p = asquat(p)
        FW = ql.qmatmul(self.F(p, check), self.W)
        out = -qmul((ONE - p)[..., None, None, :], FW)
        out[..., 0, 0, 0] += 1.0
        out[..., 1, 1, 0] += 1.0
        return out

    __call__ = evaluate

    def coefficients(self, order: int) -> np.ndarray:
        """Exact ``Theta_0 .. Theta_order``, shape ``(order+1, 2, 2, 4)``."""
        out = np.zeros((order + 1, 2, 2, 4))
        CAn = np.array(self.C)  # C A^n, column v scaled on the right by q_v^n
        prev = ql.qmatmul(CAn, self.W)
        out[0] = -prev
        out[0, 0, 0, 0] += 1.0
        out[0, 1, 1, 0] += 1.0
        for n in range(1, order + 1):
            CAn = qmul(CAn, self.qs[None, :, :])
            cur = ql.qmatmul(CAn, self.W)
            out[n] = -(cur - prev)
            prev = cur
        return out

    def entry(self, i: int, j: int) -> StructuredSeries:
        inner = StructuredSeries(alphas=self.C[i], qs=self.qs, betas=self.W[:, j])
        head = np.array([[1.0 if i == j else 0.0, 0.0, 0.0, 0.0]])
        return StructuredSeries(head=head) - inner.one_minus_p()

    def to_dict(self) -> dict:
        return {"qs": self.qs.tolist(), "C": self.C.tolist(), "W": self.W.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "ThetaFunction":
        return cls(np.asarray(d["qs"], float), np.asarray(d["C"], float), np.asarray(d["W"], float))


def build_theta(system: PickSystem, tol: float = RANK_TOL) -> ThetaFunction:
    """Theta for an invertible Pick matrix; `SingularMatrixError` otherwise.

    ``P`` counts as singular when its smallest eigenvalue modulus is at most
    ``tol * max(1, |eig|_max)``: the scale of the data, not of ``P`` alone.
    """
    eigs = np.abs(system.eigenvalues())
    if eigs.min() <= tol * max(1.0, float(eigs.max())):
        raise SingularMatrixError(f"Pick matrix is singular (min |eigenvalue| {eigs.min():.3g})")
    Pinv = ql.invert(system.P)
    IminusA_inv_star = ql.adjoint(system.one_minus_A_inv())
    W = ql.qmatmul(ql.qmatmul(ql.qmatmul(Pinv, IminusA_inv_star), ql.adjoint(system.C)), system.J)
    return ThetaFunction(qconj(system.nodes), system.C.copy(), W)


def theta_kernel(theta: ThetaFunction, p, q, order: int | None = None) -> np.ndarray:
    """``K_Theta(p, q) = sum_t p^t (J - Theta(p) J Theta(q)^*) conj(q)^t``.

    Closed form by default; ``order`` switches to the truncated sum.
    """
    p, q = asquat(p), asquat(q)
    X = SIGNATURE - ql.qmatmul(ql.qmatmul(theta.evaluate(p), SIGNATURE), ql.adjoint(theta.evaluate(q)))
    p = p[..., None, None, :]
    qb = qconj(q)[..., None, None, :]
    if order is None:
        return geometric_sum(p, X, qb)
    out = np.zeros_like(X)
    term = X
    for _ in range(order + 1):
        out += term
        term = qmul(qmul(p, term), qb)
    return out


def model_kernel(system: PickSystem, p, q) -> np.ndarray:
    """``F(p) P^{-1} F(q)^*``."""
    Fp = system.F(p)
    Fq = system.F(q)
    return ql.qmatmul(ql.qmatmul(Fp, ql.invert(system.P)), ql.adjoint(Fq))


# --- linear fractional transform -------------------------------------------


def lft_slice_matrix(theta: ThetaFunction, e, zq, zbq) -> np.ndarray:
    """Slice matrix of ``(a e + b) star (c e + d)^{-star}`` at ``z``."""
    Tz = theta.evaluate(zq)
    Tzb = theta.evaluate(zbq)
    M = [[slice_matrix(Tz[..., i, j, :], Tzb[..., i, j, :]) for j in range(2)] for i in range(2)]
    if isinstance(e, PowerSeries):
        Me = slice_matrix(e.eval(zq, warn=False), e.eval(zbq, warn=False))
    else:
        Me = np.broadcast_to(chi_embed(asquat(e)), M[0][0].shape)
    num = M[0][0] @ Me + M[0][1]
    den = M[1][0] @ Me + M[1][1]
    return np.swapaxes(np.linalg.solve(np.swapaxes(den, -1, -2), np.swapaxes(num, -1, -2)), -1, -2)


def lft_evaluate(theta: ThetaFunction, e, p) -> np.ndarray:
    p = asquat(p)
    z, _ = slice_point(p)
    zq = complex_to_quat(z)
    zbq = complex_to_quat(np.conj(z))
    fz, fzb = values_from_slice_matrix(lft_slice_matrix(theta, e, zq, zbq))
    return ext_eval(fz, fzb, p)


def lft_series(theta: ThetaFunction, e, order: int) -> tuple[PowerSeries, PowerSeries]:
    """Numerator ``a star e + b`` and denominator ``c star e + d`` as series."""
    T = theta.coefficients(order)
    a, b, c, d = (PowerSeries(T[:, i, j]) for i, j in ((0, 0), (0, 1), (1, 0), (1, 1)))
    if isinstance(e, PowerSeries):
        e = e.truncate(order)
        num = PowerSeries(quat_convolve(a.coeffs, e.coeffs, order + 1)) + b
        den = PowerSeries(quat_convolve(c.coeffs, e.coeffs, order + 1)) + d
    else:
        num = a.right_mul(e) + b
        den = c.right_mul(e) + d
    return num, den


# --- solutions -------------------------------------------------------------


def interior_samples(count: int = SCHUR_SAMPLES, radius: float = 0.99, seed: int = 0) -> np.ndarray:
    """Points ``r u`` with ``u`` uniform on the unit 3-sphere and ``r`` uniform on ``[0, radius]``."""
    rng = np.random.default_rng(seed)
    u = random_units(rng, count)
    r = radius * rng.random(count)
    return r[:, None] * u


def boundary_samples(count: int = 100, seed: int = 0) -> np.ndarray:
    return random_units(np.random.default_rng(seed), count)


@dataclass
class SchurSolution:
    """A synthesized Schur function with series and (when possible) closed-form evaluation.

    ``provenance`` is ``"nondegenerate"``, ``"degenerate"``, ``"rank0"`` or
    ``"external"`` (coefficients supplied from outside).
    """

    series: PowerSeries
    provenance: str
    rank: int | None = None
    numerator: PowerSeries | None = None
    denominator: PowerSeries | None = None
    theta: ThetaFunction | None = None
    parameter: np.ndarray | PowerSeries | None = None
    constant: np.ndarray | None = None
    minor: list[int] | None = None
    schur_max: float | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def has_closed_form(self) -> bool:
        if self.constant is not None:
            return True
        return self.theta is not None and self.parameter is not None and not isinstance(self.parameter, PowerSeries)

    def evaluate(self, p) -> np.ndarray:
        p = asquat(p)
        if self.constant is not None:
            return np.broadcast_to(self.constant, p.shape).copy()
        if self.theta is not None and self.parameter is not None:
            return lft_evaluate(self.theta, self.parameter, p)
        return self.series.eval(p)

    __call__ = evaluate

    def eval_series(self, p) -> np.ndarray:
        return self.series.eval(p)

    def defining_residual(self) -> float:
        """Max coefficient of ``s star D - N``."""
        if self.numerator is None or self.denominator is None:
            return 0.0
        order = self.series.order
        lhs = quat_convolve(self.series.coeffs, self.denominator.coeffs[: order + 1], order + 1)
        return float(np.max(qabs(lhs - self.numerator.coeffs[: order + 1])))


def schur_sample_max(s: Callable, count: int = SCHUR_SAMPLES, seed: int = 0, radius: float = 0.99) -> float:
    return float(np.max(qabs(s(interior_samples(count, radius, seed)))))


def lft_solution(
    theta: ThetaFunction,
    e,
    order: int = DEFAULT_TRUNCATION,
    provenance: str = "nondegenerate",
    rank: int | None = None,
    samples: int = SCHUR_SAMPLES,
    seed: int = 0,
) -> SchurSolution:
    """The transform of ``e`` by ``theta`` as series plus closed form, with the Schur sampling check."""
    num, den = lft_series(theta, e, order)
    if float(qabs(den.coeffs[0])) <= 1e-12:
        raise DenominatorDegenerateError("c(0) e(0) + d(0) vanishes")
    series = star_divide_right(num, den)
    sol = SchurSolution(
        series=series,
        provenance=provenance,
        rank=rank,
        numerator=num,
        denominator=den,
        theta=theta,
        parameter=e,
    )
    if samples:
        sol.schur_max = schur_sample_max(sol.evaluate, samples, seed)
        if sol.schur_max > 1.0 + 1e-6:
            warnings.warn(f"solution exceeds 1 in modulus ({sol.schur_max:.6g})", SchurViolationWarning, stacklevel=3)
    return sol


def solve(
    prob: InterpolationProblem,
    e=None,
    *,
    order: int = DEFAULT_TRUNCATION,
    tol: float = DEFAULT_TOL,
    rank_tol: float = RANK_TOL,
    samples: int = SCHUR_SAMPLES,
    seed: int = 0,
) -> SchurSolution:
    """Solve the interpolation problem, dispatching on the rank of ``P``.

    ``e`` overrides ``prob.parameter`` in the nondegenerate case. Raises
    `InfeasibleError` when ``P`` is not positive semidefinite.
    """
    system = build_system(prob)
    if np.all(prob.kappas == 0.0):
        return degenerate_solve(prob, order=order, tol=tol, rank_tol=rank_tol, samples=samples, seed=seed, system=system)
    eigs = system.eigenvalues()
    scale = max(1.0, float(np.max(np.abs(eigs))))
    if eigs[0] < -tol * scale:
        raise InfeasibleError(f"Pick matrix is not PSD (min eigenvalue {eigs[0]:.3g})")
    rank = int(np.count_nonzero(eigs > rank_tol * scale))
    if rank < prob.n:
        return degenerate_solve(prob, order=order, tol=tol, rank_tol=rank_tol, samples=samples, seed=seed, system=system)
    theta = build_theta(system)
    e = prob.parameter if e is None else e
    if isinstance(e, PowerSeries) and samples:
        emax = schur_sample_max(e.eval, samples, seed)
        if emax > 1.0 + 1e-8:
            warnings.warn(f"Schur parameter exceeds 1 in modulus ({emax:.6g})", SchurViolationWarning, stacklevel=2)
    return lft_solution(theta, e if isinstance(e, PowerSeries) else asquat(e), order, "nondegenerate", rank, samples, seed)


def unitary_parameter(theta: ThetaFunction, node, value) -> np.ndarray:
    """Constant ``e`` making the transform of ``theta`` take ``value`` at the boundary ``node``.

    From ``s star D = N`` at ``node``: ``value D(p') = N(node)`` with
    ``p' = value^{-1} node value``, which is linear in ``e``.
    """
    node = asquat(node)
    value = asquat(value)
    moved = qmul(qmul(qinv(value), node), value)
    Tn = theta.evaluate(node, check=True)
    Tm = theta.evaluate(moved, check=True)
    lhs = qmul(value, Tm[1, 0]) - Tn[0, 0]
    rhs = Tn[0, 1] - qmul(value, Tm[1, 1])
    if float(qabs(lhs)) <= 1e-12 * max(1.0, float(qabs(rhs))):
        raise NoUnitaryParameterError("parameter equation is degenerate at this node")
    return qmul(qinv(lhs), rhs)


def degenerate_solve(
    prob: InterpolationProblem,
    *,
    order: int = DEFAULT_TRUNCATION,
    tol: float = DEFAULT_TOL,
    rank_tol: float = RANK_TOL,
    samples: int = SCHUR_SAMPLES,
    seed: int = 0,
    system: PickSystem | None = None,
    unit_tol: float = 1e-8,
) -> SchurSolution:
    """Solution for singular ``P``: a constant (rank 0) or a Blaschke product of degree ``rank P``.

    All-zero ``kappa`` is treated as rank-0 data: a PSD matrix with zero
    diagonal vanishes, which forces ``s_1 = ... = s_N``; differing values
    raise `InconsistentDataError` rather than a bare infeasibility verdict.
    """
    system = build_system(prob) if system is None else system
    eigs = system.eigenvalues()
    scale = max(1.0, float(np.max(np.abs(eigs))))
    rank = int(np.count_nonzero(eigs > rank_tol * scale))
    if np.all(prob.kappas == 0.0):
        rank = 0
    elif eigs[0] < -tol * scale:
        raise InfeasibleError(f"Pick matrix is not PSD (min eigenvalue {eigs[0]:.3g})")
    if rank == 0:
        spread = float(np.max(qabs(prob.values - prob.values[0])))
        if spread > 1e-10:
            raise InconsistentDataError(f"rank-0 Pick matrix but boundary values differ by {spread:.3g}")
        const = prob.values[0].copy()
        series = PowerSeries.constant(const, order)
        return SchurSolution(series=series, provenance="rank0", rank=0, constant=const, schur_max=float(qabs(const)))
    if rank == prob.n:
        raise SingularMatrixError("Pick matrix is invertible; use solve()")
    order_idx = pivot_order(system.P, rank_tol)
    minor = sorted(order_idx[:rank])
    rest = [u for u in range(prob.n) if u not in minor]
    theta = build_theta(build_system(prob.subproblem(minor)))
    candidates = []
    for w in rest:
        try:
            candidates.append((w, unitary_parameter(theta, prob.nodes[w], prob.values[w])))
        except (NoUnitaryParameterError, SingularMatrixError):
            continue
    if not candidates:
        raise NoUnitaryParameterError("no node outside the minor determines the parameter")
    w0, e = candidates[0]
    if abs(float(qabs(e)) - 1.0) > unit_tol:
        raise NoUnitaryParameterError(f"parameter from node {w0} has modulus {float(qabs(e)):.12g}")
    sol = lft_solution(theta, e, order, "degenerate", rank, samples, seed)
    sol.minor = minor
    sol.diagnostics["parameter_node"] = w0
    sol.diagnostics["parameters"] = {int(w): ep.tolist() for w, ep in candidates}
    sol.diagnostics["parameter_spread"] = float(max(qabs(ep - e) for _, ep in candidates))
    bmod = qabs(sol.evaluate(boundary_samples(100, seed)))
    sol.diagnostics["boundary_modulus_error"] = float(np.max(np.abs(bmod - 1.0)))
    if sol.diagnostics["boundary_modulus_error"] > 1e-6:
        raise InconsistentDataError("degenerate candidate is not unimodular on the boundary")
    return sol


# --- verification ----------------------------------------------------------


def richardson_limit(h, vals) -> np.ndarray:
    """Value at ``h = 0`` of the polynomial through ``(h_k, vals_k)``.

    This is the full Richardson table for an expansion in powers of ``h``
    (first order leading); with two samples it is the single step
    ``(h1 f(h2) - h2 f(h1)) / (h1 - h2)``.
    """
    h = np.asarray(h, dtype=float)
    vals = np.asarray(vals, dtype=float)
    w = np.ones(len(h))
    for k in range(len(h)):
        for m in range(len(h)):
            if m != k:
                w[k] *= h[m] / (h[m] - h[k])
    return np.tensordot(w, vals, axes=(0, 0))


@dataclass
class NodeReport:
    index: int
    node: np.ndarray
    value: np.ndarray
    kappa: float
    radii: np.ndarray
    s_values: np.ndarray
    gaps: np.ndarray
    quotients: np.ndarray
    limit: np.ndarray
    beta: np.ndarray
    sweep_limit: np.ndarray
    sweep_beta: np.ndarray
    method: str
    limit_error: float
    gaps_decreasing: bool
    beta_real: bool
    kappa_margin: float | None
    bastille_lhs: float
    bastille_rhs: float

    @property
    def bastille_margin(self) -> float:
        return self.bastille_rhs - self.bastille_lhs

    @property
    def mode(self) -> str:
        return "kappa" if self.beta_real else "bastille-only"

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "radii": self.radii.tolist(),
            "s_values": self.s_values.tolist(),
            "gaps": self.gaps.tolist(),
            "quotients": self.quotients.tolist(),
            "limit": self.limit.tolist(),
            "sweep_limit": self.sweep_limit.tolist(),
            "sweep_beta": self.sweep_beta.tolist(),
            "method": self.method,
            "limit_error": self.limit_error,
            "gaps_decreasing": self.gaps_decreasing,
            "beta": self.beta.tolist(),
            "beta_real": self.beta_real,
            "mode": self.mode,
            "kappa": self.kappa,
            "kappa_margin": self.kappa_margin,
            "bastille_lhs": self.bastille_lhs,
            "bastille_rhs": self.bastille_rhs,
            "bastille_margin": self.bastille_margin,
        }


@dataclass
class VerificationReport:
    nodes: list[NodeReport]
    limit_tol: float
    margin_tol: float
    warnings: list[str] = field(default_factory=list)

    @property
    def interpolates(self) -> bool:
        return all(n.limit_error <= self.limit_tol for n in self.nodes)

    @property
    def kappa_ok(self) -> bool:
        return all(n.kappa_margin is None or n.kappa_margin >= -self.margin_tol for n in self.nodes)

    @property
    def bastille_ok(self) -> bool:
        return all(not np.isfinite(n.bastille_lhs) or n.bastille_margin >= -self.margin_tol for n in self.nodes)

    @property
    def ok(self) -> bool:
        return self.interpolates and self.kappa_ok and self.bastille_ok

    def to_dict(self) -> dict:
        return {
            "nodes": [n.to_dict() for n in self.nodes],
            "interpolates": self.interpolates,
            "kappa_ok": self.kappa_ok,
            "bastille_ok": self.bastille_ok,
            "warnings": list(self.warnings),
        }


def bastille_sides(beta, node, kappa: float) -> tuple[float, float]:
    """``|beta - conj(p) beta conj(p)|^2 / |1 - conj(p)^2|^2`` and ``Re(beta) kappa``.

    The square on the denominator is what the limit of
    ``|g_u(r p_u)|^2 <= kappa_u K_s(r p_u, r p_u)`` produces; a constant
    unitary parameter attains equality.
    """
    pb = qconj(node)
    den = float(qabs2(ONE - qmul(pb, pb)))
    num = float(qabs2(beta - qmul(qmul(pb, beta), pb)))
    lhs = num / den if den > 1e-14 else float("nan")
    return lhs, float(qre(beta)) * kappa


def two_sided_limits(
    evaluate: Callable, node, value, step: float = 2e-3, levels: int = 4
) -> tuple[np.ndarray, np.ndarray]:
    """Radial limit ``sigma`` and quotient limit ``beta`` from evaluations at ``r = 1 +- h``.

    Valid for candidates analytic across the sphere along the ray (rational
    closed forms). Midpoints and central differences at ``h, h/2, ...`` are
    Richardson-refined in powers of ``h^2``; ``beta = a conj(s_u)`` with
    ``a`` the radial derivative, which is the quotient limit whenever
    ``sigma = s_u``.
    """
    node = asquat(node)
    hs = step / 2.0 ** np.arange(levels)
    v = evaluate(np.concatenate([1 + hs, 1 - hs])[:, None] * node)
    vp, vm = v[:levels], v[levels:]
    mids = list(0.5 * (vp + vm))
    diffs = list((vp - vm) / (2 * hs[:, None]))
    for lev in range(1, levels):
        f = 4.0**lev
        mids = [(f * mids[k + 1] - mids[k]) / (f - 1) for k in range(len(mids) - 1)]
        diffs = [(f * diffs[k + 1] - diffs[k]) / (f - 1) for k in range(len(diffs) - 1)]
    return mids[0], qmul(diffs[0], qconj(asquat(value)))


def verify(
    sol,
    prob: InterpolationProblem,
    grid: Sequence[float] = DEFAULT_GRID,
    *,
    limit_tol: float = 1e-5,
    margin_tol: float = 1e-6,
    real_tol: float = 1e-6,
    two_sided: bool | None = None,
) -> VerificationReport:
    """Radial sweep of a candidate at every node.

    ``sol`` is a `SchurSolution` or any callable. The sweep values and their
    Richardson extrapolation are always reported. For closed-form solutions
    (or ``two_sided=True``) the limits used by the checks come from
    `two_sided_limits`, which resolves ``beta`` far more accurately than a
    one-sided grid stopping at ``1 - r = 1e-4``. Without a closed form the
    grid is cut to ``r <= 1 - 1e-3``.
    """
    notes = []
    evaluate = sol.evaluate if hasattr(sol, "evaluate") else sol
    closed = isinstance(sol, SchurSolution) and sol.has_closed_form
    two_sided = closed if two_sided is None else two_sided
    radii = np.asarray(sorted(grid), dtype=float)
    if isinstance(sol, PowerSeries) or (isinstance(sol, SchurSolution) and not closed):
        keep = radii <= 1.0 - 1e-3 + 1e-15
        if not np.all(keep):
            notes.append("no closed form: radial grid cut to r <= 0.999")
        radii = radii[keep]
    h = 1.0 - radii
    reports = []
    for u in range(prob.n):
        p, su, kappa = prob.nodes[u], prob.values[u], float(prob.kappas[u])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            vals = evaluate(radii[:, None] * p)
        gaps = qabs(vals - su)
        # (s_u - s) conj(s_u) equals 1 - s conj(s_u) for unimodular s_u, without the cancellation
        quot = qmul(su - vals, qconj(su)) / h[:, None]
        sweep_limit = richardson_limit(h, vals)
        sweep_beta = richardson_limit(h, quot)
        if two_sided:
            limit, beta = two_sided_limits(evaluate, p, su)
        else:
            limit, beta = sweep_limit, sweep_beta
        beta_real = bool(np.max(np.abs(beta[1:])) <= real_tol)
        kappa_margin = kappa - float(qre(beta)) if beta_real else None
        lhs, rhs = bastille_sides(beta, p, kappa)
        reports.append(
            NodeReport(
                index=u,
                node=p,
                value=su,
                kappa=kappa,
                radii=radii,
                s_values=vals,
                gaps=gaps,
                quotients=quot,
                limit=limit,
                beta=beta,
                sweep_limit=sweep_limit,
                sweep_beta=sweep_beta,
                method="two-sided" if two_sided else "sweep",
                limit_error=float(qabs(limit - su)),
                gaps_decreasing=bool(np.all(np.diff(gaps) < 0)) if np.any(gaps > 0) else True,
                beta_real=beta_real,
                kappa_margin=kappa_margin,
                bastille_lhs=lhs,
                bastille_rhs=rhs,
            )
        )
    return VerificationReport(reports, limit_tol, margin_tol, notes)


# --- structural identity and the backward shift at 1 ----------------------


def r1_structural_check(system: PickSystem) -> float:
    """Max entry of ``P + P (I-A)^{-1} A + A^* (I-A)^{-*} P - (I-A)^{-*} C^* J C (I-A)^{-1}``."""
    R = structural_residual(system)
    return float(np.max(qabs(R), initial=0.0))


def structural_residual(system: PickSystem) -> np.ndarray:
    M = system.one_minus_A_inv()
    Mh = ql.adjoint(M)
    P, A = system.P, system.A
    CJC = ql.qmatmul(ql.qmatmul(ql.adjoint(system.C), system.J), system.C)
    return (
        P
        + ql.qmatmul(ql.qmatmul(P, M), A)
        + ql.qmatmul(ql.qmatmul(ql.adjoint(A), Mh), P)
        - ql.qmatmul(ql.qmatmul(Mh, CJC), M)
    )


def r1_apply(xi, system: PickSystem) -> np.ndarray:
    """Coefficient vector ``A (I - A)^{-1} xi`` representing ``R_1 (F xi) = F A (I - A)^{-1} xi``."""
    xi = np.asarray(xi, dtype=float).reshape(-1, 1, 4)
    return ql.qmatmul(ql.qmatmul(system.A, system.one_minus_A_inv()), xi)[:, 0, :]


# --- Caratheodory-type limit ----------------------------------------------


@dataclass
class CaratheodoryResult:
    node: np.ndarray
    value: np.ndarray
    derivative: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    gap: float
    analytic: bool

    def to_dict(self) -> dict:
        return {
            "derivative": self.derivative.tolist(),
            "lhs": self.lhs.tolist(),
            "rhs": self.rhs.tolist(),
            "gap": self.gap,
            "analytic": self.analytic,
        }


def radial_derivative(s: Callable, node, step: float = 1e-4) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference derivative of ``r -> s(r node)`` at ``r = 1`` with one Richardson step.

    Returns ``(richardson_estimate, plain_estimate)``.
    """
    node = asquat(node)
    r = np.array([1 + step, 1 - step, 1 + step / 2, 1 - step / 2])
    v = s(r[:, None] * node)
    d1 = (v[0] - v[1]) / (2 * step)
    d2 = (v[2] - v[3]) / step
    return (4 * d2 - d1) / 3, d1


def caratheodory_limit(
    s,
    node,
    value=None,
    *,
    step: float = 1e-4,
    radii: Sequence[float] = (0.99, 0.999, 0.9999),
    analytic_tol: float = 1e-3,
) -> CaratheodoryResult:
    """Compare ``lim_r sum_t r^t p^t (s_u - s(r p)) conj(s_u) conj(p)^t`` with its closed form.

    The closed form is ``(a conj(s_u) - conj(p) a conj(s_u) conj(p)) (1 - conj(p)^2)^{-1}``
    with ``a`` the radial derivative at ``r = 1``. For unimodular ``s_u`` the
    summand equals ``1 - s(r p) conj(s_u)``.
    """
    evaluate = s.evaluate if hasattr(s, "evaluate") else s
    node = asquat(node)
    if value is None:
        r = np.array([1.0 + step, 1.0 - step])
        v = evaluate(r[:, None] * node)
        value = 0.5 * (v[0] + v[1])
    value = asquat(value)
    deriv, plain = radial_derivative(evaluate, node, step)
    analytic = bool(qabs(deriv - plain) <= analytic_tol * max(1.0, float(qabs(deriv))))
    if not analytic:
        warnings.warn("finite-difference derivative estimates disagree", NonAnalyticWarning, stacklevel=2)
    pb = qconj(node)
    a_sb = qmul(deriv, qconj(value))
    rhs = qmul(a_sb - qmul(qmul(pb, a_sb), pb), qinv(ONE - qmul(pb, pb)))
    rs = np.asarray(sorted(radii), dtype=float)
    sv = evaluate(rs[:, None] * node)
    G = qmul(value - sv, qconj(value))
    sums = geometric_sum(rs[:, None] * node, G, pb)
    lhs = richardson_limit(1.0 - rs, sums)
    return CaratheodoryResult(node, value, deriv, lhs, rhs, float(qabs(lhs - rhs)), analytic)


# --- forward generation ----------------------------------------------------


def blaschke_problem(zero, nodes, step: float = 1e-3) -> InterpolationProblem:
    """Interpolation data read off the Blaschke factor ``b_zero`` at boundary ``nodes``.

    ``s_u = b(p_u)`` in closed form; ``kappa_u = Re(a_u conj(s_u))`` with
    ``a_u`` the radial derivative, i.e. the limit of
    ``(1 - |b(r p_u)|^2) / (1 - r^2)``.
    """
    from .series import blaschke_factor

    b = blaschke_factor(zero)
    nodes = np.atleast_2d(asquat(nodes))
    values = b.eval(nodes)
    values = values / qabs(values)[:, None]
    kappas = []
    for p, v in zip(nodes, values):
        a, _ = radial_derivative(b.eval, p, step)
        kappas.append(float(qre(qmul(a, qconj(v)))))
    return InterpolationProblem(nodes, values, np.array(kappas))


def random_problem(rng: np.random.Generator, n: int, margin: float = 0.5, min_gap: float = 0.1) -> InterpolationProblem:
    """Random admissible data with a strictly diagonally dominant Pick matrix.

    Node real parts are drawn from ``[-0.95, 0.9]`` at least ``min_gap``
    apart; ``kappa_u = sum_v |P_uv| + margin``.
    """
    from .quaternion import random_imaginary_units

    while True:
        re = np.sort(rng.uniform(-0.95, 0.9, n))
        if n < 2 or np.min(np.diff(re)) >= min_gap:
            break
    im = np.sqrt(1.0 - re**2)[:, None] * random_imaginary_units(rng, n)
    nodes = im.copy()
    nodes[:, 0] = re
    values = random_units(rng, n)
    base = build_system(InterpolationProblem(nodes, values, np.zeros(n)))
    kappas = qabs(base.P).sum(axis=1) + margin
    return InterpolationProblem(nodes, values, kappas)
