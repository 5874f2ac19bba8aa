import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import seeds
from qnp import linalg as ql
from qnp.errors import (
    DegenerateInputError,
    InconsistentDataError,
    InfeasibleError,
    NoUnitaryParameterError,
    SchurViolationWarning,
    SingularMatrixError,
    SphereCollisionError,
)
from qnp import pick as pick_module
from qnp.pick import (
    SIGNATURE,
    InterpolationProblem,
    bastille_sides,
    blaschke_problem,
    build_system,
    build_theta,
    caratheodory_limit,
    companion_values,
    degenerate_solve,
    interior_samples,
    lft_solution,
    model_kernel,
    necessity_check,
    pick_of_r,
    pivot_order,
    r1_apply,
    r1_structural_check,
    random_problem,
    richardson_limit,
    solve,
    structural_residual,
    theta_kernel,
    two_sided_limits,
    unitary_parameter,
    verify,
)
from qnp.quaternion import I, J, K, ONE, qabs, qconj, qmul, random_quaternions, random_units, real
from qnp.series import PowerSeries, blaschke_factor

NODE_2 = np.array([np.cos(1.0), 0.0, 0.0, np.sin(1.0)])
NODE_3 = np.array([-0.5, 0.0, np.sqrt(0.75), 0.0])


def two_node_problem(kappa=None):
    values = np.array([J, [np.cos(0.3), np.sin(0.3), 0, 0]])
    prob = InterpolationProblem(np.array([I, NODE_2]), values, np.zeros(2))
    if kappa is None:
        kappa = qabs(build_system(prob).P).sum(axis=1) + 0.5
    return InterpolationProblem(prob.nodes, values, np.broadcast_to(kappa, (2,)))


def quick_solve(prob, **kw):
    kw.setdefault("samples", 500)
    return solve(prob, **kw)


def max_diff(a, b):
    return float(np.max(qabs(np.asarray(a) - np.asarray(b))))


# --- problem validation ---------------------------------------------------


@pytest.mark.parametrize(
    "nodes, values, kappas",
    [
        ([[0.5, 0.5, 0, 0]], [ONE], [1.0]),  # node off the sphere
        ([ONE], [ONE], [1.0]),  # node 1
        ([I], [[0.5, 0, 0, 0]], [1.0]),  # value not unimodular
        ([I], [ONE], [-1.0]),  # negative bound
        ([I, J], [ONE], [1.0, 1.0]),  # ragged
        ([I], [[np.nan, 0, 0, 0]], [1.0]),
    ],
)
def test_invalid_problems_rejected(nodes, values, kappas):
    with pytest.raises(DegenerateInputError):
        InterpolationProblem(np.array(nodes, float), np.array(values, float), np.array(kappas, float))


def test_same_sphere_nodes_rejected():
    with pytest.raises(SphereCollisionError):
        InterpolationProblem(np.array([I, J]), np.array([ONE, ONE]), np.array([1.0, 1.0]))


def test_constant_parameter_must_be_unitary():
    with pytest.raises(DegenerateInputError):
        InterpolationProblem(np.array([I]), np.array([ONE]), np.array([1.0]), parameter=0.5 * ONE)


# --- Pick system ----------------------------------------------------------


def test_single_node_pick_matrix():
    system = build_system(InterpolationProblem(np.array([I]), np.array([ONE]), np.array([0.7])))
    np.testing.assert_array_equal(system.P, [[[0.7, 0, 0, 0]]])
    assert system.offdiag_stein_residual() == 0.0


def test_two_node_sylvester_residual():
    prob = two_node_problem()
    P = build_system(prob).P
    p1, p2 = prob.nodes
    s1, s2 = prob.values
    # oracle: the defining equation replayed with scalar products
    residual = P[0, 1] - qmul(qmul(p1, P[0, 1]), qconj(p2)) - (ONE - qmul(s1, qconj(s2)))
    assert qabs(residual) <= 1e-12
    np.testing.assert_allclose(P[1, 0], qconj(P[0, 1]), atol=0)
    assert P[0, 0, 0] == prob.kappas[0]


@given(seeds, st.integers(2, 6))
def test_stein_and_structural_residuals(seed, n):
    prob = random_problem(np.random.default_rng(seed), n)
    system = build_system(prob)
    assert system.offdiag_stein_residual() <= 1e-10
    assert r1_structural_check(system) <= 1e-9
    assert ql.is_hermitian(system.P, 1e-12)
    off = ~np.eye(n, dtype=bool)
    assert np.all(companion_values(prob.nodes)[off] > 1e-8)


def test_structural_identity_single_node():
    # N = 1: kappa (1 + q/(1-q) + conj(q)/(1-conj q)) - (1 - |s|^2)/|1-q|^2 with |q| = |s| = 1
    p = random_units(np.random.default_rng(0))
    prob = InterpolationProblem(p[None], random_units(np.random.default_rng(1))[None], np.array([2.5]))
    q = complex(p[0], -np.linalg.norm(p[1:]))
    expected = 2.5 * (1 + 2 * (q / (1 - q)).real)
    np.testing.assert_allclose(structural_residual(build_system(prob))[0, 0], [expected, 0, 0, 0], atol=1e-12)


def test_structural_identity_zero_system():
    s = random_units(np.random.default_rng(2))
    prob = InterpolationProblem(np.array([I, NODE_2]), np.array([s, s]), np.zeros(2))
    assert r1_structural_check(build_system(prob)) == pytest.approx(0.0, abs=1e-15)


# --- necessity ------------------------------------------------------------


def test_necessity_examples():
    assert necessity_check(InterpolationProblem(np.array([I]), np.array([ONE]), np.array([1.0]))).psd
    report = necessity_check(two_node_problem(kappa=0.0))
    assert not report.psd
    assert report.eigs[0] < 0
    # distinct values with zero bounds: the off-diagonal entry is nonzero
    assert qabs(build_system(two_node_problem(kappa=0.0)).P[0, 1]) > 0.1


def test_pick_of_r_matches_truncated_kernel():
    prob = two_node_problem()
    sol = quick_solve(prob)
    r = 0.9
    Pr = pick_of_r(sol.evaluate, prob.nodes, r)
    sv = sol.evaluate(r * prob.nodes)
    # oracle: the kernel sum_t (r p_u)^t (1 - s_u(r) conj s_v(r)) (r conj p_v)^t, truncated
    expected = np.zeros((2, 2, 4))
    for u in range(2):
        for v in range(2):
            term = ONE - qmul(sv[u], qconj(sv[v]))
            for _ in range(400):
                expected[u, v] += term
                term = qmul(qmul(r * prob.nodes[u], term), r * qconj(prob.nodes[v]))
    np.testing.assert_allclose(Pr, expected, atol=1e-12)
    assert ql.is_psd(Pr)


def test_necessity_radial_sweep_converges():
    prob = two_node_problem()
    report = necessity_check(prob, quick_solve(prob))
    devs = [row["max_offdiag_deviation"] for row in report.radial]
    assert devs[-1] <= 1e-2
    assert all(b < a for a, b in zip(devs, devs[1:]))
    assert all(row["min_eig"] >= -1e-10 for row in report.radial)


def test_pivot_order_on_low_rank_gram():
    rng = np.random.default_rng(3)
    B = random_quaternions(rng, (2, 4))
    G = ql.qmatmul(ql.adjoint(B), B)
    order = pivot_order(G)
    assert len(order) == 2
    minor = G[np.ix_(order, order)]
    assert ql.hermitian_eigs(minor)[0] > 1e-6
    assert pivot_order(np.zeros((3, 3, 4))) == []


# --- Theta ----------------------------------------------------------------


def real_slice_theta(system, x):
    """Oracle on the real axis: ``I - (1 - x) C (I - x A)^{-1} W`` by dense inversion."""
    n = system.n
    F = ql.qmatmul(system.C, ql.invert(ql.identity(n) - x * system.A))
    W = ql.qmatmul(
        ql.qmatmul(ql.qmatmul(ql.invert(system.P), ql.adjoint(system.one_minus_A_inv())), ql.adjoint(system.C)),
        system.J,
    )
    return ql.identity(2) - (1 - x) * ql.qmatmul(F, W)


def test_theta_at_one_is_identity():
    for prob in (two_node_problem(), random_problem(np.random.default_rng(4), 5)):
        theta = build_theta(build_system(prob))
        assert max_diff(theta.evaluate(ONE), ql.identity(2)) <= 1e-10
        assert max_diff(theta.coefficients(0)[0], theta.evaluate(np.zeros(4))) <= 1e-12


@given(seeds, st.integers(1, 5))
def test_theta_is_j_unitary_at_minus_one(seed, n):
    prob = random_problem(np.random.default_rng(seed), n)
    system = build_system(prob)
    theta = build_theta(system)
    T = theta.evaluate(-ONE)
    np.testing.assert_allclose(T, real_slice_theta(system, -1.0), atol=1e-10)
    JT = ql.qmatmul(ql.qmatmul(T, SIGNATURE), ql.adjoint(T))
    assert max_diff(JT, SIGNATURE) <= 1e-8


@given(seeds, st.integers(1, 5))
def test_theta_closed_form_matches_series(seed, n):
    rng = np.random.default_rng(seed)
    theta = build_theta(build_system(random_problem(rng, n)))
    coeffs = theta.coefficients(400)
    points = np.concatenate([[0.5 * J], rng.uniform(0, 0.9, 8)[:, None] * random_units(rng, 8)])
    for k, p in enumerate(points):
        acc = np.zeros((2, 2, 4))
        for c in coeffs[::-1]:
            acc = c + qmul(p, acc)
        assert max_diff(theta.evaluate(p), acc) <= (1e-10 if k == 0 else 1e-9)
    entry = theta.entry(1, 0)
    p = points[1]
    assert max_diff(entry.eval(p), theta.evaluate(p)[1, 0]) <= 1e-12
    np.testing.assert_allclose(entry.coefficients(30).coeffs, coeffs[:31, 1, 0], atol=1e-12)


@settings(max_examples=10)
@given(seeds, st.integers(1, 4))
def test_kernel_identity(seed, n):
    rng = np.random.default_rng(seed)
    system = build_system(random_problem(rng, n))
    theta = build_theta(system)
    p = rng.uniform(0, 0.9, 20)[:, None] * random_units(rng, 20)
    q = rng.uniform(0, 0.9, 20)[:, None] * random_units(rng, 20)
    model = model_kernel(system, p, q)
    assert max_diff(model, theta_kernel(theta, p, q, order=2000)) <= 1e-8
    assert max_diff(model, theta_kernel(theta, p, q)) <= 1e-8


def test_theta_round_trip_and_singular_system():
    theta = build_theta(build_system(two_node_problem()))
    back = type(theta).from_dict(theta.to_dict())
    np.testing.assert_array_equal(back.evaluate(0.3 * K), theta.evaluate(0.3 * K))
    s = random_units(np.random.default_rng(5))
    with pytest.raises(SingularMatrixError):
        build_theta(build_system(InterpolationProblem(np.array([I, NODE_2]), np.array([s, s]), np.zeros(2))))


# --- solve ----------------------------------------------------------------


def test_single_node_solution():
    prob = InterpolationProblem(np.array([I]), np.array([ONE]), np.array([1.0]))
    sol = solve(prob)
    assert sol.provenance == "nondegenerate" and sol.rank == 1
    # e = s_1 = 1 makes the transform the constant 1
    rep = verify(sol, prob)
    assert rep.nodes[0].gaps_decreasing and np.max(rep.nodes[0].gaps) <= 1e-12
    assert sol.defining_residual() <= 1e-9
    assert sol.schur_max <= 1 + 1e-8
    sol = solve(prob, e=J)
    gaps = verify(sol, prob).nodes[0].gaps
    assert np.all(np.diff(gaps[:3]) < 0)
    assert gaps[2] <= 1e-2
    assert sol.defining_residual() <= 1e-9
    assert sol.schur_max <= 1 + 1e-8


@given(seeds, st.integers(1, 4))
def test_closed_form_matches_series_solution(seed, n):
    rng = np.random.default_rng(seed)
    sol = quick_solve(random_problem(rng, n))
    p = rng.uniform(0, 0.9, 30)[:, None] * random_units(rng, 30)
    assert max_diff(sol.evaluate(p), sol.eval_series(p)) <= 1e-8
    assert sol.defining_residual() <= 1e-9


@settings(max_examples=15)
@given(seeds, st.integers(1, 4))
def test_solutions_interpolate_with_any_unitary_constant(seed, n):
    rng = np.random.default_rng(seed)
    prob = random_problem(rng, n)
    sol = quick_solve(prob, e=random_units(rng))
    assert sol.schur_max <= 1 + 1e-8
    rep = verify(sol, prob)
    assert rep.interpolates, [nr.limit_error for nr in rep.nodes]
    assert rep.bastille_ok and rep.kappa_ok


def test_unitary_parameter_attains_bastille_equality():
    prob = two_node_problem()
    rep = verify(quick_solve(prob), prob)
    for nr in rep.nodes:
        assert abs(nr.bastille_margin) <= 1e-6


def test_series_parameter():
    prob = two_node_problem()
    # e(p) = (j + p k) / 2 is a Schur function
    e = PowerSeries(np.array([0.5 * J, 0.5 * K])).truncate(256)
    sol = quick_solve(prob, e=e, order=256)
    assert not sol.has_closed_form
    assert sol.schur_max <= 1 + 1e-8
    p = 0.5 * random_units(np.random.default_rng(6), 10)
    assert max_diff(sol.evaluate(p), sol.eval_series(p)) <= 1e-8
    rep = verify(sol, prob)
    assert rep.warnings and max(rep.nodes[0].radii) <= 0.999


def test_schur_violation_warning():
    prob = two_node_problem()
    with pytest.warns(SchurViolationWarning):
        quick_solve(prob, e=PowerSeries.constant(2.0 * ONE, 64), order=64)


def test_infeasible_problem_raises():
    with pytest.raises(InfeasibleError):
        solve(two_node_problem(kappa=0.05))


# --- verify ---------------------------------------------------------------


def test_richardson_is_exact_on_polynomials():
    h = np.array([0.1, 0.01, 0.001])
    vals = 1 + 2 * h + 3 * h**2
    assert richardson_limit(h, vals) == pytest.approx(1.0, abs=1e-12)
    assert richardson_limit(h[:2], 5 - h[:2]) == pytest.approx(5.0)


def test_two_sided_limits_on_linear_function():
    rng = np.random.default_rng(7)
    q, c = random_quaternions(rng, 2)
    node = random_units(rng)

    def f(p):
        return qmul(p, q) + c

    value = f(node)
    limit, beta = two_sided_limits(f, node, value)
    np.testing.assert_allclose(limit, value, atol=1e-13)
    np.testing.assert_allclose(beta, qmul(qmul(node, q), qconj(value)), atol=1e-10)


def test_rank0_verification_is_exact():
    s = random_units(np.random.default_rng(8))
    prob = InterpolationProblem(np.array([I, NODE_2]), np.array([s, s]), np.zeros(2))
    sol = solve(prob)
    assert sol.provenance == "rank0"
    rep = verify(sol, prob)
    for nr in rep.nodes:
        assert np.all(nr.gaps == 0.0)
        assert np.all(nr.quotients == 0.0)
        assert nr.kappa_margin is not None and nr.kappa_margin >= 0
    assert rep.ok


def test_negative_control_is_flagged():
    prob = two_node_problem()
    sol = quick_solve(prob)
    wrong = prob.with_values(np.array([-prob.values[0], prob.values[1]]))
    rep = verify(sol, wrong)
    assert not rep.interpolates
    assert rep.nodes[0].limit_error > 1.0
    assert rep.nodes[1].limit_error <= 1e-5


def test_bastille_sides_examples():
    lhs, rhs = bastille_sides(ONE, I, 2.0)
    # |1 - (-i)(-i)|^2 / |1 - (-i)^2|^2 = 1
    assert lhs == pytest.approx(1.0)
    assert rhs == 2.0


def test_external_callable_candidates():
    prob = two_node_problem()
    sol = quick_solve(prob)
    rep = verify(sol.evaluate, prob)
    assert rep.nodes[0].method == "sweep"
    assert rep.nodes[0].limit_error <= 1e-3


# --- degenerate branch ----------------------------------------------------


def test_rank0_constant_and_inconsistent():
    s = random_units(np.random.default_rng(9))
    prob = InterpolationProblem(np.array([I, NODE_2, NODE_3]), np.array([s, s, s]), np.zeros(3))
    sol = degenerate_solve(prob)
    np.testing.assert_array_equal(sol.constant, s)
    np.testing.assert_array_equal(sol.evaluate(0.3 * K), s)
    with pytest.raises(InconsistentDataError):
        solve(prob.with_values(np.array([s, s, -s])))


BLASCHKE_ZERO = 0.9 * np.array([0.3, 0.4, 0.0, 0.0]) / 0.5


@pytest.mark.parametrize("nodes", [np.array([I, NODE_2]), np.array([I, NODE_2, NODE_3])])
def test_blaschke_recovery(nodes):
    prob = blaschke_problem(BLASCHKE_ZERO, nodes)
    assert necessity_check(prob).rank == 1
    sol = solve(prob)
    assert sol.provenance == "degenerate" and sol.rank == 1
    b = blaschke_factor(BLASCHKE_ZERO)
    p = interior_samples(50, seed=1)
    assert max_diff(sol.evaluate(p), b.eval(p)) <= 1e-7
    assert sol.diagnostics["boundary_modulus_error"] <= 1e-6


@given(seeds)
def test_degenerate_uniqueness(seed):
    rng = np.random.default_rng(seed)
    zero = rng.uniform(0.2, 0.8) * random_units(rng)
    nodes = random_problem(rng, 4).nodes
    prob = blaschke_problem(zero, nodes)
    sol = solve(prob, samples=200)
    params = sol.diagnostics["parameters"]
    assert len(params) == 3
    p = interior_samples(50, seed=seed % 1000)
    base = sol.evaluate(p)
    for e in params.values():
        other = lft_solution(sol.theta, np.asarray(e), order=16, samples=0)
        assert max_diff(other.evaluate(p), base) <= 1e-7


@given(seeds)
def test_boundary_parameter_is_unitary(seed):
    # Theta is J-unitary on the sphere, so pulling a unimodular value back gives |e| = 1
    rng = np.random.default_rng(seed)
    prob = random_problem(rng, 3)
    theta = build_theta(build_system(prob.subproblem([0, 1])))
    e = unitary_parameter(theta, prob.nodes[2], prob.values[2])
    assert abs(qabs(e) - 1.0) <= 1e-8
    sol = lft_solution(theta, e, order=8, samples=0)
    assert max_diff(two_sided_limits(sol.evaluate, prob.nodes[2], prob.values[2])[0], prob.values[2]) <= 1e-8


def test_non_unitary_parameter_rejected(monkeypatch):
    prob = blaschke_problem(BLASCHKE_ZERO, np.array([I, NODE_2]))
    real_parameter = pick_module.unitary_parameter
    monkeypatch.setattr(pick_module, "unitary_parameter", lambda *a: 0.9 * real_parameter(*a))
    with pytest.raises(NoUnitaryParameterError):
        degenerate_solve(prob, samples=0)


def test_degenerate_solve_refuses_full_rank():
    with pytest.raises(SingularMatrixError):
        degenerate_solve(two_node_problem(), samples=0)


# --- backward shift and Caratheodory ---------------------------------------


def test_r1_apply_zero():
    system = build_system(two_node_problem())
    np.testing.assert_array_equal(r1_apply(np.zeros((2, 4)), system), np.zeros((2, 4)))


@given(seeds, st.floats(-0.95, 0.95))
def test_r1_apply_difference_quotient(seed, x):
    rng = np.random.default_rng(seed)
    system = build_system(random_problem(rng, 3))
    xi = random_quaternions(rng, (3, 1))
    f = lambda p: ql.qmatmul(system.F(p), xi)[..., 0, :]
    quotient = (f(real(x)) - f(ONE)) / (x - 1)
    shifted = ql.qmatmul(system.F(real(x)), r1_apply(xi[:, 0], system)[:, None, :])[..., 0, :]
    assert max_diff(quotient, shifted) <= 1e-8


def test_caratheodory_constant():
    s = random_units(np.random.default_rng(10))
    res = caratheodory_limit(lambda p: np.broadcast_to(s, np.shape(p)).copy(), NODE_2, s)
    assert qabs(res.derivative) == 0.0
    assert res.gap == 0.0 and qabs(res.rhs) == 0.0


def test_caratheodory_noncommutative_remark():
    a = np.array([0.0, 0.6, 0.8, 0.0])
    node = np.array([0.0, 0.0, 0.6, 0.8])
    assert max_diff(qmul(a, node), qmul(node, a)) > 0.1

    def s(p):
        return 0.5 * (ONE + qmul(p, a))

    res = caratheodory_limit(s, node)
    np.testing.assert_allclose(res.derivative, 0.5 * qmul(node, a), atol=1e-9)
    assert res.gap <= 1e-4
    assert max_diff(res.rhs, qmul(res.derivative, qconj(res.value))) > 1e-3


def test_caratheodory_on_solutions():
    prob = two_node_problem()
    sol = quick_solve(prob)
    for u in range(prob.n):
        res = caratheodory_limit(sol, prob.nodes[u], prob.values[u])
        assert res.analytic
        assert res.gap <= 1e-3
