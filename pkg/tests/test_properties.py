"""Property-based checks of the operator invariants."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from netdr.ballproj import BallConstraint
from netdr.prox import L1Norm, SquaredL2, ZeroFunction, project_l2_ball
from netdr.regression import NodeLocal, edge_prox_regression, node_subproblem, project_node

floats = st.floats(-50, 50, allow_nan=False, allow_infinity=False)
regs = st.sampled_from([L1Norm(), SquaredL2(), ZeroFunction()])
scales = st.floats(1e-3, 10)


def vec(dim):
    return arrays(np.float64, dim, elements=floats)


@st.composite
def vec_pair(draw):
    dim = draw(st.integers(1, 12))
    return draw(vec(dim)), draw(vec(dim))


@given(regs, scales, vec_pair())
def test_prox_firmly_nonexpansive(f, t, uv):
    u, v = uv
    d = f.prox(t, u) - f.prox(t, v)
    assert d @ d <= d @ (u - v) + 1e-9 * (1 + abs(d @ (u - v)))


@given(regs, scales, vec_pair())
def test_F_lambda_nonexpansive(f, lam, uv):
    # v -> 2 prox(v / 2) keeps the 1-Lipschitz bound of prox
    u, v = uv
    assert np.linalg.norm(f.F_lambda(lam, u) - f.F_lambda(lam, v)) <= np.linalg.norm(u - v) * (1 + 1e-12) + 1e-12


@given(regs, scales, vec_pair(), vec_pair())
def test_edge_prox_lands_on_constraint(f, lam, aa, bb):
    a_t, b_t, a_t2, b_t2 = edge_prox_regression(f, lam, aa[0], bb[0], aa[1], bb[1])
    assert np.array_equal(a_t, -a_t2) and np.array_equal(b_t, b_t2)


@given(vec_pair(), st.floats(0, 20))
def test_ball_projection_properties(cv, r):
    center, v = cv
    out = project_l2_ball(center, r, v)
    assert np.linalg.norm(out - center) <= r * (1 + 1e-12) + 1e-12
    # idempotent
    assert np.allclose(project_l2_ball(center, r, out), out, atol=1e-10)


@st.composite
def node_case(draw, pair=False):
    n, p, deg = draw(st.integers(1, 4)), draw(st.integers(1, 4)), draw(st.integers(1, 3))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    if draw(st.booleans()):
        X[:, 0] = 0.0
    local = NodeLocal(X, rng.standard_normal(n), 1, draw(st.floats(1e-3, 2)))
    target_a = rng.standard_normal((deg, n)) * draw(st.floats(0.1, 10))
    target_b = rng.standard_normal((deg, p)) * draw(st.floats(0.1, 10))
    if pair:
        return local, target_a, target_b, rng.standard_normal((deg, n)), rng.standard_normal((deg, p))
    return local, target_a, target_b


@settings(max_examples=200, deadline=None)
@given(node_case())
def test_node_projection_feasible_and_idempotent(case):
    local, ta, tb = case
    a, beta, alpha = project_node(local, ta, tb)
    assert np.allclose(a.sum(axis=0), alpha, atol=1e-10)
    assert local.ball.residual(beta, alpha) <= local.delta * (1 + 1e-10) + 1e-12
    # projecting a projected point (one block per neighbor) changes nothing
    a2, beta2, _ = project_node(local, a, np.tile(beta, (ta.shape[0], 1)))
    assert np.allclose(a2, a, atol=1e-8) and np.allclose(beta2, beta, atol=1e-8)


@settings(max_examples=200, deadline=None)
@given(node_case(pair=True))
def test_node_projection_nonexpansive(case):
    local, ta, tb, ta2, tb2 = case
    a1, b1, _ = project_node(local, ta, tb)
    a2, b2, _ = project_node(local, ta2, tb2)
    # projection of the stacked node variable (every neighbor block carries beta)
    lhs = np.sum((a1 - a2) ** 2) + ta.shape[0] * np.sum((b1 - b2) ** 2)
    rhs = np.sum((ta - ta2) ** 2) + np.sum((tb - tb2) ** 2)
    assert lhs <= rhs * (1 + 1e-9) + 1e-12


@settings(max_examples=100, deadline=None)
@given(node_case(), regs, scales)
def test_node_subproblem_feasible(case, f, lam):
    local, ta, tb = case
    b_in = np.flip(tb, axis=1).copy()
    a_hat, beta, alpha = node_subproblem(local, -ta, tb, b_in, f, lam)
    assert local.ball.residual(beta, a_hat.sum(axis=0)) <= local.delta * (1 + 1e-10) + 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 10_000), st.floats(1e-3, 1))
def test_ball_project_without_alpha_is_closest(n, p, seed, delta):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    beta0 = rng.standard_normal(p)
    y = X @ beta0  # feasible set nonempty
    ball = BallConstraint(X, y, delta)
    d = beta0 + rng.standard_normal(p) * 3
    beta, _ = ball.project(d)
    assert ball.residual(beta) <= delta * (1 + 1e-10) + 1e-12
    # no feasible point on the segment towards beta0 is closer
    for t in np.linspace(0, 1, 11):
        w = (1 - t) * beta + t * beta0
        assert np.linalg.norm(w - d) >= np.linalg.norm(beta - d) - 1e-9
