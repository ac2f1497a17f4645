"""Centralized reference solutions.

:func:`solve_central` solves ``min f(beta) s.t. ||X beta - y|| <= eps``
with two-operator Douglas-Rachford (prox of ``f`` and projection onto the
residual ball).  :func:`qp_oracle_node_subproblem` re-solves a node
subproblem in the full, unreduced variables with dense linear algebra and
a bracketing root finder; tests use it to check the fast path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .ballproj import BallConstraint
from .datasplit import GlobalData
from .prox import Regularizer


class CentralNonConvergence(RuntimeError):
    def __init__(self, solution: CentralSolution):
        super().__init__(
            f"central solver stopped after {solution.iterations} iterations without converging"
        )
        self.solution = solution


@dataclass
class CentralSolution:
    beta: np.ndarray
    objective: float
    residual: float
    iterations: int
    converged: bool


def solve_central(
    data: GlobalData,
    f: Regularizer,
    eps: float,
    lam: float = 1.0,
    max_iter: int = 1_000_000,
    tol: float = 1e-12,
    rho: float = 1.0,
    raise_on_failure: bool = False,
) -> CentralSolution:
    """Douglas-Rachford on ``lam f`` and the residual ball indicator.

    The returned ``beta`` is always the last ball projection, hence
    feasible even when the iteration did not converge.
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if not lam > 0 or not 0 < rho < 2:
        raise ValueError(f"need lam > 0 and 0 < rho < 2, got lam={lam}, rho={rho}")
    ball = BallConstraint(data.X, data.y, eps)
    z = np.zeros(data.p)
    converged = False
    k = 0
    proj = z
    for k in range(1, max_iter + 1):
        x = f.prox(lam, z)
        proj, _ = ball.project(2.0 * x - z)
        step = rho * (proj - x)
        z = z + step
        if np.linalg.norm(step) <= tol * (1.0 + np.linalg.norm(z)):
            converged = True
            break
    sol = CentralSolution(
        beta=proj,
        objective=f(proj),
        residual=ball.residual(proj),
        iterations=k,
        converged=converged,
    )
    if raise_on_failure and not converged:
        raise CentralNonConvergence(sol)
    return sol


@dataclass
class OracleResult:
    a_hat: np.ndarray
    beta: np.ndarray
    alpha: np.ndarray
    multiplier: float
    converged: bool


def qp_oracle_node_subproblem(X, y, delta, a_in, b_out, b_in, f: Regularizer, lam) -> OracleResult:
    """Node subproblem solved in the full variables ``(a_1..a_deg, beta)``.

    For a multiplier ``mu`` the KKT stationarity conditions form one dense
    linear system; ``mu`` is then located with Brent's method on the
    monotone constraint residual.  Intended for small instances only.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    a_in = np.atleast_2d(a_in)
    b_out = np.atleast_2d(b_out)
    b_in = np.atleast_2d(b_in)
    n, p = X.shape
    deg = a_in.shape[0]
    t = -a_in
    u = f.F_lambda(lam, b_out + b_in) - b_out

    J = np.hstack([np.tile(np.eye(n), deg), X])
    H = np.diag(np.concatenate([np.ones(deg * n), np.full(p, float(deg))]))
    base = np.concatenate([t.ravel(), u.sum(axis=0)])

    def solve(mu):
        return np.linalg.solve(H + mu * J.T @ J, base + mu * J.T @ y)

    def excess(mu):
        return np.linalg.norm(J @ solve(mu) - y) - delta

    mu = 0.0
    converged = True
    if excess(0.0) > 0:
        hi = 1.0
        while excess(hi) > 0:
            hi *= 10.0
            if hi > 1e300:
                converged = False
                break
        if converged:
            mu = brentq(excess, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=2000)
    sol = solve(mu)
    a_hat = sol[: deg * n].reshape(deg, n)
    beta = sol[deg * n :]
    return OracleResult(a_hat, beta, a_hat.sum(axis=0), mu, converged)
