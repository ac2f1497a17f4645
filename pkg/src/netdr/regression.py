"""Distributed constrained regression on top of the splitting engine.

Each directed edge slot carries ``z_ij = (a_ij, b_ij)`` with ``a_ij`` in
R^n (node ``i``'s share of its residual offset ``alpha_i``) and ``b_ij`` in
R^p (its copy of the coefficients).  The edge cost forces
``a_ij = -a_ji`` and ``b_ij = b_ji = beta`` and charges ``f(beta)``; the
node cost forces all ``b_ij`` at node ``i`` to agree and keeps
``||X_i beta - y_i + sum_j a_ij|| <= eps / m``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ballproj import BallConstraint
from .datasplit import DataSummand
from .framework import CostOracle, check_parameters
from .prox import Regularizer
from .topology import Network


@dataclass
class NodeLocal:
    """Private data of one agent plus the shared constants ``m`` and ``eps``."""

    X: np.ndarray
    y: np.ndarray
    m: int
    eps: float
    ball: BallConstraint = field(init=False, repr=False)

    def __post_init__(self):
        if self.m < 1 or not self.eps > 0:
            raise ValueError(f"need m >= 1 and eps > 0, got m={self.m}, eps={self.eps}")
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        self.ball = BallConstraint(self.X, self.y, self.delta)

    @property
    def delta(self) -> float:
        return self.eps / self.m

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @classmethod
    def from_summand(cls, summand: DataSummand, m: int, eps: float) -> NodeLocal:
        return cls(summand.X, summand.y, m, eps)


def edge_prox_regression(f: Regularizer, lam, a_ij, b_ij, a_ji, b_ji):
    """Closed-form ``prox_{lam g_ij}``; returns ``(a~_ij, b~_ij, a~_ji, b~_ji)``."""
    a_t = 0.5 * (np.asarray(a_ij) - np.asarray(a_ji))
    b_t = 0.5 * f.F_lambda(lam, np.asarray(b_ij) + np.asarray(b_ji))
    return a_t, b_t, -a_t, b_t.copy()


def project_node(local: NodeLocal, target_a: np.ndarray, target_b: np.ndarray):
    """Euclidean projection of a node variable onto the node constraint set.

    ``target_a`` (deg x n) and ``target_b`` (deg x p) hold the point to
    project.  With ``alpha`` fixed the best shares are
    ``a_j = target_a_j + (alpha - c) / deg`` where ``c = sum_j target_a_j``,
    which leaves a projection of ``(mean_j target_b_j, c)`` with weights
    ``(deg, 1/deg)`` onto the ball.  Returns ``(a, beta, alpha)``.
    """
    deg = target_a.shape[0]
    c = target_a.sum(axis=0)
    d = target_b.mean(axis=0)
    beta, alpha = local.ball.project(d, c, w_a=1.0 / deg, w_b=float(deg))
    a = target_a + (alpha - c) / deg
    return a, beta, alpha


def node_subproblem(local: NodeLocal, a_in, b_out, b_in, f: Regularizer, lam, F=None):
    """Minimize ``sum_j ||a_ij + a_ji||^2 + ||beta + b_ij - F(b_ij + b_ji)||^2``
    subject to ``||X_i beta - y_i + sum_j a_ij|| <= eps/m``.

    Rows of ``a_in``/``b_in`` are the neighbors' ``a_ji``/``b_ji`` and rows of
    ``b_out`` the node's own ``b_ij``, all ordered by ascending neighbor.
    Returns ``(a_hat, beta_hat, alpha_hat)``.
    """
    a_in = np.atleast_2d(np.asarray(a_in, dtype=float))
    b_out = np.atleast_2d(np.asarray(b_out, dtype=float))
    b_in = np.atleast_2d(np.asarray(b_in, dtype=float))
    if F is None:
        F = f.F_lambda(lam, b_out + b_in)
    return project_node(local, -a_in, F - b_out)


def dr_update_regression(rho, a_out, a_in, b_out, F, a_hat, beta_hat):
    """Relaxed update of the node's own shares; works row-wise over neighbors."""
    a_next = a_out - 0.5 * rho * (a_out - a_in) + rho * a_hat
    b_next = b_out - 0.5 * rho * F + rho * beta_hat
    return a_next, b_next


def build_regression_oracle(locals_: dict[int, NodeLocal], f: Regularizer, net: Network) -> CostOracle:
    """Package the regression costs for :mod:`netdr.framework`."""
    shapes = {(loc.n, loc.p) for loc in locals_.values()}
    if len(shapes) != 1 or set(locals_) != set(range(1, net.m + 1)):
        raise ValueError("need one NodeLocal per node, all with the same data shape")
    ((n, p),) = shapes

    def edge_prox(edge, lam, z_ij, z_ji):
        a_ij, b_ij, a_ji, b_ji = edge_prox_regression(f, lam, z_ij[:n], z_ij[n:], z_ji[:n], z_ji[n:])
        return np.concatenate([a_ij, b_ij]), np.concatenate([a_ji, b_ji])

    def node_prox(i, lam, w_i):
        # g_i is an indicator, so lam does not enter
        a, beta, _ = project_node(locals_[i], w_i[:, :n], w_i[:, n:])
        out = np.empty_like(w_i)
        out[:, :n] = a
        out[:, n:] = beta
        return out

    return CostOracle(edge_prox=edge_prox, node_prox=node_prox, dim=n + p)


class RegressionAgent:
    """One node running the regression iteration on its own shares.

    ``A`` (deg x n) and ``B`` (deg x p) hold ``a_ij`` and ``b_ij`` for the
    neighbors ``j`` in ascending order.  The agent publishes only these rows.
    """

    def __init__(self, label: int, neighbors, local: NodeLocal, A=None, B=None):
        self.label = label
        self.neighbors = tuple(neighbors)
        if not self.neighbors:
            raise ValueError(f"agent {label} has no neighbors")
        self._local = local
        deg = len(self.neighbors)
        self.A = np.zeros((deg, local.n)) if A is None else np.array(A, dtype=float)
        self.B = np.zeros((deg, local.p)) if B is None else np.array(B, dtype=float)
        self.beta = np.zeros(local.p)
        self.alpha = np.zeros(local.n)

    def outgoing(self) -> dict[int, np.ndarray]:
        """Payload ``(a_ij, b_ij)`` for each neighbor ``j``."""
        return {j: np.concatenate([self.A[r], self.B[r]]) for r, j in enumerate(self.neighbors)}

    def step(self, inbox: dict[int, np.ndarray], f: Regularizer, lam: float, rho: float) -> None:
        n = self._local.n
        incoming = np.stack([inbox[j] for j in self.neighbors])
        a_in, b_in = incoming[:, :n], incoming[:, n:]
        F = f.F_lambda(lam, self.B + b_in)
        a_hat, self.beta, self.alpha = node_subproblem(self._local, a_in, self.B, b_in, f, lam, F=F)
        self.A, self.B = dr_update_regression(rho, self.A, a_in, self.B, F, a_hat, self.beta)
        self.a_hat = a_hat


def make_agents(net: Network, locals_: dict[int, NodeLocal], init=None) -> dict[int, RegressionAgent]:
    """Agents for every node; ``init`` is an optional ``(num_slots, n+p)`` state."""
    agents = {}
    for i in range(1, net.m + 1):
        loc = locals_[i]
        A = B = None
        if init is not None:
            rows = init[net.node_slots(i)]
            A, B = rows[:, : loc.n], rows[:, loc.n :]
        agents[i] = RegressionAgent(i, net.neighbors_of(i), loc, A, B)
    return agents


def gather_state(net: Network, agents: dict[int, RegressionAgent]) -> np.ndarray:
    """Assemble the full slot array ``z`` from the agents' shares."""
    first = agents[1]
    z = np.empty((net.num_slots, first.A.shape[1] + first.B.shape[1]))
    for i, ag in agents.items():
        slots = net.node_slots(i)
        z[slots] = np.hstack([ag.A, ag.B])
    return z


def run_direct(net, locals_, f, lam, rho, iters, init=None):
    """Plain synchronous loop over agents, no ledger or metrics.

    Returns the list of full states ``z_1..z_iters`` and the per-node
    ``beta_hat`` history (``iters x m x p``).
    """
    check_parameters(lam, rho)
    agents = make_agents(net, locals_, init)
    states, betas = [], []
    for _ in range(iters):
        mail = {i: ag.outgoing() for i, ag in agents.items()}
        for i, ag in agents.items():
            ag.step({j: mail[j][i] for j in ag.neighbors}, f, lam, rho)
        states.append(gather_state(net, agents))
        betas.append(np.stack([agents[i].beta for i in range(1, net.m + 1)]))
    return states, np.array(betas)
