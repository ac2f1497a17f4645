"""In-network Douglas-Rachford over node costs ``g_i`` and edge costs ``g_ij``.

The full variable ``z`` is stored as one array of shape
``(net.num_slots, dim)``; row ``net.slot(i, j)`` is ``z_ij``.  Reading the
rows edge by edge gives the edge partition, reading them through
``net.node_slots(i)`` gives the node partition.  One round:

1. every node obtains ``z_ji`` from each neighbor;
2. each edge prox ``(z~_ij, z~_ji) = prox_{lam g_ij}(z_ij, z_ji)`` is
   evaluated once and shared by both endpoints;
3. ``z^_i = prox_{lam g_i}(2 z~_i - z_i)``;
4. ``z_i <- z_i + rho (z^_i - z~_i)``.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from .topology import Network

EdgeProx = Callable[[tuple[int, int], float, np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]
NodeProx = Callable[[int, float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class CostOracle:
    """Proximal maps of the edge and node costs.

    ``edge_prox((i, j), lam, z_ij, z_ji)`` returns ``(z~_ij, z~_ji)``.
    ``node_prox(i, lam, w_i)`` receives node ``i``'s own stacked slots
    (rows ordered by ascending neighbor) and returns an array of the same
    shape.  Neither map is given anything belonging to another node.
    """

    edge_prox: EdgeProx
    node_prox: NodeProx
    dim: int


@dataclass
class RoundResult:
    z: np.ndarray
    z_tilde: np.ndarray
    z_hat: np.ndarray


@dataclass
class RunResult:
    z: np.ndarray
    iterations: int
    step_norms: list[float] = field(default_factory=list)
    z_hats: list[np.ndarray] = field(default_factory=list)
    states: list[np.ndarray] = field(default_factory=list)
    converged: bool = False

    def node_view(self, net: Network, i: int, k: int = -1) -> np.ndarray:
        """``z^_i`` after iteration ``k`` (default: last)."""
        return self.z_hats[k][net.node_slots(i)]


def check_parameters(lam: float, rho: float) -> None:
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if not 0 < rho < 2:
        raise ValueError(f"rho must lie in (0, 2), got {rho}")


def initial_state(net: Network, dim: int, rng_seed=None, scale: float = 1.0) -> np.ndarray:
    """All-zeros state, or standard normal entries when a seed is given."""
    if rng_seed is None:
        return np.zeros((net.num_slots, dim))
    return scale * np.random.default_rng(rng_seed).standard_normal((net.num_slots, dim))


def edge_step(net: Network, oracle: CostOracle, lam: float, z: np.ndarray) -> np.ndarray:
    z_tilde = np.empty_like(z)
    for e, edge in enumerate(net.edges):
        a, b = oracle.edge_prox(edge, lam, z[2 * e], z[2 * e + 1])
        z_tilde[2 * e] = a
        z_tilde[2 * e + 1] = b
    return z_tilde


def dr_round(net: Network, oracle: CostOracle, lam: float, rho: float, z: np.ndarray) -> RoundResult:
    check_parameters(lam, rho)
    if z.shape != (net.num_slots, oracle.dim):
        raise ValueError(
            f"state shape {z.shape} does not match network/oracle ({net.num_slots}, {oracle.dim})"
        )
    z_tilde = edge_step(net, oracle, lam, z)
    reflected = 2.0 * z_tilde - z
    z_hat = np.empty_like(z)
    for i in range(1, net.m + 1):
        slots = net.node_slots(i)
        z_hat[slots] = oracle.node_prox(i, lam, reflected[slots])
    z_next = z + rho * (z_hat - z_tilde)
    return RoundResult(z_next, z_tilde, z_hat)


def run(
    net: Network,
    oracle: CostOracle,
    lam: float,
    rho: float,
    init: np.ndarray | None = None,
    max_iter: int = 1000,
    stop_tol: float = 0.0,
    keep_history: bool = True,
) -> RunResult:
    """Iterate :func:`dr_round` until ``max_iter`` or a small step.

    Stops when ``||z_{k+1} - z_k|| <= stop_tol (1 + ||z_k||)``.
    """
    if max_iter < 1:
        raise ValueError(f"max_iter must be at least 1, got {max_iter}")
    if stop_tol < 0:
        raise ValueError(f"stop_tol must be nonnegative, got {stop_tol}")
    check_parameters(lam, rho)
    z = np.zeros((net.num_slots, oracle.dim)) if init is None else np.array(init, dtype=float)
    result = RunResult(z=z, iterations=0)
    for _ in range(max_iter):
        rnd = dr_round(net, oracle, lam, rho, z)
        step = float(np.linalg.norm(rnd.z - z))
        result.step_norms.append(step)
        if keep_history:
            result.z_hats.append(rnd.z_hat)
            result.states.append(rnd.z)
        result.iterations += 1
        done = step <= stop_tol * (1.0 + float(np.linalg.norm(z)))
        z = rnd.z
        if done:
            result.converged = True
            break
    result.z = z
    return result
