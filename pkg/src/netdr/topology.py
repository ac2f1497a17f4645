"""Agent networks: connected undirected graphs on nodes labelled 1..m.

Besides the neighbor sets, a :class:`Network` fixes the layout of the
edge variables used by the splitting engine.  Every edge ``(i, j)`` with
``i < j`` owns two *slots* in a state array: slot ``2e`` holds ``z_ij``
(kept by node ``i``) and slot ``2e + 1`` holds ``z_ji`` (kept by node
``j``).  Grouping the slots by owner gives the per-node variables; grouping
them by edge gives the per-edge pairs.
"""

from __future__ import annotations

import math
from collections import deque
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np


class TopologyError(ValueError):
    """Raised for malformed or disconnected networks."""


class Network:
    """Immutable connected undirected graph.

    Parameters
    ----------
    m : int
        Number of nodes, labelled ``1..m``.
    edges : iterable of (int, int)
        Node pairs.  Reversed and repeated pairs collapse to one edge.
    """

    def __init__(self, m: int, edges: Iterable[tuple[int, int]]):
        if m < 2:
            raise TopologyError(f"a network needs at least 2 nodes, got m={m}")
        canon = set()
        for i, j in edges:
            i, j = int(i), int(j)
            if i == j:
                raise TopologyError(f"self-loop at node {i}")
            for v in (i, j):
                if not 1 <= v <= m:
                    raise TopologyError(f"node label {v} outside 1..{m}")
            canon.add((min(i, j), max(i, j)))

        self._m = m
        self._edges = tuple(sorted(canon))
        nbrs: dict[int, list[int]] = {i: [] for i in range(1, m + 1)}
        for i, j in self._edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        self._neighbors = {i: tuple(sorted(v)) for i, v in nbrs.items()}

        if not is_connected(self):
            isolated = [i for i, v in self._neighbors.items() if not v]
            hint = f" (isolated nodes: {isolated})" if isolated else ""
            raise TopologyError(f"network is disconnected{hint}")

        # slot bookkeeping
        owner = np.empty(2 * len(self._edges), dtype=np.int64)
        peer = np.empty_like(owner)
        slot = {}
        for e, (i, j) in enumerate(self._edges):
            owner[2 * e], peer[2 * e] = i, j
            owner[2 * e + 1], peer[2 * e + 1] = j, i
            slot[i, j] = 2 * e
            slot[j, i] = 2 * e + 1
        owner.flags.writeable = False
        peer.flags.writeable = False
        self._owner = owner
        self._peer = peer
        self._slot = slot
        self._node_slots = {}
        for i in range(1, m + 1):
            s = np.array([slot[i, j] for j in self._neighbors[i]], dtype=np.int64)
            s.flags.writeable = False
            self._node_slots[i] = s

    @property
    def m(self) -> int:
        return self._m

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        """Edges ``(i, j)`` with ``i < j``, sorted."""
        return self._edges

    @property
    def neighbors(self) -> dict[int, tuple[int, ...]]:
        """Neighbor labels of each node, ascending."""
        return dict(self._neighbors)

    def neighbors_of(self, i: int) -> tuple[int, ...]:
        return self._neighbors[i]

    def degree(self, i: int) -> int:
        return len(self._neighbors[i])

    @property
    def num_slots(self) -> int:
        return 2 * len(self._edges)

    @property
    def slot_owner(self) -> np.ndarray:
        return self._owner

    @property
    def slot_peer(self) -> np.ndarray:
        return self._peer

    def slot(self, i: int, j: int) -> int:
        """Index of the slot holding ``z_ij``."""
        return self._slot[i, j]

    def node_slots(self, i: int) -> np.ndarray:
        """Slots owned by node ``i``, ordered by ascending neighbor label."""
        return self._node_slots[i]

    def partner_slots(self) -> np.ndarray:
        """For every slot ``ij`` the index of the opposite slot ``ji``."""
        return np.arange(self.num_slots) ^ 1

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return self._m == other._m and self._edges == other._edges

    def __hash__(self):
        return hash((self._m, self._edges))

    def __repr__(self):
        return f"Network(m={self._m}, edges={list(self._edges)})"

    def to_text(self) -> str:
        lines = [f"m {self._m}"]
        lines += [f"edge {i} {j}" for i, j in self._edges]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> Network:
        m = None
        edges = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                if parts[0] == "m" and len(parts) == 2:
                    m = int(parts[1])
                elif parts[0] == "edge" and len(parts) == 3:
                    edges.append((int(parts[1]), int(parts[2])))
                else:
                    raise ValueError
            except ValueError:
                raise TopologyError(f"line {lineno}: cannot parse {raw!r}") from None
        if m is None:
            raise TopologyError("missing 'm <count>' line")
        return cls(m, edges)


def build_network(m: int, edge_list: Iterable[tuple[int, int]]) -> Network:
    return Network(m, edge_list)


def load_network(path: str | Path) -> Network:
    return Network.from_text(Path(path).read_text(encoding="utf-8"))


def is_connected(net: Network) -> bool:
    """Breadth-first search from node 1."""
    nbrs = net._neighbors
    seen = {1}
    queue = deque([1])
    while queue:
        i = queue.popleft()
        for j in nbrs[i]:
            if j not in seen:
                seen.add(j)
                queue.append(j)
    return len(seen) == net.m


def walk_edges(draws: Sequence[int]) -> set[tuple[int, int]]:
    """Edges joining consecutive distinct entries of a draw sequence."""
    edges = set()
    for u, v in zip(draws[:-1], draws[1:]):
        if u != v:
            edges.add((min(u, v), max(u, v)))
    return edges


def draw_cap(m: int) -> int:
    return int(10 * m * math.log(m) + 1000)


def random_walk_network(m: int, rng_seed: int | np.random.Generator) -> Network:
    """Random connected network from a uniform draw sequence.

    Nodes are drawn uniformly with replacement from ``1..m`` until every
    node has appeared; consecutive distinct draws become neighbors.  The
    draw sequence is a walk through all nodes, so the graph is connected.
    """
    if m < 2:
        raise TopologyError(f"a network needs at least 2 nodes, got m={m}")
    rng = np.random.default_rng(rng_seed)
    cap = draw_cap(m)
    draws = []
    unseen = set(range(1, m + 1))
    while unseen:
        if len(draws) >= cap:
            raise TopologyError(f"random walk did not cover {m} nodes within {cap} draws")
        v = int(rng.integers(1, m + 1))
        draws.append(v)
        unseen.discard(v)
    return Network(m, walk_edges(draws))
