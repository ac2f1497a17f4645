"""Additive decompositions of regression data across agents.

Each agent knows which entries of ``X`` and ``y`` it holds and how many
agents hold each entry.  An entry held by ``k`` agents is divided equally,
so every agent's summand carries ``value / k`` there and zero elsewhere;
the summands then add back up to the global data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SCHEMES = ("columns", "rows", "blocks", "arbitrary-overlapping")


class SplitError(ValueError):
    pass


@dataclass(frozen=True)
class GlobalData:
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float).reshape(-1)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise SplitError(f"X must be a non-empty matrix, got shape {X.shape}")
        if y.shape[0] != X.shape[0]:
            raise SplitError(f"y has {y.shape[0]} entries but X has {X.shape[0]} rows")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise SplitError("data contains non-finite entries")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class AgentMask:
    """Entries of the global data held by one agent (0-based boolean masks)."""

    agent: int
    cells: np.ndarray
    label_rows: np.ndarray


@dataclass(frozen=True)
class DataSummand:
    X: np.ndarray
    y: np.ndarray


def generate_data(n: int, p: int, seed: int) -> GlobalData:
    """Independent standard normal entries for ``X`` then ``y``."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    y = rng.standard_normal(n)
    return GlobalData(X, y)


def load_data(x_path: str | Path, y_path: str | Path) -> GlobalData:
    X = np.loadtxt(x_path, delimiter=",", ndmin=2)
    y = np.loadtxt(y_path, delimiter=",", ndmin=1)
    return GlobalData(X, y)


def multiplicity(masks: list[AgentMask], n: int, p: int) -> tuple[np.ndarray, np.ndarray]:
    cell_count = np.zeros((n, p), dtype=np.int64)
    label_count = np.zeros(n, dtype=np.int64)
    for mk in masks:
        if mk.cells.shape != (n, p) or mk.label_rows.shape != (n,):
            raise SplitError(f"mask of agent {mk.agent} does not match data shape ({n}, {p})")
        cell_count += mk.cells
        label_count += mk.label_rows
    return cell_count, label_count


def split_from_masks(data: GlobalData, masks: list[AgentMask]) -> list[DataSummand]:
    """Summands in the order of ``masks``; shared entries split by multiplicity."""
    n, p = data.X.shape
    cell_count, label_count = multiplicity(masks, n, p)
    gaps = np.argwhere(cell_count == 0)
    if gaps.size:
        r, c = gaps[0] + 1
        raise SplitError(f"cell ({r}, {c}) of X is held by no agent")
    gaps = np.flatnonzero(label_count == 0)
    if gaps.size:
        raise SplitError(f"row {gaps[0] + 1} of y is held by no agent")

    X_share = data.X / cell_count
    y_share = data.y / label_count
    return [
        DataSummand(np.where(mk.cells, X_share, 0.0), np.where(mk.label_rows, y_share, 0.0))
        for mk in masks
    ]


def _blocks(total: int, parts: int) -> list[slice]:
    edges = np.linspace(0, total, parts + 1).round().astype(int)
    return [slice(a, b) for a, b in zip(edges[:-1], edges[1:])]


def _grid_shape(m: int, n: int, p: int) -> tuple[int, int]:
    # most square factorization that fits the matrix
    best = None
    for r in range(1, m + 1):
        if m % r:
            continue
        c = m // r
        if r <= n and c <= p:
            score = abs(math.log(r / c))
            if best is None or score < best[0]:
                best = (score, r, c)
    if best is None:
        raise SplitError(f"cannot tile a {n}x{p} matrix into {m} blocks")
    return best[1], best[2]


def preset_masks(
    scheme: str,
    n: int,
    p: int,
    m: int,
    rng_seed: int = 0,
    overlap: float = 0.1,
) -> list[AgentMask]:
    """Masks for the four canonical splitting patterns.

    ``columns`` and ``rows`` cut contiguous bands; ``blocks`` tiles a grid;
    ``arbitrary-overlapping`` grows irregular regions around random seed
    cells and then hands a fraction ``overlap`` of cells to a second agent.
    """
    if scheme not in SCHEMES:
        raise SplitError(f"unknown split scheme {scheme!r}; expected one of {SCHEMES}")
    if m < 1:
        raise SplitError("need at least one agent")
    cells = np.zeros((m, n, p), dtype=bool)
    labels = np.zeros((m, n), dtype=bool)

    if scheme == "columns":
        if m > p:
            raise SplitError(f"columns split needs m <= p, got m={m}, p={p}")
        for a, sl in enumerate(_blocks(p, m)):
            cells[a, :, sl] = True
        labels[0] = True
    elif scheme == "rows":
        if m > n:
            raise SplitError(f"rows split needs m <= n, got m={m}, n={n}")
        for a, sl in enumerate(_blocks(n, m)):
            cells[a, sl, :] = True
            labels[a, sl] = True
    elif scheme == "blocks":
        gr, gc = _grid_shape(m, n, p)
        for bi, rs in enumerate(_blocks(n, gr)):
            for bj, cs in enumerate(_blocks(p, gc)):
                cells[bi * gc + bj, rs, cs] = True
            labels[bi * gc, rs] = True
    else:
        if m > n * p:
            raise SplitError(f"cannot give {m} agents a cell each in a {n}x{p} matrix")
        cells, labels = _irregular_regions(n, p, m, np.random.default_rng(rng_seed), overlap)

    return [AgentMask(a + 1, cells[a], labels[a]) for a in range(m)]


def _irregular_regions(n, p, m, rng, overlap):
    flat = rng.choice(n * p, size=m, replace=False)
    centers = np.stack(np.unravel_index(flat, (n, p)), axis=1).astype(float)
    # anisotropic weights per agent bend the regions away from rectangles
    weights = rng.uniform(0.5, 2.0, size=(m, 2))
    rr, cc = np.meshgrid(np.arange(n), np.arange(p), indexing="ij")
    dist = (
        weights[:, 0, None, None] * np.abs(rr[None] - centers[:, 0, None, None])
        + weights[:, 1, None, None] * np.abs(cc[None] - centers[:, 1, None, None])
    )
    owner = np.argmin(dist, axis=0)
    owner.flat[flat] = np.arange(m)
    cells = owner[None] == np.arange(m)[:, None, None]

    if m > 1:
        n_shared = max(1, int(round(overlap * n * p)))
        for idx in rng.choice(n * p, size=n_shared, replace=False):
            r, c = divmod(int(idx), p)
            here = owner[r, c]
            near = {
                owner[rn, cn]
                for rn, cn in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1))
                if 0 <= rn < n and 0 <= cn < p and owner[rn, cn] != here
            }
            pool = sorted(near) or [a for a in range(m) if a != here]
            cells[pool[rng.integers(len(pool))], r, c] = True

    labels = np.zeros((m, n), dtype=bool)
    counts = cells.sum(axis=2)
    labels[np.argmax(counts, axis=0), np.arange(n)] = True
    return cells, labels


def masks_to_text(masks: list[AgentMask]) -> str:
    lines = []
    for mk in masks:
        for r, c in np.argwhere(mk.cells):
            lines.append(f"agent {mk.agent} cell {r + 1} {c + 1}")
        for r in np.flatnonzero(mk.label_rows):
            lines.append(f"agent {mk.agent} label {r + 1}")
    return "\n".join(lines) + "\n"


def masks_from_text(text: str, n: int, p: int, m: int) -> list[AgentMask]:
    """Parse mask lines (1-based indices) for ``m`` agents of an ``n x p`` problem."""
    cells = np.zeros((m, n, p), dtype=bool)
    labels = np.zeros((m, n), dtype=bool)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] != "agent":
                raise ValueError
            a = int(parts[1])
            if parts[2] == "cell" and len(parts) == 5:
                r, c = int(parts[3]), int(parts[4])
                if not (1 <= r <= n and 1 <= c <= p):
                    raise SplitError(f"line {lineno}: cell ({r}, {c}) outside {n}x{p}")
            elif parts[2] == "label" and len(parts) == 4:
                r = int(parts[3])
                if not 1 <= r <= n:
                    raise SplitError(f"line {lineno}: label row {r} outside 1..{n}")
            else:
                raise ValueError
        except (ValueError, IndexError):
            raise SplitError(f"line {lineno}: cannot parse {raw!r}") from None
        if not 1 <= a <= m:
            raise SplitError(f"line {lineno}: agent {a} outside 1..{m}")
        if parts[2] == "cell":
            cells[a - 1, r - 1, c - 1] = True
        else:
            labels[a - 1, r - 1] = True
    return [AgentMask(a + 1, cells[a], labels[a]) for a in range(m)]
