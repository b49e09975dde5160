"""Deterministic dataset generators and exact ground-truth oracles.

Every generator is a pure function of its arguments (stream included),
so regenerating a dataset is bit-identical. Labels and targets always
come from exact integer/float predicates, never from a model.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .rng import RngStream

TRAIN_LO = -10
TRAIN_HI = 9  # inclusive


class ComparisonOp(Enum):
    GT = "gt"
    LT = "lt"
    GE = "ge"
    LE = "le"
    EQ = "eq"
    NE = "ne"

    def truth(self, a, b):
        """Exact predicate, elementwise over arrays."""
        a, b = np.asarray(a), np.asarray(b)
        if self is ComparisonOp.GT:
            return a > b
        if self is ComparisonOp.LT:
            return a < b
        if self is ComparisonOp.GE:
            return a >= b
        if self is ComparisonOp.LE:
            return a <= b
        if self is ComparisonOp.EQ:
            return a == b
        return a != b

    @classmethod
    def parse(cls, name: str) -> "ComparisonOp":
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(f"unknown comparison '{name}'") from None


def comparison_train_set(op: ComparisonOp, delta: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """All integer pairs from [-10, 9]^2, inputs scaled by delta.

    Labels are evaluated on the unscaled integers (scaling by a positive
    factor preserves every comparison).
    """
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    grid = np.arange(TRAIN_LO, TRAIN_HI + 1)
    a, b = np.meshgrid(grid, grid, indexing="ij")
    pairs = np.stack([a.ravel(), b.ravel()], axis=1)
    labels = op.truth(pairs[:, 0], pairs[:, 1]).astype(np.float64)
    return pairs.astype(np.float64) * delta, labels


def extrapolation_suite(
    op: ComparisonOp,
    magnitude_exp: int,
    base: int = 10,
    delta: float = 1.0,
    rng: RngStream | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Test pairs around a random number of the requested magnitude.

    Draws an integer n with base^k <= n < base^(k+1) and emits the cases
    (n, n+i) for i in [-5, 5]. Equality and inequality additionally get
    the ten cases (n+i, n+i), i != 0, so the classes differ in size by
    at most one. All inputs are scaled by delta, which also shrinks the
    gap between neighbours to delta.
    """
    if base not in (10, 3):
        raise ValueError(f"magnitude base must be 10 or 3, got {base}")
    if base == 10 and magnitude_exp < 2:
        raise ValueError("base-10 suites start at magnitude exponent 2")
    if base == 3 and magnitude_exp < 1:
        raise ValueError("base-3 suites start at magnitude exponent 1")
    if rng is None:
        rng = RngStream(0)
    n = int(rng.integers(base**magnitude_exp, base ** (magnitude_exp + 1)))
    offsets = np.arange(-5, 6)
    pairs = [(n, n + i) for i in offsets]
    if op in (ComparisonOp.EQ, ComparisonOp.NE):
        pairs += [(n + i, n + i) for i in offsets if i != 0]
    pairs = np.asarray(pairs, dtype=np.float64)
    labels = op.truth(pairs[:, 0], pairs[:, 1]).astype(np.float64)
    return pairs * delta, labels


# -- piecewise target functions ------------------------------------------------

def piecewise_abs(x1, x2):
    """x1 - x2 when x1 > x2, else x2 - x1."""
    x1, x2 = np.asarray(x1, dtype=np.float64), np.asarray(x2, dtype=np.float64)
    return np.where(x1 > x2, x1 - x2, x2 - x1)


def piecewise_f(x1, x2, x3, x4, x5):
    """x5 + 4 when x1 > x2, else x4 - x3."""
    arrays = [np.asarray(v, dtype=np.float64) for v in (x1, x2, x3, x4, x5)]
    x1, x2, x3, x4, x5 = arrays
    return np.where(x1 > x2, x5 + 4.0, x4 - x3)


PIECEWISE_ARITY = {"abs": 2, "f": 5}


def _piecewise_eval(fn: str, inputs: np.ndarray) -> np.ndarray:
    if fn == "abs":
        return piecewise_abs(inputs[:, 0], inputs[:, 1])
    if fn == "f":
        return piecewise_f(*(inputs[:, j] for j in range(5)))
    raise ValueError(f"unknown piecewise function '{fn}'")


def piecewise_set(fn: str, rng: RngStream) -> tuple[np.ndarray, np.ndarray]:
    """Training set: one point per comparison pair from [-10, 9]^2.

    For the five-input function the non-compared inputs are uniform
    integers in [-100, 100].
    """
    arity = PIECEWISE_ARITY.get(fn)
    if arity is None:
        raise ValueError(f"unknown piecewise function '{fn}'")
    grid = np.arange(TRAIN_LO, TRAIN_HI + 1)
    a, b = np.meshgrid(grid, grid, indexing="ij")
    pairs = np.stack([a.ravel(), b.ravel()], axis=1).astype(np.float64)
    if arity == 2:
        inputs = pairs
    else:
        extra = rng.integers(-100, 101, (pairs.shape[0], arity - 2)).astype(np.float64)
        inputs = np.concatenate([pairs, extra], axis=1)
    return inputs, _piecewise_eval(fn, inputs)


def piecewise_extrapolation(fn: str, magnitude_exp: int, rng: RngStream) -> tuple[np.ndarray, np.ndarray]:
    """Test set: compared inputs from the +-5 interval around a random
    number of magnitude 3^k, remaining inputs uniform in [-100, 100]."""
    arity = PIECEWISE_ARITY.get(fn)
    if arity is None:
        raise ValueError(f"unknown piecewise function '{fn}'")
    n = int(rng.integers(3**magnitude_exp, 3 ** (magnitude_exp + 1)))
    offsets = np.arange(-5, 6)
    pairs = np.stack([np.full(offsets.shape, n, dtype=np.float64), (n + offsets).astype(np.float64)], axis=1)
    if arity == 2:
        inputs = pairs
    else:
        extra = rng.integers(-100, 101, (pairs.shape[0], arity - 2)).astype(np.float64)
        inputs = np.concatenate([pairs, extra], axis=1)
    return inputs, _piecewise_eval(fn, inputs)


# -- sequence tasks --------------------------------------------------------------

def sequence_set(
    kind: str,
    num_lists: int,
    length: int,
    magnitude_exp: int | None,
    rng: RngStream,
) -> tuple[np.ndarray, np.ndarray]:
    """Lists with exact targets for the minimum / counting tasks.

    With magnitude_exp None, elements are uniform integers in [-10, 9]
    (the training regime). Otherwise each list is drawn from the +-5
    interval around its own random number of magnitude 3^k. The counting
    target is the number of occurrences of element 0 in elements 1...
    """
    if kind not in ("min", "count"):
        raise ValueError(f"unknown sequence task '{kind}'")
    if length < 2:
        raise ValueError(f"need length >= 2, got {length}")
    if magnitude_exp is None:
        lists = rng.integers(TRAIN_LO, TRAIN_HI + 1, (num_lists, length)).astype(np.float64)
    else:
        centers = rng.integers(3**magnitude_exp, 3 ** (magnitude_exp + 1), num_lists)
        offsets = rng.integers(-5, 6, (num_lists, length))
        lists = (centers[:, None] + offsets).astype(np.float64)
    if kind == "min":
        targets = lists.min(axis=1)
    else:
        targets = (lists[:, 1:] == lists[:, :1]).sum(axis=1).astype(np.float64)
    return lists, targets


# -- weighted graphs --------------------------------------------------------------

@dataclass(frozen=True)
class WeightedGraph:
    """Undirected, connected graph with positive integer weights."""

    num_nodes: int
    edges: tuple[tuple[int, int, int], ...]
    source: int = 0

    def __post_init__(self) -> None:
        for u, v, w in self.edges:
            if w < 1:
                raise ValueError(f"edge ({u},{v}) has non-positive weight {w}")
            if not (0 <= u < self.num_nodes and 0 <= v < self.num_nodes) or u == v:
                raise ValueError(f"bad edge ({u},{v}) for {self.num_nodes} nodes")

    @property
    def max_weight(self) -> int:
        return max(w for _, _, w in self.edges)

    def adjacency(self) -> list[list[tuple[int, int]]]:
        """Per-node neighbour list [(neighbour, weight)], ascending by id."""
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.num_nodes)]
        for u, v, w in self.edges:
            adj[u].append((v, w))
            adj[v].append((u, w))
        for lst in adj:
            lst.sort()
        return adj


def random_graph(n: int, max_weight: int, rng: RngStream) -> WeightedGraph:
    """Random spanning tree plus independent extra edges (prob 1/(2n)).

    The tree is built by random attachment under a uniform relabeling;
    weights are uniform integers in [1, max_weight]; node 0 is the source.
    """
    if n < 2:
        raise ValueError(f"need at least 2 nodes, got {n}")
    if max_weight < 1:
        raise ValueError(f"need max_weight >= 1, got {max_weight}")
    perm = rng.permutation(n)
    present = set()
    for i in range(1, n):
        j = int(rng.integers(0, i))
        u, v = int(perm[i]), int(perm[j])
        present.add((min(u, v), max(u, v)))
    p_extra = 1.0 / (2.0 * n)
    for u in range(n):
        for v in range(u + 1, n):
            if (u, v) not in present and rng.random() < p_extra:
                present.add((u, v))
    edges = tuple(
        (u, v, int(rng.integers(1, max_weight + 1))) for u, v in sorted(present)
    )
    return WeightedGraph(num_nodes=n, edges=edges, source=0)


def unreached_distance(graph: WeightedGraph) -> float:
    """Finite stand-in for 'not yet reached': above any true path length."""
    return float(graph.num_nodes * graph.max_weight + 1)


def bellman_ford(graph: WeightedGraph) -> np.ndarray:
    """All n distance iterates, shape (n+1, num_nodes); row 0 is the start.

    Update: d'(v) = min(d(v), min over neighbours u of d(u) + w(u, v)).
    The final row equals the true shortest-path distances.
    """
    n = graph.num_nodes
    adj = graph.adjacency()
    init = unreached_distance(graph)
    d = np.full(n, init)
    d[graph.source] = 0.0
    iterates = [d.copy()]
    for _ in range(n):
        new = d.copy()
        for v in range(n):
            for u, w in adj[v]:
                cand = d[u] + w
                if cand < new[v]:
                    new[v] = cand
        d = new
        iterates.append(d.copy())
    return np.asarray(iterates)


def dijkstra(graph: WeightedGraph) -> np.ndarray:
    """Independent shortest-path oracle (binary heap)."""
    adj = graph.adjacency()
    dist = np.full(graph.num_nodes, np.inf)
    dist[graph.source] = 0.0
    heap = [(0.0, graph.source)]
    done = set()
    while heap:
        d, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        for u, w in adj[v]:
            cand = d + w
            if cand < dist[u]:
                dist[u] = cand
                heapq.heappush(heap, (cand, u))
    return dist


def save_graph(path, graph: WeightedGraph) -> None:
    """Edge-list text format: first line 'n source', then 'u v w' lines."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{graph.num_nodes} {graph.source}\n")
        for u, v, w in graph.edges:
            fh.write(f"{u} {v} {w}\n")


def load_graph(path) -> WeightedGraph:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.split() for line in fh if line.strip()]
    n, source = int(lines[0][0]), int(lines[0][1])
    edges = tuple((int(u), int(v), int(w)) for u, v, w in lines[1:])
    return WeightedGraph(num_nodes=n, edges=edges, source=source)


def export_dataset_csv(path, inputs: np.ndarray, targets: np.ndarray) -> None:
    """One row per example: inputs..., target."""
    inputs = np.asarray(inputs)
    targets = np.asarray(targets)
    with open(path, "w", encoding="utf-8") as fh:
        cols = [f"x{i + 1}" for i in range(inputs.shape[1])]
        fh.write(",".join(cols + ["target"]) + "\n")
        for row, t in zip(inputs, targets):
            fh.write(",".join(repr(float(v)) for v in row) + f",{repr(float(t))}\n")
