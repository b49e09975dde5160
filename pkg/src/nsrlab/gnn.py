"""Message-passing shortest-path learner.

Each node's new distance estimate is a recurrent-minimum fold over its
message list: its own distance first, then each neighbour's distance
plus the connecting edge weight, neighbours in ascending node id. One
shared comparison cell performs every fold step (weight tying), trained
by teacher forcing on exact distance-update iterates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nsr import EXACT_GATE_GAIN, NSRParams, hand_weights, init_params, min_cell_step
from .rng import RngStream
from .tape import Tape
from .tasks import WeightedGraph, bellman_ford, unreached_distance
from .training import TrainConfig, TrainLog, fit


@dataclass
class GNNModel:
    """A single shared min-fold cell applied at every node and iteration."""

    cell: NSRParams

    def parameters(self):
        return self.cell.parameters()


def fresh_model(r: int, lam: float, rng: RngStream) -> GNNModel:
    return GNNModel(cell=init_params(2, r, lam, rng, prefix="cell"))


def perfect_min_model(lam: float = 1.0) -> GNNModel:
    """Hard keep-the-smaller gate; folds compute exact minima."""
    return GNNModel(cell=hand_weights("lt", lam=lam, gain=EXACT_GATE_GAIN))


@dataclass(frozen=True)
class _Schedule:
    """Nodes grouped by message-list length for batched folding."""

    groups: tuple[tuple[np.ndarray, np.ndarray, np.ndarray], ...]  # ids, nbr ids, weights
    inverse: np.ndarray  # position of each node in the concatenated group output


def build_schedule(graph: WeightedGraph, order_rng: RngStream | None = None) -> _Schedule:
    """Group nodes by degree; fold order is own distance first, then
    neighbours ascending by id, unless `order_rng` shuffles each node's
    neighbour list (the fold is order-sensitive for imperfect gates)."""
    adj = graph.adjacency()
    if order_rng is not None:
        adj = [
            [lst[j] for j in order_rng.split(f"order/{v}").permutation(len(lst))]
            for v, lst in enumerate(adj)
        ]
    by_len: dict[int, list[int]] = {}
    for v in range(graph.num_nodes):
        by_len.setdefault(len(adj[v]) + 1, []).append(v)
    groups = []
    order: list[int] = []
    for length in sorted(by_len):
        ids = np.asarray(by_len[length], dtype=np.intp)
        nbrs = np.asarray([[u for u, _ in adj[v]] for v in ids], dtype=np.intp)
        weights = np.asarray([[w for _, w in adj[v]] for v in ids], dtype=np.float64)
        groups.append((ids, nbrs, weights))
        order.extend(by_len[length])
    inverse = np.argsort(np.asarray(order, dtype=np.intp))
    return _Schedule(groups=tuple(groups), inverse=inverse)


def gnn_step(tape: Tape, graph: WeightedGraph, state: int, model: GNNModel, schedule: _Schedule | None = None) -> int:
    """One synchronous update of all node distances (state is an (n,) node)."""
    sched = schedule if schedule is not None else build_schedule(graph)
    results = []
    for ids, nbrs, weights in sched.groups:
        acc = tape.gather(state, ids)
        for k in range(nbrs.shape[1]):
            message = tape.add(tape.gather(state, nbrs[:, k]), tape.leaf(weights[:, k]))
            acc = min_cell_step(tape, acc, message, model.cell)
        results.append(acc)
    return tape.gather(tape.concat(results), sched.inverse)


def initial_state(graph: WeightedGraph) -> np.ndarray:
    state = np.full(graph.num_nodes, unreached_distance(graph))
    state[graph.source] = 0.0
    return state


def rollout(
    graph: WeightedGraph,
    model: GNNModel,
    iterations: int | None = None,
    order_rng: RngStream | None = None,
) -> np.ndarray:
    """Free-running distances after `iterations` steps (default: n)."""
    steps = graph.num_nodes if iterations is None else iterations
    schedule = build_schedule(graph, order_rng)
    tape = Tape()
    state = tape.leaf(initial_state(graph))
    for _ in range(steps):
        state = gnn_step(tape, graph, state, model, schedule)
    return tape.values[state]


def eval_rollout(
    graph: WeightedGraph,
    model: GNNModel,
    iterations: int | None = None,
    max_weight: int | None = None,
    order_rng: RngStream | None = None,
) -> float:
    """Mean absolute distance error, normalized by the maximum edge weight."""
    predicted = rollout(graph, model, iterations, order_rng)
    truth = bellman_ford(graph)[-1]
    normalizer = float(max_weight if max_weight is not None else graph.max_weight)
    return float(np.abs(predicted - truth).mean() / normalizer)


def teacher_forcing_batch(graphs: list[WeightedGraph]) -> list[tuple[np.ndarray, np.ndarray]]:
    """Flatten all (graph, iteration, node) updates into constant message
    lists grouped by length.

    Teacher forcing makes every update independent: inputs are exact
    previous-iterate distances, targets the exact next iterate, so the
    whole corpus trains as one batch of min-fold problems.
    """
    buckets: dict[int, tuple[list[list[float]], list[float]]] = {}
    for graph in graphs:
        adj = graph.adjacency()
        iterates = bellman_ford(graph)
        for t in range(graph.num_nodes):
            prev, nxt = iterates[t], iterates[t + 1]
            for v in range(graph.num_nodes):
                messages = [prev[v]] + [prev[u] + w for u, w in adj[v]]
                rows, targets = buckets.setdefault(len(messages), ([], []))
                rows.append(messages)
                targets.append(nxt[v])
    return [
        (np.asarray(rows, dtype=np.float64), np.asarray(targets, dtype=np.float64))
        for _, (rows, targets) in sorted(buckets.items())
    ]


def train_teacher_forced(graphs: list[WeightedGraph], model: GNNModel, config: TrainConfig) -> TrainLog:
    """Fit the shared cell to exact distance updates on all graphs."""
    groups = teacher_forcing_batch(graphs)
    total = sum(len(targets) for _, targets in groups)

    def loss_builder(tape: Tape) -> int:
        error_sum = None
        for messages, targets in groups:
            acc = tape.leaf(messages[:, 0])
            for k in range(1, messages.shape[1]):
                acc = min_cell_step(tape, acc, tape.leaf(messages[:, k]), model.cell)
            group_sum = tape.sum(tape.abs(tape.sub(acc, tape.leaf(targets))))
            error_sum = group_sum if error_sum is None else tape.add(error_sum, group_sum)
        return tape.mul(error_sum, tape.leaf(1.0 / total))

    return fit(loss_builder, model.parameters(), config)
