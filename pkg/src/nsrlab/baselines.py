"""Feedforward baseline: a one-hidden-layer MLP and its recurrent wiring.

The recurrent variants reuse the exact state update of the comparison
cells, swapping only the gate, so any performance gap is attributable to
the comparison unit alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .optim import Parameter
from .rng import RngStream
from .tape import Tape

HIDDEN_DIM = 20


@dataclass
class MLPParams:
    """Sigmoid-hidden MLP with a single output neuron.

    The output is passed through a sigmoid for classification gates and
    left linear for regression heads.
    """

    w_in: Parameter
    b_hidden: Parameter
    w_out: Parameter
    b_out: Parameter
    linear_output: bool = False

    @property
    def n(self) -> int:
        return self.w_in.value.shape[1]

    @property
    def hidden(self) -> int:
        return self.w_in.value.shape[0]

    def parameters(self) -> list[Parameter]:
        return [self.w_in, self.b_hidden, self.w_out, self.b_out]

    def count_learnables(self) -> int:
        return sum(p.size for p in self.parameters())


def init_mlp(
    n: int,
    rng: RngStream,
    hidden: int = HIDDEN_DIM,
    linear_output: bool = False,
    prefix: str = "mlp",
) -> MLPParams:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) init for weights and biases."""
    bound_in = 1.0 / np.sqrt(n)
    bound_out = 1.0 / np.sqrt(hidden)
    return MLPParams(
        w_in=Parameter(f"{prefix}.w_in", rng.uniform(-bound_in, bound_in, (hidden, n))),
        b_hidden=Parameter(f"{prefix}.b_hidden", rng.uniform(-bound_in, bound_in, hidden)),
        w_out=Parameter(f"{prefix}.w_out", rng.uniform(-bound_out, bound_out, hidden)),
        b_out=Parameter(f"{prefix}.b_out", rng.uniform(-bound_out, bound_out)),
        linear_output=linear_output,
    )


def mlp_forward(tape: Tape, x: int, params: MLPParams) -> int:
    """Scalar output node for a single length-n input node."""
    if tape.values[x].shape != (params.n,):
        raise ValueError(f"expected input of shape ({params.n},), got {tape.values[x].shape}")
    h = tape.sigmoid(tape.add(tape.matvec(tape.param(params.w_in), x), tape.param(params.b_hidden)))
    z = tape.add(tape.sum(tape.mul(tape.param(params.w_out), h)), tape.param(params.b_out))
    return z if params.linear_output else tape.sigmoid(z)


def mlp_forward_batch(tape: Tape, x: int, params: MLPParams) -> int:
    """(N,) output node for an (N, n) batch node."""
    shape = tape.values[x].shape
    if len(shape) != 2 or shape[1] != params.n:
        raise ValueError(f"expected input of shape (N, {params.n}), got {shape}")
    pre = tape.add(tape.matmul(x, tape.transpose(tape.param(params.w_in))), tape.param(params.b_hidden))
    h = tape.sigmoid(pre)
    z = tape.add(tape.matmul(h, tape.param(params.w_out)), tape.param(params.b_out))
    return z if params.linear_output else tape.sigmoid(z)


def mlp_predict(params: MLPParams, inputs: np.ndarray) -> np.ndarray:
    tape = Tape()
    return tape.values[mlp_forward_batch(tape, tape.leaf(inputs), params)]


# Hand-set weights solving each comparison with two hidden units. The
# hidden pre-activations are +-100 * (x1 - x2) shifted by -50, so each
# hidden unit is a saturated one-sided threshold on the difference; the
# output layer combines the thresholds.
_MLP_ROWS = {
    # op: (w_in rows), (b_hidden), (w_out), b_out
    "gt": ([[100.0, -100.0], [0.0, 0.0]], [-50.0, -50.0], [100.0, 0.0], -50.0),
    "le": ([[100.0, -100.0], [0.0, 0.0]], [-50.0, -50.0], [-100.0, 0.0], 50.0),
    "lt": ([[-100.0, 100.0], [0.0, 0.0]], [-50.0, -50.0], [100.0, 0.0], -50.0),
    "ge": ([[-100.0, 100.0], [0.0, 0.0]], [-50.0, -50.0], [-100.0, 0.0], 50.0),
    "eq": ([[100.0, -100.0], [-100.0, 100.0]], [-50.0, -50.0], [-100.0, -100.0], 50.0),
    "ne": ([[100.0, -100.0], [-100.0, 100.0]], [-50.0, -50.0], [100.0, 100.0], -50.0),
}


def mlp_hand_weights(op) -> MLPParams:
    """A two-hidden-unit MLP computing `op` over (x1, x2) integer pairs."""
    key = op.value if hasattr(op, "value") else str(op)
    if key not in _MLP_ROWS:
        raise KeyError(f"no hand weights for comparison '{op}'")
    w_in, b_h, w_out, b_out = _MLP_ROWS[key]
    return MLPParams(
        w_in=Parameter("gate.w_in", w_in),
        b_hidden=Parameter("gate.b_hidden", b_h),
        w_out=Parameter("gate.w_out", w_out),
        b_out=Parameter("gate.b_out", b_out),
    )


# -- recurrent wiring (gate swapped, update identical to the cells) -----------

def rnn_min_step(tape: Tape, state: int, x: int, gate: MLPParams) -> int:
    y = mlp_forward_batch(tape, tape.stack_cols([state, x]), gate)
    ybar = tape.sub(tape.leaf(1.0), y)
    return tape.add(tape.mul(y, state), tape.mul(ybar, x))


def rnn_count_step(tape: Tape, counter: int, reference: int, x: int, gate: MLPParams) -> int:
    y = mlp_forward_batch(tape, tape.stack_cols([reference, x]), gate)
    return tape.add(counter, y)


def run_rnn_min(gate: MLPParams, sequences: np.ndarray) -> np.ndarray:
    sequences = np.asarray(sequences, dtype=np.float64)
    tape = Tape()
    state = tape.leaf(sequences[:, 0])
    for i in range(1, sequences.shape[1]):
        state = rnn_min_step(tape, state, tape.leaf(sequences[:, i]), gate)
    return tape.values[state]


def run_rnn_count(gate: MLPParams, sequences: np.ndarray) -> np.ndarray:
    sequences = np.asarray(sequences, dtype=np.float64)
    tape = Tape()
    reference = tape.leaf(sequences[:, 0])
    counter = tape.leaf(np.zeros(sequences.shape[0]))
    for i in range(1, sequences.shape[1]):
        counter = rnn_count_step(tape, counter, reference, tape.leaf(sequences[:, i]), gate)
    return tape.values[counter]
