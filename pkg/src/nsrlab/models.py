"""Trainable model wrappers: a uniform forward/predict surface for the
comparison layer, the MLP baseline, gated piecewise regressors, and the
recurrent sequence models."""

from __future__ import annotations

import numpy as np

from .baselines import (
    HIDDEN_DIM,
    MLPParams,
    init_mlp,
    mlp_forward_batch,
    rnn_count_step,
    rnn_min_step,
)
from .nsr import NSRParams, count_cell_step, init_params, min_cell_step, nsr_forward_batch
from .optim import Parameter
from .rng import RngStream
from .tape import Tape


class _Model:
    name: str

    def parameters(self) -> list[Parameter]:
        raise NotImplementedError

    def forward(self, tape: Tape, inputs: np.ndarray) -> int:
        raise NotImplementedError

    def predict(self, inputs: np.ndarray) -> np.ndarray:
        tape = Tape()
        return tape.values[self.forward(tape, np.asarray(inputs, dtype=np.float64))]


class ComparisonNSR(_Model):
    name = "nsr"

    def __init__(self, params: NSRParams):
        self.params = params

    @classmethod
    def fresh(cls, n: int, r: int, lam: float, rng: RngStream) -> "ComparisonNSR":
        return cls(init_params(n, r, lam, rng))

    def parameters(self) -> list[Parameter]:
        return self.params.parameters()

    def forward(self, tape: Tape, inputs: np.ndarray) -> int:
        return nsr_forward_batch(tape, tape.leaf(inputs), self.params).y


class ComparisonMLP(_Model):
    name = "mlp"

    def __init__(self, params: MLPParams):
        self.params = params

    @classmethod
    def fresh(cls, n: int, rng: RngStream, hidden: int = HIDDEN_DIM) -> "ComparisonMLP":
        return cls(init_mlp(n, rng, hidden=hidden))

    def parameters(self) -> list[Parameter]:
        return self.params.parameters()

    def forward(self, tape: Tape, inputs: np.ndarray) -> int:
        return mlp_forward_batch(tape, tape.leaf(inputs), self.params)


class GatedPiecewise(_Model):
    """Gate output selects between two learned affine branches:
    y * (a1 . x + c1) + (1 - y) * (a2 . x + c2).

    Branch weights are pure addition/subtraction units: they are clipped
    to [-1, 1] after every optimizer step, so a weight pushed against the
    boundary parks at exactly +-1.0 and the branch extrapolates exactly.
    Branch intercepts stay unconstrained.
    """

    name = "nsr"

    def __init__(self, gate: NSRParams, a1: Parameter, c1: Parameter, a2: Parameter, c2: Parameter):
        self.gate = gate
        self.a1, self.c1, self.a2, self.c2 = a1, c1, a2, c2

    @classmethod
    def fresh(cls, n_inputs: int, r: int, lam: float, rng: RngStream) -> "GatedPiecewise":
        gate = init_params(n_inputs, r, lam, rng.split("gate"), prefix="gate")
        branch_rng = rng.split("branches")
        return cls(
            gate,
            a1=Parameter("branch1.a", branch_rng.normal(n_inputs)),
            c1=Parameter("branch1.c", branch_rng.normal()),
            a2=Parameter("branch2.a", branch_rng.normal(n_inputs)),
            c2=Parameter("branch2.c", branch_rng.normal()),
        )

    def parameters(self) -> list[Parameter]:
        return self.gate.parameters() + [self.a1, self.c1, self.a2, self.c2]

    def project(self) -> None:
        np.clip(self.a1.value, -1.0, 1.0, out=self.a1.value)
        np.clip(self.a2.value, -1.0, 1.0, out=self.a2.value)

    def forward(self, tape: Tape, inputs: np.ndarray) -> int:
        x = tape.leaf(inputs)
        trace = nsr_forward_batch(tape, x, self.gate)
        branch1 = tape.add(tape.matmul(x, tape.param(self.a1)), tape.param(self.c1))
        branch2 = tape.add(tape.matmul(x, tape.param(self.a2)), tape.param(self.c2))
        return tape.add(tape.mul(trace.y, branch1), tape.mul(trace.ybar, branch2))


class PiecewiseMLP(_Model):
    """MLP regression baseline: sigmoid hidden layer, linear output."""

    name = "mlp"

    def __init__(self, params: MLPParams):
        if not params.linear_output:
            raise ValueError("piecewise baseline needs a linear output head")
        self.params = params

    @classmethod
    def fresh(cls, n_inputs: int, rng: RngStream, hidden: int = HIDDEN_DIM) -> "PiecewiseMLP":
        return cls(init_mlp(n_inputs, rng, hidden=hidden, linear_output=True))

    def parameters(self) -> list[Parameter]:
        return self.params.parameters()

    def forward(self, tape: Tape, inputs: np.ndarray) -> int:
        return mlp_forward_batch(tape, tape.leaf(inputs), self.params)


class RecurrentMinNSR(_Model):
    name = "nsr"

    def __init__(self, cell: NSRParams):
        self.cell = cell

    @classmethod
    def fresh(cls, r: int, lam: float, rng: RngStream) -> "RecurrentMinNSR":
        return cls(init_params(2, r, lam, rng, prefix="cell"))

    def parameters(self) -> list[Parameter]:
        return self.cell.parameters()

    def forward(self, tape: Tape, sequences: np.ndarray) -> int:
        state = tape.leaf(sequences[:, 0])
        for i in range(1, sequences.shape[1]):
            state = min_cell_step(tape, state, tape.leaf(sequences[:, i]), self.cell)
        return state


class RecurrentMinMLP(_Model):
    name = "mlp"

    def __init__(self, gate: MLPParams):
        self.gate = gate

    @classmethod
    def fresh(cls, rng: RngStream, hidden: int = HIDDEN_DIM) -> "RecurrentMinMLP":
        return cls(init_mlp(2, rng, hidden=hidden))

    def parameters(self) -> list[Parameter]:
        return self.gate.parameters()

    def forward(self, tape: Tape, sequences: np.ndarray) -> int:
        state = tape.leaf(sequences[:, 0])
        for i in range(1, sequences.shape[1]):
            state = rnn_min_step(tape, state, tape.leaf(sequences[:, i]), self.gate)
        return state


class RecurrentCountNSR(_Model):
    name = "nsr"

    def __init__(self, cell: NSRParams):
        self.cell = cell

    @classmethod
    def fresh(cls, r: int, lam: float, rng: RngStream) -> "RecurrentCountNSR":
        return cls(init_params(2, r, lam, rng, prefix="cell"))

    def parameters(self) -> list[Parameter]:
        return self.cell.parameters()

    def forward(self, tape: Tape, sequences: np.ndarray) -> int:
        reference = tape.leaf(sequences[:, 0])
        counter = tape.leaf(np.zeros(sequences.shape[0]))
        for i in range(1, sequences.shape[1]):
            counter = count_cell_step(tape, counter, reference, tape.leaf(sequences[:, i]), self.cell)
        return counter


class RecurrentCountMLP(_Model):
    name = "mlp"

    def __init__(self, gate: MLPParams):
        self.gate = gate

    @classmethod
    def fresh(cls, rng: RngStream, hidden: int = HIDDEN_DIM) -> "RecurrentCountMLP":
        return cls(init_mlp(2, rng, hidden=hidden))

    def parameters(self) -> list[Parameter]:
        return self.gate.parameters()

    def forward(self, tape: Tape, sequences: np.ndarray) -> int:
        reference = tape.leaf(sequences[:, 0])
        counter = tape.leaf(np.zeros(sequences.shape[0]))
        for i in range(1, sequences.shape[1]):
            counter = rnn_count_step(tape, counter, reference, tape.leaf(sequences[:, i]), self.gate)
        return counter


def gated_piecewise_model(n_inputs: int, r: int, lam: float, rng: RngStream) -> GatedPiecewise:
    """Fresh gate-plus-affine-branches model over `n_inputs` inputs."""
    if n_inputs not in (2, 5):
        raise ValueError(f"piecewise targets use 2 or 5 inputs, got {n_inputs}")
    return GatedPiecewise.fresh(n_inputs, r, lam, rng)
