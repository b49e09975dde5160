"""Differentiable comparison layer and the recurrent cells built on it.

The layer selects two operands from its input vector by softmax-weighted
mixing, takes their difference, activates smooth sign/zero indicators of
the difference, and combines the indicator activations through learned
weights into a sigmoid gate. The gate output y (and its complement
1 - y) can drive downstream branches, increments, or state updates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .optim import Parameter
from .rng import RngStream
from .tape import Tape


def sign_bit_hat(x, lam: float = 1.0):
    """Smooth sign indicator tanh(lam * x): odd, in (-1, 1)."""
    return np.tanh(lam * np.asarray(x, dtype=np.float64))


def zero_bit_hat(x, lam: float = 1.0):
    """Smooth zero indicator 1 - 2*tanh(lam*x)^2: even, peaks at 1, bounded below by -1."""
    t = np.tanh(lam * np.asarray(x, dtype=np.float64))
    return 1.0 - 2.0 * t * t


@dataclass
class NSRParams:
    """All learnables of one comparison unit plus its fixed sharpness.

    v1, v2 hold (r, n) selection logits (one row per redundant unit),
    wplus/wzero/bias hold the per-unit combination weights. `lam` scales
    the difference before the indicator activations and is never trained.
    """

    v1: Parameter
    v2: Parameter
    wplus: Parameter
    wzero: Parameter
    bias: Parameter
    lam: float = 1.0

    def __post_init__(self) -> None:
        if self.lam <= 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        r, n = self.v1.value.shape
        if r < 1 or n < 1:
            raise ValueError(f"need r >= 1 and n >= 1, got shape {(r, n)}")
        if self.v2.value.shape != (r, n):
            raise ValueError("v1 and v2 must have the same shape")
        for p in (self.wplus, self.wzero, self.bias):
            if p.value.shape != (r,):
                raise ValueError(f"{p.name} must have shape ({r},)")
        for p in self.parameters():
            if not np.all(np.isfinite(p.value)):
                raise ValueError(f"non-finite entries in {p.name}")

    @property
    def n(self) -> int:
        return self.v1.value.shape[1]

    @property
    def r(self) -> int:
        return self.v1.value.shape[0]

    def parameters(self) -> list[Parameter]:
        return [self.v1, self.v2, self.wplus, self.wzero, self.bias]

    def count_learnables(self) -> int:
        return sum(p.size for p in self.parameters())


def init_params(n: int, r: int, lam: float, rng: RngStream, prefix: str = "nsr") -> NSRParams:
    """Fresh unit with all learnables drawn i.i.d. standard normal."""
    if n < 1 or r < 1:
        raise ValueError(f"need n >= 1 and r >= 1, got n={n}, r={r}")
    return NSRParams(
        v1=Parameter(f"{prefix}.v1", rng.normal((r, n))),
        v2=Parameter(f"{prefix}.v2", rng.normal((r, n))),
        wplus=Parameter(f"{prefix}.wplus", rng.normal(r)),
        wzero=Parameter(f"{prefix}.wzero", rng.normal(r)),
        bias=Parameter(f"{prefix}.bias", rng.normal(r)),
        lam=lam,
    )


@dataclass
class NSRTrace:
    """Node references for one forward pass (single input vector)."""

    tape: Tape
    o1: int
    o2: int
    d: int
    bplus: int
    bzero: int
    z: int
    y: int
    ybar: int

    def value(self, node: int) -> np.ndarray:
        return self.tape.values[node]


@dataclass
class NSRBatchTrace:
    """Node references for a batched forward pass (rows of inputs)."""

    tape: Tape
    o1: int
    o2: int
    d: int
    bplus: int
    bzero: int
    z: int
    y: int
    ybar: int

    def value(self, node: int) -> np.ndarray:
        return self.tape.values[node]


def _bits(tape: Tape, d: int, lam: float) -> tuple[int, int]:
    scaled = tape.mul(d, tape.leaf(lam))
    bplus = tape.tanh(scaled)
    bzero = tape.sub(tape.leaf(1.0), tape.mul(tape.leaf(2.0), tape.mul(bplus, bplus)))
    return bplus, bzero


def nsr_forward(tape: Tape, x: int, params: NSRParams) -> NSRTrace:
    """Forward pass for a single length-n input node."""
    if tape.values[x].shape != (params.n,):
        raise ValueError(f"expected input of shape ({params.n},), got {tape.values[x].shape}")
    s1 = tape.softmax(tape.param(params.v1), axis=1)
    s2 = tape.softmax(tape.param(params.v2), axis=1)
    o1 = tape.matvec(s1, x)
    o2 = tape.matvec(s2, x)
    d = tape.sub(o1, o2)
    bplus, bzero = _bits(tape, d, params.lam)
    z = tape.add(
        tape.add(
            tape.sum(tape.mul(tape.param(params.wplus), bplus)),
            tape.sum(tape.mul(tape.param(params.wzero), bzero)),
        ),
        tape.sum(tape.param(params.bias)),
    )
    y = tape.sigmoid(z)
    ybar = tape.sub(tape.leaf(1.0), y)
    return NSRTrace(tape, o1, o2, d, bplus, bzero, z, y, ybar)


def nsr_forward_batch(tape: Tape, x: int, params: NSRParams) -> NSRBatchTrace:
    """Forward pass for an (N, n) batch node; y and ybar are (N,) nodes."""
    shape = tape.values[x].shape
    if len(shape) != 2 or shape[1] != params.n:
        raise ValueError(f"expected input of shape (N, {params.n}), got {shape}")
    s1 = tape.softmax(tape.param(params.v1), axis=1)
    s2 = tape.softmax(tape.param(params.v2), axis=1)
    o1 = tape.matmul(x, tape.transpose(s1))
    o2 = tape.matmul(x, tape.transpose(s2))
    d = tape.sub(o1, o2)
    bplus, bzero = _bits(tape, d, params.lam)
    z = tape.add(
        tape.add(
            tape.matmul(bplus, tape.param(params.wplus)),
            tape.matmul(bzero, tape.param(params.wzero)),
        ),
        tape.sum(tape.param(params.bias)),
    )
    y = tape.sigmoid(z)
    ybar = tape.sub(tape.leaf(1.0), y)
    return NSRBatchTrace(tape, o1, o2, d, bplus, bzero, z, y, ybar)


def nsr_predict(params: NSRParams, inputs: np.ndarray) -> np.ndarray:
    """Gate values for an (N, n) array of inputs."""
    tape = Tape()
    trace = nsr_forward_batch(tape, tape.leaf(inputs), params)
    return tape.values[trace.y]


def nsr_gradients(trace: NSRTrace, params: NSRParams) -> dict[str, np.ndarray]:
    """Gradients of the gate output for every learnable, via the tape.

    Leaves parameter `.grad` accumulators untouched; the closed-form
    identities these must satisfy are asserted in the test suite.
    """
    from .tape import backward  # local import keeps module load order simple

    saved = [p.grad for p in params.parameters()]
    for p in params.parameters():
        p.zero_grad()
    grads = backward(trace.tape, trace.y)
    for p, g in zip(params.parameters(), saved):
        p.grad = g
    return grads


# -- hand-set gate weights ---------------------------------------------------

# Logit offset large enough that the softmax rows underflow to exact one-hot
# selections in 64-bit floats.
SELECT_LOGIT = 1000.0

# Gain that pushes every |z| on integer inputs past the point where the
# sigmoid rounds to exactly 0.0 or 1.0, making the gate a hard switch.
EXACT_GATE_GAIN = 50.0

# (wplus, wzero, bias) per comparison, valid for the smooth indicators at
# lam * gap = 1 on integer-gap inputs. Strict orderings and their
# complements are carried by the sign indicator with the bias choosing
# which side of zero ties fall on; (in)equality is carried by the zero
# indicator alone. Mixing both indicators for one comparison fails once
# the zero indicator saturates toward -1, so no row does.
_GATE_ROWS = {
    "gt": (100.0, 0.0, -50.0),
    "le": (-100.0, 0.0, 50.0),
    "lt": (-100.0, 0.0, -50.0),
    "ge": (100.0, 0.0, 50.0),
    "eq": (0.0, 100.0, -50.0),
    "ne": (0.0, -100.0, 50.0),
}


def hand_weights(op, lam: float = 1.0, gain: float = 1.0) -> NSRParams:
    """A single-unit gate computing `op` over 2-vector inputs (x1, x2).

    `gain` scales the combination weights; use EXACT_GATE_GAIN for a
    gate whose outputs are exactly 0.0 / 1.0 on unit-gap inputs.
    """
    key = op.value if hasattr(op, "value") else str(op)
    if key not in _GATE_ROWS:
        raise KeyError(f"no hand weights for comparison '{op}'")
    wp, w0, b = (gain * w for w in _GATE_ROWS[key])
    return NSRParams(
        v1=Parameter("gate.v1", [[SELECT_LOGIT, 0.0]]),
        v2=Parameter("gate.v2", [[0.0, SELECT_LOGIT]]),
        wplus=Parameter("gate.wplus", [wp]),
        wzero=Parameter("gate.wzero", [w0]),
        bias=Parameter("gate.bias", [b]),
        lam=lam,
    )


# -- recurrent cells ----------------------------------------------------------

def min_cell_step(tape: Tape, state: int, x: int, cell: NSRParams) -> int:
    """One running-minimum update: y * state + (1 - y) * x.

    `state` and `x` are equal-length 1-D nodes (a batch of sequences
    advances in lockstep); the gate sees the pair (state, x).
    """
    trace = nsr_forward_batch(tape, tape.stack_cols([state, x]), cell)
    return tape.add(tape.mul(trace.y, state), tape.mul(trace.ybar, x))


def count_cell_step(tape: Tape, counter: int, reference: int, x: int, cell: NSRParams) -> int:
    """One conditional-increment update: counter + y(reference, x)."""
    trace = nsr_forward_batch(tape, tape.stack_cols([reference, x]), cell)
    return tape.add(counter, trace.y)


def run_min_cell(cell: NSRParams, sequences: np.ndarray) -> np.ndarray:
    """Final minimum estimates for an (N, L) batch; state starts at column 0."""
    sequences = np.asarray(sequences, dtype=np.float64)
    tape = Tape()
    state = tape.leaf(sequences[:, 0])
    for i in range(1, sequences.shape[1]):
        state = min_cell_step(tape, state, tape.leaf(sequences[:, i]), cell)
    return tape.values[state]


def run_count_cell(cell: NSRParams, sequences: np.ndarray) -> np.ndarray:
    """Counts of column-0 matches over columns 1.. for an (N, L) batch."""
    sequences = np.asarray(sequences, dtype=np.float64)
    tape = Tape()
    reference = tape.leaf(sequences[:, 0])
    counter = tape.leaf(np.zeros(sequences.shape[0]))
    for i in range(1, sequences.shape[1]):
        counter = count_cell_step(tape, counter, reference, tape.leaf(sequences[:, i]), cell)
    return tape.values[counter]
