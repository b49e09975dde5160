"""Comparison layer: bit activations, forward pass, gradient identities,
hand-set gates, and the recurrent cells."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsrlab.nsr import (
    EXACT_GATE_GAIN,
    NSRParams,
    hand_weights,
    init_params,
    min_cell_step,
    count_cell_step,
    nsr_forward,
    nsr_forward_batch,
    nsr_predict,
    run_count_cell,
    run_min_cell,
    sign_bit_hat,
    zero_bit_hat,
)
from nsrlab.optim import Parameter, finite_diff_check
from nsrlab.rng import RngStream
from nsrlab.tape import Tape, backward
from nsrlab.tasks import ComparisonOp

# frozen from 50-digit evaluations
TANH_1 = 0.7615941559557649
TANH_15 = 0.9051482536448664
ZERO_BIT_1 = -0.16005131677194787
Z_GT_3_1 = 46.40275800758169


def integer_pairs(lo=-20, hi=20):
    grid = np.arange(lo, hi + 1)
    a, b = np.meshgrid(grid, grid, indexing="ij")
    return np.stack([a.ravel(), b.ravel()], axis=1).astype(np.float64)


# -- bit relaxations ----------------------------------------------------------

@pytest.mark.parametrize("lam", [0.1, 1.0, 7.3])
def test_sign_bit_zero_input(lam):
    assert sign_bit_hat(0.0, lam) == 0.0


def test_sign_bit_oracle_values():
    assert sign_bit_hat(1.0, 1.0) == TANH_1
    assert np.isclose(sign_bit_hat(0.5, 3.0), TANH_15, rtol=1e-15)


@pytest.mark.parametrize("lam", [0.5, 1.0, 4.0])
def test_zero_bit_peak_at_zero(lam):
    assert zero_bit_hat(0.0, lam) == 1.0


def test_zero_bit_oracle_value():
    assert np.isclose(zero_bit_hat(1.0, 1.0), ZERO_BIT_1, rtol=1e-15)


@given(st.floats(-50, 50, allow_nan=False), st.floats(0.01, 20))
@settings(max_examples=100, deadline=None)
def test_bit_symmetries(x, lam):
    assert zero_bit_hat(x, lam) == zero_bit_hat(-x, lam)
    assert sign_bit_hat(-x, lam) == -sign_bit_hat(x, lam)
    # open bounds mathematically; saturated floats round onto the bound
    assert -1.0 <= sign_bit_hat(x, lam) <= 1.0
    assert -1.0 <= zero_bit_hat(x, lam) <= 1.0


def test_zero_bit_even_at_three():
    assert zero_bit_hat(-3.0, 1.0) == zero_bit_hat(3.0, 1.0)


# -- forward pass --------------------------------------------------------------

def run_forward(params, x):
    tape = Tape()
    return tape, nsr_forward(tape, tape.leaf(np.asarray(x, dtype=np.float64)), params)


def test_forward_gt_weights_large_margin():
    tape, trace = run_forward(hand_weights("gt"), [3.0, 1.0])
    assert np.isclose(float(trace.value(trace.z)), Z_GT_3_1, rtol=1e-14)
    assert float(trace.value(trace.y)) > 0.999


def test_forward_gt_weights_equal_inputs():
    tape, trace = run_forward(hand_weights("gt"), [2.0, 2.0])
    assert float(trace.value(trace.z)) == -50.0
    assert float(trace.value(trace.y)) < 1e-20


def test_forward_eq_weights_equal_inputs():
    tape, trace = run_forward(hand_weights("eq"), [4.0, 4.0])
    assert float(trace.value(trace.z)) == 50.0
    assert float(trace.value(trace.y)) == pytest.approx(1.0, abs=1e-15)


def test_ybar_is_exact_complement():
    rng = RngStream(3)
    params = init_params(4, 5, 2.0, rng)
    tape, trace = run_forward(params, rng.normal(4))
    y = float(trace.value(trace.y))
    assert float(trace.value(trace.ybar)) == 1.0 - y


def test_forward_rejects_wrong_length():
    params = hand_weights("gt")
    with pytest.raises(ValueError):
        run_forward(params, [1.0, 2.0, 3.0])


def test_batch_forward_matches_single():
    rng = RngStream(11)
    params = init_params(3, 6, 0.7, rng)
    X = rng.normal((8, 3)) * 4
    tape = Tape()
    batch_y = tape.values[nsr_forward_batch(tape, tape.leaf(X), params).y]
    singles = [float(run_forward(params, row)[1].value(run_forward(params, row)[1].y)) for row in X]
    assert np.allclose(batch_y, singles, atol=1e-14)


def test_softmax_row_shift_leaves_forward_unchanged():
    rng = RngStream(21)
    params = init_params(3, 4, 1.0, rng)
    x = rng.normal(3) * 2
    _, before = run_forward(params, x)
    y0 = float(before.value(before.y))
    params.v1.value = params.v1.value.copy()
    params.v1.value[2, :] += 17.5  # constant shift of one row's logits
    _, after = run_forward(params, x)
    assert np.isclose(float(after.value(after.y)), y0, atol=1e-9)


# -- gradient identities --------------------------------------------------------

def combination_grads(wp, w0, b, o1v, o2v, lam=1.0):
    """Backward through the combination stage with the operands as leaves."""
    o1 = Parameter("o1", o1v)
    o2 = Parameter("o2", o2v)
    pwp = Parameter("wp", wp)
    pw0 = Parameter("w0", w0)
    pb = Parameter("b", b)
    tape = Tape()
    d = tape.sub(tape.param(o1), tape.param(o2))
    scaled = tape.mul(d, tape.leaf(lam))
    bplus = tape.tanh(scaled)
    bzero = tape.sub(tape.leaf(1.0), tape.mul(tape.leaf(2.0), tape.mul(bplus, bplus)))
    z = tape.add(
        tape.add(tape.sum(tape.mul(tape.param(pwp), bplus)), tape.sum(tape.mul(tape.param(pw0), bzero))),
        tape.sum(tape.param(pb)),
    )
    y = tape.sigmoid(z)
    for p in (o1, o2, pwp, pw0, pb):
        p.zero_grad()
    grads = backward(tape, y)
    yv = float(tape.values[y])
    bp = tape.values[bplus]
    bz = tape.values[bzero]
    return grads, yv, bp, bz


def test_closed_form_gradients():
    rng = RngStream(9)
    r = 5
    wp, w0, b = rng.normal(r), rng.normal(r), rng.normal(r)
    o1v, o2v = rng.normal(r) * 2, rng.normal(r) * 2
    lam = 1.3
    grads, y, bp, bz = combination_grads(wp, w0, b, o1v, o2v, lam)
    s = y * (1 - y)
    assert np.allclose(grads["b"], np.full(r, s), rtol=1e-12)
    assert np.allclose(grads["wp"], s * bp, rtol=1e-12)
    assert np.allclose(grads["w0"], s * bz, rtol=1e-12)
    # d/do1 = y(1-y) (B+' W+ + B0' W0), with B+' = lam (1 - B+^2) and
    # B0' = -4 lam B+ (1 - B+^2); d/do2 is its negation
    bp_prime = lam * (1 - bp**2)
    bz_prime = -4.0 * lam * bp * (1 - bp**2)
    expected_o1 = s * (bp_prime * wp + bz_prime * w0)
    assert np.allclose(grads["o1"], expected_o1, rtol=1e-10)
    assert np.allclose(grads["o2"], -grads["o1"], rtol=0, atol=0)


def test_gradient_at_zero_difference():
    # at d = 0 the zero bit is flat and the sign bit has slope lam
    lam = 2.5
    wp, w0, b = np.array([1.7]), np.array([-0.9]), np.array([0.3])
    grads, y, _, _ = combination_grads(wp, w0, b, np.array([4.0]), np.array([4.0]), lam)
    assert np.allclose(grads["o1"], y * (1 - y) * wp * lam, rtol=1e-12)
    assert np.allclose(grads["o2"], -y * (1 - y) * wp * lam, rtol=1e-12)


def test_bias_gradient_at_half():
    # sigmoid' at y = 0.5 is exactly 0.25
    grads, y, _, _ = combination_grads(np.array([0.0]), np.array([0.0]), np.array([0.0]), np.array([1.0]), np.array([0.0]), 1.0)
    assert y == 0.5
    assert np.allclose(grads["b"], 0.25)


@pytest.mark.parametrize("lam", [0.1, 1.0, 10.0])
def test_full_chain_matches_finite_differences(lam):
    rng = RngStream(0)
    worst = 0.0
    for draw in range(10):
        params = init_params(3, 4, lam, rng.split(f"p/{lam}/{draw}"))
        x = rng.split(f"x/{lam}/{draw}").normal(3) * (1.0 / lam)
        report = finite_diff_check(lambda t: nsr_forward(t, t.leaf(x), params).y, params.parameters())
        worst = max(worst, report.worst)
        assert report.passed, (draw, report.errors)
    assert worst < 1e-5


# -- initialization --------------------------------------------------------------

def test_init_parameter_counts():
    rng = RngStream(0)
    assert init_params(2, 10, 1.0, rng).count_learnables() == 70
    assert init_params(2, 1, 1.0, rng).count_learnables() == 7


def test_init_seeds_differ():
    a = init_params(2, 3, 1.0, RngStream(0))
    b = init_params(2, 3, 1.0, RngStream(1))
    assert not np.array_equal(a.v1.value, b.v1.value)


def test_init_rejects_bad_sizes():
    with pytest.raises(ValueError):
        init_params(0, 1, 1.0, RngStream(0))
    with pytest.raises(ValueError):
        init_params(2, 1, -1.0, RngStream(0))


def test_params_validate_shapes():
    with pytest.raises(ValueError):
        NSRParams(
            v1=Parameter("v1", np.zeros((2, 2))),
            v2=Parameter("v2", np.zeros((3, 2))),
            wplus=Parameter("wp", np.zeros(2)),
            wzero=Parameter("w0", np.zeros(2)),
            bias=Parameter("b", np.zeros(2)),
        )


# -- hand-set gates ---------------------------------------------------------------

@pytest.mark.parametrize("op", list(ComparisonOp))
def test_hand_weights_perfect_truth_table(op):
    pairs = integer_pairs()
    predictions = nsr_predict(hand_weights(op), pairs) > 0.5
    assert np.array_equal(predictions, op.truth(pairs[:, 0], pairs[:, 1]))


def test_corrupted_zero_bit_breaks_equality_table(monkeypatch):
    import nsrlab.nsr as nsr_module

    def flipped(tape, d, lam):
        scaled = tape.mul(d, tape.leaf(lam))
        bplus = tape.tanh(scaled)
        # sign flip on the zero bit
        bzero = tape.sub(tape.mul(tape.leaf(2.0), tape.mul(bplus, bplus)), tape.leaf(1.0))
        return bplus, bzero

    monkeypatch.setattr(nsr_module, "_bits", flipped)
    pairs = integer_pairs()
    predictions = nsr_predict(hand_weights("eq"), pairs) > 0.5
    assert not np.array_equal(predictions, ComparisonOp.EQ.truth(pairs[:, 0], pairs[:, 1]))


def test_gt_monotone_in_both_arguments():
    gate = hand_weights("gt")
    xs = np.linspace(-20, 20, 81)
    # y nondecreasing in x1 at fixed x2
    for x2 in (-7.0, 0.0, 13.0):
        ys = nsr_predict(gate, np.stack([xs, np.full_like(xs, x2)], axis=1))
        assert np.all(np.diff(ys) >= 0)
    # y nonincreasing in x2 at fixed x1
    for x1 in (-7.0, 0.0, 13.0):
        ys = nsr_predict(gate, np.stack([np.full_like(xs, x1), xs], axis=1))
        assert np.all(np.diff(ys) <= 0)


def test_hand_weights_unknown_op():
    with pytest.raises(KeyError):
        hand_weights("bogus")


def test_exact_gate_outputs_are_hard():
    gate = hand_weights("le", gain=EXACT_GATE_GAIN)
    y = nsr_predict(gate, np.array([[2.0, 5.0], [5.0, 2.0], [3.0, 3.0]]))
    assert np.array_equal(y, [1.0, 0.0, 1.0])


# -- recurrent cells -----------------------------------------------------------------

def min_states(cell, values):
    states = [float(values[0])]
    tape = Tape()
    state = tape.leaf(np.array([values[0]], dtype=np.float64))
    for v in values[1:]:
        state = min_cell_step(tape, state, tape.leaf(np.array([v], dtype=np.float64)), cell)
        states.append(float(tape.values[state][0]))
    return states


def test_min_cell_with_perfect_less_than_gate():
    cell = hand_weights("lt", gain=EXACT_GATE_GAIN)
    assert min_states(cell, [5.0, 2.0, 7.0]) == [5.0, 2.0, 2.0]


def test_min_cell_half_gate_averages():
    # all-zero combination weights give y = 0.5 exactly
    cell = hand_weights("gt")
    for p in (cell.wplus, cell.wzero, cell.bias):
        p.value = np.zeros_like(p.value)
    tape = Tape()
    state = min_cell_step(tape, tape.leaf([4.0]), tape.leaf([10.0]), cell)
    assert float(tape.values[state][0]) == 7.0


def test_min_cell_constant_list_is_fixed_point():
    rng = RngStream(5)
    cell = init_params(2, 4, 1.0, rng)  # arbitrary gate
    assert np.allclose(min_states(cell, [3.3, 3.3, 3.3]), 3.3)


def test_min_cell_batch_runner():
    cell = hand_weights("lt", gain=EXACT_GATE_GAIN)
    seqs = np.array([[5.0, 2.0, 7.0], [1.0, 4.0, 0.0]])
    assert np.array_equal(run_min_cell(cell, seqs), [2.0, 0.0])


def test_count_cell_with_perfect_equality_gate():
    cell = hand_weights("eq", gain=EXACT_GATE_GAIN)
    counts = run_count_cell(cell, np.array([[3.0, 3.0, 5.0, 3.0]]))
    assert counts[0] == 2.0


def test_count_cell_zero_gate_stays_zero():
    cell = hand_weights("eq", gain=EXACT_GATE_GAIN)
    cell.bias.value = np.array([-100000.0])  # gate pinned to 0
    counts = run_count_cell(cell, np.array([[3.0, 3.0, 3.0, 3.0]]))
    assert counts[0] == 0.0


def test_count_cell_empty_tail():
    cell = hand_weights("eq", gain=EXACT_GATE_GAIN)
    counts = run_count_cell(cell, np.array([[9.0]]))
    assert counts[0] == 0.0
