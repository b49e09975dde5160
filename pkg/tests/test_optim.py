"""Adam update, parameter snapshots, and the finite-difference checker."""

import numpy as np
import pytest

from nsrlab.baselines import init_mlp, mlp_forward
from nsrlab.nsr import init_params, nsr_forward
from nsrlab.optim import Parameter, adam_step, assign_params, finite_diff_check, load_params, save_params
from nsrlab.rng import RngStream
from nsrlab.tape import Tape

# hand-computed bias-corrected first step at the defaults, grad = 1
FIRST_STEP = 0.0009999999900000003


def test_adam_first_step_size():
    p = Parameter("w", 1.0)
    p.grad = np.asarray(1.0)
    adam_step([p])
    assert np.isclose(1.0 - p.value, FIRST_STEP, rtol=1e-12)
    assert p.step_count == 1
    assert np.all(p.grad == 0.0)


def test_adam_zero_grad_leaves_values():
    p = Parameter("w", np.array([1.0, -2.0]))
    adam_step([p])
    assert np.array_equal(p.value, [1.0, -2.0])


def test_adam_identical_grads_bias_corrected_moment():
    # with constant gradient g, the corrected first moment equals g at every step
    p = Parameter("w", 0.0)
    for step in (1, 2):
        p.grad = np.asarray(0.7)
        adam_step([p])
        m_hat = p.adam_m / (1 - 0.9**p.step_count)
        assert np.isclose(m_hat, 0.7, rtol=1e-12), step
        assert np.all(np.isfinite(p.adam_m)) and np.all(np.isfinite(p.adam_v))


def test_adam_aborts_on_non_finite_grad_naming_parameter():
    p = Parameter("offender", 1.0)
    p.grad = np.asarray(np.nan)
    with pytest.raises(FloatingPointError, match="offender"):
        adam_step([p])


def test_snapshot_round_trip_bit_exact(tmp_path):
    rng = RngStream(5)
    params = [
        Parameter("m", rng.normal((3, 2)) * 1e8),
        Parameter("v", rng.normal(4) * 1e-7),
        Parameter("s", rng.normal()),
    ]
    path = tmp_path / "weights.txt"
    save_params(path, params)
    loaded = load_params(path)
    for p in params:
        assert loaded[p.name].shape == p.value.shape
        assert np.array_equal(loaded[p.name], p.value)
    fresh = [Parameter(p.name, np.zeros_like(p.value)) for p in params]
    assign_params(fresh, loaded)
    for p, q in zip(params, fresh):
        assert np.array_equal(p.value, q.value)


def test_assign_rejects_missing_and_mismatched(tmp_path):
    p = Parameter("w", np.ones(2))
    path = tmp_path / "w.txt"
    save_params(path, [p])
    loaded = load_params(path)
    with pytest.raises(KeyError):
        assign_params([Parameter("other", np.ones(2))], loaded)
    with pytest.raises(ValueError):
        assign_params([Parameter("w", np.ones(3))], loaded)


def test_finite_diff_constant_function_passes():
    p = Parameter("unused", np.ones(3))
    report = finite_diff_check(lambda t: t.leaf(4.2), [p])
    assert report.passed and report.worst == 0.0


def test_finite_diff_comparison_unit_passes():
    rng = RngStream(0)
    params = init_params(2, 1, 1.0, rng)
    x = np.array([3.0, 1.0])
    report = finite_diff_check(lambda t: nsr_forward(t, t.leaf(x), params).y, params.parameters())
    assert report.passed, report.errors


def test_finite_diff_mlp_81_parameters_passes():
    rng = RngStream(1)
    mlp = init_mlp(2, rng)
    assert mlp.count_learnables() == 81
    x = np.array([1.5, -2.0])
    report = finite_diff_check(lambda t: mlp_forward(t, t.leaf(x), mlp), mlp.parameters())
    assert report.passed, report.errors


def test_finite_diff_detects_corrupted_backward(monkeypatch):
    # mutate tanh's local partial (1 - y^2 -> 1 + y^2); the check must flag it
    def bad_tanh(self, a):
        from nsrlab.tape import _acc

        out = np.tanh(self.values[a])

        def back(g, grads):
            _acc(grads, a, g * (1.0 + out * out))

        return self._push(out, back)

    monkeypatch.setattr(Tape, "tanh", bad_tanh)
    p = Parameter("w", 0.3)
    report = finite_diff_check(lambda t: t.tanh(t.param(p)), [p])
    assert not report.passed
