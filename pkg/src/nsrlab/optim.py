"""Trainable parameters, the Adam update, snapshots, and gradient checking."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .tape import Tape, backward

ADAM_LR = 1e-3
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class Parameter:
    """A named 64-bit float array with gradient and Adam state."""

    name: str
    value: np.ndarray
    grad: np.ndarray = field(init=False)
    adam_m: np.ndarray = field(init=False)
    adam_v: np.ndarray = field(init=False)
    step_count: int = field(default=0, init=False)

    def __post_init__(self) -> None:
        self.value = np.asarray(self.value, dtype=np.float64)
        self.grad = np.zeros_like(self.value)
        self.adam_m = np.zeros_like(self.value)
        self.adam_v = np.zeros_like(self.value)

    @property
    def size(self) -> int:
        return self.value.size

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.value)


def adam_step(
    params: Iterable[Parameter],
    lr: float = ADAM_LR,
    beta1: float = ADAM_BETA1,
    beta2: float = ADAM_BETA2,
    eps: float = ADAM_EPS,
) -> None:
    """One bias-corrected Adam update; zeroes gradients afterwards."""
    for p in params:
        if not np.all(np.isfinite(p.grad)):
            raise FloatingPointError(f"non-finite gradient for parameter '{p.name}'")
        p.step_count += 1
        p.adam_m = beta1 * p.adam_m + (1.0 - beta1) * p.grad
        p.adam_v = beta2 * p.adam_v + (1.0 - beta2) * p.grad * p.grad
        m_hat = p.adam_m / (1.0 - beta1**p.step_count)
        v_hat = p.adam_v / (1.0 - beta2**p.step_count)
        p.value = p.value - lr * m_hat / (np.sqrt(v_hat) + eps)
        p.zero_grad()


# -- parameter snapshots ---------------------------------------------------

def save_params(path, params: Sequence[Parameter]) -> None:
    """Write a flat text snapshot: name, shape, row-major values (17 digits)."""
    with open(path, "w", encoding="utf-8") as fh:
        for p in params:
            shape = "x".join(str(d) for d in p.value.shape) or "-"
            values = " ".join(f"{v:.17g}" for v in p.value.ravel())
            fh.write(f"{p.name} {shape} {values}\n".rstrip() + "\n")


def load_params(path) -> dict[str, np.ndarray]:
    loaded: dict[str, np.ndarray] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            name, shape_token, values = parts[0], parts[1], parts[2:]
            shape = () if shape_token == "-" else tuple(int(d) for d in shape_token.split("x"))
            arr = np.array([float(v) for v in values], dtype=np.float64).reshape(shape)
            loaded[name] = arr
    return loaded


def assign_params(params: Sequence[Parameter], loaded: dict[str, np.ndarray]) -> None:
    for p in params:
        if p.name not in loaded:
            raise KeyError(f"snapshot is missing parameter '{p.name}'")
        if loaded[p.name].shape != p.value.shape:
            raise ValueError(f"snapshot shape mismatch for '{p.name}'")
        p.value = loaded[p.name].copy()


# -- finite-difference gradient checking ------------------------------------

@dataclass
class GradCheckReport:
    """Per-parameter worst relative error of analytic vs numeric gradients."""

    errors: dict[str, float]
    tol: float

    @property
    def worst(self) -> float:
        return max(self.errors.values()) if self.errors else 0.0

    @property
    def passed(self) -> bool:
        return self.worst < self.tol


def finite_diff_check(
    build: Callable[[Tape], int],
    params: Sequence[Parameter],
    h: float = 1e-5,
    tol: float = 1e-5,
    guard: float = 1e-8,
) -> GradCheckReport:
    """Compare analytic gradients of `build`'s scalar output against
    central finite differences, entry by entry.

    When both gradients are below `guard` in magnitude the comparison is
    absolute rather than relative.
    """

    def evaluate() -> float:
        t = Tape()
        return float(t.values[build(t)])

    for p in params:
        p.zero_grad()
    tape = Tape()
    out = build(tape)
    analytic = backward(tape, out)

    errors: dict[str, float] = {}
    for p in params:
        ana = analytic.get(p.name, np.zeros_like(p.value)).ravel()
        flat = p.value.ravel()
        worst = 0.0
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            f_plus = evaluate()
            flat[i] = orig - h
            f_minus = evaluate()
            flat[i] = orig
            numeric = (f_plus - f_minus) / (2.0 * h)
            scale = max(abs(ana[i]), abs(numeric))
            if scale < guard:
                err = abs(ana[i] - numeric)
            else:
                err = abs(ana[i] - numeric) / scale
            worst = max(worst, err)
        errors[p.name] = worst
        p.zero_grad()
    return GradCheckReport(errors=errors, tol=tol)
