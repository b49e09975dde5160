"""Full-batch training loop and evaluation metrics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .optim import ADAM_BETA1, ADAM_BETA2, ADAM_EPS, ADAM_LR, Parameter, adam_step
from .tape import Tape, backward

DEFAULT_EPOCHS = 50_000


class TrainingDiverged(RuntimeError):
    """Loss became non-finite; the run is aborted and recorded as failed."""


@dataclass
class TrainConfig:
    epochs: int = DEFAULT_EPOCHS
    lr: float = ADAM_LR
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPS
    record_every: int = 100

    def __post_init__(self) -> None:
        if self.epochs < 0:
            raise ValueError(f"epochs must be non-negative, got {self.epochs}")


@dataclass
class TrainLog:
    """Loss curve sampled every `record_every` epochs plus the final loss."""

    curve: list[tuple[int, float]] = field(default_factory=list)

    @property
    def final_loss(self) -> float:
        return self.curve[-1][1] if self.curve else float("nan")


def fit(
    loss_builder: Callable[[Tape], int],
    params: Sequence[Parameter],
    config: TrainConfig,
    project: Callable[[], None] | None = None,
) -> TrainLog:
    """Minimize a scalar loss with full-batch Adam.

    `loss_builder` records one fresh forward pass per epoch and returns
    the loss node; `project`, when given, runs after each step (e.g.
    weight clipping). Raises TrainingDiverged on a non-finite loss.
    """
    log = TrainLog()
    loss_value = float("nan")
    for epoch in range(config.epochs):
        tape = Tape()
        loss = loss_builder(tape)
        loss_value = float(tape.values[loss])
        if not np.isfinite(loss_value):
            raise TrainingDiverged(f"non-finite loss {loss_value} at epoch {epoch}")
        if epoch % config.record_every == 0:
            log.curve.append((epoch, loss_value))
        backward(tape, loss)
        adam_step(params, lr=config.lr, beta1=config.beta1, beta2=config.beta2, eps=config.eps)
        if project is not None:
            project()
    if config.epochs > 0 and (not log.curve or log.curve[-1][0] != config.epochs - 1):
        log.curve.append((config.epochs - 1, loss_value))
    return log


def mae_loss(tape: Tape, prediction: int, targets: np.ndarray) -> int:
    return tape.mean(tape.abs(tape.sub(prediction, tape.leaf(targets))))


def train(model, inputs: np.ndarray, targets: np.ndarray, config: TrainConfig) -> TrainLog:
    """Train a model on mean absolute error over the whole dataset."""
    if len(np.asarray(targets)) == 0:
        raise ValueError("empty dataset")
    return fit(
        lambda tape: mae_loss(tape, model.forward(tape, inputs), targets),
        model.parameters(),
        config,
        project=getattr(model, "project", None),
    )


def eval_classification(model, inputs: np.ndarray, labels: np.ndarray) -> float:
    """Accuracy under the strict decision rule prediction = (y > 0.5)."""
    predictions = model.predict(inputs) > 0.5
    return float((predictions == (np.asarray(labels) > 0.5)).mean())


def eval_regression(model, inputs: np.ndarray, targets: np.ndarray, tol: float = 0.1) -> float:
    """Fraction of predictions within `tol` of the target (inclusive)."""
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    predictions = model.predict(inputs)
    return float((np.abs(predictions - np.asarray(targets)) <= tol).mean())
