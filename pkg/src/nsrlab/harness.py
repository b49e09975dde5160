"""Experiment drivers: run cells, collect RunResult rows, write CSV.

A cell is one (task config, model, seed) unit of work producing a fixed
list of result rows. Cells are pure functions of their fields, so a
sweep can execute them in any order (or in parallel) and still write a
deterministic CSV: rows are emitted in cell-list order, flushed
incrementally so a partial file is always valid.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .gnn import eval_rollout, fresh_model, train_teacher_forced
from .models import (
    ComparisonMLP,
    ComparisonNSR,
    PiecewiseMLP,
    RecurrentCountMLP,
    RecurrentCountNSR,
    RecurrentMinMLP,
    RecurrentMinNSR,
    gated_piecewise_model,
)
from .rng import RngStream
from .tasks import (
    PIECEWISE_ARITY,
    ComparisonOp,
    comparison_train_set,
    extrapolation_suite,
    piecewise_extrapolation,
    piecewise_set,
    random_graph,
    sequence_set,
)
from .training import (
    TrainConfig,
    TrainingDiverged,
    eval_classification,
    eval_regression,
    train,
)

__all__ = [
    "RunResult",
    "TrainConfig",
    "CompareCell",
    "PiecewiseCell",
    "SequenceCell",
    "SsspCell",
    "sweep",
    "write_results",
    "CSV_HEADER",
    "train",
    "eval_classification",
    "eval_regression",
    "gated_piecewise_model",
]

REGRESSION_TOL = 0.1

CSV_FIELDS = (
    "task",
    "op",
    "model",
    "seed",
    "magnitude_base",
    "magnitude_exp",
    "seq_len",
    "delta",
    "lambda",
    "redundancy",
    "metric",
    "value",
)
CSV_HEADER = ",".join(CSV_FIELDS)


@dataclass(frozen=True)
class RunResult:
    """One evaluated metric for one trained model configuration."""

    task: str
    op: str
    model: str
    seed: int
    magnitude_base: int | None = None
    magnitude_exp: int | None = None
    seq_len: int | None = None
    delta: float | None = None
    lam: float | None = None
    redundancy: int | None = None
    metric: str = "accuracy"
    value: float = float("nan")

    def to_csv_row(self) -> str:
        def fmt(v) -> str:
            if v is None:
                return ""
            if isinstance(v, float):
                return "" if math.isnan(v) else repr(v)
            return str(v)

        return ",".join(
            fmt(v)
            for v in (
                self.task,
                self.op,
                self.model,
                self.seed,
                self.magnitude_base,
                self.magnitude_exp,
                self.seq_len,
                self.delta,
                self.lam,
                self.redundancy,
                self.metric,
                self.value,
            )
        )


def write_results(path, results: Sequence[RunResult]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in results:
            fh.write(r.to_csv_row() + "\n")


# -- cells -------------------------------------------------------------------

@dataclass(frozen=True)
class CompareCell:
    """Train one comparison model, evaluate on the train set and every
    extrapolation magnitude."""

    op: str
    model: str
    seed: int
    delta: float = 1.0
    lam: float = 1.0
    redundancy: int = 10
    epochs: int = 50_000
    magnitudes: tuple[int, ...] = tuple(range(2, 14))
    base: int = 10

    def run(self) -> list[RunResult]:
        op = ComparisonOp.parse(self.op)
        rng = RngStream(self.seed).split(
            f"compare/{self.op}/{self.delta}/{self.lam}/{self.redundancy}/{self.model}"
        )
        if self.model == "nsr":
            net = ComparisonNSR.fresh(2, self.redundancy, self.lam, rng.split("init"))
            lam, redundancy = self.lam, self.redundancy
        elif self.model == "mlp":
            net = ComparisonMLP.fresh(2, rng.split("init"))
            lam, redundancy = None, None
        else:
            raise ValueError(f"unknown model '{self.model}'")

        def row(value, magnitude_exp=None):
            return RunResult(
                task="compare",
                op=self.op,
                model=self.model,
                seed=self.seed,
                magnitude_base=self.base if magnitude_exp is not None else None,
                magnitude_exp=magnitude_exp,
                delta=self.delta,
                lam=lam,
                redundancy=redundancy,
                metric="accuracy",
                value=value,
            )

        inputs, labels = comparison_train_set(op, self.delta)
        try:
            train(net, inputs, labels, TrainConfig(epochs=self.epochs))
        except TrainingDiverged:
            nan = float("nan")
            return [row(nan)] + [row(nan, k) for k in self.magnitudes]
        results = [row(eval_classification(net, inputs, labels))]
        for k in self.magnitudes:
            suite_x, suite_y = extrapolation_suite(op, k, self.base, self.delta, rng.split(f"suite/{k}"))
            results.append(row(eval_classification(net, suite_x, suite_y), k))
        return results


@dataclass(frozen=True)
class PiecewiseCell:
    """Train one piecewise regressor; accuracy is the fraction of
    predictions within 0.1 of the exact target."""

    fn: str
    model: str
    seed: int
    lam: float = 1.0
    redundancy: int = 10
    epochs: int = 50_000
    magnitudes: tuple[int, ...] = tuple(range(2, 14))

    def run(self) -> list[RunResult]:
        arity = PIECEWISE_ARITY[self.fn]
        rng = RngStream(self.seed).split(
            f"piecewise/{self.fn}/{self.lam}/{self.redundancy}/{self.model}"
        )
        if self.model == "nsr":
            net = gated_piecewise_model(arity, self.redundancy, self.lam, rng.split("init"))
            lam, redundancy = self.lam, self.redundancy
        elif self.model == "mlp":
            net = PiecewiseMLP.fresh(arity, rng.split("init"))
            lam, redundancy = None, None
        else:
            raise ValueError(f"unknown model '{self.model}'")

        def row(value, magnitude_exp=None):
            return RunResult(
                task="piecewise",
                op=self.fn,
                model=self.model,
                seed=self.seed,
                magnitude_base=3 if magnitude_exp is not None else None,
                magnitude_exp=magnitude_exp,
                lam=lam,
                redundancy=redundancy,
                metric="accuracy",
                value=value,
            )

        inputs, targets = piecewise_set(self.fn, rng.split("train-data"))
        try:
            train(net, inputs, targets, TrainConfig(epochs=self.epochs))
        except TrainingDiverged:
            nan = float("nan")
            return [row(nan)] + [row(nan, k) for k in self.magnitudes]
        results = [row(eval_regression(net, inputs, targets, REGRESSION_TOL))]
        for k in self.magnitudes:
            suite_x, suite_y = piecewise_extrapolation(self.fn, k, rng.split(f"suite/{k}"))
            results.append(row(eval_regression(net, suite_x, suite_y, REGRESSION_TOL), k))
        return results


@dataclass(frozen=True)
class SequenceCell:
    """Train one recurrent model on length-5 lists and evaluate it across
    longer lists and larger magnitudes."""

    kind: str
    model: str
    seed: int
    lam: float = 1.0
    redundancy: int = 10
    epochs: int = 50_000
    lengths: tuple[int, ...] = tuple(range(5, 51, 5))
    magnitudes: tuple[int, ...] = tuple(range(1, 7))
    train_lists: int = 500
    train_length: int = 5
    test_lists: int = 50

    def run(self) -> list[RunResult]:
        rng = RngStream(self.seed).split(
            f"sequence/{self.kind}/{self.lam}/{self.redundancy}/{self.model}"
        )
        if self.model == "nsr":
            cls = RecurrentMinNSR if self.kind == "min" else RecurrentCountNSR
            net = cls.fresh(self.redundancy, self.lam, rng.split("init"))
            lam, redundancy = self.lam, self.redundancy
        elif self.model == "mlp":
            cls = RecurrentMinMLP if self.kind == "min" else RecurrentCountMLP
            net = cls.fresh(rng.split("init"))
            lam, redundancy = None, None
        else:
            raise ValueError(f"unknown model '{self.model}'")

        def row(value, seq_len, magnitude_exp=None):
            return RunResult(
                task="sequence",
                op=self.kind,
                model=self.model,
                seed=self.seed,
                magnitude_base=3 if magnitude_exp is not None else None,
                magnitude_exp=magnitude_exp,
                seq_len=seq_len,
                lam=lam,
                redundancy=redundancy,
                metric="accuracy",
                value=value,
            )

        lists, targets = sequence_set(self.kind, self.train_lists, self.train_length, None, rng.split("train-data"))
        try:
            train(net, lists, targets, TrainConfig(epochs=self.epochs))
        except TrainingDiverged:
            nan = float("nan")
            return [row(nan, self.train_length)] + [
                row(nan, length, k) for length in self.lengths for k in self.magnitudes
            ]
        results = [row(eval_regression(net, lists, targets, REGRESSION_TOL), self.train_length)]
        for length in self.lengths:
            for k in self.magnitudes:
                suite_x, suite_y = sequence_set(
                    self.kind, self.test_lists, length, k, rng.split(f"suite/{length}/{k}")
                )
                results.append(row(eval_regression(net, suite_x, suite_y, REGRESSION_TOL), length, k))
        return results


@dataclass(frozen=True)
class SsspCell:
    """Train the shared min-fold cell on small graphs, evaluate rollouts
    under scaled weights and scaled node counts."""

    seed: int
    lam: float = 1.0
    redundancy: int = 10
    epochs: int = 12_000
    train_graphs: int = 25
    nodes: int = 10
    max_weight: int = 10
    test_graphs: int = 10
    weight_scales: tuple[int, ...] = (0, 1, 2)
    node_scales: tuple[int, ...] = (0, 1)
    shuffled_eval: bool = False

    def run(self) -> list[RunResult]:
        rng = RngStream(self.seed).split(f"sssp/{self.lam}/{self.redundancy}")
        corpus = [
            random_graph(self.nodes, self.max_weight, rng.split(f"train-graph/{i}"))
            for i in range(self.train_graphs)
        ]
        model = fresh_model(self.redundancy, self.lam, rng.split("init"))

        def row(value, sweep_kind, scale):
            return RunResult(
                task="sssp",
                op=sweep_kind,
                model="nsr",
                seed=self.seed,
                magnitude_base=3,
                magnitude_exp=scale,
                lam=self.lam,
                redundancy=self.redundancy,
                metric="normalized_mae",
                value=value,
            )

        planned = [("weights", s) for s in self.weight_scales] + [("nodes", s) for s in self.node_scales]
        if self.shuffled_eval:
            planned += [(f"{kind}_shuffled", s) for kind, s in planned]
        try:
            train_teacher_forced(corpus, model, TrainConfig(epochs=self.epochs))
        except TrainingDiverged:
            return [row(float("nan"), kind, s) for kind, s in planned]

        results = []
        for kind, scale in planned:
            base_kind = kind.removesuffix("_shuffled")
            if base_kind == "weights":
                n, mw = self.nodes, self.max_weight * 3**scale
            else:
                n, mw = self.nodes * 3**scale, self.max_weight
            errors = [
                eval_rollout(
                    random_graph(n, mw, rng.split(f"test/{base_kind}/{scale}/{j}")),
                    model,
                    max_weight=mw,
                    order_rng=rng.split(f"order/{scale}/{j}") if kind.endswith("_shuffled") else None,
                )
                for j in range(self.test_graphs)
            ]
            results.append(row(float(sum(errors) / len(errors)), kind, scale))
        return results


# -- sweep --------------------------------------------------------------------

def _run_cell(cell):
    return cell.run()


def sweep(cells: Sequence, csv_path=None, workers: int = 1) -> list[RunResult]:
    """Execute every cell, in parallel when workers > 1.

    Rows are written (and flushed) in cell order regardless of execution
    order, so the CSV is deterministic and any prefix of it is valid.
    """
    all_rows: list[RunResult] = []
    out = open(csv_path, "w", encoding="utf-8") if csv_path else None
    try:
        if out:
            out.write(CSV_HEADER + "\n")
            out.flush()

        def emit(rows):
            all_rows.extend(rows)
            if out:
                for r in rows:
                    out.write(r.to_csv_row() + "\n")
                out.flush()

        if workers > 1 and len(cells) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(_run_cell, c) for c in cells]
                for fut in futures:
                    emit(fut.result())
        else:
            for cell in cells:
                emit(cell.run())
    finally:
        if out:
            out.close()
    return all_rows
