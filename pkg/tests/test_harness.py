"""Cells, sweep execution, and the RunResult CSV contract."""

import numpy as np
import pytest

from nsrlab.harness import (
    CSV_HEADER,
    CompareCell,
    PiecewiseCell,
    RunResult,
    SequenceCell,
    sweep,
    write_results,
)


def test_csv_header_schema():
    assert CSV_HEADER == (
        "task,op,model,seed,magnitude_base,magnitude_exp,seq_len,delta,lambda,redundancy,metric,value"
    )


def test_run_result_formatting():
    row = RunResult(
        task="compare", op="gt", model="nsr", seed=3, magnitude_base=10, magnitude_exp=5,
        delta=0.01, lam=100.0, redundancy=10, metric="accuracy", value=0.93,
    )
    assert row.to_csv_row() == "compare,gt,nsr,3,10,5,,0.01,100.0,10,accuracy,0.93"


def test_run_result_nan_renders_empty():
    row = RunResult(task="compare", op="gt", model="nsr", seed=0, value=float("nan"))
    assert row.to_csv_row().endswith("accuracy,")


def test_write_results(tmp_path):
    path = tmp_path / "r.csv"
    write_results(path, [RunResult(task="t", op="o", model="m", seed=1, value=0.5)])
    lines = path.read_text().strip().split("\n")
    assert lines[0] == CSV_HEADER and len(lines) == 2


def test_compare_cell_row_shape():
    cell = CompareCell(op="gt", model="nsr", seed=0, epochs=50, magnitudes=(2, 3))
    rows = cell.run()
    assert len(rows) == 3  # train + two magnitudes
    assert rows[0].magnitude_exp is None
    assert [r.magnitude_exp for r in rows[1:]] == [2, 3]
    assert all(r.delta == 1.0 and r.lam == 1.0 and r.redundancy == 10 for r in rows)
    assert all(0.0 <= r.value <= 1.0 for r in rows)


def test_compare_cell_mlp_row_fields():
    rows = CompareCell(op="eq", model="mlp", seed=1, epochs=20, magnitudes=(2,)).run()
    assert all(r.lam is None and r.redundancy is None for r in rows)
    assert all(r.model == "mlp" for r in rows)


def test_compare_cell_unknown_model():
    with pytest.raises(ValueError):
        CompareCell(op="gt", model="tree", seed=0).run()


def test_cell_is_pure():
    cell = CompareCell(op="lt", model="nsr", seed=5, epochs=60, magnitudes=(2, 4))
    a = [r.value for r in cell.run()]
    b = [r.value for r in cell.run()]
    assert a == b


def test_grid_cell_counts():
    grid = [1e-3, 1e-2, 1e-1, 1, 1e1, 1e2, 1e3]
    cells = [
        CompareCell(op=op, model="nsr", seed=0, delta=d, lam=lam)
        for op in ("gt", "eq")
        for d in grid
        for lam in grid
    ]
    assert len(cells) == 98
    r_cells = [
        CompareCell(op=task, model="nsr", seed=0, redundancy=r) if task != "f"
        else PiecewiseCell(fn="f", model="nsr", seed=0, redundancy=r)
        for task in ("eq", "ne", "f")
        for r in range(1, 16)
    ]
    assert len(r_cells) == 45


def test_sweep_empty_seed_list(tmp_path):
    path = tmp_path / "empty.csv"
    rows = sweep([], path)
    assert rows == []
    assert path.read_text() == CSV_HEADER + "\n"


def test_sweep_deterministic_and_parallel_equivalent(tmp_path):
    cells = [
        CompareCell(op="gt", model="nsr", seed=s, epochs=40, magnitudes=(2,))
        for s in (0, 1, 2, 3)
    ]
    p1, p2, p3 = (tmp_path / f"{i}.csv" for i in range(3))
    sweep(cells, p1, workers=1)
    sweep(cells, p2, workers=1)
    sweep(cells, p3, workers=2)
    assert p1.read_bytes() == p2.read_bytes() == p3.read_bytes()


def test_sweep_row_accounting(tmp_path):
    cells = [
        CompareCell(op="gt", model="nsr", seed=s, epochs=10, magnitudes=(2, 3))
        for s in range(3)
    ]
    rows = sweep(cells, tmp_path / "acc.csv")
    assert len(rows) == 3 * 3


def test_piecewise_cell_smoke():
    rows = PiecewiseCell(fn="abs", model="mlp", seed=0, epochs=40, magnitudes=(2,)).run()
    assert len(rows) == 2
    assert rows[0].task == "piecewise" and rows[0].op == "abs"


def test_sequence_cell_smoke():
    rows = SequenceCell(
        kind="min", model="nsr", seed=0, epochs=30, lengths=(5,), magnitudes=(1,), test_lists=10
    ).run()
    assert len(rows) == 2
    assert rows[0].seq_len == 5 and rows[1].magnitude_base == 3
