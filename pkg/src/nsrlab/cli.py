"""Command-line surface: every experiment as a subcommand writing RunResult CSV.

Exit codes: 0 success, 1 runtime failure, 2 usage error. The effective
configuration of each run is echoed to a sidecar text file next to the
CSV. NSRLAB_WORKERS overrides the worker count.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import harness
from .harness import CompareCell, PiecewiseCell, SequenceCell, SsspCell, sweep

OPS = ("gt", "lt", "ge", "le", "eq", "ne")
LOG_GRID = (1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3)


def parse_int_list(text: str) -> list[int]:
    """Accept 'a..b' (inclusive) or a comma-separated list."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise argparse.ArgumentTypeError(f"empty range '{text}'")
        return list(range(lo, hi + 1))
    return [int(tok) for tok in text.split(",") if tok]


def parse_float_list(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok]


def resolve_workers(flag_value: int) -> int:
    env = os.environ.get("NSRLAB_WORKERS")
    if env is not None:
        return max(1, int(env))
    return max(1, flag_value)


def echo_config(out_path: str, args: argparse.Namespace) -> None:
    sidecar = str(out_path) + ".config.txt"
    with open(sidecar, "w", encoding="utf-8") as fh:
        for key in sorted(vars(args)):
            if key == "func":
                continue
            fh.write(f"{key}={getattr(args, key)}\n")


def _add_common(p: argparse.ArgumentParser, with_model_flags: bool = True) -> None:
    p.add_argument("--seeds", type=parse_int_list, default=list(range(10)),
                   help="seed list, e.g. 0..9 or 1,5,7 (default: 0..9)")
    p.add_argument("--epochs", type=int, default=50_000, help="training epochs per run (default: 50000)")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes (default: 1)")
    if with_model_flags:
        p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="bit sharpness (default: 1.0)")
        p.add_argument("--redundancy", type=int, default=10, help="redundant comparison units (default: 10)")


def _models(choice: str) -> list[str]:
    return ["nsr", "mlp"] if choice == "both" else [choice]


# -- subcommand builders -------------------------------------------------------

def cmd_compare(args) -> int:
    cells = [
        CompareCell(
            op=args.op,
            model=model,
            seed=seed,
            delta=args.delta,
            lam=args.lam,
            redundancy=args.redundancy,
            epochs=args.epochs,
            magnitudes=tuple(args.magnitudes),
        )
        for seed in args.seeds
        for model in _models(args.models)
    ]
    echo_config(args.out, args)
    sweep(cells, args.out, resolve_workers(args.workers))
    return 0


def cmd_floats(args) -> int:
    cells = [
        CompareCell(
            op=op,
            model="nsr",
            seed=seed,
            delta=delta,
            lam=lam,
            redundancy=args.redundancy,
            epochs=args.epochs,
            magnitudes=tuple(args.magnitudes),
        )
        for op in args.ops
        for delta in args.deltas
        for lam in args.lambdas
        for seed in args.seeds
    ]
    echo_config(args.out, args)
    sweep(cells, args.out, resolve_workers(args.workers))
    return 0


def cmd_piecewise(args) -> int:
    cells = [
        PiecewiseCell(
            fn=args.fn,
            model=model,
            seed=seed,
            lam=args.lam,
            redundancy=args.redundancy,
            epochs=args.epochs,
            magnitudes=tuple(args.magnitudes),
        )
        for seed in args.seeds
        for model in _models(args.models)
    ]
    echo_config(args.out, args)
    sweep(cells, args.out, resolve_workers(args.workers))
    return 0


def cmd_redundancy(args) -> int:
    cells = []
    for task in args.tasks:
        for r in args.r_range:
            for seed in args.seeds:
                if task in OPS:
                    cells.append(
                        CompareCell(op=task, model="nsr", seed=seed, lam=args.lam, redundancy=r, epochs=args.epochs)
                    )
                elif task == "f" or task == "abs":
                    cells.append(
                        PiecewiseCell(fn=task, model="nsr", seed=seed, lam=args.lam, redundancy=r, epochs=args.epochs)
                    )
                else:
                    raise ValueError(f"unknown redundancy task '{task}'")
    echo_config(args.out, args)
    sweep(cells, args.out, resolve_workers(args.workers))
    return 0


def cmd_recurrent(args) -> int:
    cells = [
        SequenceCell(
            kind=args.kind,
            model=model,
            seed=seed,
            lam=args.lam,
            redundancy=args.redundancy,
            epochs=args.epochs,
            lengths=tuple(args.lengths),
            magnitudes=tuple(args.magnitudes),
        )
        for seed in args.seeds
        for model in _models(args.models)
    ]
    echo_config(args.out, args)
    sweep(cells, args.out, resolve_workers(args.workers))
    return 0


def cmd_sssp(args) -> int:
    cells = [
        SsspCell(
            seed=seed,
            lam=args.lam,
            redundancy=args.redundancy,
            epochs=args.epochs,
            train_graphs=args.graphs,
            nodes=args.nodes,
            max_weight=args.max_weight,
            test_graphs=args.test_graphs,
            weight_scales=tuple(args.weight_scales),
            node_scales=tuple(args.node_scales),
            shuffled_eval=args.shuffled_eval,
        )
        for seed in args.seeds
    ]
    echo_config(args.out, args)
    sweep(cells, args.out, resolve_workers(args.workers))
    return 0


def cmd_selftest(args) -> int:
    from .baselines import mlp_hand_weights, mlp_predict
    from .nsr import hand_weights, init_params, nsr_forward, nsr_predict
    from .optim import finite_diff_check
    from .rng import RngStream
    from .tasks import ComparisonOp, bellman_ford, dijkstra, random_graph
    from .gnn import eval_rollout, perfect_min_model

    failures = 0

    def report(label: str, ok: bool) -> None:
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'}  {label}")
        if not ok:
            failures += 1

    rng = RngStream(2024)
    for lam in (0.1, 1.0, 10.0):
        params = init_params(3, 4, lam, rng.split(f"grad/{lam}"))
        x = rng.split(f"x/{lam}").normal(3) * 3.0
        report(
            f"gradient check, comparison unit (lambda={lam})",
            finite_diff_check(lambda t: nsr_forward(t, t.leaf(x), params).y, params.parameters()).passed,
        )

    grid = np.arange(-20, 21)
    a, b = np.meshgrid(grid, grid, indexing="ij")
    pairs = np.stack([a.ravel(), b.ravel()], axis=1).astype(float)
    for op in ComparisonOp:
        truth = op.truth(pairs[:, 0], pairs[:, 1])
        gate_ok = bool(np.all((nsr_predict(hand_weights(op), pairs) > 0.5) == truth))
        mlp_ok = bool(np.all((mlp_predict(mlp_hand_weights(op), pairs) > 0.5) == truth))
        report(f"hand-weight truth table '{op.value}' (gate)", gate_ok)
        report(f"hand-weight truth table '{op.value}' (mlp)", mlp_ok)

    oracle_ok = True
    rollout_ok = True
    gate = perfect_min_model()
    for i in range(50):
        g = random_graph(int(rng.split(f"g/{i}").integers(2, 9)), 10, rng.split(f"graph/{i}"))
        if not np.array_equal(bellman_ford(g)[-1], dijkstra(g)):
            oracle_ok = False
        if eval_rollout(g, gate) != 0.0:
            rollout_ok = False
    report("distance iterates match independent shortest-path oracle", oracle_ok)
    report("perfect-gate rollout reproduces exact distances", rollout_ok)

    print(f"selftest: {'ok' if failures == 0 else f'{failures} failure(s)'}")
    return 0 if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nsrlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compare", help="train and extrapolate one comparison")
    p.add_argument("--op", required=True, choices=OPS)
    p.add_argument("--delta", type=float, default=1.0, help="input scale (default: 1.0)")
    p.add_argument("--models", choices=("both", "nsr", "mlp"), default="both")
    p.add_argument("--magnitudes", type=parse_int_list, default=list(range(2, 14)),
                   help="base-10 magnitude exponents (default: 2..13)")
    _add_common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("floats", help="delta x lambda scaling grid")
    p.add_argument("--ops", type=lambda s: s.split(","), default=["gt", "eq"])
    p.add_argument("--deltas", type=parse_float_list, default=list(LOG_GRID))
    p.add_argument("--lambdas", type=parse_float_list, default=list(LOG_GRID))
    p.add_argument("--magnitudes", type=parse_int_list, default=list(range(2, 8)),
                   help="base-10 magnitude exponents (default: 2..7)")
    p.add_argument("--redundancy", type=int, default=10)
    _add_common(p, with_model_flags=False)
    p.set_defaults(func=cmd_floats)

    p = sub.add_parser("piecewise", help="gated piecewise function regression")
    p.add_argument("--fn", required=True, choices=("abs", "f"))
    p.add_argument("--models", choices=("both", "nsr", "mlp"), default="both")
    p.add_argument("--magnitudes", type=parse_int_list, default=list(range(2, 14)),
                   help="base-3 magnitude exponents (default: 2..13)")
    _add_common(p)
    p.set_defaults(func=cmd_piecewise)

    p = sub.add_parser("redundancy", help="redundancy ablation")
    p.add_argument("--tasks", type=lambda s: s.split(","), default=["eq", "ne", "f"])
    p.add_argument("--r-range", dest="r_range", type=parse_int_list, default=list(range(1, 16)))
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    _add_common(p, with_model_flags=False)
    p.set_defaults(func=cmd_redundancy)

    p = sub.add_parser("recurrent", help="recurrent minimum / counting tasks")
    p.add_argument("--kind", required=True, choices=("min", "count"))
    p.add_argument("--models", choices=("both", "nsr", "mlp"), default="both")
    p.add_argument("--lengths", type=parse_int_list, default=list(range(5, 51, 5)))
    p.add_argument("--magnitudes", type=parse_int_list, default=list(range(1, 7)),
                   help="base-3 magnitude exponents (default: 1..6)")
    _add_common(p)
    p.set_defaults(func=cmd_recurrent)

    p = sub.add_parser("sssp", help="shortest paths by learned min aggregation")
    p.add_argument("--graphs", type=int, default=25, help="training graphs (default: 25)")
    p.add_argument("--nodes", type=int, default=10)
    p.add_argument("--max-weight", dest="max_weight", type=int, default=10)
    p.add_argument("--test-graphs", dest="test_graphs", type=int, default=10)
    p.add_argument("--weight-scales", dest="weight_scales", type=parse_int_list, default=[0, 1, 2])
    p.add_argument("--node-scales", dest="node_scales", type=parse_int_list, default=[0, 1])
    p.add_argument("--shuffled-eval", dest="shuffled_eval", action="store_true",
                   help="also evaluate with shuffled message order")
    _add_common(p)
    p.set_defaults(func=cmd_sssp, epochs=12_000)

    p = sub.add_parser("selftest", help="fast internal consistency checks")
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, FloatingPointError) as exc:
        print(f"nsrlab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
