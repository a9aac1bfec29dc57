"""Command line interface: build, validate, solve, and benchmark games.

All files are written deterministically: floating-point numbers are
serialized with 17 significant digits (enough to round-trip doubles),
dictionary key order is fixed, and timing columns are zero unless
--timing is given. Running the same command twice therefore produces
byte-identical output, and the manifest embedded in every report holds
the resolved flags needed to reproduce a run.

Exit codes: 0 success, 1 validation failure, 2 parse or usage error,
3 finished without converging, 4 numerical divergence. I/O failures
exit 1.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import __version__
from .errors import (DivergenceError, FileFormatError, SeqformError,
                     ValidationError)
from .games import (efg_to_dict, kuhn_poker, random_matrix_game,
                    to_sequence_form)
from .solver import SolveReport, SolverConfig, solve
from .treeplex import SequenceFormGame, validate_sequence_form

TRACE_HEADER = "iter,residual,duality_gap,value,p0,neg_q0,feas_x,feas_y,min_x,min_y,elapsed_ms"


def _fmt_float(x: float) -> str:
    if x != x or x in (float("inf"), float("-inf")):
        raise ValueError("cannot serialize a non-finite number")
    return "%.17g" % x


def _is_scalar(v) -> bool:
    return v is None or isinstance(v, (bool, int, float, str))


def _scalar_json(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return _fmt_float(v)
    return json.dumps(v)


def render_json(obj, indent: int = 0) -> str:
    """Deterministic JSON with 17-significant-digit floats."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if _is_scalar(obj):
        return _scalar_json(obj)
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(_is_scalar(v) for v in obj):
            return "[" + ", ".join(_scalar_json(v) for v in obj) + "]"
        body = ",\n".join(inner + render_json(v, indent + 1) for v in obj)
        return "[\n" + body + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        parts = []
        for key, v in obj.items():
            parts.append(f"{inner}{json.dumps(str(key))}: {render_json(v, indent + 1)}")
        return "{\n" + ",\n".join(parts) + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _write_json(path: str, obj) -> None:
    _write_text(path, render_json(obj) + "\n")


def write_trace_csv(path: str, trace, timing: bool) -> None:
    lines = [TRACE_HEADER]
    for t in trace:
        elapsed_ms = t.elapsed * 1000.0 if timing else 0.0
        lines.append(",".join([
            str(t.iter), _fmt_float(t.residual), _fmt_float(t.duality_gap),
            _fmt_float(t.value), _fmt_float(t.p0), _fmt_float(t.neg_q0),
            _fmt_float(t.feas_x), _fmt_float(t.feas_y),
            _fmt_float(t.min_x), _fmt_float(t.min_y), _fmt_float(elapsed_ms),
        ]))
    _write_text(path, "\n".join(lines) + "\n")


def _load_game_file(path: str) -> SequenceFormGame:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return SequenceFormGame.from_dict(doc)


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {n}")
    return n


def _int_list(text: str) -> list[int]:
    try:
        items = [int(part) for part in text.split(",") if part != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not items:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return items


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epsilon", type=float, default=1e-4,
                   help="target residual (default 1e-4)")
    p.add_argument("--max-iters", type=_positive_int, default=100000,
                   help="iteration budget (default 100000)")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for the step-size estimator (default 0)")
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="step size override (default: 1 / operator norm)")
    p.add_argument("--trace-every", type=int, default=100,
                   help="record a trace row every N iterations (default 100)")
    p.add_argument("--dq-updated-y", action=argparse.BooleanOptionalAction, default=True,
                   help="use the updated y in the q step (default on)")
    p.add_argument("--reclip-y", action=argparse.BooleanOptionalAction, default=False,
                   help="re-clip y after the correction step (default off)")
    p.add_argument("--timing", action="store_true",
                   help="write real elapsed_ms values (costs reproducibility)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqform",
        description="Approximate equilibria of two-person zero-sum games in sequence form.")
    parser.add_argument("--version", action="version", version=f"seqform {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    mk = sub.add_parser("make-game", help="write a built-in game to JSON")
    mk.add_argument("kind", choices=["kuhn", "random-matrix"])
    mk.add_argument("--out", required=True, help="output path for the sequence-form JSON")
    mk.add_argument("--rows", type=_positive_int, help="rows for random-matrix")
    mk.add_argument("--cols", type=_positive_int, help="cols for random-matrix")
    mk.add_argument("--seed", type=int, default=0, help="seed for random-matrix (default 0)")
    mk.set_defaults(func=cmd_make_game)

    va = sub.add_parser("validate", help="check a sequence-form JSON file")
    va.add_argument("game", help="path to the game file")
    va.set_defaults(func=cmd_validate)

    so = sub.add_parser("solve", help="solve a game and write report and trace")
    so.add_argument("game", nargs="?", help="path to a sequence-form JSON file")
    so.add_argument("--builtin", choices=["kuhn", "random-matrix"],
                    help="solve a built-in game instead of a file")
    so.add_argument("--rows", type=_positive_int, help="rows for --builtin random-matrix")
    so.add_argument("--cols", type=_positive_int, help="cols for --builtin random-matrix")
    _add_solver_flags(so)
    so.add_argument("--report", default="report.json", help="report path (default report.json)")
    so.add_argument("--trace", default="trace.csv", help="trace path (default trace.csv)")
    so.add_argument("--strategies", default=None,
                    help="optional path for the computed strategies")
    so.set_defaults(func=cmd_solve)

    be = sub.add_parser("bench", help="solve random matrix games over a size/seed grid")
    be.add_argument("--sizes", type=_int_list, required=True,
                    help="comma-separated square sizes, e.g. 100,200")
    be.add_argument("--seeds", type=_int_list, required=True,
                    help="comma-separated seeds, e.g. 0,1,2")
    be.add_argument("--epsilon", type=float, default=1e-4)
    be.add_argument("--max-iters", type=_positive_int, default=100000)
    be.add_argument("--trace-every", type=int, default=100)
    be.add_argument("--timing", action="store_true",
                    help="write real elapsed_ms values (costs reproducibility)")
    be.add_argument("--out-dir", default="bench", help="directory for traces (default bench)")
    be.set_defaults(func=cmd_bench)
    return parser


def cmd_make_game(args) -> int:
    if args.kind == "kuhn":
        efg = kuhn_poker()
        game, _ = to_sequence_form(efg)
        _write_json(args.out, game.to_dict())
        out = Path(args.out)
        efg_path = out.with_suffix(".efg.json") if out.suffix == ".json" \
            else Path(str(out) + ".efg.json")
        _write_json(str(efg_path), efg_to_dict(efg))
        print(f"wrote {args.out}")
        print(f"wrote {efg_path}")
        return 0
    if args.rows is None or args.cols is None:
        print("error: random-matrix requires --rows and --cols", file=sys.stderr)
        return 2
    game = random_matrix_game(args.rows, args.cols, args.seed)
    _write_json(args.out, game.to_dict())
    print(f"wrote {args.out}")
    return 0


def cmd_validate(args) -> int:
    game = _load_game_file(args.game)
    violations = validate_sequence_form(game)
    if violations:
        for v in violations:
            print(str(v))
        return 1
    return 0


def _config_from_args(args) -> SolverConfig:
    return SolverConfig(
        epsilon=args.epsilon,
        max_iter=args.max_iters,
        lambda_override=args.lam,
        trace_every=args.trace_every,
        seed=args.seed,
        dq_uses_updated_y=args.dq_updated_y,
        reclip_y_after_correction=args.reclip_y)


def _manifest(args, game_desc: dict) -> dict:
    return {
        "command": "solve",
        "flags": {
            "epsilon": args.epsilon,
            "max_iters": args.max_iters,
            "seed": args.seed,
            "lambda": args.lam,
            "trace_every": args.trace_every,
            "dq_updated_y": args.dq_updated_y,
            "reclip_y": args.reclip_y,
            "timing": args.timing,
            "report": args.report,
            "trace": args.trace,
            "strategies": args.strategies,
        },
        "seed": args.seed,
        "game": game_desc,
        "version": __version__,
    }


def _report_dict(report: SolveReport, manifest: dict) -> dict:
    return {
        "converged": report.converged,
        "iterations": report.iterations,
        "epsilon": report.epsilon,
        "lambda": report.lam,
        "norm_K": report.norm_K,
        "residual": report.residual,
        "value": report.value,
        "duality_gap": report.duality_gap,
        "feas": {
            "feas_x": report.feas.feas_x,
            "feas_y": report.feas.feas_y,
            "min_x": report.feas.min_x,
            "min_y": report.feas.min_y,
        },
        "manifest": manifest,
    }


def _strategies_dict(report: SolveReport) -> dict:
    return {
        "x": [float(v) for v in report.x_plan],
        "y": [float(v) for v in report.y_plan],
        "x_last": [float(v) for v in report.last.x],
        "y_last": [float(v) for v in report.last.y],
        "p_last": [float(v) for v in report.last.p],
        "q_last": [float(v) for v in report.last.q],
    }


def _summary_line(report: SolveReport) -> str:
    word = "converged" if report.converged else "not converged"
    return (f"{word} iterations={report.iterations} residual={report.residual:.6g} "
            f"value={report.value:.6g} gap={report.duality_gap:.6g}")


def cmd_solve(args) -> int:
    if (args.game is None) == (args.builtin is None):
        print("error: give exactly one of a game file or --builtin", file=sys.stderr)
        return 2
    if args.builtin == "kuhn":
        game, _ = to_sequence_form(kuhn_poker())
        game_desc = {"builtin": "kuhn"}
    elif args.builtin == "random-matrix":
        if args.rows is None or args.cols is None:
            print("error: --builtin random-matrix requires --rows and --cols", file=sys.stderr)
            return 2
        game = random_matrix_game(args.rows, args.cols, args.seed)
        game_desc = {"builtin": "random-matrix", "rows": args.rows,
                     "cols": args.cols, "seed": args.seed}
    else:
        game = _load_game_file(args.game)
        game_desc = {"path": args.game, "sha256": _sha256(args.game)}

    report = solve(game, _config_from_args(args))
    write_trace_csv(args.trace, report.trace, args.timing)
    _write_json(args.report, _report_dict(report, _manifest(args, game_desc)))
    if args.strategies:
        _write_json(args.strategies, _strategies_dict(report))
    print(_summary_line(report))
    return 0 if report.converged else 3


def cmd_bench(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = ["size,seed,converged,iterations,residual,value,duality_gap,elapsed_ms"]
    all_converged = True
    for size in args.sizes:
        for seed in args.seeds:
            game = random_matrix_game(size, size, seed)
            config = SolverConfig(epsilon=args.epsilon, max_iter=args.max_iters,
                                  trace_every=args.trace_every, seed=seed)
            report = solve(game, config)
            trace_path = out_dir / f"trace_{size}x{size}_seed{seed}.csv"
            write_trace_csv(str(trace_path), report.trace, args.timing)
            elapsed_ms = report.elapsed * 1000.0 if args.timing else 0.0
            rows.append(",".join([
                str(size), str(seed), "1" if report.converged else "0",
                str(report.iterations), _fmt_float(report.residual),
                _fmt_float(report.value), _fmt_float(report.duality_gap),
                _fmt_float(elapsed_ms)]))
            all_converged = all_converged and report.converged
            print(f"size={size} seed={seed} {_summary_line(report)}")
    _write_text(str(out_dir / "summary.csv"), "\n".join(rows) + "\n")
    return 0 if all_converged else 3


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except json.JSONDecodeError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except FileFormatError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        for v in exc.violations:
            print(str(v), file=sys.stderr)
        return 1
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1
    except SeqformError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
