"""Command line entry point.

    ddtn simulate FILE [--backend dd|tn|both] [--mode full | amp BITS | fidelity FILE2]
                       [--strategy seq | alt R | greedy-alt | plan] [--plan greedy|exhaustive]
                       [--slices K] [--workers W] [--input BITS] [--json OUT] [--seed S]
    ddtn bench --family F --n A..B --metric M [--csv OUT] [--seed S] [--workers W]

Exit status: 0 on success, 1 on usage, parse or capacity errors, 2 when the
two backends disagree.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .benchmarks import FAMILIES
from .circuit import CircuitError, parse_circuit
from .config import Tolerances
from .dd import DenseCapExceeded
from .driver import METRICS, RunConfig, linear_fit, run, scaling_sweep, sweep_to_csv

EXIT_OK, EXIT_ERROR, EXIT_DIVERGED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ddtn", description="Decision-diagram and tensor-network circuit simulator")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="simulate a circuit file")
    s.add_argument("file")
    s.add_argument("--backend", choices=["dd", "tn", "both"], default="dd")
    s.add_argument("--mode", nargs="+", default=["full"], metavar="MODE",
                   help="full | amp BITS | fidelity FILE2")
    s.add_argument("--strategy", nargs="+", default=["seq"], metavar="STRATEGY",
                   help="seq | alt R | greedy-alt | plan")
    s.add_argument("--plan", choices=["greedy", "exhaustive"], default="greedy")
    s.add_argument("--slices", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--input", default=None, help="initial basis state, q_{n-1} first")
    s.add_argument("--json", dest="json_out", default=None)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--eps-num", type=float, default=None)
    s.add_argument("--eps-eq", type=float, default=None)
    s.add_argument("--n-dense", type=int, default=None)

    b = sub.add_parser("bench", help="run a scaling sweep")
    b.add_argument("--family", choices=list(FAMILIES), required=True)
    b.add_argument("--n", required=True, help="range A..B or a single size")
    b.add_argument("--metric", choices=list(METRICS), required=True)
    b.add_argument("--csv", dest="csv_out", default=None)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--gates", type=int, default=None, help="gate count for the random family")
    b.add_argument("--workers", type=int, default=1)
    return p


def _parse_range(text: str) -> list[int]:
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(text)
    except ValueError:
        raise UsageError(f"bad range {text!r}; expected A..B") from None
    if lo < 1 or hi < lo:
        raise UsageError(f"bad range {text!r}")
    return list(range(lo, hi + 1))


def _config(args) -> tuple[RunConfig, str | None]:
    mode, *rest = args.mode
    second = None
    basis = None
    if mode == "full" and not rest:
        pass
    elif mode in ("amp", "amplitude") and len(rest) == 1:
        mode, basis = "amplitude", rest[0]
    elif mode == "fidelity" and len(rest) == 1:
        second = rest[0]
    else:
        raise UsageError("--mode expects 'full', 'amp BITS' or 'fidelity FILE2'")

    strat, *srest = args.strategy
    ratio = 1
    names = {"seq": "sequential", "sequential": "sequential", "alt": "alternating",
             "alternating": "alternating", "greedy-alt": "greedy-alt", "plan": "plan"}
    if strat not in names or (srest and names[strat] != "alternating") or len(srest) > 1:
        raise UsageError("--strategy expects 'seq', 'alt R', 'greedy-alt' or 'plan'")
    if srest:
        try:
            ratio = int(srest[0])
        except ValueError:
            raise UsageError("alternation ratio must be an integer") from None
        if ratio < 1:
            raise UsageError("alternation ratio must be positive")
    strategy = names[strat]
    if mode != "fidelity" and strategy in ("alternating", "greedy-alt"):
        raise UsageError("alternating strategies only apply to --mode fidelity")

    tol = Tolerances.from_env()
    overrides = {k: v for k, v in (("eps_num", args.eps_num), ("eps_eq", args.eps_eq),
                                   ("n_dense", args.n_dense)) if v is not None}
    if overrides:
        tol = tol.override(**overrides)
    cfg = RunConfig(backend=args.backend, mode=mode, basis=basis, initial=args.input,
                    strategy=strategy, ratio=ratio, plan=args.plan, slices=args.slices,
                    workers=args.workers, seed=args.seed, tolerances=tol)
    return cfg, second


def _simulate(args) -> int:
    cfg, second_path = _config(args)
    circuit = parse_circuit(Path(args.file).read_text())
    second = parse_circuit(Path(second_path).read_text()) if second_path else None
    report = run(cfg, circuit, second)
    print(report.summary())
    if args.json_out:
        Path(args.json_out).write_text(json.dumps(report.to_json(), indent=2) + "\n")
    if report.diverged:
        print("error: backend results diverge", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


def _bench(args) -> int:
    ns = _parse_range(args.n)
    rows = scaling_sweep(args.family, ns, args.metric, seed=args.seed,
                         workers=args.workers, num_gates=args.gates)
    if args.csv_out:
        with open(args.csv_out, "w", newline="") as fh:
            sweep_to_csv(rows, fh)
    else:
        sys.stdout.write(sweep_to_csv(rows))
    if len(rows) >= 3:
        a, b, r2 = linear_fit([r["n"] for r in rows], [r["value"] for r in rows])
        print(f"linear fit: value = {a:.4g}*n + {b:.4g}  (R^2 = {r2:.6f})", file=sys.stderr)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "simulate":
            return _simulate(args)
        return _bench(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except CircuitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except DenseCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
