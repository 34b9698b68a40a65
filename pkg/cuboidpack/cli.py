#!/usr/bin/env python3
"""
cli.py
------
Command-line front end.

Usage:
    python -m cuboidpack solve --algo absolute --input data/sample_small.json
    python -m cuboidpack verify --input data/sample_small.json --packing out.packing.json
    python -m cuboidpack oracle --input data/sample_small.json --rotations
    python -m cuboidpack bench --family uniform --count 20 --n 6 --algos volume,licheng,rotation
    python -m cuboidpack gen --family grid12 --n 10 --seed 3 --output inst.json

Exit status: 0 on a feasible result, 1 when a packing fails verification,
2 on malformed input or bad arguments.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from cuboidpack import bench
from cuboidpack.config import get_settings
from cuboidpack.errors import ContractViolation, OracleCapExceeded, PackingError, SearchBudgetExceeded
from cuboidpack.generators import FAMILIES, generate_instance
from cuboidpack.geometry import VerifyReport, as_rational, format_rational, item_table, verify_packing
from cuboidpack.io.schemas import dump_instance, dump_packing, dump_report, load_descriptor, load_instance, load_packing
from cuboidpack.mvbb import ABSOLUTE3, APTAS
from cuboidpack.oracle import oracle_opt_bins
from cuboidpack.solvers import ALGORITHMS, SolveOptions, run_algorithm

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_USAGE = 2


def setup_logging(level: Optional[str] = None) -> None:
    logging.basicConfig(
        level=getattr(logging, (level or get_settings().log_level).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def verification_dict(report: VerifyReport) -> dict:
    return {
        "feasible": report.feasible,
        "complete": report.complete,
        "used_bins": report.used_bins,
        "strip_height": report.strip_height,
        "total_volume": report.total_volume,
        "unplaced": list(report.unplaced),
        "violations": [
            {"kind": v.kind, "item_ids": list(v.item_ids), "witness": list(v.witness)}
            for v in report.violations
        ],
    }


def print_verification(report: VerifyReport) -> None:
    print("\n=== VERIFICATION ===")
    if report.feasible:
        print(f"✅ Feasible, {report.used_bins} bin(s) used.")
    else:
        print(f"❌ {len(report.violations)} violation(s):")
        for v in report.violations[:10]:
            print(f"   {v.kind}: {', '.join(v.item_ids)}")
    if report.strip_height is not None:
        print(f"   strip height {format_rational(report.strip_height)}")
    if report.unplaced:
        print(f"⚠️ {len(report.unplaced)} item(s) not placed: {list(report.unplaced[:10])}")


# --- Subcommands ---

def _options(args) -> SolveOptions:
    descriptor = load_descriptor(args.containers) if getattr(args, "containers", None) else None
    return SolveOptions(
        epsilon=as_rational(args.epsilon) if args.epsilon else None,
        k_max=args.k_max,
        backend=args.backend,
        rotations=args.rotations,
        mvbb_mode=getattr(args, "mvbb_mode", APTAS),
        container_source="explicit" if descriptor is not None else "generator",
        descriptor=descriptor,
    )


def run_solve(args) -> int:
    instance = load_instance(args.input)
    stem = Path(args.input).with_suffix("")
    output = Path(args.output) if args.output else stem.with_name(f"{stem.name}.{args.algo}.packing.json")
    report_path = Path(args.report) if args.report else stem.with_name(f"{stem.name}.{args.algo}.report.json")

    print(f"\n=== SOLVE ({args.algo}) ===")
    print(f"{len(instance.items)} items from {args.input}")
    try:
        outcome = run_algorithm(args.algo, instance.items, _options(args))
    except ContractViolation as exc:
        print(f"❌ {exc}")
        return EXIT_INFEASIBLE

    dump_packing(output, outcome.packing)
    dump_report(report_path, {
        "algo": outcome.algo,
        "objective_kind": outcome.objective_kind,
        "objective": format_rational(outcome.objective),
        "objective_approx": float(outcome.objective),
        "approximate_fields": ["objective_approx"],
        "total_volume": outcome.verification.total_volume,
        "verification": verification_dict(outcome.verification),
        "details": outcome.report,
    })
    print(f"✅ {outcome.objective_kind}: {format_rational(outcome.objective)} (≈ {float(outcome.objective):.4f})")
    print_verification(outcome.verification)
    print(f"\nPacking written to {output}")
    print(f"Report written to {report_path}")
    return EXIT_OK if outcome.feasible else EXIT_INFEASIBLE


def run_verify(args) -> int:
    instance = load_instance(args.input)
    packing = load_packing(args.packing)
    report = verify_packing(packing, item_table(instance.items))
    print_verification(report)
    if args.report:
        dump_report(args.report, verification_dict(report))
    return EXIT_OK if report.complete else EXIT_INFEASIBLE


def run_oracle(args) -> int:
    instance = load_instance(args.input)
    print("\n=== EXACT OPTIMUM ===")
    try:
        result = oracle_opt_bins(
            instance.items, instance.bin_spec, max_bins=args.max_bins,
            allow_rotations=args.rotations, cap=args.cap,
        )
    except (OracleCapExceeded, SearchBudgetExceeded) as exc:
        print(f"⚠️ {exc}")
        return EXIT_INFEASIBLE
    if result is None:
        print(f"❌ More than {args.max_bins} bins needed.")
        return EXIT_INFEASIBLE
    print(f"✅ OPT = {result.opt}")
    if args.output:
        dump_packing(args.output, result.witness)
        print(f"Witness written to {args.output}")
    return EXIT_OK


def run_bench(args) -> int:
    if args.input_dir:
        instances = bench.instances_from_dir(args.input_dir)
    else:
        seed = get_settings().seed if args.seed is None else args.seed
        instances = bench.generated_instances(args.family, args.count, args.n, seed)
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    unknown = [a for a in algos if a not in ALGORITHMS]
    if unknown:
        print(f"❌ Unknown algorithm(s): {unknown}")
        return EXIT_USAGE

    print(f"\n=== BENCH: {len(instances)} instance(s) x {len(algos)} algorithm(s) ===")
    frame = bench.run_bench(instances, algos, _options(args), args.oracle_cap, timing=args.timing)
    path = bench.write_bench_csv(frame, args.output)
    errors = int((frame["result"] == "error").sum()) if not frame.empty else 0
    if errors:
        print(f"⚠️ {errors} run(s) failed")
    print(f"✅ {len(frame)} row(s) written to {path}")
    return EXIT_OK


def run_gen(args) -> int:
    seed = get_settings().seed if args.seed is None else args.seed
    items = generate_instance(args.family, args.n, seed)
    dump_instance(args.output, items, name=f"{args.family}-{seed}")
    print(f"✅ {len(items)} {args.family} item(s) written to {args.output}")
    return EXIT_OK


# --- Parser ---

def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--epsilon", help="accuracy parameter, e.g. 1/40 or 0.25")
    parser.add_argument("--k-max", type=int, default=None, help="largest OPT guess (default CUBOIDPACK_K_MAX)")
    parser.add_argument("--backend", choices=["licheng", "external"], default=None)
    parser.add_argument("--rotations", action="store_true", help="allow axis-parallel rotations")
    parser.add_argument("--mvbb-mode", choices=[APTAS, ABSOLUTE3], default=APTAS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cuboidpack", description="Exact-arithmetic 3D cuboid packing.")
    parser.add_argument("--log-level", default=None, help="override CUBOIDPACK_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="pack one instance")
    solve.add_argument("--algo", required=True, choices=sorted(ALGORITHMS))
    solve.add_argument("--input", required=True)
    solve.add_argument("--output", help="packing JSON (default: next to the input)")
    solve.add_argument("--report", help="report JSON (default: next to the input)")
    solve.add_argument("--containers", help="container descriptor JSON for --algo asymptotic")
    _add_solver_flags(solve)
    solve.set_defaults(func=run_solve)

    verify = sub.add_parser("verify", help="check a packing against its instance")
    verify.add_argument("--input", required=True)
    verify.add_argument("--packing", required=True)
    verify.add_argument("--report")
    verify.set_defaults(func=run_verify)

    oracle = sub.add_parser("oracle", help="exact minimum number of bins for small instances")
    oracle.add_argument("--input", required=True)
    oracle.add_argument("--rotations", action="store_true")
    oracle.add_argument("--cap", type=int, default=None)
    oracle.add_argument("--max-bins", type=int, default=None)
    oracle.add_argument("--output")
    oracle.set_defaults(func=run_oracle)

    bench_p = sub.add_parser("bench", help="tabulate algorithms over many instances")
    bench_p.add_argument("--input-dir")
    bench_p.add_argument("--family", choices=FAMILIES, default="uniform")
    bench_p.add_argument("--count", type=int, default=20)
    bench_p.add_argument("--n", type=int, default=6)
    bench_p.add_argument("--seed", type=int, default=None)
    bench_p.add_argument("--algos", default="volume,licheng,rotation")
    bench_p.add_argument("--oracle-cap", type=int, default=None)
    bench_p.add_argument("--timing", action="store_true", help="add runtimes (CSV is then not reproducible)")
    bench_p.add_argument("--output", default="bench.csv")
    _add_solver_flags(bench_p)
    bench_p.set_defaults(func=run_bench)

    gen = sub.add_parser("gen", help="write a seeded random instance")
    gen.add_argument("--family", choices=FAMILIES, default="uniform")
    gen.add_argument("--n", type=int, default=10)
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--output", required=True)
    gen.set_defaults(func=run_gen)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)
    try:
        return args.func(args)
    except (PackingError, FileNotFoundError) as exc:
        print(f"❌ {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
