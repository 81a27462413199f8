"""Command-line front end.

Exit codes: 0 success / universal entangler certified, 2 bad input,
3 no universal entangler (or witness not found for ``witness``),
4 inconclusive.
"""
from __future__ import annotations

import argparse
import sys
import time
from dataclasses import asdict
from pathlib import Path

from . import io as fio
from .overlap import OptimizerConfig, Verdict, certify, fresh_seed, max_product_overlap, resolve_threads
from .search import DimsNotEligible, SearchBudget, haar_study, search_entangler
from .segre import exists_universal_entangler, is_product
from .states import (
    BipartiteDims,
    entropy_entanglement,
    geometric_entanglement,
    schmidt_coefficients,
    schmidt_rank,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NEGATIVE = 3
EXIT_INCONCLUSIVE = 4

VERDICT_EXIT = {
    Verdict.UNIVERSAL_ENTANGLER_NUMERICAL: EXIT_OK,
    Verdict.NOT_UNIVERSAL_WITNESS_FOUND: EXIT_NEGATIVE,
    Verdict.INCONCLUSIVE: EXIT_INCONCLUSIVE,
}


class UsageError(Exception):
    pass


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer: {text!r}")
    return value


def _add_output(p, formats=("json",)):
    p.add_argument("--out", type=Path, help="write the report here instead of stdout")
    p.add_argument("--format", choices=formats, default="json")
    p.add_argument("--omit-timing", action="store_true",
                   help="write wall_time_ms as null (byte-stable reports)")


def _add_optimizer(p, restarts=64):
    p.add_argument("--restarts", type=positive_int, default=restarts)
    p.add_argument("--max-iters", type=positive_int, default=10_000)
    p.add_argument("--conv-tol", type=float, default=1e-12)
    p.add_argument("--tol", type=float, default=1e-6, help="witness tolerance on 1 - lambda")
    p.add_argument("--gap-tol", type=float, default=1e-4)
    p.add_argument("--seed", type=int, help="drawn from system entropy when omitted")
    p.add_argument("--threads", type=positive_int,
                   help="worker cap (falls back to $ENTANGLER_THREADS, then 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entangler", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exists", help="decide whether a universal entangler exists for m x n")
    p.add_argument("m", type=positive_int)
    p.add_argument("n", type=positive_int)
    _add_output(p)

    for name, text in (("certify", "certify a unitary as a universal entangler"),
                       ("witness", "search for a product state mapped to a product state")):
        p = sub.add_parser(name, help=text)
        p.add_argument("file", type=Path)
        _add_optimizer(p)
        _add_output(p, ("json", "csv"))

    p = sub.add_parser("search", help="search for a unitary with large guaranteed entanglement")
    p.add_argument("m", type=positive_int)
    p.add_argument("n", type=positive_int)
    p.add_argument("--candidates", type=positive_int, default=50)
    p.add_argument("--hill-steps", type=int, default=100)
    p.add_argument("--step-scale", type=float, default=0.05)
    p.add_argument("--search-restarts", type=positive_int, default=16)
    p.add_argument("--final-restarts", type=positive_int, default=256)
    p.add_argument("--confirm-top", type=positive_int, default=5)
    p.add_argument("--unitary-out", type=Path, help="where to save the winning unitary")
    _add_optimizer(p)
    _add_output(p)

    p = sub.add_parser("haar-study", help="certify many Haar-random unitaries")
    p.add_argument("m", type=positive_int)
    p.add_argument("n", type=positive_int)
    p.add_argument("--samples", type=positive_int, default=100)
    _add_optimizer(p)
    _add_output(p, ("json", "csv"))

    p = sub.add_parser("schmidt", help="Schmidt spectrum and entanglement of a state file")
    p.add_argument("statefile", type=Path)
    p.add_argument("m", type=positive_int)
    p.add_argument("n", type=positive_int)
    _add_output(p)
    return parser


def _optimizer_config(args) -> OptimizerConfig:
    seed = args.seed if args.seed is not None else fresh_seed()
    try:
        return OptimizerConfig(
            restarts=args.restarts,
            max_iters=args.max_iters,
            conv_tol=args.conv_tol,
            witness_tol=args.tol,
            gap_tol=args.gap_tol,
            seed=seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(args, report: fio.Report, csv_rows=None) -> None:
    if args.omit_timing:
        report.wall_time_ms = None
    if getattr(args, "format", "json") == "csv":
        text = fio.study_csv(csv_rows)
    else:
        text = report.emit()
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text)


def cmd_exists(args) -> tuple[fio.Report, int, None]:
    verdict = exists_universal_entangler(BipartiteDims(args.m, args.n))
    report = fio.Report(command={"name": "exists", "m": args.m, "n": args.n},
                        config={}, result=verdict.as_dict())
    return report, EXIT_OK if verdict.exists else EXIT_NEGATIVE, None


def cmd_certify(args) -> tuple[fio.Report, int, list]:
    gate = fio.load_unitary(args.file)
    cfg = _optimizer_config(args)
    rep = certify(gate, cfg, threads=args.threads)
    result = {"m": gate.dims.m, "n": gate.dims.n}
    result.update(fio.certification_to_dict(rep))
    report = fio.Report(command={"name": "certify", "file": str(args.file)},
                        config=cfg.to_dict(), result=result)
    rows = [(0, cfg.seed, rep.overlap, rep.verdict.value)]
    return report, VERDICT_EXIT[rep.verdict], rows


def cmd_witness(args) -> tuple[fio.Report, int, list]:
    gate = fio.load_unitary(args.file)
    cfg = _optimizer_config(args)
    est = max_product_overlap(gate, cfg, threads=args.threads)
    out = gate.apply(est.input_witness)
    found = est.overlap >= 1 - cfg.witness_tol
    result = {"m": gate.dims.m, "n": gate.dims.n, "witness_found": found}
    result.update(fio.estimate_to_dict(est))
    result["output_schmidt_coefficients"] = [float(x) for x in schmidt_coefficients(out)]
    report = fio.Report(command={"name": "witness", "file": str(args.file)},
                        config=cfg.to_dict(), result=result)
    verdict = "NOT_UNIVERSAL_WITNESS_FOUND" if found else "NO_WITNESS_FOUND"
    return report, EXIT_OK if found else EXIT_NEGATIVE, [(0, cfg.seed, est.overlap, verdict)]


def cmd_search(args) -> tuple[fio.Report, int, None]:
    dims = BipartiteDims(args.m, args.n)
    cfg = _optimizer_config(args)
    try:
        budget = SearchBudget(args.candidates, args.hill_steps, args.step_scale,
                              args.search_restarts, args.final_restarts, args.confirm_top)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    res = search_entangler(dims, cfg, budget, seed=cfg.seed, threads=args.threads)
    result = {
        "m": dims.m,
        "n": dims.n,
        "best_guaranteed_entanglement": res.best_guaranteed_entanglement,
        "search_estimate": res.search_estimate,
        "accepted_steps": res.accepted_steps,
        "trajectory": [[s, v] for s, v in res.trajectory],
        "final_certification": fio.certification_to_dict(res.final_report),
        "best_unitary": fio.dump_matrix_doc(res.best_unitary.matrix, dims),
    }
    config = {"optimizer": cfg.to_dict(), "budget": asdict(budget),
              "final_optimizer": res.config.to_dict()}
    report = fio.Report(command={"name": "search", "m": dims.m, "n": dims.n},
                        config=config, result=result)
    unitary_out = args.unitary_out
    if unitary_out is None and args.out is not None:
        unitary_out = args.out.with_suffix(".unitary.json")
    if unitary_out is not None:
        fio.save_unitary(unitary_out, res.best_unitary)
    return report, VERDICT_EXIT[res.final_report.verdict], None


def cmd_haar_study(args) -> tuple[fio.Report, int, list]:
    dims = BipartiteDims(args.m, args.n)
    cfg = _optimizer_config(args)
    res = haar_study(dims, args.samples, cfg, seed=cfg.seed, threads=args.threads)
    report = fio.Report(command={"name": "haar-study", "m": dims.m, "n": dims.n,
                                 "samples": args.samples},
                        config=cfg.to_dict(), result=res.to_dict())
    rows = list(zip(range(res.samples), res.sub_seeds, res.lambda_values, res.verdicts))
    return report, EXIT_OK, rows


def cmd_schmidt(args) -> tuple[fio.Report, int, None]:
    state = fio.load_state(args.statefile)
    if (state.dims.m, state.dims.n) != (args.m, args.n):
        raise UsageError(f"state file is {state.dims.m}x{state.dims.n}, "
                         f"command line says {args.m}x{args.n}")
    result = {
        "m": args.m,
        "n": args.n,
        "schmidt_coefficients": [float(x) for x in schmidt_coefficients(state)],
        "schmidt_rank": schmidt_rank(state),
        "is_product": is_product(state),
        "entropy_bits": entropy_entanglement(state),
        "geometric_entanglement": geometric_entanglement(state),
    }
    report = fio.Report(command={"name": "schmidt", "file": str(args.statefile)},
                        config={}, result=result)
    return report, EXIT_OK, None


COMMANDS = {
    "exists": cmd_exists,
    "certify": cmd_certify,
    "witness": cmd_witness,
    "search": cmd_search,
    "haar-study": cmd_haar_study,
    "schmidt": cmd_schmidt,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    start = time.perf_counter()
    try:
        if hasattr(args, "threads"):
            args.threads = resolve_threads(args.threads)
        report, code, rows = COMMANDS[args.command](args)
    except (fio.FormatError, UsageError, OSError, ValueError) as exc:
        if isinstance(exc, DimsNotEligible):
            print(f"entangler: {exc}", file=sys.stderr)
            return EXIT_NEGATIVE
        print(f"entangler: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report.wall_time_ms = (time.perf_counter() - start) * 1000.0
    _emit(args, report, rows)
    return code


if __name__ == "__main__":
    sys.exit(main())
