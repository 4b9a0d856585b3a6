# ========================================================= #
import argparse
import logging
import sys
from typing import Optional, Sequence

import numpy as np

from .base import provenance, write_json
from .bench.bench import SweepSpec, report, run_sweep, sensitivity_profile
from .coreset.coreset import CoresetConfig, DEFAULT_C_CONST, build_coreset, uniform_coreset
from .data.io import export_csv, load_csv, running_scaler
from .datagen.generators import GenSpec, generate
from .enums import GeneratorKind, ReportFormat, SamplingMethod, SweepMode
from .objective.objective import ObjectiveContext, svm_objective
from .sensitivity.sensitivity import compute_sensitivities
from .solver.solver import REFERENCE_EPOCHS, SolverConfig, approx_svm, reference_solve
from .streaming.streaming import stream_csv

# ========================================================= #


EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2

VERBOSITY = (logging.WARNING, logging.INFO, logging.DEBUG)


def get_logger():
    return logging.getLogger(__name__)


# ========================================================= #


def _lam(value: str) -> float:
    lam = float(value)

    if not (0 < lam <= 1):
        raise argparse.ArgumentTypeError(f"lambda must be in (0, 1], got {value}")

    return lam


def _positive(value: str) -> int:
    number = int(value)

    if number < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")

    return number


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="root seed of every random choice (default 0)")
    common.add_argument("--lambda", dest="lam", type=_lam, default=1.0, help="regularization in (0, 1] (default 1)")
    common.add_argument("--k", type=_positive, default=None, help="clusters per label (default ceil(log2 n))")
    common.add_argument("--threads", type=_positive, default=1, help="worker threads (default 1)")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug")
    return common


def _data_options(parser: argparse.ArgumentParser, required: bool = True):
    parser.add_argument("--data", required=required, help="input CSV file")
    parser.add_argument("--header", action="store_true", help="the input has a header row")
    parser.add_argument("--label-column", default="-1", help="label column index or name (default: last)")
    parser.add_argument("--weight-column", default=None, help="optional weight column index or name")
    parser.add_argument(
        "--no-standardize", dest="standardize", action="store_false", help="keep raw features (default standardize)"
    )


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="svmcoreset", description="Coresets for regularized linear SVMs")
    commands = parser.add_subparsers(dest="command", metavar="command")
    commands.required = True

    gen = commands.add_parser("gen", parents=[common], help="write a synthetic data set")
    gen.add_argument("--kind", choices=[k.value for k in GeneratorKind], default=GeneratorKind.BLOBS.value)
    gen.add_argument("--n", type=_positive, default=1000)
    gen.add_argument("--d", type=_positive, default=2)
    gen.add_argument("--separation", type=float, default=10.0, help="distance between the blob means")
    gen.add_argument("--out", required=True)

    solve = commands.add_parser("solve", parents=[common], help="train an SVM on the full data")
    _data_options(solve)
    solve.add_argument("--epochs", type=_positive, default=100)
    solve.add_argument("--refine-epochs", type=int, default=None, help="full batch steps after SGD")
    solve.add_argument("--reference", action="store_true", help="use the full batch reference solver")
    solve.add_argument("--out", required=True, help="JSON file for w and the objective")

    sens = commands.add_parser("sensitivity", parents=[common], help="per point sensitivity bounds")
    _data_options(sens)
    sens.add_argument("--epochs", type=_positive, default=100)
    sens.add_argument("--refine-epochs", type=int, default=None, help="full batch steps after SGD")
    sens.add_argument("--xi", type=float, default=None, help="solver accuracy (default: estimated)")
    sens.add_argument("--profile", type=_positive, nargs="*", default=None, help="also profile t at these sizes")
    sens.add_argument("--out", required=True, help="CSV file (id, gamma, q)")

    core = commands.add_parser("coreset", parents=[common], help="build a coreset")
    _data_options(core)
    core.add_argument("--method", choices=[m.value for m in SamplingMethod], default=SamplingMethod.CORESET.value)
    core.add_argument("--epsilon", type=float, default=0.1)
    core.add_argument("--delta", type=float, default=0.1)
    core.add_argument("--m", type=_positive, default=None, help="sample size (default: from epsilon and delta)")
    core.add_argument("--c-const", type=float, default=DEFAULT_C_CONST)
    core.add_argument("--xi", type=float, default=None)
    core.add_argument("--epochs", type=_positive, default=100)
    core.add_argument("--refine-epochs", type=int, default=None, help="full batch steps after SGD")
    core.add_argument("--coalesce", action="store_true", help="merge repeated draws")
    core.add_argument("--out", required=True, help="coreset CSV (id, v)")

    stream = commands.add_parser("stream", parents=[common], help="merge-and-reduce over the input file")
    _data_options(stream)
    stream.add_argument("--method", choices=[m.value for m in SamplingMethod], default=SamplingMethod.CORESET.value)
    stream.add_argument("--leaf", type=_positive, default=512, help="leaf size l, chunks hold 2l rows")
    stream.add_argument("--epsilon", type=float, default=0.1)
    stream.add_argument("--delta", type=float, default=0.1)
    stream.add_argument("--n-estimate", type=int, default=None, help="expected stream length")
    stream.add_argument("--xi", type=float, default=None)
    stream.add_argument("--epochs", type=_positive, default=100)
    stream.add_argument("--refine-epochs", type=int, default=None, help="full batch steps after SGD")
    stream.add_argument("--out", required=True, help="root coreset CSV (id, v)")

    bench = commands.add_parser("bench", parents=[common], help="uniform vs coreset sweeps")
    _data_options(bench)
    bench.add_argument("--mode", choices=[m.value for m in SweepMode], default=SweepMode.OFFLINE.value)
    bench.add_argument("--sizes", type=int, default=15, help="number of geometric sizes M (default 15)")
    bench.add_argument("--size-list", type=_positive, nargs="+", default=None, help="explicit sizes")
    bench.add_argument("--trials", type=_positive, default=10)
    bench.add_argument("--methods", nargs="+", choices=[m.value for m in SamplingMethod], default=None)
    bench.add_argument("--epochs", type=_positive, default=100)
    bench.add_argument("--refine-epochs", type=int, default=None, help="full batch steps after SGD")
    bench.add_argument("--reference-epochs", type=_positive, default=REFERENCE_EPOCHS)
    bench.add_argument("--format", choices=[f.value for f in ReportFormat], default=ReportFormat.CSV.value)
    bench.add_argument("--enforce-dominance", action="store_true")
    bench.add_argument("--enforce-timing", action="store_true")
    bench.add_argument("--out", required=True)

    return parser


# ========================================================= #


def _column(value):
    if value is None:
        return None

    try:
        return int(value)
    except ValueError:
        return value


def _csv_options(args) -> dict:
    return {
        "label_column": _column(args.label_column),
        "header": args.header,
        "weight_column": _column(args.weight_column),
    }


def _load(args):
    return load_csv(args.data, standardized=args.standardize, **_csv_options(args))


def _snapshot(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "verbose"}


def _record(args, out: str, extra: Optional[dict] = None) -> None:
    record = provenance(args.command, _snapshot(args), args.seed)

    if extra:
        record.update(extra)

    write_json(f"{out}.provenance.json", record)


def _solver(args) -> SolverConfig:
    return SolverConfig(
        epochs=getattr(args, "epochs", 100),
        lam=args.lam,
        seed=args.seed,
        refine_epochs=getattr(args, "refine_epochs", None),
    )


# ========================================================= #


def cmd_gen(args) -> int:
    spec = GenSpec(args.kind, args.n, args.d, args.seed, separation=args.separation)
    ds = generate(spec)
    export_csv(ds, args.out)
    _record(args, args.out, {"generator": spec.as_dict(), "dataset": {"n": ds.n, "d": ds.d}})

    return EXIT_OK


def cmd_solve(args) -> int:
    ds = _load(args)
    cfg = _solver(args)

    if args.reference:
        w, value = reference_solve(ds, cfg)
    else:
        w, value = approx_svm(ds, cfg)

    ctx = ObjectiveContext.for_dataset(ds, args.lam)
    write_json(args.out, {"w": w.tolist(), "objective": value, "check": svm_objective(ds, w, ctx)})
    _record(args, args.out)

    return EXIT_OK


def cmd_sensitivity(args) -> int:
    ds = _load(args)
    table = compute_sensitivities(
        ds, lam=args.lam, k=args.k, seed=args.seed, solver=_solver(args), xi=args.xi, max_workers=args.threads
    )
    table.as_frame().to_csv(args.out, index=False, float_format="%.17g")

    extra = {"summary": table.summary(), "xi": table.xi, "solver_objective": table.solver_objective}

    if args.profile:
        extra["profile"] = sensitivity_profile(ds, args.lam, args.k, args.profile, args.seed).to_dict("records")

    _record(args, args.out, extra)

    return EXIT_OK


def cmd_coreset(args) -> int:
    ds = _load(args)

    if args.method == SamplingMethod.UNIFORM.value:
        coreset = uniform_coreset(ds, args.m or ds.n, args.seed)
    else:
        cfg = CoresetConfig(
            epsilon=args.epsilon,
            delta=args.delta,
            lam=args.lam,
            k=args.k,
            m_override=args.m,
            c_const=args.c_const,
            seed=args.seed,
            xi=args.xi,
            solver=_solver(args),
            coalesce=args.coalesce,
            max_workers=args.threads,
        )
        coreset = build_coreset(ds, cfg)

    coreset.to_csv(args.out)
    _record(args, args.out, {"coreset": coreset.metadata()})

    return EXIT_OK


def cmd_stream(args) -> int:
    csv_options = _csv_options(args)

    if args.standardize:
        # first pass: per feature moments with bounded memory
        csv_options["moments"] = running_scaler(args.data, **csv_options)

    cfg = CoresetConfig(
        epsilon=args.epsilon,
        delta=args.delta,
        lam=args.lam,
        k=args.k,
        seed=args.seed,
        xi=args.xi,
        solver=_solver(args),
        max_workers=args.threads,
    )
    root = stream_csv(args.data, args.leaf, cfg, csv_options, n_estimate=args.n_estimate, method=args.method)
    root.to_csv(args.out)
    _record(args, args.out, {"coreset": root.metadata()})

    return EXIT_OK


def cmd_bench(args) -> int:
    ds = _load(args)
    spec = SweepSpec(
        sizes=args.size_list,
        M=args.sizes,
        trials=args.trials,
        methods=args.methods or [m.value for m in SamplingMethod],
        mode=args.mode,
        lam=args.lam,
        k=args.k,
        base_seed=args.seed,
        solver=_solver(args),
        reference_epochs=args.reference_epochs,
        max_workers=args.threads,
        enforce_dominance=args.enforce_dominance,
        enforce_timing=args.enforce_timing,
    )
    result = run_sweep(ds, spec)
    report(result, args.format, args.out)
    _record(args, args.out, {"checks": result.checks, "reference_objective": result.meta["reference_objective"]})

    if not result.passed:
        get_logger().error(f"Enforced sweep checks failed: {', '.join(result.failed_checks)}")
        return EXIT_FAILURE

    return EXIT_OK


COMMANDS = {
    "gen": cmd_gen,
    "solve": cmd_solve,
    "sensitivity": cmd_sensitivity,
    "coreset": cmd_coreset,
    "stream": cmd_stream,
    "bench": cmd_bench,
}


# ========================================================= #


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parses ``argv`` and runs the sub-command.

    :return: 0 on success, 1 on a runtime failure, 2 on a usage error
    """
    parser = build_parser()

    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    level = VERBOSITY[min(args.verbose, len(VERBOSITY) - 1)]
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger().setLevel(level)

    try:
        with np.errstate(over="ignore"):
            return COMMANDS[args.command](args)
    except (ValueError, RuntimeError, OSError) as e:
        get_logger().error(f"{args.command} failed: {e}")
        return EXIT_FAILURE


def main() -> None:
    sys.exit(dispatch())


# ========================================================= #
