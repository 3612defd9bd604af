"""
Command line interface: ``srframe synth | solve | eval | sweep``.
"""

import argparse
import sys
from pathlib import Path

from loguru import logger
from pydantic import ValidationError

from .formats.dataset_io import MANIFEST_NAME, load_dataset
from .formats.results import DIAGNOSTICS_FILE, load_results, save_results
from .method.metrics import evaluate
from .method.parameter_study import PARAMETERS, ParameterStudy
from .method.super_resolution import SuperResolution
from .models.config import SolverConfig
from .preprocessing.scene_generator import SynthSpec, generate_dataset
from .utils.errors import SolverDivergenceError, SrFrameError

FLOAT_FORMAT = "%.17g"


def _add_solver_arguments(parser: argparse.ArgumentParser):
    defaults = SolverConfig()
    parser.add_argument("--tau-tilde", type=float, default=defaults.tau_tilde, help="unitless depth prior weight")
    parser.add_argument("--lambda", dest="lam", type=float, default=defaults.lam, help="Cauchy scale")
    parser.add_argument("--levels", type=int, default=defaults.levels, help="pyramid levels")
    parser.add_argument("--frames", type=int, default=defaults.frames, help="frames to use, at most")
    parser.add_argument("--tol", type=float, default=defaults.tol, help="relative energy tolerance")
    parser.add_argument("--max-sweeps", type=int, default=defaults.max_sweeps, help="sweep cap per level")
    parser.add_argument("--n-jobs", type=int, default=defaults.n_jobs, help="worker threads")
    parser.add_argument("--progress", action="store_true", help="show progress bars")


def _solver_config(args: argparse.Namespace) -> SolverConfig:
    return SolverConfig(
        lam=args.lam,
        tau_tilde=args.tau_tilde,
        levels=args.levels,
        frames=args.frames,
        tol=args.tol,
        max_sweeps=args.max_sweeps,
        n_jobs=args.n_jobs,
        show_progress=args.progress,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="srframe", description="Depth super-resolution and multi-view photometric stereo"
    )
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    synth = commands.add_parser("synth", help="render a synthetic dataset")
    synth.add_argument("--spec", type=Path, default=None, help="key-value scene file (default scene if omitted)")
    synth.add_argument("--out", type=Path, required=True, help="output directory")
    synth.add_argument("--seed", type=int, default=None, help="noise seed, overrides noise.seed")
    synth.add_argument("--n-jobs", type=int, default=1, help="worker threads")

    solve = commands.add_parser("solve", help="reconstruct depth, albedo, lighting and poses")
    solve.add_argument("--dataset", type=Path, required=True, help="dataset manifest")
    solve.add_argument("--out", type=Path, required=True, help="output directory")
    _add_solver_arguments(solve)

    evaluate_parser = commands.add_parser("eval", help="compare a reconstruction with ground truth")
    evaluate_parser.add_argument("--est", type=Path, required=True, help="directory written by solve")
    evaluate_parser.add_argument("--gt", type=Path, required=True, help="dataset directory or manifest")
    evaluate_parser.add_argument("--report", type=Path, required=True, help="JSON report file")

    sweep = commands.add_parser("sweep", help="accuracy as the frame count or the prior weight varies")
    sweep.add_argument("--param", choices=PARAMETERS, required=True)
    sweep.add_argument("--values", type=float, nargs="+", required=True)
    sweep.add_argument("--dataset", type=Path, required=True, help="dataset manifest with ground truth")
    sweep.add_argument("--out", type=Path, required=True, help="CSV file")
    _add_solver_arguments(sweep)
    return parser


def _manifest_path(path: Path) -> Path:
    return path / MANIFEST_NAME if path.is_dir() else path


def run_synth(args: argparse.Namespace) -> int:
    spec = SynthSpec() if args.spec is None else SynthSpec.from_file(args.spec)
    manifest = generate_dataset(spec, args.out, seed=args.seed, n_jobs=args.n_jobs)
    print(manifest)
    return 0


def run_solve(args: argparse.Namespace) -> int:
    dataset = load_dataset(_manifest_path(args.dataset))
    method = SuperResolution(dataset=dataset, config=_solver_config(args))
    try:
        estimate = method.run()
    except SolverDivergenceError as error:
        if error.state is not None:
            save_results(error.state, args.out, method.records)
        else:
            args.out.mkdir(parents=True, exist_ok=True)
            with open(args.out / DIAGNOSTICS_FILE, "w") as f:
                for record in method.records:
                    f.write(record.model_dump_json() + "\n")
        logger.error(f"Solver failed at level {error.level}: {error}; diagnostics in {args.out / DIAGNOSTICS_FILE}")
        return 1
    save_results(estimate, args.out, method.records)
    return 0


def run_eval(args: argparse.Namespace) -> int:
    estimate = load_results(args.est)
    dataset = load_dataset(_manifest_path(args.gt))
    if dataset.ground_truth is None:
        raise SrFrameError(f"{args.gt} carries no ground truth")
    report = evaluate(estimate.depth, dataset.ground_truth.depth, estimate.intrinsics, dataset.mask)
    args.report.parent.mkdir(parents=True, exist_ok=True)
    args.report.write_text(report.model_dump_json(indent=2) + "\n")
    logger.info(f"MAE {report.mae_deg:.4f} deg, RMSE {report.rmse:.6g} over {report.rmse_pixels} pixels")
    return 0


def run_sweep(args: argparse.Namespace) -> int:
    dataset = load_dataset(_manifest_path(args.dataset))
    values = [int(value) for value in args.values] if args.param == "n" else args.values
    table = ParameterStudy(dataset=dataset, config=_solver_config(args)).run(args.param, values)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(args.out, index=False, float_format=FLOAT_FORMAT)
    return 0


COMMANDS = {"synth": run_synth, "solve": run_solve, "eval": run_eval, "sweep": run_sweep}


def main(argv: list[str] | None = None) -> int:
    """Runs the CLI; returns 0 on success, 1 on failure and 2 on usage errors."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as error:
        return int(error.code or 0)

    logger.remove()
    logger.add(sys.stderr, level="DEBUG" if args.verbose else "INFO")
    try:
        return COMMANDS[args.command](args)
    except (SrFrameError, ValidationError) as error:
        logger.error(str(error))
        return 1


if __name__ == "__main__":
    sys.exit(main())
