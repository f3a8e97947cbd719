"""Command-line front end.

JSON results go to standard output, CSVs to files, diagnostics to standard
error. Exit codes: 0 success, 2 input/config error, 1 internal error; test
verdicts never affect exit codes. Every file-writing command records a run
manifest next to its outputs; re-running with the manifest's settings
reproduces the outputs byte for byte.
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .barrier import (
    barrier_distribution,
    distinguishability_report,
    distinguishability_test,
)
from .errors import InputError, UnavailableError
from .feedback import (
    FeedbackDataset,
    RatingScale,
    SigmaFallback,
    fit_uncertainty,
    pooled_sigma,
)
from .io import (
    read_feedback,
    read_observations,
    read_predictions,
    write_feedback,
    write_observations,
    write_predictions,
    write_sample_dump,
)
from .metrics import McConfig, rmse_distribution
from .simulate import PopulationSpec, draw_trials, generate_population
from .strategies import (
    DenoiseConfig,
    OmissionConfig,
    Resampler,
    run_strategy_comparison,
)


@dataclass
class RunManifest:
    """Record of one command invocation, written alongside its outputs."""

    command: str
    inputs: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    seed: int | None = None
    tool_version: str = __version__
    outputs: list = field(default_factory=list)

    def write(self, path: Path) -> None:
        payload = {
            "command": self.command,
            "inputs": self.inputs,
            "config": self.config,
            "seed": self.seed,
            "tool_version": self.tool_version,
            "outputs": self.outputs,
        }
        path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _print_json(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _generate_seed() -> int:
    return secrets.randbits(63)


def _cmd_fit(args: argparse.Namespace) -> int:
    fallback = SigmaFallback.parse(args.fallback)
    obs = read_observations(args.obs)
    data = fit_uncertainty(obs, fallback)
    write_feedback(args.out, data)

    try:
        pooled = pooled_sigma(data)
    except UnavailableError:
        pooled = None

    manifest = RunManifest(
        command="fit",
        inputs={"obs": str(args.obs)},
        config={"fallback": args.fallback},
        outputs=[str(args.out)],
    )
    manifest.write(Path(str(args.out) + ".manifest.json"))
    _log(f"wrote {args.out}")
    _print_json({"n": data.N, "pooled_sigma": pooled})
    return 0


def _cmd_distinguish(args: argparse.Namespace) -> int:
    data = read_feedback(args.feedback)
    floor = barrier_distribution(data)
    result = distinguishability_test(args.s1, args.s2, floor)
    _print_json(distinguishability_report(floor, result))
    return 0


def _cmd_rmse_dist(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else _generate_seed()
    cfg = McConfig(sample_count=args.samples, seed=seed, predictor_tau=args.tau)
    data = read_feedback(args.feedback)
    predictions = read_predictions(args.pred)
    dist = rmse_distribution(data, predictions, cfg)

    if args.dump is not None:
        write_sample_dump(args.dump, dist.samples)
        manifest = RunManifest(
            command="rmse-dist",
            inputs={"feedback": str(args.feedback), "pred": str(args.pred)},
            config={"samples": args.samples, "tau": args.tau},
            seed=seed,
            outputs=[str(args.dump)],
        )
        manifest.write(Path(str(args.dump) + ".manifest.json"))
        _log(f"wrote {args.dump}")

    _print_json(
        {
            "mean": dist.mean,
            "variance": dist.variance,
            "sample_count": dist.sample_count,
            "seed": seed,
        }
    )
    return 0


def _cmd_strategies(args: argparse.Namespace) -> int:
    if args.obs is None and args.feedback is None:
        raise InputError("need --obs and/or --feedback")

    observations = read_observations(args.obs) if args.obs is not None else None
    data: FeedbackDataset | None = (
        read_feedback(args.feedback) if args.feedback is not None else None
    )
    predictions = read_predictions(args.pred)

    denoise = None
    if args.denoise_threshold is not None:
        denoise = DenoiseConfig(
            threshold=args.denoise_threshold,
            max_iterations=args.denoise_max_iterations,
            resampler=Resampler(args.denoise_resampler),
            seed=args.denoise_seed,
        )

    omission = OmissionConfig(alpha=args.omit_alpha) if args.omit_alpha is not None else None

    # The redraw policy needs a generating model; an explicit feedback file
    # plays that role, otherwise the fit of the observations stands in.
    truth = data
    if truth is None and denoise is not None and denoise.resampler is Resampler.REDRAW_FROM_MODEL:
        truth = fit_uncertainty(observations)

    reports = run_strategy_comparison(
        predictions,
        observations=observations,
        data=data,
        truth=truth,
        denoise=denoise,
        predictor_tau=args.tau,
        omission=omission,
    )
    _print_json([r.to_json_dict() for r in reports])
    return 0


_SPEC_FIELDS = {
    "n_users",
    "n_items",
    "scale",
    "sigma_lo",
    "sigma_hi",
    "density",
    "seed",
    "bias_lo",
    "bias_hi",
}
_SCALE_FIELDS = {"min_value", "max_value", "discrete_step"}


def _load_population_spec(text: str) -> tuple[PopulationSpec, bool]:
    """Parse a population spec from inline JSON or a JSON file path.

    Returns the spec and whether its seed came from the input (as opposed
    to being generated here).
    """
    candidate = Path(text)
    if not text.lstrip().startswith("{"):
        if not candidate.is_file():
            raise InputError(f"spec file not found: {text}")
        text = candidate.read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"spec is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise InputError("spec must be a JSON object")

    for name in raw:
        if name not in _SPEC_FIELDS:
            raise InputError(f"unknown spec field {name!r}")
    for name in ("n_users", "n_items", "scale", "sigma_lo", "sigma_hi"):
        if name not in raw:
            raise InputError(f"spec is missing required field {name!r}")
    scale_raw = raw["scale"]
    if not isinstance(scale_raw, dict):
        raise InputError("spec field 'scale' must be a JSON object")
    for name in scale_raw:
        if name not in _SCALE_FIELDS:
            raise InputError(f"unknown scale field {name!r}")
    for name in ("min_value", "max_value"):
        if name not in scale_raw:
            raise InputError(f"scale is missing required field {name!r}")

    seed_given = "seed" in raw
    try:
        scale = RatingScale(
            min_value=float(scale_raw["min_value"]),
            max_value=float(scale_raw["max_value"]),
            discrete_step=(
                float(scale_raw["discrete_step"])
                if scale_raw.get("discrete_step") is not None
                else None
            ),
        )
        spec = PopulationSpec(
            n_users=int(raw["n_users"]),
            n_items=int(raw["n_items"]),
            scale=scale,
            sigma_lo=float(raw["sigma_lo"]),
            sigma_hi=float(raw["sigma_hi"]),
            density=float(raw.get("density", 1.0)),
            seed=int(raw["seed"]) if seed_given else _generate_seed(),
            bias_lo=float(raw.get("bias_lo", 0.0)),
            bias_hi=float(raw.get("bias_hi", 0.0)),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"bad spec value: {exc}") from exc
    return spec, seed_given


def _spec_to_config(spec: PopulationSpec) -> dict:
    return {
        "n_users": spec.n_users,
        "n_items": spec.n_items,
        "scale": {
            "min_value": spec.scale.min_value,
            "max_value": spec.scale.max_value,
            "discrete_step": spec.scale.discrete_step,
        },
        "sigma_lo": spec.sigma_lo,
        "sigma_hi": spec.sigma_hi,
        "density": spec.density,
        "bias_lo": spec.bias_lo,
        "bias_hi": spec.bias_hi,
    }


def _cmd_simulate(args: argparse.Namespace) -> int:
    spec, _ = _load_population_spec(args.spec)
    if args.trials < 1:
        raise InputError(f"--trials must be >= 1, got {args.trials}")

    truth = generate_population(spec)
    obs = draw_trials(truth, k=args.trials, discretise=args.discretise, seed=spec.seed)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    obs_path = out_dir / "observations.csv"
    feedback_path = out_dir / "feedback.csv"
    pred_path = out_dir / "predictions.csv"

    write_observations(obs_path, obs)
    write_feedback(feedback_path, truth.dataset)
    write_predictions(pred_path, truth.predictions)

    manifest = RunManifest(
        command="simulate",
        inputs={},
        config={
            "spec": _spec_to_config(spec),
            "trials": args.trials,
            "discretise": args.discretise,
        },
        seed=spec.seed,
        outputs=[str(obs_path), str(feedback_path), str(pred_path)],
    )
    manifest.write(out_dir / "manifest.json")
    for path in (obs_path, feedback_path, pred_path):
        _log(f"wrote {path}")

    _print_json(
        {
            "pairs": truth.dataset.N,
            "trials": args.trials,
            "observation_rows": len(obs),
            "out_dir": str(out_dir),
        }
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uncertain-eval",
        description=(
            "Evaluate accuracy metrics under human rating uncertainty: fit "
            "per-pair spreads, compute the metric noise floor, test score "
            "distinguishability, and compare uncertainty-handling strategies."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit per-pair (mu, sigma) from repeated trials")
    p.add_argument("--obs", required=True, help="observation CSV")
    p.add_argument(
        "--fallback",
        default="pooled",
        help="sigma for single-trial pairs: zero | pooled | fixed:V",
    )
    p.add_argument("--out", required=True, help="feedback CSV to write")
    p.set_defaults(handler=_cmd_fit)

    p = sub.add_parser(
        "distinguish", help="test whether two scores differ under the noise floor"
    )
    p.add_argument("--feedback", required=True, help="feedback CSV")
    p.add_argument("--s1", type=float, required=True)
    p.add_argument("--s2", type=float, required=True)
    p.set_defaults(handler=_cmd_distinguish)

    p = sub.add_parser(
        "rmse-dist", help="Monte Carlo distribution of RMSE under rating spread"
    )
    p.add_argument("--feedback", required=True, help="feedback CSV")
    p.add_argument("--pred", required=True, help="prediction CSV")
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tau", type=float, default=None, help="prediction noise std")
    p.add_argument("--dump", default=None, help="optional sample dump CSV")
    p.set_defaults(handler=_cmd_rmse_dist)

    p = sub.add_parser(
        "strategies", help="run uncertainty-handling strategies and test the effect"
    )
    p.add_argument("--obs", default=None, help="observation CSV")
    p.add_argument("--feedback", default=None, help="feedback CSV")
    p.add_argument("--pred", required=True, help="prediction CSV")
    p.add_argument("--denoise-threshold", type=float, default=None)
    p.add_argument(
        "--denoise-resampler",
        choices=[r.value for r in Resampler],
        default=Resampler.REPLACE_WITH_MEDIAN.value,
    )
    p.add_argument("--denoise-max-iterations", type=int, default=25)
    p.add_argument("--denoise-seed", type=int, default=0)
    p.add_argument("--tau", type=float, default=None, help="prediction noise std")
    p.add_argument("--omit-alpha", type=float, default=None)
    p.set_defaults(handler=_cmd_strategies)

    p = sub.add_parser("simulate", help="generate a synthetic population and trials")
    p.add_argument(
        "--spec", required=True, help="population spec: JSON file path or inline JSON"
    )
    p.add_argument("--trials", type=int, default=5, help="trials per pair")
    p.add_argument("--discretise", action="store_true")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(handler=_cmd_simulate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (InputError, UnavailableError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
