"""Command line interface.

    flipcal synth     write a synthetic samples file and prediction-run file
    flipcal evaluate  average runs, apply pipelines, write metric reports
    flipcal diagram   reliability-diagram table and SVG from report files
    flipcal sweep     Method 1 rejection/accuracy trade-off over a beta grid

Any option may also come from a JSON object given with ``--config``; options
on the command line win. Exit codes: 0 ok, 2 input error, 3 configuration
error, 4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from flipcal import __version__
from flipcal import io as fio
from flipcal.augment import augment_dataset
from flipcal.core import PredictionTensor
from flipcal.diagram import bins_table, render_svg
from flipcal.ensemble import DEFAULT_MC_RUNS, ingest_runs, mc_average
from flipcal.errors import ConfigError, FlipcalError, InputError
from flipcal.evaluate import evaluate_pipelines
from flipcal.fallback import TrainConfig, load_external, train_builtin
from flipcal.methods import (
    DEFAULT_BETA,
    DEFAULT_SWEEP_RESOLUTION,
    PIPELINES,
    PipelineConfig,
    beta_grid,
    beta_sweep,
)
from flipcal.metrics import DEFAULT_BIN_WIDTH, bin_edges
from flipcal.synth import ScenarioConfig, generate_samples, predict_runs


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flipcal", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"flipcal {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("--config", type=Path, help="JSON file with default option values")

    defaults = ScenarioConfig()
    p = sub.add_parser("synth", help="generate a synthetic scenario")
    add_config(p)
    p.add_argument("--out-dir", type=Path, default=Path("."))
    p.add_argument("--n-samples", type=int, default=defaults.n_samples)
    p.add_argument("--n-train", type=int, default=None,
                   help="size of the fallback training split (default: n-samples, 0 to skip)")
    p.add_argument("--sequence-length", type=int, default=defaults.sequence_length)
    p.add_argument("--n-variables", type=int, default=defaults.n_variables)
    p.add_argument("--balance", type=float, default=defaults.class_balance,
                   help="probability of class 1")
    p.add_argument("--separation", type=float, default=defaults.separation)
    p.add_argument("--ar-coef", type=float, default=defaults.ar_coef)
    p.add_argument("--recency", type=float, default=defaults.recency)
    p.add_argument("--variant-noise", type=float, default=defaults.variant_noise)
    p.add_argument("--noise-scale", type=float, default=defaults.noise_scale)
    p.add_argument("--miscalibration", type=float, default=defaults.miscalibration,
                   help="sharpening exponent; >1 over-confident, <1 under-confident")
    p.add_argument("--mc-runs", type=int, default=DEFAULT_MC_RUNS)
    p.add_argument("--seed", type=int, default=defaults.seed)
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("evaluate", help="score pipelines on prediction runs")
    add_config(p)
    p.add_argument("--samples", type=Path, help="samples file (provides labels)")
    p.add_argument("--runs", type=Path, help="prediction-run file")
    p.add_argument("--pipeline", dest="pipelines", action="append",
                   help=f"one of {', '.join(PIPELINES)} or 'all' (repeatable; default all)")
    p.add_argument("--beta", type=float, default=DEFAULT_BETA)
    p.add_argument("--bin-width", type=float, default=DEFAULT_BIN_WIDTH)
    p.add_argument("--mc-runs", type=int, default=None,
                   help="average only the first T runs (default: all runs in the file)")
    p.add_argument("--fallback", choices=("builtin", "external"), default="builtin")
    p.add_argument("--fallback-train", type=Path, help="samples file to train the builtin fallback")
    p.add_argument("--fallback-file", type=Path, help="external fallback predictions file")
    p.add_argument("--learning-rate", type=float, default=TrainConfig.learning_rate)
    p.add_argument("--iterations", type=int, default=TrainConfig.iterations)
    p.add_argument("--l2", type=float, default=TrainConfig.l2)
    p.add_argument("--seed", type=int, default=TrainConfig.seed)
    p.add_argument("--out", type=Path, default=Path("report"),
                   help="output prefix; writes PREFIX.json and PREFIX.txt")
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("diagram", help="render reliability diagrams from reports")
    add_config(p)
    p.add_argument("--report", dest="reports", type=Path, action="append",
                   help="report JSON file (repeatable)")
    p.add_argument("--pipeline", dest="pipelines", action="append",
                   help="only plot these pipelines (repeatable)")
    p.add_argument("--title", default=None)
    p.add_argument("--out", type=Path, default=Path("diagram"),
                   help="output prefix; writes PREFIX.txt and PREFIX.svg")
    p.set_defaults(handler=cmd_diagram)

    p = sub.add_parser("sweep", help="Method 1 beta sweep")
    add_config(p)
    p.add_argument("--samples", type=Path)
    p.add_argument("--runs", type=Path)
    p.add_argument("--betas", default=None, help="comma-separated beta values")
    p.add_argument("--resolution", type=float, default=DEFAULT_SWEEP_RESOLUTION)
    p.add_argument("--mc-runs", type=int, default=None)
    p.add_argument("--out", type=Path, default=Path("sweep.csv"))
    p.set_defaults(handler=cmd_sweep)
    return parser


def _options(subparser: argparse.ArgumentParser) -> dict[str, argparse.Action]:
    """Config keys accepted for a command: long flag names and argparse dests."""
    out = {}
    for action in subparser._actions:
        if action.dest in ("help", "config"):
            continue
        out[action.dest] = action
        for flag in action.option_strings:
            if flag.startswith("--"):
                out[flag[2:].replace("-", "_")] = action
    return out


def _load_config(path: Path, subparser: argparse.ArgumentParser) -> dict:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path}: invalid JSON ({exc.msg})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path}: expected a JSON object")
    known = _options(subparser)
    out = {}
    for key, value in data.items():
        action = known.get(key.replace("-", "_"))
        if action is None:
            raise ConfigError(f"config {path}: unknown option {key!r}")
        if isinstance(action, argparse._AppendAction) and not isinstance(value, list):
            value = [value]
        if action.type is not None and value is not None:
            convert = action.type
            try:
                value = [convert(v) for v in value] if isinstance(value, list) else convert(value)
            except (TypeError, ValueError):
                raise ConfigError(f"config {path}: bad value for {key!r}: {value!r}") from None
        if action.choices is not None and value not in action.choices:
            raise ConfigError(f"config {path}: {key!r} must be one of {', '.join(action.choices)}")
        out[action.dest] = value
    return out


def _explicit(subparser: argparse.ArgumentParser, argv: list[str]) -> set[str]:
    """Dests given on the command line (parsed with every default suppressed)."""
    saved = {a: a.default for a in subparser._actions}
    try:
        for a in subparser._actions:
            a.default = argparse.SUPPRESS
        return set(vars(subparser.parse_args(argv)))
    finally:
        for a, default in saved.items():
            a.default = default


def _subparser(parser: argparse.ArgumentParser, command: str) -> argparse.ArgumentParser:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise AssertionError("no subcommands")


def _require(args, *names: str) -> None:
    for name in names:
        if getattr(args, name) is None:
            raise ConfigError(f"missing required option --{name.replace('_', '-')}")


# commands


def cmd_synth(args) -> int:
    cfg = ScenarioConfig(
        n_samples=args.n_samples,
        sequence_length=args.sequence_length,
        n_variables=args.n_variables,
        class_balance=args.balance,
        separation=args.separation,
        ar_coef=args.ar_coef,
        recency=args.recency,
        variant_noise=args.variant_noise,
        noise_scale=args.noise_scale,
        miscalibration=args.miscalibration,
        mc_runs=args.mc_runs,
        seed=args.seed,
    )
    n_train = cfg.n_samples if args.n_train is None else args.n_train
    if n_train < 0:
        raise ConfigError("--n-train must be non-negative")
    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    samples = generate_samples(cfg)
    tensors = predict_runs(augment_dataset(samples), cfg)
    fio.write_samples(out / "samples.csv", samples)
    fio.write_runs(out / "runs.csv", tensors)
    written = ["samples.csv", "runs.csv"]
    if n_train:
        from dataclasses import replace

        train = generate_samples(replace(cfg, n_samples=n_train), split="train")
        fio.write_samples(out / "train_samples.csv", train)
        written.append("train_samples.csv")
    print(f"wrote {', '.join(str(out / w) for w in written)}")
    return 0


def _load_averaged(samples_path: Path, runs_path: Path, mc_runs: int | None):
    samples = fio.read_samples(samples_path)
    by_id = {s.id: s for s in samples}
    tensors = ingest_runs(fio.read_run_rows(runs_path), known_ids=by_id)
    missing = set(by_id) - {t.sample_id for t in tensors}
    if missing:
        raise InputError(f"{len(missing)} samples have no prediction runs, e.g. {sorted(missing)[0]!r}")
    if mc_runs is not None:
        if mc_runs < 1:
            raise ConfigError("--mc-runs must be positive")
        available = tensors[0].n_runs
        if mc_runs > available:
            raise ConfigError(f"--mc-runs {mc_runs} exceeds the {available} runs in {runs_path}")
        tensors = [PredictionTensor(t.sample_id, t.runs[:mc_runs]) for t in tensors]
    return samples, by_id, [mc_average(t) for t in tensors]


def _pipeline_names(requested) -> list[str]:
    if not requested or "all" in requested:
        return list(PIPELINES)
    unknown = [p for p in requested if p not in PIPELINES]
    if unknown:
        raise ConfigError(f"unknown pipeline {unknown[0]!r}; choose from {', '.join(PIPELINES)}")
    return list(dict.fromkeys(requested))


def cmd_evaluate(args) -> int:
    _require(args, "samples", "runs")
    names = _pipeline_names(args.pipelines)
    bin_edges(args.bin_width)
    config = PipelineConfig(beta=args.beta)
    samples, by_id, averaged = _load_averaged(args.samples, args.runs, args.mc_runs)

    model = None
    if any("fallback" in PIPELINES[n] for n in names):
        if args.fallback == "external":
            _require(args, "fallback_file")
            model = load_external(fio.read_external_rows(args.fallback_file))
        else:
            if args.fallback_train is None:
                raise ConfigError("the builtin fallback needs --fallback-train (a samples file)")
            train = fio.read_samples(args.fallback_train)
            model = train_builtin(
                train,
                TrainConfig(args.learning_rate, args.iterations, args.l2, args.seed),
            )

    labels = {s.id: s.label for s in samples}
    entries = evaluate_pipelines(averaged, labels, names, config, args.bin_width, model, by_id)
    prefix = args.out
    if prefix.parent != Path("."):
        prefix.parent.mkdir(parents=True, exist_ok=True)
    fio.write_reports_json(prefix.with_name(prefix.name + ".json"), entries)
    fio.write_reports_text(prefix.with_name(prefix.name + ".txt"), entries)
    print(fio.dumps_reports_text(entries).split("\n\n")[0])
    return 0


def cmd_diagram(args) -> int:
    _require(args, "reports")
    entries = []
    for path in args.reports:
        entries += [(name, report) for name, report, _ in fio.read_reports_json(path)]
    if args.pipelines:
        entries = [(n, r) for n, r in entries if n in set(args.pipelines)]
    if not entries:
        raise InputError("no reports left to draw")
    prefix = args.out
    if prefix.parent != Path("."):
        prefix.parent.mkdir(parents=True, exist_ok=True)
    txt = prefix.with_name(prefix.name + ".txt")
    svg = prefix.with_name(prefix.name + ".svg")
    txt.write_text(bins_table(entries), encoding="utf-8", newline="\n")
    svg.write_text(render_svg(entries, args.title), encoding="utf-8", newline="\n")
    print(f"wrote {txt}, {svg}")
    return 0


def _parse_betas(text: str) -> list[float]:
    try:
        return [float(b) for b in text.split(",") if b.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse beta list {text!r}") from None


def cmd_sweep(args) -> int:
    _require(args, "samples", "runs")
    if args.betas is None:
        betas = beta_grid(args.resolution)
    elif isinstance(args.betas, list):
        betas = [float(b) for b in args.betas]
    else:
        betas = _parse_betas(args.betas)
    samples, _, averaged = _load_averaged(args.samples, args.runs, args.mc_runs)
    rows = beta_sweep(averaged, {s.id: s.label for s in samples}, betas)
    if args.out.parent != Path("."):
        args.out.parent.mkdir(parents=True, exist_ok=True)
    fio.write_sweep(args.out, rows)
    print(f"wrote {args.out} ({len(rows)} rows)")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
        if args.config is not None:
            sub = _subparser(parser, args.command)
            given = _explicit(sub, argv[argv.index(args.command) + 1:])
            for dest, value in _load_config(args.config, sub).items():
                if dest not in given:
                    setattr(args, dest, value)
        return args.handler(args)
    except FlipcalError as exc:
        print(f"flipcal: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
