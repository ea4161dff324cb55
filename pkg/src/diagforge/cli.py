"""Command-line front end: one subcommand per experiment plus corpus
management.  Flags can come from the command line or a TOML file with the
same keys (explicit flags win)."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib  # type: ignore[no-redef]

from .harness import (
    DEFAULT_FUEL,
    EXPERIMENT_NAMES,
    ConfigError,
    ExperimentConfig,
    exit_code,
    run_experiment,
    write_corpus,
)


def _parse_seeds(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diagforge",
        description="Seeded experiments probing halting verifiers with "
        "self-referential programs.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    for name in EXPERIMENT_NAMES:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--verifier", help="verifier under test, kind[:arg[:arg]]")
        p.add_argument("--seed", type=_parse_seeds, help="seed or comma-separated seeds")
        p.add_argument("--fuel", type=int, help=f"machine fuel (default {DEFAULT_FUEL})")
        p.add_argument("--T", dest="t", type=int, help="time limit for bounded demos")
        p.add_argument("--trials", type=int, help="Monte-Carlo trial count")
        p.add_argument("--out", help="write the JSON report here")
        p.add_argument("--config", help="TOML file providing any of the flags above")

    corpus = sub.add_parser("build-corpus", help="generate the certified program corpus")
    corpus.add_argument("--size", type=int, default=60)
    corpus.add_argument("--seed", type=int, default=0)
    corpus.add_argument("--out", required=True)
    return parser


def _load_config_file(path: str) -> dict:
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    known = {"verifier", "seed", "seeds", "fuel", "T", "trials", "out"}
    unknown = set(data) - known - {"experiment"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return data


def _seeds_from_config(value) -> tuple[int, ...]:
    if isinstance(value, int):
        return (value,)
    if isinstance(value, str):
        return _parse_seeds(value)
    if isinstance(value, list):
        return tuple(int(v) for v in value)
    raise ConfigError(f"bad seeds value {value!r}")


def _experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    file_values = _load_config_file(args.config) if args.config else {}
    seeds = args.seed
    if seeds is None and ("seed" in file_values or "seeds" in file_values):
        seeds = _seeds_from_config(file_values.get("seed", file_values.get("seeds")))
    return ExperimentConfig(
        experiment=args.subcommand,
        verifier=args.verifier or file_values.get("verifier"),
        seeds=seeds or (0,),
        fuel=args.fuel or file_values.get("fuel") or DEFAULT_FUEL,
        t=args.t if args.t is not None else file_values.get("T"),
        trials=args.trials if args.trials is not None else file_values.get("trials"),
        out=args.out or file_values.get("out"),
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    if args.subcommand == "build-corpus":
        try:
            corpus = write_corpus(args.size, args.seed, args.out)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        print(
            f"wrote {len(corpus)} programs to {args.out} "
            f"(halting fraction {corpus.halting_fraction():.3f})"
        )
        return 0

    try:
        cfg = _experiment_config(args)
        report = run_experiment(cfg)
    except (ConfigError, tomllib.TOMLDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    print(f"{cfg.experiment}: {report.summary.value}")
    if cfg.out:
        print(f"report written to {Path(cfg.out)}")
    return exit_code(report)


if __name__ == "__main__":
    sys.exit(main())
