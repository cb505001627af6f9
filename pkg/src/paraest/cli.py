"""Command line entry point for the experiment harness."""

from __future__ import annotations

import argparse
import json
import sys

from .accumulation import parse_pset
from .estimators import ConstantsConfig
from .harness import ExperimentConfig, run_accumulation_study, run_experiment

_CONSTANT_KEYS = {"c_clem", "c_elip", "c_equiv", "c_pf", "lam", "alpha_override"}


def _parse_levels(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition("..")
    return int(lo), int(hi or lo)


def _parse_constants(text: str) -> ConstantsConfig:
    data = json.loads(text)
    bad = set(data) - _CONSTANT_KEYS
    if bad:
        raise argparse.ArgumentTypeError(f"unknown constants keys: {sorted(bad)}")
    return ConstantsConfig(**data)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="paraest",
                                description="Parabolic solver and error-estimation studies")
    p.add_argument("--benchmark", choices=["sinusoidal", "polynomial", "zero"],
                   default="sinusoidal")
    p.add_argument("--scheme", choices=["be", "cn"], default="be")
    p.add_argument("--tau", default="hsq",
                   help="hsq | h | hroot | fixed=<value>")
    p.add_argument("--levels", type=_parse_levels, default=(2, 5),
                   metavar="LO..HI")
    p.add_argument("--pset", type=parse_pset, default=None,
                   help="comma list of exponents, inf allowed")
    p.add_argument("--constants", type=_parse_constants, default=None,
                   help='JSON, e.g. {"c_clem": 1.0, "lam": 0.25}')
    p.add_argument("--alpha-preset", choices=["paper51", "derived"],
                   default="derived")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="out")
    p.add_argument("--samples-per-step", type=int, default=3)
    p.add_argument("--study", choices=["pde", "accumulation"], default="pde")
    p.add_argument("--final-time", type=float, default=None,
                   help="override the benchmark horizon")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    tau_rule = args.tau.replace("fixed=", "fixed:")
    kwargs = dict(benchmark=args.benchmark, scheme=args.scheme, tau_rule=tau_rule,
                  level_lo=args.levels[0], level_hi=args.levels[1],
                  alpha_preset=args.alpha_preset, seed=args.seed,
                  out_dir=args.out, samples_per_step=args.samples_per_step,
                  study=args.study, final_time=args.final_time)
    if args.pset is not None:
        kwargs["pset"] = args.pset
    if args.constants is not None:
        kwargs["constants"] = args.constants
    config = ExperimentConfig(**kwargs)

    if args.study == "accumulation":
        result = run_accumulation_study(config)
    else:
        result = run_experiment(config)
    json.dump({"config_hash": result["config_hash"], "paths": result["paths"]},
              sys.stdout, indent=2)
    print()
    return 0


if __name__ == "__main__":
    sys.exit(main())
