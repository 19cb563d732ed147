"""Command-line entry point for running multileaving experiments.

Flags override values from an optional ``--config`` key-value file,
which in turn overrides built-in defaults. The config file accepts the
same keys as the long flags (underscored), plus click-model table
overrides such as ``navigational.p_click = 0.05,0.3,0.5,0.7,0.95`` and
``random.p_click = 0.5``.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from typing import Dict, List, Optional

from .clicks import DEFAULT_CLICK_MODELS, ClickModelParams
from .harness import ExperimentConfig, run_experiment, write_csv
from .multileaving import MultileaveConfig


def _parse_floats(text: str) -> List[float]:
    return [float(x) for x in text.split(",") if x.strip() != ""]


def parse_config_file(path: str) -> Dict[str, str]:
    """Read ``key = value`` lines; '#' starts a comment."""
    values: Dict[str, str] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, val = line.split("=", 1)
            values[key.strip()] = val.strip()
    return values


def _apply_click_overrides(
    models: Dict[str, ClickModelParams], key: str, val: str
) -> bool:
    if "." not in key:
        return False
    name, field = key.split(".", 1)
    if name not in models or field not in ("p_click", "p_stop"):
        return False
    probs = _parse_floats(val)
    base = models[name]
    if len(probs) == 1 and field == "p_click":
        probs = probs * len(base.p_click)
    kwargs = {field: tuple(probs)}
    models[name] = replace(base, **kwargs)
    return True


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="multileave-sim",
        description="Simulate multileaved ranker comparisons with click feedback",
    )
    src = p.add_mutually_exclusive_group()
    src.add_argument("--dataset", help="SVMlight/LETOR dataset file")
    src.add_argument(
        "--synthetic",
        metavar="Q,D,F",
        help="generate a synthetic dataset: queries,docs-per-query,features",
    )
    p.add_argument("--methods", default=None, help="comma list of tdm,pm,sosm")
    p.add_argument("--rankers", type=int, default=None, help="rankers per run (k)")
    p.add_argument("--iterations", type=int, default=None, help="interactions per run")
    p.add_argument("--runs", type=int, default=None)
    p.add_argument(
        "--click-model",
        choices=["perfect", "navigational", "informational", "random"],
        default=None,
    )
    p.add_argument("--pm-mode", choices=["exact", "sampled"], default=None)
    p.add_argument("--pm-samples", type=int, default=None)
    p.add_argument("--length", type=int, default=None, help="presentation length")
    p.add_argument(
        "--bias",
        action="store_true",
        default=None,
        help="measure deviation from ties instead of error against NDCG truth",
    )
    p.add_argument("--bias-epsilon", type=float, default=None)
    p.add_argument("--train-fraction", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output CSV path")
    p.add_argument("--config", default=None, help="key-value config file")
    return p


_DEFAULTS = {
    "methods": "tdm,pm,sosm",
    "rankers": 5,
    "iterations": 1000,
    "runs": 1,
    "click_model": "navigational",
    "pm_mode": "exact",
    "pm_samples": 10000,
    "length": 10,
    "bias": False,
    "bias_epsilon": 0.03,
    "train_fraction": 0.5,
    "seed": 0,
    "out": "results.csv",
}


def config_from_args(argv: Optional[List[str]] = None) -> ExperimentConfig:
    args = build_parser().parse_args(argv)
    values = dict(_DEFAULTS)
    values["dataset"] = None
    values["synthetic"] = None
    click_models = dict(DEFAULT_CLICK_MODELS)

    if args.config:
        for key, val in parse_config_file(args.config).items():
            if _apply_click_overrides(click_models, key, val):
                continue
            if key not in values:
                raise ValueError(f"unknown config key {key!r}")
            values[key] = val

    for key in values:
        arg = getattr(args, key, None)
        if arg is not None:
            values[key] = arg

    synthetic = None
    if values["synthetic"]:
        parts = [int(x) for x in str(values["synthetic"]).split(",")]
        if len(parts) != 3:
            raise ValueError("--synthetic expects queries,docs,features")
        synthetic = tuple(parts)
    bias = values["bias"]
    if isinstance(bias, str):
        bias = bias.lower() in ("1", "true", "yes")

    ml_cfg = MultileaveConfig(
        length=int(values["length"]),
        pm_mode=str(values["pm_mode"]),
        pm_samples=int(values["pm_samples"]),
    )
    return ExperimentConfig(
        dataset_path=values["dataset"],
        synthetic=synthetic,
        methods=tuple(str(values["methods"]).split(",")),
        rankers=int(values["rankers"]),
        iterations=int(values["iterations"]),
        runs=int(values["runs"]),
        click_model=str(values["click_model"]),
        multileave=ml_cfg,
        train_fraction=float(values["train_fraction"]),
        bias=bool(bias),
        bias_epsilon=float(values["bias_epsilon"]),
        seed=int(values["seed"]),
        out=str(values["out"]),
        click_models=click_models,
    )


def main(argv: Optional[List[str]] = None) -> int:
    try:
        config = config_from_args(argv)
        curves = run_experiment(config)
        write_csv(curves, config.out)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {config.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
