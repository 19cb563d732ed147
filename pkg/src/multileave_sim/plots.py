"""Render figures from harness CSV output.

Two kinds are supported: ``curve`` plots mean error (over runs) against
iteration, one line per method; ``vs-rankers`` plots the final-iteration
mean error against the number of rankers k, taking one CSV per k. Both
write the aggregated series to a sidecar CSV next to the image so the
numbers are reproducible independently of the rendering backend.
"""
from __future__ import annotations

import argparse
import os
import re
import sys
from dataclasses import dataclass, field
from typing import List, Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

REQUIRED_COLUMNS = ("run", "method", "iteration", "error")


@dataclass
class PlotSpec:
    inputs: List[str]
    kind: str  # "curve" | "vs-rankers"
    out: str
    title: str = ""
    ylabel: str = "error (%)"

    def __post_init__(self) -> None:
        if not self.inputs:
            raise ValueError("at least one input CSV is required")
        if self.kind not in ("curve", "vs-rankers"):
            raise ValueError(f"unknown plot kind {self.kind!r}")


def sidecar_path(out: str) -> str:
    root, _ = os.path.splitext(out)
    return root + ".agg.csv"


def _load(path: str) -> pd.DataFrame:
    df = pd.read_csv(path)
    for col in REQUIRED_COLUMNS:
        if col not in df.columns:
            raise ValueError(f"{path}: missing column {col!r}")
    if df.empty:
        raise ValueError(f"{path}: no data rows")
    return df


def _k_for(path: str, df: pd.DataFrame) -> int:
    if "k" in df.columns:
        ks = df["k"].unique()
        if len(ks) != 1:
            raise ValueError(f"{path}: ambiguous k column")
        return int(ks[0])
    m = re.search(r"k[_=-]?(\d+)", os.path.basename(path))
    if not m:
        raise ValueError(f"{path}: no k column and no k in filename")
    return int(m.group(1))


def aggregate_curves(spec: PlotSpec) -> pd.DataFrame:
    """Mean error over runs per (method, iteration), all inputs pooled."""
    df = pd.concat([_load(p) for p in spec.inputs], ignore_index=True)
    agg = (
        df.groupby(["method", "iteration"], as_index=False)["error"]
        .mean()
        .sort_values(["method", "iteration"])
        .reset_index(drop=True)
    )
    return agg.rename(columns={"error": "mean_error"})


def aggregate_vs_rankers(spec: PlotSpec) -> pd.DataFrame:
    """Final-iteration mean error per (method, k), one input CSV per k."""
    rows = []
    methods = None
    for path in spec.inputs:
        df = _load(path)
        k = _k_for(path, df)
        here = set(df["method"].unique())
        if methods is None:
            methods = here
        elif here != methods:
            raise ValueError(f"{path}: method set differs from previous inputs")
        last = df[df["iteration"] == df["iteration"].max()]
        for method, grp in last.groupby("method"):
            rows.append({"method": method, "k": k, "mean_error": grp["error"].mean()})
    return (
        pd.DataFrame(rows)
        .sort_values(["method", "k"])
        .reset_index(drop=True)
    )


def _write_sidecar(agg: pd.DataFrame, path: str) -> None:
    agg = agg.copy()
    agg["mean_error"] = agg["mean_error"].map(lambda v: f"{v:.6f}")
    agg.to_csv(path, index=False, lineterminator="\n")


def plot_curves(spec: PlotSpec) -> pd.DataFrame:
    """Render error-vs-iteration lines and the sidecar CSV."""
    agg = aggregate_curves(spec)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for method, grp in agg.groupby("method"):
        ax.plot(grp["iteration"], 100.0 * grp["mean_error"], label=method)
    ax.set_xlabel("iteration")
    ax.set_ylabel(spec.ylabel)
    if spec.title:
        ax.set_title(spec.title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(spec.out)
    plt.close(fig)
    _write_sidecar(agg, sidecar_path(spec.out))
    return agg


def plot_vs_rankers(spec: PlotSpec) -> pd.DataFrame:
    """Render final-error-vs-k lines and the sidecar CSV."""
    agg = aggregate_vs_rankers(spec)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for method, grp in agg.groupby("method"):
        ax.plot(grp["k"], 100.0 * grp["mean_error"], marker="o", label=method)
    ax.set_xlabel("number of rankers")
    ax.set_ylabel(spec.ylabel)
    if spec.title:
        ax.set_title(spec.title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(spec.out)
    plt.close(fig)
    _write_sidecar(agg, sidecar_path(spec.out))
    return agg


def main(argv: Optional[List[str]] = None) -> int:
    p = argparse.ArgumentParser(
        prog="multileave-plot",
        description="Plot error curves from experiment CSV output",
    )
    p.add_argument("inputs", nargs="+", help="harness CSV file(s)")
    p.add_argument("--kind", choices=["curve", "vs-rankers"], default="curve")
    p.add_argument("--out", required=True, help="output image path")
    p.add_argument("--title", default="")
    args = p.parse_args(argv)
    try:
        spec = PlotSpec(args.inputs, args.kind, args.out, args.title)
        if spec.kind == "curve":
            plot_curves(spec)
        else:
            plot_vs_rankers(spec)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out} and {sidecar_path(args.out)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
