"""Render regret-curve figures from experiment CSVs.

A plot spec (JSON) names input CSVs, the series columns to draw, an optional
bound column drawn as an envelope, the reference shape (sqrt / linear / t14),
and the output image name. Rendering never modifies the inputs; re-rendering
writes the same sidecar exponent file.

Script usage:
    phireg-reports --spec spec.json --output-dir figures/
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

__all__ = ["PlotSpec", "load_csv", "aggregate_series", "fit_growth_exponent", "render_regret_curves", "main"]

_REFERENCES = {"sqrt": 0.5, "linear": 1.0, "t14": 0.25, "none": None}


class PlotSpec:
    def __init__(self, inputs, series, output, reference="sqrt", bound_series=None):
        self.inputs = [Path(p) for p in inputs]
        self.series = list(series)
        self.output = Path(output)
        if reference not in _REFERENCES:
            raise ValueError(f"reference must be one of {sorted(_REFERENCES)}")
        self.reference = reference
        self.bound_series = list(bound_series or [])

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            raw = json.load(fh)
        return cls(
            inputs=raw["inputs"],
            series=raw["series"],
            output=raw["output"],
            reference=raw.get("reference", "sqrt"),
            bound_series=raw.get("bound_series"),
        )


def load_csv(path):
    """Read one CSV into a dict of column -> list; 'empty input' on
    header-only files."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"empty input: {path} has no header")
        rows = [row for row in reader if row]
    if not rows:
        raise ValueError(f"empty input: {path} has a header but no rows")
    columns = {name: [] for name in header}
    for row in rows:
        for name, value in zip(header, row):
            columns[name].append(value)
    return columns


def aggregate_series(columns, name):
    """Mean of a column across seeds at each t, as (ts, values)."""
    if name not in columns:
        raise ValueError(f"missing columns: {name!r} not in {sorted(columns)}")
    if "t" not in columns:
        raise ValueError("missing columns: 't'")
    ts = np.array([float(v) for v in columns["t"]])
    vals = np.array([float(v) for v in columns[name]])
    out_t = np.unique(ts)
    out_v = np.array([vals[ts == t].mean() for t in out_t])
    return out_t, out_v


def fit_growth_exponent(ts, values, skip_frac=0.1):
    """Least-squares slope on log-log, excluding the first skip_frac of
    rounds (transient) and nonpositive values."""
    ts = np.asarray(ts, dtype=float)
    vals = np.asarray(values, dtype=float)
    mask = (ts > skip_frac * ts.max()) & (vals > 0)
    if mask.sum() < 2:
        raise ValueError("not enough positive points to fit a growth exponent")
    return float(np.polyfit(np.log(ts[mask]), np.log(vals[mask]), 1)[0])


def render_regret_curves(spec: PlotSpec, output_dir="."):
    """One figure per spec; returns {series name: fitted exponent}.

    The sidecar '<image>.exponents.txt' lists one 'column exponent' line per
    selected series, fitted on the per-t mean across seeds and files.
    """
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    tables = [load_csv(p) for p in spec.inputs]

    fig, ax = plt.subplots(figsize=(7, 5))
    exponents = {}
    for name in spec.series:
        merged_t, merged_v = [], []
        for tab in tables:
            ts, vals = aggregate_series(tab, name)
            merged_t.append(ts)
            merged_v.append(vals)
        ts = merged_t[0]
        vals = np.mean(np.vstack(merged_v), axis=0) if len(merged_v) > 1 else merged_v[0]
        ax.plot(ts, vals, label=name)
        exponents[name] = fit_growth_exponent(ts, vals)
        power = _REFERENCES[spec.reference]
        if power is not None:
            anchor = vals[-1] / ts[-1] ** power
            ax.plot(ts, anchor * ts**power, linestyle="--", alpha=0.6,
                    label=f"{anchor:.3g} * t^{power:g}")
    for name in spec.bound_series:
        ts, vals = aggregate_series(tables[0], name)
        ax.plot(ts, vals, linestyle=":", alpha=0.8, label=f"{name} (bound)")

    ax.set_xlabel("t")
    ax.set_ylabel("cumulative regret")
    ax.legend()
    ax.set_title(spec.output.stem)
    image_path = output_dir / spec.output
    fig.savefig(image_path, dpi=120)
    plt.close(fig)

    sidecar = image_path.with_suffix(image_path.suffix + ".exponents.txt")
    lines = [f"{name} {exponents[name]:.6f}" for name in spec.series]
    sidecar.write_text("\n".join(lines) + "\n")
    return exponents


def main(argv=None):
    parser = argparse.ArgumentParser(prog="phireg-reports", description=__doc__)
    parser.add_argument("--spec", required=True, help="plot spec JSON file")
    parser.add_argument("--output-dir", default=".")
    args = parser.parse_args(argv)
    try:
        spec = PlotSpec.from_json(args.spec)
        exponents = render_regret_curves(spec, args.output_dir)
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for name, e in exponents.items():
        print(f"{name}: exponent {e:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
