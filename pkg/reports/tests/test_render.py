import json
from pathlib import Path

import numpy as np
import pytest

from phireg_reports.render import (
    PlotSpec,
    aggregate_series,
    fit_growth_exponent,
    load_csv,
    main,
    render_regret_curves,
)

DATA = Path(__file__).parent / "data"


def synthetic_csv(path, exponent=0.5, T=1000, seeds=(1, 2)):
    rows = ["scenario,seed,t,regret"]
    for seed in seeds:
        rng = np.random.default_rng(seed)
        for t in range(10, T, 10):
            value = 2.0 * t**exponent * (1 + 0.02 * rng.standard_normal())
            rows.append(f"synthetic,{seed},{t},{value}")
    path.write_text("\n".join(rows) + "\n")
    return path


def test_load_csv_and_aggregate(tmp_path):
    p = synthetic_csv(tmp_path / "s.csv")
    cols = load_csv(p)
    ts, vals = aggregate_series(cols, "regret")
    assert ts[0] == 10.0 and len(ts) == len(set(ts))


def test_missing_column_raises(tmp_path):
    p = synthetic_csv(tmp_path / "s.csv")
    cols = load_csv(p)
    with pytest.raises(ValueError, match="missing columns"):
        aggregate_series(cols, "nope")


def test_header_only_csv_fails_cleanly(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_text("scenario,seed,t,regret\n")
    with pytest.raises(ValueError, match="empty input"):
        load_csv(p)
    blank = tmp_path / "blank.csv"
    blank.write_text("")
    with pytest.raises(ValueError, match="empty input"):
        load_csv(blank)


def test_fit_growth_exponent_known_shapes():
    ts = np.arange(10, 2000)
    assert abs(fit_growth_exponent(ts, 3 * np.sqrt(ts)) - 0.5) < 1e-9
    assert abs(fit_growth_exponent(ts, 0.1 * ts) - 1.0) < 1e-9
    # the fit ignores the first tenth of rounds
    vals = 3 * np.sqrt(ts)
    vals[: len(ts) // 20] = 1e6
    assert abs(fit_growth_exponent(ts, vals) - 0.5) < 1e-6


def test_render_writes_figure_and_sidecar(tmp_path):
    p = synthetic_csv(tmp_path / "s.csv", exponent=0.5)
    spec = PlotSpec(inputs=[p], series=["regret"], output="fig.png", reference="sqrt")
    exps = render_regret_curves(spec, tmp_path)
    assert (tmp_path / "fig.png").exists()
    sidecar = tmp_path / "fig.png.exponents.txt"
    assert sidecar.exists()
    assert 0.4 <= exps["regret"] <= 0.6
    name, value = sidecar.read_text().split()
    assert name == "regret" and 0.4 <= float(value) <= 0.6


def test_render_idempotent_on_sidecar(tmp_path):
    p = synthetic_csv(tmp_path / "s.csv")
    spec = PlotSpec(inputs=[p], series=["regret"], output="fig.png")
    render_regret_curves(spec, tmp_path)
    first = (tmp_path / "fig.png.exponents.txt").read_bytes()
    before = p.read_bytes()
    render_regret_curves(spec, tmp_path)
    assert (tmp_path / "fig.png.exponents.txt").read_bytes() == first
    assert p.read_bytes() == before  # inputs never modified


def test_bound_series_drawn(tmp_path):
    rows = ["scenario,seed,t,regret,bound"]
    for t in range(10, 500, 10):
        rows.append(f"s,1,{t},{np.sqrt(t)},{3*np.sqrt(t)}")
    p = tmp_path / "b.csv"
    p.write_text("\n".join(rows) + "\n")
    spec = PlotSpec(inputs=[p], series=["regret"], bound_series=["bound"], output="b.png")
    render_regret_curves(spec, tmp_path)
    assert (tmp_path / "b.png").exists()


def test_invalid_reference_rejected(tmp_path):
    with pytest.raises(ValueError):
        PlotSpec(inputs=["x.csv"], series=["a"], output="y.png", reference="cubic")


def test_script_interface(tmp_path, capsys):
    p = synthetic_csv(tmp_path / "s.csv")
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps({
        "inputs": [str(p)], "series": ["regret"], "output": "fig.png", "reference": "sqrt",
    }))
    assert main(["--spec", str(spec_path), "--output-dir", str(tmp_path)]) == 0
    assert "exponent" in capsys.readouterr().out

    empty = tmp_path / "empty.csv"
    empty.write_text("scenario,seed,t,regret\n")
    spec_path.write_text(json.dumps({
        "inputs": [str(empty)], "series": ["regret"], "output": "fig2.png",
    }))
    assert main(["--spec", str(spec_path), "--output-dir", str(tmp_path)]) == 1
    assert "empty input" in capsys.readouterr().err
