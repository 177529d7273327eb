"""Secondary acceptance: render the shipped experiment CSVs and check the
fitted growth exponents land where the underlying processes put them."""

from pathlib import Path

import pytest

from phireg_reports.render import PlotSpec, load_csv, render_regret_curves

DATA = Path(__file__).parent / "data"


def test_criterion_17_gd_prox_csv_exponent(tmp_path):
    spec = PlotSpec(
        inputs=[DATA / "c01_gd_prox.csv"],
        series=["regret_external"],
        bound_series=["bound_prox_max"],
        output="c01.png",
        reference="sqrt",
    )
    exps = render_regret_curves(spec, tmp_path)
    ok = 0.4 <= exps["regret_external"] <= 0.6
    print(f"{'PASS' if ok else 'FAIL'} criterion 17a: exponent {exps['regret_external']:.4f}")
    assert ok
    assert (tmp_path / "c01.png").exists()
    assert (tmp_path / "c01.png.exponents.txt").exists()


def test_criterion_17_beam_csv_exponent(tmp_path):
    spec = PlotSpec(
        inputs=[DATA / "c04_beam_triangle.csv"],
        series=["regret_beam"],
        output="c04.png",
        reference="linear",
    )
    exps = render_regret_curves(spec, tmp_path)
    ok = exps["regret_beam"] >= 0.9
    print(f"{'PASS' if ok else 'FAIL'} criterion 17b: exponent {exps['regret_beam']:.4f}")
    assert ok


def test_criterion_17_header_only_fails_cleanly(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("scenario,seed,t,regret_beam\n")
    with pytest.raises(ValueError, match="empty input"):
        load_csv(empty)
    print("PASS criterion 17c: header-only CSV fails cleanly")
