"""Acceptance suite: runs every shipped scenario at its stated tolerance and
prints one pass/fail line per criterion (run with pytest -s to see them)."""

import json
from pathlib import Path

import numpy as np
import pytest

from phireg.cli import run_config

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"
_CACHE = {}


def _run(filename):
    if filename not in _CACHE:
        with open(SCENARIOS / filename) as fh:
            cfg = json.load(fh)
        cfg.pop("output", None)
        _CACHE[filename] = run_config(cfg, check=True)
    return _CACHE[filename]


def _report(criterion, checks, select=None):
    chosen = [c for c in checks if select is None or c[0] in select]
    assert chosen, f"no checks evaluated for criterion {criterion}"
    ok = all(c[1] for c in chosen)
    detail = "; ".join(f"{name}[{d}]" if d else name for name, _, d in chosen)
    print(f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}")
    assert ok, detail
    return chosen


def test_criterion_01_descent_prox_bounds():
    _, _, checks = _run("c01_gd_prox_ball.json")
    _report(1, checks, {"constant_step_bound", "optimized_step_bound"})


def test_criterion_02_abs_alternating_exactness():
    _, _, checks = _run("c02_abs_alternating.json")
    _report(2, checks)


def test_criterion_03_linear_span_lower_bound():
    _, _, checks = _run("c03_linear_span.json")
    _report(3, checks)


def test_criterion_04_beam_linear_regret():
    _, _, checks = _run("c04_beam_triangle.json")
    _report(4, checks, {"beam_ratio", "beam_exponent"})


def test_criterion_05_tree_sampler_high_probability_bound():
    _, _, checks = _run("c05_c07_tree_sampler.json")
    _report(5, checks, {"tree_hp_bound"})


def test_criterion_06_tree_sampling_law():
    _, _, checks = _run("c06_sampling_law.json")
    _report(6, checks, {"sampling_law_tv"})


def test_criterion_07_regret_decomposition_identity():
    _, _, checks = _run("c05_c07_tree_sampler.json")
    _report(7, checks, {"tree_decomposition_identity"})


def test_criterion_08_key_inequality_fuzz():
    # 10^4 random (quadratic or linear f, x, p) triples in dimension <= 8;
    # slack of the displacement inequality stays above -1e-8 in every case
    from phireg.deviations import LinearProx, QuadToAnchorProx
    from phireg.geometry import Ball

    rng = np.random.default_rng(88)
    worst = np.inf
    for _ in range(10_000):
        d = int(rng.integers(1, 9))
        set_ = Ball(np.zeros(d), 1.0)
        if rng.uniform() < 0.5:
            f = LinearProx(0.5 * rng.standard_normal(d))
        else:
            f = QuadToAnchorProx(rng.uniform(0.05, 0.85), set_.sample(rng, 1)[0])
        x = set_.sample(rng, 1)[0]
        p = set_.sample(rng, 1)[0]
        p_x = f.prox(x, set_)
        lhs = float(np.sum((x - p_x) ** 2) - np.sum((x - p) ** 2))
        rhs = float(2 * f.value(p) - 2 * f.value(p_x) - np.sum((p - p_x) ** 2))
        worst = min(worst, rhs - lhs)
    ok = worst >= -1e-8
    print(f"{'PASS' if ok else 'FAIL'} criterion 8: key-inequality min slack {worst:.3e}")
    assert ok


def test_criterion_09_hedge_bound():
    _, _, checks = _run("c09_hedge_bound.json")
    _report(9, checks)


def test_criterion_10_motzkin_straus():
    _, _, checks = _run("c10_motzkin_straus.json")
    _report(10, checks)


def test_criterion_11_local_maximizer_probes():
    _, _, checks = _run("c11_local_probes.json")
    _report(11, checks)


def test_criterion_12_og_in_games():
    _, _, checks = _run("c12_og_bilinear.json")
    _report(12, checks, {"og_prox_bound", "og_gradient_variation"})


def test_criterion_13_convex_mixture_bound():
    _, _, checks = _run("c13_convmix_box.json")
    _report(13, checks)


def test_criterion_14_interpolation_regret_and_certification():
    _, _, checks = _run("c14_int_certify.json")
    _report(14, checks, {"int_regret_bound", "int_certified_epsilon"})


def test_criterion_15_entropic_descent_bound():
    _, _, checks = _run("c15_md_quad.json")
    _report(15, checks)


def test_criterion_16_conformal_identity():
    _, _, checks = _run("c16_conformal.json")
    _report(16, checks, {"conformal_identity", "conformal_gap"})
