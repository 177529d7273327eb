"""Scenario-driven experiment runner with reproducible CSV outputs.

Subcommands: run <config> [--check], audit <trajectory> <deviations>,
hardness <graph-file>, conformal <scores>, list-scenarios. Configs are JSON;
seeds fan out across worker threads (capped by PHIREG_THREADS) and records
are merged in seed order, so identical config+seed always produces
byte-identical CSV. Exit codes: 0 success, 2 config error, 3 numerical
error, 4 failed acceptance check under run --check.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import audit, conformal, games, hardness, learners
from .deviations import (
    ConstantMap,
    FnMap,
    IntFamily,
    LinearProx,
    NumericalError,
    QuadToAnchorProx,
    deviation_set_from_config,
    make_prox_family,
)
from .geometry import Box, Interval, Triangle2D, set_from_config

__all__ = ["main", "run_config", "emit_csv", "ConfigError", "CheckFailure"]


class ConfigError(ValueError):
    """Invalid scenario config; the message carries the field path."""


class CheckFailure(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# CSV emission
# ---------------------------------------------------------------------------


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


def emit_csv(records, columns, path):
    """Write records (list of dicts) under a stable header; floats carry
    12 significant digits, so fixed inputs give bit-stable files."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(columns)]
    for row in records:
        lines.append(",".join(_fmt(row.get(c, "")) for c in columns))
    path.write_text("\n".join(lines) + "\n")


def _checkpoints(T, n=256):
    ts = np.unique(np.linspace(1, T, min(n, T)).astype(int))
    return ts


# ---------------------------------------------------------------------------
# config validation and shared builders
# ---------------------------------------------------------------------------

_KINDS = ("single_learner", "game_dynamics", "hardness_probe", "conformal", "counterexample")


def validate_config(config):
    if not isinstance(config, dict):
        raise ConfigError("config: must be a JSON object")
    kind = config.get("scenario")
    if kind not in _KINDS:
        raise ConfigError(f"scenario: must be one of {_KINDS}, got {kind!r}")
    if "id" not in config:
        raise ConfigError("id: required")
    seeds = config.get("seeds")
    if not isinstance(seeds, list) or not seeds:
        raise ConfigError("seeds: non-empty list required")
    if kind in ("single_learner", "game_dynamics", "conformal", "counterexample"):
        T = config.get("T")
        if not isinstance(T, int) or T < 1:
            raise ConfigError("T: integer >= 1 required")
    for i, check in enumerate(config.get("checks", [])):
        if check.get("name") not in CHECKS:
            raise ConfigError(f"checks[{i}].name: unknown check {check.get('name')!r}")
    return config


def _family_rng(config):
    return np.random.default_rng(config.get("family_seed", 2024))


def _build_deviation_sets(config, set_):
    out = []
    for desc in config.get("deviations", []):
        if desc.get("family") == "prox_family" and "auto" in desc:
            out.append(make_prox_family(set_, _family_rng(config)))
        else:
            out.append(deviation_set_from_config(desc, set_))
    return out


def _unit_rows(rng, T, d):
    g = rng.standard_normal((T, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


class CosineLocalMaps:
    """n delta-local maps phi_j(x) = Pi[x + v_j cos(<w_j, x> + b_j)];
    the projected displacement has norm at most ||v_j|| <= delta."""

    def __init__(self, set_, delta, n_maps, rng):
        d = set_.dimension
        V = rng.standard_normal((n_maps, d))
        V *= 0.9 * delta / np.linalg.norm(V, axis=1, keepdims=True)
        self.V = V
        self.W = rng.standard_normal((n_maps, d))
        self.b = rng.uniform(0, 2 * np.pi, size=n_maps)
        self.set = set_
        self.n_maps = n_maps

    def apply_all(self, x):
        s = np.cos(self.W @ x + self.b)
        return self.set.project(x + self.V * s[:, None])

    def apply_all_batch(self, X):
        T, d = X.shape
        S = np.cos(X @ self.W.T + self.b)
        cand = X[:, None, :] + self.V[None, :, :] * S[:, :, None]
        return self.set.project(cand.reshape(-1, d)).reshape(T, self.n_maps, d)

    def members(self):
        out = []
        for j in range(self.n_maps):
            def fn(x, j=j):
                return self.set.project(x + self.V[j] * np.cos(self.W[j] @ x + self.b[j]))

            out.append(FnMap(f"local{j}", fn))
        return out


# ---------------------------------------------------------------------------
# scenario runners (one seed each); they return (rows, artifact)
# ---------------------------------------------------------------------------


def _run_gd_prox_seed(config, seed):
    set_ = set_from_config(config["set"])
    T, d = config["T"], set_.dimension
    stream = config["loss_stream"]
    G = stream.get("G", 1.0)
    eta = config["learner"]["eta"]
    rng = np.random.default_rng(seed)
    if stream.get("kind") == "constant_linear":
        grads = np.tile(np.asarray(stream["g"], dtype=float), (T, 1))
    else:
        grads = G * _unit_rows(rng, T, d)
    xs = np.empty((T + 1, d))
    xs[0] = set_.project(np.zeros(d))
    for t in range(T):
        xs[t + 1] = set_.project(xs[t] - eta * grads[t])
    traj = audit.Trajectory(
        xs=xs[:T], grads=grads, loss_values=np.sum(grads * xs[:T], axis=1),
        set=set_, final_x=xs[T], loss_kind="linear", meta={"eta": eta, "G": G},
    )
    family = _build_deviation_sets(config, set_)[0]
    ts = _checkpoints(T)
    lhs_all, rhs_all, slacks = [], [], []
    for f in family.members():
        lhs, rhs = audit.gd_prox_bound_series(traj, f, eta)
        lhs_all.append(lhs)
        rhs_all.append(rhs)
        slacks.append(float(rhs[-1] - lhs[-1]))
    lhs_all, rhs_all = np.vstack(lhs_all), np.vstack(rhs_all)
    cum_inner = np.cumsum(np.sum(grads * xs[:T], axis=1))
    cum_grads = np.cumsum(grads, axis=0)
    rows = []
    for t in ts:
        # prefix-exact external regret: comparator for the first t rounds
        _, neg_val = set_.support_maximizer(-cum_grads[t - 1])
        rows.append({
            "scenario": config["id"], "seed": seed, "t": int(t),
            "regret_external": float(cum_inner[t - 1] + neg_val),
            "regret_prox_max": float(np.max(lhs_all[:, t - 1])),
            "bound_prox_max": float(np.max(rhs_all[:, t - 1])),
        })
    artifact = {"trajectory": traj, "family": family, "eta": eta, "slacks": slacks, "grads": grads}
    return rows, artifact


_GD_PROX_COLUMNS = ["scenario", "seed", "t", "regret_external", "regret_prox_max", "bound_prox_max"]


def _run_int_audit_seed(config, seed):
    set_ = set_from_config(config["set"])
    T, d = config["T"], set_.dimension
    G = config["loss_stream"].get("G", 1.0)
    delta = config["deviations"][0]["delta"]
    D = set_.diameter()
    eta = config["learner"].get("eta", D / (G * math.sqrt(T)))
    rng = np.random.default_rng(seed)
    grads = G * _unit_rows(rng, T, d)
    xs = np.empty((T + 1, d))
    xs[0] = set_.project(np.zeros(d))
    for t in range(T):
        xs[t + 1] = set_.project(xs[t] - eta * grads[t])
    traj = audit.Trajectory(
        xs=xs[:T], grads=grads, loss_values=np.sum(grads * xs[:T], axis=1),
        set=set_, final_x=xs[T], loss_kind="linear", meta={"eta": eta, "G": G},
    )
    lam_max = min(1.0, delta / D)
    inner = np.sum(grads * xs[:T], axis=1)
    cum_inner = np.cumsum(inner)
    cum_grads = np.cumsum(grads, axis=0)
    ts = _checkpoints(T)
    rows = []
    for t in ts:
        point, neg_val = set_.support_maximizer(-cum_grads[t - 1])
        gain = max(0.0, lam_max * (cum_inner[t - 1] + neg_val))
        eps = gain / t  # linear losses: zero smoothness slack
        rows.append({
            "scenario": config["id"], "seed": seed, "t": int(t),
            "regret_int": gain,
            "bound_int": 2.0 * delta * G * math.sqrt(t),
            "epsilon": eps,
        })
    report = audit.int_regret(traj, delta)
    emp = games.EmpiricalDistribution([xs[:T]], [-grads], [set_])
    gain, exact, witness = audit.linearized_gain(emp, 0, IntFamily(delta))
    artifact = {"trajectory": traj, "int_total": report.total, "epsilon": gain,
                "delta": delta, "G": G, "eta": eta, "exactness": exact}
    return rows, artifact


_INT_COLUMNS = ["scenario", "seed", "t", "regret_int", "bound_int", "epsilon"]


def _run_md_seed(config, seed):
    d = config["set"]["d"]
    T = config["T"]
    Ginf = config["loss_stream"].get("Ginf", 1.0)
    rng = np.random.default_rng(seed)
    grads = rng.uniform(-Ginf, Ginf, size=(T, d))
    eta = config["learner"].get("eta", math.sqrt(2.0 * math.log(d) / T) / Ginf)
    learner = learners.MirrorDescentLearner(d, learners.StepSchedule.constant(eta))
    xs = np.empty((T + 1, d))
    for t in range(T):
        xs[t] = learner.next()
        learner.observe(grads[t])
    xs[T] = learner.next()
    fam_rng = _family_rng(config)
    fams = [
        QuadToAnchorProx(lam, fam_rng.dirichlet(np.ones(d)))
        for lam in config.get("lams", [0.1, 0.18, 0.26, 0.34, 0.42])
    ]
    lhs_all, rhs_all = [], []
    for f in fams:
        P = audit.bregman_prox_negentropy(f, xs)  # T+1 rows
        lhs = np.cumsum(np.sum(grads * (xs[:T] - P[:T]), axis=1))
        p1 = P[0]
        kl = float(np.sum(p1 * np.log(p1 / xs[0])))
        fvals = f.value_batch(P)
        tgrid = np.arange(1, T + 1)
        rhs = (kl + fvals[0] - fvals[1:]) / eta + eta * Ginf**2 * tgrid / 2.0
        lhs_all.append(lhs)
        rhs_all.append(rhs)
    lhs_all, rhs_all = np.vstack(lhs_all), np.vstack(rhs_all)
    rows = []
    for t in _checkpoints(T):
        rows.append({
            "scenario": config["id"], "seed": seed, "t": int(t),
            "regret_quad_max": float(np.max(lhs_all[:, t - 1])),
            "bound_quad_max": float(np.max(rhs_all[:, t - 1])),
        })
    slacks = [float(r[-1] - l[-1]) for l, r in zip(lhs_all, rhs_all)]
    return rows, {"slacks": slacks, "eta": eta}


_MD_COLUMNS = ["scenario", "seed", "t", "regret_quad_max", "bound_quad_max"]


def _run_tree_seed(config, seed):
    T = config["T"]
    n = config["loss_stream"]["n_experts"]
    beta = config.get("beta", 0.05)
    rng = np.random.default_rng(seed)
    table = rng.uniform(0.0, 1.0, size=(T, n))
    points = [np.array([float(i)]) for i in range(n)]
    maps = [ConstantMap(p, name=f"expert{i}") for i, p in enumerate(points)]
    learner = learners.TreeSamplerLearner(maps, root=points[0], T=T, seed=seed)
    for t in range(T):
        learner.next()
        row = table[t]
        learner.observe(lambda y, row=row: float(row[int(round(float(y[0])))]))
    R = np.vstack([entry[2] for entry in learner.log])
    ux = np.array([entry[1] for entry in learner.log])
    cum_R = np.cumsum(R, axis=0)
    cum_u = np.cumsum(ux)
    rows = []
    for t in _checkpoints(T):
        regret = float(np.max(cum_R[t - 1]) - cum_u[t - 1])
        bound = 8.0 * math.sqrt(t * (math.log(n) + math.log(1.0 / beta)))
        rows.append({
            "scenario": config["id"], "seed": seed, "t": int(t),
            "regret_finite": regret, "bound_hp": bound,
        })
    decomposition = audit.tree_decomposition(learner.log)
    return rows, {"log": learner.log, "decomposition": decomposition, "beta": beta, "n": n}


_TREE_COLUMNS = ["scenario", "seed", "t", "regret_finite", "bound_hp"]


def _run_hedge_seed(config, seed):
    T = config["T"]
    sizes = config["family_sizes"]
    rng = np.random.default_rng(seed)
    row = {"scenario": config["id"], "seed": seed, "t": T}
    artifact = {}
    for n in sizes:
        table = rng.uniform(0.0, 1.0, size=(T, n))
        hedge = learners.HedgeLearner(n, T=T)
        expected = np.empty(T)
        for t in range(T):
            p = hedge.next()
            expected[t] = float(p @ table[t])
            hedge.observe(table[t])
        regret = float(np.max(table.sum(axis=0)) - expected.sum())
        row[f"regret_hedge_n{n}"] = regret
        row[f"bound_n{n}"] = 2.0 * math.sqrt(T * math.log(n))
        artifact[n] = regret
    return [row], artifact


def _hedge_columns(config):
    cols = ["scenario", "seed", "t"]
    for n in config["family_sizes"]:
        cols += [f"regret_hedge_n{n}", f"bound_n{n}"]
    return cols


def _run_convmix_seed(config, seed):
    set_ = set_from_config(config["set"])
    T = config["T"]
    delta = config["delta"]
    game = games.single_player_quadratic_reward(set_, config["center"])
    bundle = CosineLocalMaps(set_, delta, config["n_maps"], _family_rng(config))
    maps = bundle.members()
    root = set_.project(np.asarray(config.get("root", np.zeros(set_.dimension)), dtype=float))
    learner = learners.ConvexMixtureLearner(
        maps, root, G=game.G, delta=delta, T=T, seed=seed, apply_all=bundle.apply_all
    )
    xs = np.empty((T, set_.dimension))
    curv_grad = game.utility_grad
    for t in range(T):
        x = learner.next()
        xs[t] = x
        learner.observe(curv_grad(0, [x]))
    ts = _checkpoints(T)
    phi_values = np.transpose(bundle.apply_all_batch(xs), (0, 2, 1))  # (T, d, m)
    totals = audit_conv_series(xs, maps, game.curvature, game.center, ts, phi_values=phi_values)
    beta = config.get("beta", 0.05)
    m = len(maps)
    rows = []
    for t, total in zip(ts, totals):
        bound = 8.0 * math.sqrt(t) * (game.G * delta * math.sqrt(math.log(m)) + math.sqrt(math.log(1.0 / beta))) + delta**2 * game.L * t
        rows.append({
            "scenario": config["id"], "seed": seed, "t": int(t),
            "regret_conv": total, "bound_conv": bound,
        })
    return rows, {"final_regret": totals[-1], "final_bound": rows[-1]["bound_conv"], "beta": beta}


_CONV_COLUMNS = ["scenario", "seed", "t", "regret_conv", "bound_conv"]


def audit_conv_series(xs, maps, curvature, center, ts, phi_values=None):
    """Exact mixture-family regret at each checkpoint via prefix Gram matrices.

    phi_values may supply the precomputed (T, d, m) stack of map images.
    """
    import itertools

    xs = np.atleast_2d(xs)
    T, d = xs.shape
    m = len(maps)
    if phi_values is None:
        C = np.empty((T, d, m))
        for j, phi in enumerate(maps):
            for t in range(T):
                C[t, :, j] = phi.apply(xs[t]) - np.asarray(center, dtype=float)
    else:
        C = phi_values - np.asarray(center, dtype=float)[None, :, None]
    gram = np.einsum("tdi,tdj->tij", C, C)
    Qs = np.cumsum(gram, axis=0)
    S = np.cumsum(np.sum((xs - np.asarray(center)) ** 2, axis=1))
    supports = [list(s) for r in range(1, m + 1) for s in itertools.combinations(range(m), r)]
    totals = []
    for t in ts:
        Q = Qs[t - 1]
        best = np.inf
        for idx in supports:
            k = len(idx)
            A = np.zeros((k + 1, k + 1))
            A[:k, :k] = 2.0 * Q[np.ix_(idx, idx)]
            A[:k, k] = 1.0
            A[k, :k] = 1.0
            rhs = np.zeros(k + 1)
            rhs[k] = 1.0
            sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
            p = sol[:k]
            if np.any(p < -1e-9):
                continue
            p = np.clip(p, 0.0, None)
            if p.sum() <= 0:
                continue
            p /= p.sum()
            best = min(best, float(p @ Q[np.ix_(idx, idx)] @ p))
        totals.append(float(curvature) * (S[t - 1] - best))
    return totals


def _run_og_game_seed(config, seed):
    T = config["T"]
    eta = config.get("eta", T ** -0.25)
    sets = [set_from_config(c) for c in config["game"]["sets"]]
    game = games.bilinear_zero_sum(sets, scale=config["game"].get("scale", 0.5),
                                   shift=config["game"].get("shift", 0.5))
    w0s = config.get("w0", [[0.7], [-0.5]])
    players = [
        learners.OptimisticGradientLearner(sets[i], eta, w0=np.asarray(w0s[i], dtype=float))
        for i in range(2)
    ]
    trajs, empirical = games.run_uncoupled_dynamics(game, players, T)
    fams = [make_prox_family(sets[i], _family_rng(config)) for i in range(2)]
    ts = _checkpoints(T)
    rows = []
    series = []
    for i in range(2):
        per_f = []
        for f in fams[i].members():
            P = f.prox_batch(trajs[i].xs, sets[i])
            per_f.append(np.cumsum(np.sum(trajs[i].grads * (trajs[i].xs - P), axis=1)))
        series.append(np.vstack(per_f))
    var1 = audit.gradient_variation_sq(trajs[0].grads)
    var2 = audit.gradient_variation_sq(trajs[1].grads)
    var_bound = 3.0 * 2 * game.L**2 * eta**2 * game.G**2
    for t in ts:
        rows.append({
            "scenario": config["id"], "seed": seed, "t": int(t),
            "regret_prox_max_p1": float(np.max(series[0][:, t - 1])),
            "regret_prox_max_p2": float(np.max(series[1][:, t - 1])),
            "grad_var_max": float(max(var1[: max(t - 1, 1)].max(initial=0.0),
                                       var2[: max(t - 1, 1)].max(initial=0.0))),
            "grad_var_bound": var_bound,
        })
    artifact = {"trajs": trajs, "families": fams, "eta": eta, "game": game,
                "grad_var_max": float(max(var1.max(initial=0.0), var2.max(initial=0.0))),
                "grad_var_bound": var_bound}
    return rows, artifact


_OG_COLUMNS = ["scenario", "seed", "t", "regret_prox_max_p1", "regret_prox_max_p2",
               "grad_var_max", "grad_var_bound"]


def _run_abs_alternating_seed(config, seed):
    T = config["T"]
    delta = config["delta"]
    set_ = Interval(-1.0, 1.0)
    xs = np.array([[0.5 if t % 2 == 0 else -0.5] for t in range(T)])
    grads = np.sign(xs)
    traj = audit.Trajectory(
        xs=xs, grads=grads, loss_values=np.abs(xs[:, 0]), set=set_,
        loss_eval=lambda t, x: abs(float(x[0])), loss_kind="abs1d",
        loss_params={"kinks": [0.0]},
    )
    ext = audit.external_regret(traj)
    proj = audit.proj_regret_1d(traj, delta)
    rows = []
    for t in _checkpoints(T):
        rows.append({
            "scenario": config["id"], "seed": seed, "t": int(t),
            "regret_external": ext.per_round_cumulative[t - 1],
            "regret_proj": proj.per_round_cumulative[t - 1],
        })
    return rows, {"external": ext, "proj": proj}


_ABS_COLUMNS = ["scenario", "seed", "t", "regret_external", "regret_proj"]


def _run_linear_span_seed(config, seed):
    T = config["T"]
    delta = config["delta"]
    L = config.get("L", 1.0)
    set_ = Interval(-1.0, 1.0)
    xs = np.zeros((T, 1))  # descent from 0 on the concave quadratic stays at 0
    grads = -L * xs
    traj = audit.Trajectory(
        xs=xs, grads=grads, loss_values=-0.5 * L * xs[:, 0] ** 2, set=set_,
        loss_eval=lambda t, x: -0.5 * L * float(x[0]) ** 2,
        loss_kind="neg_quadratic_1d", loss_params={"L": L},
    )
    proj = audit.proj_regret_1d(traj, delta)
    prox_lin = audit.proximal_regret(traj, LinearProx([delta]))
    rows = []
    for t in _checkpoints(T):
        rows.append({
            "scenario": config["id"], "seed": seed, "t": int(t),
            "regret_proj": proj.per_round_cumulative[t - 1],
            "regret_prox_linear": prox_lin.per_round_cumulative[t - 1],
            "theory_value": 0.5 * delta**2 * L * t,
        })
    return rows, {"proj": proj, "prox_linear": prox_lin, "theory": 0.5 * delta**2 * L * T}


_SPAN_COLUMNS = ["scenario", "seed", "t", "regret_proj", "regret_prox_linear", "theory_value"]


def _run_beam_triangle_seed(config, seed):
    T = config["T"]
    delta = config["delta"]
    eta = config["eta"]
    tri = Triangle2D((0.0, 0.0), (1.0, 1.0), (delta, 0.0))
    adversary = games.TriangleCycleAdversary(tri)
    learner = learners.GradientDescentLearner(tri, learners.StepSchedule.constant(eta), x0=np.zeros(2))
    xs = np.empty((T, 2))
    grads = np.empty((T, 2))
    for t in range(T):
        x = learner.next()
        g = adversary.next_loss_gradient(x)
        xs[t] = x
        grads[t] = g
        learner.observe(g)
    traj = audit.Trajectory(
        xs=xs, grads=grads, loss_values=np.sum(grads * xs, axis=1), set=tri,
        final_x=learner.next(), loss_kind="linear", meta={"eta": eta},
    )
    report = audit.beam_regret(traj, delta, n_directions=config.get("n_directions", 64))
    ts = _checkpoints(T)
    rows = []
    for t in ts:
        rows.append({
            "scenario": config["id"], "seed": seed, "t": int(t),
            "regret_beam": report.per_round_cumulative[t - 1],
        })
    exponent = audit.fit_growth_exponent(ts, [report.per_round_cumulative[t - 1] for t in ts])
    half = report.per_round_cumulative[T // 2 - 1]
    artifact = {"report": report, "exponent": exponent,
                "ratio": float(report.total / half) if half > 0 else float("inf")}
    return rows, artifact


_BEAM_COLUMNS = ["scenario", "seed", "t", "regret_beam"]


def _run_conformal_seed(config, seed):
    T = config["T"]
    alpha, eta = config["alpha"], config["eta"]
    scores = conformal.synthetic_scores(seed, T, kind=config.get("stream", {}).get("kind", "uniform"))
    state = conformal.ConformalState(theta=0.0, eta=eta, alpha=alpha)
    rows = []
    ts = set(int(t) for t in _checkpoints(T))
    for t, s in enumerate(scores, start=1):
        _, state = conformal.conformal_update(state, s)
        if t in ts:
            gap = conformal.coverage_gap(state)
            rows.append({
                "scenario": config["id"], "seed": seed, "t": t,
                "theta": state.theta, "miscoverage": gap["miscoverage"],
                "gap": gap["gap"], "drift": gap["drift"],
            })
    final = conformal.coverage_gap(state)
    return rows, {"state": state, "gap": final}


_CONFORMAL_COLUMNS = ["scenario", "seed", "t", "theta", "miscoverage", "gap", "drift"]


def _all_labeled_graphs(max_d):
    out = []
    for d in range(1, max_d + 1):
        pairs = [(i, j) for i in range(d) for j in range(i + 1, d)]
        for mask in range(1 << len(pairs)):
            A = np.zeros((d, d))
            for b, (i, j) in enumerate(pairs):
                if mask >> b & 1:
                    A[i, j] = A[j, i] = 1
            out.append(hardness.Graph(A))
    return out


def _run_motzkin_seed(config, seed):
    rng = np.random.default_rng(seed)
    graphs = _all_labeled_graphs(config.get("max_enumerated_d", 5))
    for i in range(config.get("n_random6", 50)):
        graphs.append(hardness.erdos_renyi_graph(6, 0.5, seed=1000 * seed + i))
    rows, worst = [], 0.0
    for idx, g in enumerate(graphs):
        omega = hardness.clique_number(g)
        val = hardness.motzkin_straus_max(g, n_starts=config.get("n_starts", 200), rng=rng)
        gap = abs(val - (1.0 - 1.0 / omega))
        worst = max(worst, gap)
        rows.append({
            "scenario": config["id"], "seed": seed, "t": idx, "d": g.d,
            "omega": omega, "ms_value": val, "ms_gap": gap,
        })
    return rows, {"worst_gap": worst, "n_graphs": len(graphs)}


_MOTZKIN_COLUMNS = ["scenario", "seed", "t", "d", "omega", "ms_value", "ms_gap"]


def _run_local_probe_seed(config, seed):
    delta = config["delta"]
    n_points = config.get("n_points", 200)
    rng = np.random.default_rng(seed)
    rows = []
    all_ok = True
    graphs = []
    attempt = 0
    while len(graphs) < config.get("n_graphs", 20):
        d = int(rng.integers(4, config.get("max_d", 8) + 1))
        g = hardness.erdos_renyi_graph(d, 0.5, seed=10_000 * seed + attempt)
        attempt += 1
        omega = hardness.clique_number(g)
        if 2 <= omega < d:
            graphs.append((g, omega))
    idx = 0
    for g, omega in graphs:
        d = g.d
        for case in ("shrink", "small_norm", "int_plus"):
            for _ in range(n_points):
                if case == "shrink":
                    k = int(rng.integers(omega + 1, d + 1))
                    radius = delta / 2.0 + rng.uniform() * (1.0 - delta / 2.0)
                    threshold = delta**2 / (4.0 * d * (d + 1))
                elif case == "small_norm":
                    k = int(rng.integers(1, omega))
                    radius = rng.uniform() * delta / 2.0
                    threshold = delta**2 / (8.0 * d**2)
                else:
                    k = int(rng.integers(omega + 1, d + 1))
                    lo = delta / (12.0 * d**3)
                    radius = lo + rng.uniform() * (1.0 - lo)
                    threshold = delta**2 / (144.0 * d**8)
                x = radius * rng.dirichlet(np.ones(d))
                inst = hardness.FkInstance(g, k)
                if case == "int_plus":
                    gain = hardness.int_plus_shrink_gain(inst, x, delta)
                else:
                    _, gain = hardness.probe_local_maximizer(inst, x, delta)
                ok = gain > threshold
                all_ok = all_ok and ok
                rows.append({
                    "scenario": config["id"], "seed": seed, "t": idx, "d": d, "k": k,
                    "omega": omega, "case": case, "gain": gain,
                    "threshold": threshold, "passed": ok,
                })
                idx += 1
    return rows, {"all_ok": all_ok, "n_rows": idx}


_PROBE_COLUMNS = ["scenario", "seed", "t", "d", "k", "omega", "case", "gain", "threshold", "passed"]


# runner dispatch: (runner, columns or callable(config) -> columns)
_RUNNERS = {
    ("single_learner", "gd_prox"): (_run_gd_prox_seed, _GD_PROX_COLUMNS),
    ("single_learner", "gd_int"): (_run_int_audit_seed, _INT_COLUMNS),
    ("single_learner", "md_quad"): (_run_md_seed, _MD_COLUMNS),
    ("single_learner", "tree_sampler"): (_run_tree_seed, _TREE_COLUMNS),
    ("single_learner", "hedge"): (_run_hedge_seed, _hedge_columns),
    ("single_learner", "convmix"): (_run_convmix_seed, _CONV_COLUMNS),
    ("game_dynamics", "og_bilinear"): (_run_og_game_seed, _OG_COLUMNS),
    ("counterexample", "abs_alternating"): (_run_abs_alternating_seed, _ABS_COLUMNS),
    ("counterexample", "linear_span"): (_run_linear_span_seed, _SPAN_COLUMNS),
    ("counterexample", "beam_triangle"): (_run_beam_triangle_seed, _BEAM_COLUMNS),
    ("conformal", "synthetic"): (_run_conformal_seed, _CONFORMAL_COLUMNS),
    ("hardness_probe", "motzkin_straus"): (_run_motzkin_seed, _MOTZKIN_COLUMNS),
    ("hardness_probe", "local_probe"): (_run_local_probe_seed, _PROBE_COLUMNS),
}


# ---------------------------------------------------------------------------
# checks
# ---------------------------------------------------------------------------


def _check_gd_prox_bounds(config, artifacts, params):
    tol = params.get("tol", 1e-7)
    results = []
    ok_const = all(s >= -tol for a in artifacts for s in a["slacks"])
    results.append(("constant_step_bound", ok_const,
                    f"min slack {min(s for a in artifacts for s in a['slacks']):.3e}"))
    set_ = set_from_config(config["set"])
    D = set_.diameter()
    G = config["loss_stream"].get("G", 1.0)
    T = config["T"]
    worst = np.inf
    ok_opt = True
    for a in artifacts:
        grads = a["grads"]
        for f in a["family"].members():
            # user-supplied a-priori bound wins; otherwise the closed-form
            # range bound over the whole set
            B = f.apriori_B if f.apriori_B is not None else f.range_bound(set_)
            eta = math.sqrt((D**2 + 2.0 * B) / (G**2 * T))
            xs = np.empty((T + 1, set_.dimension))
            xs[0] = set_.project(np.zeros(set_.dimension))
            for t in range(T):
                xs[t + 1] = set_.project(xs[t] - eta * grads[t])
            P = f.prox_batch(xs[:T], set_)
            reg = float(np.sum(np.sum(grads * (xs[:T] - P), axis=1)))
            bound = G * math.sqrt(D**2 + 2.0 * B) * math.sqrt(T) + tol
            worst = min(worst, bound - reg)
            ok_opt = ok_opt and reg <= bound
    results.append(("optimized_step_bound", ok_opt, f"min margin {worst:.3e}"))
    return results


def _check_exact_values(config, artifacts, params):
    results = []
    for name, spec in params["expect"].items():
        expected, tol = spec["value"], spec.get("tol", 1e-12)
        worst = 0.0
        for a in artifacts:
            got = _lookup_artifact_value(a, name)
            worst = max(worst, abs(got - expected))
        results.append((f"exact:{name}", worst <= tol, f"max |err| {worst:.3e}"))
    return results


def _lookup_artifact_value(artifact, name):
    cur = artifact
    for part in name.split("."):
        if isinstance(cur, dict):
            cur = cur[part]
        else:
            cur = getattr(cur, part)
    return float(cur)


def _check_beam_growth(config, artifacts, params):
    results = []
    for a in artifacts:
        results.append(("beam_ratio", a["ratio"] > params.get("min_ratio", 1.8),
                        f"ratio {a['ratio']:.4f}"))
        results.append(("beam_exponent", a["exponent"] >= params.get("min_exponent", 0.9),
                        f"exponent {a['exponent']:.4f}"))
    return results


def _check_tree_hp_bound(config, artifacts, params):
    beta = config.get("beta", 0.05)
    n = config["loss_stream"]["n_experts"]
    T = config["T"]
    bound = 8.0 * math.sqrt(T * (math.log(n) + math.log(1.0 / beta)))
    hits = sum(1 for a in artifacts if a["decomposition"]["phi_regret"] <= bound)
    need = math.ceil((1.0 - beta) * len(artifacts))
    return [("tree_hp_bound", hits >= need, f"{hits}/{len(artifacts)} under {bound:.2f}")]


def _check_tree_decomposition(config, artifacts, params):
    tol = params.get("tol", 1e-9)
    worst = max(a["decomposition"]["identity_residual"] for a in artifacts)
    return [("tree_decomposition_identity", worst <= tol, f"max residual {worst:.3e}")]


def _check_sampling_law(config, artifacts, params):
    h = params.get("h", 3)
    p = np.asarray(params.get("p", [0.5, 0.5]), dtype=float)
    n_draws = params.get("n_draws", 100_000)
    tol = params.get("tol", 0.01)
    maps = [FnMap("halve", lambda x: 0.5 * x), FnMap("third", lambda x: x / 3.0)]
    root = np.array([1.0])
    law = learners.enumerate_tree_distribution(root, maps, h, p)
    rng = np.random.default_rng(params.get("seed", 42))
    counts = {}
    for _ in range(n_draws):
        x = learners.tree_sample(root, h, p, rng, maps)
        key = tuple(np.round(x, 12))
        counts[key] = counts.get(key, 0) + 1
    tv = 0.5 * sum(abs(counts.get(k, 0) / n_draws - q) for k, q in law.items())
    tv += 0.5 * sum(c / n_draws for k, c in counts.items() if k not in law)
    return [("sampling_law_tv", tv <= tol, f"TV {tv:.4f}")]


def _check_hedge_bound(config, artifacts, params):
    T = config["T"]
    ok, worst = True, np.inf
    for a in artifacts:
        for n, regret in a.items():
            bound = 2.0 * math.sqrt(T * math.log(n))
            worst = min(worst, bound - regret)
            ok = ok and regret <= bound
    return [("hedge_bound", ok, f"min margin {worst:.3f}")]


def _check_motzkin(config, artifacts, params):
    tol = params.get("tol", 1e-6)
    worst = max(a["worst_gap"] for a in artifacts)
    return [("motzkin_straus_gap", worst <= tol, f"max gap {worst:.3e}")]


def _check_local_probe(config, artifacts, params):
    ok = all(a["all_ok"] for a in artifacts)
    return [("local_probe_gains", ok, f"{sum(a['n_rows'] for a in artifacts)} probes")]


def _check_og_game(config, artifacts, params):
    tol = params.get("tol", 1e-9)
    T = config["T"]
    results = []
    ok_bound, ok_var = True, True
    min_margin = np.inf
    for a in artifacts:
        game, eta = a["game"], a["eta"]
        n = 2
        for i, traj in enumerate(a["trajs"]):
            D = traj.set.diameter()
            for f in a["families"][i].members():
                P = f.prox_batch(traj.xs, traj.set)
                lhs = float(np.sum(np.sum(traj.grads * (traj.xs - P), axis=1)))
                fv = f.value_batch(np.vstack([P[0], P[-1]]))
                B = float(fv[0] - fv[1])
                rhs = audit.og_game_bound(D, B, n, game.L, game.G, eta, T)["tuned"]
                min_margin = min(min_margin, rhs - lhs)
                ok_bound = ok_bound and lhs <= rhs + tol
        ok_var = ok_var and a["grad_var_max"] <= a["grad_var_bound"] + tol
    results.append(("og_prox_bound", ok_bound, f"min margin {min_margin:.3f}"))
    results.append(("og_gradient_variation", ok_var, ""))
    return results


def _check_conv_bound(config, artifacts, params):
    beta = config.get("beta", 0.05)
    hits = sum(1 for a in artifacts if a["final_regret"] <= a["final_bound"])
    need = math.ceil((1.0 - beta) * len(artifacts))
    return [("conv_mixture_bound", hits >= need, f"{hits}/{len(artifacts)}")]


def _check_int_bound(config, artifacts, params):
    T = config["T"]
    ok_reg, ok_eps = True, True
    for a in artifacts:
        bound = 2.0 * a["delta"] * a["G"] * math.sqrt(T)
        ok_reg = ok_reg and a["int_total"] <= bound + 1e-9
        eps_bound = 2.0 * a["delta"] * a["G"] / math.sqrt(T)  # linear losses: L = 0
        ok_eps = ok_eps and a["epsilon"] <= eps_bound + 1e-12
    return [("int_regret_bound", ok_reg, ""), ("int_certified_epsilon", ok_eps, "")]


def _check_md_bound(config, artifacts, params):
    tol = params.get("tol", 1e-8)
    worst = min(s for a in artifacts for s in a["slacks"])
    return [("md_bound", worst >= -tol, f"min slack {worst:.3e}")]


def _check_conformal(config, artifacts, params):
    id_tol = params.get("identity_tol", 1e-12)
    gap_tol = params.get("gap_tol", 0.02)
    worst_id = max(a["gap"]["identity_residual"] for a in artifacts)
    worst_gap = max(a["gap"]["gap"] for a in artifacts)
    return [
        ("conformal_identity", worst_id <= id_tol, f"max residual {worst_id:.3e}"),
        ("conformal_gap", worst_gap <= gap_tol, f"max gap {worst_gap:.4f}"),
    ]


CHECKS = {
    "gd_prox_bounds": _check_gd_prox_bounds,
    "exact_values": _check_exact_values,
    "beam_growth": _check_beam_growth,
    "tree_hp_bound": _check_tree_hp_bound,
    "tree_decomposition_identity": _check_tree_decomposition,
    "sampling_law": _check_sampling_law,
    "hedge_bound": _check_hedge_bound,
    "motzkin_straus_gap": _check_motzkin,
    "local_probe_gains": _check_local_probe,
    "og_game_bounds": _check_og_game,
    "conv_mixture_bound": _check_conv_bound,
    "int_regret_bound": _check_int_bound,
    "md_bound": _check_md_bound,
    "conformal_identity": _check_conformal,
}


# ---------------------------------------------------------------------------
# top-level execution
# ---------------------------------------------------------------------------


def _n_threads():
    raw = os.environ.get("PHIREG_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return max(1, n) if n else min(8, os.cpu_count() or 1)


def run_config(config, check=False, output=None):
    """Execute a validated scenario config; returns (records, columns, checks)."""
    config = validate_config(config)
    key = (config["scenario"], config.get("variant"))
    if key not in _RUNNERS:
        raise ConfigError(f"variant: no runner for {key}")
    runner, columns = _RUNNERS[key]
    if callable(columns):
        columns = columns(config)
    seeds = config["seeds"]
    results = [None] * len(seeds)
    workers = min(_n_threads(), len(seeds))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(runner, config, seed): i for i, seed in enumerate(seeds)}
            for fut, i in futures.items():
                results[i] = fut.result()
    else:
        for i, seed in enumerate(seeds):
            results[i] = runner(config, seed)
    records = [row for rows, _ in results for row in rows]
    artifacts = [a for _, a in results]
    out_path = output or config.get("output")
    if out_path:
        emit_csv(records, columns, out_path)
    check_results = []
    if check:
        for spec in config.get("checks", []):
            fn = CHECKS[spec["name"]]
            check_results.extend(fn(config, artifacts, spec.get("params", {})))
    return records, columns, check_results


def _scenarios_dir():
    env = os.environ.get("PHIREG_SCENARIOS")
    if env:
        return Path(env)
    local = Path.cwd() / "scenarios"
    if local.is_dir():
        return local
    here = Path(__file__).resolve()
    for parent in here.parents:
        cand = parent / "scenarios"
        if cand.is_dir():
            return cand
    return local


def _cmd_run(args):
    with open(args.config) as fh:
        config = json.load(fh)
    records, columns, checks = run_config(config, check=args.check, output=args.output)
    out = args.output or config.get("output")
    print(f"{config['id']}: {len(records)} records" + (f" -> {out}" if out else ""))
    failed = False
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}" + (f" ({detail})" if detail else ""))
        failed = failed or not ok
    if failed:
        raise CheckFailure("one or more checks failed")


def _cmd_audit(args):
    with open(args.trajectory) as fh:
        tdata = json.load(fh)
    set_ = set_from_config(tdata["set"])
    loss_cfg = tdata.get("loss", {"kind": "linear"})
    kind = loss_cfg.get("kind", "linear")
    if kind == "linear":
        loss_eval = None
    elif kind == "abs1d":
        loss_eval = lambda t, x: abs(float(x[0]))  # noqa: E731
        loss_cfg.setdefault("kinks", [0.0])
    elif kind == "neg_quadratic_1d":
        L = float(loss_cfg["L"])
        loss_eval = lambda t, x, L=L: -0.5 * L * float(x[0]) ** 2  # noqa: E731
    else:
        raise ConfigError(f"loss.kind: unsupported {kind!r} for trajectory auditing")
    traj = audit.Trajectory(
        xs=np.asarray(tdata["xs"], dtype=float),
        grads=np.asarray(tdata["gradients"], dtype=float),
        loss_values=np.asarray(tdata["loss_values"], dtype=float),
        set=set_,
        final_x=np.asarray(tdata["final_x"], dtype=float) if tdata.get("final_x") else None,
        loss_eval=loss_eval,
        loss_kind=kind,
        loss_params=loss_cfg,
    )
    with open(args.deviations) as fh:
        specs = json.load(fh)["deviations"]
    for desc in specs:
        family = desc.get("family")
        if family == "proj" and traj.dim == 1:
            rep = audit.proj_regret_1d(traj, desc["delta"])
        elif family == "int":
            rep = audit.int_regret(traj, desc["delta"])
        elif family == "beam":
            rep = audit.beam_regret(traj, desc["delta"])
        elif family == "finite":
            rep = audit.finite_phi_regret(traj, deviation_set_from_config(desc, set_))
        elif family == "prox_family":
            fam = deviation_set_from_config(desc, set_)
            best = max(
                (audit.proximal_regret(traj, f) for f in fam.members()),
                key=lambda r: r.total,
            )
            rep = best
        elif family == "external":
            rep = audit.external_regret(traj)
        else:
            raise ConfigError(f"deviations: unsupported family {family!r} for auditing")
        print(f"{family}: total={rep.total:.12g} exactness={rep.exactness}")


def _cmd_hardness(args):
    graph = hardness.parse_graph_file(args.graph)
    omega = hardness.clique_number(graph)
    val = hardness.motzkin_straus_max(graph)
    print(f"d={graph.d} omega={omega} simplex_max={val:.9f} gap={abs(val - (1 - 1 / omega)):.3e}")
    if args.k is not None:
        inst = hardness.FkInstance(graph, args.k)
        rng = np.random.default_rng(args.seed)
        pts = inst.domain.sample(rng, args.points)
        improved = 0
        for x in pts:
            dev, gain = hardness.probe_local_maximizer(inst, x, args.delta)
            improved += dev is not None
        print(f"k={args.k} delta={args.delta}: improving deviations at {improved}/{args.points} sampled points")


def _cmd_conformal(args):
    if args.scores == "-":
        scores = [float(ln) for ln in sys.stdin if ln.strip()]
    else:
        with open(args.scores) as fh:
            scores = [float(ln) for ln in fh if ln.strip()]
    state, _ = conformal.run_stream(scores, args.alpha, args.eta, theta0=args.theta0)
    gap = conformal.coverage_gap(state)
    print(
        f"T={state.rounds} miscoverage={gap['miscoverage']:.6f} gap={gap['gap']:.6f} "
        f"drift={gap['drift']:.6f} identity_residual={gap['identity_residual']:.3e}"
    )


def _cmd_list(args):
    d = _scenarios_dir()
    if not d.is_dir():
        print(f"no scenarios directory at {d}")
        return
    for path in sorted(d.glob("*.json")):
        with open(path) as fh:
            cfg = json.load(fh)
        print(f"{path.name}: {cfg.get('id', '?')} ({cfg.get('scenario', '?')}/{cfg.get('variant', '?')})")


def main(argv=None):
    parser = argparse.ArgumentParser(prog="phireg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario config")
    p_run.add_argument("config")
    p_run.add_argument("--check", action="store_true", help="evaluate the config's checks")
    p_run.add_argument("--output", default=None)
    p_run.set_defaults(fn=_cmd_run)

    p_audit = sub.add_parser("audit", help="audit a recorded trajectory file")
    p_audit.add_argument("trajectory")
    p_audit.add_argument("deviations")
    p_audit.set_defaults(fn=_cmd_audit)

    p_hard = sub.add_parser("hardness", help="clique-gap instance probes for a graph file")
    p_hard.add_argument("graph")
    p_hard.add_argument("--k", type=int, default=None)
    p_hard.add_argument("--delta", type=float, default=0.5)
    p_hard.add_argument("--points", type=int, default=50)
    p_hard.add_argument("--seed", type=int, default=0)
    p_hard.set_defaults(fn=_cmd_hardness)

    p_conf = sub.add_parser("conformal", help="run the conformal tracker over a score file")
    p_conf.add_argument("scores")
    p_conf.add_argument("--alpha", type=float, required=True)
    p_conf.add_argument("--eta", type=float, required=True)
    p_conf.add_argument("--theta0", type=float, default=0.0)
    p_conf.set_defaults(fn=_cmd_conformal)

    p_list = sub.add_parser("list-scenarios", help="list shipped scenario configs")
    p_list.set_defaults(fn=_cmd_list)

    args = parser.parse_args(argv)
    try:
        args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except CheckFailure as exc:
        print(f"{exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
