"""Exact post-hoc regret computation over recorded trajectories.

Every report states whether its inner maximization is exact or a certified
lower bound: a lower bound still refutes equilibrium claims soundly, while
exactness is only claimed where the comparator search provably covers the
maximizer (linear losses, 1-D piecewise builtins, finite families, the
interpolation family, and quadratic rewards for mixture families).

All operations are pure over immutable trajectories.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .deviations import ProxFunction, bregman_prox_negentropy
from .geometry import Ball, Box, Triangle2D

__all__ = [
    "Trajectory",
    "RegretReport",
    "external_regret",
    "proximal_regret",
    "finite_phi_regret",
    "int_regret",
    "proj_regret_1d",
    "beam_regret",
    "linearized_gain",
    "tree_decomposition",
    "gd_prox_bound_series",
    "check_gd_prox_bound",
    "og_game_bound",
    "gradient_variation_sq",
    "check_md_bound",
    "conv_regret_quadratic",
    "fit_growth_exponent",
]


@dataclass
class Trajectory:
    """Recorded play: iterates, loss gradients, loss values, and metadata.

    grads holds loss (sub)gradients at the played points. final_x is the
    post-horizon iterate x^{T+1}, needed by the descent bound checks.
    loss_eval(t, x) evaluates the round-t loss anywhere; loss_kind tags the
    structure the auditors may exploit ("linear", "abs1d", ...).
    """

    xs: np.ndarray
    grads: np.ndarray
    loss_values: np.ndarray
    set: object = None
    final_x: np.ndarray | None = None
    loss_eval: object = None
    loss_kind: str | None = None
    loss_params: dict = field(default_factory=dict)
    rewards: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.xs = np.atleast_2d(np.asarray(self.xs, dtype=float))
        self.grads = np.atleast_2d(np.asarray(self.grads, dtype=float))
        self.loss_values = np.asarray(self.loss_values, dtype=float)
        if not (len(self.xs) == len(self.grads) == len(self.loss_values)):
            raise ValueError("trajectory arrays must have consistent lengths")
        if self.set is not None:
            for x in self.xs:
                if not self.set.contains(x, tol=1e-7):
                    raise ValueError("trajectory leaves the feasible set")

    @property
    def T(self):
        return len(self.xs)

    @property
    def dim(self):
        return self.xs.shape[1]

    def loss_at(self, t, x):
        if self.loss_eval is not None:
            return float(self.loss_eval(t, np.atleast_1d(np.asarray(x, dtype=float))))
        if self.loss_kind == "linear":
            return float(self.grads[t] @ np.atleast_1d(x))
        raise ValueError("trajectory carries no loss evaluator")


@dataclass
class RegretReport:
    total: float
    per_round_cumulative: np.ndarray
    witness: object
    exactness: str = "exact"
    linearized_total: float | None = None
    linearized_cumulative: np.ndarray | None = None

    def __post_init__(self):
        if len(self.per_round_cumulative) and not np.isclose(
            self.total, self.per_round_cumulative[-1], rtol=0, atol=1e-9
        ):
            raise ValueError("total must equal the last cumulative entry")


def _golden_section_min(fn, lo, hi, tol=1e-12, max_iter=200):
    phi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - phi * (b - a), a + phi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(max_iter):
        if b - a < tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def external_regret(traj: Trajectory, candidates=None) -> RegretReport:
    """max over fixed comparators of the cumulative loss gap.

    Exact for linear losses (comparator from the support maximizer of the
    aggregate gradient) and 1-D piecewise builtins (kinks plus endpoints);
    1-D convex losses use golden section; otherwise a supplied candidate
    grid yields a certified lower bound.
    """
    played = float(np.sum(traj.loss_values))
    if traj.loss_kind == "linear":
        agg = traj.grads.sum(axis=0)
        point, _ = traj.set.support_maximizer(-agg)
        series = np.cumsum(traj.loss_values - traj.grads @ point)
        return RegretReport(float(series[-1]), series, point, "exact")

    def total_at(c):
        return sum(traj.loss_at(t, c) for t in range(traj.T))

    if traj.dim == 1 and isinstance(traj.set, Box):
        lo, hi = float(traj.set.lo[0]), float(traj.set.hi[0])
        kinks = [k for k in traj.loss_params.get("kinks", []) if lo <= k <= hi]
        if traj.loss_kind in ("abs1d", "piecewise_linear") or kinks:
            cands = np.array(sorted({lo, hi, *kinks}))
            exact = "exact"
        elif traj.loss_params.get("convex", False):
            c_star = _golden_section_min(lambda c: total_at(np.array([c])), lo, hi)
            cands = np.array(sorted({lo, hi, c_star}))
            exact = "exact"
        elif candidates is not None:
            cands = np.asarray(candidates, dtype=float).ravel()
            exact = "lower_bound"
        else:
            raise ValueError("non-convex losses need a candidate grid")
        totals = [total_at(np.array([c])) for c in cands]
        i = int(np.argmin(totals))
        point = np.array([cands[i]])
        series = np.cumsum([traj.loss_values[t] - traj.loss_at(t, point) for t in range(traj.T)])
        return RegretReport(float(series[-1]), series, point, exact)

    if candidates is None:
        raise ValueError("exact comparator search is limited to linear and 1-D losses")
    totals = [total_at(np.atleast_1d(c)) for c in candidates]
    i = int(np.argmin(totals))
    point = np.atleast_1d(np.asarray(candidates[i], dtype=float))
    series = np.cumsum([traj.loss_values[t] - traj.loss_at(t, point) for t in range(traj.T)])
    return RegretReport(float(series[-1]), series, point, "lower_bound")


def proximal_regret(traj: Trajectory, f: ProxFunction) -> RegretReport:
    """Cumulative loss gap against prox_f, plus its linearized variant."""
    P = f.prox_batch(traj.xs, traj.set)
    diffs = np.array([traj.loss_values[t] - traj.loss_at(t, P[t]) for t in range(traj.T)])
    series = np.cumsum(diffs)
    lin = np.cumsum(np.sum(traj.grads * (traj.xs - P), axis=1))
    return RegretReport(
        float(series[-1]), series, f, "exact",
        linearized_total=float(lin[-1]), linearized_cumulative=lin,
    )


def finite_phi_regret(traj: Trajectory, members) -> RegretReport:
    """Exact enumeration over a finite family; ties break to the lowest index."""
    if hasattr(members, "members"):
        members = members.members()
    best_idx, best_total, best_series = None, -np.inf, None
    for idx, phi in enumerate(members):
        diffs = np.array(
            [traj.loss_values[t] - traj.loss_at(t, phi.apply(traj.xs[t])) for t in range(traj.T)]
        )
        series = np.cumsum(diffs)
        if series[-1] > best_total + 1e-15:
            best_idx, best_total, best_series = idx, float(series[-1]), series
    return RegretReport(best_total, best_series, members[best_idx], "exact")


def int_regret(traj: Trajectory, delta) -> RegretReport:
    """Regret against interpolations (1-lam)x + lam x*, lam <= delta/diam.

    Exact for linear losses: the gain is lam * (sum <g_t, x_t> - <sum g, x*>),
    linear in x* and monotone in lam.
    """
    if traj.loss_kind != "linear":
        raise ValueError("interpolation regret is exact-audited for linear losses only")
    D = traj.set.diameter()
    lam_max = 0.0 if D == 0 else min(1.0, float(delta) / D)
    agg = traj.grads.sum(axis=0)
    point, neg_val = traj.set.support_maximizer(-agg)
    inner = np.sum(traj.grads * traj.xs, axis=1)
    gain_at_lam1 = float(np.sum(inner) + neg_val)
    lam = lam_max if gain_at_lam1 > 0 else 0.0
    series = lam * np.cumsum(inner - traj.grads @ point)
    total = max(0.0, lam_max * gain_at_lam1)
    if lam == 0.0:
        series = np.zeros(traj.T)
        total = 0.0
    return RegretReport(total, series, {"lam": lam, "target": point}, "exact")


def proj_regret_1d(traj: Trajectory, delta) -> RegretReport:
    """Regret against projected fixed steps v in [-delta, delta] on a 1-D set.

    The candidate set contains all breakpoints of the piecewise-structured
    gain (loss kinks and clipping onsets) plus the endpoints, and a golden
    section refinement for smooth losses; exact when the per-round losses
    are piecewise linear (gain is then piecewise linear in v) or when the
    total gain is convex in v (pure quadratic losses, no clipping).
    """
    delta = float(delta)
    lo, hi = float(traj.set.lo[0]), float(traj.set.hi[0])
    xs = traj.xs[:, 0]
    kinks = list(traj.loss_params.get("kinks", []))
    cands = {-delta, 0.0, delta}
    for k in kinks:
        for x in np.unique(xs):
            v = x - k
            if -delta <= v <= delta:
                cands.add(float(v))
    for x in np.unique(xs):
        for bound in (lo, hi):
            v = x - bound
            if -delta <= v <= delta:
                cands.add(float(v))

    def gain(v):
        moved = np.clip(xs - v, lo, hi)
        return sum(
            traj.loss_values[t] - traj.loss_at(t, np.array([moved[t]])) for t in range(traj.T)
        )

    v_star = _golden_section_min(lambda v: -gain(v), -delta, delta, tol=1e-11)
    cands.add(float(v_star))
    cand_list = sorted(cands)
    gains = [gain(v) for v in cand_list]
    i = int(np.argmax(gains))
    v = cand_list[i]
    moved = np.clip(xs - v, lo, hi)
    series = np.cumsum(
        [traj.loss_values[t] - traj.loss_at(t, np.array([moved[t]])) for t in range(traj.T)]
    )
    exact = "exact" if traj.loss_kind in ("linear", "abs1d", "piecewise_linear", "neg_quadratic_1d") else "lower_bound"
    return RegretReport(float(series[-1]), series, {"v": v}, exact)


def _beam_directions(dim, delta, n_directions, rng):
    if dim == 2:
        angles = np.linspace(0.0, 2.0 * np.pi, n_directions, endpoint=False)
        dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    else:
        dirs = rng.standard_normal((n_directions, dim))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    axes = np.vstack([np.eye(dim), -np.eye(dim)])
    return delta * np.vstack([axes, dirs])


def beam_regret(traj: Trajectory, delta, n_directions=64, rng=None) -> RegretReport:
    """Regret against beam steps over a direction grid; a certified lower bound."""
    rng = rng or np.random.default_rng(0)
    dirs = _beam_directions(traj.dim, float(delta), n_directions, rng)
    best_total, best_series, best_v = -np.inf, None, None
    for v in dirs:
        if isinstance(traj.set, Triangle2D):
            lams = traj.set.ray_max_step_batch(traj.xs, -v)
            moved = traj.xs - lams[:, None] * v
        else:
            moved = np.vstack(
                [traj.xs[t] - traj.set.ray_max_step(traj.xs[t], -v) * v for t in range(traj.T)]
            )
        if traj.loss_kind == "linear":
            diffs = np.sum(traj.grads * (traj.xs - moved), axis=1)
        else:
            diffs = np.array(
                [traj.loss_values[t] - traj.loss_at(t, moved[t]) for t in range(traj.T)]
            )
        series = np.cumsum(diffs)
        if series[-1] > best_total:
            best_total, best_series, best_v = float(series[-1]), series, v.copy()
    return RegretReport(best_total, best_series, {"v": best_v}, "lower_bound")


# ---------------------------------------------------------------------------
# linearized deviation gains over an empirical distribution
# ---------------------------------------------------------------------------


def _interior_margin(set_, points, delta):
    """True when every point is feasible with a delta margin to the boundary."""
    if isinstance(set_, Ball):
        return bool(np.all(np.linalg.norm(points - set_.center, axis=1) <= set_.radius - delta))
    if isinstance(set_, Box):
        return bool(
            np.all(points - set_.lo >= delta) and np.all(set_.hi - points >= delta)
        )
    return False


def linearized_gain(empirical, player, dev_set, n_starts=20, rng=None):
    """max over the family of E[<grad u, phi(x) - x>] with exactness label.

    Returns (gain, exactness, witness). Interpolation families are exact;
    finite and mixture families are exact by vertex enumeration (the gain is
    linear in the mixture weights); the projection family is exact only when
    all support points are interior by margin delta, else a multistart
    projected ascent yields a lower bound; beam families are lower bounds.
    """
    rng = rng or np.random.default_rng(0)
    X = empirical.player_points(player)
    U = empirical.player_grads(player)
    if len(X) == 0:
        raise ValueError("empty support")
    set_ = empirical.sets[player]
    variant = getattr(dev_set, "variant", None)

    if variant == "int" or variant == "int_plus":
        gbar = U.mean(axis=0)
        avg_inner = float(np.mean(np.sum(U * X, axis=1)))
        D = set_.diameter()
        lam_max = 0.0 if D == 0 else min(1.0, dev_set.delta / D)
        point, val = set_.support_maximizer(gbar)
        gain = max(0.0, lam_max * (float(val) - avg_inner))
        witness = {"lam": lam_max, "target": point}
        if variant == "int_plus":
            shrink = dev_set.shrink_map(set_.dimension)
            sg = float(np.mean([U[t] @ (shrink.apply(X[t]) - X[t]) for t in range(len(X))]))
            if sg > gain:
                gain, witness = sg, {"map": shrink.name}
        return gain, "exact", witness

    if variant in ("finite", "conv", "prox_family"):
        members = dev_set.members()
        best, best_w = -np.inf, None
        for phi in members:
            if isinstance(phi, ProxFunction):
                moved = phi.prox_batch(X, set_)
                g = float(np.mean(np.sum(U * (moved - X), axis=1)))
                name = phi
            else:
                g = float(np.mean([U[t] @ (phi.apply(X[t]) - X[t]) for t in range(len(X))]))
                name = phi
            if g > best:
                best, best_w = g, name
        return best, "exact", best_w

    if variant == "proj":
        delta = dev_set.delta
        gbar = U.mean(axis=0)

        def h(v):
            moved = set_._project_batch(X - v)
            return float(np.mean(np.sum(U * (moved - X), axis=1)))

        if _interior_margin(set_, X, delta) and np.linalg.norm(gbar) > 0:
            v = -delta * gbar / np.linalg.norm(gbar)
            return h(v), "exact", {"v": v}
        cands = []
        if np.linalg.norm(gbar) > 0:
            cands.append(-delta * gbar / np.linalg.norm(gbar))
            cands.append(delta * gbar / np.linalg.norm(gbar))
        best, best_v = max(((h(v), v) for v in cands), default=(-np.inf, None), key=lambda p: p[0])
        d = set_.dimension
        for _ in range(n_starts):
            v = rng.standard_normal(d)
            v *= delta * rng.uniform() / np.linalg.norm(v)
            step = delta / 4.0
            val = h(v)
            for _ in range(60):
                grad = np.empty(d)
                eps = 1e-6 * delta
                for j in range(d):
                    e = np.zeros(d)
                    e[j] = eps
                    grad[j] = (h(v + e) - h(v - e)) / (2 * eps)
                v_new = v + step * grad
                nv = np.linalg.norm(v_new)
                if nv > delta:
                    v_new *= delta / nv
                val_new = h(v_new)
                if val_new < val - 1e-14:
                    step *= 0.5
                    if step < 1e-8 * delta:
                        break
                    continue
                if abs(val_new - val) < 1e-13:
                    v, val = v_new, val_new
                    break
                v, val = v_new, val_new
            if val > best:
                best, best_v = val, v
        return best, "lower_bound", {"v": best_v}

    if variant == "beam":
        delta = dev_set.delta
        dirs = _beam_directions(set_.dimension, delta, 32, rng)
        best, best_v = -np.inf, None
        for v in dirs:
            moved = np.vstack(
                [X[t] - set_.ray_max_step(X[t], -v) * v for t in range(len(X))]
            )
            g = float(np.mean(np.sum(U * (moved - X), axis=1)))
            if g > best:
                best, best_v = g, v
        return best, "lower_bound", {"v": best_v}

    raise ValueError(f"no linearized-gain rule for family {variant!r}")


# ---------------------------------------------------------------------------
# identities and bound checks
# ---------------------------------------------------------------------------


def tree_decomposition(log):
    """Split the recorded tree-sampler run's family regret into its two parts.

    Returns a dict with the family regret (from the recorded reward tables),
    the internal Hedge regret, the stationarity error term, and the identity
    residual |family - hedge - stationarity| (zero in exact arithmetic).
    """
    R = np.vstack([row[2] for row in log])
    P = np.vstack([row[3] for row in log])
    ux = np.array([row[1] for row in log])
    totals = R.sum(axis=0)
    expected = np.sum(P * R, axis=1)
    phi_regret = float(np.max(totals) - np.sum(ux))
    hedge_regret = float(np.max(totals) - np.sum(expected))
    stationarity = float(np.sum(expected) - np.sum(ux))
    return {
        "phi_regret": phi_regret,
        "hedge_regret": hedge_regret,
        "stationarity": stationarity,
        "identity_residual": abs(phi_regret - (hedge_regret + stationarity)),
        "witness": int(np.argmax(totals)),
    }


def gd_prox_bound_series(traj: Trajectory, f: ProxFunction, eta=None):
    """Per-round LHS/RHS of the constant-step descent bound for prox_f.

    LHS_t = sum_{s<=t} <g_s, x_s - p_s>. RHS_t uses D = ||x_1 - p_1||,
    B = f(p_1) - f(p_t), the distance ||x_{t+1} - p_t||^2, the step-energy
    sum, and (for convex f) the consecutive prox displacement sum.
    Requires final_x; the series' last entries are the horizon check.
    """
    if eta is None:
        eta = traj.meta.get("eta")
    if eta is None:
        raise ValueError("need the constant step size eta")
    if traj.final_x is None:
        raise ValueError("trajectory must record the post-horizon iterate")
    eta = float(eta)
    xs_next = np.vstack([traj.xs[1:], np.atleast_2d(traj.final_x)])
    P = f.prox_batch(traj.xs, traj.set)
    lhs = np.cumsum(np.sum(traj.grads * (traj.xs - P), axis=1))
    D2 = float(np.sum((traj.xs[0] - P[0]) ** 2))
    fvals = f.value_batch(P)
    B = fvals[0] - fvals
    dist_next = np.sum((xs_next - P) ** 2, axis=1)
    grad_energy = (eta / 2.0) * np.cumsum(np.sum(traj.grads**2, axis=1))
    rhs = (D2 + 2.0 * B - dist_next) / (2.0 * eta) + grad_energy
    if f.f_class == "convex":
        pair = np.sum((P[:-1] - P[1:]) ** 2, axis=1)
        pair_cum = np.concatenate([[0.0], np.cumsum(pair)])
        rhs = rhs - pair_cum / (2.0 * eta)
    return lhs, rhs


def check_gd_prox_bound(traj: Trajectory, f: ProxFunction, eta=None):
    lhs, rhs = gd_prox_bound_series(traj, f, eta)
    return {"lhs": float(lhs[-1]), "rhs": float(rhs[-1]), "slack": float(rhs[-1] - lhs[-1])}


def og_game_bound(D, B_f, n, L, G, eta, T):
    """RHS of the optimistic-gradient bound in games, raw and eta=T^(-1/4) forms."""
    raw = (D**2 + 2.0 * B_f) / eta + 2.0 * eta * G**2 + 3.0 * n * L**2 * G**2 * eta**3 * T
    tuned = (D**2 + 2.0 * B_f + 4.0 * n * L**2 * G**2) * T**0.25
    return {"raw": float(raw), "tuned": float(tuned)}


def gradient_variation_sq(grads):
    """Per-round squared gradient variation ||g_t - g_{t-1}||^2 for t >= 2."""
    G = np.atleast_2d(np.asarray(grads, dtype=float))
    return np.sum((G[1:] - G[:-1]) ** 2, axis=1)


def check_md_bound(traj: Trajectory, f: ProxFunction, eta, G):
    """Entropic-descent bound check: linearized regret vs its guaranteed RHS."""
    if traj.final_x is None:
        raise ValueError("trajectory must record the post-horizon iterate")
    P = bregman_prox_negentropy(f, traj.xs)
    p_final = bregman_prox_negentropy(f, traj.final_x)
    lhs = float(np.sum(np.sum(traj.grads * (traj.xs - P), axis=1)))
    p1, x1 = P[0], traj.xs[0]
    kl = float(np.sum(p1 * np.log(p1 / x1)))
    rhs = (kl + f.value(p1) - f.value(p_final)) / eta + eta * G**2 * traj.T / 2.0
    return {"lhs": lhs, "rhs": float(rhs), "slack": float(rhs - lhs)}


def conv_regret_quadratic(xs, maps, curvature, center):
    """Exact mixture-family regret for rewards u(x) = const - curvature*||x - center||^2.

    Maximizes sum_t u(phi_p(x_t)) - u(x_t) over mixture weights p on the
    simplex. The objective is concave quadratic in p, so the maximizer is
    found exactly by enumerating active sets (faces of the simplex) and
    solving each face's stationarity system.
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    T, d = xs.shape
    m = len(maps)
    Phi = np.empty((T, d, m))
    for j, phi in enumerate(maps):
        for t in range(T):
            Phi[t, :, j] = phi.apply(xs[t])
    C = Phi - np.asarray(center, dtype=float)[None, :, None]
    Q = np.einsum("tdi,tdj->ij", C, C)
    S = float(np.sum(np.sum((xs - center) ** 2, axis=1)))

    best_quad, best_p = np.inf, None
    for r in range(1, m + 1):
        for support in itertools.combinations(range(m), r):
            idx = list(support)
            k = len(idx)
            # stationarity of p'Qp on the face: 2 Q_ss p + nu 1 = 0, sum p = 1
            A = np.zeros((k + 1, k + 1))
            A[:k, :k] = 2.0 * Q[np.ix_(idx, idx)]
            A[:k, k] = 1.0
            A[k, :k] = 1.0
            rhs = np.zeros(k + 1)
            rhs[k] = 1.0
            sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
            p_face = sol[:k]
            if np.any(p_face < -1e-9):
                continue
            p_face = np.clip(p_face, 0.0, None)
            s = p_face.sum()
            if s <= 0:
                continue
            p_face /= s
            p = np.zeros(m)
            p[idx] = p_face
            val = float(p @ Q @ p)
            if val < best_quad:
                best_quad, best_p = val, p
    regret = float(curvature) * (S - best_quad)
    return regret, best_p


def fit_growth_exponent(ts, values, skip_frac=0.1):
    """Least-squares slope of log(values) vs log(t), excluding the first
    skip_frac of rounds and nonpositive values."""
    ts = np.asarray(ts, dtype=float)
    vals = np.asarray(values, dtype=float)
    cutoff = skip_frac * ts.max()
    mask = (ts > cutoff) & (vals > 0)
    if mask.sum() < 2:
        raise ValueError("not enough positive points to fit a growth exponent")
    lx, ly = np.log(ts[mask]), np.log(vals[mask])
    slope = float(np.polyfit(lx, ly, 1)[0])
    return slope
