"""Smooth-game container, uncoupled dynamics runner, and equilibrium certification.

Feedback routing enforces uncoupledness: gradient-feedback learners only ever
see their own utility gradient at the realized joint profile, never the
opponents' strategies; the tree sampler receives its own full reward oracle
with the opponents' strategies fixed. One dynamics run is single-threaded;
independent runs (seeds) may execute in parallel.
"""

from __future__ import annotations

import numpy as np

from .audit import Trajectory, linearized_gain, conv_regret_quadratic
from .deviations import ConvFamily, farthest_distance
from .learners import (
    ConvexMixtureLearner,
    GradientDescentLearner,
    MirrorDescentLearner,
    OptimisticGradientLearner,
    TreeSamplerLearner,
)

__all__ = [
    "SmoothGame",
    "EmpiricalDistribution",
    "run_uncoupled_dynamics",
    "certify_phi_equilibrium",
    "bilinear_zero_sum",
    "squared_difference_game",
    "fk_game",
    "single_player_quadratic_reward",
    "TriangleCycleAdversary",
]


class SmoothGame:
    """n players, per-player convex sets, joint utilities with gradients."""

    def __init__(self, sets, utilities, gradients, G=None, L=None, name="game"):
        self.sets = list(sets)
        self.n = len(self.sets)
        self._utilities = list(utilities)
        self._gradients = list(gradients)
        self.G = G
        self.L = L
        self.name = name

    def utility(self, i, profile):
        return float(self._utilities[i](profile))

    def utility_grad(self, i, profile):
        return np.atleast_1d(np.asarray(self._gradients[i](profile), dtype=float))


class EmpiricalDistribution:
    """Uniform distribution over recorded joint profiles with per-player
    utility gradients at each profile."""

    def __init__(self, profiles, utility_grads, sets):
        self.profiles = [np.atleast_2d(np.asarray(p, dtype=float)) for p in profiles]
        self.utility_grads = [np.atleast_2d(np.asarray(g, dtype=float)) for g in utility_grads]
        self.sets = list(sets)
        T = len(self.profiles[0])
        if any(len(p) != T for p in self.profiles):
            raise ValueError("profile lengths must agree across players")
        self.T = T

    @property
    def weights(self):
        return np.full(self.T, 1.0 / self.T)

    def player_points(self, i):
        return self.profiles[i]

    def player_grads(self, i):
        return self.utility_grads[i]


def run_uncoupled_dynamics(game: SmoothGame, learners, T):
    """Lockstep loop: all players emit strategies, then each receives only
    their own feedback at the realized joint profile.

    Returns per-player loss-convention trajectories and the empirical
    distribution of play. Deterministic given the learners' seeds.
    """
    if len(learners) != game.n:
        raise ValueError("one learner per player required")
    if T < 1:
        raise ValueError("T must be >= 1")
    xs = [[] for _ in range(game.n)]
    ugrads = [[] for _ in range(game.n)]
    uvals = [[] for _ in range(game.n)]
    for _ in range(T):
        profile = [ln.next() for ln in learners]
        grads_now = [game.utility_grad(i, profile) for i in range(game.n)]
        for i, ln in enumerate(learners):
            xs[i].append(profile[i].copy())
            ugrads[i].append(grads_now[i])
            uvals[i].append(game.utility(i, profile))
            if isinstance(ln, TreeSamplerLearner):
                others = [p.copy() for p in profile]

                def reward(y, i=i, others=others):
                    mod = list(others)
                    mod[i] = np.atleast_1d(np.asarray(y, dtype=float))
                    return game.utility(i, mod)

                ln.observe(reward)
            elif isinstance(ln, ConvexMixtureLearner):
                ln.observe(grads_now[i])
            else:
                ln.observe(-grads_now[i])
    finals = []
    for ln in learners:
        if isinstance(ln, (GradientDescentLearner, OptimisticGradientLearner, MirrorDescentLearner)):
            finals.append(ln.next())
        else:
            finals.append(None)
    trajs = []
    for i in range(game.n):
        trajs.append(
            Trajectory(
                xs=np.vstack(xs[i]),
                grads=-np.vstack(ugrads[i]),
                loss_values=-np.asarray(uvals[i]),
                set=game.sets[i],
                final_x=finals[i],
                rewards=np.asarray(uvals[i]),
            )
        )
    empirical = EmpiricalDistribution(
        profiles=[np.vstack(x) for x in xs],
        utility_grads=[np.vstack(g) for g in ugrads],
        sets=game.sets,
    )
    return trajs, empirical


def certify_phi_equilibrium(empirical, game, dev_sets, mode="utility", delta=None, L=None):
    """Per-player certified epsilon for the given deviation families.

    mode="utility": exact enumeration of E[u_i(phi(x_i), x_{-i})] - E[u_i(x)]
    for finite families (for mixture families of a quadratic reward the
    exact face-enumeration maximizer is used).
    mode="linearized": linearized deviation gain plus the smoothness slack
    delta^2 L / 2.
    """
    results = []
    L = game.L if L is None else L
    for i, dev_set in enumerate(dev_sets):
        if mode == "utility":
            if not dev_set.enumerable():
                raise ValueError("utility mode needs an enumerable family")
            X = empirical.player_points(i)
            base = np.mean(
                [game.utility(i, _profile_at(empirical, t)) for t in range(empirical.T)]
            )
            if isinstance(dev_set, ConvFamily) and game.n == 1 and hasattr(game, "curvature"):
                total, weights = conv_regret_quadratic(
                    X, dev_set.members(), game.curvature, game.center
                )
                results.append({
                    "epsilon": total / empirical.T,
                    "exactness": "exact",
                    "witness": {"weights": weights},
                })
                continue
            best, best_w = -np.inf, None
            for phi in dev_set.members():
                vals = []
                for t in range(empirical.T):
                    prof = _profile_at(empirical, t)
                    prof[i] = phi.apply(X[t]) if hasattr(phi, "apply") else phi.prox(X[t], empirical.sets[i])
                    vals.append(game.utility(i, prof))
                avg = float(np.mean(vals))
                if avg > best:
                    best, best_w = avg, phi
            exactness = "lower_bound" if isinstance(dev_set, ConvFamily) else "exact"
            results.append({"epsilon": best - float(base), "exactness": exactness, "witness": best_w})
        elif mode == "linearized":
            if delta is None:
                delta = dev_set.locality_delta
            if delta is None:
                raise ValueError("linearized mode needs a locality delta")
            gain, exactness, witness = linearized_gain(empirical, i, dev_set)
            slack = 0.5 * delta**2 * (L or 0.0)
            results.append({"epsilon": gain + slack, "exactness": exactness, "witness": witness})
        else:
            raise ValueError(f"unknown certification mode: {mode!r}")
    return results


def _profile_at(empirical, t):
    return [empirical.profiles[j][t].copy() for j in range(len(empirical.profiles))]


# ---------------------------------------------------------------------------
# shipped game instances
# ---------------------------------------------------------------------------


def bilinear_zero_sum(sets, scale=0.5, shift=0.5):
    """u_1 = shift + scale*x*y, u_2 = shift - scale*x*y on 1-D sets.

    With scale + shift <= 1 the utilities stay in [0, 1]; G = L = scale
    (L in the joint-profile sense).
    """

    def u1(p):
        return shift + scale * float(p[0][0] * p[1][0])

    def u2(p):
        return shift - scale * float(p[0][0] * p[1][0])

    def g1(p):
        return np.array([scale * p[1][0]])

    def g2(p):
        return np.array([-scale * p[0][0]])

    return SmoothGame(sets, [u1, u2], [g1, g2], G=scale, L=scale, name="bilinear_zero_sum")


def squared_difference_game(sets):
    """u_1 = (x_1 - x_2)^2 = -u_2: a game with no pure stationary profile."""

    def u1(p):
        return float((p[0][0] - p[1][0]) ** 2)

    def u2(p):
        return -float((p[0][0] - p[1][0]) ** 2)

    def g1(p):
        return np.array([2.0 * (p[0][0] - p[1][0])])

    def g2(p):
        return np.array([2.0 * (p[0][0] - p[1][0])])

    D = max(s.diameter() for s in sets)
    return SmoothGame(sets, [u1, u2], [g1, g2], G=2.0 * D, L=2.0, name="squared_difference")


def fk_game(graph, k):
    """Single-player game on the nonnegative l1 ball with the clique-gap reward."""
    from .hardness import FkInstance

    inst = FkInstance(graph, k)

    def u(p):
        return inst.value(p[0])

    def g(p):
        return inst.gradient(p[0])

    game = SmoothGame(
        [inst.domain], [u], [g], G=inst.oracle().lipschitz_G, L=inst.oracle().smooth_L,
        name=f"fk(d={graph.d},k={k})",
    )
    game.instance = inst
    return game


def single_player_quadratic_reward(set_, center):
    """u(x) = 1 - ||x - center||^2 / m rescaled so u maps the set into [0, 1]."""
    c = np.atleast_1d(np.asarray(center, dtype=float))
    m = farthest_distance(set_, c) ** 2

    def u(p):
        return 1.0 - float(np.sum((p[0] - c) ** 2)) / m

    def g(p):
        return -2.0 * (p[0] - c) / m

    G = 2.0 * np.sqrt(m) / m
    game = SmoothGame([set_], [u], [g], G=G, L=2.0 / m, name="quadratic_reward")
    game.curvature = 1.0 / m
    game.center = c
    return game


class TriangleCycleAdversary:
    """Adaptive linear-loss adversary that drives descent around a triangle.

    Phase 1 pushes the iterate up the long edge toward the apex, phase 2
    walks it down the slanted edge, phase 3 returns it along the base; unit
    loss gradients throughout, switching phases when the iterate reaches
    each corner region.
    """

    def __init__(self, triangle, tol=1e-9):
        self.triangle = triangle
        self.a, self.b, self.c = (np.asarray(v, dtype=float) for v in triangle.vertices)
        self.tol = tol
        self.phase = 1

    def next_loss_gradient(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.phase == 1 and np.linalg.norm(x - self.b) <= self.tol:
            self.phase = 2
        if self.phase == 2 and x[1] <= self.tol and not np.linalg.norm(x - self.b) <= self.tol:
            self.phase = 3
        if self.phase == 3 and np.linalg.norm(x - self.a) <= self.tol:
            self.phase = 1
        if self.phase == 1:
            d = self.a - self.b
        elif self.phase == 2:
            d = self.b - self.c
        else:
            d = self.c - self.a
        return d / np.linalg.norm(d)
