"""Stateful online learners with a uniform round contract.

Every learner exposes next() -> point to play this round and
observe(feedback) -> advance the state. Gradient-feedback learners (GD, OG,
MD) observe loss gradients; the tree sampler observes a full bounded reward
function; the convex-mixture learner observes a utility gradient. Instances
are single-threaded mutable state; independent instances may run on
different threads. Randomized learners draw from a per-instance seeded
stream and record their seed.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "StepSchedule",
    "GradientDescentLearner",
    "OptimisticGradientLearner",
    "MirrorDescentLearner",
    "HedgeLearner",
    "TreeSamplerLearner",
    "ConvexMixtureLearner",
    "tree_sample",
    "enumerate_tree_distribution",
]


class StepSchedule:
    """Non-increasing positive step sizes eta_t, t = 1, 2, ...

    Variants: constant(eta), inverse_sqrt(scale) with eta_t = scale/sqrt(t),
    and horizon_tuned(D, B_f, G, T) with the constant step
    sqrt((D^2 + 2 B_f) / (G^2 T)).
    """

    def __init__(self, kind, **params):
        self.kind = kind
        self.params = params
        if kind == "constant":
            self._eta0 = float(params["eta"])
        elif kind == "inverse_sqrt":
            self._eta0 = float(params["scale"])
        elif kind == "horizon_tuned":
            D, B_f, G, T = (float(params[k]) for k in ("D", "B_f", "G", "T"))
            self._eta0 = math.sqrt((D**2 + 2.0 * B_f) / (G**2 * T))
        else:
            raise ValueError(f"unknown schedule kind: {kind!r}")
        if self._eta0 <= 0:
            raise ValueError("step sizes must be positive")

    @classmethod
    def constant(cls, eta):
        return cls("constant", eta=eta)

    @classmethod
    def inverse_sqrt(cls, scale):
        return cls("inverse_sqrt", scale=scale)

    @classmethod
    def horizon_tuned(cls, D, B_f, G, T):
        return cls("horizon_tuned", D=D, B_f=B_f, G=G, T=T)

    def eta(self, t):
        if t < 1:
            raise ValueError("rounds are 1-based")
        if self.kind == "inverse_sqrt":
            return self._eta0 / math.sqrt(t)
        return self._eta0

    def is_constant(self):
        return self.kind != "inverse_sqrt"


class GradientDescentLearner:
    """Projected gradient descent: x <- Pi_X[x - eta_t g].

    set_=None runs the unconstrained update (projection is the identity).
    """

    def __init__(self, set_, schedule, x0):
        self.set = set_
        self.schedule = schedule if isinstance(schedule, StepSchedule) else StepSchedule.constant(schedule)
        self.x = np.atleast_1d(np.asarray(x0, dtype=float))
        if set_ is not None and not set_.contains(self.x, tol=1e-9):
            raise ValueError("x0 must be feasible")
        self.t = 0

    def next(self):
        return self.x.copy()

    def observe(self, gradient):
        g = np.atleast_1d(np.asarray(gradient, dtype=float))
        if g.shape != self.x.shape:
            raise ValueError("gradient dimension mismatch")
        self.t += 1
        step = self.x - self.schedule.eta(self.t) * g
        self.x = step if self.set is None else self.set.project(step)


class OptimisticGradientLearner:
    """Optimistic projected gradient with a constant step.

    Plays x^t = Pi_X[w^{t-1} - eta g^{t-1}] and updates
    w^t = Pi_X[w^{t-1} - eta g^t]; the gradient memory starts at zero, so
    the first play is w^0 itself.
    """

    def __init__(self, set_, eta, w0=None):
        self.set = set_
        self.eta = float(eta)
        if w0 is None:
            w0 = set_.project(np.zeros(set_.dimension))
        self.w = np.atleast_1d(np.asarray(w0, dtype=float))
        if not set_.contains(self.w, tol=1e-9):
            raise ValueError("w0 must be feasible")
        self.last_gradient = np.zeros_like(self.w)
        self.t = 0

    def next(self):
        return self.set.project(self.w - self.eta * self.last_gradient)

    def observe(self, gradient):
        g = np.atleast_1d(np.asarray(gradient, dtype=float))
        if g.shape != self.w.shape:
            raise ValueError("gradient dimension mismatch")
        self.t += 1
        self.w = self.set.project(self.w - self.eta * g)
        self.last_gradient = g.copy()


class MirrorDescentLearner:
    """Entropic mirror descent on the probability simplex.

    The shipped distance generator is negentropy, giving the multiplicative
    update p <- p * exp(-eta_t g) renormalized (with a max-shift overflow
    guard). dgf="euclidean" falls back to projected gradient on the simplex.
    """

    def __init__(self, dim, schedule, x0=None, dgf="negentropy"):
        if dgf not in ("negentropy", "euclidean"):
            raise ValueError("dgf must be 'negentropy' or 'euclidean'")
        self.dim = int(dim)
        self.dgf = dgf
        self.schedule = schedule if isinstance(schedule, StepSchedule) else StepSchedule.constant(schedule)
        self.p = np.full(self.dim, 1.0 / self.dim) if x0 is None else np.atleast_1d(np.asarray(x0, dtype=float))
        if abs(self.p.sum() - 1.0) > 1e-9 or np.any(self.p < 0):
            raise ValueError("x0 must lie on the simplex")
        self.t = 0

    def next(self):
        return self.p.copy()

    def observe(self, gradient):
        g = np.atleast_1d(np.asarray(gradient, dtype=float))
        if g.shape != self.p.shape:
            raise ValueError("gradient dimension mismatch")
        self.t += 1
        eta = self.schedule.eta(self.t)
        if self.dgf == "euclidean":
            from .geometry import project_simplex

            self.p = project_simplex(self.p - eta * g)
            return
        z = -eta * g
        z -= np.max(z)
        w = self.p * np.exp(z)
        self.p = w / w.sum()


class HedgeLearner:
    """Multiplicative weights over a finite family, rewards in [0, 1].

    eta defaults to sqrt(log n / T) when the horizon is known and to the
    anytime sqrt(log n / t) otherwise. Log-weights avoid overflow.
    """

    def __init__(self, n, T=None, eta=None):
        self.n = int(n)
        if self.n < 1:
            raise ValueError("need at least one expert")
        self.T = T
        self._eta = eta
        self._logw = np.zeros(self.n)
        self.t = 0

    def _eta_at(self, t):
        if self._eta is not None:
            return float(self._eta)
        if self.T is not None:
            return math.sqrt(math.log(self.n) / self.T) if self.n > 1 else 0.0
        return math.sqrt(math.log(self.n) / t) if self.n > 1 else 0.0

    @property
    def weights(self):
        z = self._logw - np.max(self._logw)
        w = np.exp(z)
        return w / w.sum()

    def next(self):
        return self.weights

    def observe(self, rewards):
        r = np.atleast_1d(np.asarray(rewards, dtype=float))
        if r.shape != (self.n,):
            raise ValueError("reward vector length must equal the family size")
        if np.any(r < -1e-12) or np.any(r > 1.0 + 1e-12):
            raise ValueError("rewards must lie in [0, 1]")
        self.t += 1
        self._logw += self._eta_at(self.t) * r


def tree_sample(root, h, p, rng, maps):
    """One draw from the depth-uniform composition tree.

    Builds x_1 = root, x_j = phi_j(x_{j-1}) with phi_j iid from p, then
    returns x_k for k uniform on {1, ..., h}. Each depth carries mass 1/h.
    """
    if h < 2:
        raise ValueError("tree depth h must be >= 2")
    p = np.asarray(p, dtype=float)
    idxs = rng.choice(len(maps), size=h - 1, p=p)
    path = [np.atleast_1d(np.asarray(root, dtype=float))]
    for j in idxs:
        path.append(maps[j].apply(path[-1]))
    k = int(rng.integers(1, h + 1))
    return path[k - 1]


def enumerate_tree_distribution(root, maps, h, p, decimals=12):
    """Exact law of tree_sample as a dict point-tuple -> probability."""
    p = np.asarray(p, dtype=float)
    root = np.atleast_1d(np.asarray(root, dtype=float))

    def key(x):
        return tuple(np.round(x, decimals))

    level = {key(root): (root, 1.0 / h)}
    law = {}
    for _ in range(h):
        for _, (x, mass) in level.items():
            law[key(x)] = law.get(key(x), 0.0) + mass
        nxt = {}
        for _, (x, mass) in level.items():
            for j, phi in enumerate(maps):
                y = phi.apply(x)
                k = key(y)
                if k in nxt:
                    nxt[k] = (nxt[k][0], nxt[k][1] + mass * p[j])
                else:
                    nxt[k] = (y, mass * p[j])
        level = nxt
    return {k: v for k, v in law.items()}


class TreeSamplerLearner:
    """Randomized minimizer of regret against a finite family of maps.

    Each round: get a distribution p^t over the maps from an internal Hedge,
    play a depth-uniform sample of the composition tree rooted at x_root,
    then feed Hedge the reward vector (u^t(phi(x^t)))_phi. Rewards must lie
    in [0, 1]. Per-round work is h-1 map applications plus |maps| reward
    evaluations (plus one for the played point's own reward, kept for the
    audit log).
    """

    def __init__(self, maps, root, T=None, h=None, seed=0):
        self.maps = list(maps)
        self.root = np.atleast_1d(np.asarray(root, dtype=float))
        if h is None:
            if T is None:
                raise ValueError("need h or T to size the tree")
            h = math.ceil(math.sqrt(T))
        self.h = max(2, int(h))
        self.hedge = HedgeLearner(len(self.maps), T=T)
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.t = 0
        self._pending = None
        self.log = []  # rows (x, u(x), reward_vector, p)
        self.map_applications = 0
        self.reward_evaluations = 0

    def next(self):
        p = self.hedge.next()
        x = tree_sample(self.root, self.h, p, self.rng, self.maps)
        self.map_applications += self.h - 1
        self._pending = (x, p)
        return x.copy()

    def observe(self, reward_fn):
        if self._pending is None:
            raise RuntimeError("observe() called before next()")
        x, p = self._pending
        rewards = np.empty(len(self.maps))
        for j, phi in enumerate(self.maps):
            rewards[j] = reward_fn(phi.apply(x))
        self.map_applications += len(self.maps)
        self.reward_evaluations += len(self.maps)
        ux = float(reward_fn(x))
        self.reward_evaluations += 1
        if not 0.0 - 1e-12 <= ux <= 1.0 + 1e-12:
            raise ValueError("rewards must lie in [0, 1]")
        self.hedge.observe(rewards)
        self.log.append((x.copy(), ux, rewards.copy(), p.copy()))
        self.t += 1
        self._pending = None


class ConvexMixtureLearner:
    """Regret minimization against convex mixtures of delta-local maps.

    Each round: build the deterministic chain x_k = sum_j p^t_j phi_j(x_{k-1})
    from the root, play a uniform draw from the chain, then feed Hedge the
    linearized rewards <grad u^t(x^t), phi(x^t) - x^t> mapped affinely from
    [-G delta, G delta] into [0, 1].
    """

    def __init__(self, maps, root, G, delta, T=None, K=None, seed=0, apply_all=None):
        self.maps = list(maps)
        self.root = np.atleast_1d(np.asarray(root, dtype=float))
        if K is None:
            if T is None:
                raise ValueError("need K or T to size the chain")
            K = math.ceil(math.sqrt(T))
        self.K = max(2, int(K))
        self.G = float(G)
        self.delta = float(delta)
        self.hedge = HedgeLearner(len(self.maps), T=T)
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.t = 0
        self._pending = None
        # optional fused evaluation x -> (len(maps), d) array of phi_j(x)
        self.apply_all = apply_all
        self.log = []  # rows (x, raw_reward_vector, p)

    def _images(self, x):
        if self.apply_all is not None:
            return self.apply_all(x)
        return np.vstack([phi.apply(x) for phi in self.maps])

    def _chain(self, p):
        xs = [self.root]
        for _ in range(self.K - 1):
            xs.append(p @ self._images(xs[-1]))
        return xs

    def next(self):
        p = self.hedge.next()
        xs = self._chain(p)
        k = int(self.rng.integers(0, self.K))
        x = xs[k]
        self._pending = (x, p)
        return x.copy()

    def observe(self, utility_gradient):
        if self._pending is None:
            raise RuntimeError("observe() called before next()")
        x, p = self._pending
        g = np.atleast_1d(np.asarray(utility_gradient, dtype=float))
        raw = (self._images(x) - x) @ g
        cap = self.G * self.delta
        if np.any(np.abs(raw) > cap * (1.0 + 1e-9) + 1e-15):
            raise ValueError(
                "linearized reward exceeds the declared G*delta bound"
            )
        scaled = np.full_like(raw, 0.5) if cap == 0.0 else (raw + cap) / (2.0 * cap)
        scaled = np.clip(scaled, 0.0, 1.0)
        self.hedge.observe(scaled)
        self.log.append((x.copy(), raw.copy(), p.copy()))
        self.t += 1
        self._pending = None
