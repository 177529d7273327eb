"""Strategy-modification families and proximal operators.

A ProxFunction is an f whose prox map argmin_{y in X} f(y) + 0.5||y - x||^2
is either closed-form (linear, quadratic-to-anchor, indicator, symmetric
affine) or solved iteratively (generic). Deviation objects are single maps
X -> X; DeviationSet variants describe the families the auditors certify
against: finite lists, projection steps, interpolations, the interpolation
family plus one shrink map, beam steps, prox families, and convex mixtures.
"""

from __future__ import annotations

import numpy as np

from .geometry import ConvexSet, Ball, Box, Interval

__all__ = [
    "NumericalError",
    "ProxFunction",
    "LinearProx",
    "QuadToAnchorProx",
    "IndicatorProx",
    "SymmetricAffineProx",
    "GenericProx",
    "prox",
    "bregman_prox_negentropy",
    "Deviation",
    "IdentityMap",
    "ConstantMap",
    "FnMap",
    "IntDeviation",
    "ShrinkMap",
    "BeamDeviation",
    "ProxDeviation",
    "DeviationSet",
    "FiniteDeviations",
    "ProjFamily",
    "IntFamily",
    "IntPlusFamily",
    "BeamFamily",
    "ProxFamily",
    "ConvFamily",
    "named_map",
    "register_named_map",
    "make_prox_family",
    "prox_function_from_config",
    "farthest_distance",
    "deviation_set_from_config",
]


class NumericalError(RuntimeError):
    """Iterative solver failed to reach its residual target."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


def farthest_distance(set_: ConvexSet, point):
    """Exact max of ||y - point|| over the set (vertex/boundary arguments)."""
    p = np.atleast_1d(np.asarray(point, dtype=float))
    if isinstance(set_, Ball):
        return float(np.linalg.norm(p - set_.center) + set_.radius)
    if isinstance(set_, Box):
        per = np.maximum(np.abs(set_.lo - p), np.abs(set_.hi - p))
        return float(np.linalg.norm(per))
    kind = set_.kind
    if kind == "simplex":
        d = set_.dimension
        verts = np.eye(d)
        return float(np.max(np.linalg.norm(verts - p, axis=1)))
    if kind == "nonneg_l1_ball":
        d = set_.dimension
        verts = np.vstack([np.zeros(d), set_.budget * np.eye(d)])
        return float(np.max(np.linalg.norm(verts - p, axis=1)))
    if kind == "triangle2d":
        return float(np.max(np.linalg.norm(set_.vertices - p, axis=1)))
    raise ValueError(f"no farthest-distance rule for set kind {kind!r}")


# ---------------------------------------------------------------------------
# prox functions
# ---------------------------------------------------------------------------


class ProxFunction:
    """One f together with its prox map over a feasible set.

    f_class is "convex" (lower-semicontinuous convex) or "smooth"
    (smoothness constant strictly below 1); the class decides which form of
    the displacement inequality and regret bound applies.
    """

    f_class = "convex"
    tag = "abstract"
    apriori_B = None  # user-supplied a-priori bound on max f(p) - min f(p)

    def value(self, p):
        raise NotImplementedError

    def value_batch(self, P):
        return np.array([self.value(p) for p in np.atleast_2d(P)])

    def grad(self, p):
        raise NotImplementedError

    def prox(self, x, set_):
        return self.prox_batch(np.atleast_2d(np.asarray(x, dtype=float)), set_)[0]

    def prox_batch(self, X, set_):
        raise NotImplementedError

    def range_bound(self, set_):
        """Closed-form upper bound on max f - min f over the set, or None."""
        return None

    def validate(self, set_, rng, n_samples=64):
        """Type-invariant checks that need the feasible set; raises on failure."""
        return None

    def to_config(self):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.to_config()})"


class LinearProx(ProxFunction):
    """f(y) = <v, y>; prox(x) = Pi_X[x - v] (a projected fixed step)."""

    tag = "linear"

    def __init__(self, v):
        self.v = np.atleast_1d(np.asarray(v, dtype=float))

    def value(self, p):
        return float(self.v @ np.atleast_1d(p))

    def value_batch(self, P):
        return np.atleast_2d(P) @ self.v

    def grad(self, p):
        return self.v.copy()

    def prox_batch(self, X, set_):
        return set_._project_batch(X - self.v)

    def range_bound(self, set_):
        _, hi = set_.support_maximizer(self.v)
        _, neg = set_.support_maximizer(-self.v)
        return float(hi + neg)

    def to_config(self):
        return {"kind": "linear", "v": self.v.tolist()}


class QuadToAnchorProx(ProxFunction):
    """f(y) = (lam/(1-lam)) * 0.5 ||y - anchor||^2; prox(x) = (1-lam)x + lam*anchor."""

    tag = "quad_to_anchor"

    def __init__(self, lam, anchor):
        lam = float(lam)
        if not 0.0 <= lam < 1.0:
            raise ValueError("quad_to_anchor requires 0 <= lam < 1")
        self.lam = lam
        self.anchor = np.atleast_1d(np.asarray(anchor, dtype=float))
        self._c = lam / (1.0 - lam)

    def value(self, p):
        return 0.5 * self._c * float(np.sum((np.atleast_1d(p) - self.anchor) ** 2))

    def value_batch(self, P):
        D = np.atleast_2d(P) - self.anchor
        return 0.5 * self._c * np.sum(D * D, axis=1)

    def grad(self, p):
        return self._c * (np.atleast_1d(p) - self.anchor)

    def prox_batch(self, X, set_):
        # the unconstrained minimizer is a convex combination of feasible
        # points, hence feasible: no projection needed when anchor is in X
        return (1.0 - self.lam) * X + self.lam * self.anchor

    def range_bound(self, set_):
        far = farthest_distance(set_, self.anchor)
        return 0.5 * self._c * far**2

    def validate(self, set_, rng, n_samples=64):
        if not set_.contains(self.anchor, tol=1e-7):
            raise ValueError("quad_to_anchor anchor must lie in the feasible set")

    def to_config(self):
        return {"kind": "quad_to_anchor", "lam": self.lam, "anchor": self.anchor.tolist()}


class IndicatorProx(ProxFunction):
    """f = indicator of a convex subset; prox = projection onto the subset."""

    tag = "indicator"

    def __init__(self, subset):
        self.subset = subset

    def value(self, p):
        return 0.0 if self.subset.contains(np.atleast_1d(p), tol=1e-6) else float("inf")

    def value_batch(self, P):
        # prox trajectories lie inside the subset, where f vanishes
        P = np.atleast_2d(P)
        out = np.zeros(P.shape[0])
        proj = self.subset._project_batch(P)
        out[np.linalg.norm(P - proj, axis=1) > 1e-6] = float("inf")
        return out

    def grad(self, p):
        return np.zeros(self.subset.dimension)

    def prox_batch(self, X, set_):
        return self.subset._project_batch(X)

    def range_bound(self, set_):
        return 0.0

    def validate(self, set_, rng, n_samples=64):
        pts = self.subset.sample(rng, n_samples)
        for p in pts:
            if not set_.contains(p, tol=1e-7):
                raise ValueError("indicator subset must be contained in the feasible set")

    def to_config(self):
        return {"kind": "indicator", "subset": self.subset.to_config()}


class SymmetricAffineProx(ProxFunction):
    """prox(x) = A x + b for symmetric A; f(y) = 0.5 y^T (A^-1 - I) y - (A^-1 b)^T y.

    A must be symmetric positive definite with either sigma_max <= 1
    (f convex) or sigma_min > 1/2 (f smooth with constant < 1), and the
    affine map must send the feasible set into itself.
    """

    tag = "symmetric_affine"

    def __init__(self, A, b):
        A = np.asarray(A, dtype=float)
        if A.ndim == 0:
            A = A.reshape(1, 1)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("A must be square")
        if not np.allclose(A, A.T, atol=1e-10):
            raise ValueError("A must be symmetric")
        eig = np.linalg.eigvalsh(A)
        smin, smax = float(eig[0]), float(eig[-1])
        if smin <= 0:
            raise ValueError("A must be positive definite")
        if smax > 1.0 + 1e-12 and smin <= 0.5:
            raise ValueError("A needs sigma_max <= 1 or sigma_min > 1/2")
        self.A = A
        self.b = np.atleast_1d(np.asarray(b, dtype=float))
        Ainv = np.linalg.inv(A)
        self._M = Ainv - np.eye(A.shape[0])
        self._c = Ainv @ self.b
        self.f_class = "convex" if smax <= 1.0 + 1e-12 else "smooth"
        self._eig_range = (smin, smax)

    def value(self, p):
        p = np.atleast_1d(p)
        return 0.5 * float(p @ self._M @ p) - float(self._c @ p)

    def value_batch(self, P):
        P = np.atleast_2d(P)
        return 0.5 * np.sum((P @ self._M) * P, axis=1) - P @ self._c

    def grad(self, p):
        return self._M @ np.atleast_1d(p) - self._c

    def prox_batch(self, X, set_):
        return X @ self.A.T + self.b

    def range_bound(self, set_):
        # valid for sets inside a ball of radius R around the origin
        R = farthest_distance(set_, np.zeros(self.A.shape[0]))
        eig = np.linalg.eigvalsh(self._M)
        hi = 0.5 * max(eig[-1], 0.0) * R**2 + abs(float(np.linalg.norm(self._c))) * R
        lo = 0.5 * min(eig[0], 0.0) * R**2 - abs(float(np.linalg.norm(self._c))) * R
        return hi - lo

    def validate(self, set_, rng, n_samples=64):
        pts = set_.sample(rng, n_samples)
        img = pts @ self.A.T + self.b
        for y in img:
            if not set_.contains(y, tol=1e-7):
                raise ValueError("A x + b must stay inside the feasible set")

    def to_config(self):
        return {"kind": "symmetric_affine", "A": self.A.tolist(), "b": self.b.tolist()}


class GenericProx(ProxFunction):
    """Iterative prox for a DiffOracle f (convex, or smooth with L < 1).

    Projected gradient on p -> f(p) + 0.5||p - x||^2 with step 1/(1 + L_f);
    the objective is 1-strongly convex so convergence is linear. Stops when
    the step norm drops below step_tol; raises NumericalError after max_iter.
    """

    tag = "generic"

    def __init__(self, oracle, step_tol=1e-10, max_iter=100_000):
        if oracle.smooth_L is None:
            raise ValueError("generic prox requires a declared smooth_L")
        if oracle.convexity_tag != "convex" and not oracle.smooth_L < 1.0:
            raise ValueError("generic prox requires convex f or smooth_L < 1")
        self.oracle = oracle
        self.step_tol = float(step_tol)
        self.max_iter = int(max_iter)
        self.f_class = "convex" if oracle.convexity_tag == "convex" else "smooth"

    def value(self, p):
        return self.oracle.value(p)

    def grad(self, p):
        return self.oracle.gradient(p)

    def prox(self, x, set_):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        L = self.oracle.smooth_L
        tau = 1.0 / (1.0 + L)
        p = set_.project(x)
        for _ in range(self.max_iter):
            g = self.oracle.gradient(p) + (p - x)
            p_next = set_.project(p - tau * g)
            step = float(np.linalg.norm(p_next - p))
            p = p_next
            if step <= self.step_tol:
                return p
        residual = self._residual(p, x, set_, tau)
        raise NumericalError(
            f"prox solver did not converge within {self.max_iter} iterations",
            residual=residual,
        )

    def _residual(self, p, x, set_, tau):
        g = self.oracle.gradient(p) + (p - x)
        return float(np.linalg.norm(p - set_.project(p - tau * g)) / tau)

    def prox_batch(self, X, set_):
        return np.vstack([self.prox(x, set_) for x in X])

    def to_config(self):
        return {"kind": "generic", "oracle": self.oracle.tag}


def prox(f: ProxFunction, x, set_: ConvexSet):
    """Evaluate prox_f(x) over the set; x must be feasible."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if not set_.contains(x, tol=1e-7):
        raise ValueError("prox input must lie in the feasible set")
    return f.prox(x, set_)


# ---------------------------------------------------------------------------
# entropic (negentropy) prox on the simplex
# ---------------------------------------------------------------------------


def bregman_prox_negentropy(f: ProxFunction, x, tol=1e-11, max_iter=50_000):
    """argmin_{y in simplex} f(y) + KL(y | x) for interior x.

    Linear f has the closed form y = normalize(x * exp(-v)). Otherwise a
    damped multiplicative fixed-point iteration on the stationarity condition
    y = normalize(x * exp(-grad f(y))) is run to an l1 residual below tol.
    Accepts a vector or an (n, d) batch (rows solved jointly).
    """
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if np.any(X <= 0):
        raise ValueError("negentropy prox needs interior (positive) points")

    def normalize(W):
        return W / W.sum(axis=1, keepdims=True)

    if isinstance(f, LinearProx):
        Y = normalize(X * np.exp(-(f.v - np.max(f.v))))
        return Y[0] if single else Y

    Y = X.copy()
    step = 0.5
    for _ in range(max_iter):
        G = np.vstack([f.grad(y) for y in Y]) if Y.shape[0] > 1 else f.grad(Y[0])[None, :]
        # damped multiplicative update toward y = normalize(x e^{-grad f(y)})
        logY = (1 - step) * np.log(Y) + step * (np.log(X) - G)
        logY -= logY.max(axis=1, keepdims=True)
        Y_next = normalize(np.exp(logY))
        res = float(np.max(np.abs(Y_next - Y).sum(axis=1)))
        Y = Y_next
        if res <= tol:
            break
    else:
        raise NumericalError("negentropy prox fixed point did not converge", residual=res)
    return Y[0] if single else Y


# ---------------------------------------------------------------------------
# single deviations
# ---------------------------------------------------------------------------


class Deviation:
    """One strategy modification phi: X -> X."""

    name = "deviation"

    def apply(self, x):
        raise NotImplementedError

    def __call__(self, x):
        return self.apply(x)


class IdentityMap(Deviation):
    name = "identity"

    def apply(self, x):
        return np.atleast_1d(np.asarray(x, dtype=float)).copy()


class ConstantMap(Deviation):
    def __init__(self, target, name=None):
        self.target = np.atleast_1d(np.asarray(target, dtype=float))
        self.name = name or f"const({self.target.tolist()})"

    def apply(self, x):
        return self.target.copy()


class FnMap(Deviation):
    def __init__(self, name, fn):
        self.name = name
        self.fn = fn

    def apply(self, x):
        return np.atleast_1d(np.asarray(self.fn(np.atleast_1d(np.asarray(x, dtype=float))), dtype=float))


class IntDeviation(Deviation):
    """Interpolation (1 - lam) x + lam x*."""

    def __init__(self, lam, target):
        self.lam = float(lam)
        self.target = np.atleast_1d(np.asarray(target, dtype=float))
        self.name = f"int(lam={self.lam:g})"

    def apply(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return (1.0 - self.lam) * x + self.lam * self.target


class ShrinkMap(Deviation):
    """Pull x toward the origin by delta/(12 d^3) in l1 scale, except near 0.

    phi(x) = (1 - delta / (12 d^3 ||x||_1)) x when ||x||_1 >= delta/(12 d^3),
    and x otherwise.
    """

    def __init__(self, delta, dim):
        self.delta = float(delta)
        self.dim = int(dim)
        self.threshold = self.delta / (12.0 * self.dim**3)
        self.name = f"shrink(delta={self.delta:g})"

    def apply(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        l1 = float(np.sum(np.abs(x)))
        if l1 >= self.threshold:
            return (1.0 - self.threshold / l1) * x
        return x.copy()


class BeamDeviation(Deviation):
    """Move as far as possible (up to ||v||) against a fixed direction v.

    phi_v(x) = x - lam* v with lam* = max{lam in [0,1] : x - lam v in X}.
    """

    def __init__(self, v, set_):
        self.v = np.atleast_1d(np.asarray(v, dtype=float))
        self.set = set_
        self.name = f"beam(v={self.v.tolist()})"

    def apply(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        lam = self.set.ray_max_step(x, -self.v, cap=1.0)
        return x - lam * self.v


class ProxDeviation(Deviation):
    def __init__(self, f: ProxFunction, set_):
        self.f = f
        self.set = set_
        self.name = f"prox({f.tag})"

    def apply(self, x):
        return self.f.prox(np.atleast_1d(np.asarray(x, dtype=float)), self.set)


_NAMED_MAPS = {
    "identity": lambda: IdentityMap(),
    "zero": lambda: FnMap("zero", lambda x: np.zeros_like(x)),
    "halve": lambda: FnMap("halve", lambda x: 0.5 * x),
}


def register_named_map(name, factory):
    _NAMED_MAPS[name] = factory


def named_map(name):
    if name not in _NAMED_MAPS:
        raise ValueError(f"unknown named map: {name!r}")
    return _NAMED_MAPS[name]()


# ---------------------------------------------------------------------------
# deviation families
# ---------------------------------------------------------------------------


class DeviationSet:
    variant = "abstract"
    locality_delta = None

    def enumerable(self):
        return False

    def members(self):
        raise ValueError(f"{self.variant} family is not enumerable")

    def sample_members(self, set_, rng, n):
        """Members used by the empirical locality check."""
        raise NotImplementedError

    def locality_radius(self, set_, n_samples, rng):
        """Empirical max ||phi(x) - x||; a lower bound on the true sup."""
        if n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        pts = set_.sample(rng, n_samples)
        devs = self.members() if self.enumerable() else self.sample_members(set_, rng, 16)
        worst = 0.0
        for phi in devs:
            for x in pts:
                worst = max(worst, float(np.linalg.norm(phi.apply(x) - x)))
        return worst


class FiniteDeviations(DeviationSet):
    variant = "finite"

    def __init__(self, members, locality_delta=None):
        self._members = list(members)
        self.locality_delta = locality_delta

    def enumerable(self):
        return True

    def members(self):
        return list(self._members)


class ProjFamily(DeviationSet):
    """All maps x -> Pi_X[x - v] with ||v|| <= delta."""

    variant = "proj"

    def __init__(self, delta):
        self.delta = float(delta)
        self.locality_delta = self.delta

    def sample_members(self, set_, rng, n):
        d = set_.dimension
        vs = rng.standard_normal((n, d))
        vs /= np.linalg.norm(vs, axis=1, keepdims=True)
        vs *= self.delta * rng.uniform(size=(n, 1))
        return [ProxDeviation(LinearProx(v), set_) for v in vs]


class IntFamily(DeviationSet):
    """Interpolations (1-lam) x + lam x* with lam <= delta / diam(X)."""

    variant = "int"

    def __init__(self, delta):
        self.delta = float(delta)
        self.locality_delta = self.delta

    def lam_max(self, set_):
        D = set_.diameter()
        if D == 0.0:
            return 0.0
        return min(1.0, self.delta / D)

    def sample_members(self, set_, rng, n):
        lam_max = self.lam_max(set_)
        targets = set_.sample(rng, n)
        lams = rng.uniform(0.0, lam_max, size=n)
        return [IntDeviation(l, t) for l, t in zip(lams, targets)]


class IntPlusFamily(IntFamily):
    """IntFamily plus the single l1-shrink map."""

    variant = "int_plus"

    def shrink_map(self, dim):
        return ShrinkMap(self.delta, dim)

    def sample_members(self, set_, rng, n):
        base = super().sample_members(set_, rng, max(n - 1, 1))
        return base + [self.shrink_map(set_.dimension)]


class BeamFamily(DeviationSet):
    variant = "beam"

    def __init__(self, delta):
        self.delta = float(delta)
        self.locality_delta = self.delta

    def sample_members(self, set_, rng, n):
        d = set_.dimension
        vs = rng.standard_normal((n, d))
        vs /= np.linalg.norm(vs, axis=1, keepdims=True)
        vs *= self.delta
        return [BeamDeviation(v, set_) for v in vs]


class ProxFamily(DeviationSet):
    variant = "prox_family"

    def __init__(self, members, locality_delta=None):
        self._members = list(members)
        self.locality_delta = locality_delta

    def enumerable(self):
        return True

    def members(self):
        return list(self._members)


class ConvFamily(DeviationSet):
    """Convex mixtures of a finite list of delta-local maps."""

    variant = "conv"

    def __init__(self, members, locality_delta=None):
        self._members = list(members)
        self.locality_delta = locality_delta

    def enumerable(self):
        return True

    def members(self):
        return list(self._members)

    def mixture(self, weights):
        w = np.asarray(weights, dtype=float)

        def fn(x):
            return sum(wi * phi.apply(x) for wi, phi in zip(w, self._members))

        return FnMap(f"mixture({w.round(4).tolist()})", fn)


# ---------------------------------------------------------------------------
# family construction and config parsing
# ---------------------------------------------------------------------------


def make_prox_family(set_, rng):
    """The 12-member prox family used by the descent-bound scenarios.

    4 linear, 4 quadratic-to-anchor, 2 indicator-of-sub-ball, 2 symmetric
    affine; all feasible for ball, box, and interval sets.
    """
    d = set_.dimension
    scale = set_.diameter() / 2.0
    members = []
    for mag in (0.1, 0.2, 0.35, 0.5):
        v = rng.standard_normal(d)
        v *= mag * scale / np.linalg.norm(v)
        members.append(LinearProx(v))
    for lam in (0.2, 0.4, 0.6, 0.8):
        members.append(QuadToAnchorProx(lam, set_.sample(rng, 1)[0]))

    if isinstance(set_, Ball):
        c, r = set_.center, set_.radius
        for frac in (0.25, 0.45):
            u = rng.standard_normal(d)
            u /= np.linalg.norm(u)
            members.append(IndicatorProx(Ball(c + frac * r * u, (0.9 - frac) * r)))
        for eig_lo in (0.6, 0.75):
            Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
            eig = rng.uniform(eig_lo, 0.95, size=d)
            A = Q @ np.diag(eig) @ Q.T
            A = 0.5 * (A + A.T)
            smax = float(np.linalg.eigvalsh(A)[-1])
            w = rng.standard_normal(d)
            w *= 0.5 * (1.0 - smax) * r / np.linalg.norm(w)
            b = c - A @ c + w
            members.append(SymmetricAffineProx(A, b))
    elif isinstance(set_, Box):
        mid = 0.5 * (set_.lo + set_.hi)
        half = 0.5 * (set_.hi - set_.lo)
        for frac in (0.2, 0.35):
            center = mid + frac * half * rng.uniform(-1, 1, size=d)
            members.append(IndicatorProx(Ball(center, (0.9 - frac) * float(np.min(half)))))
        for a_lo in (0.6, 0.75):
            a = rng.uniform(a_lo, 0.95, size=d)
            b = (1.0 - a) * mid + rng.uniform(-0.3, 0.3, size=d) * (1.0 - a) * half
            members.append(SymmetricAffineProx(np.diag(a), b))
    else:
        raise ValueError("prox family factory supports ball, box, and interval sets")

    for f in members:
        f.validate(set_, rng)
    return ProxFamily(members)


def prox_function_from_config(config, set_=None):
    from .geometry import set_from_config

    kind = config.get("kind")
    if kind == "linear":
        return LinearProx(config["v"])
    if kind == "quad_to_anchor":
        return QuadToAnchorProx(config["lam"], config["anchor"])
    if kind == "indicator":
        return IndicatorProx(set_from_config(config["subset"]))
    if kind == "symmetric_affine":
        return SymmetricAffineProx(np.asarray(config["A"], dtype=float), config["b"])
    raise ValueError(f"unknown prox function kind: {kind!r}")


def deviation_set_from_config(config, set_=None):
    family = config.get("family")
    if family == "proj":
        return ProjFamily(config["delta"])
    if family == "int":
        return IntFamily(config["delta"])
    if family == "int_plus":
        return IntPlusFamily(config["delta"])
    if family == "beam":
        return BeamFamily(config["delta"])
    if family == "finite":
        members = []
        for item in config["members"]:
            if isinstance(item, str):
                members.append(named_map(item))
            elif item.get("kind") == "constant":
                members.append(ConstantMap(item["target"]))
            else:
                raise ValueError(f"unknown finite member descriptor: {item!r}")
        return FiniteDeviations(members, locality_delta=config.get("delta"))
    if family == "prox_family":
        members = [prox_function_from_config(c, set_) for c in config["members"]]
        return ProxFamily(members, locality_delta=config.get("delta"))
    raise ValueError(f"unknown deviation family: {family!r}")
