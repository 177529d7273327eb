"""Convex feasible sets with exact projections and support maximizers.

Every set kind provides a closed-form Euclidean projection, a support
maximizer (linear maximization with lexicographic tie-breaking), the exact
Euclidean diameter, a membership test, and a documented uniform sampler used
by the property tests. All operations are pure functions of their inputs and
safe to call concurrently.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "ConvexSet",
    "Interval",
    "Box",
    "Ball",
    "Simplex",
    "NonnegL1Ball",
    "Triangle2D",
    "project_simplex",
    "set_from_config",
]

_MEMBERSHIP_TOL = 1e-9


def _as_vector(point, dim):
    p = np.asarray(point, dtype=float)
    if p.ndim == 0:
        p = p.reshape(1)
    if p.shape != (dim,):
        raise ValueError(f"expected a vector of dimension {dim}, got shape {p.shape}")
    return p


def project_simplex(v, total=1.0):
    """Euclidean projection onto {x >= 0, sum(x) = total}.

    Sort-then-threshold algorithm, O(d log d). Accepts a vector or a
    (n, d) batch and projects rows independently.
    """
    v = np.asarray(v, dtype=float)
    single = v.ndim == 1
    V = v[None, :] if single else v
    n, d = V.shape
    u = np.sort(V, axis=1)[:, ::-1]
    css = np.cumsum(u, axis=1) - total
    idx = np.arange(1, d + 1)
    cond = u - css / idx > 0
    rho = d - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = css[np.arange(n), rho] / (rho + 1)
    W = np.maximum(V - theta[:, None], 0.0)
    return W[0] if single else W


class ConvexSet:
    """Base class for the supported nonempty compact convex set kinds."""

    kind = "abstract"
    dimension: int

    def project(self, point):
        """Return the Euclidean-nearest point of the set.

        Accepts a single vector or an (n, d) batch of rows.
        """
        p = np.asarray(point, dtype=float)
        if p.ndim == 2:
            if p.shape[1] != self.dimension:
                raise ValueError(
                    f"expected rows of dimension {self.dimension}, got {p.shape[1]}"
                )
            return self._project_batch(p)
        return self._project_batch(_as_vector(p, self.dimension)[None, :])[0]

    def _project_batch(self, P):
        raise NotImplementedError

    def support_maximizer(self, direction):
        """Maximize <direction, x> over the set.

        Returns (point, value); ties are broken by the lexicographically
        smallest maximizer.
        """
        raise NotImplementedError

    def diameter(self):
        raise NotImplementedError

    def contains(self, point, tol=_MEMBERSHIP_TOL):
        p = _as_vector(point, self.dimension)
        return bool(np.linalg.norm(p - self.project(p)) <= tol)

    def sample(self, rng, n=1):
        """Draw n points from the documented per-kind uniform scheme."""
        raise NotImplementedError

    def ray_max_step(self, x, direction, cap=1.0, tol=1e-10):
        """Largest step in [0, cap] along direction that stays feasible.

        Feasibility along a ray from an interior point of a convex set is an
        interval, so bisection on membership converges. Triangle2D overrides
        this with the closed-form edge intersection.
        """
        x = _as_vector(x, self.dimension)
        d = _as_vector(direction, self.dimension)
        if self.contains(x + cap * d, tol=1e-12):
            return cap
        lo, hi = 0.0, cap
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if self.contains(x + mid * d, tol=1e-12):
                lo = mid
            else:
                hi = mid
        return lo

    def to_config(self):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.to_config()})"


class Box(ConvexSet):
    kind = "box"

    def __init__(self, lo, hi):
        self.lo = np.atleast_1d(np.asarray(lo, dtype=float))
        self.hi = np.atleast_1d(np.asarray(hi, dtype=float))
        if self.lo.shape != self.hi.shape or self.lo.ndim != 1:
            raise ValueError("box bounds must be 1-D arrays of equal length")
        if np.any(self.lo > self.hi):
            raise ValueError("box requires lo <= hi coordinatewise")
        self.dimension = self.lo.size

    def _project_batch(self, P):
        return np.clip(P, self.lo, self.hi)

    def support_maximizer(self, direction):
        d = _as_vector(direction, self.dimension)
        # direction == 0 coordinates: any value is optimal, lo is lex smallest
        point = np.where(d > 0, self.hi, self.lo)
        return point, float(point @ d)

    def diameter(self):
        return float(np.linalg.norm(self.hi - self.lo))

    def sample(self, rng, n=1):
        return rng.uniform(self.lo, self.hi, size=(n, self.dimension))

    def to_config(self):
        return {"kind": "box", "lo": self.lo.tolist(), "hi": self.hi.tolist()}


class Interval(Box):
    """1-D feasible interval [lo, hi]; points are length-1 vectors."""

    kind = "interval"

    def __init__(self, lo, hi):
        super().__init__([float(lo)], [float(hi)])

    def to_config(self):
        return {"kind": "interval", "lo": float(self.lo[0]), "hi": float(self.hi[0])}


class Ball(ConvexSet):
    kind = "ball"

    def __init__(self, center, radius):
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        self.radius = float(radius)
        if self.radius <= 0:
            raise ValueError("ball requires radius > 0")
        self.dimension = self.center.size

    def _project_batch(self, P):
        U = P - self.center
        norms = np.linalg.norm(U, axis=1)
        scale = np.ones_like(norms)
        outside = norms > self.radius
        scale[outside] = self.radius / norms[outside]
        return self.center + U * scale[:, None]

    def support_maximizer(self, direction):
        d = _as_vector(direction, self.dimension)
        nd = np.linalg.norm(d)
        if nd == 0.0:
            point = self.center.copy()
            point[0] -= self.radius
            return point, 0.0
        point = self.center + self.radius * d / nd
        return point, float(point @ d)

    def diameter(self):
        return 2.0 * self.radius

    def sample(self, rng, n=1):
        # normalized Gaussian direction scaled by U^{1/d}
        g = rng.standard_normal((n, self.dimension))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        r = rng.uniform(size=(n, 1)) ** (1.0 / self.dimension)
        return self.center + self.radius * r * g

    def to_config(self):
        return {"kind": "ball", "center": self.center.tolist(), "radius": self.radius}


class Simplex(ConvexSet):
    """Probability simplex {x >= 0, sum(x) = 1} on d coordinates."""

    kind = "simplex"

    def __init__(self, d):
        self.dimension = int(d)
        if self.dimension < 1:
            raise ValueError("simplex needs d >= 1")

    def _project_batch(self, P):
        return project_simplex(P)

    def support_maximizer(self, direction):
        d = _as_vector(direction, self.dimension)
        best = np.max(d)
        # among tied vertices e_i the lexicographically smallest is the one
        # with the largest index (leading zeros)
        i = int(np.max(np.flatnonzero(d == best)))
        point = np.zeros(self.dimension)
        point[i] = 1.0
        return point, float(best)

    def diameter(self):
        return float(np.sqrt(2.0)) if self.dimension >= 2 else 0.0

    def sample(self, rng, n=1):
        return rng.dirichlet(np.ones(self.dimension), size=n)

    def to_config(self):
        return {"kind": "simplex", "d": self.dimension}


class NonnegL1Ball(ConvexSet):
    """{x in R^d : x >= 0, ||x||_1 <= budget}."""

    kind = "nonneg_l1_ball"

    def __init__(self, d, budget=1.0):
        self.dimension = int(d)
        self.budget = float(budget)
        if self.budget <= 0:
            raise ValueError("nonneg_l1_ball requires budget > 0")

    def _project_batch(self, P):
        # clip negatives first; rows that still exceed the budget are the
        # KKT-active case and project onto the scaled simplex
        W = np.maximum(P, 0.0)
        over = W.sum(axis=1) > self.budget
        if np.any(over):
            W = W.copy()
            W[over] = project_simplex(W[over], total=self.budget)
        return W

    def support_maximizer(self, direction):
        d = _as_vector(direction, self.dimension)
        best = np.max(d)
        if best <= 0.0:
            # the origin attains max(0, budget*max d); it is lex smallest
            return np.zeros(self.dimension), 0.0
        i = int(np.max(np.flatnonzero(d == best)))
        point = np.zeros(self.dimension)
        point[i] = self.budget
        return point, float(self.budget * best)

    def diameter(self):
        if self.dimension == 1:
            return self.budget
        return float(self.budget * np.sqrt(2.0))

    def sample(self, rng, n=1):
        # uniform over the corner simplex: Dirichlet on d+1 coordinates,
        # dropping the slack coordinate
        full = rng.dirichlet(np.ones(self.dimension + 1), size=n)
        return self.budget * full[:, : self.dimension]

    def to_config(self):
        return {"kind": "nonneg_l1_ball", "d": self.dimension, "budget": self.budget}


class Triangle2D(ConvexSet):
    kind = "triangle2d"

    def __init__(self, a, b, c):
        self.vertices = np.array([a, b, c], dtype=float)
        if self.vertices.shape != (3, 2):
            raise ValueError("triangle2d needs three 2-D vertices")
        area2 = self._cross(self.vertices[1] - self.vertices[0], self.vertices[2] - self.vertices[0])
        if abs(area2) < 1e-12:
            raise ValueError("triangle2d vertices are collinear")
        self.dimension = 2
        # inward half-plane representation: n_i . x >= b_i for each edge
        normals, offsets = [], []
        for i in range(3):
            p, q = self.vertices[i], self.vertices[(i + 1) % 3]
            edge = q - p
            n = np.array([-edge[1], edge[0]])
            opposite = self.vertices[(i + 2) % 3]
            if n @ (opposite - p) < 0:
                n = -n
            normals.append(n)
            offsets.append(n @ p)
        self._normals = np.array(normals)
        self._offsets = np.array(offsets)

    @staticmethod
    def _cross(u, v):
        return u[0] * v[1] - u[1] * v[0]

    def _project_batch(self, P):
        out = np.empty_like(P)
        inside = np.all(P @ self._normals.T >= self._offsets - 1e-12, axis=1)
        out[inside] = P[inside]
        for j in np.flatnonzero(~inside):
            out[j] = self._project_single(P[j])
        return out

    def _project_single(self, p):
        best, best_d = None, np.inf
        for i in range(3):
            a, b = self.vertices[i], self.vertices[(i + 1) % 3]
            e = b - a
            t = np.clip((p - a) @ e / (e @ e), 0.0, 1.0)
            cand = a + t * e
            d = np.linalg.norm(p - cand)
            if d < best_d:
                best, best_d = cand, d
        return best

    def support_maximizer(self, direction):
        d = _as_vector(direction, 2)
        vals = self.vertices @ d
        best = np.max(vals)
        tied = self.vertices[np.isclose(vals, best, rtol=0.0, atol=0.0)]
        order = np.lexsort((tied[:, 1], tied[:, 0]))
        return tied[order[0]].copy(), float(best)

    def diameter(self):
        dists = [
            np.linalg.norm(self.vertices[i] - self.vertices[j])
            for i in range(3)
            for j in range(i + 1, 3)
        ]
        return float(max(dists))

    def contains(self, point, tol=_MEMBERSHIP_TOL):
        p = _as_vector(point, 2)
        return bool(np.all(self._normals @ p >= self._offsets - tol))

    def sample(self, rng, n=1):
        # uniform via the sqrt trick on barycentric coordinates
        r1 = np.sqrt(rng.uniform(size=n))
        r2 = rng.uniform(size=n)
        a, b, c = self.vertices
        return (1 - r1)[:, None] * a + (r1 * (1 - r2))[:, None] * b + (r1 * r2)[:, None] * c

    def ray_max_step(self, x, direction, cap=1.0, tol=1e-10):
        x = _as_vector(x, 2)
        d = _as_vector(direction, 2)
        lam = cap
        for n, off in zip(self._normals, self._offsets):
            nd = n @ d
            if nd < 0:
                # constraint n.(x + lam d) >= off tightens along the ray
                lam = min(lam, (n @ x - off) / (-nd))
        return float(np.clip(lam, 0.0, cap))

    def ray_max_step_batch(self, X, direction, cap=1.0):
        """Vectorized ray_max_step for rows of X against one direction."""
        d = _as_vector(direction, 2)
        lam = np.full(X.shape[0], cap)
        for n, off in zip(self._normals, self._offsets):
            nd = n @ d
            if nd < 0:
                lam = np.minimum(lam, (X @ n - off) / (-nd))
        return np.clip(lam, 0.0, cap)

    def to_config(self):
        return {"kind": "triangle2d", "vertices": self.vertices.tolist()}


_KINDS = {
    "interval": lambda c: Interval(c["lo"], c["hi"]),
    "box": lambda c: Box(c["lo"], c["hi"]),
    "ball": lambda c: Ball(c["center"], c["radius"]),
    "simplex": lambda c: Simplex(c["d"]),
    "nonneg_l1_ball": lambda c: NonnegL1Ball(c["d"], c.get("budget", 1.0)),
    "triangle2d": lambda c: Triangle2D(*c["vertices"]),
}


def set_from_config(config):
    """Build a ConvexSet from its scenario-config descriptor."""
    kind = config.get("kind")
    if kind not in _KINDS:
        raise ValueError(f"unknown set kind: {kind!r}")
    return _KINDS[kind](config)
