"""Clique-gap hard instances, brute-force clique oracle, and local-maximizer probes.

The instance family rewards mass on dense subgraphs: f_k(x) = x'Ax -
(1 - 1/k) ||x||_1^2 over the nonnegative l1 ball, whose sign at scale is
controlled by the clique number through the Motzkin-Straus identity
max over the simplex of x'Ax = 1 - 1/omega. The probes apply the
constructive improving deviations (shrink, inflate, jump toward a
clique-uniform point) and report their gains.
"""

from __future__ import annotations

import numpy as np

from .geometry import NonnegL1Ball
from .oracles import DiffOracle

__all__ = [
    "Graph",
    "clique_number",
    "max_clique",
    "FkInstance",
    "probe_local_maximizer",
    "int_plus_shrink_gain",
    "motzkin_straus_max",
    "parse_graph_file",
    "write_graph_file",
    "complete_graph",
    "path_graph",
    "cycle_graph",
    "petersen_graph",
    "erdos_renyi_graph",
]

_CLIQUE_BUDGET = 20


class Graph:
    """Undirected graph given by a symmetric 0/1 adjacency with zero diagonal."""

    def __init__(self, adjacency):
        A = np.asarray(adjacency, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("adjacency must be square")
        if not np.array_equal(A, A.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diag(A) != 0):
            raise ValueError("adjacency must have a zero diagonal")
        if not np.all(np.isin(A, (0.0, 1.0))):
            raise ValueError("adjacency entries must be 0 or 1")
        self.adjacency = A
        self.d = A.shape[0]

    def edges(self):
        return [(i, j) for i in range(self.d) for j in range(i + 1, self.d) if self.adjacency[i, j]]

    def __repr__(self):
        return f"Graph(d={self.d}, m={len(self.edges())})"


def _neighbor_masks(graph):
    masks = []
    for i in range(graph.d):
        m = 0
        for j in range(graph.d):
            if graph.adjacency[i, j]:
                m |= 1 << j
        masks.append(m)
    return masks


def max_clique(graph: Graph):
    """One maximum clique (as a sorted list of vertices), by branch and bound."""
    if graph.d > _CLIQUE_BUDGET:
        raise ValueError(f"brute-force clique budget is d <= {_CLIQUE_BUDGET}")
    masks = _neighbor_masks(graph)
    best = {"size": 0, "members": 0}

    def expand(cand, current, size):
        if size + bin(cand).count("1") <= best["size"]:
            return
        if cand == 0:
            if size > best["size"]:
                best["size"] = size
                best["members"] = current
            return
        while cand:
            if size + bin(cand).count("1") <= best["size"]:
                return
            v = (cand & -cand).bit_length() - 1
            cand &= cand - 1
            expand(cand & masks[v], current | (1 << v), size + 1)

    expand((1 << graph.d) - 1, 0, 0)
    members = [i for i in range(graph.d) if best["members"] >> i & 1]
    if not members:
        members = [0] if graph.d else []
    return sorted(members)


def clique_number(graph: Graph) -> int:
    """Exact clique number by bitmask branch and bound (d <= 20)."""
    if graph.d == 0:
        return 0
    return max(1, len(max_clique(graph)))


class FkInstance:
    """f_k over the nonnegative unit l1 ball; k in [1, d]."""

    def __init__(self, graph: Graph, k):
        if not 1 <= k <= graph.d:
            raise ValueError("k must lie in [1, d]")
        self.graph = graph
        self.k = int(k)
        self.domain = NonnegL1Ball(graph.d, 1.0)
        self._coef = 1.0 - 1.0 / self.k

    def value(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        l1 = float(np.sum(x))
        return float(x @ self.graph.adjacency @ x) - self._coef * l1**2

    def gradient(self, x):
        # exact derivative: the quadratic form with symmetric A carries a 2
        x = np.atleast_1d(np.asarray(x, dtype=float))
        l1 = float(np.sum(x))
        return 2.0 * self.graph.adjacency @ x - 2.0 * self._coef * l1 * np.ones(self.graph.d)

    def value_grad(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if not self.domain.contains(x, tol=1e-9):
            raise ValueError("point outside the nonnegative l1 ball")
        return self.value(x), self.gradient(x)

    def oracle(self) -> DiffOracle:
        d = self.graph.d
        return DiffOracle(
            value=self.value,
            gradient=self.gradient,
            lipschitz_G=4.0 * np.sqrt(d),
            smooth_L=2.0 * d + 2.0,
            convexity_tag="smooth_nonconvex",
            domain=self.domain,
            tag="motzkin_fk",
            params={"d": d, "k": self.k},
        )

    def clique_uniform_point(self):
        """Uniform weights on one maximum clique; attains the simplex optimum."""
        members = max_clique(self.graph)
        x = np.zeros(self.graph.d)
        x[members] = 1.0 / len(members)
        return x


def probe_local_maximizer(inst: FkInstance, x, delta):
    """Try the constructive improving deviations at x.

    When k >= omega+1 and ||x||_1 >= delta/2: the shrink toward the origin.
    When k < omega and ||x||_1 <= delta/2: the inflate away from the origin
    and the jump to (delta/2) times a clique-uniform point. Returns
    (deviation description or None, gain); None when no candidate improves.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    delta = float(delta)
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    omega = clique_number(inst.graph)
    l1 = float(np.sum(np.abs(x)))
    fx = inst.value(x)
    candidates = []
    if inst.k >= omega + 1 and l1 >= delta / 2.0:
        shrunk = (1.0 - delta / (2.0 * l1)) * x
        candidates.append(("shrink", shrunk))
    if inst.k < omega and l1 <= delta / 2.0:
        if l1 > 0:
            inflated = (1.0 + delta / (2.0 * l1)) * x
            candidates.append(("inflate", inflated))
        jump = (delta / 2.0) * inst.clique_uniform_point()
        candidates.append(("jump", jump))
    best = (None, 0.0)
    for name, point in candidates:
        gain = inst.value(point) - fx
        if gain > best[1]:
            best = ({"name": name, "point": point}, gain)
    return best


def int_plus_shrink_gain(inst: FkInstance, x, delta):
    """Gain of the single extra shrink map (the one added to the
    interpolation family) at x; the map is the identity below its
    l1 threshold delta / (12 d^3)."""
    from .deviations import ShrinkMap

    x = np.atleast_1d(np.asarray(x, dtype=float))
    phi = ShrinkMap(delta, inst.graph.d)
    return inst.value(phi.apply(x)) - inst.value(x)


def motzkin_straus_max(graph: Graph, n_starts=200, iters=400, rng=None):
    """max over the simplex of x'Ax by multistart projected gradient ascent,
    cross-checked against the clique-uniform candidate point."""
    from .geometry import project_simplex

    rng = rng or np.random.default_rng(0)
    d = graph.d
    A = graph.adjacency
    if d == 1:
        return 0.0
    X = np.vstack([rng.dirichlet(np.ones(d), size=max(1, n_starts - d)), np.eye(d)])
    step = 1.0 / (2.0 * d)
    for _ in range(iters):
        X = project_simplex(X + step * 2.0 * (X @ A))
    vals = np.sum((X @ A) * X, axis=1)
    members = max_clique(graph)
    xc = np.zeros(d)
    xc[members] = 1.0 / len(members)
    clique_val = float(xc @ A @ xc)
    return float(max(np.max(vals), clique_val))


# ---------------------------------------------------------------------------
# graph builders and file format
# ---------------------------------------------------------------------------


def complete_graph(d):
    A = np.ones((d, d)) - np.eye(d)
    return Graph(A)


def path_graph(d):
    A = np.zeros((d, d))
    for i in range(d - 1):
        A[i, i + 1] = A[i + 1, i] = 1
    return Graph(A)


def cycle_graph(d):
    A = np.zeros((d, d))
    for i in range(d):
        A[i, (i + 1) % d] = A[(i + 1) % d, i] = 1
    return Graph(A)


def petersen_graph():
    A = np.zeros((10, 10))
    outer = [(i, (i + 1) % 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    for i, j in outer + inner + spokes:
        A[i, j] = A[j, i] = 1
    return Graph(A)


def erdos_renyi_graph(d, p, seed):
    rng = np.random.default_rng(seed)
    A = np.zeros((d, d))
    for i in range(d):
        for j in range(i + 1, d):
            if rng.uniform() < p:
                A[i, j] = A[j, i] = 1
    return Graph(A)


def parse_graph_file(path):
    """First line d, then one '0-indexed i j' edge per line."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    d = int(lines[0])
    A = np.zeros((d, d))
    for ln in lines[1:]:
        i, j = (int(tok) for tok in ln.split())
        if not (0 <= i < d and 0 <= j < d) or i == j:
            raise ValueError(f"bad edge line: {ln!r}")
        A[i, j] = A[j, i] = 1
    return Graph(A)


def write_graph_file(graph: Graph, path):
    with open(path, "w") as fh:
        fh.write(f"{graph.d}\n")
        for i, j in graph.edges():
            fh.write(f"{i} {j}\n")
