"""First-order function oracles with Lipschitz/smoothness metadata.

A DiffOracle bundles a value function, a (sub)gradient function, and declared
constants so learners and auditors can stay agnostic of the concrete loss or
utility. Builtins are addressable by tag + parameters from scenario configs.
"""

from __future__ import annotations

import numpy as np

__all__ = ["DiffOracle", "builtin_oracle"]

_TAGS = ("convex", "smooth_nonconvex", "unknown")


class DiffOracle:
    """Value + gradient pair with declared metadata.

    Parameters
    ----------
    value, gradient : callables on a point (1-D array)
    lipschitz_G, smooth_L : float or None when unknown
    convexity_tag : one of "convex", "smooth_nonconvex", "unknown"
    domain : optional ConvexSet; when set, evaluations outside raise
    """

    def __init__(self, value, gradient, lipschitz_G=None, smooth_L=None,
                 convexity_tag="unknown", domain=None, tag=None, params=None):
        if convexity_tag not in _TAGS:
            raise ValueError(f"convexity_tag must be one of {_TAGS}")
        self._value = value
        self._gradient = gradient
        self.lipschitz_G = lipschitz_G
        self.smooth_L = smooth_L
        self.convexity_tag = convexity_tag
        self.domain = domain
        self.tag = tag
        self.params = dict(params or {})

    def _check_domain(self, x):
        if self.domain is not None and not self.domain.contains(x, tol=1e-7):
            raise ValueError(f"point {x!r} outside the oracle's domain")

    def value(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        self._check_domain(x)
        return float(self._value(x))

    def gradient(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        self._check_domain(x)
        return np.atleast_1d(np.asarray(self._gradient(x), dtype=float))

    def evaluate_with_gradient(self, x):
        """Return a consistent (value, gradient) pair at x."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        self._check_domain(x)
        return float(self._value(x)), np.atleast_1d(np.asarray(self._gradient(x), dtype=float))

    def __repr__(self):
        return f"DiffOracle(tag={self.tag!r}, G={self.lipschitz_G}, L={self.smooth_L})"


def _linear(v):
    v = np.atleast_1d(np.asarray(v, dtype=float))
    return DiffOracle(
        value=lambda x: float(v @ x),
        gradient=lambda x: v.copy(),
        lipschitz_G=float(np.linalg.norm(v)),
        smooth_L=0.0,
        convexity_tag="convex",
        tag="linear",
        params={"v": v.tolist()},
    )


def _quadratic_to_anchor(weight, anchor):
    w = float(weight)
    a = np.atleast_1d(np.asarray(anchor, dtype=float))
    if w < 0:
        raise ValueError("quadratic_to_anchor weight must be >= 0")
    return DiffOracle(
        value=lambda x: 0.5 * w * float(np.sum((x - a) ** 2)),
        gradient=lambda x: w * (x - a),
        smooth_L=w,
        convexity_tag="convex",
        tag="quadratic_to_anchor",
        params={"weight": w, "anchor": a.tolist()},
    )


def _abs1d():
    # subgradient sign(x) with 0 at x = 0: a valid subgradient choice
    return DiffOracle(
        value=lambda x: float(abs(x[0])),
        gradient=lambda x: np.array([np.sign(x[0])]),
        lipschitz_G=1.0,
        convexity_tag="convex",
        tag="abs1d",
        params={"kinks": [0.0]},
    )


def _neg_quadratic_1d(L):
    L = float(L)
    return DiffOracle(
        value=lambda x: -0.5 * L * float(x[0] ** 2),
        gradient=lambda x: np.array([-L * x[0]]),
        smooth_L=L,
        convexity_tag="smooth_nonconvex",
        tag="neg_quadratic_1d",
        params={"L": L},
    )


def _bilinear_game_payoff(scale):
    s = float(scale)
    return DiffOracle(
        value=lambda x: s * float(x[0] * x[1]),
        gradient=lambda x: s * np.array([x[1], x[0]]),
        smooth_L=s,
        convexity_tag="smooth_nonconvex",
        tag="bilinear_game_payoff",
        params={"scale": s},
    )


def _squared_difference():
    return DiffOracle(
        value=lambda x: float((x[0] - x[1]) ** 2),
        gradient=lambda x: np.array([2.0 * (x[0] - x[1]), -2.0 * (x[0] - x[1])]),
        smooth_L=4.0,
        convexity_tag="smooth_nonconvex",
        tag="squared_difference",
        params={},
    )


def _motzkin_fk(graph, k):
    from . import hardness

    if not isinstance(graph, hardness.Graph):
        graph = hardness.Graph(np.asarray(graph))
    inst = hardness.FkInstance(graph, k)
    return inst.oracle()


_BUILTINS = {
    "linear": lambda p: _linear(p["v"]),
    "quadratic_to_anchor": lambda p: _quadratic_to_anchor(p["weight"], p["anchor"]),
    "abs1d": lambda p: _abs1d(),
    "neg_quadratic_1d": lambda p: _neg_quadratic_1d(p["L"]),
    "bilinear_game_payoff": lambda p: _bilinear_game_payoff(p["scale"]),
    "squared_difference": lambda p: _squared_difference(),
    "motzkin_fk": lambda p: _motzkin_fk(p["graph"], p["k"]),
}


def builtin_oracle(tag, **params):
    """Build a builtin oracle addressable by tag + parameters."""
    if tag not in _BUILTINS:
        raise ValueError(f"unknown builtin oracle tag: {tag!r}")
    return _BUILTINS[tag](params)
