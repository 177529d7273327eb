"""Online conformal threshold tracking by unconstrained gradient descent.

The tracker keeps a scalar threshold theta; a round is covered when the
score is at most theta, the update gradient is alpha - 1{missed}, and the
drift of theta over a run ties the realized miscoverage to the target
exactly: |miscoverage - alpha| = |theta_final - theta_init| / (eta T).
Single-threaded stream processor.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

__all__ = ["ConformalState", "conformal_update", "coverage_gap", "run_stream", "synthetic_scores"]


@dataclass(frozen=True)
class ConformalState:
    theta: float
    eta: float
    alpha: float
    rounds: int = 0
    misses: int = 0
    theta_init: float = 0.0

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError("alpha must lie in [0, 1)")
        if self.misses > self.rounds:
            raise ValueError("misses cannot exceed rounds")


def conformal_update(state: ConformalState, score) -> tuple[bool, ConformalState]:
    """Process one score: coverage indicator and the descended threshold."""
    covered = float(score) <= state.theta
    gradient = state.alpha - (0.0 if covered else 1.0)
    return covered, replace(
        state,
        theta=state.theta - state.eta * gradient,
        rounds=state.rounds + 1,
        misses=state.misses + (0 if covered else 1),
    )


def coverage_gap(state: ConformalState):
    """|empirical miscoverage - alpha| and the exact drift identity.

    Returns a dict with the gap, the drift value |theta_final - theta_init|
    / (eta T), and their residual (zero in exact arithmetic: the threshold
    update telescopes).
    """
    if state.rounds == 0:
        raise ValueError("no rounds elapsed")
    miscoverage = state.misses / state.rounds
    gap = abs(miscoverage - state.alpha)
    drift = abs(state.theta - state.theta_init) / (state.eta * state.rounds)
    return {
        "gap": gap,
        "drift": drift,
        "identity_residual": abs(gap - drift),
        "miscoverage": miscoverage,
    }


def run_stream(scores, alpha, eta, theta0=0.0):
    """Run the tracker over a score stream; returns (state, covered flags)."""
    state = ConformalState(theta=float(theta0), eta=float(eta), alpha=float(alpha), theta_init=float(theta0))
    covered = []
    for s in scores:
        ok, state = conformal_update(state, s)
        covered.append(ok)
    return state, covered


def synthetic_scores(seed, T, kind="uniform"):
    """Seeded synthetic score stream: iid uniform on [0, 1] ("uniform"), a
    slowly drifting beta mixture ("drift"), or the constant sub-threshold
    stream ("always_covered")."""
    rng = np.random.default_rng(seed)
    if kind == "uniform":
        return rng.uniform(0.0, 1.0, size=T)
    if kind == "drift":
        t = np.arange(T)
        a = 1.5 + np.sin(2 * np.pi * t / max(T, 1))
        return rng.beta(a, 2.0)
    if kind == "always_covered":
        # every score sits below any nonincreasing threshold started at 0
        return np.full(T, -1.0)
    raise ValueError(f"unknown synthetic stream kind: {kind!r}")
