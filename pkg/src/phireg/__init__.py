"""Regret auditing and uncoupled learning dynamics for strategy-modification
equilibria: convex geometry, prox-based deviation families, online learners,
exact post-hoc regret audits, smooth-game dynamics, clique-gap hard
instances, and an online conformal threshold tracker, driven by a scenario
CLI with reproducible CSV outputs."""

__version__ = "0.1.0"
