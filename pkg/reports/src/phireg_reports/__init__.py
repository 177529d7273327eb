"""Offline plotting of experiment CSVs: regret curves against reference
growth shapes and recorded bound envelopes, with fitted growth exponents
written to sidecar text files."""

__version__ = "0.1.0"
