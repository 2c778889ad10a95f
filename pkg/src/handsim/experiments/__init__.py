"""Experiment harness: sweeps, reports, analysis."""
