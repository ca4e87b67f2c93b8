"""Experiment harness: datasets, training loops, output files and the CLI."""
