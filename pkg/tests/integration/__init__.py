"""Integration tests for mvmsynth.

These train real networks on phantom datasets and exercise the full
train / evaluate / ablate pipeline end to end.
"""
