"""Typed records shared across mvmsynth modules."""
