"""Persistence and rendering: series archives, checkpoints, reports, figures."""
