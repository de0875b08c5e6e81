"""Figures for gqre benchmark output: gap vs iteration, mean and band."""

from .render import PlotSpec, aggregate_curves, load_runs, render_gap_curves

__version__ = "0.1.0"

__all__ = ["PlotSpec", "aggregate_curves", "load_runs", "render_gap_curves"]
