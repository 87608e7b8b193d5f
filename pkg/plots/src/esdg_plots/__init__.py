"""Figure rendering for esdg1d CSV artifacts (post-processing only)."""

from esdg_plots.figures import FigureSpec, PlotDataError, render

__all__ = ["FigureSpec", "PlotDataError", "render"]
