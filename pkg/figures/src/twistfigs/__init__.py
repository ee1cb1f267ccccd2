"""Ratio-figure rendering for twist-statistics CSV exports."""

__version__ = "0.1.0"

from .render import FigureSpec, render

__all__ = ["FigureSpec", "render", "__version__"]
