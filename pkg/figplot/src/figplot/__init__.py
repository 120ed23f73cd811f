"""Figure rendering for walk-search sweep outputs."""

from .render import FigureSpec, InputError, render

__version__ = "0.1.0"
