"""Render figures from entflow pipeline outputs.

Inputs are consumed verbatim (no physics is recomputed); a checksum of the
input bytes is embedded in the image metadata.
"""

from .io import FiguresError, read_curves, read_json_table, read_moments
from .render import FigureSpec, load_spec, render

__all__ = [
    "FiguresError",
    "FigureSpec",
    "load_spec",
    "read_curves",
    "read_json_table",
    "read_moments",
    "render",
]
