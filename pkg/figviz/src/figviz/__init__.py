"""Phase-transition figures from attrisbm sweep CSVs."""

from .render import (
    FigvizError,
    GroupSeries,
    PlotSpec,
    RenderResult,
    locate_threshold,
    read_sweep_csv,
    render,
)

__version__ = "0.1.0"

__all__ = [
    "FigvizError",
    "GroupSeries",
    "PlotSpec",
    "RenderResult",
    "locate_threshold",
    "read_sweep_csv",
    "render",
]
