"""Figure rendering for infgen run directories."""

from .render import ArtifactError, PlotRequest, RenderResult, plot_fibres, plot_spectrum

__all__ = ["ArtifactError", "PlotRequest", "RenderResult", "plot_fibres",
           "plot_spectrum"]
__version__ = "0.1.0"
