"""Learn urban-growth cellular automaton rules from raw rasters and built-up maps."""

__version__ = "0.1.0"
