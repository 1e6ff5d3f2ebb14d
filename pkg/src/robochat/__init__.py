"""Voice- and text-driven command pipeline for a simulated mobile robot."""

__version__ = "0.1.0"
