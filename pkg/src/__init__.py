"""tonebif: tone coloring with Eulerian Hopf bifurcation control."""

__version__ = "0.1.0"
