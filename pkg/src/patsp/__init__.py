"""Pattern-aware TSP solving: TSPLIB I/O, pattern detection, complexity model, solver portfolio."""

__version__ = "0.1.0"
