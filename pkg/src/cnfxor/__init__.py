"""Random k-CNF-XOR formulas: generation, solving, counting and phase-transition experiments."""

__version__ = "0.1.0"
