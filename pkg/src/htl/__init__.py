"""Random simplicial d-complexes with full (d-1)-skeleton: homology and threshold experiments."""

__version__ = "0.1.0"
