"""Bipartite graph planar algebras at desk scale."""
__version__ = "0.1.0"
