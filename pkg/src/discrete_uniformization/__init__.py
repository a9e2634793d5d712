"""Discrete uniformization of closed triangle meshes of genus >= 1."""

__version__ = "0.1.0"
