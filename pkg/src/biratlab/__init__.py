"""Exact and ergodic analysis of planar birational maps."""
from .maps import FAMILIES, INF, BoundMap, bind, get_family

__all__ = ["FAMILIES", "INF", "BoundMap", "bind", "get_family"]
__version__ = "0.1.0"
