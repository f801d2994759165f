"""Angle metrics on unbounded subsets of metric spaces and finitely generated groups."""

from .cone import (ConeParams, DistanceEstimate, TailWindow, UndecidableAtHorizon, cone_contains, inner_ratio,
                   s_estimate, s_plus_estimate, t_estimate, triangle_report, weak_triangle_check)
from .spaces import CyclicOrbit, EmptyWindow, FinitePointSet, HorizonExceeded, PointedSpace, UnboundedSet, norm

__version__ = "0.1.0"
