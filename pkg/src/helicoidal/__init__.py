"""Genus-one minimal surfaces asymptotic to helicoids: period problem, meshes, checks."""

from .surface_domain import Params, SurfacePoint, LiftedPath, MarkedPoints
from .forms import DerivedConstants, FormKind

__all__ = [
    "Params",
    "SurfacePoint",
    "LiftedPath",
    "MarkedPoints",
    "DerivedConstants",
    "FormKind",
]
__version__ = "0.1.0"
