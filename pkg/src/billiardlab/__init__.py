"""Planar convex billiards as exact twist maps, with symmetry-rigidity checks."""

from .billiards import (birkhoff_system, minkowski_system, outer_map, outer_system,
                        symplectic_next, symplectic_system)
from .curves import (EllipseBody, LpBall, ParamCurve, PolygonBody, RoundedPolygonBody,
                     SupportBody, SupportCurve, disc, regular_polygon)
from .errors import (BandError, BilliardError, ConvexityError, PreconditionError, SolverError,
                     SpecError, SymmetryError)
from .symmetry import FiniteOrderLinearMap, conjugate_to_rotation, make_rotation
from .twistmaps import PeriodicOrbit, PhasePoint, TwistSystem, periodic_orbit_solve, twist_step

__version__ = "0.1.0"

__all__ = [
    "BandError", "BilliardError", "ConvexityError", "EllipseBody", "FiniteOrderLinearMap",
    "LpBall", "ParamCurve", "PeriodicOrbit", "PhasePoint", "PolygonBody", "PreconditionError",
    "RoundedPolygonBody", "SolverError", "SpecError", "SupportBody", "SupportCurve",
    "SymmetryError", "TwistSystem", "birkhoff_system", "conjugate_to_rotation", "disc",
    "make_rotation", "minkowski_system", "outer_map", "outer_system", "periodic_orbit_solve",
    "regular_polygon", "symplectic_next", "symplectic_system", "twist_step",
]
