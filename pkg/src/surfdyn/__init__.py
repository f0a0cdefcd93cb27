"""Random holomorphic dynamics on complex surfaces: numerics and exact verifiers.

Modules:

* ``random_walk``: words over a finite measure and the skew product.
* ``models``: complex tori and Wehler surfaces.
* ``cocycle``: Lyapunov exponents, Oseledets splittings, Pesin blocks.
* ``charts``: Lyapunov charts, local manifolds, normal forms on unstable leaves.
* ``suspension``: suspension flows, the roof function and the time change.
* ``jets``: 2-jets at the origin and their precomposition matrices.
* ``cohomology``: isometries of the cohomology lattice and boundary vectors.
* ``lattice``: exact checks on integral quadratic forms.
* ``experiments`` and ``cli``: configs, reports and the command line.
"""

from .errors import (ChartEscapeError, ConfigError, DegenerateSplittingError, FiberDegeneracyError,
                     GraphTransformDivergence, InsufficientDataError, NonConvergenceError,
                     RadiusCollapseError, SurfdynError, WindowExhaustedError)
from .models import load_model
from .random_walk import FiniteMeasure, WalkWord

__version__ = "0.1.0"

__all__ = [
    "ChartEscapeError", "ConfigError", "DegenerateSplittingError", "FiberDegeneracyError",
    "FiniteMeasure", "GraphTransformDivergence", "InsufficientDataError", "NonConvergenceError",
    "RadiusCollapseError", "SurfdynError", "WalkWord", "WindowExhaustedError", "load_model",
]
