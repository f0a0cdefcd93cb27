"""Common interface of the surface models.

A model exposes named automorphisms acting on points, their tangent maps in
a fixed orthonormal tangent frame at every point, and the exponential/log maps
of its reference metric.  Tangent vectors are always expressed in the model's
frame at the base point, so a tangent map is a ``dim x dim`` real matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class TangentMap:
    """Derivative of an automorphism at ``base``, landing at ``image``."""

    matrix: np.ndarray
    base: np.ndarray
    image: np.ndarray

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.matrix))

    def __matmul__(self, other):
        """Chain rule for ``self`` after ``other``; plain arrays are mapped as vectors."""
        if isinstance(other, TangentMap):
            return TangentMap(self.matrix @ other.matrix, other.base, self.image)
        return self.matrix @ other


class SurfaceModel:
    """Base class; subclasses implement the geometry of one surface family."""

    dim: int = 0
    unstable_dim: int = 0
    constant_tangent: bool = False

    # -- automorphisms ---------------------------------------------------
    def names(self) -> list[str]:
        raise NotImplementedError

    def inverse(self, name: str) -> str:
        raise NotImplementedError

    def apply(self, name: str, point):
        raise NotImplementedError

    def jacobian(self, name: str, point) -> np.ndarray:
        raise NotImplementedError

    def step(self, name: str, point):
        """``(apply(name, point), jacobian(name, point))``; models may fuse the two."""
        return self.apply(name, point), self.jacobian(name, point)

    def tangent(self, name: str, point) -> TangentMap:
        p = np.asarray(point, dtype=float)
        return TangentMap(self.jacobian(name, p), p, self.apply(name, p))

    # -- geometry ----------------------------------------------------------
    def exp(self, point, v):
        raise NotImplementedError

    def log(self, point, other):
        raise NotImplementedError

    def distance(self, p, q) -> float:
        return float(np.linalg.norm(self.log(p, q)))

    def embed(self, point, v) -> np.ndarray:
        """Tangent vectors (columns of ``v``) as vectors of the ambient space."""
        return np.asarray(v, dtype=float)

    def complex_structure(self, point=None):
        """Matrix of multiplication by i on the tangent frame, or None."""
        return None

    def sample_points(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError

    def fd_jacobian(self, name: str, point, h: float = 1e-6) -> np.ndarray:
        """Central finite-difference tangent map, in the same frames as ``jacobian``."""
        p = np.asarray(point, dtype=float)
        img = self.apply(name, p)
        cols = []
        for e in np.eye(self.dim):
            plus = self.log(img, self.apply(name, self.exp(p, h * e)))
            minus = self.log(img, self.apply(name, self.exp(p, -h * e)))
            cols.append((plus - minus) / (2 * h))
        return np.column_stack(cols)

    # -- cohomology ----------------------------------------------------------
    def cohomology_gram(self) -> np.ndarray:
        raise NotImplementedError

    def cohomology_matrix(self, name: str) -> np.ndarray:
        raise NotImplementedError

    def kappa0(self) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> dict:
        return {"type": type(self).__name__, "dim": self.dim,
                "unstable_dim": self.unstable_dim, "generators": self.names()}
