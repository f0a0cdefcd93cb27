"""Complex 2-tori C^2 / Lambda with complex-linear (optionally affine) automorphisms.

Real coordinates are ``(Re z1, Re z2, Im z1, Im z2)``; a complex matrix
``P + iQ`` acts by the real matrix ``[[P, -Q], [Q, P]]``.  Points are stored in
lattice coordinates modulo 1, so the torus is ``R^4 / Z^4`` after the change of
basis ``B`` (columns of ``B`` are the lattice generators in real coordinates).
The reference metric is the flat one, so tangent maps are constant.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np
import sympy as sp

from ..errors import ConfigError
from .base import SurfaceModel

INV = "^-1"

_PAIRS = list(combinations(range(4), 2))


def real_form(m) -> np.ndarray:
    """Real 4x4 representation of a complex 2x2 matrix."""
    m = np.asarray(m, dtype=complex)
    p, q = m.real, m.imag
    return np.block([[p, -q], [q, p]])


def complex_structure_matrix() -> np.ndarray:
    return real_form(1j * np.eye(2))


def _wrap01(x):
    y = np.mod(x, 1.0)
    return np.where(y >= 1.0, 0.0, y)


def _two_form(coeffs) -> sp.Matrix:
    w = sp.zeros(4, 4)
    for c, (i, j) in zip(coeffs, _PAIRS):
        w[i, j] = c
        w[j, i] = -c
    return w


def _coords(w) -> list:
    return [w[i, j] for i, j in _PAIRS]


def wedge_number(a, b) -> int:
    """Coefficient of ``e1^e2^e3^e4`` in ``a ^ b`` for 2-forms given in pair coordinates."""
    a12, a13, a14, a23, a24, a34 = a
    b12, b13, b14, b23, b24, b34 = b
    return (a12 * b34 - a13 * b24 + a14 * b23 + a23 * b14 - a24 * b13 + a34 * b12)


class TorusModel(SurfaceModel):
    """Linear or affine automorphisms of a complex torus of dimension 2.

    ``generators`` maps names to complex 2x2 matrices; ``translations``
    optionally maps names to a translation in lattice coordinates (so the
    automorphism is ``x -> M x + t``).  Each name automatically gets an inverse
    named ``name + "^-1"``.
    """

    dim = 4
    unstable_dim = 2
    constant_tangent = True

    def __init__(self, generators: dict, lattice=None, translations: dict | None = None):
        if not generators:
            raise ConfigError("torus model needs at least one generator")
        self.basis = np.eye(4) if lattice is None else np.asarray(lattice, dtype=float)
        if self.basis.shape != (4, 4) or abs(np.linalg.det(self.basis)) < 1e-12:
            raise ConfigError("lattice basis must be an invertible 4x4 matrix")
        self._binv = np.linalg.inv(self.basis)
        self.complex_matrices = {}
        self._real = {}
        self._lat = {}
        self._shift = {}
        translations = translations or {}
        for name, m in generators.items():
            if INV in name:
                raise ConfigError(f"generator name {name!r} may not contain {INV!r}")
            m = np.asarray(m, dtype=complex)
            if m.shape != (2, 2):
                raise ConfigError(f"generator {name!r} must be a complex 2x2 matrix")
            real = real_form(m)
            lat = self._binv @ real @ self.basis
            lat_int = np.rint(lat)
            if np.max(np.abs(lat - lat_int)) > 1e-9:
                raise ConfigError(f"generator {name!r} does not preserve the lattice")
            inv_lat = np.rint(np.linalg.inv(lat_int))
            if not np.array_equal(lat_int @ inv_lat, np.eye(4)):
                raise ConfigError(f"generator {name!r} is not invertible over the lattice")
            t = np.asarray(translations.get(name, np.zeros(4)), dtype=float)
            self.complex_matrices[name] = m
            self._real[name] = real
            self._real[name + INV] = np.linalg.inv(real)
            self._lat[name] = lat_int
            self._lat[name + INV] = inv_lat
            self._shift[name] = t
            self._shift[name + INV] = -(inv_lat @ t)
        self._names = list(generators)

    # -- automorphisms ---------------------------------------------------
    def names(self) -> list[str]:
        return list(self._names)

    def inverse(self, name: str) -> str:
        return name[: -len(INV)] if name.endswith(INV) else name + INV

    def _check(self, name):
        if name not in self._lat:
            raise KeyError(f"unknown automorphism {name!r}")

    def apply(self, name: str, point):
        self._check(name)
        x = np.asarray(point, dtype=float)
        return _wrap01(x @ self._lat[name].T + self._shift[name])

    def jacobian(self, name: str, point=None) -> np.ndarray:
        self._check(name)
        return self._real[name].copy()

    def lattice_matrix(self, name: str) -> np.ndarray:
        self._check(name)
        return self._lat[name].copy()

    def is_volume_preserving(self, name: str) -> bool:
        return abs(abs(np.linalg.det(self._real[name])) - 1.0) < 1e-12

    # -- geometry ----------------------------------------------------------
    def exp(self, point, v):
        return _wrap01(np.asarray(point, dtype=float) + np.asarray(v, dtype=float) @ self._binv.T)

    def log(self, point, other):
        d = np.asarray(other, dtype=float) - np.asarray(point, dtype=float)
        d = d - np.rint(d)
        return d @ self.basis.T

    def complex_structure(self, point=None):
        return complex_structure_matrix()

    def sample_points(self, rng, n):
        return rng.random((n, 4))

    # -- cohomology ----------------------------------------------------------
    def _ns_data(self):
        if hasattr(self, "_ns"):
            return self._ns
        jl = self._binv @ complex_structure_matrix() @ self.basis
        jl_int = np.rint(jl)
        if np.max(np.abs(jl - jl_int)) > 1e-9:
            raise ConfigError("lattice is not stable under the complex structure")
        J = sp.Matrix(jl_int.astype(int))
        syms = sp.symbols("c0:6")
        w = _two_form(syms)
        eqs = _coords(J.T * w * J - w)
        A = sp.Matrix([[sp.diff(e, s) for s in syms] for e in eqs])
        basis = []
        for v in A.nullspace():
            den = sp.ilcm(*[sp.fraction(x)[1] for x in v])
            v = v * den
            g = sp.igcd(*[int(x) for x in v])
            basis.append([int(x) // g for x in v])
        ns = sp.Matrix(basis).T  # 6 x rho
        sign = -1 if np.linalg.det(self.basis) > 0 else 1  # complex orientation e1^e3^e2^e4
        rho = ns.shape[1]
        gram = sp.zeros(rho, rho)
        for a in range(rho):
            for b in range(rho):
                gram[a, b] = sign * wedge_number(list(ns[:, a]), list(ns[:, b]))
        # Kahler form sum dx_k ^ dy_k in real coordinates, pulled to lattice coordinates
        omega = np.zeros((4, 4))
        for k in range(2):
            omega[k, k + 2] = 1.0
            omega[k + 2, k] = -1.0
        omega_lat = self.basis.T @ omega @ self.basis
        k_coords = sp.Matrix([sp.nsimplify(round(omega_lat[i, j], 9)) for i, j in _PAIRS])
        sol = ns.solve_least_squares(k_coords)
        self._ns = (ns, gram, sol)
        return self._ns

    def cohomology_gram(self) -> np.ndarray:
        return np.array(self._ns_data()[1].tolist(), dtype=object).astype(int)

    def kappa0(self) -> np.ndarray:
        sol = self._ns_data()[2]
        return np.array([sp.nsimplify(x) for x in sol], dtype=object)

    def cohomology_matrix(self, name: str) -> np.ndarray:
        """Integer matrix of the pullback on the Neron-Severi lattice."""
        self._check(name)
        ns = self._ns_data()[0]
        M = sp.Matrix(self._lat[name].astype(int))
        cols = []
        for a in range(ns.shape[1]):
            w = _two_form(list(ns[:, a]))
            img = sp.Matrix(_coords(M.T * w * M))
            cols.append(ns.solve_least_squares(img))
        out = sp.Matrix.hstack(*cols)
        if any(not x.is_integer for x in out):
            raise ConfigError(f"pullback of {name!r} is not integral on the NS basis")
        return np.array(out.tolist(), dtype=object).astype(int)

    def describe(self) -> dict:
        d = super().describe()
        d["generators"] = {k: {"re": v.real.tolist(), "im": v.imag.tolist()}
                           for k, v in self.complex_matrices.items()}
        d["translations"] = {k: self._shift[k].tolist() for k in self._names
                             if np.any(self._shift[k])}
        d["lattice"] = self.basis.tolist()
        return d
