"""Real Wehler surfaces: smooth (2,2,2) hypersurfaces in (P^1)^3, in one affine chart.

The surface is ``Phi(x, y, z) = sum c[i,j,k] x^i y^j z^k = 0`` with
``i, j, k in {0, 1, 2}``.  Fixing two coordinates leaves a quadratic in the
third; the involution ``s1`` swaps its two roots in ``x`` (similarly ``s2``,
``s3``).  Composite automorphisms are written as words such as ``"s1s2"``,
read left to right in order of application: ``"s1s2"`` is ``s2 o s1``.

Tangent vectors live in an orthonormal frame of the tangent plane chosen
deterministically from the unit normal, so tangent maps are 2x2 matrices.
"""

from __future__ import annotations

import re

import numpy as np

from ..errors import ChartEscapeError, ConfigError, FiberDegeneracyError
from .base import SurfaceModel

_TOKEN = re.compile(r"s([123])")

# hyperplane classes h1, h2, h3 with h_i.h_j = 2 for i != j, h_i^2 = 0
WEHLER_GRAM = np.array([[0, 2, 2], [2, 0, 2], [2, 2, 0]], dtype=int)


def involution_pullback(i: int) -> np.ndarray:
    """Pullback of ``s_i`` on span(h1, h2, h3): h_i -> -h_i + 2 (sum of the others)."""
    m = np.eye(3, dtype=int)
    m[:, i] = 2
    m[i, i] = -1
    return m


def golden_coefficients() -> np.ndarray:
    """Coefficients of (1+x^2)(1+y^2)(1+z^2) + 5xyz - 2."""
    c = np.zeros((3, 3, 3))
    for i in (0, 2):
        for j in (0, 2):
            for k in (0, 2):
                c[i, j, k] = 1.0
    c[0, 0, 0] -= 2.0
    c[1, 1, 1] = 5.0
    return c


def parse_word(name: str) -> list[int]:
    """``"s1s3"`` -> ``[0, 2]`` (0-based involution indices in order of application)."""
    if not name or _TOKEN.sub("", name) != "":
        raise KeyError(f"not a word in s1, s2, s3: {name!r}")
    return [int(t) - 1 for t in _TOKEN.findall(name)]


class WehlerModel(SurfaceModel):
    """A real Wehler surface with its three coordinate involutions."""

    dim = 2
    unstable_dim = 1
    constant_tangent = False

    def __init__(self, coefficients=None, generators=None, escape_radius: float = 1e3,
                 newton_steps: int = 1):
        c = golden_coefficients() if coefficients is None else np.asarray(coefficients, dtype=float)
        if c.shape != (3, 3, 3):
            raise ConfigError("Wehler coefficients must have shape (3, 3, 3)")
        self.coefficients = c
        self.escape_radius = float(escape_radius)
        self.newton_steps = int(newton_steps)
        self._names = list(generators) if generators else ["s1", "s2", "s3"]
        for name in self._names:
            try:
                parse_word(name)
            except KeyError as exc:
                raise ConfigError(str(exc)) from None
        self._terms = [(i, j, k, float(c[i, j, k])) for i in range(3) for j in range(3)
                       for k in range(3) if c[i, j, k] != 0.0]
        # per axis: (power of that variable, powers of the two others, coefficient)
        self._fiber_terms = []
        for ax in range(3):
            others = [q for q in range(3) if q != ax]
            self._fiber_terms.append([(e[ax], e[others[0]], e[others[1]], cf)
                                      for *e, cf in self._terms])

    # -- scalar fast path (single points are the common case along orbits) ----
    def _phi_grad1(self, p):
        x, y, z = float(p[0]), float(p[1]), float(p[2])
        X, Y, Z = (1.0, x, x * x), (1.0, y, y * y), (1.0, z, z * z)
        dX, dY, dZ = (0.0, 1.0, 2 * x), (0.0, 1.0, 2 * y), (0.0, 1.0, 2 * z)
        f = gx = gy = gz = 0.0
        for i, j, k, cf in self._terms:
            yz = Y[j] * Z[k]
            f += cf * X[i] * yz
            gx += cf * dX[i] * yz
            gy += cf * X[i] * dY[j] * Z[k]
            gz += cf * X[i] * Y[j] * dZ[k]
        return f, gx, gy, gz

    def _fiber1(self, ax, p):
        others = [q for q in range(3) if q != ax]
        u, v = float(p[others[0]]), float(p[others[1]])
        U, V = (1.0, u, u * u), (1.0, v, v * v)
        dU, dV = (0.0, 1.0, 2 * u), (0.0, 1.0, 2 * v)
        co = [0.0, 0.0, 0.0]
        du = [0.0, 0.0, 0.0]
        dv = [0.0, 0.0, 0.0]
        for d, a, b, cf in self._fiber_terms[ax]:
            co[d] += cf * U[a] * V[b]
            du[d] += cf * dU[a] * V[b]
            dv[d] += cf * U[a] * dV[b]
        return others, co, du, dv

    def _reproject1(self, p):
        for _ in range(self.newton_steps):
            f, gx, gy, gz = self._phi_grad1(p)
            s = f / (gx * gx + gy * gy + gz * gz)
            p = [p[0] - s * gx, p[1] - s * gy, p[2] - s * gz]
        return p

    def _involution1(self, i, p, reproject=True):
        _, (C, B, A), du, dv = self._fiber1(i, p)
        if abs(A) < 1e-12:
            if abs(B) < 1e-12:
                raise FiberDegeneracyError(f"degenerate fiber for s{i + 1}")
            raise ChartEscapeError(f"s{i + 1} sends the point to infinity")
        x = p[i]
        q = list(p)
        q[i] = C / (A * x) if abs(A * x) > abs(A) else -B / A - x
        if reproject:
            q = self._reproject1(q)
        if not all(abs(t) <= self.escape_radius for t in q):  # also catches nan
            raise ChartEscapeError("point left the affine chart of (P^1)^3")
        return q

    def _ambient_jacobian1(self, i, p):
        others, (C, B, A), du, dv = self._fiber1(i, p)
        J = np.eye(3)
        J[i, i] = -1.0
        for k, dc in zip(others, (du, dv)):
            J[i, k] = -(dc[1] * A - B * dc[2]) / (A * A)
        return J

    def _frame1(self, p):
        _, gx, gy, gz = self._phi_grad1(p)
        nn = (gx * gx + gy * gy + gz * gz) ** 0.5
        n = (gx / nn, gy / nn, gz / nn)
        k = min(range(3), key=lambda q: abs(n[q]))
        t1 = [-n[k] * n[0], -n[k] * n[1], -n[k] * n[2]]
        t1[k] += 1.0
        tn = (t1[0] ** 2 + t1[1] ** 2 + t1[2] ** 2) ** 0.5
        t1 = [t / tn for t in t1]
        t2 = [n[1] * t1[2] - n[2] * t1[1], n[2] * t1[0] - n[0] * t1[2], n[0] * t1[1] - n[1] * t1[0]]
        return np.array([[t1[0], t2[0]], [t1[1], t2[1]], [t1[2], t2[2]]])

    def step(self, name, point):
        """Image and 2x2 tangent map in one pass."""
        p = [float(t) for t in point]
        T0 = self._frame1(p)
        J = np.eye(3)
        for i in parse_word(name):
            J = self._ambient_jacobian1(i, p) @ J
            p = self._involution1(i, p)
        return np.array(p), self._frame1(p).T @ J @ T0

    # -- polynomial evaluation ---------------------------------------------
    @staticmethod
    def _powers(t):
        t = np.asarray(t, dtype=float)
        return np.stack([np.ones_like(t), t, t * t], axis=-1)

    def phi(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        X, Y, Z = (self._powers(p[..., k]) for k in range(3))
        return np.einsum("ijk,...i,...j,...k->...", self.coefficients, X, Y, Z)

    def grad(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        P = [self._powers(p[..., k]) for k in range(3)]
        dP = [np.stack([np.zeros_like(p[..., k]), np.ones_like(p[..., k]), 2 * p[..., k]], -1)
              for k in range(3)]
        c = self.coefficients
        gx = np.einsum("ijk,...i,...j,...k->...", c, dP[0], P[1], P[2])
        gy = np.einsum("ijk,...i,...j,...k->...", c, P[0], dP[1], P[2])
        gz = np.einsum("ijk,...i,...j,...k->...", c, P[0], P[1], dP[2])
        return np.stack([gx, gy, gz], axis=-1)

    def _fiber(self, i: int, p):
        """Coefficients A, B, C of Phi as a quadratic in coordinate ``i``, with gradients."""
        c = np.moveaxis(self.coefficients, i, 0)
        others = [k for k in range(3) if k != i]
        u, v = p[..., others[0]], p[..., others[1]]
        U, V = self._powers(u), self._powers(v)
        dU = np.stack([np.zeros_like(u), np.ones_like(u), 2 * u], -1)
        dV = np.stack([np.zeros_like(v), np.ones_like(v), 2 * v], -1)
        coef = [np.einsum("jk,...j,...k->...", c[d], U, V) for d in range(3)]
        dcoef_u = [np.einsum("jk,...j,...k->...", c[d], dU, V) for d in range(3)]
        dcoef_v = [np.einsum("jk,...j,...k->...", c[d], U, dV) for d in range(3)]
        return others, coef, dcoef_u, dcoef_v

    # -- automorphisms ---------------------------------------------------
    def names(self) -> list[str]:
        return list(self._names)

    def inverse(self, name: str) -> str:
        return "".join(f"s{k + 1}" for k in reversed(parse_word(name)))

    def _guard(self, p):
        if not np.all(np.isfinite(p)) or np.max(np.abs(p)) > self.escape_radius:
            raise ChartEscapeError("point left the affine chart of (P^1)^3")

    def reproject(self, p):
        """One Newton step (or more, per ``newton_steps``) back onto Phi = 0."""
        for _ in range(self.newton_steps):
            g = self.grad(p)
            p = p - (self.phi(p) / np.sum(g * g, axis=-1))[..., None] * g
        return p

    def involution(self, i: int, point, reproject: bool = True):
        p = np.array(point, dtype=float)
        _, (C, B, A), _, _ = self._fiber(i, p)
        x = p[..., i]
        if np.any((np.abs(A) < 1e-12) & (np.abs(B) < 1e-12)):
            raise FiberDegeneracyError(f"degenerate fiber for s{i + 1}")
        if np.any(np.abs(A) < 1e-12):
            raise ChartEscapeError(f"s{i + 1} sends the point to infinity")
        big = np.abs(A * x) > np.abs(A)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_new = np.where(big, C / (A * np.where(big, x, 1.0)), -B / A - x)
        p[..., i] = x_new
        if reproject:
            p = self.reproject(p)
        self._guard(p)
        return p

    def apply(self, name: str, point):
        p = np.asarray(point, dtype=float)
        if p.ndim == 1:
            q = list(p)
            for i in parse_word(name):
                q = self._involution1(i, q)
            return np.array(q)
        for i in parse_word(name):
            p = self.involution(i, p)
        return p

    def ambient_jacobian(self, i: int, p) -> np.ndarray:
        """3x3 derivative of ``x_i -> -B/A - x_i`` (valid on all of R^3, preserves Phi)."""
        return self._ambient_jacobian1(i, np.asarray(p, dtype=float))

    def frame(self, p) -> np.ndarray:
        """Orthonormal 3x2 basis of the tangent plane at ``p`` (stacked for arrays of points)."""
        p = np.asarray(p, dtype=float)
        if p.ndim == 1:
            return self._frame1(p)
        return np.array([self._frame1(q) for q in p.reshape(-1, 3)]).reshape(*p.shape[:-1], 3, 2)

    def jacobian(self, name: str, point) -> np.ndarray:
        return self.step(name, point)[1]

    # -- geometry ----------------------------------------------------------
    def exp(self, point, v, tol: float = 1e-14, max_iter: int = 50):
        """Move along the tangent vector, then return to the surface along the normal."""
        p = np.asarray(point, dtype=float)
        T = self._frame1(p)
        n = np.array(self._phi_grad1(p)[1:])
        n = n / np.linalg.norm(n)
        q = p + T @ np.asarray(v, dtype=float)
        s = 0.0
        for _ in range(max_iter):
            r = q + s * n
            val, *g = self._phi_grad1(r)
            ds = val / (g[0] * n[0] + g[1] * n[1] + g[2] * n[2])
            s -= ds
            if abs(ds) < tol * (1 + abs(s)):
                break
        out = q + s * n
        self._guard(out)
        return out

    def log(self, point, other):
        p = np.asarray(point, dtype=float)
        return self._frame1(p).T @ (np.asarray(other, dtype=float) - p)

    def distance(self, p, q) -> float:
        return float(np.linalg.norm(np.asarray(q, dtype=float) - np.asarray(p, dtype=float)))

    def embed(self, point, v) -> np.ndarray:
        return self.frame(np.asarray(point, dtype=float)) @ np.asarray(v, dtype=float)

    def sample_points(self, rng, n, box: float = 1.5):
        """Random surface points: draw (y, z), solve for x, keep real roots."""
        out = []
        while sum(len(o) for o in out) < n:
            m = max(4 * n, 64)
            yz = rng.uniform(-box, box, size=(m, 2))
            p = np.column_stack([np.zeros(m), yz])
            _, (C, B, A), _, _ = self._fiber(0, p)
            disc = B * B - 4 * A * C
            ok = (disc >= 0) & (np.abs(A) > 1e-9)
            root = (-B[ok] + np.sqrt(disc[ok]) * rng.choice([-1, 1], ok.sum())) / (2 * A[ok])
            pts = np.column_stack([root, yz[ok]])
            pts = self.reproject(self.reproject(pts))
            out.append(pts)
        return np.concatenate(out)[:n]

    # -- cohomology ----------------------------------------------------------
    def cohomology_gram(self) -> np.ndarray:
        return WEHLER_GRAM.copy()

    def kappa0(self) -> np.ndarray:
        return np.array([1, 1, 1], dtype=int)

    def cohomology_matrix(self, name: str) -> np.ndarray:
        """Pullback ``(s_{i_k} o ... o s_{i_1})^* = S_{i_1} ... S_{i_k}``."""
        m = np.eye(3, dtype=int)
        for i in parse_word(name):
            m = m @ involution_pullback(i)
        return m

    def describe(self) -> dict:
        d = super().describe()
        d["coefficients"] = self.coefficients.tolist()
        d["escape_radius"] = self.escape_radius
        return d
