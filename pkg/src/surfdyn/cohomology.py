"""Isometries of integral hyperbolic lattices: trichotomy, mass, Furstenberg vectors.

Classification is exact.  The characteristic polynomial of an integer matrix
is monic with integer coefficients.  By Kronecker's theorem its roots all lie
on the unit circle iff every irreducible factor is cyclotomic, so a
non-cyclotomic factor certifies spectral radius > 1 (loxodromic).  Otherwise
``M^k`` is unipotent for ``k`` the lcm of the cyclotomic orders; it is the
identity (elliptic, finite order) or not (parabolic).  The spectral radius
itself is evaluated with mpmath at high precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import lcm

import mpmath
import numpy as np
import sympy as sp

from .errors import ConfigError, NonConvergenceError
from .random_walk import FiniteMeasure, WalkWord


def _imat(M) -> sp.Matrix:
    return sp.Matrix(np.asarray(M, dtype=object).tolist())


def is_isometry(M, gram) -> bool:
    """``M^T G M == G`` in exact integer arithmetic."""
    Mi, G = _imat(M), _imat(gram)
    return Mi.T * G * Mi == G


def cyclotomic_index(poly: sp.Poly, max_index: int = 2000) -> int | None:
    """``m`` with ``poly == Phi_m``, or None if ``poly`` is not cyclotomic."""
    x = poly.gens[0]
    deg = poly.degree()
    if not poly.is_cyclotomic:
        return None
    for m in range(1, max_index + 1):
        if sp.totient(m) == deg and sp.Poly(sp.cyclotomic_poly(m, x), x) == poly:
            return m
    return None


def spectral_radius(M, dps: int = 50) -> mpmath.mpf:
    """Largest root modulus of the characteristic polynomial, at ``dps`` digits.

    Roots are taken per irreducible factor: factors are squarefree, which keeps
    the polynomial root finder away from repeated roots.
    """
    x = sp.Symbol("x")
    _, factors = sp.factor_list(_imat(M).charpoly(x).as_expr(), x)
    best = mpmath.mpf(0)
    with mpmath.workdps(dps):
        for f, _mult in factors:
            coeffs = [int(c) for c in sp.Poly(f, x).all_coeffs()]
            if len(coeffs) == 2:
                roots = [mpmath.mpf(-coeffs[1]) / coeffs[0]]
            else:
                roots = mpmath.polyroots(coeffs, maxsteps=200, extraprec=4 * dps)
            best = max([best] + [abs(r) for r in roots])
    return best


@dataclass
class Classification:
    kind: str  # loxodromic | parabolic | elliptic | undecided
    spectral_radius: float
    order: int | None = None  # finite order (elliptic) or unipotent power (parabolic)
    detail: str = ""

    def record(self) -> dict:
        return {"kind": self.kind, "spectral_radius": self.spectral_radius,
                "order": self.order, "detail": self.detail}


def classify_isometry(M, gram, order_bound: int = 10_000) -> Classification:
    """Exact trichotomy for an integral isometry of a hyperbolic lattice."""
    if not is_isometry(M, gram):
        raise ValueError("matrix is not an isometry of the Gram matrix")
    Mi = _imat(M)
    x = sp.Symbol("x")
    cp = Mi.charpoly(x)
    _, factors = sp.factor_list(cp.as_expr(), x)
    rho = float(spectral_radius(M))
    orders = []
    for f, _mult in factors:
        m = cyclotomic_index(sp.Poly(f, x))
        if m is None:
            if rho <= 1 + 1e-9:
                return Classification("undecided", rho, None,
                                      "non-cyclotomic factor but radius within 1e-9 of 1")
            return Classification("loxodromic", rho, None, f"non-cyclotomic factor {f}")
        orders.append(m)
    k = lcm(*orders) if orders else 1
    if k > order_bound:
        return Classification("undecided", rho, k, f"cyclotomic order {k} exceeds bound")
    n = Mi.shape[0]
    Mk = Mi ** k
    N = Mk - sp.eye(n)
    if N.is_zero_matrix:
        order = min(d for d in sp.divisors(k) if (Mi ** d) == sp.eye(n))
        return Classification("elliptic", rho, order, "finite order")
    if not (N ** n).is_zero_matrix:
        return Classification("undecided", rho, k, "power not unipotent")
    return Classification("parabolic", rho, k, f"M^{k} unipotent, not the identity")


# ---------------------------------------------------------------------------
# lattice action


@dataclass
class LatticeAction:
    """Integral isometries of a hyperbolic lattice, with a positive class for the mass."""

    gram: np.ndarray
    generators: dict
    kappa0: np.ndarray

    def __post_init__(self):
        self.gram = np.asarray(self.gram, dtype=object)
        self.kappa0 = np.asarray(self.kappa0, dtype=object)
        self.generators = {k: np.asarray(v, dtype=object) for k, v in self.generators.items()}
        for name, M in self.generators.items():
            if not is_isometry(M, self.gram):
                raise ConfigError(f"generator {name!r} is not an isometry")
        if self.pair(self.kappa0, self.kappa0) <= 0:
            raise ConfigError("kappa0 must have positive self-intersection")

    @classmethod
    def from_model(cls, model, names=None) -> "LatticeAction":
        names = model.names() if names is None else names
        return cls(model.cohomology_gram(), {n: model.cohomology_matrix(n) for n in names},
                   model.kappa0())

    @property
    def rank(self) -> int:
        return self.gram.shape[0]

    def pair(self, a, b):
        return np.asarray(a).dot(self.gram.dot(np.asarray(b)))

    def float_gram(self) -> np.ndarray:
        return self.gram.astype(float)

    def signature(self) -> tuple[int, int]:
        ev = np.linalg.eigvalsh(self.float_gram())
        return int((ev > 0).sum()), int((ev < 0).sum())

    def product(self, names) -> np.ndarray:
        """Pullback of ``f_{names[-1]} o ... o f_{names[0]}``: ``M_0 M_1 ... M_{k-1}``."""
        out = np.eye(self.rank, dtype=int).astype(object)
        for n in names:
            out = out.dot(self.generators[n])
        return out


def mass(a, action: LatticeAction):
    """``M(a) = <a | kappa0>``."""
    return action.pair(a, action.kappa0)


@dataclass
class ProjectiveClass:
    vector: np.ndarray  # mass-normalized
    self_pairing: float
    isotropy: float  # <e|e> / |e|^2
    converged: bool
    n_used: int
    cauchy: list = field(default_factory=list)

    @property
    def positive_cone(self) -> bool:
        """Closure of the positive cone (nef proxy): ``<e|e> >= 0`` up to rounding and mass > 0."""
        return self.isotropy > -1e-6


def projective_distance(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    return float(min(np.linalg.norm(a - b), np.linalg.norm(a + b)))


def _exact_float_vector(v, denom) -> np.ndarray:
    return np.array([float(Fraction(int(x), int(denom))) for x in v])


def furstenberg_vector(action: LatticeAction, omega, a=None, n: int = 256, tol: float = 1e-9,
                       iso_tol: float = 1e-6) -> ProjectiveClass:
    """Mass-normalized pullback ``(f_omega^n)^* a / M(.)`` along a word.

    ``omega`` is a :class:`WalkWord` over the generator names or a finite list of
    names.  Pullbacks accumulate as the left product ``P_n = P_{n-1} M_{n-1}``
    in exact integer arithmetic (floating products of a matrix and its inverse
    cancel catastrophically).  Convergence requires the dyadic approximations
    to be Cauchy (``tol``) and the limit to be isotropic (``iso_tol``).
    """
    a = action.kappa0 if a is None else np.asarray(a, dtype=object)
    if action.pair(a, a) <= 0:
        raise ValueError("start class must have positive self-intersection")
    names = list(omega) if not isinstance(omega, WalkWord) else omega.atoms(0, n)
    if len(names) < n:
        raise ValueError("word shorter than n")
    P = np.eye(action.rank, dtype=int).astype(object)
    checkpoints = {2 ** k for k in range(0, 64) if 2 ** k <= n} | {n}
    history = []
    v = None
    for i in range(n):
        P = P.dot(action.generators[names[i]])
        if i + 1 in checkpoints:
            v = P.dot(a)
            history.append(_exact_float_vector(v, mass(v, action)))
    e = history[-1]
    cauchy = [projective_distance(history[i], history[i + 1]) for i in range(len(history) - 1)]
    norm2 = int(v.dot(v))
    iso = float(Fraction(int(action.pair(v, v)), norm2))
    sq = float(Fraction(int(action.pair(v, v)), int(mass(v, action)) ** 2))
    converged = len(cauchy) >= 2 and cauchy[-1] < tol and abs(iso) < iso_tol
    return ProjectiveClass(e, sq, iso, converged, n, cauchy)


def furstenberg_step(action: LatticeAction, P, name, a):
    """One more generator on the left product, then mass renormalization."""
    P2 = P @ action.generators[name].astype(float)
    v = P2 @ np.asarray(a, dtype=float)
    return P2, v / (v @ action.float_gram() @ np.asarray(action.kappa0, dtype=float))


def require_convergence(pc: ProjectiveClass) -> ProjectiveClass:
    if not pc.converged:
        raise NonConvergenceError(
            f"pullbacks did not converge: last Cauchy gap {pc.cauchy[-1] if pc.cauchy else None}, "
            f"isotropy {pc.isotropy:.2e}")
    return pc


def dominant_axis(M) -> tuple[np.ndarray, np.ndarray]:
    """Attracting and repelling eigenvectors of a loxodromic isometry (numerical)."""
    w, V = np.linalg.eig(np.asarray(M, dtype=float))
    order = np.argsort(np.abs(w))
    return np.real(V[:, order[-1]]), np.real(V[:, order[0]])


def non_elementary(action: LatticeAction, max_len: int = 3) -> dict:
    """Look for two loxodromics with disjoint fixed-point pairs among short products."""
    loxos = []
    for k in range(1, max_len + 1):
        for word in product(sorted(action.generators), repeat=k):
            M = action.product(word)
            c = classify_isometry(M, action.gram)
            if c.kind == "loxodromic":
                loxos.append((word, dominant_axis(M)))
    for i in range(len(loxos)):
        for j in range(i + 1, len(loxos)):
            (wi, (ai, ri)), (wj, (aj, rj)) = loxos[i], loxos[j]
            pts_i, pts_j = (ai, ri), (aj, rj)
            if all(projective_distance(p, q) > 1e-8 for p in pts_i for q in pts_j):
                return {"non_elementary": True, "witness": ["".join(wi), "".join(wj)]}
    return {"non_elementary": False, "witness": None, "loxodromic_words": len(loxos)}


@dataclass
class BoundarySample:
    classes: list
    elementary: bool
    max_cluster_mass: float
    atom_free: bool
    distinct_directions: int
    positive_cone_fraction: float
    converged_fraction: float
    major_directions: int = 0

    def record(self) -> dict:
        return {"n": len(self.classes), "elementary": self.elementary,
                "max_cluster_mass": self.max_cluster_mass, "atom_free": self.atom_free,
                "distinct_directions": self.distinct_directions,
                "positive_cone_fraction_nef_proxy": self.positive_cone_fraction,
                "converged_fraction": self.converged_fraction,
                "major_directions": self.major_directions}


def boundary_measure_sample(action: LatticeAction, measure: FiniteMeasure, n_samples: int = 200,
                            n_iter: int = 256, seed: int = 0, scale: float = 1e-3,
                            atom_threshold: float = 0.2, strict: bool = False,
                            major_mass: float = 0.1) -> BoundarySample:
    """Samples of ``e(omega)`` over independent random words (seed ``seed + i`` for sample ``i``).

    The elementary flag is set unless two loxodromic words of length at most 3
    have disjoint fixed-point pairs.  For elementary supports the pullbacks need
    not converge (a walk on a cyclic group returns to the identity); such
    samples are kept and counted in ``converged_fraction`` unless ``strict``,
    in which case the non-convergence is raised.  ``major_directions`` counts
    directions carrying at least ``major_mass`` of the samples at ``scale``.
    """
    ne = non_elementary(restrict_action(action, measure.atoms))
    classes = []
    for i in range(n_samples):
        pc = furstenberg_vector(action, WalkWord(measure, seed=seed + i), n=n_iter)
        classes.append(require_convergence(pc) if strict else pc)
    vecs = np.array([c.vector for c in classes])
    masses = [float(np.mean([projective_distance(v, u) < scale for u in vecs])) for v in vecs]
    reps = []
    for v in vecs:
        if all(projective_distance(v, r) >= scale for r in reps):
            reps.append(v)
    frac = float(np.mean([c.positive_cone for c in classes]))
    conv = float(np.mean([c.converged for c in classes]))
    mcm = max(masses)
    major = sum(1 for r in reps
                if np.mean([projective_distance(r, u) < scale for u in vecs]) >= major_mass)
    return BoundarySample(classes, not ne["non_elementary"], mcm, mcm < atom_threshold,
                          len(reps), frac, conv, major)


def restrict_action(action: LatticeAction, names) -> LatticeAction:
    """Restriction of an action to the generators in ``names``."""
    return LatticeAction(action.gram, {n: action.generators[n] for n in names}, action.kappa0)
