"""Exact checks on integral quadratic lattices.

Everything here is integer arithmetic (Python integers, or numpy int64 on
small bounded boxes where no overflow is possible), with sympy for the
algebraic-number comparison of eigenvectors.  Every witness returned is
re-verified by direct substitution.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from math import gcd, isqrt

import numpy as np
import sympy as sp

from .cohomology import classify_isometry
from .errors import ConfigError


def _descartes(coeffs) -> int:
    signs = [c > 0 for c in coeffs if c != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


@dataclass
class IntegralLattice:
    gram: list  # list of lists of Python ints

    def __post_init__(self):
        g = [[int(v) for v in row] for row in np.asarray(self.gram, dtype=object).tolist()]
        n = len(g)
        if any(len(r) != n for r in g):
            raise ConfigError("Gram matrix must be square")
        if any(g[i][j] != g[j][i] for i in range(n) for j in range(n)):
            raise ConfigError("Gram matrix must be symmetric")
        self.gram = g

    @property
    def rank(self) -> int:
        return len(self.gram)

    def q(self, v) -> int:
        return self.b(v, v)

    def b(self, v, w) -> int:
        g = self.gram
        n = self.rank
        return sum(int(v[i]) * g[i][j] * int(w[j]) for i in range(n) for j in range(n))

    def signature(self) -> tuple[int, int]:
        """``(n_+, n_-)`` by Descartes' rule on the characteristic polynomial.

        A symmetric matrix has only real eigenvalues, so sign changes of
        ``p(x)`` count positive roots and those of ``p(-x)`` negative roots exactly.
        """
        x = sp.Symbol("x")
        p = sp.Matrix(self.gram).charpoly(x)
        c = [int(v) for v in p.all_coeffs()]
        deg = len(c) - 1
        neg = [v * (-1) ** (deg - i) for i, v in enumerate(c)]
        return _descartes(c), _descartes(neg)

    def content(self) -> int:
        """gcd of ``G_ii`` and ``2 G_ij``: every value ``q(v)`` is a multiple of it."""
        n = self.rank
        vals = [self.gram[i][i] for i in range(n)]
        vals += [2 * self.gram[i][j] for i in range(n) for j in range(i + 1, n)]
        return reduce(gcd, vals, 0)

    def is_isometry(self, M) -> bool:
        n = self.rank
        cols = [[int(M[i][j]) for i in range(n)] for j in range(n)]
        return all(self.b(cols[i], cols[j]) == self.gram[i][j] for i in range(n) for j in range(n))


# ---------------------------------------------------------------------------
# checks


@dataclass
class CheckResult:
    ok: bool
    status: str
    witness: object = None
    certificate: str = ""
    extra: dict = field(default_factory=dict)

    def record(self) -> dict:
        w = self.witness
        if isinstance(w, np.ndarray):
            w = w.tolist()
        return {"ok": self.ok, "status": self.status, "witness": w,
                "certificate": self.certificate, **self.extra}


def is_even(L: IntegralLattice) -> CheckResult:
    """Even iff every diagonal entry is even (``q(v) = sum G_ii v_i^2 + 2 sum G_ij v_i v_j``)."""
    for i in range(L.rank):
        if L.gram[i][i] % 2:
            e = [0] * L.rank
            e[i] = 1
            return CheckResult(False, "odd", e, f"q(e_{i + 1}) = {L.q(e)} is odd")
    return CheckResult(True, "even", None, "all diagonal entries even")


def _box(rank: int, bound: int) -> np.ndarray:
    r = np.arange(-bound, bound + 1, dtype=np.int64)
    return np.array(np.meshgrid(*([r] * rank), indexing="ij")).reshape(rank, -1).T


def _values(L: IntegralLattice, pts: np.ndarray) -> np.ndarray:
    G = np.array(L.gram, dtype=np.int64)
    return np.einsum("ni,ij,nj->n", pts, G, pts)


def _check_box(L: IntegralLattice, bound: int):
    m = max(abs(v) for row in L.gram for v in row)
    if m * (L.rank * bound) ** 2 >= 2 ** 62:
        raise ValueError("search box too large for exact int64 evaluation")


def represents(L: IntegralLattice, value: int, search_bound: int = 50) -> CheckResult:
    """Find ``v`` with ``q(v) = value``; ``ok`` means a representation exists.

    Status is ``found``, ``certified_absent`` (``value`` not a multiple of the
    content, so no lattice vector can reach it), or ``absent_within_bound``.
    """
    if search_bound < 1:
        raise ValueError("search_bound must be >= 1")
    c = L.content()
    if c and value % c:
        return CheckResult(False, "certified_absent", None,
                           f"all values are multiples of {c} and {value} is not")
    _check_box(L, search_bound)
    pts = _box(L.rank, search_bound)
    hits = pts[_values(L, pts) == value]
    hits = hits[np.any(hits != 0, axis=1)] if value == 0 else hits
    if len(hits):
        v = min(([int(t) for t in h] for h in hits),
                key=lambda w: (sum(abs(t) for t in w), [-t for t in w]))
        assert L.q(v) == value
        return CheckResult(True, "found", v, f"q({v}) = {value}")
    return CheckResult(False, "absent_within_bound", None, f"no vector with |entries| <= {search_bound}")


def binary_isotropy_certificate(L: IntegralLattice) -> str | None:
    """For rank 2: certificate that no nonzero vector is isotropic, or None.

    ``q = a x^2 + 2 b xy + c y^2`` has a rational zero iff ``b^2 - a c`` is a
    perfect square; otherwise ``x / y`` would be a root of ``a t^2 + 2 b t + c``,
    which is irrational.
    """
    if L.rank != 2:
        return None
    a, b, c = L.gram[0][0], L.gram[0][1], L.gram[1][1]
    D = b * b - a * c
    if D < 0:
        return f"definite form: b^2 - ac = {D} < 0"
    r = isqrt(D)
    if r * r != D:
        if a == 0 or c == 0:
            return None
        return (f"b^2 - ac = {D} is not a perfect square, so a zero x/y would be a root of "
                f"{a}t^2 + {2 * b}t + {c}, which is irrational")
    return None


def null_vectors(L: IntegralLattice, search_bound: int = 50) -> CheckResult:
    """Isotropic nonzero vectors; ``ok`` means none exist (certified or within bound)."""
    cert = binary_isotropy_certificate(L)
    if cert is not None:
        return CheckResult(True, "certified_none", [], cert)
    _check_box(L, search_bound)
    pts = _box(L.rank, search_bound)
    hits = pts[(_values(L, pts) == 0) & np.any(pts != 0, axis=1)]
    vecs = [[int(t) for t in v] for v in hits]
    for v in vecs:
        assert L.q(v) == 0
    if vecs:
        vecs.sort(key=lambda v: (sum(abs(t) for t in v), [-t for t in v]))
        return CheckResult(False, "found", vecs, f"{len(vecs)} isotropic vectors in the box")
    return CheckResult(True, "none_within_bound", [], f"none with |entries| <= {search_bound}")


def isometries(L: IntegralLattice, entry_bound: int = 50) -> list:
    """All integer ``M`` with ``|entries| <= entry_bound`` and ``M^T G M = G``.

    Column ``j`` must satisfy ``q(c_j) = G_jj``; candidates per column are
    filtered from the box, then combined under the off-diagonal constraints
    ``b(c_i, c_j) = G_ij`` column by column.
    """
    _check_box(L, entry_bound)
    n = L.rank
    pts = _box(n, entry_bound)
    vals = _values(L, pts)
    cands = [[tuple(int(t) for t in v) for v in pts[vals == L.gram[j][j]]] for j in range(n)]
    out = []

    def extend(cols):
        j = len(cols)
        if j == n:
            M = [[cols[c][r] for c in range(n)] for r in range(n)]
            if L.is_isometry(M):
                out.append(M)
            return
        for v in cands[j]:
            if all(L.b(cols[i], v) == L.gram[i][j] for i in range(j)):
                extend(cols + [v])

    extend([])
    return out


def dominant_eigenvector(M):
    """Exact eigenvector for the eigenvalue of largest modulus (sympy algebraic numbers)."""
    A = sp.Matrix(M)
    best, vec = None, None
    for lam, _mult, vecs in A.eigenvects():
        val = abs(complex(sp.N(lam, 30)))
        if best is None or val > best:
            best, vec = val, vecs[0]
    return vec


def proportional(v, w) -> bool:
    """Exact test that two algebraic vectors are proportional (all 2x2 minors vanish)."""
    n = len(v)
    for i in range(n):
        for j in range(i + 1, n):
            if not sp.simplify(v[i] * w[j] - v[j] * w[i]).equals(0):
                return False
    return True


@dataclass
class IsometryReport:
    total: int
    kinds: dict
    hyperbolic: list
    distinct_axes: int
    axis_pairs: int

    def record(self) -> dict:
        return {"total": self.total, "kinds": self.kinds, "hyperbolic_count": len(self.hyperbolic),
                "distinct_dominant_axes": self.distinct_axes, "axis_pairs": self.axis_pairs,
                "hyperbolic_examples": self.hyperbolic[:4]}


def isometry_report(L: IntegralLattice, entry_bound: int = 50) -> IsometryReport:
    """Classify every isometry in the box; count distinct dominant eigenvectors.

    ``distinct_axes`` counts non-proportional dominant eigenvectors among
    hyperbolic (loxodromic) elements.  ``axis_pairs`` counts distinct unordered
    pairs {attracting, repelling} (a loxodromic and its inverse share one pair).
    """
    Ms = isometries(L, entry_bound)
    kinds = {}
    hyper = []
    for M in Ms:
        k = classify_isometry(M, L.gram).kind
        kinds[k] = kinds.get(k, 0) + 1
        if k == "loxodromic":
            hyper.append(M)
    axes = []
    for M in hyper:
        v = dominant_eigenvector(M)
        if not any(proportional(v, w) for w in axes):
            axes.append(v)
    pairs = []
    for M in hyper:
        inv = [list(r) for r in sp.Matrix(M).inv().tolist()]
        pair = (dominant_eigenvector(M), dominant_eigenvector(inv))
        if not any((proportional(pair[0], p[0]) and proportional(pair[1], p[1]))
                   or (proportional(pair[0], p[1]) and proportional(pair[1], p[0])) for p in pairs):
            pairs.append(pair)
    return IsometryReport(len(Ms), kinds, hyper, len(axes), len(pairs))


def _is_unipotent(M) -> bool:
    A = sp.Matrix(M)
    n = A.shape[0]
    return A != sp.eye(n) and ((A - sp.eye(n)) ** n).is_zero_matrix


def parabolic_absence(L: IntegralLattice, entry_bound: int = 50) -> CheckResult:
    """No parabolic isometries: certified via absence of null vectors, else by scanning the box."""
    nv = null_vectors(L, entry_bound)
    Ms = isometries(L, entry_bound)
    unip = [M for M in Ms if _is_unipotent(M)]
    scan = {"unipotent_in_box": len(unip), "isometries_scanned": len(Ms)}
    if nv.status == "certified_none":
        if unip:
            raise AssertionError("unipotent isometry found despite the isotropy certificate")
        return CheckResult(True, "certified", None,
                           "a parabolic fixes a null vector and there are none: " + nv.certificate,
                           scan)
    if unip:
        return CheckResult(False, "scan_found_unipotent", unip[0],
                           "null vectors exist; a unipotent isometry was found", scan)
    return CheckResult(True, "scan_none_within_bound", None,
                       "null vectors exist; no unipotent isometry within the bound", scan)


def weyl_trivial(L: IntegralLattice, search_bound: int = 50) -> CheckResult:
    """No roots (vectors with ``q = -2``), so the Weyl group is trivial."""
    r = represents(L, -2, search_bound)
    if r.ok:
        return CheckResult(False, "root_found", r.witness, r.certificate)
    return CheckResult(True, r.status, None, r.certificate)


def verify_appendix(gram, bound: int = 50) -> list[tuple[str, CheckResult]]:
    """Signature, evenness and the conditions for a non-elementary rank-2 action, one result each.

    The conditions are: no vector with ``q = -2``, no null vectors, two hyperbolic
    isometries with distinct axes, and no parabolic isometries.
    """
    L = IntegralLattice(gram)
    sig = L.signature()
    out = [("signature_(1,1)", CheckResult(sig == (1, L.rank - 1), f"signature {sig}"))]
    out.append(("even", is_even(L)))
    r = represents(L, -2, bound)
    out.append(("no_minus_2", CheckResult(not r.ok, r.status, r.witness, r.certificate)))
    out.append(("no_null_vectors", null_vectors(L, bound)))
    rep = isometry_report(L, bound)
    out.append(("two_hyperbolic_distinct_axes",
                CheckResult(len(rep.hyperbolic) >= 2 and rep.distinct_axes >= 2,
                            f"{len(rep.hyperbolic)} hyperbolic, {rep.distinct_axes} distinct axes",
                            rep.hyperbolic[:2], "", rep.record())))
    out.append(("parabolic_absence", parabolic_absence(L, bound)))
    return out


def eichler_fixture() -> tuple[IntegralLattice, list]:
    """``U + <-2>`` with the transvection ``[[1,1,-2],[0,1,0],[0,-1,1]]`` in basis (e, f, v)."""
    L = IntegralLattice([[0, 1, 0], [1, 0, 0], [0, 0, -2]])
    return L, [[1, 1, -2], [0, 1, 0], [0, -1, 1]]
