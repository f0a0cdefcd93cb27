"""Degree-2 jets of origin-fixing maps and their action on the jet space.

A jet stores raw partial derivatives at the origin: ``D1[i, k] = d f_i / d x_k``
and ``D2[i, k, l] = d^2 f_i / d x_k d x_l``.  The scalar jet space uses the
derivative basis ``(h_x, h_y, h_xx, h_yy, h_xy)`` in dimension 2 (first
partials, then the pure second partials, then the mixed ones in lexicographic
order), so a coefficient vector lists the partials of ``h`` at the origin.
``precomposition_matrix(j)`` is the matrix of ``h -> h o f mod degree 3`` in
that basis; with this column convention ``T_{f o g} = T_g T_f``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

ORDERINGS = ("right_to_left", "left_to_right")


def quadratic_pairs(n: int) -> list[tuple[int, int]]:
    """Second-order basis index pairs: pure ``(k, k)`` first, then mixed ``(k, l)``, ``k < l``."""
    return [(k, k) for k in range(n)] + list(combinations(range(n), 2))


def basis_size(n: int) -> int:
    return n + n * (n + 1) // 2


@dataclass
class JetPoly2:
    """Two-jet at the origin of a map ``R^n -> R^n`` fixing the origin."""

    D1: np.ndarray
    D2: np.ndarray

    def __post_init__(self):
        n = self.D1.shape[0]
        if self.D1.shape != (n, n) or self.D2.shape != (n, n, n):
            raise ValueError("jet blocks must have shapes (n, n) and (n, n, n)")
        if n not in (2, 4):
            raise ValueError("jets are defined for n = 2 or n = 4")
        if self.exact:
            if any(self.D2[i, k, l] != self.D2[i, l, k]
                   for i in range(n) for k in range(n) for l in range(n)):
                raise ValueError("second partials must be symmetric")
        elif not np.array_equal(self.D2, np.swapaxes(self.D2, 1, 2)):
            raise ValueError("second partials must be symmetric")

    @property
    def n(self) -> int:
        return self.D1.shape[0]

    @property
    def exact(self) -> bool:
        return self.D1.dtype == object

    @classmethod
    def identity(cls, n: int, exact: bool = False) -> "JetPoly2":
        if exact:
            D1 = np.array([[Fraction(int(i == k)) for k in range(n)] for i in range(n)], dtype=object)
            D2 = np.full((n, n, n), Fraction(0), dtype=object)
            return cls(D1, D2)
        return cls(np.eye(n), np.zeros((n, n, n)))

    @classmethod
    def from_quadratic(cls, A, Q) -> "JetPoly2":
        """Jet of ``v -> A v + (v^T Q_i v)_i`` (so the Hessians are ``Q_i + Q_i^T``)."""
        A = np.asarray(A)
        Q = np.asarray(Q)
        return cls(A.copy(), Q + np.swapaxes(Q, 1, 2))

    def to_exact(self) -> "JetPoly2":
        conv = np.vectorize(lambda v: Fraction(v), otypes=[object])
        return JetPoly2(conv(self.D1), conv(self.D2))

    def to_float(self) -> "JetPoly2":
        return JetPoly2(self.D1.astype(float), self.D2.astype(float))

    def __call__(self, v) -> np.ndarray:
        """Taylor polynomial ``D1 v + (1/2) v^T D2_i v``."""
        v = np.asarray(v, dtype=float)
        return self.D1.astype(float) @ v + 0.5 * np.einsum("ikl,k,l->i", self.D2.astype(float), v, v)

    def max_partial(self) -> float:
        """``C'_f``: the largest absolute first or second partial."""
        return float(max(np.abs(self.D1.astype(float)).max(), np.abs(self.D2.astype(float)).max()))


def _check_origin(fun, n, tol=1e-12):
    f0 = np.asarray(fun(np.zeros(n)), dtype=float)
    if np.abs(f0).max() >= tol:
        raise ValueError(f"map does not fix the origin: |f(0)| = {np.abs(f0).max():.2e}")


def jet_from_map(fun, n: int, jacobian=None, hessians=None, h1: float = 1e-4,
                 h2: float = 1e-3) -> JetPoly2:
    """Two-jet of ``fun`` at the origin.

    Analytic partials are used when ``jacobian`` / ``hessians`` (callables at
    the origin, or arrays) are given.  Otherwise central differences with one
    Richardson step (steps ``h`` and ``h/2``); second partials use the larger
    step ``h2`` because rounding in a second difference grows like ``eps/h^2``.
    Hessians are symmetrized by averaging.
    """
    _check_origin(fun, n)
    zero = np.zeros(n)
    E = np.eye(n)

    def first(h):
        return np.column_stack([(np.asarray(fun(h * e)) - np.asarray(fun(-h * e))) / (2 * h)
                                for e in E])

    def second(h):
        H = np.zeros((n, n, n))
        for k in range(n):
            for l in range(k, n):
                a, b = h * E[k], h * E[l]
                val = (np.asarray(fun(a + b)) - np.asarray(fun(a - b))
                       - np.asarray(fun(b - a)) + np.asarray(fun(-a - b))) / (4 * h * h)
                H[:, k, l] = H[:, l, k] = val
        return H

    if jacobian is not None:
        D1 = np.asarray(jacobian(zero) if callable(jacobian) else jacobian, dtype=float)
    else:
        D1 = (4 * first(h1 / 2) - first(h1)) / 3
    if hessians is not None:
        D2 = np.asarray(hessians(zero) if callable(hessians) else hessians, dtype=float)
    else:
        D2 = (4 * second(h2 / 2) - second(h2)) / 3
    D2 = 0.5 * (D2 + np.swapaxes(D2, 1, 2))
    return JetPoly2(D1, D2)


def jet_compose(jf: JetPoly2, jg: JetPoly2) -> JetPoly2:
    """Two-jet of ``f o g``: ``D(f g) = Df Dg``, ``D^2(f g)_i = sum_k Df_ik D^2 g_k + Dg^T D^2 f_i Dg``."""
    if jf.n != jg.n:
        raise ValueError("dimension mismatch")
    n = jf.n
    if jf.exact or jg.exact:
        jf, jg = (j if j.exact else j.to_exact() for j in (jf, jg))
        D1 = np.array([[sum(jf.D1[i, k] * jg.D1[k, l] for k in range(n)) for l in range(n)]
                       for i in range(n)], dtype=object)
        D2 = np.empty((n, n, n), dtype=object)
        for i in range(n):
            for a in range(n):
                for b in range(n):
                    s = sum(jf.D1[i, k] * jg.D2[k, a, b] for k in range(n))
                    s += sum(jf.D2[i, k, l] * jg.D1[k, a] * jg.D1[l, b]
                             for k in range(n) for l in range(n))
                    D2[i, a, b] = s
        return JetPoly2(D1, D2)
    D1 = jf.D1 @ jg.D1
    D2 = (np.einsum("ik,kab->iab", jf.D1, jg.D2)
          + np.einsum("ikl,ka,lb->iab", jf.D2, jg.D1, jg.D1))
    return JetPoly2(D1, 0.5 * (D2 + np.swapaxes(D2, 1, 2)))


def scalar_block(jf: JetPoly2) -> np.ndarray:
    """Matrix of ``h -> h o f mod degree 3`` on scalar jets in the derivative basis.

    Column ``b`` holds the partials of ``e_b o f`` where ``e_b`` is the basis
    jet with a single unit partial.  Entries:

    - ``(h o f)_a = sum_k h_k f_{k,a}``
    - ``(h o f)_{ab} = sum_{k,l} h_{kl} f_{k,a} f_{l,b} + sum_k h_k f_{k,ab}``
    """
    n = jf.n
    pairs = quadratic_pairs(n)
    m = basis_size(n)
    exact = jf.exact
    zero = Fraction(0) if exact else 0.0
    T = np.full((m, m), zero, dtype=object if exact else float)
    D1, D2 = jf.D1, jf.D2
    for k in range(n):  # columns of first-order basis jets h = x_k
        for a in range(n):
            T[a, k] = D1[k, a]
        for r, (a, b) in enumerate(pairs):
            T[n + r, k] = D2[k, a, b]
    for c, (k, l) in enumerate(pairs):  # h with h_kl = h_lk = 1
        for r, (a, b) in enumerate(pairs):
            val = D1[k, a] * D1[l, b]
            if k != l:
                val = val + D1[l, a] * D1[k, b]
            T[n + r, n + c] = val
    return T


def precomposition_matrix(jf: JetPoly2) -> np.ndarray:
    """Block-diagonal action on vector-valued jets: one scalar block per output coordinate."""
    B = scalar_block(jf)
    n, m = jf.n, B.shape[0]
    T = np.full((n * m, n * m), B[0, 0] * 0, dtype=B.dtype)
    for i in range(n):
        T[i * m:(i + 1) * m, i * m:(i + 1) * m] = B
    return T


def chain_matrix(jets, ordering: str = "right_to_left") -> np.ndarray:
    """Product of the matrices of ``f_0, ..., f_{n-1}`` for the chain ``f_{n-1} o ... o f_0``.

    ``right_to_left`` multiplies ``T_{f_0} T_{f_1} ... T_{f_{n-1}}``, which is
    the homomorphic order for the precomposition action; ``left_to_right``
    is the printed order ``T_{f_{n-1}} ... T_{f_0}``.
    """
    mats = [precomposition_matrix(j) for j in jets]
    if ordering == "left_to_right":
        mats = mats[::-1]
    elif ordering != "right_to_left":
        raise ValueError(f"unknown ordering {ordering!r}")
    out = mats[0]
    for M in mats[1:]:
        out = out @ M
    return out


def compose_chain(jets) -> JetPoly2:
    """Jet of ``f_{n-1} o ... o f_0``."""
    out = jets[0]
    for j in jets[1:]:
        out = jet_compose(j, out)
    return out


def random_jet(rng: np.random.Generator, n: int, scale: float = 1.0) -> JetPoly2:
    A = np.eye(n) + scale * rng.normal(size=(n, n)) / np.sqrt(n)
    Q = scale * rng.normal(size=(n, n, n))
    return JetPoly2(A, Q + np.swapaxes(Q, 1, 2))


def homomorphism_error(jets, ordering: str) -> float:
    direct = precomposition_matrix(compose_chain(jets)).astype(float)
    return float(np.abs(chain_matrix(jets, ordering).astype(float) - direct).max())


def lock_ordering(seed: int = 0, n: int = 2, trials: int = 5, length: int = 4) -> dict:
    """Decide the matrix ordering by testing both on random nonlinear chains."""
    rng = np.random.default_rng(seed)
    errs = {o: 0.0 for o in ORDERINGS}
    for _ in range(trials):
        jets = [random_jet(rng, n, 0.5) for _ in range(length)]
        for o in ORDERINGS:
            errs[o] = max(errs[o], homomorphism_error(jets, o))
    locked = min(errs, key=errs.get)
    return {"ordering": locked, "errors": errs, "seed": seed}


def jet_constant(jf: JetPoly2) -> float:
    """``C_f = 2 (C'_f)^2``: bound on the entries of the jet matrix."""
    return 2.0 * jf.max_partial() ** 2


def chain_constant(jets) -> float:
    """``C = sqrt(side) max_i C_{f_i}`` with ``side`` the matrix side (``sqrt 60`` when n = 4).

    Dimension 4 uses the side 60 of the fifteen-term scalar basis counted with
    a constant monomial; it dominates the side 56 of the basis used here, so
    the bound stays valid.
    """
    n = jets[0].n
    side = 60 if n == 4 else n * basis_size(n)
    return float(np.sqrt(side) * max(jet_constant(j) for j in jets))


def second_derivative_bound(maps, n_dim: int, t: float = 0.0, k: float = 0.0,
                            h2: float = 1e-3) -> dict:
    """Bound ``C^n`` with ``n = floor(t + k)`` against the measured second partials.

    ``maps`` is the chain ``[f_0, f_1, ...]`` of origin-fixing callables; the
    first ``n`` of them (all when ``t = k = 0``) are composed.  Jets are taken by
    finite differences; the measurement is the largest absolute second partial
    of the composed map at the origin.
    """
    n = int(np.floor(t + k)) if (t or k) else len(maps)
    if n < 1 or n > len(maps):
        raise ValueError(f"need 1 <= n <= {len(maps)}, got {n}")
    chain = maps[:n]
    jets = [jet_from_map(f, n_dim, h2=h2) for f in chain]
    C = chain_constant(jets)

    def composed(v):
        for f in chain:
            v = f(v)
        return v

    measured = float(np.abs(jet_from_map(composed, n_dim, h2=h2).D2).max())
    return {"n": n, "C": C, "bound": C ** n, "measured": measured, "ok": measured <= C ** n}


def taylor_sandwich(fun, n_dim: int, samples, h2: float = 1e-3) -> dict:
    """Upper and lower Taylor bounds ``|F(v)| <= |DF(0)v| + M|v|^2/2`` and ``>= |DF(0)v| - M|v|^2/2``.

    ``M`` is the largest second-derivative norm measured on the segments from 0 to the samples.
    """
    _check_origin(fun, n_dim)
    J = jet_from_map(fun, n_dim, h2=h2)
    M = 0.0
    for v in samples:
        for s in (0.0, 0.25, 0.5, 0.75, 1.0):
            w = s * np.asarray(v, dtype=float)
            shifted = lambda u, w=w: np.asarray(fun(w + u)) - np.asarray(fun(w))
            H = jet_from_map(shifted, n_dim, h2=h2).D2
            M = max(M, float(np.sqrt(sum(np.linalg.norm(Hi, 2) ** 2 for Hi in H))))
    upper_ok, lower_ok = True, True
    worst = 0.0
    for v in samples:
        v = np.asarray(v, dtype=float)
        Fv = np.linalg.norm(fun(v))
        lin = np.linalg.norm(J.D1 @ v)
        rem = 0.5 * M * (v @ v)
        upper_ok &= bool(Fv <= lin + rem + 1e-12)
        lower_ok &= bool(Fv >= lin - rem - 1e-12)
        worst = max(worst, abs(Fv - lin) / max(rem, 1e-300))
    return {"M": M, "upper": upper_ok, "lower": lower_ok, "worst_ratio": worst}


def validation_suite(seed: int = 0) -> list[dict]:
    """Checks run by the ``jets-test`` command: one record per check."""
    rng = np.random.default_rng(seed)
    out = []
    f = JetPoly2(np.array([[2.0, 0.0], [0.0, 1.0]]),
                 np.array([np.zeros((2, 2)), [[2.0, 0.0], [0.0, 0.0]]]))
    expected = np.array([[2, 0, 0, 0, 0], [0, 1, 0, 0, 0], [0, 2, 4, 0, 0],
                         [0, 0, 0, 1, 0], [0, 0, 0, 0, 2]], dtype=float)
    err = float(np.abs(scalar_block(f) - expected).max())
    out.append({"check": "worked_example", "error": err, "ok": err == 0.0})
    ff = jet_compose(f, f)
    ok = ff.D1[0, 0] == 4.0 and ff.D2[1, 0, 0] == 10.0
    out.append({"check": "self_composition", "d2f2_dx2": float(ff.D2[1, 0, 0]), "ok": bool(ok)})
    lock = lock_ordering(seed)
    out.append({"check": "ordering_lock", **lock, "ok": lock["errors"][lock["ordering"]] < 1e-9})
    worst = 0.0
    for length in range(1, 7):
        for n in (2, 4):
            jets = [random_jet(rng, n, 0.5) for _ in range(length)]
            worst = max(worst, homomorphism_error(jets, lock["ordering"]))
    out.append({"check": "homomorphism", "max_error": worst, "ok": worst < 1e-9})
    ratio = 0.0
    for _ in range(20):
        j = random_jet(rng, 2, 0.7)
        ratio = max(ratio, float(np.abs(scalar_block(j)).max()) / jet_constant(j))
    out.append({"check": "entry_bound", "max_ratio": ratio, "ok": ratio <= 1.0})
    exact_err = 0.0
    for _ in range(5):
        jets = [random_jet(rng, 2, 0.5) for _ in range(3)]
        fl = chain_matrix(jets, lock["ordering"]).astype(float)
        ex = chain_matrix([j.to_exact() for j in jets], lock["ordering"])
        exact_err = max(exact_err, float(np.abs(fl - ex.astype(float)).max()))
    out.append({"check": "exact_mode", "max_error": exact_err, "ok": exact_err < 1e-12})
    return out
