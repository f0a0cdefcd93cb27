"""Derivative cocycle analysis: exponents, Oseledets frames, Lyapunov norms.

Everything is computed from an :class:`OrbitSegment`, the orbit of a point
over a finite index window of a random word together with the tangent maps
``D_j = D f_{omega_j}`` at ``x_j``.  The unstable frames ``U_j`` come from pushing
a generic frame forward with QR from the left end of the window; the stable
frames ``S_j`` from pulling one back with the inverse cocycle from the right
end.  The QR factors give the cocycle restricted to each subspace
(``D_j U_j = U_{j+1} Ru_j``), which lets vectors of ``E^u`` be moved backward
and vectors of ``E^s`` forward without losing them to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import (DegenerateSplittingError, InsufficientDataError,
                     WindowExhaustedError)
from .random_walk import WalkWord, worker_seed

# ---------------------------------------------------------------------------
# linear algebra helpers


def _generic_frame(d: int, salt: int = 0) -> np.ndarray:
    rng = np.random.default_rng(20240607 + salt)
    q, _ = np.linalg.qr(rng.normal(size=(d, d)))
    return q


def _qr_pos(a):
    """QR with nonnegative diagonal of R (works on stacks)."""
    q, r = np.linalg.qr(a)
    s = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    s = np.where(s == 0, 1.0, s)
    return q * s[..., None, :], r * s[..., :, None]


def orth(a) -> np.ndarray:
    q, _ = np.linalg.qr(np.asarray(a, dtype=float))
    return q


def grassmann_distance(V, W) -> float:
    """``d_Gr`` of two subspaces given by spanning columns: ``||P_V - P_W||_2``."""
    qv, qw = orth(V), orth(W)
    return float(np.linalg.norm(qv @ qv.T - qw @ qw.T, 2))


def principal_angle(V, W) -> float:
    """Smallest principal angle between two subspaces, in radians."""
    qv, qw = orth(V), orth(W)
    resid = qw - qv @ (qv.T @ qw)
    sin_min = np.linalg.svd(resid, compute_uv=False).min()
    cos_max = np.linalg.svd(qv.T @ qw, compute_uv=False).max()
    return float(np.arctan2(sin_min, cos_max))


# ---------------------------------------------------------------------------
# orbits


@dataclass
class OrbitSegment:
    """Orbit points ``x_j`` for ``lo <= j <= hi`` and tangent maps ``D_j`` for ``lo <= j < hi``."""

    model: object
    omega: WalkWord
    lo: int
    hi: int
    points: np.ndarray | None
    mats: np.ndarray

    def point(self, j: int):
        if self.points is None:
            raise WindowExhaustedError("segment was built without points")
        if not self.lo <= j <= self.hi:
            raise WindowExhaustedError(f"index {j} outside realized window [{self.lo}, {self.hi}]")
        return self.points[j - self.lo]

    def mat(self, j: int) -> np.ndarray:
        if not self.lo <= j < self.hi:
            raise WindowExhaustedError(f"tangent index {j} outside [{self.lo}, {self.hi})")
        return self.mats[j - self.lo]

    def mat_range(self, a: int, b: int) -> np.ndarray:
        if a < self.lo or b > self.hi:
            raise WindowExhaustedError(f"tangent range [{a}, {b}) outside [{self.lo}, {self.hi})")
        return self.mats[a - self.lo:b - self.lo]


def orbit_segment(model, omega: WalkWord, x, lo: int, hi: int, with_points: bool = True) -> OrbitSegment:
    """Realize the orbit of ``x`` (at index 0) over ``[lo, hi]``."""
    if lo > 0 or hi < 0:
        raise ValueError("window must contain index 0")
    names = omega.atoms(lo, hi)
    if model.constant_tangent:
        table = {n: model.jacobian(n) for n in set(names)}
        mats = np.array([table[n] for n in names]).reshape(hi - lo, model.dim, model.dim)
        if not with_points:
            return OrbitSegment(model, omega, lo, hi, None, mats)
    x = np.asarray(x, dtype=float)
    pts = [None] * (hi - lo + 1)
    pts[-lo] = x
    fwd_mats = []
    p = x
    for j in range(0, hi):
        if model.constant_tangent:
            p = model.apply(names[j - lo], p)
        else:
            p, D = model.step(names[j - lo], p)
            fwd_mats.append(D)
        pts[j + 1 - lo] = p
    p = x
    for j in range(-1, lo - 1, -1):
        p = model.apply(model.inverse(names[j - lo]), p)
        pts[j - lo] = p
    points = np.array(pts)
    if not model.constant_tangent:
        back = [model.jacobian(names[j - lo], points[j - lo]) for j in range(lo, 0)]
        mats = np.array(back + fwd_mats).reshape(hi - lo, model.dim, model.dim)
    return OrbitSegment(model, omega, lo, hi, points, mats)


# ---------------------------------------------------------------------------
# exponents


@dataclass
class LyapunovResult:
    exponents: np.ndarray  # sorted descending, averaged over seeds
    stderr: np.ndarray
    per_seed: np.ndarray  # (n_seeds, dim)
    seeds: list
    n: int
    burn_in: int
    sum_check: float  # |sum of exponents - mean log|det||
    plus_minus: float  # lambda_plus + lambda_minus
    plus_minus_stderr: float
    drift: np.ndarray
    converged: bool
    nonconvergence_flag: bool

    @property
    def lambda_plus(self) -> float:
        return float(self.exponents[0])

    @property
    def lambda_minus(self) -> float:
        return float(self.exponents[-1])

    def record(self) -> dict:
        return {"seeds": [int(s) for s in self.seeds], "n": self.n,
                "exponents": self.exponents.tolist(), "stderr": self.stderr.tolist(),
                "lambda_plus": self.lambda_plus, "lambda_minus": self.lambda_minus,
                "plus_minus": self.plus_minus, "plus_minus_stderr": self.plus_minus_stderr,
                "sum_check": self.sum_check, "converged": self.converged}


def _batch_stderr(x: np.ndarray, n_batches: int) -> np.ndarray:
    """Standard error of the mean of a (time, ...) series from batch means."""
    nb = max(2, min(n_batches, x.shape[0] // 2))
    usable = (x.shape[0] // nb) * nb
    means = x[:usable].reshape(nb, usable // nb, *x.shape[1:]).mean(axis=1)
    return means.std(axis=0, ddof=1) / np.sqrt(nb)


def lyapunov_exponents(model, measure, x0, seed, n: int, burn_in: int | None = None,
                       n_batches: int = 20) -> LyapunovResult:
    """Lyapunov spectrum by QR re-orthonormalization at every step.

    ``seed`` may be a single seed or a list; seeds are processed together and
    the ensemble mean and standard error are reported.  ``n`` steps are
    measured after ``burn_in`` discarded steps (default ``min(n // 10, 1000)``).
    """
    if n < 100:
        raise ValueError("need n >= 100 steps")
    seeds = sorted(int(s) for s in np.atleast_1d(seed))
    burn = min(n // 10, 1000) if burn_in is None else int(burn_in)
    d = model.dim
    total = burn + n
    words = [WalkWord(measure, s) for s in seeds]
    if model.constant_tangent:
        table = np.array([model.jacobian(a) for a in measure.atoms])
        syms = np.array([w.symbols(0, total) for w in words])  # (S, T)
        logdet_tab = np.log(np.abs(np.linalg.det(table)))
        logdet = logdet_tab[syms[:, burn:]].T
        mats = table[syms.T]  # (T, S, d, d)
    else:
        segs = [orbit_segment(model, w, x0, 0, total) for w in words]
        mats = np.stack([s.mats for s in segs], axis=1)
        logdet = np.log(np.abs(np.linalg.det(mats[burn:])))
    Q = np.broadcast_to(_generic_frame(d), (len(seeds), d, d)).copy()
    diag = np.empty((n, len(seeds), d))
    qr = np.linalg.qr
    for t in range(total):
        Q, R = qr(mats[t] @ Q)
        if t >= burn:
            diag[t - burn] = np.diagonal(R, axis1=1, axis2=2)
    logs = np.log(np.abs(diag))
    del diag
    # QR columns come out in descending order in the limit; sort for safety
    order = np.argsort(-logs.mean(axis=(0, 1)))
    logs = logs[:, :, order]
    per_seed = logs.mean(axis=0)
    exps = per_seed.mean(axis=0)
    series = logs.mean(axis=1)  # ensemble-averaged per-step increments, (n, d)
    se = _batch_stderr(series, n_batches)
    pm_series = series[:, 0] + series[:, -1]
    pm = float(pm_series.mean())
    pm_se = _batch_stderr(pm_series, n_batches)
    if len(seeds) >= 5:
        # independent replicates: use the larger of the two standard errors
        se = np.maximum(se, per_seed.std(axis=0, ddof=1) / np.sqrt(len(seeds)))
        pm_seed = per_seed[:, 0] + per_seed[:, -1]
        pm_se = max(pm_se, pm_seed.std(ddof=1) / np.sqrt(len(seeds)))
    # the estimate cannot be resolved below the rounding of the two exponents it combines
    pm_floor = 8 * np.finfo(float).eps * (abs(exps[0]) + abs(exps[-1]))
    pm_se = float(np.hypot(pm_se, pm_floor))
    sum_check = float(abs(logs.sum(axis=2).mean() - logdet.mean()))
    half, quarter = n // 2, n // 4
    tail = series[n - quarter:]
    drift = np.abs(series[half:].mean(axis=0) - tail.mean(axis=0))
    se_q = _batch_stderr(tail, n_batches)
    converged = bool(np.all(drift <= 3 * se_q + 1e-12))
    nonconv = bool(np.any(np.abs(tail.mean(axis=0) - exps) > 10 * se + 1e-12))
    return LyapunovResult(exps, se, per_seed, seeds, n, burn, sum_check, pm, pm_se,
                          drift, converged, nonconv)


def default_epsilon(lambda_plus: float, lambda_minus: float) -> float:
    """``min(1, lambda_plus/200, -lambda_minus/200) / 10``."""
    return min(1.0, lambda_plus / 200.0, -lambda_minus / 200.0) / 10.0


# ---------------------------------------------------------------------------
# Oseledets frames along a segment


class CocycleWindow:
    """Unstable/stable frames and restricted cocycles along an orbit segment.

    ``Ru[j]`` satisfies ``D_j U_j = U_{j+1} Ru[j]`` and ``Rs[j]`` satisfies
    ``D_j S_j = S_{j+1} Rs[j]`` exactly (up to rounding).  Frames near the
    left end are not yet converged for ``E^u``; near the right end for ``E^s``.
    """

    def __init__(self, segment: OrbitSegment, salt: int = 0):
        self.segment = segment
        model = segment.model
        self.dim = model.dim
        self.u = model.unstable_dim
        lo, hi = segment.lo, segment.hi
        n = hi - lo
        d = self.dim
        mats = segment.mats
        Qf = np.empty((n + 1, d, d))
        Rf = np.empty((n, d, d))
        Qf[0] = _generic_frame(d, salt)
        logs_f = np.empty((n, d))
        for k in range(n):
            Qf[k + 1], Rf[k] = _qr_pos(mats[k] @ Qf[k])
            logs_f[k] = np.log(np.abs(np.diag(Rf[k])))
        Qb = np.empty((n + 1, d, d))
        Rb = np.empty((n, d, d))
        Qb[n] = _generic_frame(d, salt + 1)
        inv = np.linalg.inv(mats)
        logs_b = np.empty((n, d))
        for k in range(n - 1, -1, -1):
            Qb[k], Rb[k] = _qr_pos(inv[k] @ Qb[k + 1])
            logs_b[k] = np.log(np.abs(np.diag(Rb[k])))
        u, s = self.u, d - self.u
        self.U = Qf[:, :, :u]
        self.S = Qb[:, :, :s]
        self.Ru = Rf[:, :u, :u]
        self.Rs = np.linalg.inv(Rb[:, :s, :s])
        self._logs_f = logs_f
        self._logs_b = logs_b

    @property
    def lo(self):
        return self.segment.lo

    @property
    def hi(self):
        return self.segment.hi

    def Eu(self, j: int) -> np.ndarray:
        return self.U[j - self.lo]

    def Es(self, j: int) -> np.ndarray:
        return self.S[j - self.lo]

    def ru(self, j: int) -> np.ndarray:
        return self.Ru[j - self.lo]

    def rs(self, j: int) -> np.ndarray:
        return self.Rs[j - self.lo]

    def restricted(self, tag: str, j: int) -> np.ndarray:
        return self.ru(j) if tag == "u" else self.rs(j)

    def frame(self, tag: str, j: int) -> np.ndarray:
        return self.Eu(j) if tag == "u" else self.Es(j)

    def exponent_estimates(self, skip: int) -> tuple[float, float]:
        """(lambda_plus, lambda_minus) from the restricted cocycles, skipping the ends."""
        n = self.hi - self.lo
        if n <= 2 * skip:
            raise InsufficientDataError("window too short for exponent estimates")
        lp = self._logs_f[skip:n - skip, 0].mean()
        lm = -self._logs_b[skip:n - skip, 0].mean()
        return float(lp), float(lm)

    def angle(self, j: int) -> float:
        return principal_angle(self.Eu(j), self.Es(j))

    def angles(self, a: int, b: int) -> np.ndarray:
        return np.array([self.angle(j) for j in range(a, b + 1)])


@dataclass
class OseledetsFrame:
    """Estimated splitting at ``(x, omega)``; see :func:`oseledets_splitting`."""

    x: np.ndarray
    omega: WalkWord
    Eu: np.ndarray
    Es: np.ndarray
    lambda_plus: float
    lambda_minus: float
    angle: float
    n_used: int
    residual_u: float
    residual_s: float
    window: CocycleWindow = field(repr=False, default=None)

    @property
    def residual(self) -> float:
        return max(self.residual_u, self.residual_s)

    def converged(self, tol: float = 1e-6) -> bool:
        return self.residual < tol


def oseledets_splitting(model, omega: WalkWord, x, n_fwd: int = 400, n_bwd: int = 400,
                        exponents: tuple[float, float] | None = None) -> OseledetsFrame:
    """Oseledets frame at ``(x, omega)`` from a backward window for ``E^u`` and forward for ``E^s``.

    The equivariance residual compares ``D_0 E^u(x, omega)`` against an
    independent estimate of ``E^u`` at ``F(x, omega)`` built from a window
    shifted by one step with a different initial frame (likewise for ``E^s``).
    """
    seg = orbit_segment(model, omega, x, -n_bwd, n_fwd)
    win = CocycleWindow(seg)
    Eu, Es = win.Eu(0), win.Es(0)
    angle = principal_angle(Eu, Es)
    if angle < 1e-8:
        raise DegenerateSplittingError(f"angle {angle:.3e} between E^u and E^s")
    # independent estimates at index 1
    sub = OrbitSegment(model, omega, -n_bwd + 1, n_fwd, None if seg.points is None else seg.points[1:],
                       seg.mats[1:])
    alt = CocycleWindow(sub, salt=7)
    D0 = seg.mat(0)
    res_u = grassmann_distance(D0 @ Eu, alt.Eu(1))
    res_s = grassmann_distance(D0 @ Es, alt.Es(1))
    if exponents is None:
        exponents = win.exponent_estimates(min(n_fwd, n_bwd) // 4)
    return OseledetsFrame(np.asarray(x, dtype=float), omega, Eu, Es, float(exponents[0]),
                          float(exponents[1]), angle, n_fwd + n_bwd, res_u, res_s, win)


# ---------------------------------------------------------------------------
# Lyapunov norms


def _log_frob_products(R_seq, c):
    """Yield (log-scale, normalized vector) of R_k ... R_1 c progressively."""
    v = np.array(c, dtype=float)
    logscale = 0.0
    out = []
    for R in R_seq:
        v = R @ v
        nv = np.linalg.norm(v)
        logscale += np.log(nv)
        v = v / nv
        out.append(logscale)
    return np.array(out)


def lyapunov_norm(v, tag: str, x, omega: WalkWord, eps: float, N: int, model=None,
                  window: CocycleWindow | None = None, lam: float | None = None,
                  margin: int = 400) -> float:
    """Two-sided Lyapunov norm truncated at ``|n| <= N`` (log-domain accumulation).

    ``v`` is a tangent vector at ``x`` assumed to lie in ``E^tag``; it is
    replaced by its orthogonal projection onto the estimated subspace.  Either
    pass a prebuilt ``window`` (index 0 at ``x``) or a ``model`` from which one
    is realized with ``margin`` extra steps of convergence on each side.
    """
    if window is None:
        seg = orbit_segment(model, omega, x, -(N + margin), N + margin)
        window = CocycleWindow(seg)
    if lam is None:
        lp, lm = window.exponent_estimates(min(margin, (window.hi - window.lo) // 4))
        lam = lp if tag == "u" else lm
    E = window.frame(tag, 0)
    c = E.T @ np.asarray(v, dtype=float)
    norm0 = np.linalg.norm(c)
    if norm0 == 0 or N == 0:
        return float(norm0)
    fwd = _log_frob_products([window.restricted(tag, k) for k in range(0, N)], c / norm0)
    bwd = _log_frob_products([np.linalg.inv(window.restricted(tag, k)) for k in range(-1, -N - 1, -1)],
                             c / norm0)
    n = np.arange(1, N + 1)
    terms = np.concatenate([[0.0], 2 * fwd - 2 * lam * n - 2 * eps * n,
                            2 * bwd + 2 * lam * n - 2 * eps * n])
    top = terms.max()
    return float(norm0 * np.exp(0.5 * (top + np.log(np.exp(terms - top).sum()))))


def anchored_grams(window: CocycleWindow, tag: str, lam: float, eps: float,
                   a: int, b: int, tails: bool = True) -> np.ndarray:
    """Gram matrices of the Lyapunov norm at every ``j`` in ``[a, b]`` over the fixed window ``[a, b]``.

    ``G_j = sum_{m=a}^{b} e^{-2 lam (m-j) - 2 eps |m-j|} P_{m<-j}^T P_{m<-j}``
    where ``P`` is the restricted cocycle.  Using one absolute window for all
    ``j`` makes the one-step bounds ``e^{lam +- eps}`` hold exactly.  Computed
    by the forward/backward linear recursions.

    With ``tails`` the sums beyond the window are closed by geometric series,
    as if the restricted cocycle grew at exactly ``e^{lam}`` outside it.  The
    bounds hold for any positive initialization of the recursions, and for a
    constant conformal cocycle the closed sums are the untruncated ones, so
    ``G_j`` is then independent of ``j``.
    """
    if a < window.lo or b > window.hi:
        raise WindowExhaustedError("Gram window outside the cocycle window")
    k = window.u if tag == "u" else window.dim - window.u
    n = b - a + 1
    R = [window.restricted(tag, j) for j in range(a, b)]
    tail = np.exp(-2 * eps) / (1 - np.exp(-2 * eps)) if tails else 0.0
    fw = np.empty((n, k, k))  # sum over m >= j
    fw[-1] = (1 + tail) * np.eye(k)
    c_f = np.exp(-2 * (lam + eps))
    for i in range(n - 2, -1, -1):
        fw[i] = np.eye(k) + c_f * R[i].T @ fw[i + 1] @ R[i]
    bw = np.empty((n, k, k))  # sum over m < j
    bw[0] = tail * np.eye(k)
    c_b = np.exp(2 * (lam - eps))
    for i in range(1, n):
        Ri = np.linalg.inv(R[i - 1])
        bw[i] = c_b * Ri.T @ (np.eye(k) + bw[i - 1]) @ Ri
    G = fw + bw
    return 0.5 * (G + np.swapaxes(G, 1, 2))


# ---------------------------------------------------------------------------
# non-uniform hyperbolicity constant


@dataclass
class NUHEstimate:
    L: float  # minimal constant for items 1-3 at the base point
    L_items: dict
    L_orbit: np.ndarray  # minimal constants at F^m(x, omega), m in [-M, M]
    L_tempered: np.ndarray
    offsets: np.ndarray
    item3_ok: bool
    item4_fraction_raw: float
    item4_fraction_tempered: float
    eps: float


def _minimal_L(window, j, N, lp, lm, eps, angles_by_index):
    items = {}
    for tag, lam in (("s", lm), ("u", lp)):
        worst = 1.0
        P = np.eye(window.u if tag == "u" else window.dim - window.u)
        for n in range(1, N + 1):
            P = window.restricted(tag, j + n - 1) @ P
            sv = np.linalg.svd(P, compute_uv=False)
            worst = max(worst, sv[0] / np.exp(n * lam + 0.5 * n * eps),
                        np.exp(n * lam - 0.5 * n * eps) / sv[-1])
        P = np.eye(P.shape[0])
        for n in range(1, N + 1):
            P = P @ np.linalg.inv(window.restricted(tag, j - n))
            sv = np.linalg.svd(P, compute_uv=False)
            worst = max(worst, sv[0] / np.exp(-n * lam + 0.5 * n * eps),
                        np.exp(-n * lam - 0.5 * n * eps) / sv[-1])
        items["item1" if tag == "s" else "item2"] = float(worst)
    ns = np.arange(-N, N + 1)
    ang = np.array([angles_by_index[j + n] for n in ns])
    items["item3"] = float(np.max(np.exp(-np.abs(ns) * eps) / ang))
    return max(items.values()), items


def nuh_estimate(model, omega: WalkWord, x, N: int = 50, M: int = 50, eps: float | None = None,
                 margin: int = 400, exponents=None) -> NUHEstimate:
    """Empirical non-uniform hyperbolicity constant ``L``.

    ``L(x, omega)`` is the smallest constant giving the growth bounds on
    ``E^u`` and ``E^s`` and the angle bound over ``|n| <= N``.  The tempered
    growth ``L(F^m y) <= L(y) e^{eps |m|}`` is checked on the orbit ``|m| <= M``
    both for this raw constant and for its tempered version
    ``L_t(y) = max_m L(F^m y) e^{-eps |m - .|}`` over a fixed orbit window,
    which satisfies the tempered growth bound exactly.
    """
    reach = N + M
    seg = orbit_segment(model, omega, x, -(reach + margin), reach + margin)
    win = CocycleWindow(seg)
    if exponents is None:
        exponents = win.exponent_estimates(margin // 2)
    lp, lm = exponents
    if eps is None:
        eps = default_epsilon(lp, lm)
    angles = {j: win.angle(j) for j in range(-reach, reach + 1)}
    offsets = np.arange(-M, M + 1)
    Ls, items0 = [], None
    for m in offsets:
        L, items = _minimal_L(win, int(m), N, lp, lm, eps, angles)
        Ls.append(L)
        if m == 0:
            items0 = items
    Ls = np.array(Ls)
    dist = np.abs(offsets[:, None] - offsets[None, :])
    Lt = np.max(Ls[None, :] * np.exp(-eps * dist), axis=1)
    base = M
    growth = np.exp(eps * np.abs(offsets))
    raw_frac = float(np.mean(Ls <= Ls[base] * growth * (1 + 1e-12)))
    temp_frac = float(np.mean(Lt <= Lt[base] * growth * (1 + 1e-12)))
    item3 = bool(all(angles[n] > np.exp(-eps * abs(n)) / Ls[base] for n in range(-N, N + 1)))
    return NUHEstimate(float(Ls[base]), items0, Ls, Lt, offsets, item3, raw_frac, temp_frac, eps)


# ---------------------------------------------------------------------------
# Holder continuity diagnostic


def pesin_block(model, omega: WalkWord, points, a: float, b: float, C: float,
                horizon: int = 60, settle: int = 300):
    """Membership in the block ``Delta_{a,b,C}`` for the forward word ``omega^+``.

    ``E_x`` is the most contracted direction of the forward cocycle (estimated by
    pulling a frame back from ``horizon + settle`` steps ahead); membership
    requires ``||Df^n v|| <= C e^{an}`` on ``E_x`` and
    ``||Df^n v|| >= C^{-1} e^{bn}`` on its orthogonal complement for
    ``1 <= n <= horizon``.  Returns ``(mask, frames)``.
    """
    mask, frames = [], []
    k = model.dim - model.unstable_dim
    for p in np.atleast_2d(points):
        seg = orbit_segment(model, omega, p, 0, horizon + settle)
        Q = _generic_frame(model.dim, 3)
        for j in range(horizon + settle - 1, -1, -1):
            Q, _ = _qr_pos(np.linalg.solve(seg.mat(j), Q))
        E = Q[:, :k]
        perp = Q[:, k:]
        ok = True
        A, B = E.copy(), perp.copy()
        for n in range(1, horizon + 1):
            A = seg.mat(n - 1) @ A
            B = seg.mat(n - 1) @ B
            if np.linalg.norm(A, 2) > C * np.exp(a * n) or \
                    np.linalg.svd(B, compute_uv=False).min() < np.exp(b * n) / C:
                ok = False
                break
        mask.append(ok)
        frames.append(E)
    return np.array(mask), frames


def growth_constants(model, omega: WalkWord, x, n: int = 200) -> tuple[float, float]:
    """``(C, c)`` with ``prod_{i<k} ||Df_i|| <= C e^{ck}`` along the orbit, ``k <= n``.

    Uses the operator norm of the tangent maps along the orbit as the ``C^{1,1}``
    norm proxy (exact for the flat torus, where ``Lip(Df) = 0``).
    """
    seg = orbit_segment(model, omega, x, 0, n)
    logs = np.log([np.linalg.norm(m, 2) for m in seg.mats])
    c = float(logs.mean())
    cum = np.cumsum(logs) - c * np.arange(1, n + 1)
    return float(max(1.0, np.exp(cum.max()))), c


@dataclass
class HolderResult:
    alpha_hat: float | None
    alpha_ci: tuple[float, float] | None
    L_hat: float | None
    alpha_predicted: float
    d_const: float
    n_pairs: int
    unconstrained: bool
    consistent: bool | None  # alpha_hat >= alpha_predicted within CI


def subspace_distance(model, x, Ex, y, Ey, rho0: float) -> float:
    """``d(E_x, E_y)``: 1 when ``d_X >= rho0/4``, else ``d_Gr(E_x, P(y,x) E_y)``.

    Parallel transport is the identity on the flat torus; on an embedded
    surface it is approximated by orthogonal projection onto ``T_x``.
    """
    if model.distance(x, y) >= rho0 / 4:
        return 1.0
    ax = model.embed(x, Ex)
    ay = model.embed(y, Ey)
    Tx = model.embed(x, np.eye(model.dim))
    moved = Tx.T @ ay
    return grassmann_distance(Tx.T @ ax, moved)


def holder_diagnostic(samples, a: float, b: float, C: float, model=None, rho0: float = 0.5,
                      growth: tuple[float, float] = (1.0, 1.0), min_pairs: int = 30,
                      tol: float = 1e-12, level: float = 0.95) -> HolderResult:
    """Regression estimate of the Holder exponent of ``x -> E_x`` on a block.

    ``samples`` are ``(x, E_x)`` pairs already known to lie in one block.
    The fit is ``log d(E_x, E_y) = log L + alpha log d_X(x, y)`` over pairs with
    ``d_X < rho0/4``; ``alpha`` is compared with ``(a-b)/(a-d)``,
    ``d = ln(2 C_g^2) + 2c + |ln(rho0/4)| + |a|`` for growth constants ``(C_g, c)``.
    """
    Cg, c = growth
    d_const = np.log(2 * Cg ** 2) + 2 * c + abs(np.log(rho0 / 4)) + abs(a)
    alpha_predicted = (a - b) / (a - d_const)
    dx, de = [], []
    for i in range(len(samples)):
        for j in range(i + 1, len(samples)):
            x, Ex = samples[i]
            y, Ey = samples[j]
            dist = model.distance(x, y)
            if 0 < dist < rho0 / 4:
                dx.append(dist)
                de.append(subspace_distance(model, x, Ex, y, Ey, rho0))
    if len(dx) < min_pairs:
        raise InsufficientDataError(f"only {len(dx)} in-block pairs (need {min_pairs})")
    dx, de = np.array(dx), np.array(de)
    if np.all(de <= tol):
        return HolderResult(None, None, None, float(alpha_predicted), float(d_const), len(dx), True, None)
    keep = de > tol
    if keep.sum() < 3:
        raise InsufficientDataError("too few pairs with nonzero subspace distance")
    fit = stats.linregress(np.log(dx[keep]), np.log(de[keep]))
    tq = stats.t.ppf(0.5 + level / 2, keep.sum() - 2)
    ci = (fit.slope - tq * fit.stderr, fit.slope + tq * fit.stderr)
    L_hat = float(np.max(de[keep] / dx[keep] ** fit.slope))
    return HolderResult(float(fit.slope), (float(ci[0]), float(ci[1])), L_hat, float(alpha_predicted),
                        float(d_const), len(dx), False, bool(ci[1] >= alpha_predicted))


def ensemble_seeds(seed: int, count: int) -> list[int]:
    """Per-worker seeds derived from a master seed."""
    return [worker_seed(seed, k) for k in range(count)]
