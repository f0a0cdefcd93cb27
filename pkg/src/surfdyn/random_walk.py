"""Bi-infinite random words, the shift, and the skew product over them.

A word is never stored in full.  Symbols are drawn from a counter-based
generator (numpy's Philox keyed by the seed), so the symbol at any index is a
pure function of ``(seed, index)`` and can be realized in O(1) blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import WindowExhaustedError

_BLOCK = 1024  # multiple of 4: Philox emits four 64-bit words per counter step
_MASK64 = (1 << 64) - 1

DEFAULT_TRUNCATION = 64


@dataclass(frozen=True)
class FiniteMeasure:
    """A finitely supported probability measure on named automorphisms."""

    atoms: tuple[str, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        atoms = tuple(str(a) for a in self.atoms)
        w = np.asarray(self.weights, dtype=float)
        if len(atoms) == 0:
            raise ValueError("measure needs at least one atom")
        if w.shape != (len(atoms),):
            raise ValueError("one weight per atom required")
        if np.any(w <= 0):
            raise ValueError("weights must be strictly positive")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", tuple(float(x) for x in w))

    @classmethod
    def uniform(cls, atoms: Sequence[str]) -> "FiniteMeasure":
        n = len(atoms)
        w = [1.0 / n] * n
        w[-1] = 1.0 - sum(w[:-1])
        return cls(tuple(atoms), tuple(w))

    @property
    def support_size(self) -> int:
        return len(self.atoms)

    def cdf(self) -> np.ndarray:
        c = np.cumsum(self.weights)
        c[-1] = 1.0
        return c

    def inverted(self, inverse_name) -> "FiniteMeasure":
        """The measure of inverses, ``f -> f^{-1}`` pushed forward."""
        return FiniteMeasure(tuple(inverse_name(a) for a in self.atoms), self.weights)


def _raw_block(seed: int, side: int, block: int) -> np.ndarray:
    bitgen = np.random.Philox(key=np.array([seed & _MASK64, side], dtype=np.uint64))
    bitgen.advance(block * _BLOCK // 4)
    return np.random.Generator(bitgen).random(_BLOCK)


@dataclass(frozen=True, eq=False)
class WalkWord:
    """A word ``omega`` in ``supp(mu)^Z`` realized lazily from a seed.

    ``offset`` implements the shift: ``word.shift(m)[n] == word[n + m]``.
    ``reflect`` implements the reversed word used for the inverse walk:
    index ``n`` reads raw index ``-(n + offset) - 1``.  ``overrides`` pins
    individual raw indices to fixed symbols (used to build nearby words).
    ``pattern`` replaces the random source by a periodic symbol pattern.
    """

    measure: FiniteMeasure
    seed: int = 0
    offset: int = 0
    reflect: bool = False
    overrides: Mapping[int, int] = field(default_factory=dict)
    pattern: tuple[int, ...] | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def periodic(cls, measure: FiniteMeasure, pattern: Sequence[int]) -> "WalkWord":
        pat = tuple(int(s) for s in pattern)
        if not pat or min(pat) < 0 or max(pat) >= measure.support_size:
            raise ValueError("pattern symbols must index the measure's atoms")
        return cls(measure, seed=0, pattern=pat)

    @property
    def support_size(self) -> int:
        return self.measure.support_size

    @property
    def weights(self) -> tuple[float, ...]:
        return self.measure.weights

    def _raw_index(self, n: np.ndarray) -> np.ndarray:
        i = np.asarray(n, dtype=np.int64) + self.offset
        return -i - 1 if self.reflect else i

    def _raw_symbols(self, raw: np.ndarray) -> np.ndarray:
        raw = np.asarray(raw, dtype=np.int64)
        if self.pattern is not None:
            out = np.asarray(self.pattern, dtype=np.int64)[raw % len(self.pattern)]
        else:
            side = (raw < 0).astype(np.int64)
            j = np.where(raw < 0, -raw - 1, raw)
            blocks = j // _BLOCK
            u = np.empty(raw.shape, dtype=float)
            cdf = self.measure.cdf()
            for s, b in set(zip(side.ravel().tolist(), blocks.ravel().tolist())):
                key = (s, b)
                if key not in self._cache:
                    self._cache[key] = _raw_block(self.seed, s, b)
                sel = (side == s) & (blocks == b)
                u[sel] = self._cache[key][j[sel] - b * _BLOCK]
            out = np.searchsorted(cdf, u, side="right")
            out = np.minimum(out, self.support_size - 1)
        if self.overrides:
            out = out.copy()
            for k, v in self.overrides.items():
                out[raw == k] = v
        return out

    def symbols(self, start: int, stop: int) -> np.ndarray:
        """Symbols at indices ``start <= n < stop``."""
        n = np.arange(start, stop, dtype=np.int64)
        return self._raw_symbols(self._raw_index(n))

    def symbol(self, n: int) -> int:
        return int(self.symbols(n, n + 1)[0])

    def __getitem__(self, n: int) -> int:
        return self.symbol(n)

    def atom(self, n: int) -> str:
        return self.measure.atoms[self.symbol(n)]

    def atoms(self, start: int, stop: int) -> list[str]:
        names = self.measure.atoms
        return [names[s] for s in self.symbols(start, stop)]

    def window(self, n_trunc: int = DEFAULT_TRUNCATION) -> np.ndarray:
        """Symbols over the truncation window ``[-n_trunc, n_trunc]``."""
        return self.symbols(-n_trunc, n_trunc + 1)

    def _replace(self, **kw) -> "WalkWord":
        fields = dict(measure=self.measure, seed=self.seed, offset=self.offset,
                      reflect=self.reflect, overrides=self.overrides, pattern=self.pattern)
        fields.update(kw)
        # blocks depend only on the seed, so the cache can be shared
        return WalkWord(**fields, _cache=self._cache)

    def shift(self, m: int) -> "WalkWord":
        """The shifted word ``sigma^m(omega)``."""
        if self.reflect:
            return self._replace(offset=self.offset - int(m))
        return self._replace(offset=self.offset + int(m))

    def with_symbol(self, n: int, symbol: int) -> "WalkWord":
        """Copy of the word with the symbol at index ``n`` replaced."""
        if not 0 <= symbol < self.support_size:
            raise ValueError("symbol out of range")
        raw = int(self._raw_index(np.array([n]))[0])
        ov = dict(self.overrides)
        ov[raw] = int(symbol)
        return self._replace(overrides=ov)

    def reversed(self, inverse_name) -> "WalkWord":
        """The reversed inverse word: index ``n`` holds ``omega_{-n-1}^{-1}``."""
        return WalkWord(self.measure.inverted(inverse_name), seed=self.seed,
                        offset=-self.offset, reflect=not self.reflect,
                        overrides=self.overrides, pattern=self.pattern,
                        _cache=self._cache)

    def same_symbols(self, other: "WalkWord", start: int, stop: int) -> bool:
        a = self.atoms(start, stop)
        b = other.atoms(start, stop)
        return a == b


def worker_seed(seed: int, worker_id: int) -> int:
    """Deterministic per-worker seed derived from ``(seed, worker_id)``."""
    ss = np.random.SeedSequence([seed & _MASK64, worker_id])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def compose(model, omega: WalkWord, n: int, x, max_window: int | None = None):
    """``f_omega^n(x)``; negative ``n`` walks the past with inverse maps."""
    n = int(n)
    if max_window is not None and abs(n) > max_window:
        raise WindowExhaustedError(f"|n|={abs(n)} exceeds realized window {max_window}")
    p = x
    if n > 0:
        for name in omega.atoms(0, n):
            p = model.apply(name, p)
    elif n < 0:
        for name in reversed(omega.atoms(n, 0)):
            p = model.apply(model.inverse(name), p)
    return p


def skew_step(model, x, omega: WalkWord, n: int = 1):
    """The skew product ``F^n(x, omega) = (f_omega^n(x), sigma^n(omega))``."""
    return compose(model, omega, n, x), omega.shift(n)


def omega_distance(omega: WalkWord, other: WalkWord, n_trunc: int = DEFAULT_TRUNCATION) -> float:
    """Product-topology distance ``sum_{|n|<=N} 2^{-|n|} [omega_n != omega'_n]``.

    Entries are compared by automorphism name, so words over different
    labelings of the same atoms are handled correctly.
    """
    a = omega.atoms(-n_trunc, n_trunc + 1)
    b = other.atoms(-n_trunc, n_trunc + 1)
    idx = np.arange(-n_trunc, n_trunc + 1)
    diff = np.array([u != v for u, v in zip(a, b)])
    return float(np.sum(np.ldexp(1.0, -np.abs(idx))[diff]))
