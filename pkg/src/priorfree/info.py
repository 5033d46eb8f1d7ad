"""Finite-alphabet information measures in bits.

Distributions are dense tables over a product alphabet; coordinates are
addressed by index.  Marginals are computed by summation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

PROB_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class Dist:
    """Joint distribution over ``alphabet_sizes[0] x alphabet_sizes[1] x ...``."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim == 0:
            raise ValueError("distribution needs at least one coordinate")
        if np.any(p < 0):
            raise ValueError("negative probability")
        total = p.sum()
        if abs(total - 1.0) > PROB_ATOL * max(1, p.size):
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_counts(cls, counts, total: int | None = None) -> "Dist":
        c = np.asarray(counts, dtype=float)
        return cls(c / (c.sum() if total is None else total))

    @classmethod
    def uniform(cls, *sizes: int) -> "Dist":
        return cls(np.full(sizes, 1.0 / math.prod(sizes)))

    @property
    def alphabet_sizes(self) -> tuple[int, ...]:
        return self.probs.shape

    @property
    def ndim(self) -> int:
        return self.probs.ndim

    def marginal(self, coords: Sequence[int]) -> np.ndarray:
        """Marginal table over ``coords`` with axes in the order given."""
        coords = _check_coords(self, coords)
        drop = tuple(i for i in range(self.ndim) if i not in coords)
        m = self.probs.sum(axis=drop)
        kept = sorted(coords)
        return np.transpose(m, [kept.index(c) for c in coords])

    def __repr__(self):
        return f"Dist(sizes={self.alphabet_sizes})"


def _check_coords(d: Dist, coords: Iterable[int]) -> tuple[int, ...]:
    coords = tuple(int(c) for c in coords)
    if not coords:
        raise ValueError("empty coordinate subset")
    if len(set(coords)) != len(coords):
        raise ValueError(f"repeated coordinate in {coords}")
    for c in coords:
        if not 0 <= c < d.ndim:
            raise ValueError(f"coordinate {c} out of range for {d.ndim}-d distribution")
    return coords


def _disjoint(*groups: tuple[int, ...]) -> None:
    seen: set[int] = set()
    for g in groups:
        if seen & set(g):
            raise ValueError(f"coordinate subsets overlap: {groups}")
        seen |= set(g)


def entropy_of(p: np.ndarray) -> float:
    """-sum p log2 p with 0 log 0 = 0."""
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def binary_entropy(delta: float) -> float:
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"binary entropy undefined at {delta}")
    if delta in (0.0, 1.0):
        return 0.0
    return float(-delta * math.log2(delta) - (1 - delta) * math.log2(1 - delta))


def shannon_entropy(d: Dist, coords: Sequence[int] | None = None) -> float:
    if coords is None:
        coords = range(d.ndim)
    return entropy_of(d.marginal(coords))


def conditional_entropy(d: Dist, target: Sequence[int], given: Sequence[int] = ()) -> float:
    """H(target | given) = H(target, given) - H(given)."""
    target = _check_coords(d, target)
    given = tuple(given)
    if not given:
        return shannon_entropy(d, target)
    given = _check_coords(d, given)
    _disjoint(target, given)
    return shannon_entropy(d, target + given) - shannon_entropy(d, given)


def mutual_information(d: Dist, a: Sequence[int], b: Sequence[int]) -> float:
    a, b = _check_coords(d, a), _check_coords(d, b)
    _disjoint(a, b)
    return shannon_entropy(d, a) - conditional_entropy(d, a, b)


def conditional_mutual_information(d: Dist, a: Sequence[int], b: Sequence[int],
                                   c: Sequence[int] = ()) -> float:
    """I(a; b | c) = H(a|c) - H(a|b,c)."""
    a, b = _check_coords(d, a), _check_coords(d, b)
    c = tuple(c)
    if c:
        c = _check_coords(d, c)
    _disjoint(a, b, c)
    return conditional_entropy(d, a, c) - conditional_entropy(d, a, b + c)


def _same_alphabet(p: Dist, q: Dist) -> None:
    if p.alphabet_sizes != q.alphabet_sizes:
        raise ValueError(f"alphabet mismatch: {p.alphabet_sizes} vs {q.alphabet_sizes}")


def kl_divergence(p: Dist, q: Dist) -> float:
    """D(p||q) in bits; +inf when supp(p) is not inside supp(q)."""
    _same_alphabet(p, q)
    pp, qq = p.probs.ravel(), q.probs.ravel()
    on = pp > 0
    if np.any(qq[on] == 0):
        return math.inf
    return float((pp[on] * (np.log2(pp[on]) - np.log2(qq[on]))).sum())


def total_variation(p: Dist, q: Dist) -> float:
    _same_alphabet(p, q)
    return float(0.5 * np.abs(p.probs - q.probs).sum())


def gamma_bound(d: int, delta: float) -> float:
    """Continuity slack delta*log2(d) + h2(delta)."""
    if d < 1:
        raise ValueError(f"alphabet size must be positive, got {d}")
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"gamma needs delta in [0, 1], got {delta}")
    return delta * math.log2(d) + binary_entropy(delta)


def fannes_bound(p: Dist, delta: float) -> float:
    """Joint-entropy continuity slack gamma(|alphabet| - 1, delta)."""
    return gamma_bound(max(p.probs.size - 1, 1), delta)


def alicki_fannes_bound(d: Dist, target: Sequence[int], delta: float) -> float:
    """Conditional-entropy continuity slack gamma(|target alphabet|, delta)."""
    size = math.prod(d.alphabet_sizes[c] for c in _check_coords(d, target))
    return gamma_bound(size, delta)


def product(*factors: np.ndarray) -> Dist:
    """Independent product of marginal tables."""
    out = np.asarray(factors[0], dtype=float)
    for f in factors[1:]:
        out = np.multiply.outer(out, np.asarray(f, dtype=float))
    return Dist(out)
