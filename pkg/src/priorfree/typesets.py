"""Empirical types, type classes and typical sets, enumerated exactly.

Sequences are 1-d integer arrays with symbols ``0..size-1``.  A joint type
stores integer counts over the product alphabet of its coordinates; its
probability table is ``counts / n``.  Everything is exhaustive, so every
enumeration is capped (``ENUM_CAP``) and raises :class:`CapExceeded` up front.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import _accel
from .info import Dist

ENUM_CAP = 1 << 20
# distances equal to the radius count as inside; this absorbs float noise only
TIE_EPS = 1e-12


class CapExceeded(ValueError):
    """An exhaustive enumeration would exceed the configured cap."""


def _check_cap(size: int, cap: int, what: str) -> None:
    if size > cap:
        raise CapExceeded(f"{what} has {size} elements, cap is {cap}")


@dataclass(frozen=True, eq=False)
class JointType:
    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if c.ndim == 0:
            raise ValueError("type needs at least one coordinate")
        if np.any(c < 0):
            raise ValueError("negative count")
        if c.sum() < 1:
            raise ValueError("type of an empty sequence")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def arities(self) -> tuple[int, ...]:
        return self.counts.shape

    @property
    def probs(self) -> np.ndarray:
        return self.counts / self.n

    @property
    def dist(self) -> Dist:
        return Dist(self.probs)

    @property
    def key(self) -> tuple[int, ...]:
        return tuple(self.counts.ravel().tolist())

    def marginal(self, coords: Sequence[int]) -> "JointType":
        coords = tuple(coords)
        drop = tuple(i for i in range(self.counts.ndim) if i not in coords)
        m = self.counts.sum(axis=drop)
        kept = sorted(coords)
        return JointType(np.transpose(m, [kept.index(c) for c in coords]))

    def __eq__(self, other):
        return isinstance(other, JointType) and self.arities == other.arities and self.key == other.key

    def __hash__(self):
        return hash((self.arities, self.key))

    def __repr__(self):
        return f"JointType(n={self.n}, counts={self.counts.tolist()})"


def _as_seq(s, size: int | None = None) -> np.ndarray:
    a = np.asarray(s, dtype=np.int64)
    if a.ndim != 1 or a.size == 0:
        raise ValueError("a sequence is a non-empty 1-d array of symbols")
    if np.any(a < 0) or (size is not None and np.any(a >= size)):
        raise ValueError(f"symbol outside alphabet of size {size}")
    return a


def empirical_type(*seqs, arities: Sequence[int] | None = None) -> JointType:
    """Joint type of equal-length sequences; arities default to max symbol + 1."""
    if not seqs:
        raise ValueError("need at least one sequence")
    if arities is None:
        arities = [int(np.max(s)) + 1 for s in seqs]
    if len(arities) != len(seqs):
        raise ValueError("one arity per sequence")
    arr = [_as_seq(s, a) for s, a in zip(seqs, arities)]
    n = arr[0].size
    if any(a.size != n for a in arr):
        raise ValueError("sequences have different lengths")
    flat = np.ravel_multi_index(tuple(arr), tuple(arities))
    counts = np.bincount(flat, minlength=math.prod(arities)).reshape(tuple(arities))
    return JointType(counts)


def joint_empirical_type(*seqs, arities: Sequence[int] | None = None) -> JointType:
    return empirical_type(*seqs, arities=arities)


def type_count(n: int, cells: int) -> int:
    return math.comb(n + cells - 1, cells - 1)


@lru_cache(maxsize=256)
def compositions(n: int, k: int) -> np.ndarray:
    """All k-part compositions of n, first part descending: (n,0,..), ..., (0,..,n)."""
    if k == 1:
        return np.array([[n]], dtype=np.int64)
    rows = []
    for first in range(n, -1, -1):
        rest = compositions(n - first, k - 1)
        rows.append(np.column_stack([np.full(len(rest), first, dtype=np.int64), rest]))
    out = np.concatenate(rows)
    out.setflags(write=False)
    return out


def enumerate_types(n: int, arities: Sequence[int], cap: int = ENUM_CAP) -> list[JointType]:
    arities = tuple(int(a) for a in arities)
    cells = math.prod(arities)
    _check_cap(type_count(n, cells), cap, f"type set (n={n}, cells={cells})")
    return [JointType(row.reshape(arities)) for row in compositions(n, cells)]


def type_class_size(t: JointType) -> int:
    out = math.factorial(t.n)
    for c in t.counts.ravel():
        out //= math.factorial(int(c))
    return out


def enumerate_type_class(t: JointType, cap: int = ENUM_CAP) -> np.ndarray:
    """Every sequence (tuple) of type ``t``.

    Shape ``(size, n)`` for a one-coordinate type and ``(size, d, n)`` for a
    d-coordinate joint type.  Rows are in lexicographic order of the
    flattened cell index.
    """
    _check_cap(type_class_size(t), cap, "type class")
    cells = _accel.multiset_permutations(t.counts.ravel())
    if len(t.arities) == 1:
        return cells
    coords = np.unravel_index(cells, t.arities)
    return np.stack(coords, axis=1)


# -- universes of all sequences ---------------------------------------------

@lru_cache(maxsize=64)
def universe(size: int, n: int) -> np.ndarray:
    """All size**n sequences as rows; row index equals the base-``size`` code."""
    _check_cap(size ** n, ENUM_CAP, f"universe {size}^{n}")
    rows = _accel.decode(np.arange(size ** n, dtype=np.int64), size, n)
    rows.setflags(write=False)
    return rows


@lru_cache(maxsize=64)
def universe_type_classes(size: int, n: int) -> dict[tuple[int, ...], np.ndarray]:
    """Codes of the size**n universe grouped by marginal type, codes ascending."""
    rows = universe(size, n)
    counts = _accel.pair_counts(rows, np.zeros(n, dtype=np.int64), 1, size)
    keys, inverse = np.unique(counts, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).ravel()
    order = np.argsort(inverse, kind="stable")
    bounds = np.searchsorted(inverse[order], np.arange(len(keys) + 1))
    out = {}
    for i, k in enumerate(keys):
        codes = order[bounds[i]:bounds[i + 1]].astype(np.int64)
        codes.setflags(write=False)
        out[tuple(int(v) for v in k)] = codes
    return out


def encode(seq, size: int) -> int:
    return int(_accel.encode(np.asarray(seq), size)[0])


# -- typical sets -----------------------------------------------------------

def _center_table(center) -> np.ndarray:
    if isinstance(center, JointType):
        return center.probs
    if isinstance(center, Dist):
        return center.probs
    return np.asarray(center, dtype=float)


@dataclass(frozen=True, eq=False)
class TypicalSpec:
    """Center distribution plus l1 radius: the set of (x, y) within delta of center."""

    center: np.ndarray
    delta: float

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be non-negative")
        c = np.array(_center_table(self.center), dtype=float)
        c.setflags(write=False)
        object.__setattr__(self, "center", c)


def l1_distance(t: JointType, center) -> float:
    c = _center_table(center)
    if c.shape != t.arities:
        raise ValueError(f"arity mismatch: type {t.arities} vs center {c.shape}")
    return float(np.abs(t.probs - c).sum())


def typical_member(seqs: Sequence, spec: TypicalSpec) -> bool:
    """Is ||t_seqs - center||_1 <= delta?"""
    arities = spec.center.shape
    if len(seqs) != len(arities):
        raise ValueError(f"{len(seqs)} sequences for a {len(arities)}-coordinate center")
    t = empirical_type(*seqs, arities=arities)
    return l1_distance(t, spec.center) <= spec.delta + TIE_EPS


def typical_mask_given(y, x_size: int, center, delta: float) -> np.ndarray:
    """Boolean mask over the x_size**n universe: is (x, y) within delta of center?

    ``center`` has shape (x_size, y_size).
    """
    c = _center_table(center)
    y = _as_seq(y, c.shape[1])
    n = y.size
    counts = _accel.pair_counts(universe(x_size, n), y, c.shape[1], x_size)
    return _accel.l1_rows(counts, n, c.ravel()) <= delta + TIE_EPS


def marginal_class_via_exists(t: JointType, cap: int = ENUM_CAP) -> np.ndarray:
    """{x : exists y with (x, y) of type t}, by enumerating every pair of type t."""
    pairs = enumerate_type_class(t, cap)
    xs = np.unique(pairs[:, 0, :], axis=0)
    return xs


def conditional_type_class(t: JointType, y) -> np.ndarray:
    """Rows x with joint type (x, y) == t; ``t`` is over (X, Y)."""
    if len(t.arities) != 2:
        raise ValueError("conditional type class needs a two-coordinate type")
    x_size, y_size = t.arities
    y = _as_seq(y, y_size)
    if y.size != t.n:
        raise ValueError("length of y differs from the type's denominator")
    y_counts = np.bincount(y, minlength=y_size)
    if not np.array_equal(y_counts, t.counts.sum(axis=0)):
        raise ValueError("y is not of the type's Y-marginal")
    size = 1
    for b in range(y_size):
        size *= type_class_size(JointType(t.counts[:, b])) if y_counts[b] else 1
    _check_cap(size, ENUM_CAP, "conditional type class")
    blocks = []
    positions = []
    for b in range(y_size):
        if y_counts[b] == 0:
            continue
        positions.append(np.flatnonzero(y == b))
        blocks.append(_accel.multiset_permutations(t.counts[:, b]))
    out = np.empty((size, t.n), dtype=np.int64)
    for r, combo in enumerate(itertools.product(*[range(len(bl)) for bl in blocks])):
        for pos, bl, i in zip(positions, blocks, combo):
            out[r, pos] = bl[i]
    return _sorted_rows(out, x_size)


def _sorted_rows(rows: np.ndarray, size: int) -> np.ndarray:
    if len(rows) == 0:
        return rows
    return rows[np.argsort(_accel.encode(rows, size), kind="stable")]


def cond_typical_set(spec: TypicalSpec, y, cap: int = ENUM_CAP) -> np.ndarray:
    """Union of conditional type classes T^{X|y}_t over types t within delta of center.

    Only joint types whose Y-marginal equals the type of ``y`` contribute.
    Rows sorted by code.
    """
    c = spec.center
    x_size, y_size = c.shape
    y = _as_seq(y, y_size)
    n = y.size
    _check_cap(x_size ** n, cap, "conditional typical set universe")
    y_counts = np.bincount(y, minlength=y_size)
    columns = [compositions(int(y_counts[b]), x_size) for b in range(y_size)]
    pieces = []
    for combo in itertools.product(*[range(len(col)) for col in columns]):
        counts = np.column_stack([columns[b][i] for b, i in enumerate(combo)])
        t = JointType(counts)
        if l1_distance(t, c) <= spec.delta + TIE_EPS:
            pieces.append(conditional_type_class(t, y))
    if not pieces:
        return np.zeros((0, n), dtype=np.int64)
    return _sorted_rows(np.concatenate(pieces), x_size)


# -- channel typical sets ---------------------------------------------------

@dataclass(frozen=True, eq=False)
class ChannelTypicalSpec:
    """Jointly typical set for (m, a, b, c) around channel p(m | a, c) applied to a center.

    ``center`` is a distribution over (a, b, c): ``a`` is the sender's private
    input, ``b`` the receiver's private input and ``c`` a prefix both parties
    hold (arity 1 when absent).  ``channel`` has shape (A, C, M).
    A tuple is typical when its (a, b, c)-type lies within ``delta`` of the
    center and its full type lies within ``delta_prime`` of channel x (a, b, c)-type.
    """

    center: np.ndarray
    channel: np.ndarray
    delta: float
    delta_prime: float
    _key: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if self.delta < 0 or self.delta_prime < 0:
            raise ValueError("typicality radii must be non-negative")
        c = np.array(_center_table(self.center), dtype=float)
        p = np.array(self.channel, dtype=float)
        if c.ndim == 2:
            c = c[:, :, None]
        if p.ndim == 2:
            p = p[:, None, :]
        if c.ndim != 3 or p.ndim != 3:
            raise ValueError("center must be (A, B[, C]) and channel (A[, C], M)")
        if p.shape[:2] != (c.shape[0], c.shape[2]):
            raise ValueError(f"channel inputs {p.shape[:2]} do not match center {c.shape}")
        if not np.allclose(p.sum(axis=2), 1.0, atol=1e-12):
            raise ValueError("channel rows must sum to one")
        c.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "channel", p)
        object.__setattr__(self, "_key", (c.shape, p.shape, c.tobytes(), p.tobytes(),
                                          float(self.delta), float(self.delta_prime)))

    @classmethod
    def simple(cls, center, channel, delta: float, delta_prime: float) -> "ChannelTypicalSpec":
        """Two-input form: center over (X, Y), channel p(m|x) of shape (X, M)."""
        return cls(center, channel, delta, delta_prime)

    @property
    def sizes(self) -> tuple[int, int, int, int]:
        a, b, c = self.center.shape
        return self.channel.shape[2], a, b, c

    def joint_center(self) -> np.ndarray:
        """p . center as a table over (m, a, b, c)."""
        return np.einsum("acm,abc->mabc", self.channel, self.center)

    def __hash__(self):
        return hash(self._key)

    def __eq__(self, other):
        return isinstance(other, ChannelTypicalSpec) and self._key == other._key


@lru_cache(maxsize=4096)
def split_options(counts: tuple[int, ...], parts: int) -> np.ndarray:
    """Every way to split each count across ``parts`` cells: shape (P, len(counts), parts)."""
    per = [compositions(c, parts) for c in counts]
    idx = np.array(list(itertools.product(*[range(len(p)) for p in per])), dtype=np.int64)
    out = np.stack([per[i][idx[:, i]] for i in range(len(counts))], axis=1)
    out.setflags(write=False)
    return out


def _pareto(points: np.ndarray) -> np.ndarray:
    """Rows of (d1, d2) not dominated by another row."""
    if len(points) <= 1:
        return points
    order = np.lexsort((points[:, 1], points[:, 0]))
    pts = points[order]
    best = np.minimum.accumulate(pts[:, 1])
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = pts[1:, 1] < best[:-1]
    return pts[keep]


def _group_front(spec: ChannelTypicalSpec, side: str, group_counts: np.ndarray,
                 k: int, c: int, n: int) -> np.ndarray:
    m_size, a_size, b_size, _ = spec.sizes
    unknown = b_size if side == "sender" else a_size
    opts = split_options(tuple(int(v) for v in group_counts), unknown)  # (P, M, U)
    tau = opts / n
    tau_z = tau.sum(axis=1)  # (P, U)
    if side == "sender":
        center = spec.center[k, :, c]  # over b
        p = np.broadcast_to(spec.channel[k, c, :][:, None], (m_size, unknown))
    else:
        center = spec.center[:, k, c]  # over a
        p = spec.channel[:, c, :].T  # (M, A)
    d1 = np.abs(tau_z - center[None, :]).sum(axis=1)
    d2 = np.abs(tau - p[None, :, :] * tau_z[:, None, :]).sum(axis=(1, 2))
    return _pareto(np.column_stack([d1, d2]))


@lru_cache(maxsize=200_000)
def _split_feasible(spec: ChannelTypicalSpec, side: str, counts_key: tuple[int, ...]) -> bool:
    m_size, a_size, b_size, c_size = spec.sizes
    known = b_size if side == "receiver" else a_size
    counts = np.array(counts_key, dtype=np.int64).reshape(m_size, known, c_size)
    n = int(counts.sum())
    lim1, lim2 = spec.delta + TIE_EPS, spec.delta_prime + TIE_EPS
    front = np.zeros((1, 2))
    for k in range(known):
        for c in range(c_size):
            g = _group_front(spec, side, counts[:, k, c], k, c, n)
            combo = (front[:, None, :] + g[None, :, :]).reshape(-1, 2)
            combo = combo[(combo[:, 0] <= lim1) & (combo[:, 1] <= lim2)]
            if len(combo) == 0:
                return False
            front = _pareto(combo)
    return True


def _view_counts(m, own, c, sizes) -> tuple[int, ...]:
    m_size, own_size, c_size = sizes
    view = np.asarray(own, dtype=np.int64) * c_size + np.asarray(c, dtype=np.int64)
    counts = _accel.pair_counts(np.asarray(m, dtype=np.int64)[None, :], view, own_size * c_size, m_size)
    return tuple(counts[0].tolist())


def _prefix(c, n):
    return np.zeros(n, dtype=np.int64) if c is None else _as_seq(c)


def channel_typical_member_sender(m, x, spec: ChannelTypicalSpec, c=None) -> bool:
    """Is m in T^{M|x \\ Y}: does some y make (m, x, y) jointly typical?"""
    m_size, a_size, _, c_size = spec.sizes
    m, x = _as_seq(m, m_size), _as_seq(x, a_size)
    if m.size != x.size:
        raise ValueError("length mismatch")
    key = _view_counts(m, x, _prefix(c, m.size), (m_size, a_size, c_size))
    return _split_feasible(spec, "sender", key)


def channel_typical_member_receiver(m, y, spec: ChannelTypicalSpec, c=None) -> bool:
    """Is m in T^{M|y \\ X}: does some x make (m, x, y) jointly typical?"""
    m_size, _, b_size, c_size = spec.sizes
    m, y = _as_seq(m, m_size), _as_seq(y, b_size)
    if m.size != y.size:
        raise ValueError("length mismatch")
    key = _view_counts(m, y, _prefix(c, m.size), (m_size, b_size, c_size))
    return _split_feasible(spec, "receiver", key)


def channel_typical_mask(rows: np.ndarray, own, spec: ChannelTypicalSpec, side: str,
                         c=None) -> np.ndarray:
    """Vectorised membership of many candidate messages ``rows`` given one view."""
    m_size, a_size, b_size, c_size = spec.sizes
    own_size = a_size if side == "sender" else b_size
    own = _as_seq(own, own_size)
    view = own * c_size + _prefix(c, own.size)
    counts = _accel.pair_counts(rows, view, own_size * c_size, m_size)
    keys, inverse = np.unique(counts, axis=0, return_inverse=True)
    verdict = np.array([_split_feasible(spec, side, tuple(k.tolist())) for k in keys], dtype=bool)
    return verdict[np.asarray(inverse).ravel()]


def channel_typical_set(own, spec: ChannelTypicalSpec, side: str, c=None) -> np.ndarray:
    """All members of the sender- or receiver-side set, as rows sorted by code."""
    m_size = spec.sizes[0]
    own = _as_seq(own)
    rows = universe(m_size, own.size)
    return rows[channel_typical_mask(rows, own, spec, side, c)]


def joint_channel_member(m, x, y, spec: ChannelTypicalSpec, c=None) -> bool:
    """Direct membership of one (m, x, y[, c]) tuple in the jointly typical set."""
    m_size, a_size, b_size, c_size = spec.sizes
    n = len(m)
    cc = _prefix(c, n)
    t = empirical_type(m, x, y, cc, arities=(m_size, a_size, b_size, c_size))
    tz = t.counts.sum(axis=0) / n
    if np.abs(tz - spec.center).sum() > spec.delta + TIE_EPS:
        return False
    pt = np.einsum("acm,abc->mabc", spec.channel, tz)
    return float(np.abs(t.probs - pt).sum()) <= spec.delta_prime + TIE_EPS


def merge_set_check(spec: ChannelTypicalSpec, n: int, cap: int = ENUM_CAP) -> bool:
    """Exhaustively check T_{(center,delta),(p,delta')} is inside T_{(p.center, delta+delta')}.

    Works on the two-input form (prefix arity 1).
    """
    m_size, a_size, b_size, c_size = spec.sizes
    if c_size != 1:
        raise ValueError("merge_set_check expects a spec without a shared prefix")
    total = (m_size * a_size * b_size) ** n
    _check_cap(total, cap, "triple universe")
    big = m_size * a_size * b_size
    cells = universe(big, n)  # each symbol encodes (m, a, b)
    counts = _accel.pair_counts(cells, np.zeros(n, dtype=np.int64), 1, big)
    taus = counts.reshape(-1, m_size, a_size, b_size) / n
    tz = taus.sum(axis=1)
    center = spec.center[:, :, 0]
    p = spec.channel[:, 0, :]
    in_z = np.abs(tz - center[None]).sum(axis=(1, 2)) <= spec.delta + TIE_EPS
    d2 = np.abs(taus - np.einsum("am,kab->kmab", p, tz)).sum(axis=(1, 2, 3))
    member = in_z & (d2 <= spec.delta_prime + TIE_EPS)
    merged_center = np.einsum("am,ab->mab", p, center)
    d_merge = np.abs(taus - merged_center[None]).sum(axis=(1, 2, 3))
    inside = d_merge <= spec.delta + spec.delta_prime + TIE_EPS
    return bool(np.all(inside[member]))


def unit_prob_exact(x, y, spec: ChannelTypicalSpec) -> float:
    """p^n(T^{M|x,y}_{center,(p,delta')}) by exact summation over M^n.

    The center is the exact joint type of (x, y), so only the delta' condition binds.
    """
    m_size, a_size, b_size, _ = spec.sizes
    x, y = _as_seq(x, a_size), _as_seq(y, b_size)
    n = x.size
    rows = universe(m_size, n)
    p = spec.channel[:, 0, :]
    logp = np.log(p[x[None, :], rows], where=p[x[None, :], rows] > 0,
                  out=np.full(rows.shape, -np.inf))
    probs = np.exp(logp.sum(axis=1))
    view = x * b_size + y
    counts = _accel.pair_counts(rows, view, a_size * b_size, m_size)
    tz = empirical_type(x, y, arities=(a_size, b_size)).probs
    pt = (p.T[:, :, None] * tz[None]).ravel()
    member = _accel.l1_rows(counts, n, pt) <= spec.delta_prime + TIE_EPS
    return float(probs[member].sum())
