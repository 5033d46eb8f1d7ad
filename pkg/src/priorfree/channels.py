"""Discrete memoryless channels and the reference interactive executor.

A channel table has shape ``(*input_arities, output_arity)``; the last axis
holds the conditional distribution.  In an interactive spec, channel i (1-based)
is owned by Alice when i is odd and by Bob when i is even, and takes the
owner's input symbol followed by every earlier message symbol.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .info import Dist, conditional_mutual_information
from .randomness import sample_categorical
from .typesets import ENUM_CAP, CapExceeded, enumerate_types

ROW_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class Channel:
    table: np.ndarray

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        if t.ndim < 2:
            raise ValueError("channel table needs input and output axes")
        if np.any(t < 0) or not np.allclose(t.sum(axis=-1), 1.0, atol=ROW_ATOL, rtol=0):
            raise ValueError("every conditional row must be a distribution")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @property
    def input_arities(self) -> tuple[int, ...]:
        return self.table.shape[:-1]

    @property
    def output_arity(self) -> int:
        return self.table.shape[-1]

    @classmethod
    def identity(cls, size: int) -> "Channel":
        return cls(np.eye(size))

    @classmethod
    def bsc(cls, flip: float) -> "Channel":
        return cls(np.array([[1 - flip, flip], [flip, 1 - flip]]))

    @classmethod
    def constant(cls, input_arities: Sequence[int], output_arity: int, symbol: int = 0) -> "Channel":
        t = np.zeros((*input_arities, output_arity))
        t[..., symbol] = 1.0
        return cls(t)

    def extend_inputs(self, *extra: int) -> "Channel":
        """Same law, ignoring additional trailing inputs of the given arities."""
        t = self.table
        for a in extra:
            t = np.repeat(t[..., None, :], a, axis=-2)
        return Channel(t)

    def rows(self, *inputs) -> np.ndarray:
        """Conditional rows for per-position input symbols, shape (n, output_arity)."""
        if len(inputs) != len(self.input_arities):
            raise ValueError(f"channel takes {len(self.input_arities)} inputs, got {len(inputs)}")
        arrs = [np.asarray(i, dtype=np.int64) for i in inputs]
        for a, size in zip(arrs, self.input_arities):
            if np.any(a < 0) or np.any(a >= size):
                raise ValueError("input symbol outside channel arity")
        return self.table[tuple(arrs)]

    def flat(self) -> np.ndarray:
        """Table as (own input, combined earlier-message index, output)."""
        own = self.input_arities[0]
        rest = math.prod(self.input_arities[1:])
        return self.table.reshape(own, rest, self.output_arity)


def sample_channel(ch: Channel, inputs, rng) -> np.ndarray:
    """Apply ``ch`` symbol-wise; ``inputs`` is a tuple of equal-length sequences."""
    return sample_categorical(ch.rows(*inputs), rng)


def _product_outcomes(rows: np.ndarray) -> np.ndarray:
    """Joint law of independent positions with per-position laws ``rows`` (n, k)."""
    out = np.ones(1)
    for r in rows:
        out = np.multiply.outer(out, r).ravel()
    return out


def exact_output_distribution(ch: Channel, *inputs) -> np.ndarray:
    """p^n(m | inputs) over the output universe, indexed by MSB-first code."""
    rows = ch.rows(*inputs)
    n = rows.shape[0]
    if ch.output_arity ** n > ENUM_CAP:
        raise CapExceeded(f"output universe {ch.output_arity}^{n} exceeds cap")
    return _product_outcomes(rows)


@dataclass(frozen=True, eq=False)
class InteractiveSpec:
    x_size: int
    y_size: int
    channels: tuple[Channel, ...]

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        if not self.channels:
            raise ValueError("need at least one round")
        sizes: list[int] = []
        for i, ch in enumerate(self.channels, start=1):
            own = self.x_size if i % 2 else self.y_size
            want = (own, *sizes)
            if ch.input_arities != want:
                raise ValueError(f"channel {i} inputs {ch.input_arities}, expected {want}")
            sizes.append(ch.output_arity)

    @property
    def j(self) -> int:
        return len(self.channels)

    @property
    def message_sizes(self) -> tuple[int, ...]:
        return tuple(ch.output_arity for ch in self.channels)

    @staticmethod
    def owner(i: int) -> str:
        return "A" if i % 2 else "B"

    @classmethod
    def one_way(cls, ch: Channel, y_size: int) -> "InteractiveSpec":
        return cls(ch.input_arities[0], y_size, (ch,))


def run_reference_interactive(spec: InteractiveSpec, x, y, rng) -> list[np.ndarray]:
    """Run every round symbol-wise; both parties see each message (feedback)."""
    x, y = np.asarray(x, dtype=np.int64), np.asarray(y, dtype=np.int64)
    if x.shape != y.shape:
        raise ValueError("inputs differ in length")
    msgs: list[np.ndarray] = []
    for i, ch in enumerate(spec.channels, start=1):
        own = x if i % 2 else y
        msgs.append(sample_channel(ch, (own, *msgs), rng))
    return msgs


def position_law(spec: InteractiveSpec, xs: int, ys: int) -> np.ndarray:
    """Joint law of (m_1..m_j) for one position with inputs (xs, ys)."""
    law = np.ones(())
    for i, ch in enumerate(spec.channels, start=1):
        own = xs if i % 2 else ys
        cond = ch.table[own]  # (*M_<i, M_i)
        law = law[..., None] * cond
    return law


def transcript_code(msgs: Sequence[np.ndarray], sizes: Sequence[int]) -> int:
    """Round-major code of a full transcript: m_1 most significant."""
    code = 0
    for m, k in zip(msgs, sizes):
        for s in np.asarray(m):
            code = code * k + int(s)
    return code


def exact_transcript_distribution(spec: InteractiveSpec, x, y) -> np.ndarray:
    """p^n(m_<=j | x, y) as a dense vector indexed by :func:`transcript_code`."""
    x, y = np.asarray(x, dtype=np.int64), np.asarray(y, dtype=np.int64)
    n, j = len(x), spec.j
    sizes = spec.message_sizes
    if math.prod(sizes) ** n > ENUM_CAP:
        raise CapExceeded("transcript universe exceeds cap")
    t = np.ones(())
    for xs, ys in zip(x, y):
        t = np.multiply.outer(t, position_law(spec, int(xs), int(ys)))
    # axes are (pos0 round1..j, pos1 round1..j, ...); reorder to round-major
    order = [p * j + r for r in range(j) for p in range(n)]
    return np.transpose(t, order).ravel()


def joint_with_messages(t: Dist | np.ndarray, spec: InteractiveSpec) -> Dist:
    """Single-letter joint of (X, Y, M_1, ..., M_j) under input law t."""
    base = t.probs if isinstance(t, Dist) else np.asarray(t, dtype=float)
    if base.shape != (spec.x_size, spec.y_size):
        raise ValueError(f"input law shape {base.shape} does not match spec")
    joint = base
    for i, ch in enumerate(spec.channels, start=1):
        tab = ch.table
        if i % 2 == 0:
            cond = tab[None]  # add X axis: (1, Y, M_<i, M_i)
        else:
            cond = tab[:, None]  # (X, 1, M_<i, M_i)
        joint = joint[..., None] * cond
    return Dist(joint)


def information_complexity(t: Dist | np.ndarray, spec: InteractiveSpec) -> float:
    """I(M_<=j; X | Y) + I(M_<=j; Y | X) for the single-letter law t . p."""
    d = joint_with_messages(t, spec)
    ms = tuple(range(2, 2 + spec.j))
    return (conditional_mutual_information(d, ms, (0,), (1,))
            + conditional_mutual_information(d, ms, (1,), (0,)))


def prior_free_ic_over_types(spec: InteractiveSpec, n: int) -> tuple[float, np.ndarray]:
    """Maximum information complexity over joint types of denominator n, with a maximiser."""
    best, arg = -math.inf, None
    for t in enumerate_types(n, (spec.x_size, spec.y_size)):
        v = information_complexity(t.probs, spec)
        if v > best:
            best, arg = v, t.probs
    return best, arg
