"""Metered random tapes, shuffled codebooks, prefix filtering and Newman strings.

Every random bit a protocol consumes comes from a :class:`Tape`, which counts
exactly how many bits were handed out.  Bits are taken most significant first
from the raw 64-bit output of a PCG64 stream.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _accel

CATEGORIES = ("shared_structural", "shared_rate", "private_A", "private_B")
_WORDS_PER_REFILL = 64


def child_seed(master: int, *path: int) -> np.random.SeedSequence:
    """Deterministic seed for (master, path...), independent of scheduling."""
    return np.random.SeedSequence(int(master), spawn_key=tuple(int(p) for p in path))


class Tape:
    """A metered stream of uniform bits."""

    def __init__(self, seed, category: str, metered: bool = True):
        if category not in CATEGORIES:
            raise ValueError(f"unknown tape category {category!r}")
        if not isinstance(seed, np.random.SeedSequence):
            seed = np.random.SeedSequence(seed)
        self.category = category
        self.metered = metered
        self._bitgen = np.random.PCG64(seed)
        self._buf = np.zeros(0, dtype=np.uint8)
        self._pos = 0
        self.bits_drawn = 0

    def _take(self, k: int) -> np.ndarray:
        short = k - (len(self._buf) - self._pos)
        if short > 0:
            words = max(_WORDS_PER_REFILL, -(-short // 64))
            raw = self._bitgen.random_raw(words).astype(">u8").view(np.uint8)
            self._buf = np.concatenate([self._buf[self._pos:], np.unpackbits(raw)])
            self._pos = 0
        out = self._buf[self._pos:self._pos + k]
        self._pos += k
        if self.metered:
            self.bits_drawn += k
        return out

    def draw_bit_array(self, k: int) -> np.ndarray:
        if k < 0:
            raise ValueError("cannot draw a negative number of bits")
        return self._take(int(k)).copy()

    def draw_bits(self, k: int) -> str:
        return "".join("1" if b else "0" for b in self.draw_bit_array(k))

    def draw_uint(self, width: int) -> int:
        bits = self.draw_bit_array(width)
        return int("".join(map(str, bits)), 2) if width else 0

    def uniform_indices(self, bounds) -> np.ndarray:
        """One unbiased draw from range(b) per bound, by rejection on ceil(log2 b) bits."""
        bounds = np.asarray(bounds, dtype=np.int64)
        if np.any(bounds < 1):
            raise ValueError("bounds must be positive")
        widths = np.array([(int(b) - 1).bit_length() for b in bounds], dtype=np.int64)
        out = np.zeros(len(bounds), dtype=np.int64)
        pending = np.flatnonzero(widths > 0)
        while len(pending):
            w = widths[pending]
            bits = self._take(int(w.sum())).astype(np.int64)
            owner = np.repeat(np.arange(len(pending)), w)
            starts = np.cumsum(w) - w
            shift = (w[owner] - 1 - (np.arange(len(bits)) - starts[owner]))
            values = np.zeros(len(pending), dtype=np.int64)
            np.add.at(values, owner, bits << shift)
            ok = values < bounds[pending]
            out[pending[ok]] = values[ok]
            pending = pending[~ok]
        return out

    def uniforms(self, k: int) -> np.ndarray:
        """k floats in [0, 1), 53 bits each."""
        if k == 0:
            return np.zeros(0)
        bits = self._take(53 * k).reshape(k, 53).astype(np.float64)
        weights = np.ldexp(1.0, -np.arange(1, 54))
        return bits @ weights


def _uniforms(rng, k: int) -> np.ndarray:
    if isinstance(rng, Tape):
        return rng.uniforms(k)
    return rng.random(k)


def sample_categorical(probs: np.ndarray, rng) -> np.ndarray:
    """Row-wise inverse-CDF sampling: one symbol per row of ``probs``."""
    probs = np.atleast_2d(probs)
    u = _uniforms(rng, probs.shape[0])
    cdf = np.cumsum(probs, axis=1)
    idx = (u[:, None] >= cdf).sum(axis=1)
    return np.minimum(idx, probs.shape[1] - 1)


# -- codebooks --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class OrderedCodebook:
    """Ordered list of sequence codes; position p is written MSB first in index_width bits."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.int64)
        if e.ndim != 1:
            raise ValueError("codebook entries must be 1-d")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def index_width(self) -> int:
        return (len(self.entries) - 1).bit_length() if len(self.entries) > 1 else 0

    def position(self, code: int) -> int:
        hits = np.flatnonzero(self.entries == code)
        if len(hits) != 1:
            raise KeyError(f"code {code} not in codebook")
        return int(hits[0])

    def position_bits(self, position: int, k: int | None = None) -> str:
        w = self.index_width
        full = format(position, f"0{w}b") if w else ""
        return full if k is None else full[:k]

    def prefix_filter(self, bits: str) -> "OrderedCodebook":
        """Entries whose position starts with ``bits``; survivors are re-indexed."""
        return prefix_filter(self, bits)


def prefix_filter(cb: OrderedCodebook, bits: str) -> OrderedCodebook:
    k, w = len(bits), cb.index_width
    if k > w:
        raise ValueError(f"{k} prefix bits exceed index width {w}")
    if k == 0:
        return cb
    v = int(bits, 2)
    lo, hi = v << (w - k), (v + 1) << (w - k)
    return OrderedCodebook(cb.entries[lo:min(hi, len(cb))])


def fisher_yates(values, tape: Tape) -> np.ndarray:
    values = np.asarray(values)
    size = len(values)
    if size < 2:
        return values.copy()
    swaps = tape.uniform_indices(np.arange(size, 1, -1))
    return _accel.apply_swaps(values, swaps)


def random_codebook(universe, tape: Tape, cap: int = 1 << 20) -> OrderedCodebook:
    """Uniformly random ordering of ``universe`` (codes), driven by tape bits."""
    universe = np.asarray(universe, dtype=np.int64)
    if len(universe) > cap:
        raise ValueError(f"universe of {len(universe)} exceeds cap {cap}")
    return OrderedCodebook(fisher_yates(universe, tape))


class SharedRandomness:
    """What both parties see: memoised draws keyed by label, metered once.

    ``structural`` feeds orderings and sampled positions; ``rate`` feeds the
    prefix bits that thin a codebook.
    """

    def __init__(self, structural: Tape, rate: Tape):
        self.structural = structural
        self.rate = rate
        self._memo: dict = {}

    def codebook(self, key, universe) -> OrderedCodebook:
        k = ("codebook", key)
        if k not in self._memo:
            self._memo[k] = random_codebook(universe, self.structural)
        return self._memo[k]

    def rate_bits(self, key, k: int) -> str:
        mk = ("rate", key)
        if mk not in self._memo:
            self._memo[mk] = self.rate.draw_bits(k)
        return self._memo[mk]

    def positions(self, key, count: int, n: int) -> np.ndarray:
        mk = ("positions", key)
        if mk not in self._memo:
            self._memo[mk] = self.structural.uniform_indices(np.full(count, n))
        return self._memo[mk]


# -- Newman strings ---------------------------------------------------------

@dataclass
class NewmanStrings:
    """s fixed seeds, each reproducing a full structural tape."""

    seeds: list[int]
    verified_bound: float | None = None
    worst_fraction: float | None = None
    attempts: int = 0

    @property
    def s(self) -> int:
        return len(self.seeds)

    @property
    def index_bits(self) -> int:
        return (self.s - 1).bit_length()

    def tape(self, index: int) -> Tape:
        return Tape(self.seeds[index], "shared_structural", metered=False)

    def to_json(self) -> str:
        return json.dumps({"seeds": self.seeds, "verified_bound": self.verified_bound,
                           "worst_fraction": self.worst_fraction, "attempts": self.attempts})

    @classmethod
    def from_json(cls, text: str) -> "NewmanStrings":
        return cls(**json.loads(text))

    @classmethod
    def draw(cls, s: int, seed) -> "NewmanStrings":
        """s seeds without verification."""
        gen = np.random.Generator(np.random.PCG64(seed))
        return cls([int(v) for v in gen.integers(0, 2**63 - 1, size=s, dtype=np.int64)])


class NewmanSelectionError(RuntimeError):
    def __init__(self, message: str, worst_input: int, worst_fraction: float):
        super().__init__(message)
        self.worst_input = worst_input
        self.worst_fraction = worst_fraction


def newman_select(runner: Callable[[int], np.ndarray], s: int, target_fraction: float,
                  seed, retries: int = 5) -> NewmanStrings:
    """Find s seeds whose per-input failure fraction is at most ``target_fraction``.

    ``runner(seed)`` returns a boolean success flag for every input of the
    (exhaustively enumerated) input space.
    """
    gen = np.random.Generator(np.random.PCG64(seed))
    worst = (-1, math.inf)
    for attempt in range(1, retries + 1):
        seeds = [int(v) for v in gen.integers(0, 2**63 - 1, size=s, dtype=np.int64)]
        failures = None
        for sd in seeds:
            f = ~np.asarray(runner(sd), dtype=bool)
            failures = f.astype(np.int64) if failures is None else failures + f
        frac = failures / s
        i = int(np.argmax(frac))
        if frac[i] <= target_fraction:
            return NewmanStrings(seeds, verified_bound=target_fraction,
                                 worst_fraction=float(frac[i]), attempts=attempt)
        if frac[i] < worst[1]:
            worst = (i, float(frac[i]))
    raise NewmanSelectionError(
        f"no string set met failure fraction {target_fraction} after {retries} attempts; "
        f"best worst-case input {worst[0]} failed on {worst[1]:.4f}", *worst)


# -- accounting -------------------------------------------------------------

@dataclass
class CostLedger:
    rounds: list[tuple[str, int, str]] = field(default_factory=list)
    shared_structural: int = 0
    shared_rate: int = 0
    private_A: int = 0
    private_B: int = 0
    notes: dict = field(default_factory=dict)

    @property
    def comm_bits(self) -> int:
        return sum(b for _, b, _ in self.rounds)

    @property
    def shared_bits(self) -> int:
        return self.shared_structural + self.shared_rate

    def wire_rounds(self) -> list[tuple[str, int]]:
        """Consecutive messages from one sender merged into a single wire round."""
        out: list[list] = []
        for sender, bits, _ in self.rounds:
            if out and out[-1][0] == sender:
                out[-1][1] += bits
            else:
                out.append([sender, bits])
        return [tuple(r) for r in out]

    @property
    def num_rounds(self) -> int:
        return len(self.wire_rounds())

    def round_bits(self) -> list[int]:
        return [b for _, b in self.wire_rounds()]


def cost_report(tapes: Sequence[Tape], rounds=(), notes: dict | None = None) -> CostLedger:
    ledger = CostLedger(rounds=list(rounds), notes=dict(notes or {}))
    for t in tapes:
        setattr(ledger, t.category, getattr(ledger, t.category) + t.bits_drawn)
    return ledger
