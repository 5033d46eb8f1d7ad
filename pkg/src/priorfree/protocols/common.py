"""Parameters, outcomes, the message wire and per-trial randomness for all protocols."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ..randomness import (CostLedger, NewmanStrings, SharedRandomness, Tape, child_seed,
                          cost_report)

MODES = ("unbounded", "newman")
ABORT_TAGS = ("E_est", "E1", "E2", "E3", "E4")


@dataclass(frozen=True)
class OConstants:
    """Explicit stand-ins for the asymptotic terms: O(1/n) -> inv_n/n, O(1) -> one, O(j/n) -> j*inv_jn/n."""

    inv_n: float = 4.0
    one: float = 4.0
    inv_jn: float = 4.0


@dataclass(frozen=True)
class ProtocolParams:
    n: int
    delta: float = 0.1
    delta_prime: float = 0.1
    delta_double_prime: float = 0.1
    delta_s: float = 0.2
    o: OConstants = field(default_factory=OConstants)
    c_override: Optional[float] = None
    r_override: Optional[float] = None
    newman_bits: Optional[int] = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        for name in ("delta", "delta_prime", "delta_double_prime", "delta_s"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.m > self.n:
            raise ValueError(f"sample count m={self.m} exceeds n={self.n}")

    @property
    def m(self) -> int:
        return math.ceil(self.n * self.delta_s - 1e-12)

    def with_(self, **kw) -> "ProtocolParams":
        return replace(self, **kw)


@dataclass
class ProtocolOutcome:
    protocol: str
    status: str  # "success" or "abort"
    error_tag: Optional[str]
    transcript: list  # Bob's (receiver-side) copy of every simulated message
    alice_view: list
    bob_view: list
    ledger: CostLedger
    t_tilde: Optional[np.ndarray] = None
    info: dict = field(default_factory=dict)

    @property
    def success(self) -> bool:
        return self.status == "success"

    @property
    def agreement(self) -> bool:
        if len(self.alice_view) != len(self.bob_view):
            return False
        return all(np.array_equal(a, b) for a, b in zip(self.alice_view, self.bob_view))


class Wire:
    """Records every transmitted bit string in order."""

    def __init__(self):
        self.messages: list[tuple[str, str, str]] = []

    def send(self, sender: str, bits: str, label: str) -> str:
        if sender not in ("A", "B"):
            raise ValueError("sender is 'A' or 'B'")
        if any(c not in "01" for c in bits):
            raise ValueError("messages are bit strings")
        self.messages.append((sender, bits, label))
        return bits

    def rounds(self) -> list[tuple[str, int, str]]:
        return [(s, len(b), lab) for s, b, lab in self.messages]


class Abort(Exception):
    def __init__(self, tag: str, where: str = ""):
        super().__init__(f"{tag} {where}".strip())
        self.tag = tag
        self.where = where


# -- fixed-width encodings --------------------------------------------------

def symbol_width(size: int) -> int:
    return (size - 1).bit_length()


def uint_bits(value: int, width: int) -> str:
    if value < 0 or value >= (1 << width):
        raise ValueError(f"{value} does not fit in {width} bits")
    return format(value, f"0{width}b") if width else ""


def encode_symbols(seq, size: int) -> str:
    w = symbol_width(size)
    return "".join(uint_bits(int(s), w) for s in seq)


def decode_symbols(bits: str, size: int, count: int) -> np.ndarray:
    w = symbol_width(size)
    if w == 0:
        return np.zeros(count, dtype=np.int64)
    return np.array([int(bits[i * w:(i + 1) * w], 2) for i in range(count)], dtype=np.int64)


def type_width(n: int) -> int:
    return math.ceil(math.log2(n + 1))


def encode_type(counts, n: int) -> str:
    w = type_width(n)
    return "".join(uint_bits(int(c), w) for c in np.ravel(counts))


def decode_type(bits: str, n: int, cells: int) -> np.ndarray:
    w = type_width(n)
    return np.array([int(bits[i * w:(i + 1) * w], 2) for i in range(cells)], dtype=np.int64)


class Reader:
    """Sequential parser over a received bit string."""

    def __init__(self, bits: str):
        self.bits = bits
        self.pos = 0

    def take(self, k: int) -> str:
        if self.pos + k > len(self.bits):
            raise ValueError("message shorter than expected")
        out = self.bits[self.pos:self.pos + k]
        self.pos += k
        return out

    def done(self) -> bool:
        return self.pos == len(self.bits)


# -- per-trial randomness ---------------------------------------------------

@dataclass
class TrialRandomness:
    """All tapes of one trial.  ``shared`` is what both parties can read."""

    shared: SharedRandomness
    private_a: Tape
    private_b: Tape
    newman: Optional[NewmanStrings] = None
    newman_index: Optional[int] = None
    newman_sender: Optional[str] = None

    @property
    def newman_sent(self) -> bool:
        return self.newman_sender is not None

    def tapes(self) -> list[Tape]:
        return [self.shared.structural, self.shared.rate, self.private_a, self.private_b]

    def ledger(self, wire: Wire, notes: dict | None = None) -> CostLedger:
        led = cost_report(self.tapes(), wire.rounds(), notes)
        if self.newman is not None and not self.newman_sent:
            led.shared_structural += self.newman.index_bits
        return led


def trial_randomness(seed: int, trial: int, mode: str = "unbounded",
                     newman: Optional[NewmanStrings] = None,
                     sender_picks: Optional[str] = None) -> TrialRandomness:
    """Tapes for one trial, derived from (seed, trial).

    In ``newman`` mode the structural tape is one of the fixed strings.  The
    string index is either read off shared randomness (metered as
    ``shared_structural``) or, when ``sender_picks`` names a party, drawn from
    that party's private tape; the caller then transmits it.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    priv_a = Tape(child_seed(seed, trial, 2), "private_A")
    priv_b = Tape(child_seed(seed, trial, 3), "private_B")
    rate = Tape(child_seed(seed, trial, 1), "shared_rate")
    if mode == "unbounded":
        structural = Tape(child_seed(seed, trial, 0), "shared_structural")
        return TrialRandomness(SharedRandomness(structural, rate), priv_a, priv_b)
    if newman is None:
        raise ValueError("newman mode needs a string set")
    if sender_picks is None:
        pick = Tape(child_seed(seed, trial, 4), "shared_structural", metered=False)
        index = int(pick.uniform_indices([newman.s])[0])
    elif sender_picks in ("A", "B"):
        tape = priv_a if sender_picks == "A" else priv_b
        index = int(tape.uniform_indices([newman.s])[0])
    else:
        raise ValueError("sender_picks is None, 'A' or 'B'")
    structural = newman.tape(index)
    return TrialRandomness(SharedRandomness(structural, rate), priv_a, priv_b,
                           newman=newman, newman_index=index, newman_sender=sender_picks)


def seed_message(rand: TrialRandomness, party: str) -> str:
    """Bits ``party`` sends to share its privately chosen Newman index (empty otherwise)."""
    if rand.newman is None or rand.newman_sender != party:
        return ""
    return uint_bits(rand.newman_index, rand.newman.index_bits)


def default_newman_bits(n: int, exponent_rate: float, o: OConstants) -> int:
    """ceil(log2 n + 2 n rate + O(1)) index bits for a derandomised run."""
    return max(1, math.ceil(math.log2(max(n, 2)) + 2 * n * max(exponent_rate, 0.0) + o.one))
