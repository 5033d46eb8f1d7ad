"""Channel simulation rounds: one party samples a channel output, the other decodes it.

A round is described in the generic three-way layout of
:class:`~priorfree.typesets.ChannelTypicalSpec`: ``a`` is the sender's private
input, ``b`` the receiver's, ``c`` the combined earlier messages both hold.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import _accel
from ..info import Dist, conditional_entropy, conditional_mutual_information
from ..randomness import Tape, sample_categorical
from ..typesets import (ChannelTypicalSpec, channel_typical_mask, channel_typical_member_sender,
                        universe, universe_type_classes)
from .common import (Abort, ProtocolParams, Reader, TrialRandomness, decode_type, encode_type,
                     type_width)
from .rates import rst_comm_rate, rst_shared_rate
from .slepian_wolf import binning_bits


@dataclass(frozen=True, eq=False)
class RstRound:
    spec: ChannelTypicalSpec
    n: int
    comm_rate: float
    shared_rate: float
    label: str

    @property
    def m_size(self) -> int:
        return self.spec.sizes[0]

    @property
    def view_sizes(self) -> tuple[int, int]:
        _, a, b, c = self.spec.sizes
        return a * c, b * c

    @property
    def header_bits(self) -> int:
        return self.m_size * type_width(self.n)


def _safe(f, fallback, *args):
    try:
        return f(*args)
    except ValueError:
        return fallback


def round_rates(center: np.ndarray, channel: np.ndarray, n: int, delta: float,
                delta_prime: float) -> tuple[float, float]:
    """(C, R) for a round; C falls back to +inf and R to -inf off the formula's domain."""
    joint = Dist(np.einsum("acm,abc->mabc", channel, center))
    m_size, a, b, c = joint.alphabet_sizes
    i_mab = conditional_mutual_information(joint, (0,), (1,), (2, 3))
    h_m = conditional_entropy(joint, (0,), (1, 2, 3))
    xs, ys = a * c, b * c
    comm = _safe(rst_comm_rate, math.inf, i_mab, m_size, xs, ys, n, delta, delta_prime)
    shared = _safe(rst_shared_rate, -math.inf, h_m, m_size, xs, n, delta, delta_prime)
    return comm, shared


_ROUND_CACHE: dict = {}


def make_round(center, channel, delta: float, params: ProtocolParams, label: str) -> RstRound:
    """``center`` over (a, b[, c]); ``channel`` p(m | a[, c]).  Memoised on content."""
    center = np.asarray(center, dtype=float)
    channel = np.asarray(channel, dtype=float)
    key = (center.shape, center.tobytes(), channel.shape, channel.tobytes(), float(delta),
           params, label)
    hit = _ROUND_CACHE.get(key)
    if hit is None:
        if len(_ROUND_CACHE) > 50_000:
            _ROUND_CACHE.clear()
        hit = _ROUND_CACHE[key] = _build_round(center, channel, delta, params, label)
    return hit


def _build_round(center, channel, delta: float, params: ProtocolParams, label: str) -> RstRound:
    spec = ChannelTypicalSpec(center, channel, delta, params.delta_prime)
    comm, shared = round_rates(spec.center, spec.channel, params.n, delta, params.delta_prime)
    if params.c_override is not None:
        comm = params.c_override
    if params.r_override is not None:
        shared = params.r_override
    return RstRound(spec, params.n, comm, shared, label)


def _prefix(c, n):
    return np.zeros(n, dtype=np.int64) if c is None else np.asarray(c, dtype=np.int64)


def _lists(rnd: RstRound, type_counts, rand: TrialRandomness):
    """L_t (shuffled type class) and L_r (after the shared prefix bits)."""
    key = tuple(int(v) for v in type_counts)
    codes = universe_type_classes(rnd.m_size, rnd.n).get(key)
    if codes is None:
        raise ValueError(f"type {key} has no sequences of length {rnd.n}")
    lt = rand.shared.codebook((rnd.label, key), codes)
    if math.isfinite(rnd.shared_rate):
        k = int(min(max(math.floor(rnd.n * rnd.shared_rate + 1e-9), 0), lt.index_width))
    else:
        k = 0
    r = rand.shared.rate_bits((rnd.label, key), k)
    return lt, lt.prefix_filter(r)


@dataclass
class SenderResult:
    bits: str
    sample: np.ndarray  # the channel output before re-selection
    chosen: np.ndarray  # m_r, the simulated message


def rst_send(rnd: RstRound, own, prefix, rand: TrialRandomness, private: Tape) -> SenderResult:
    """Sender's side of one round; raises Abort("E1"/"E2")."""
    a = np.asarray(own, dtype=np.int64)
    n = rnd.n
    c = _prefix(prefix, n)
    m_size, a_size, _, c_size = rnd.spec.sizes
    m = sample_categorical(rnd.spec.channel[a, c, :], private)
    if not channel_typical_member_sender(m, a, rnd.spec, c):
        raise Abort("E1", rnd.label)
    t_m = np.bincount(m, minlength=m_size)
    _, lr = _lists(rnd, t_m, rand)
    rows = universe(m_size, n)[lr.entries]
    view = a * c_size + c
    target = _accel.pair_counts(m, view, a_size * c_size, m_size)[0]
    counts = _accel.pair_counts(rows, view, a_size * c_size, m_size)
    eligible = np.flatnonzero((counts == target[None, :]).all(axis=1))
    if len(eligible) == 0:
        raise Abort("E2", rnd.label)
    pick = int(eligible[private.uniform_indices([len(eligible)])[0]])
    k = binning_bits(rnd.comm_rate, n, lr.index_width)
    bits = encode_type(t_m, n) + lr.position_bits(pick, k)
    return SenderResult(bits, m, rows[pick].copy())


def rst_receive(rnd: RstRound, own, prefix, bits: str, rand: TrialRandomness):
    """Receiver's side: the unique typical candidate in the received bin, else None."""
    b = np.asarray(own, dtype=np.int64)
    n = rnd.n
    c = _prefix(prefix, n)
    rd = Reader(bits)
    t_m = decode_type(rd.take(rnd.header_bits), n, rnd.m_size)
    _, lr = _lists(rnd, t_m, rand)
    k = binning_bits(rnd.comm_rate, n, lr.index_width)
    lrc = lr.prefix_filter(rd.take(k))
    if not rd.done():
        raise ValueError("trailing bits in round message")
    rows = universe(rnd.m_size, n)[lrc.entries]
    mask = channel_typical_mask(rows, b, rnd.spec, "receiver", c)
    if mask.sum() != 1:
        return None
    return rows[np.flatnonzero(mask)[0]].copy()


def classify(rnd: RstRound, decoded, chosen, receiver_own, prefix) -> str | None:
    """None on success, else E3 (chosen message not receiver-typical) or E4."""
    if decoded is not None and np.array_equal(decoded, chosen):
        return None
    c = _prefix(prefix, rnd.n)
    in_set = channel_typical_mask(np.asarray(chosen)[None, :], receiver_own, rnd.spec,
                                  "receiver", c)[0]
    return "E4" if in_set else "E3"


def one_way_round(t_tilde, channel, params: ProtocolParams, label: str = "rst") -> RstRound:
    """Round with center t~ over (X, Y) and channel p(m|x) of shape (X, M)."""
    return make_round(np.asarray(t_tilde, dtype=float), np.asarray(channel, dtype=float),
                      params.delta, params, label)
