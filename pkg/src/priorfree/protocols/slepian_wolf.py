"""Sending x to a receiver holding correlated y, by random binning over x^n."""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .. import _accel
from ..info import Dist, conditional_entropy
from ..typesets import TIE_EPS, typical_mask_given, universe, universe_type_classes
from . import estimation
from .common import (ProtocolOutcome, ProtocolParams, Reader, TrialRandomness, Wire,
                     decode_type, encode_type, seed_message, type_width)
from .rates import sw_rate


def _code(seq, size: int) -> int:
    return int(_accel.encode(np.asarray(seq), size)[0])


@lru_cache(maxsize=4096)
def _typical_codes(y_key: tuple, x_size: int, center_key: tuple, shape: tuple, delta: float):
    center = np.array(center_key).reshape(shape)
    mask = typical_mask_given(np.array(y_key), x_size, center, delta)
    return mask


def bob_candidates_sw(y, x_size: int, center: np.ndarray, delta: float) -> np.ndarray:
    """Boolean mask over x-codes of the conditionally typical set around ``center``."""
    c = np.asarray(center, dtype=float)
    return _typical_codes(tuple(int(v) for v in y), x_size, tuple(c.ravel().tolist()),
                          c.shape, float(delta))


def binning_bits(rate: float, n: int, width: int) -> int:
    """ceil(nC) clamped to [0, width]; an infinite rate sends the full index."""
    if not math.isfinite(rate):
        return width if rate > 0 else 0
    return int(min(max(math.ceil(n * rate - 1e-9), 0), width))


def sw_rate_for(t_tilde: np.ndarray, params: ProtocolParams) -> float:
    if params.c_override is not None:
        return params.c_override
    xs, ys = t_tilde.shape
    return sw_rate(conditional_entropy(Dist(t_tilde), (0,), (1,)), xs, ys, params.n, params.delta)


def _sw_codebook(rand: TrialRandomness, x_size: int, n: int, label: str):
    return rand.shared.codebook(("sw", label, x_size, n), np.arange(x_size ** n))


def sw_alice(x, x_size: int, rate: float, n: int, rand: TrialRandomness, label: str) -> str:
    cb = _sw_codebook(rand, x_size, n, label)
    k = binning_bits(rate, n, cb.index_width)
    return cb.position_bits(cb.position(_code(x, x_size)), k)


def sw_bob(bits: str, candidates_mask: np.ndarray, x_size: int, n: int,
           rand: TrialRandomness, label: str):
    """Unique member of the received bin inside Bob's candidate set, or None."""
    cb = _sw_codebook(rand, x_size, n, label).prefix_filter(bits)
    hits = cb.entries[candidates_mask[cb.entries]]
    if len(hits) != 1:
        return None
    return universe(x_size, n)[hits[0]].copy()


def _classify(x_hat, x, in_candidates: bool) -> tuple[str, str | None]:
    if x_hat is not None and np.array_equal(x_hat, x):
        return "success", None
    return "abort", ("E4" if in_candidates else "E3")


def run_sw1(x, y, t_tilde, params: ProtocolParams, rand: TrialRandomness,
            x_size: int, y_size: int, label: str = "sw1") -> ProtocolOutcome:
    """One round: Alice sends the first ceil(nC) bits of x's position in a shuffled x^n."""
    x, y = np.asarray(x, dtype=np.int64), np.asarray(y, dtype=np.int64)
    t_tilde = np.asarray(t_tilde, dtype=float)
    n = params.n
    wire = Wire()
    rate = sw_rate_for(t_tilde, params)
    seed = seed_message(rand, "A")
    msg = wire.send("A", seed + sw_alice(x, x_size, rate, n, rand, label), "sw1")
    mask = bob_candidates_sw(y, x_size, t_tilde, params.delta)
    x_hat = sw_bob(Reader(msg).take(len(msg))[len(seed):], mask, x_size, n, rand, label)
    status, tag = _classify(x_hat, x, bool(mask[_code(x, x_size)]))
    return ProtocolOutcome("sw1", status, tag, [x_hat], [x], [x_hat], rand.ledger(wire),
                           t_tilde=t_tilde, info={"rate": rate})


def run_sw2(x, y, params: ProtocolParams, rand: TrialRandomness,
            x_size: int, y_size: int) -> ProtocolOutcome:
    """Estimation then binning: Bob sends s_B, Alice replies with s_A and her bin index."""
    x, y = np.asarray(x, dtype=np.int64), np.asarray(y, dtype=np.int64)
    n, m = params.n, params.m
    wire = Wire()
    # round 1, Bob
    seed = seed_message(rand, "B")
    msg1 = wire.send("B", seed + estimation.bob_sb(y, y_size, rand, params), "s_B")
    # round 2, Alice
    s_b = estimation.decode_symbols(msg1[len(seed):], y_size, m)
    s_a = estimation.local_string(x, estimation.sample_positions(rand, params))
    t_alice = estimation.estimate_from_strings(s_a, s_b, x_size, y_size)
    rate = sw_rate_for(t_alice, params)
    sa_bits = estimation.encode_symbols(s_a, x_size)
    msg2 = wire.send("A", sa_bits + sw_alice(x, x_size, rate, n, rand, "sw2"), "s_A+sw1")
    # Bob
    rd = Reader(msg2)
    s_a_at_b = estimation.decode_symbols(rd.take(len(sa_bits)), x_size, m)
    s_b_local = estimation.local_string(y, estimation.sample_positions(rand, params))
    t_bob = estimation.estimate_from_strings(s_a_at_b, s_b_local, x_size, y_size)
    mask = bob_candidates_sw(y, x_size, t_bob, params.delta)
    x_hat = sw_bob(rd.take(len(msg2) - rd.pos), mask, x_size, n, rand, "sw2")
    in_ball = _in_ball(x, y, t_bob, x_size, y_size, params.delta)
    status, tag = _classify(x_hat, x, bool(mask[_code(x, x_size)]))
    if status == "abort" and not in_ball:
        tag = "E_est"
    info = {"rate": rate, "in_ball": in_ball,
            "max_cell_dev": estimation.max_cell_deviation(t_bob, x, y, x_size, y_size)}
    return ProtocolOutcome("sw2", status, tag, [x_hat], [x], [x_hat], rand.ledger(wire),
                           t_tilde=t_bob, info=info)


def _in_ball(x, y, center, x_size, y_size, delta) -> bool:
    t = estimation.estimate_from_strings(x, y, x_size, y_size)
    return float(np.abs(t - center).sum()) <= delta + TIE_EPS


def sw3_center(x, channel: np.ndarray, x_size: int) -> np.ndarray:
    """t_x . p_{Y|X} over (X, Y)."""
    tx = np.bincount(np.asarray(x), minlength=x_size) / len(x)
    return tx[:, None] * np.asarray(channel, dtype=float)


def sw3_candidates(y, tx_counts, channel: np.ndarray, x_size: int, delta: float) -> np.ndarray:
    """Mask over x-codes: x' of type t_x with ||t_{x'y} - t_x . p|| <= delta."""
    n = len(y)
    p = np.asarray(channel, dtype=float)
    y_size = p.shape[1]
    mask = np.zeros(x_size ** n, dtype=bool)
    codes = universe_type_classes(x_size, n).get(tuple(int(c) for c in tx_counts))
    if codes is None:
        return mask
    rows = universe(x_size, n)[codes]
    center = (np.asarray(tx_counts) / n)[:, None] * p
    counts = _accel.pair_counts(rows, np.asarray(y), y_size, x_size)
    mask[codes] = _accel.l1_rows(counts, n, center.ravel()) <= delta + TIE_EPS
    return mask


def run_sw3(x, y, channel, params: ProtocolParams, rand: TrialRandomness,
            x_size: int, y_size: int) -> ProtocolOutcome:
    """One round: Alice sends t_x, then her bin index against the channel-typical set."""
    x, y = np.asarray(x, dtype=np.int64), np.asarray(y, dtype=np.int64)
    p = np.asarray(channel, dtype=float)
    n = params.n
    wire = Wire()
    tx = np.bincount(x, minlength=x_size)
    center = sw3_center(x, p, x_size)
    rate = sw_rate_for(center, params)
    seed = seed_message(rand, "A")
    header = encode_type(tx, n)
    msg = wire.send("A", seed + header + sw_alice(x, x_size, rate, n, rand, "sw3"), "t_x+sw")
    rd = Reader(msg)
    rd.take(len(seed))
    tx_bob = decode_type(rd.take(x_size * type_width(n)), n, x_size)
    mask = sw3_candidates(y, tx_bob, p, x_size, params.delta)
    x_hat = sw_bob(rd.take(len(msg) - rd.pos), mask, x_size, n, rand, "sw3")
    status, tag = _classify(x_hat, x, bool(mask[_code(x, x_size)]))
    return ProtocolOutcome("sw3", status, tag, [x_hat], [x], [x_hat], rand.ledger(wire),
                           t_tilde=center, info={"rate": rate})
