"""Joint-type estimation by exchanging symbols at shared random positions."""
from __future__ import annotations

import numpy as np

from ..randomness import CostLedger
from .common import (ProtocolParams, Reader, TrialRandomness, Wire, decode_symbols,
                     encode_symbols)

_KEY = "estimation"


def sample_positions(rand: TrialRandomness, params: ProtocolParams) -> np.ndarray:
    """The m coordinates, drawn with replacement from shared randomness."""
    if params.m < 1:
        raise ValueError("estimation needs at least one sample (m >= 1)")
    return rand.shared.positions(_KEY, params.m, params.n)


def local_string(seq, positions) -> np.ndarray:
    return np.asarray(seq, dtype=np.int64)[positions]


def estimate_from_strings(s_a, s_b, x_size: int, y_size: int) -> np.ndarray:
    """t~(x, y) = c(x, y) / m."""
    c = np.zeros((x_size, y_size))
    np.add.at(c, (np.asarray(s_a), np.asarray(s_b)), 1)
    return c / len(s_a)


def alice_sa(x, x_size, rand, params) -> str:
    return encode_symbols(local_string(x, sample_positions(rand, params)), x_size)


def bob_sb(y, y_size, rand, params) -> str:
    return encode_symbols(local_string(y, sample_positions(rand, params)), y_size)


def estimate_joint_type(x, y, x_size: int, y_size: int, params: ProtocolParams,
                        rand: TrialRandomness) -> tuple[np.ndarray, np.ndarray, CostLedger]:
    """Standalone two-round estimation: Bob sends s_B, then Alice sends s_A.

    Returns (Alice's estimate, Bob's estimate, ledger); the two are identical.
    """
    wire = Wire()
    m = params.m
    msg_b = wire.send("B", bob_sb(y, y_size, rand, params), "s_B")
    s_b_at_a = decode_symbols(Reader(msg_b).take(len(msg_b)), y_size, m)
    s_a_local = local_string(x, sample_positions(rand, params))
    t_alice = estimate_from_strings(s_a_local, s_b_at_a, x_size, y_size)
    msg_a = wire.send("A", alice_sa(x, x_size, rand, params), "s_A")
    s_a_at_b = decode_symbols(msg_a, x_size, m)
    s_b_local = local_string(y, sample_positions(rand, params))
    t_bob = estimate_from_strings(s_a_at_b, s_b_local, x_size, y_size)
    return t_alice, t_bob, rand.ledger(wire)


def max_cell_deviation(t_tilde: np.ndarray, x, y, x_size: int, y_size: int) -> float:
    """max over cells |t~ - t|, where t is the true joint type (harness side)."""
    t = estimate_from_strings(x, y, x_size, y_size)
    return float(np.abs(t_tilde - t).max())
