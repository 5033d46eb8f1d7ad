"""Rate formulas and their slack terms, evaluated term by term in bits per symbol."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..info import Dist, conditional_entropy, conditional_mutual_information, gamma_bound
from .common import OConstants, ProtocolParams

LOGLOG_E = math.log2(math.log2(math.e))


def _log(v: float) -> float:
    return math.log2(v) if v > 0 else 0.0


def sw_rate(h_cond: float, x_size: int, y_size: int, n: int, delta: float) -> float:
    """Binning rate C for sending x with side information y."""
    return (h_cond + gamma_bound(x_size, delta)
            + 2 / n * x_size * y_size * math.log2(n + 1) + delta + 1 / n)


def eta1(n: int, delta: float, x_size: int, y_size: int, o: OConstants) -> float:
    return (2 * gamma_bound(x_size, delta) + 2 / n * x_size * y_size * math.log2(n + 1)
            + _log(n) / n + 3 * delta + o.inv_n / n)


def delta_triple(n: int, delta_prime: float, m_size: int, x_size: int, y_size: int) -> float:
    return delta_prime ** 2 / (2 * math.log(2)) - 2 / n * m_size * x_size * y_size * math.log2(n + 1)


def rst_shared_rate(h_m_given_xy: float, m_size: int, x_size: int, n: int,
                    delta: float, delta_prime: float) -> float:
    """R: rate of shared prefix bits that thin the message codebook."""
    return (h_m_given_xy - gamma_bound(m_size, delta) - gamma_bound(m_size, delta_prime)
            - m_size * x_size * math.log2(n + 1) / n + LOGLOG_E / n - 1 / n - _log(n) / n)


def rst_comm_rate(i_mx_given_y: float, m_size: int, x_size: int, y_size: int, n: int,
                  delta: float, delta_prime: float) -> float:
    """C: rate of position bits sent by the simulating party."""
    return (i_mx_given_y + gamma_bound(m_size, x_size * delta_prime)
            + gamma_bound(m_size, delta) + gamma_bound(m_size, delta_prime)
            + 3 / n * m_size * x_size * y_size * math.log2(n + 1)
            + delta + 1 / n + _log(n) / n)


def eta2(n: int, delta_max: float, m_size: int, x_size: int, y_size: int, o: OConstants) -> float:
    return (5 * gamma_bound(m_size, x_size * y_size * delta_max)
            + 4 / n * m_size * x_size * y_size * math.log2(n + 1)
            + 2 * _log(n) / n + 3 * delta_max + o.inv_n / n)


def eta3(n: int, delta_max_j: float, j: int, m_max: int, m_prod: int, x_size: int,
         y_size: int, o: OConstants) -> float:
    return (5 * j * gamma_bound(m_max, x_size * y_size * delta_max_j)
            + 2 * j * _log(n) / n
            + 4 * j / n * m_prod * x_size * y_size * math.log2(n + 1)
            + 3 * j * delta_max_j + o.inv_jn * j / n)


def sw3_exponent(n: int, delta: float, x_size: int, y_size: int) -> float:
    """delta' in the one-round side-information protocol's failure bound."""
    return delta ** 2 / (2 * math.log(2)) - 2 / n * y_size * x_size * math.log2(n + 1) - 2 / n


def estimation_failure_bound(m: int, delta: float, x_size: int, y_size: int) -> float:
    """Upper bound on Pr[some cell of the sampled estimate is off by more than delta]."""
    e = -2 * m * delta ** 2 * math.log2(math.e) + math.log2(x_size * y_size) + 1
    return 2.0 ** e


@dataclass(frozen=True)
class RateBounds:
    c_sw: float
    c_rst: float
    r: float
    eta1: float
    eta2: float
    eta3: float
    delta_triple: float
    delta_min: float
    delta_max: float
    delta_max_j: float


def _with_channel(t: np.ndarray, channel: np.ndarray) -> Dist:
    """Joint over (M, X, Y) from t over (X, Y) and p(m|x) of shape (X, M)."""
    return Dist(np.einsum("xm,xy->mxy", channel, t))


def rate_bounds(params: ProtocolParams, alphabets: tuple[int, int, int], t_tilde,
                channel: Optional[np.ndarray] = None, j: int = 1,
                m_sizes: Optional[tuple[int, ...]] = None) -> RateBounds:
    """Every rate and slack for one configuration.

    ``alphabets`` is (|X|, |Y|, |M|).  Without a channel the reverse-Shannon
    quantities use the identity channel.  ``m_sizes`` gives the per-round
    message alphabets for the interactive slack (defaults to ``(|M|,) * j``).
    Raises ValueError when a continuity term leaves its domain.
    """
    xs, ys, ms = alphabets
    t = t_tilde.probs if isinstance(t_tilde, Dist) else np.asarray(t_tilde, dtype=float)
    if t.shape != (xs, ys):
        raise ValueError(f"t_tilde shape {t.shape} does not match alphabets {(xs, ys)}")
    p = np.eye(xs) if channel is None else np.asarray(channel, dtype=float)
    if p.shape != (xs, ms):
        raise ValueError(f"channel shape {p.shape} does not match (|X|, |M|) = {(xs, ms)}")
    n, d, d1, d2 = params.n, params.delta, params.delta_prime, params.delta_double_prime
    txy = Dist(t)
    joint = _with_channel(t, p)
    c_sw = sw_rate(conditional_entropy(txy, (0,), (1,)), xs, ys, n, d)
    i_mxy = conditional_mutual_information(joint, (0,), (1,), (2,))
    h_mxy = conditional_entropy(joint, (0,), (1, 2))
    c_rst = rst_comm_rate(i_mxy, ms, xs, ys, n, d, d1)
    r = rst_shared_rate(h_mxy, ms, xs, n, d, d1)
    dt = delta_triple(n, d1, ms, xs, ys)
    dmin = min(d, dt, d2)
    dmax = max(d, d1, d2)
    dmax_j = max(d + (j - 1) * d1, d1, d2)
    sizes = m_sizes if m_sizes is not None else (ms,) * j
    return RateBounds(
        c_sw=c_sw, c_rst=c_rst, r=r,
        eta1=eta1(n, d, xs, ys, params.o),
        eta2=eta2(n, dmax, ms, xs, ys, params.o),
        eta3=eta3(n, dmax_j, j, max(sizes), math.prod(sizes), xs, ys, params.o),
        delta_triple=dt, delta_min=dmin, delta_max=dmax, delta_max_j=dmax_j)
