"""Independent checks: exact enumeration, Monte-Carlo distances and bound evaluation.

Nothing here is used by the protocols themselves.  Each oracle recomputes its
quantity by a route that shares as little code as practical with the module it
checks, so a transcription slip in one is unlikely to be mirrored in the other.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from math import comb
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .info import Dist, conditional_entropy, gamma_bound, shannon_entropy
from .randomness import Tape, random_codebook
from .typesets import (ChannelTypicalSpec, JointType, TypicalSpec, channel_typical_set,
                       cond_typical_set, conditional_type_class, enumerate_types,
                       type_class_size, typical_mask_given)

VERDICTS = ("pass", "vacuous-pass", "fail")


# -- Monte-Carlo estimates and bound reports --------------------------------

@dataclass(frozen=True)
class MCEstimate:
    point: float
    trials: int
    ci95: float
    accepted: int = 0  # trials surviving conditioning

    def __post_init__(self):
        if self.point < 0:
            raise ValueError("an estimate of a distance or probability cannot be negative")


@dataclass(frozen=True)
class BoundReport:
    name: str
    bound_value: float
    vacuous: bool
    measured: MCEstimate
    verdict: str
    note: str = ""

    def as_row(self) -> dict:
        row = asdict(self)
        row.update({f"measured_{k}": v for k, v in row.pop("measured").items()})
        return row


def judge(name: str, bound: float, measured: MCEstimate, probability: bool = True,
          note: str = "") -> BoundReport:
    """Fail only when the estimate minus its CI exceeds the bound.

    For probability-valued bounds, anything at or above 1 is vacuous.
    """
    vacuous = bool(probability and (not math.isfinite(bound) or bound >= 1.0))
    if measured.point - measured.ci95 > bound:
        verdict = "fail"
    else:
        verdict = "vacuous-pass" if vacuous else "pass"
    return BoundReport(name, float(bound), vacuous, measured, verdict, note)


def binomial_estimate(hits: int, trials: int) -> MCEstimate:
    """Proportion with a normal-approximation 95% half-width (floored at 1/trials)."""
    if trials <= 0:
        raise ValueError("need at least one trial")
    p = hits / trials
    half = 1.96 * math.sqrt(max(p * (1 - p), 1.0 / trials) / trials)
    return MCEstimate(p, trials, half, trials)


def tv_from_counts(counts: np.ndarray, reference: np.ndarray) -> float:
    """Total variation (half the l1 distance) between a histogram and a law."""
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    if total <= 0:
        raise ValueError("empty histogram")
    return float(0.5 * np.abs(counts / total - np.asarray(reference, dtype=float)).sum())


def tv_ci95(support: int, accepted: int) -> float:
    """1.96 * sqrt(|support| / (4 * accepted)): a bound on the expected histogram TV noise."""
    return 1.96 * math.sqrt(support / (4.0 * accepted))


def mc_conditional_tv(run: Callable[[int], Optional[int]], reference: np.ndarray,
                      trials: int) -> MCEstimate:
    """TV between the law of ``run`` conditioned on success and ``reference``.

    ``run(trial)`` returns an outcome code indexing ``reference``, or None when
    the trial aborted (those trials are discarded).  The CI uses the number of
    accepted trials, which is the conditioning correction.
    """
    reference = np.asarray(reference, dtype=float).ravel()
    counts = np.zeros(reference.size, dtype=np.int64)
    for trial in range(trials):
        code = run(trial)
        if code is not None:
            counts[code] += 1
    return conditional_tv_estimate(counts, reference, trials)


def conditional_tv_estimate(counts: np.ndarray, reference: np.ndarray, trials: int) -> MCEstimate:
    counts = np.asarray(counts)
    accepted = int(counts.sum())
    if accepted == 0:
        raise ValueError("no successful trials to condition on")
    support = int(np.count_nonzero((np.asarray(reference) > 0) | (counts > 0)))
    return MCEstimate(tv_from_counts(counts, reference), trials, tv_ci95(support, accepted),
                      accepted)


def bound_eval_hoeffding(u: float, v: float, q: float, eps: float) -> float:
    """exp(-mu eps^2 / 2) with mu = u v / q, for random subsets of sizes u, v of a q-set."""
    if q <= 0 or u < 0 or v < 0 or u > q or v > q:
        raise ValueError("need 0 <= u, v <= q and q > 0")
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    mu = u * v / q
    return math.exp(-mu * eps * eps / 2)


def bound_eval_chernoff(n: int, delta: float) -> float:
    """exp(-2 n delta^2)."""
    if n < 1 or delta < 0:
        raise ValueError("need n >= 1 and delta >= 0")
    return math.exp(-2 * n * delta * delta)


# -- cardinality sweep ------------------------------------------------------

@dataclass
class CardinalityReport:
    checks: int = 0
    violations: list = field(default_factory=list)
    by_kind: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def record(self, kind: str, ok: bool, witness: dict) -> None:
        self.checks += 1
        self.by_kind[kind] = self.by_kind.get(kind, 0) + 1
        if not ok:
            self.violations.append({"kind": kind, **witness})


_TOL = 1e-9


def _log2_size(k: int) -> float:
    return math.log2(k) if k > 0 else -math.inf


def _canonical_seq(counts: np.ndarray) -> np.ndarray:
    return np.repeat(np.arange(len(counts)), counts)


def _noisy_identity(size: int, flip: float = 0.2) -> np.ndarray:
    p = np.full((size, size), flip / max(size - 1, 1))
    np.fill_diagonal(p, 1 - flip if size > 1 else 1.0)
    return p


def _typical_set_size(center: np.ndarray, delta: float, types: list[JointType]) -> int:
    return sum(type_class_size(t) for t in types
               if np.abs(t.probs - center).sum() <= delta + 1e-12)


def verify_cardinality_suite(n_max: int, arities: Sequence[int] = (2, 2),
                             deltas: Iterable[float] = (0.0, 0.25, 0.5),
                             delta_prime: float = 0.25) -> CardinalityReport:
    """Enumerate every joint type with n <= n_max and check the cardinality bounds.

    For each type t over (X, Y): the type-class bounds (joint and X-marginal),
    the delta-typical joint set bounds, the conditional type class bounds and
    its product identity |T_t| = |T_{t_Y}| |T_{X|y}|, the conditionally typical
    set bounds, and the upper bound on the receiver-side channel-typical set
    for a noisy-identity channel p(m|x).
    """
    xs, ys = arities
    deltas = tuple(deltas)
    rep = CardinalityReport()
    channel = _noisy_identity(xs)
    for n in range(1, n_max + 1):
        types = enumerate_types(n, (xs, ys))
        log_n1 = math.log2(n + 1)
        for t in types:
            probs = t.probs
            d = Dist(probs)
            witness = {"n": n, "counts": t.counts.tolist()}
            size = type_class_size(t)
            h_xy = shannon_entropy(d)
            lo = n * h_xy - xs * ys * log_n1
            rep.record("type_class_joint", lo - _TOL <= _log2_size(size) <= n * h_xy + _TOL,
                       witness)
            tx = JointType(t.counts.sum(axis=1))
            h_x = shannon_entropy(Dist(tx.probs))
            sx = type_class_size(tx)
            rep.record("type_class_marginal",
                       n * h_x - xs * log_n1 - _TOL <= _log2_size(sx) <= n * h_x + _TOL, witness)
            for delta in deltas:
                g = gamma_bound(xs * ys - 1, delta) if xs * ys > 1 else 0.0
                k = _typical_set_size(probs, delta, types)
                lo = n * (h_xy - g) - xs * ys * log_n1
                hi = n * (h_xy + g) + xs * ys * log_n1
                rep.record("joint_typical_set", lo - _TOL <= _log2_size(k) <= hi + _TOL,
                           {**witness, "delta": delta, "size": k})
            # conditional pieces, with y the sorted sequence of type t_Y
            y = _canonical_seq(t.counts.sum(axis=0))
            cond = conditional_type_class(t, y)
            sy = type_class_size(JointType(t.counts.sum(axis=0)))
            rep.record("partition_identity", sy * len(cond) == size,
                       {**witness, "y_class": sy, "cond_class": len(cond)})
            h_x_y = conditional_entropy(d, (0,), (1,))
            lo = n * h_x_y - xs * ys * log_n1
            hi = n * h_x_y + xs * ys * log_n1
            rep.record("cond_type_class", lo - _TOL <= _log2_size(len(cond)) <= hi + _TOL,
                       {**witness, "size": len(cond)})
            for delta in deltas:
                g = gamma_bound(xs, delta)
                k = len(cond_typical_set(TypicalSpec(probs, delta), y))
                lo = n * (h_x_y - g) - xs * ys * log_n1
                hi = n * (h_x_y + g) + 2 * xs * ys * log_n1
                rep.record("cond_typical_set", lo - _TOL <= _log2_size(k) <= hi + _TOL,
                           {**witness, "delta": delta, "size": k})
                spec = ChannelTypicalSpec.simple(probs, channel, delta, delta_prime)
                k = len(channel_typical_set(y, spec, "receiver"))
                joint = Dist(np.einsum("xm,xy->my", channel, probs))
                h_m_y = conditional_entropy(joint, (0,), (1,))
                ms = channel.shape[1]
                hi = n * (h_m_y + gamma_bound(ms, xs * delta_prime)) + 2 * ms * ys * log_n1
                rep.record("receiver_set", _log2_size(k) <= hi + _TOL,
                           {**witness, "delta": delta, "size": k})
    return rep


# -- second evaluator for the rate formulas ----------------------------------

def _h2(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -(p * math.log(p) + (1 - p) * math.log(1 - p)) / math.log(2)


def _gam(d: float, x: float) -> float:
    if x < 0 or x > 1:
        raise ValueError("continuity term outside its domain")
    return x * math.log(d) / math.log(2) + _h2(x)


def _ent(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log(p)).sum() / math.log(2))


def independent_rates(n: int, d: float, d1: float, d2: float, t: np.ndarray, p: np.ndarray,
                      j: int, m_sizes: Sequence[int], o: tuple[float, float, float]) -> dict:
    """Recompute every rate and slack from scratch, with natural logs converted to bits.

    ``t`` over (X, Y); ``p`` of shape (X, M); ``o`` = (inv_n, one, inv_jn).
    """
    X, Y = t.shape
    M = p.shape[1]
    L = math.log(n + 1) / math.log(2)
    logn = math.log(n) / math.log(2) if n > 1 else 0.0
    # entropies from the (m, x, y) joint by marginal sums
    q = p.T[:, :, None] * t[None, :, :]
    h_xy = _ent(t.ravel())
    h_y = _ent(t.sum(axis=0))
    h_mxy = _ent(q.ravel())
    h_my = _ent(q.sum(axis=1).ravel())
    cond_x_y = h_xy - h_y
    i_mx_y = (h_my - h_y) - (h_mxy - h_xy)
    h_m_xy = h_mxy - h_xy
    inv_n, _, inv_jn = o
    out = {
        "c_sw": cond_x_y + _gam(X, d) + 2 * X * Y * L / n + d + 1 / n,
        "eta1": 2 * _gam(X, d) + 2 * X * Y * L / n + logn / n + 3 * d + inv_n / n,
        "c_rst": (i_mx_y + _gam(M, X * d1) + _gam(M, d) + _gam(M, d1) + 3 * M * X * Y * L / n
                  + d + 1 / n + logn / n),
        "r": (h_m_xy - _gam(M, d) - _gam(M, d1) - M * X * L / n
              + math.log2(1 / math.log(2)) / n - 1 / n - logn / n),
        "delta_triple": d1 * d1 / (2 * math.log(2)) - 2 * M * X * Y * L / n,
    }
    dmax = max(d, d1, d2)
    out["eta2"] = 5 * _gam(M, X * Y * dmax) + 4 * M * X * Y * L / n + 2 * logn / n + 3 * dmax + inv_n / n
    dj = max(d + (j - 1) * d1, d1, d2)
    mp = math.prod(m_sizes)
    out["eta3"] = (5 * j * _gam(max(m_sizes), X * Y * dj) + 2 * j * logn / n
                   + 4 * j * mp * X * Y * L / n + 3 * j * dj + j * inv_jn / n)
    return out


def dual_formula_check(instances: Iterable[dict]) -> dict:
    """Compare :func:`rate_bounds` with :func:`independent_rates` on each instance.

    An instance holds ``params``, ``t``, ``channel``, ``j`` and ``m_sizes``.
    Returns the largest absolute difference and every instance that differs
    by more than 1e-9 (or raises in only one of the two evaluators).
    """
    from .protocols.rates import rate_bounds

    worst = 0.0
    bad = []
    count = 0
    for inst in instances:
        count += 1
        prm, t, p = inst["params"], np.asarray(inst["t"]), np.asarray(inst["channel"])
        j, sizes = inst.get("j", 1), inst.get("m_sizes")
        sizes = tuple(sizes) if sizes is not None else (p.shape[1],) * j
        try:
            a = rate_bounds(prm, (t.shape[0], t.shape[1], p.shape[1]), t, p, j=j, m_sizes=sizes)
            a = {k: getattr(a, k) for k in ("c_sw", "eta1", "c_rst", "r", "delta_triple",
                                            "eta2", "eta3")}
        except ValueError:
            a = None
        try:
            b = independent_rates(prm.n, prm.delta, prm.delta_prime, prm.delta_double_prime, t, p,
                                  j, sizes, (prm.o.inv_n, prm.o.one, prm.o.inv_jn))
        except ValueError:
            b = None
        if (a is None) != (b is None):
            bad.append({"instance": count - 1, "reason": "domain disagreement"})
            continue
        if a is None:
            continue
        diff = max(abs(a[k] - b[k]) for k in a)
        worst = max(worst, diff)
        if diff > 1e-9:
            bad.append({"instance": count - 1, "diff": diff})
    return {"instances": count, "max_abs_diff": worst, "disagreements": bad}


def random_rate_instances(count: int, seed: int, max_alphabet: int = 3) -> list[dict]:
    """Random (params, t, channel) draws for :func:`dual_formula_check`."""
    from .protocols.common import ProtocolParams

    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        X, Y, M = (int(v) for v in rng.integers(1, max_alphabet + 1, size=3))
        j = int(rng.integers(1, 4))
        n = int(rng.integers(2, 200))
        lim = 1.0 / (X * Y * (j + 1))
        d, d1, d2 = (float(v) for v in rng.uniform(0, lim, size=3))
        t = rng.dirichlet(np.ones(X * Y)).reshape(X, Y)
        p = rng.dirichlet(np.ones(M), size=X)
        sizes = tuple(int(v) for v in rng.integers(1, max_alphabet + 1, size=j))
        out.append({"params": ProtocolParams(n=n, delta=d, delta_prime=d1, delta_double_prime=d2,
                                             delta_s=0.0),
                    "t": t, "channel": p, "j": j, "m_sizes": sizes})
    return out


# -- binning oracles ---------------------------------------------------------

def sw_bin_success_probability(universe_size: int, candidates: int, bits: int) -> float:
    """P(x is alone among the candidates in its bin) under a uniformly random ordering.

    The universe is split into 2^bits bins by position prefix; x's bin holds the
    positions sharing its prefix.  Averaged over x's uniformly random position.
    ``candidates`` counts x itself.
    """
    if candidates < 1:
        return 0.0
    w = max((universe_size - 1).bit_length(), 0)
    bits = min(bits, w)
    width = 1 << (w - bits)
    total = 0.0
    for start in range(0, universe_size, width):
        size = min(width, universe_size - start)
        # x lands in this bin with probability size / U; then its size - 1
        # companions are a uniform subset of the other U - 1 entries
        good = comb(universe_size - candidates, size - 1) / comb(universe_size - 1, size - 1)
        total += size / universe_size * good
    return total


def sw1_pairs(n: int, x_size: int = 2, y_size: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """All (x, y) pairs as code arrays, x-major."""
    xs = np.repeat(np.arange(x_size ** n), y_size ** n)
    ys = np.tile(np.arange(y_size ** n), x_size ** n)
    return xs, ys


def _digits(codes: np.ndarray, base: int, n: int) -> np.ndarray:
    out = np.empty((len(codes), n), dtype=np.int64)
    c = codes.copy()
    for i in range(n - 1, -1, -1):
        out[:, i] = c % base
        c //= base
    return out


class BatchedSW1:
    """SW1 outcomes for every input pair at once, for a given structural seed.

    Matches :func:`~priorfree.protocols.slepian_wolf.run_sw1` when the
    estimate is the exact joint type of the pair: the codebook is the first
    shuffle drawn from the structural tape.
    """

    def __init__(self, n: int, delta: float, bits: int, x_size: int = 2, y_size: int = 2):
        self.n, self.delta, self.bits = n, delta, bits
        self.x_size, self.y_size = x_size, y_size
        U = x_size ** n
        self.universe_size = U
        xc, yc = sw1_pairs(n, x_size, y_size)
        self.x_codes, self.y_codes = xc, yc
        xrows, yrows = _digits(xc, x_size, n), _digits(yc, y_size, n)
        self.candidates = np.zeros((len(xc), U), dtype=bool)
        for k in range(len(xc)):
            t = np.zeros((x_size, y_size))
            np.add.at(t, (xrows[k], yrows[k]), 1.0 / n)
            self.candidates[k] = typical_mask_given(yrows[k], x_size, t, delta)
        self.width = max((U - 1).bit_length(), 0)
        self.k = min(bits, self.width)

    def successes(self, seed) -> np.ndarray:
        tape = Tape(seed, "shared_structural", metered=False)
        cb = random_codebook(np.arange(self.universe_size), tape)
        pos = np.empty(self.universe_size, dtype=np.int64)
        pos[cb.entries] = np.arange(self.universe_size)
        bins = pos >> (self.width - self.k)
        same = bins[None, :] == bins[self.x_codes][:, None]
        hits = (self.candidates & same).sum(axis=1)
        return hits == 1

    def exact_success(self) -> np.ndarray:
        counts = self.candidates.sum(axis=1)
        cache = {}
        out = np.empty(len(counts))
        for i, c in enumerate(counts):
            c = int(c)
            if c not in cache:
                cache[c] = sw_bin_success_probability(self.universe_size, c, self.k)
            out[i] = cache[c]
        return out


def newman_target(n: int, delta: float) -> tuple[float, float]:
    """(per-input failure target 2^{-n delta}/2 + delta', delta') with delta' = 2^{-n delta}/4."""
    base = 2.0 ** (-n * delta)
    dp = base / 4
    return base / 2 + dp, dp


def newman_string_count(n: int, delta_prime: float, x_size: int = 2, y_size: int = 2,
                        constant: float = 1.0) -> int:
    """s = constant * n log2(|X||Y|) / delta'^2, rounded up to a power of two."""
    raw = constant * n * math.log2(x_size * y_size) / (delta_prime ** 2)
    return 1 << max(0, math.ceil(math.log2(max(raw, 1.0))))


def exact_output_table(rows: np.ndarray) -> np.ndarray:
    """Product law over all outcome sequences, built by explicit iteration.

    ``rows[i]`` is the output law at position i.  Independent of the vectorised
    version in :mod:`priorfree.channels`: outcome codes are first position most
    significant.
    """
    rows = np.asarray(rows, dtype=float)
    n, k = rows.shape
    out = np.empty(k ** n)
    for idx, combo in enumerate(itertools.product(range(k), repeat=n)):
        out[idx] = math.prod(rows[i, s] for i, s in enumerate(combo))
    return out
