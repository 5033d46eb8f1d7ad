import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from priorfree.acceptance import AC7_PARAMS, bsc_pair
from priorfree.channels import Channel, InteractiveSpec
from priorfree.info import Dist, conditional_entropy, conditional_mutual_information
from priorfree.oracles import dual_formula_check, random_rate_instances
from priorfree.protocols import (ProtocolParams, estimate_joint_type, rate_bounds,
                                 run_int2, run_int3, run_rst1, run_rst2, run_sw1, run_sw2,
                                 run_sw3, trial_randomness)
from priorfree.protocols.common import (decode_type, encode_type, symbol_width, type_width,
                                        uint_bits)
from priorfree.protocols.estimation import max_cell_deviation
from priorfree.protocols.rates import LOGLOG_E, eta1, eta2
from priorfree.randomness import NewmanStrings

BSC2 = np.array([[0.8, 0.2], [0.2, 0.8]])


def _type(x, y, xs=2, ys=2):
    t = np.zeros((xs, ys))
    np.add.at(t, (x, y), 1.0 / len(x))
    return t


def _correlated(rng, n, agree=0.9):
    x = rng.integers(0, 2, n)
    y = np.where(rng.random(n) < agree, x, 1 - x)
    return x, y


class TestParams:
    def test_m_and_validation(self):
        assert ProtocolParams(n=10, delta_s=0.25).m == 3
        with pytest.raises(ValueError):
            ProtocolParams(n=4, delta=-0.1)
        with pytest.raises(ValueError):
            ProtocolParams(n=4, delta_s=1.5)

    def test_encodings_roundtrip(self):
        assert symbol_width(1) == 0 and symbol_width(3) == 2
        assert type_width(8) == 4
        counts = np.array([3, 0, 5])
        assert decode_type(encode_type(counts, 8), 8, 3).tolist() == counts.tolist()
        with pytest.raises(ValueError):
            uint_bits(8, 3)


class TestRates:
    def test_identity_channel_limits(self):
        t = np.array([[0.4, 0.1], [0.1, 0.4]])
        params = ProtocolParams(n=10 ** 9, delta=0.0, delta_prime=0.0, delta_double_prime=0.0,
                                delta_s=0.0)
        rb = rate_bounds(params, (2, 2, 2), t)
        h = conditional_entropy(Dist(t), (0,), (1,))
        assert rb.c_sw == pytest.approx(h, abs=1e-6)
        assert rb.c_rst == pytest.approx(h, abs=1e-6)
        assert rb.r <= 1e-6  # H(M|X,Y) = 0 for M = X

    def test_eta_non_negative(self):
        for inst in random_rate_instances(50, seed=1):
            rb = rate_bounds(inst["params"], (*inst["t"].shape, inst["channel"].shape[1]),
                             inst["t"], inst["channel"], j=inst["j"], m_sizes=inst["m_sizes"])
            assert min(rb.eta1, rb.eta2, rb.eta3) >= 0

    def test_domain_error(self):
        params = ProtocolParams(n=8, delta=0.2, delta_prime=0.2, delta_double_prime=0.2)
        with pytest.raises(ValueError):
            rate_bounds(params, (3, 3, 2), np.full((3, 3), 1 / 9), np.full((3, 2), 0.5))

    def test_dual_evaluator_fixed_instance(self):
        params = ProtocolParams(n=8, delta=0.1, delta_prime=0.1, delta_double_prime=0.1)
        rep = dual_formula_check([{"params": params, "t": np.full((2, 2), 0.25),
                                   "channel": BSC2}])
        assert rep["instances"] == 1 and rep["max_abs_diff"] < 1e-9

    def test_dual_evaluator_random(self):
        rep = dual_formula_check(random_rate_instances(100, seed=7))
        assert rep["disagreements"] == [] and rep["max_abs_diff"] < 1e-9

    def test_zero_delta_instance(self):
        params = ProtocolParams(n=50, delta=0.0, delta_prime=0.0, delta_double_prime=0.0)
        rep = dual_formula_check([{"params": params, "t": np.array([[1.0, 0], [0, 0]]),
                                   "channel": np.eye(2)}])
        assert rep["max_abs_diff"] < 1e-9

    def test_large_alphabet_instance(self):
        rng = np.random.default_rng(3)
        params = ProtocolParams(n=40, delta=0.005, delta_prime=0.004, delta_double_prime=0.003)
        t = rng.dirichlet(np.ones(20)).reshape(4, 5)
        p = rng.dirichlet(np.ones(6), size=4)
        rep = dual_formula_check([{"params": params, "t": t, "channel": p, "j": 3,
                                   "m_sizes": (6, 2, 3)}])
        assert rep["disagreements"] == []


class TestEstimation:
    def test_constant_sequences(self):
        x, y = np.zeros(20, dtype=int), np.ones(20, dtype=int)
        ta, tb, _ = estimate_joint_type(x, y, 2, 2, ProtocolParams(n=20, delta_s=0.2),
                                        trial_randomness(0, 0))
        assert np.array_equal(ta, tb)
        assert ta.tolist() == [[0, 1], [0, 0]]

    def test_diagonal(self, rng):
        x = rng.integers(0, 3, 30)
        ta, _, _ = estimate_joint_type(x, x, 3, 3, ProtocolParams(n=30, delta_s=0.3),
                                       trial_randomness(1, 0))
        assert np.all(ta[~np.eye(3, dtype=bool)] == 0)

    def test_ledger(self, rng):
        x, y = rng.integers(0, 2, 16), rng.integers(0, 3, 16)
        params = ProtocolParams(n=16, delta_s=0.25)
        _, _, led = estimate_joint_type(x, y, 2, 3, params, trial_randomness(2, 0))
        assert led.round_bits() == [params.m * 2, params.m * 1]
        assert led.shared_structural == params.m * 4  # n = 16 needs no rejection
        assert led.private_A == led.private_B == 0

    def test_failure_rate_small_sample(self):
        rng = np.random.default_rng(5)
        params = ProtocolParams(n=200, delta=0.1, delta_s=0.2)
        fails = 0
        for trial in range(400):
            x, y = rng.integers(0, 2, 200), rng.integers(0, 2, 200)
            t, _, _ = estimate_joint_type(x, y, 2, 2, params, trial_randomness(9, trial))
            fails += max_cell_deviation(t, x, y, 2, 2) > 0.1
        bound = 2 ** (-2 * 40 * 0.01 * math.log2(math.e) + 3)
        assert fails / 400 <= min(1.0, bound) + 3 * math.sqrt(0.25 / 400)


class TestSlepianWolf:
    def test_identical_inputs_zero_delta(self, rng):
        x = rng.integers(0, 2, 8)
        out = run_sw1(x, x, _type(x, x), ProtocolParams(n=8, delta=0.0), trial_randomness(0, 0), 2, 2)
        assert out.success and np.array_equal(out.transcript[0], x)

    def test_unary_alphabet(self):
        x = np.zeros(5, dtype=int)
        out = run_sw1(x, x, np.ones((1, 1)), ProtocolParams(n=5), trial_randomness(0, 0), 1, 1)
        assert out.success and out.ledger.comm_bits == 0

    def test_rate_conformance_and_decoding(self):
        rng = np.random.default_rng(11)
        params = ProtocolParams(n=8, delta=0.1)
        for trial in range(150):
            x, y = _correlated(rng, 8)
            t = _type(x, y)
            out = run_sw1(x, y, t, params, trial_randomness(3, trial), 2, 2)
            if out.success:
                assert np.array_equal(out.transcript[0], x)
                cap = math.ceil(8 * (conditional_entropy(Dist(t), (0,), (1,))
                                     + eta1(8, 0.1, 2, 2, params.o)))
                assert out.ledger.comm_bits <= cap
            else:
                assert out.error_tag in ("E3", "E4")

    def test_binning_bits_cross_check(self):
        params = ProtocolParams(n=6, delta=0.05, c_override=0.5)
        x, y = np.array([0, 1, 1, 0, 1, 0]), np.array([0, 1, 1, 0, 0, 0])
        out = run_sw1(x, y, _type(x, y), params, trial_randomness(0, 1), 2, 2)
        assert out.ledger.comm_bits == 3
        assert out.ledger.private_A == out.ledger.private_B == 0

    def test_sw2_identical_inputs(self, rng):
        params = ProtocolParams(n=10, delta=0.2, delta_s=0.3)
        x = rng.integers(0, 2, 10)
        out = run_sw2(x, x, params, trial_randomness(4, 0), 2, 2)
        assert np.all(out.t_tilde[~np.eye(2, dtype=bool)] == 0)
        assert out.ledger.round_bits()[0] == params.m  # fixed-size first round
        if out.success:
            assert np.array_equal(out.transcript[0], x)
        # a constant input makes the sampled estimate exact
        z = np.ones(10, dtype=int)
        out = run_sw2(z, z, params, trial_randomness(4, 1), 2, 2)
        assert out.success and np.array_equal(out.transcript[0], z)
        assert out.ledger.num_rounds == 2

    def test_sw3_identity(self, rng):
        x = rng.integers(0, 2, 8)
        out = run_sw3(x, x.copy(), np.eye(2), ProtocolParams(n=8, delta=0.1),
                      trial_randomness(5, 0), 2, 2)
        assert out.success and np.array_equal(out.transcript[0], x)
        assert out.ledger.num_rounds == 1

    def test_sw3_constant_side_information(self, rng):
        x = rng.integers(0, 2, 8)
        y = np.zeros(8, dtype=int)
        params = ProtocolParams(n=8, delta=0.1)
        out = run_sw3(x, y, np.array([[1.0, 0.0], [1.0, 0.0]]), params,
                      trial_randomness(6, 0), 2, 2)
        tx = np.bincount(x, minlength=2) / 8
        h = -sum(p * math.log2(p) for p in tx if p)
        assert out.info["rate"] >= h
        if out.success:
            assert np.array_equal(out.transcript[0], x)


class TestReverseShannon:
    def test_identity_reduction(self):
        rng = np.random.default_rng(21)
        params = ProtocolParams(n=6, delta=0.1, delta_prime=0.1, delta_double_prime=0.1)
        successes = 0
        for trial in range(60):
            x, y = _correlated(rng, 6, 0.8)
            out = run_rst1(x, y, _type(x, y), Channel.identity(2), params,
                           trial_randomness(7, trial), 2, 2)
            if out.success:
                successes += 1
                assert np.array_equal(out.transcript[0], x)
                assert out.agreement
        assert successes > 0

    def test_constant_channel(self, rng):
        x, y = rng.integers(0, 2, 8), rng.integers(0, 2, 8)
        params = ProtocolParams(n=8, delta=0.1, delta_prime=0.1, delta_double_prime=0.1)
        out = run_rst1(x, y, _type(x, y), Channel.constant((2,), 2), params,
                       trial_randomness(8, 0), 2, 2)
        assert out.success and np.all(out.transcript[0] == 0)
        assert out.ledger.comm_bits == 2 * type_width(8)  # only the type header is needed

    def test_rate_conformance(self):
        rng = np.random.default_rng(31)
        params = ProtocolParams(n=8, delta=0.1, delta_prime=0.1, delta_double_prime=0.1)
        ch = Channel.bsc(0.2)
        seen = 0
        for trial in range(80):
            x, y = _correlated(rng, 8, 0.8)
            t = _type(x, y)
            out = run_rst1(x, y, t, ch, params, trial_randomness(10, trial), 2, 2)
            joint = Dist(np.einsum("xm,xy->mxy", BSC2, t))
            h = conditional_entropy(joint, (0,), (1, 2))
            assert out.ledger.shared_rate <= math.ceil(8 * h + LOGLOG_E)
            if out.success:
                seen += 1
                assert out.agreement
                i = conditional_mutual_information(joint, (0,), (1,), (2,))
                assert out.ledger.comm_bits <= math.ceil(8 * (i + eta2(8, 0.1, 2, 2, 2, params.o)))
            else:
                assert out.error_tag in ("E1", "E2", "E3", "E4")
        assert seen > 0

    def test_rst2_identity_identical(self):
        x = np.ones(8, dtype=int)  # constant, so the sampled estimate is exact
        params = ProtocolParams(n=8, delta=0.1, delta_prime=0.1, delta_double_prime=0.1,
                                delta_s=0.25)
        out = run_rst2(x, x, Channel.identity(2), params, trial_randomness(12, 0), 2, 2)
        assert out.success and np.array_equal(out.transcript[0], x)
        rounds = out.ledger.round_bits()
        assert len(rounds) == 2
        hard_cap = 8 * (0.25 * math.log2(2) + math.log2(2))
        assert rounds[1] - 2 * type_width(8) <= hard_cap


class TestInteractive:
    def test_identity_rounds(self, rng):
        spec = InteractiveSpec(2, 2, (Channel.identity(2), Channel.identity(2).extend_inputs(2)))
        params = ProtocolParams(n=6, delta=0.1, delta_prime=0.1, delta_double_prime=0.1,
                                delta_s=0.5)
        x = rng.integers(0, 2, 6)
        for trial in range(10):
            out = run_int2(x, x, spec, params, trial_randomness(13, trial))
            if out.success:
                assert np.array_equal(out.transcript[0], x)
                assert np.array_equal(out.transcript[1], x)
                assert out.agreement

    def test_int2_single_round_matches_rst2_shape(self, rng):
        params = ProtocolParams(n=6, delta=0.2, delta_prime=0.2, delta_double_prime=0.2,
                                delta_s=0.5)
        x = rng.integers(0, 2, 6)
        a = run_int2(x, x, InteractiveSpec.one_way(Channel.identity(2), 2), params,
                     trial_randomness(14, 0))
        b = run_rst2(x, x, Channel.identity(2), params, trial_randomness(14, 0), 2, 2)
        assert a.ledger.round_bits() == b.ledger.round_bits()
        assert a.status == b.status

    def test_round_counts(self):
        params = ProtocolParams(**AC7_PARAMS)
        spec = bsc_pair(0.2, 0.3)
        x = y = np.zeros(6, dtype=int)
        for trial in range(40):
            a = run_int2(x, y, spec, params, trial_randomness(15, trial))
            b = run_int3(x, y, spec, params, trial_randomness(15, trial))
            if a.success:
                assert a.ledger.num_rounds == spec.j + 1
            if b.success:
                assert b.ledger.num_rounds == spec.j

    def test_int3_single_round_skips_estimation(self, rng):
        params = ProtocolParams(n=6, delta=0.2, delta_prime=0.2, delta_double_prime=0.2)
        x = rng.integers(0, 2, 6)
        out = run_int3(x, x, InteractiveSpec.one_way(Channel.identity(2), 2), params,
                       trial_randomness(16, 0))
        assert out.ledger.num_rounds == 1
        if out.success:
            assert np.array_equal(out.transcript[0], x)

    def test_soundness_and_agreement_on_success(self):
        params = ProtocolParams(**AC7_PARAMS)
        spec = bsc_pair(0.2, 0.3)
        x = y = np.zeros(6, dtype=int)
        successes = 0
        for trial in range(600):
            out = run_int2(x, y, spec, params, trial_randomness(17, trial))
            if out.success:
                successes += 1
                assert out.agreement
                assert all(s["ok"] for s in out.info["soundness"])
        assert successes > 50


class TestNewmanMode:
    def test_shared_index_metered(self, rng):
        ns = NewmanStrings.draw(16, seed=0)
        x, y = _correlated(rng, 6)
        out = run_sw1(x, y, _type(x, y), ProtocolParams(n=6, delta=0.2),
                      trial_randomness(0, 0, "newman", ns), 2, 2)
        assert out.ledger.shared_structural == 4
        assert out.ledger.shared_rate == 0

    def test_sender_sends_index(self, rng):
        ns = NewmanStrings.draw(8, seed=0)
        x, y = _correlated(rng, 6)
        params = ProtocolParams(n=6, delta=0.2)
        plain = run_sw1(x, y, _type(x, y), params, trial_randomness(0, 0, "newman", ns), 2, 2)
        sent = run_sw1(x, y, _type(x, y), params,
                       trial_randomness(0, 0, "newman", ns, sender_picks="A"), 2, 2)
        assert sent.ledger.shared_structural == 0
        assert sent.ledger.private_A >= 3
        assert sent.ledger.comm_bits == plain.ledger.comm_bits + 3

    def test_mode_errors(self):
        with pytest.raises(ValueError):
            trial_randomness(0, 0, "newman")
        with pytest.raises(ValueError):
            trial_randomness(0, 0, "bogus")


@given(st.integers(0, 2**32 - 1), st.integers(0, 50))
def test_runs_are_deterministic(seed, trial):
    rng = np.random.default_rng(seed)
    x, y = _correlated(rng, 6, 0.8)
    params = ProtocolParams(n=6, delta=0.15, delta_prime=0.15, delta_double_prime=0.15)
    a = run_rst1(x, y, _type(x, y), Channel.bsc(0.2), params, trial_randomness(seed, trial), 2, 2)
    b = run_rst1(x, y, _type(x, y), Channel.bsc(0.2), params, trial_randomness(seed, trial), 2, 2)
    assert a.status == b.status and a.error_tag == b.error_tag
    assert a.ledger == b.ledger
    assert all((p is None and q is None) or np.array_equal(p, q)
               for p, q in zip(a.transcript, b.transcript))
