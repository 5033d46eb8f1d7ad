import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from priorfree.typesets import (CapExceeded, ChannelTypicalSpec, JointType, TypicalSpec,
                                channel_typical_member_receiver, channel_typical_member_sender,
                                channel_typical_set, cond_typical_set, conditional_type_class,
                                empirical_type, enumerate_type_class, enumerate_types,
                                joint_channel_member, marginal_class_via_exists, merge_set_check,
                                type_class_size, type_count, typical_member, unit_prob_exact,
                                universe)

from .conftest import random_joint

seqs = st.integers(1, 7).flatmap(
    lambda n: st.tuples(st.lists(st.integers(0, 1), min_size=n, max_size=n),
                        st.lists(st.integers(0, 2), min_size=n, max_size=n)))


def _all(size, n):
    return [np.array(s) for s in itertools.product(range(size), repeat=n)]


class TestTypes:
    def test_examples(self):
        assert empirical_type([0, 0, 1, 1]).counts.tolist() == [2, 2]
        t = empirical_type([0, 1], [1, 0])
        assert t.counts.tolist() == [[0, 1], [1, 0]]
        assert empirical_type([1, 1, 1], arities=[3]).counts.tolist() == [0, 3, 0]

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            empirical_type([0, 1], [0])

    def test_enumerate_types(self):
        assert [t.counts.tolist() for t in enumerate_types(2, (2,))] == [[2, 0], [1, 1], [0, 2]]
        assert len(enumerate_types(4, (2,))) == 5
        for n in range(1, 9):
            for k in range(1, 5):
                count = len(enumerate_types(n, (k,)))
                assert count == math.comb(n + k - 1, k - 1) == type_count(n, k)
                assert count <= (n + 1) ** k

    def test_enumerate_cap(self):
        with pytest.raises(CapExceeded):
            enumerate_types(60, (4, 4), cap=1000)

    def test_type_class_size_and_bounds(self):
        assert type_class_size(JointType(np.array([4, 0]))) == 1
        assert type_class_size(JointType(np.array([2, 2]))) == 6
        for n in range(1, 9):
            for t in enumerate_types(n, (2, 2)):
                size = type_class_size(t)
                h = -sum(c / n * math.log2(c / n) for c in t.counts.ravel() if c)
                assert (n + 1) ** -4 * 2 ** (n * h) <= size * (1 + 1e-12)
                assert size <= 2 ** (n * h) * (1 + 1e-12)

    def test_enumerate_type_class(self):
        rows = enumerate_type_class(JointType(np.array([1, 1])))
        assert rows.tolist() == [[0, 1], [1, 0]]
        assert enumerate_type_class(JointType(np.array([0, 3]))).tolist() == [[1, 1, 1]]
        for n in range(1, 9):
            for t in enumerate_types(n, (2,)):
                rows = enumerate_type_class(t)
                assert len(rows) == type_class_size(t)
                assert all(empirical_type(r, arities=[2]) == t for r in rows)

    def test_joint_type_class_rows(self):
        t = JointType(np.array([[1, 1], [0, 1]]))
        pairs = enumerate_type_class(t)
        assert pairs.shape == (6, 2, 3)
        assert all(empirical_type(p[0], p[1], arities=(2, 2)) == t for p in pairs)


@given(seqs)
def test_marginal_roundtrip(pair):
    x, y = (np.array(s) for s in pair)
    joint = empirical_type(x, y, arities=(2, 3))
    assert joint.marginal((0,)) == empirical_type(x, arities=[2])
    assert joint.marginal((1,)) == empirical_type(y, arities=[3])
    assert joint.n == len(x)


class TestTypicalSets:
    def test_exact_type_is_member(self):
        x, y = np.array([0, 1, 1, 0]), np.array([1, 1, 0, 0])
        t = empirical_type(x, y, arities=(2, 2))
        assert typical_member((x, y), TypicalSpec(t, 0.0))
        other = np.array([[0.5, 0.0], [0.0, 0.5]])
        assert not typical_member((x, y), TypicalSpec(other, 0.0))

    def test_membership_brute_force_n4(self):
        center = random_joint(np.random.default_rng(1), (2, 2))
        spec = TypicalSpec(center, 0.5)
        for x in _all(2, 4):
            for y in _all(2, 4):
                c = np.zeros((2, 2))
                for a, b in zip(x, y):
                    c[a, b] += 0.25
                assert typical_member((x, y), spec) == (np.abs(c - center).sum() <= 0.5 + 1e-12)

    def test_arity_mismatch(self):
        with pytest.raises(ValueError):
            typical_member((np.zeros(3, int),), TypicalSpec(np.full((2, 2), 0.25), 0.1))

    def test_marginal_class_via_exists(self):
        for n in range(1, 7):
            for t in enumerate_types(n, (2, 2)):
                via = marginal_class_via_exists(t)
                direct = enumerate_type_class(t.marginal((0,)))
                assert np.array_equal(via, direct)

    def test_conditional_type_class(self):
        y = np.array([0, 1, 1, 0, 1, 0])
        indep = JointType(np.array([[2, 2], [1, 1]]))
        rows = conditional_type_class(indep, np.array([0, 0, 1, 1, 0, 1]))
        assert len(rows) == 9  # C(3,2) * C(3,2)
        diag = JointType(np.array([[3, 0], [0, 3]]))
        assert conditional_type_class(diag, y).tolist() == [y.tolist()]
        with pytest.raises(ValueError):
            conditional_type_class(diag, np.array([0, 0, 0, 0, 0, 1]))

    def test_partition_identity_n6(self):
        for t in enumerate_types(6, (2, 2)):
            ys = enumerate_type_class(t.marginal((1,)))
            cond = len(conditional_type_class(t, ys[0]))
            assert type_class_size(t) == len(ys) * cond

    def test_cond_typical_set_brute_force(self):
        rng = np.random.default_rng(2)
        center = random_joint(rng, (2, 2))
        y = rng.integers(0, 2, 6)
        got = cond_typical_set(TypicalSpec(center, 0.3), y)
        want = [x for x in _all(2, 6)
                if typical_member((x, y), TypicalSpec(center, 0.3))]
        assert got.tolist() == [w.tolist() for w in want]

    def test_cond_typical_set_edges(self):
        y = np.array([0, 1, 1, 0])
        t = JointType(np.array([[1, 1], [1, 1]]))
        at_zero = cond_typical_set(TypicalSpec(t, 0.0), y)
        assert at_zero.tolist() == conditional_type_class(t, y).tolist()
        assert len(cond_typical_set(TypicalSpec(t, 2.0), y)) == 16


@given(seqs, st.floats(0, 2), st.floats(0, 2))
def test_membership_monotone_in_delta(pair, a, b):
    x, y = (np.array(s) for s in pair)
    center = np.full((2, 3), 1 / 6)
    lo, hi = sorted((a, b))
    if typical_member((x, y), TypicalSpec(center, lo)):
        assert typical_member((x, y), TypicalSpec(center, hi))


def _bsc(f):
    return np.array([[1 - f, f], [f, 1 - f]])


class TestChannelTypical:
    @staticmethod
    def _draws(rng, center, p, n, count):
        """(m, x, y) triples sampled from p . center, so members and non-members both occur."""
        for _ in range(count):
            cells = rng.choice(center.size, size=n, p=center.ravel())
            x, y = cells // center.shape[1], cells % center.shape[1]
            m = (rng.random(n) < p[x, 1]).astype(np.int64)
            yield m, x, y

    def test_sender_matches_exists_search(self):
        rng = np.random.default_rng(4)
        center, p = random_joint(rng, (2, 2)), _bsc(0.2)
        spec = ChannelTypicalSpec.simple(center, p, 0.5, 0.4)
        ys = _all(2, 6)
        seen = set()
        for m, x, _ in self._draws(rng, center, p, 6, 40):
            brute = any(joint_channel_member(m, x, y, spec) for y in ys)
            assert channel_typical_member_sender(m, x, spec) == brute
            seen.add(brute)
        assert seen == {True, False}

    def test_receiver_matches_exists_search(self):
        rng = np.random.default_rng(5)
        center, p = random_joint(rng, (2, 2)), _bsc(0.3)
        spec = ChannelTypicalSpec.simple(center, p, 0.5, 0.4)
        xs = _all(2, 6)
        seen = set()
        for m, _, y in self._draws(rng, center, p, 6, 40):
            brute = any(joint_channel_member(m, x, y, spec) for x in xs)
            assert channel_typical_member_receiver(m, y, spec) == brute
            seen.add(brute)
        assert seen == {True, False}

    def test_realised_type_is_witness(self):
        # two positions per (x, y) cell, so m can have conditional type exactly p
        x = np.array([0, 0, 0, 0, 1, 1, 1, 1])
        y = np.array([0, 0, 1, 1, 0, 0, 1, 1])
        m = np.array([0, 1, 0, 1, 0, 1, 0, 1])
        p = np.array([[0.5, 0.5], [0.5, 0.5]])
        t = empirical_type(x, y, arities=(2, 2)).probs
        spec = ChannelTypicalSpec.simple(t, p, 0.0, 0.0)
        assert channel_typical_member_sender(m, x, spec)
        assert channel_typical_member_receiver(m, y, spec)

    def test_zero_radius_rejects_inconsistent(self):
        x = np.array([0, 0, 0, 0])
        t = np.array([[0.5, 0.5], [0.0, 0.0]])
        spec = ChannelTypicalSpec.simple(t, np.eye(2), 0.0, 0.0)
        assert not channel_typical_member_sender(np.array([1, 0, 0, 0]), x, spec)

    def test_deterministic_channel_receiver_set(self):
        # m = x deterministically: a receiver candidate must itself be an X-sequence
        # whose joint type with y is near the center
        t = np.array([[0.5, 0.0], [0.0, 0.5]])
        spec = ChannelTypicalSpec.simple(t, np.eye(2), 0.0, 0.0)
        y = np.array([0, 1, 0, 1])
        assert channel_typical_set(y, spec, "receiver").tolist() == [y.tolist()]

    @pytest.mark.parametrize("d1,d2", [(0.0, 0.0), (0.1, 0.1), (0.1, 0.3), (0.3, 0.1), (0.3, 0.3)])
    def test_merge_set(self, d1, d2):
        rng = np.random.default_rng(int(10 * d1 + 100 * d2))
        center = random_joint(rng, (2, 2))
        p = random_joint(rng, (2, 2))
        p = p / p.sum(axis=1, keepdims=True)
        assert merge_set_check(ChannelTypicalSpec.simple(center, p, d1, d2), 4)

    def test_unit_prob(self):
        x = np.array([0, 1, 0, 1, 1, 0, 0, 1])
        y = np.array([0, 0, 1, 1, 0, 0, 1, 1])
        t = empirical_type(x, y, arities=(2, 2)).probs
        n = len(x)
        for dp in (0.2, 0.5, 1.0, 1.5):
            prob = unit_prob_exact(x, y, ChannelTypicalSpec.simple(t, _bsc(0.2), 0.0, dp))
            assert 0.0 <= prob <= 1.0 + 1e-12
            bound = 1 - 2 ** (-n * dp ** 2 / (2 * math.log(2)) + 2 * 8 * math.log2(n + 1))
            if bound > 0:
                assert prob >= bound

    def test_universe_cap(self):
        with pytest.raises(CapExceeded):
            universe(2, 25)
