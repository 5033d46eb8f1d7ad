import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from priorfree.info import (Dist, alicki_fannes_bound, binary_entropy, conditional_entropy,
                            conditional_mutual_information, fannes_bound, gamma_bound,
                            kl_divergence, mutual_information, product, shannon_entropy,
                            total_variation)

from .conftest import random_joint


def _dist(shape):
    """Hypothesis strategy for a strictly normalised table of the given shape."""
    return arrays(float, shape, elements=st.floats(0.0, 1.0)).filter(
        lambda a: a.sum() > 1e-3).map(lambda a: Dist(a / a.sum()))


class TestDist:
    def test_rejects_unnormalised(self):
        with pytest.raises(ValueError):
            Dist(np.array([0.5, 0.6]))

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            Dist(np.array([1.5, -0.5]))

    def test_immutable(self):
        d = Dist(np.array([0.5, 0.5]))
        with pytest.raises(ValueError):
            d.probs[0] = 1.0

    def test_marginal_order_follows_request(self):
        p = random_joint(np.random.default_rng(0), (2, 3, 4))
        d = Dist(p)
        assert d.marginal((2, 0)).shape == (4, 2)
        np.testing.assert_allclose(d.marginal((2, 0)), p.sum(axis=1).T)

    def test_empty_or_repeated_coords(self):
        d = Dist.uniform(2, 2)
        with pytest.raises(ValueError):
            shannon_entropy(d, ())
        with pytest.raises(ValueError):
            d.marginal((0, 0))


class TestExamples:
    def test_entropy_values(self):
        assert shannon_entropy(Dist.uniform(2)) == pytest.approx(1.0)
        assert shannon_entropy(Dist(np.array([1.0, 0.0]))) == 0.0
        assert shannon_entropy(Dist(np.array([0.25, 0.75]))) == pytest.approx(0.8112781244591328)

    def test_conditional_entropy_cases(self):
        d = product([0.3, 0.7], [0.1, 0.2, 0.7])
        assert conditional_entropy(d, (0,), (1,)) == pytest.approx(shannon_entropy(d, (0,)))
        copy = Dist(np.diag([0.2, 0.8]))
        assert conditional_entropy(copy, (0,), (1,)) == pytest.approx(0.0, abs=1e-12)
        with pytest.raises(ValueError):
            conditional_entropy(copy, (0,), (0,))

    def test_mutual_information_cases(self):
        assert mutual_information(product([0.5, 0.5], [0.4, 0.6]), (0,), (1,)) == \
            pytest.approx(0.0, abs=1e-12)
        assert mutual_information(Dist(np.diag([0.5, 0.5])), (0,), (1,)) == pytest.approx(1.0)
        bsc = Dist(0.5 * np.array([[0.8, 0.2], [0.2, 0.8]]))
        assert mutual_information(bsc, (0,), (1,)) == pytest.approx(0.2780719051126377)

    def test_cmi_markov_chain_is_zero(self):
        # a - c - b
        pc = np.array([0.3, 0.7])
        pa_c = np.array([[0.9, 0.1], [0.2, 0.8]])
        pb_c = np.array([[0.6, 0.4], [0.5, 0.5]])
        joint = np.einsum("c,ca,cb->abc", pc, pa_c, pb_c)
        d = Dist(joint)
        assert conditional_mutual_information(d, (0,), (1,), (2,)) == pytest.approx(0, abs=1e-12)

    def test_cmi_trivial_condition(self):
        p = random_joint(np.random.default_rng(3), (2, 3, 1))
        d = Dist(p)
        assert conditional_mutual_information(d, (0,), (1,), (2,)) == \
            pytest.approx(mutual_information(d, (0,), (1,)), abs=1e-12)

    def test_kl(self):
        p = Dist(np.array([1.0, 0.0]))
        assert kl_divergence(p, p) == 0.0
        assert kl_divergence(p, Dist.uniform(2)) == pytest.approx(1.0)
        assert kl_divergence(p, Dist(np.array([0.0, 1.0]))) == math.inf
        with pytest.raises(ValueError):
            kl_divergence(p, Dist.uniform(3))

    def test_tv(self):
        p = Dist(np.array([1.0, 0.0]))
        assert total_variation(p, p) == 0.0
        assert total_variation(p, Dist(np.array([0.0, 1.0]))) == 1.0
        assert total_variation(p, Dist.uniform(2)) == pytest.approx(0.5)

    def test_gamma(self):
        assert gamma_bound(7, 0.0) == 0.0
        assert gamma_bound(2, 0.5) == pytest.approx(1.5)
        assert gamma_bound(4, 0.25) == pytest.approx(1.3112781244591327)
        with pytest.raises(ValueError):
            gamma_bound(2, 1.5)
        with pytest.raises(ValueError):
            binary_entropy(-0.1)

    def test_fannes_arities(self):
        d = Dist.uniform(2, 3)
        assert fannes_bound(d, 0.1) == pytest.approx(gamma_bound(5, 0.1))
        assert alicki_fannes_bound(d, (0,), 0.1) == pytest.approx(gamma_bound(2, 0.1))


@given(_dist((3, 2)))
def test_basic_inequalities(d):
    assert shannon_entropy(d) >= -1e-12
    assert conditional_entropy(d, (0,), (1,)) <= shannon_entropy(d, (0,)) + 1e-12
    assert mutual_information(d, (0,), (1,)) >= -1e-12


@given(_dist((2, 3)))
def test_symmetry(d):
    assert abs(mutual_information(d, (0,), (1,)) - mutual_information(d, (1,), (0,))) < 1e-12


@given(_dist((2, 2, 2, 2)))
def test_chain_rule(d):
    # coords: M1, M2, X, Y
    lhs = conditional_mutual_information(d, (0, 1), (2,), (3,))
    rhs = (conditional_mutual_information(d, (0,), (2,), (3,))
           + conditional_mutual_information(d, (1,), (2,), (3, 0)))
    assert abs(lhs - rhs) < 1e-9


@given(_dist((4,)), _dist((4,)))
def test_pinsker(p, q):
    l1 = 2 * total_variation(p, q)
    assert kl_divergence(p, q) >= l1 ** 2 / (2 * math.log(2)) - 1e-12


@given(st.integers(1, 16), st.floats(0, 0.5), st.floats(0, 0.5))
def test_gamma_monotone_on_half(d, a, b):
    lo, hi = sorted((a, b))
    assert gamma_bound(d, lo) <= gamma_bound(d, hi) + 1e-12


def test_alicki_fannes_random(rng):
    checked = 0
    for _ in range(500):
        mu = random_joint(rng, (2, 3), sparsity=0.3)
        nu = random_joint(rng, (2, 3), sparsity=0.3)
        delta = total_variation(Dist(mu), Dist(nu))
        if delta > 0.5:
            continue
        checked += 1
        gap = abs(conditional_entropy(Dist(mu), (0,), (1,)) - conditional_entropy(Dist(nu), (0,), (1,)))
        assert gap <= gamma_bound(2, delta) + 1e-12
    assert checked > 50
