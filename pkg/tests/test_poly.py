import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qcollapse.errors import BudgetError, InputError
from qcollapse.poly import (MtpInstance, MultilinearPoly, Promise, brute_force_decide, check_instance_range,
                            classify_promise, descaled, evaluate, evaluate_all, instance_from_json,
                            instance_to_json)

from conftest import random_instance


def mk(n, terms, ell=0, a=1, gap=1, den=None):
    return MtpInstance(MultilinearPoly(n, max([len(k) for k in terms] + [0]), ell, terms, scale_den=den),
                       Fraction(a), Fraction(gap), 2)


class TestEvaluate:
    def test_single_monomial(self):
        p = MultilinearPoly(2, 2, 0, {(1, 2): 1})
        assert evaluate(p, (1, 1)) == 1
        assert evaluate(p, (1, 0)) == 0

    def test_empty_poly_is_zero(self):
        p = MultilinearPoly(3, 2, 0, {})
        assert all(evaluate(p, y) == 0 for y in itertools.product((0, 1), repeat=3))

    def test_length_mismatch(self):
        with pytest.raises(InputError):
            evaluate(MultilinearPoly(2, 1, 0, {(1,): 1}), (1,))

    def test_vectorized_matches_pointwise(self, rng):
        for _ in range(20):
            inst = random_instance(rng, int(rng.integers(1, 8)))
            table = evaluate_all(inst.poly)
            for x, y in enumerate(itertools.product((0, 1), repeat=inst.num_vars)):
                assert table[x] == evaluate(inst.poly, y)

    @given(st.integers(1, 6), st.data())
    def test_multilinear_in_each_coordinate(self, n, data):
        rng = np.random.default_rng(data.draw(st.integers(0, 10**6)))
        inst = random_instance(rng, n)
        y = list(data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)))
        i = data.draw(st.integers(0, n - 1))
        y0, y1 = list(y), list(y)
        y0[i], y1[i] = 0, 1
        # affine in y_i: the value at y equals the interpolation between 0 and 1
        v0, v1 = evaluate(inst.poly, y0), evaluate(inst.poly, y1)
        assert evaluate(inst.poly, y) == v0 + y[i] * (v1 - v0)


class TestInvariants:
    def test_zero_coefficient_rejected(self):
        with pytest.raises(InputError):
            MultilinearPoly(2, 2, 0, {(1,): 0})

    def test_degree_bound_enforced(self):
        with pytest.raises(InputError):
            MultilinearPoly(3, 1, 0, {(1, 2): 1})

    def test_variable_range(self):
        with pytest.raises(InputError):
            MultilinearPoly(2, 2, 0, {(3,): 1})

    def test_duplicate_keys_rejected(self):
        with pytest.raises(InputError):
            MultilinearPoly(2, 2, 0, {(1, 2): 1, (2, 1): 1})

    def test_threshold_on_grid(self):
        with pytest.raises(InputError):
            MtpInstance(MultilinearPoly(1, 1, 0, {(1,): 1}), Fraction(1, 3), Fraction(1, 2), 3)

    def test_range_check(self):
        bad = mk(1, {(1,): 3}, ell=1)
        with pytest.raises(InputError):
            check_instance_range(bad)


class TestDecide:
    def test_identity(self):
        assert brute_force_decide(mk(1, {(1,): 1})).witnesses == ((1,),)

    def test_threshold_above_max(self):
        assert not brute_force_decide(mk(1, {(1,): 1}, a=2)).yes

    def test_average_unique(self):
        inst = mk(2, {(1,): 1, (2,): 1}, ell=1, a=1, gap=Fraction(1, 2))
        assert brute_force_decide(inst).witnesses == ((1, 1),)

    def test_promises(self):
        assert classify_promise(mk(2, {(1, 2): 1})) is Promise.UNIQUE_YES
        assert classify_promise(mk(2, {(1,): 1, (2,): 1, (1, 2): -1})) is Promise.MULTI_YES
        assert classify_promise(mk(2, {}, a=Fraction(1, 2), gap=Fraction(1, 2))) is Promise.NO

    def test_budget(self):
        with pytest.raises(BudgetError):
            brute_force_decide(mk(30, {(1,): 1}), budget=24)

    def test_witnesses_agree_with_evaluate(self, rng):
        for _ in range(30):
            inst = random_instance(rng, int(rng.integers(1, 7)))
            w = brute_force_decide(inst).witnesses
            assert list(w) == sorted(w)
            for y in itertools.product((0, 1), repeat=inst.num_vars):
                assert (y in w) == (descaled(inst.poly, y) >= inst.threshold)


class TestJson:
    def test_roundtrip_bit_exact(self, rng):
        for _ in range(20):
            inst = random_instance(rng, int(rng.integers(1, 8)))
            text = instance_to_json(inst)
            back = instance_from_json(text)
            assert back == inst
            assert instance_to_json(back) == text

    def test_malformed(self):
        with pytest.raises(InputError):
            instance_from_json("{\"num_vars\": 2}")
