import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qcollapse.cnf import brute_force_projected_counts, projected_counts, to_dimacs
from qcollapse.compiler import (GateBuilder, WireBundle, add_bundles, compare_geq, encode_monomial,
                                mtp_to_sat, scale_by_constant)
from qcollapse.errors import InputError
from qcollapse.poly import MtpInstance, MultilinearPoly, brute_force_decide

from conftest import random_instance
from oracles import bundle_int, satisfying_rows, wire_value


def inputs_to_rows(builder, n_inputs):
    """Map each input assignment to the list of its satisfying full assignments."""
    rows = satisfying_rows(builder.num_vars, builder.clauses)
    table = {}
    for r in rows:
        table.setdefault(tuple(int(r[v]) for v in range(1, n_inputs + 1)), []).append(r)
    return table


class TestMonomial:
    def test_pair_clauses(self):
        b = GateBuilder(2)
        g, cl = encode_monomial((1, 2), b)
        assert g == 3
        assert set(cl) == {(-3, 1), (-3, 2), (3, -1, -2)}

    def test_singleton_is_the_variable(self):
        b = GateBuilder(3)
        g, cl = encode_monomial((3,), b)
        assert g == 3 and cl == [] and b.num_vars == 3

    def test_empty_is_constant_true(self):
        g, cl = encode_monomial((), GateBuilder(2))
        assert g is True and cl == []

    def test_triple_truth_table(self):
        b = GateBuilder(3)
        g, cl = encode_monomial((1, 2, 3), b)
        assert len(cl) == 4 and b.num_vars == 4
        table = inputs_to_rows(b, 3)
        assert len(table) == 8
        for x, rows in table.items():
            assert len(rows) == 1
            assert wire_value(g, rows[0]) == int(all(x))


class TestScale:
    def test_one(self):
        assert scale_by_constant(7, 1).bits == (7,)

    def test_five(self):
        assert scale_by_constant(7, 5).bits == (7, False, 7)

    def test_minus_three_width_four(self):
        bundle = scale_by_constant(1, -3, 4)
        assert bundle.width == 4 and bundle.signed
        for g in (0, 1):
            row = np.array([False, bool(g)])
            assert bundle_int(bundle.bits, True, row) == (-3 if g else 0)

    def test_overflow(self):
        with pytest.raises(InputError):
            scale_by_constant(1, 9, 4)

    @given(st.integers(-64, 63), st.integers(7, 9))
    def test_signed_values(self, v, width):
        bundle = scale_by_constant(1, v, width)
        for g in (0, 1):
            assert bundle_int(bundle.bits, True, np.array([False, bool(g)])) == v * g


class TestAdd:
    def test_constants(self):
        b = GateBuilder(0)
        out = add_bundles(WireBundle((True,), False), WireBundle((False,), False), b)
        assert bundle_int(out.bits, False, np.array([False])) == 1 and b.clauses == []

    def test_exhaustive_three_bit(self):
        b = GateBuilder(6)
        a = WireBundle((1, 2, 3), signed=False)
        c = WireBundle((4, 5, 6), signed=False)
        out = add_bundles(a, c, b)
        assert out.width == 4
        table = inputs_to_rows(b, 6)
        assert len(table) == 64
        for x, rows in table.items():
            assert len(rows) == 1
            va = x[0] + 2 * x[1] + 4 * x[2]
            vc = x[3] + 2 * x[4] + 4 * x[5]
            assert bundle_int(out.bits, False, rows[0]) == va + vc

    def test_signed_exhaustive(self):
        b = GateBuilder(6)
        out = add_bundles(WireBundle((1, 2, 3)), WireBundle((4, 5, 6)), b)
        for x, rows in inputs_to_rows(b, 6).items():
            r = rows[0]
            va = bundle_int((1, 2, 3), True, r)
            vc = bundle_int((4, 5, 6), True, r)
            assert len(rows) == 1 and bundle_int(out.bits, True, r) == va + vc

    def test_zero_identity(self):
        b = GateBuilder(3)
        out = add_bundles(WireBundle((1, 2, 3), False), WireBundle((False,), False), b)
        for x, rows in inputs_to_rows(b, 3).items():
            assert bundle_int(out.bits, False, rows[0]) == x[0] + 2 * x[1] + 4 * x[2]

    def test_mixed_signedness(self):
        with pytest.raises(InputError):
            add_bundles(WireBundle((1,), True), WireBundle((2,), False), GateBuilder(2))


class TestCompare:
    def test_zero_threshold_unsigned(self):
        g, cl = compare_geq(WireBundle((1, 2), False), 0, GateBuilder(2))
        assert g is True and cl == []

    def test_unreachable(self):
        g, cl = compare_geq(WireBundle((1, 2, 3), False), 8, GateBuilder(3))
        assert g is False and cl == []

    @pytest.mark.parametrize("signed", [False, True])
    @pytest.mark.parametrize("t", range(-5, 9))
    def test_width_three(self, signed, t):
        b = GateBuilder(3)
        g, _ = compare_geq(WireBundle((1, 2, 3), signed), t, b)
        table = inputs_to_rows(b, 3)
        assert len(table) == 8
        for x, rows in table.items():
            assert len(rows) == 1
            v = bundle_int((1, 2, 3), signed, rows[0])
            assert wire_value(g, rows[0]) == int(v >= t)


def witness_set(inst):
    return set(brute_force_decide(inst).witnesses)


class TestMtpToSat:
    def test_product(self):
        inst = MtpInstance(MultilinearPoly(2, 2, 0, {(1, 2): 1}), 1, 1, 2)
        assert brute_force_projected_counts(mtp_to_sat(inst)) == {(1, 1): 1}

    def test_unreachable_threshold(self):
        inst = MtpInstance(MultilinearPoly(1, 1, 0, {(1,): 1}), 2, 1, 3)
        f = mtp_to_sat(inst)
        assert brute_force_projected_counts(f) == {}
        assert f.is_unsat_marker()

    def test_average(self):
        inst = MtpInstance(MultilinearPoly(2, 1, 1, {(1,): 1, (2,): 1}), Fraction(1, 2), Fraction(1, 2), 3)
        counts = brute_force_projected_counts(mtp_to_sat(inst))
        assert counts == {(0, 1): 1, (1, 0): 1, (1, 1): 1}

    def test_witness_count_preserved(self, rng):
        for _ in range(40):
            inst = random_instance(rng, int(rng.integers(1, 7)), terms=4)
            f = mtp_to_sat(inst)
            if f.num_vars > 20:
                counts = projected_counts(f)
            else:
                counts = brute_force_projected_counts(f)
            assert set(counts) == witness_set(inst)
            assert all(v == 1 for v in counts.values())

    def test_negative_coefficients(self):
        # P = 1 - y1 y2 takes the value 1 except at (1, 1)
        inst = MtpInstance(MultilinearPoly(2, 2, 0, {(): 1, (1, 2): -1}), 1, 1, 2)
        assert set(brute_force_projected_counts(mtp_to_sat(inst))) == {(0, 0), (0, 1), (1, 0)}

    def test_deterministic(self, rng):
        inst = random_instance(rng, 6)
        assert to_dimacs(mtp_to_sat(inst)) == to_dimacs(mtp_to_sat(inst))

    def test_originals_first(self, rng):
        inst = random_instance(rng, 5)
        f = mtp_to_sat(inst)
        assert f.original_vars == tuple(range(1, 6))
        assert all(v > 5 for v in f.aux_vars)

    def test_size_polynomial(self, rng):
        # clause count grows roughly linearly in terms * width
        for n in (4, 6, 8):
            inst = random_instance(rng, n, terms=8, bound=15)
            f = mtp_to_sat(inst)
            width = max(abs(v) for v in inst.poly.terms.values()).bit_length() + 5
            assert len(f.clauses) <= 60 * len(inst.poly.terms) * width
