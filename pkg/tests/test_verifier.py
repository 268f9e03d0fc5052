import itertools
import math
from fractions import Fraction
from math import comb, factorial

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qcollapse.clausepoly import cnf_to_mtp
from qcollapse.cnf import CnfFormula
from qcollapse.errors import BudgetError, DegenerateInstanceError
from qcollapse.poly import MtpInstance, MultilinearPoly, Promise, descaled
from qcollapse.verifier import (ProofOracle, acceptance_dp, acceptance_from_weights,
                                acceptance_probability_exact, build_verifier, check_pcp_contract, chernoff_upper,
                                hadamard_test_statevector, hoeffding_tail, nominal_repetitions, run_verifier,
                                sample_round, signed_weights)

from conftest import random_instance


def trinomial_oracle(wp, wm, total, T, c):
    """Direct double sum over (#plus, #minus)."""
    wz = total - wp - wm
    num = 0
    for i in range(T + 1):
        for j in range(T - i + 1):
            if i - j >= c:
                num += factorial(T) // (factorial(i) * factorial(j) * factorial(T - i - j)) \
                    * wp ** i * wm ** j * wz ** (T - i - j)
    return Fraction(num, total ** T)


def inst_of(terms, n, a, gap, den=None):
    deg = max([len(S) for S in terms] + [0])
    return MtpInstance(MultilinearPoly(n, deg, 0, terms, scale_den=den), Fraction(a), Fraction(gap), 3)


class TestSpec:
    def test_clamped_thresholds(self):
        spec = build_verifier(inst_of({(1, 2): 1}, 2, 1, Fraction(1, 2)))
        assert spec.total_weight == 1
        assert spec.completeness_raw == Fraction(3, 2) and spec.completeness == 1
        assert spec.soundness == Fraction(1, 2)

    def test_symmetric_pair(self):
        spec = build_verifier(inst_of({(1,): 3, (2,): -3}, 2, 0, 1, den=4))
        assert spec.total_weight == Fraction(6, 4)

    def test_gap_identity_on_clause_polys(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            clauses = [tuple(int(v) * int(rng.choice([-1, 1])) for v in rng.choice(5, 3, replace=False) + 1)
                       for _ in range(int(rng.integers(1, 9)))]
            inst = cnf_to_mtp(CnfFormula(5, clauses))
            spec = build_verifier(inst)
            assert spec.completeness_raw - spec.soundness_raw == 2 * inst.gap / spec.total_weight

    def test_repetitions_and_queries(self, rng):
        for _ in range(10):
            inst = random_instance(rng, 5)
            if not inst.poly.terms:
                continue
            spec = build_verifier(inst)
            assert spec.repetitions >= math.ceil(2 * math.log(6) / float(inst.gap) ** 2)
            assert spec.query_bound == max(len(S) for S in inst.poly.terms)
            assert spec.proof_length == 5

    def test_zero_polynomial(self):
        with pytest.raises(DegenerateInstanceError):
            build_verifier(inst_of({}, 2, 0, 1))


class TestRounds:
    def test_satisfied_monomial(self):
        spec = build_verifier(inst_of({(1, 2): 1}, 2, 1, 1))
        rng = np.random.default_rng(0)
        assert all(sample_round(spec, (1, 1), rng) == 1 for _ in range(50))

    def test_missing_factor(self):
        spec = build_verifier(inst_of({(1, 2): 1}, 2, 1, 1))
        rng = np.random.default_rng(0)
        assert all(sample_round(spec, (1, 0), rng) == 0 for _ in range(50))

    def test_unbiased_exactly(self, rng):
        for _ in range(20):
            inst = random_instance(rng, 4)
            if not inst.poly.terms:
                continue
            spec = build_verifier(inst)
            for y in itertools.product((0, 1), repeat=4):
                wp, wm = signed_weights(spec, y)
                # E[B v] = B (wp - wm) / total = P(y)
                assert Fraction(wp - wm, spec.denominator) == descaled(inst.poly, y)

    def test_two_monomials_expectation(self):
        spec = build_verifier(inst_of({(1,): 1, (2,): -1}, 2, 0, 1, den=2))
        rng = np.random.default_rng(4)
        vals = [sample_round(spec, (1, 0), rng) for _ in range(20000)]
        assert abs(np.mean(vals) * float(spec.total_weight) - 0.5) < 0.02

    def test_query_bound(self, rng):
        inst = random_instance(rng, 6, degree=3)
        spec = build_verifier(inst, repetitions=200)
        for y in itertools.product((0, 1), repeat=6):
            run = run_verifier(spec, y, 7, vectorized=False)
            assert run.max_queries <= spec.query_bound

    def test_vectorized_matches_loop(self, rng):
        inst = random_instance(rng, 5)
        spec = build_verifier(inst, repetitions=300)
        for s in range(5):
            y = tuple(int(b) for b in rng.integers(0, 2, 5))
            assert run_verifier(spec, y, s) == run_verifier(spec, y, s, vectorized=False)


class TestRun:
    def test_accept_always(self):
        spec = build_verifier(inst_of({(1,): 1}, 1, 1, 1))
        assert all(run_verifier(spec, (1,), s).accepted for s in range(20))
        assert acceptance_probability_exact(spec, (1,)) == 1

    def test_reject_always(self):
        spec = build_verifier(inst_of({(1,): 1}, 1, 1, 1))
        assert not any(run_verifier(spec, (0,), s).accepted for s in range(20))
        assert acceptance_probability_exact(spec, (0,)) == 0

    def test_tie_counts_as_accept(self):
        spec = build_verifier(inst_of({(1,): 1}, 1, 1, 1), cut="threshold")
        assert spec.min_net == spec.repetitions

    def test_monte_carlo_matches_exact(self):
        inst = inst_of({(1,): 2, (2,): -1, (1, 2): 1}, 2, Fraction(1, 2), Fraction(1, 4), den=4)
        spec = build_verifier(inst, repetitions=25)
        for y in itertools.product((0, 1), repeat=2):
            p = float(acceptance_probability_exact(spec, y))
            n = 20000
            rate = np.mean([run_verifier(spec, y, s).accepted for s in range(n)])
            assert abs(rate - p) <= 3 * math.sqrt(max(p * (1 - p), 1e-12) / n) + 1e-12


class TestExactOracle:
    @given(st.integers(0, 6), st.integers(0, 6), st.integers(0, 6), st.integers(1, 12), st.integers(-14, 14))
    def test_closed_form_matches_trinomial_sum(self, wp, wm, wz, T, c):
        total = wp + wm + wz
        if total == 0:
            return
        expected = trinomial_oracle(wp, wm, total, T, c)
        assert acceptance_from_weights(wp, wm, total, T, c) == expected
        assert acceptance_dp(wp, wm, total, T, c) == expected

    def test_symmetric_binomial_tail(self):
        T = 40
        for c in (0, 2, 6):
            direct = Fraction(sum(comb(T, i) for i in range(T + 1) if 2 * i - T >= c), 2 ** T)
            assert acceptance_from_weights(1, 1, 2, T, c) == direct

    def test_larger_t(self):
        assert acceptance_from_weights(3, 2, 7, 300, 20) == acceptance_dp(3, 2, 7, 300, 20)

    def test_limit(self):
        spec = build_verifier(inst_of({(1,): 1}, 1, 1, 1), repetitions=20000)
        with pytest.raises(BudgetError):
            acceptance_probability_exact(spec, (1,))

    def test_hoeffding_consistency(self, rng):
        for _ in range(10):
            inst = random_instance(rng, 3, bound=2)
            if not inst.poly.terms:
                continue
            spec = build_verifier(inst)
            if spec.repetitions > 3000:
                continue
            for y in itertools.product((0, 1), repeat=3):
                p = acceptance_probability_exact(spec, y)
                v = descaled(inst.poly, y)
                if v >= inst.threshold:
                    assert p >= 1 - spec.fail_budget
                elif v <= inst.threshold - inst.gap:
                    assert p <= spec.fail_budget

    @given(st.integers(0, 6), st.integers(0, 6), st.integers(0, 6), st.integers(1, 40), st.integers(-5, 40))
    def test_chernoff_bound_is_an_upper_bound(self, wp, wm, wz, T, c):
        total = wp + wm + wz
        if total == 0:
            return
        exact = acceptance_dp(wp, wm, total, T, c)
        assert chernoff_upper(wp, wm, total, T, c) >= float(exact) * (1 - 1e-12)

    def test_plain_integer_path(self):
        # the oracle must not depend on the optional GMP integers
        from qcollapse.verifier import _acceptance_num
        num, den = _acceptance_num(3, 2, 2, 7, 200, 9)
        assert type(num) is int and Fraction(num, den) == acceptance_dp(3, 2, 7, 200, 9)

    def test_hoeffding_tail_bound(self):
        assert hoeffding_tail(Fraction(1), Fraction(1, 2), 0) == 1.0
        assert hoeffding_tail(Fraction(1), Fraction(1, 2), 100) < 1e-5


class TestContract:
    def test_unique_clause_instance(self):
        inst = cnf_to_mtp(CnfFormula(2, [(1,), (-2,)]))
        rep = check_pcp_contract(build_verifier(inst), inst, mode="exact")
        assert rep.promise is Promise.UNIQUE_YES and rep.holds
        assert rep.witnesses == ((1, 0),)

    def test_no_instance(self):
        inst = cnf_to_mtp(CnfFormula(1, [(1,), (-1,)]))
        rep = check_pcp_contract(build_verifier(inst), inst, mode="exact", full_table=True)
        assert rep.promise is Promise.NO and rep.holds and rep.max_other_acceptance <= Fraction(1, 3)

    def test_multi_yes_is_a_violation(self):
        inst = cnf_to_mtp(CnfFormula(2, [(1, 2)]))
        rep = check_pcp_contract(build_verifier(inst), inst, mode="exact")
        assert rep.promise is Promise.MULTI_YES and not rep.holds

    def test_pareto_front_agrees_with_full_table(self, rng):
        for _ in range(8):
            inst = random_instance(rng, 4, bound=2)
            if not inst.poly.terms:
                continue
            spec = build_verifier(inst, repetitions=30)
            a = check_pcp_contract(spec, inst, mode="exact")
            b = check_pcp_contract(spec, inst, mode="exact", full_table=True)
            assert a.max_other_acceptance == b.max_other_acceptance and a.holds == b.holds
            for y in itertools.product((0, 1), repeat=4):
                assert b.acceptance(y) == acceptance_probability_exact(spec, y)

    def test_screened_maximum_is_exact_at_larger_t(self):
        # many classes, T large enough that the Chernoff screen skips some of them
        inst = cnf_to_mtp(CnfFormula(4, [(1, 2), (-1, 3), (2, -3, 4), (-2, -4), (1, 4), (3, -4)]))
        spec = build_verifier(inst, repetitions=400)
        a = check_pcp_contract(spec, inst, mode="exact")
        b = check_pcp_contract(spec, inst, mode="exact", full_table=True)
        assert a.max_other_acceptance == b.max_other_acceptance and a.holds == b.holds
        assert len(a.table) < len(b.table)


class TestHadamard:
    @pytest.mark.parametrize("q", range(0, 5))
    def test_statevector_law(self, q):
        for y in itertools.product((0, 1), repeat=q):
            prob = hadamard_test_statevector(y, tuple(range(1, q + 1)))
            phase = -1.0 if all(y) else 1.0  # exp(i pi prod y)
            assert prob == pytest.approx((1 + phase) / 2, abs=1e-12)
