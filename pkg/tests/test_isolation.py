import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qcollapse.cnf import CnfFormula, brute_force_projected_counts, projected_counts, to_dimacs
from qcollapse.errors import BudgetError, InputError
from qcollapse.isolation import (HashConstraint, draw_hash, encode_xor_row, exact_isolation_probability,
                                 isolate, isolation_success, parity_clauses)

from oracles import satisfying_rows


def unsat_formula(rng, n):
    """Random clauses plus a contradiction on a random original."""
    clauses = []
    for _ in range(int(rng.integers(0, 8))):
        vs = rng.choice(n, size=min(3, n), replace=False) + 1
        clauses.append(tuple(int(v) * (1 if rng.integers(2) else -1) for v in vs))
    v = int(rng.integers(1, n + 1))
    clauses += [(v,), (-v,)] if rng.integers(2) else [(v, v), (-v,)]
    return CnfFormula(n, clauses)


class TestXorEncoding:
    @pytest.mark.parametrize("L", range(0, 8))
    @pytest.mark.parametrize("parity", [0, 1])
    def test_row_semantics(self, L, parity):
        lits = list(range(1, L + 1))
        n, clauses, roles = encode_xor_row(lits, parity, L, "r")
        aux = n - L
        assert aux == (max(0, -(-(L - 3) // 2)) if L else parity)
        if L:
            assert aux <= max(0, -(-L // 2) - 1)
        rows = satisfying_rows(n, clauses)
        seen = {}
        for r in rows:
            x = tuple(int(r[v]) for v in lits)
            seen[x] = seen.get(x, 0) + 1
        expected = {x for x in itertools.product((0, 1), repeat=L) if sum(x) % 2 == parity}
        assert set(seen) == expected
        assert all(c == 1 for c in seen.values())

    def test_parity_clauses_count(self):
        assert len(parity_clauses([1, 2, 3], 0)) == 4


class TestIsolate:
    def test_family_shape(self):
        f = CnfFormula(3, [(1, 2)])
        out = isolate(f, 11)
        assert len(out) == 4
        for k, g in enumerate(out, start=1):
            assert g.original_vars == f.original_vars
            assert g.clauses[: len(f.clauses)] == f.clauses

    def test_deterministic(self):
        f = CnfFormula(4, [(1, -2, 3)])
        a = [to_dimacs(g) for g in isolate(f, 99)]
        b = [to_dimacs(g) for g in isolate(f, 99)]
        assert a == b
        assert draw_hash(4, 99) == draw_hash(4, 99)

    def test_unsat_stays_unsat(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            f = unsat_formula(rng, int(rng.integers(1, 6)))
            for seed in range(10):
                assert all(projected_counts(g, limit=1) == {} for g in isolate(f, seed))

    @given(st.integers(0, 2**63 - 1))
    def test_never_adds_witnesses(self, seed):
        f = CnfFormula(4, [(1, 2), (-3, 4)])
        base = brute_force_projected_counts(f)
        for g in isolate(f, seed):
            counts = projected_counts(g)
            assert set(counts) <= set(base)
            assert all(v == 1 for v in counts.values())
        h = draw_hash(4, seed)
        for k, g in enumerate(isolate(f, seed), start=1):
            expected = {x for x in base if h.prefix(k).holds(x)}
            assert set(projected_counts(g)) == expected

    def test_vacuous_row_keeps_unique_witness(self):
        f = CnfFormula(2, [(1,), (-2,)])
        row = HashConstraint((((), 0),))
        assert row.holds((1, 0))
        n, clauses, _ = encode_xor_row([], 0, 2, "r")
        g = f.with_clauses(clauses, n, {})
        assert projected_counts(g) == {(1, 0): 1}

    def test_needs_originals(self):
        with pytest.raises(InputError):
            isolate(CnfFormula(1, [(1,)], {}), 0)


class TestSuccess:
    def test_unsat_none(self):
        assert isolation_success(CnfFormula(2, [(1,), (-1,)]), 5) is None

    def test_single_witness_succeeds(self):
        f = CnfFormula(3, [(1,), (-2,), (3,)])
        hits = [isolation_success(f, s) for s in range(50)]
        assert sum(h is not None for h in hits) >= 25

    def test_budget(self):
        with pytest.raises(BudgetError):
            isolation_success(CnfFormula(30, []), 0, budget=24)

    def test_two_witness_rate_matches_exact_probability(self):
        # witnesses 01 and 10 over two variables
        f = CnfFormula(2, [(1, 2), (-1, -2)])
        p = exact_isolation_probability([(0, 1), (1, 0)], 2)
        n = 10000
        hits = sum(isolation_success(f, s) is not None for s in range(n))
        pf = float(p)
        half = 2.576 * np.sqrt(pf * (1 - pf) / n)
        assert abs(hits / n - pf) <= half


class TestPairwiseIndependence:
    @pytest.mark.parametrize("n,k", [(2, 1), (2, 2), (3, 2), (3, 3), (4, 1), (4, 2)])
    def test_exhaustive(self, n, k):
        # enumerate every (A, b) with k rows; count (h(x), h(x')) for x != x'
        points = list(itertools.product((0, 1), repeat=n))
        pairs = [(points[i], points[j]) for i in range(len(points)) for j in range(i + 1, len(points))][:6]
        rows = list(itertools.product((0, 1), repeat=n + 1))
        total = len(rows) ** k
        for x, xp in pairs:
            hist = {}
            for combo in itertools.product(rows, repeat=k):
                hx = tuple((sum(a * b for a, b in zip(r[:n], x)) + r[n]) % 2 for r in combo)
                hxp = tuple((sum(a * b for a, b in zip(r[:n], xp)) + r[n]) % 2 for r in combo)
                hist[(hx, hxp)] = hist.get((hx, hxp), 0) + 1
            assert len(hist) == 4 ** k
            assert all(Fraction(v, total) == Fraction(1, 4 ** k) for v in hist.values())

    def test_draw_hash_rows_are_uniform(self):
        # empirical check that the seeded generator feeds unbiased bits
        counts = np.zeros(4)
        for s in range(2000):
            h = draw_hash(3, s)
            S, p = h.rows[0]
            counts[int(1 in S) * 2 + p] += 1
        assert np.all(np.abs(counts / 2000 - 0.25) < 0.05)
