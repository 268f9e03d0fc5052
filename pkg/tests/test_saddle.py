import math
import warnings

import numpy as np
import pytest

from qcollapse.errors import BudgetError, InputError
from qcollapse.saddle import (Certificate, DensityMatrix, Observable, check_collapse_structure,
                              consistent_set, ent_bounded_set, full_set, is_ppt, level_parameters,
                              matrix_from_json, matrix_to_json, mmw_level2, parse_set_spec, partial_trace,
                              partial_transpose, purified_net, random_observable, random_state,
                              reduced_program, ree_bound, ree_upper, rel_entropy, separable_set,
                              solve_level2, solve_nested_level3, solve_reduced, von_neumann)
from qcollapse.saddle.solvers import certify_member
from qcollapse.saddle.states import project_to_state, swap_registers

LN2 = math.log(2)
BELL = np.zeros(4, complex)
BELL[[0, 3]] = 1 / math.sqrt(2)
BELL_RHO = np.outer(BELL, BELL.conj())


def ket(*bits, d=2):
    v = np.zeros(d ** len(bits), complex)
    v[int("".join(map(str, bits)), d)] = 1
    return v


def fibonacci_sphere(n):
    """Pure qubit states on a Fibonacci lattice of the Bloch sphere."""
    i = np.arange(n) + 0.5
    z = 1 - 2 * i / n
    phi = math.pi * (1 + 5 ** 0.5) * i
    r = np.sqrt(1 - z * z)
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def bloch_to_rho(vecs):
    x, y, z = vecs.T
    rho = np.empty((len(vecs), 2, 2), complex)
    rho[:, 0, 0] = (1 + z) / 2
    rho[:, 1, 1] = (1 - z) / 2
    rho[:, 0, 1] = (x - 1j * y) / 2
    rho[:, 1, 0] = (x + 1j * y) / 2
    return rho


def grid_maxmin(R, rhos, sigmas, chunk=500):
    """max over ``rhos`` of min over ``sigmas`` of Tr(R (rho (x) sigma)) by brute force."""
    R4 = R.reshape(2, 2, 2, 2)  # indices a b a' b'
    best = -np.inf
    sig_flat = sigmas.reshape(len(sigmas), 4)  # (b', b) order below
    for s in range(0, len(rhos), chunk):
        r = rhos[s:s + chunk]
        # M[b, b'] = sum_{a, a'} R[a b, a' b'] rho[a', a]
        M = np.einsum("xyzw,nzx->nyw", R4, r)
        vals = np.einsum("nyw,mwy->nm", M, sigmas).real
        best = max(best, float(vals.min(axis=1).max()))
    return best


class TestStates:
    def test_density_invariants(self, rng):
        DensityMatrix(random_state(4, rng))
        with pytest.raises(InputError):
            DensityMatrix(np.diag([1.2, -0.2]))
        with pytest.raises(InputError):
            DensityMatrix(np.eye(2))
        with pytest.raises(InputError):
            Observable(2 * np.eye(2))

    def test_projection(self, rng):
        m = random_state(3, rng) + 0.05 * np.diag([1, -1, 0.5])
        rho, resid = DensityMatrix.project(m)
        assert resid > 0 and abs(np.trace(rho.entries) - 1) < 1e-12
        assert np.linalg.eigvalsh(project_to_state(m))[0] >= -1e-12

    def test_partial_trace_against_einsum(self, rng):
        rho = random_state(12, rng)
        t = rho.reshape(2, 3, 2, 2, 3, 2)
        assert np.allclose(partial_trace(rho, (2, 3, 2), 1), np.einsum("abcdbf->acdf", t).reshape(4, 4))
        assert np.allclose(partial_trace(rho, (2, 3, 2), [0, 2]), np.einsum("abcaec->be", t))

    def test_partial_transpose_and_ppt(self, rng):
        pt = partial_transpose(BELL_RHO, (2, 2), 1)
        assert np.allclose(np.sort(np.linalg.eigvalsh(pt)), [-0.5, 0.5, 0.5, 0.5])
        assert not is_ppt(BELL_RHO, (2, 2))
        assert is_ppt(np.kron(random_state(2, rng), random_state(2, rng)), (2, 2))

    def test_swap(self, rng):
        a, b = random_state(2, rng), random_state(3, rng)
        assert np.allclose(swap_registers(np.kron(a, b), 2, 3), np.kron(b, a))

    def test_json_roundtrip(self, rng):
        m = random_state(3, rng)
        back, dims = matrix_from_json(matrix_to_json(m, (3,)))
        assert np.array_equal(back, m) and dims == (3,)
        with pytest.raises(InputError):
            matrix_from_json('{"dim": 2, "entries": [[[1, 0]]]}')


class TestEntropy:
    def test_identity_case(self, rng):
        rho = random_state(3, rng)
        assert abs(rel_entropy(rho, rho)) < 1e-10

    def test_pure_against_maximally_mixed(self):
        assert rel_entropy(np.diag([1.0, 0.0]), np.eye(2) / 2) == pytest.approx(LN2, abs=1e-12)

    def test_support_violation(self):
        assert rel_entropy(np.eye(2) / 2, np.diag([1.0, 0.0])) == math.inf

    def test_von_neumann(self):
        assert von_neumann(np.eye(3) / 3) == pytest.approx(math.log(3))

    def test_product_state_is_zero(self, rng):
        rho = np.kron(random_state(2, rng), random_state(3, rng))
        assert ree_upper(rho, (2, 3)) == 0.0

    def test_bell_state(self):
        val = ree_upper(BELL_RHO, (2, 2))
        assert LN2 - 0.05 <= val <= LN2 + 0.05
        # the dephased Bell state is separable and witnesses the closed form
        witness = np.diag([0.5, 0, 0, 0.5])
        assert rel_entropy(BELL_RHO, witness) == pytest.approx(LN2, abs=1e-12)
        assert val <= rel_entropy(BELL_RHO, witness) + 1e-8

    def test_isotropic_closed_form(self):
        # REE of F |Phi><Phi| + (1-F) (I - |Phi><Phi|)/3 is ln 2 - h(F) for F >= 1/2
        F = 0.8
        rho = F * BELL_RHO + (1 - F) * (np.eye(4) - BELL_RHO) / 3
        closed = LN2 + F * math.log(F) + (1 - F) * math.log(1 - F)
        assert ree_upper(rho, (2, 2)) == pytest.approx(closed, abs=1e-4)

    def test_separable_werner(self):
        # Werner states with singlet weight p <= 1/3 are separable
        singlet = np.zeros(4, complex)
        singlet[[1, 2]] = [1 / math.sqrt(2), -1 / math.sqrt(2)]
        for p in (0.1, 0.25, 1 / 3):
            rho = p * np.outer(singlet, singlet) + (1 - p) * np.eye(4) / 4
            assert ree_upper(rho, (2, 2)) <= 0.02

    def test_pure_two_by_three(self, rng):
        psi = rng.normal(size=6) + 1j * rng.normal(size=6)
        psi /= np.linalg.norm(psi)
        rho = np.outer(psi, psi.conj())
        ent = von_neumann(partial_trace(rho, (2, 3), 1))
        assert ree_upper(rho, (2, 3)) == pytest.approx(ent, abs=1e-4)

    def test_bound_kinds(self, rng):
        assert ree_bound(np.kron(random_state(2, rng), random_state(2, rng)), (2, 2))[1] == "product"
        assert ree_bound(np.eye(4) / 4 * 0.9 + 0.1 * np.diag([1, 0, 0, 0]), (2, 2))[1] == "ppt-low-dim"


class TestSets:
    def test_separable_equals_bound_zero(self):
        assert separable_set(2, 2).canonical() == ent_bounded_set(0, 2, 2).canonical()

    def test_non_binding_is_full(self):
        assert ent_bounded_set(LN2, 2, 2).canonical() == full_set(4).canonical()

    def test_validation(self):
        with pytest.raises(InputError):
            ent_bounded_set(-1, 2, 2)
        with pytest.raises(InputError):
            consistent_set(np.eye(3) / 3, 2, (2,))
        with pytest.raises(InputError):
            parse_set_spec("blob@2")

    def test_parse(self):
        assert parse_set_spec("sep@2,2").describe() == "sep@2,2"
        assert parse_set_spec("full@4").dim == 4


class TestLevel2:
    def test_identity(self):
        res = solve_level2(np.eye(4), 2, 2)
        assert abs(res.value_lower - 1) < 1e-7 and abs(res.value_upper - 1) < 1e-7

    def test_projector_00_against_bloch_grid(self):
        R = np.outer(ket(0, 0), ket(0, 0))
        res = solve_level2(R, 2, 2)
        pts = bloch_to_rho(fibonacci_sphere(10000))
        grid = grid_maxmin(R, pts, pts)
        assert abs(grid) < 1e-3
        assert abs(res.value_lower) < 1e-7 and abs(res.value_upper) < 1e-7
        sigma = res.sigma
        assert sigma[1, 1].real > 1 - 1e-6  # the min player answers with |1><1|

    def test_random_against_ball_grid(self, rng):
        R = random_observable(4, rng)
        res = solve_level2(R, 2, 2)
        shell = fibonacci_sphere(400)
        ball = np.concatenate([shell * r for r in np.linspace(0, 1, 11)])
        grid = grid_maxmin(R, bloch_to_rho(ball), bloch_to_rho(fibonacci_sphere(3000)))
        assert grid <= res.value_upper + 1e-9
        assert res.value_lower - grid < 0.02

    def test_sion_gap(self, rng):
        for _ in range(5):
            res = solve_level2(random_observable(4, rng), 2, 2)
            assert res.gap <= 1e-6 and res.certificate is Certificate.EXACT_SDP
            DensityMatrix(res.rho)
            DensityMatrix(res.sigma)

    def test_mmw_brackets_are_valid(self, rng):
        R = random_observable(4, rng)
        exact = solve_level2(R, 2, 2)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            res = mmw_level2(R, 2, 2, tol=1e-6, max_iter=400)
        assert res.value_lower <= exact.value_upper + 1e-8
        assert res.value_upper >= exact.value_lower - 1e-8
        assert res.gap < 0.2

    def test_mmw_flags_non_convergence(self, rng):
        with pytest.warns(RuntimeWarning):
            res = mmw_level2(random_observable(4, rng), 2, 2, tol=1e-9, max_iter=100)
        assert not res.converged


class TestReduced:
    def test_full_matches_level2(self, rng):
        R = random_observable(4, rng)
        a = solve_reduced(R, full_set(2), full_set(2))
        b = solve_level2(R, 2, 2)
        assert abs(a.value - b.value) < 1e-6

    def test_separable_brackets(self, rng):
        R = random_observable(8, rng)
        res = solve_reduced(R, separable_set(2, 2), full_set(2))
        assert res.value_upper - res.value_lower <= 1e-3
        assert res.details["rho_membership"]["kind"] == "ppt-low-dim"
        assert is_ppt(res.rho, (2, 2))

    def test_non_binding_bound(self, rng):
        R = random_observable(8, rng)
        a = solve_reduced(R, ent_bounded_set(LN2, 2, 2), full_set(2))
        b = solve_reduced(R, full_set(4), full_set(2))
        assert abs(a.value - b.value) < 1e-6

    def test_monotone_in_bound(self, rng):
        R = random_observable(8, rng)
        results = [solve_reduced(R, ent_bounded_set(b, 2, 2), full_set(2)) for b in (0.0, 0.15, 0.4, LN2)]
        for lo, hi in zip(results, results[1:]):
            assert lo.value_lower <= hi.value_upper + 1e-7
        for r in results:
            assert r.value_lower <= r.value_upper + 1e-8

    def test_dimension_mismatch(self, rng):
        with pytest.raises(InputError):
            solve_reduced(random_observable(4, rng), full_set(3), full_set(2))

    def test_consistent_membership(self, rng):
        parent = random_state(2, rng)
        X = random_state(6, rng)
        state, info = certify_member(X, consistent_set(parent, 3))
        assert info["consistency_residual"] <= 1e-9
        assert np.allclose(partial_trace(state, (2, 3), 1), parent, atol=1e-9)


class TestNested:
    def test_identity(self):
        assert solve_nested_level3(np.eye(8), (2, 2, 2), None, resolution=20) == pytest.approx(1, abs=1e-7)

    def test_agrees_with_reduced(self, rng):
        R = random_observable(8, rng)
        res = solve_nested_level3(R, (2, 2, 2), None, resolution=100, full_output=True)
        red = solve_reduced(R, full_set(4), full_set(2))
        assert res.value <= red.value_upper + 1e-6
        assert abs(res.value - red.value) <= 2e-3
        assert res.consistency_residual <= 1e-9

    def test_separable_extensions(self, rng):
        R = random_observable(8, rng)
        val = solve_nested_level3(R, (2, 2, 2), 0.0, resolution=100)
        red = solve_reduced(R, separable_set(2, 2), full_set(2))
        assert abs(val - red.value) <= 2e-3

    def test_net(self):
        net = purified_net(3, 50, seed=1)
        assert len(net) == 50
        for rho in net:
            DensityMatrix(rho)
        assert all(np.array_equal(a, b) for a, b in zip(net, purified_net(3, 50, seed=1)))

    def test_budget_and_dims(self):
        with pytest.raises(BudgetError):
            solve_nested_level3(np.eye(8), (2, 2, 2), None, resolution=10 ** 6)
        with pytest.raises(InputError):
            solve_nested_level3(np.eye(16), (4, 2, 2), None, resolution=5)


class TestCollapse:
    def test_level_parameters(self):
        assert [level_parameters(L) for L in (3, 4, 5, 6)] == [(1, 0), (1, 1), (2, 1), (2, 2)]

    def test_level_six_equal(self):
        rep = check_collapse_structure(6, 0.2, 0.1)
        assert rep.status == "EQUAL"
        assert rep.program.canonical() == reduced_program(4, 0.2, 0.1).canonical()

    def test_level_five_numeric(self, rng):
        rep = check_collapse_structure(5, 0.0, LN2, observables=[random_observable(16, rng)])
        assert rep.status == "EQUAL" and rep.max_delta <= 1e-6

    def test_non_constant(self):
        assert check_collapse_structure(6, [0.1, 0.2, 0.3], 0.1).status == "NOT_APPLICABLE"

    def test_level_below_four(self):
        with pytest.raises(InputError):
            check_collapse_structure(3, 0.1, 0.1)
