"""Nested three-round evaluation and the reduced programs of higher levels.

Three rounds
------------
The literal quantifier order

    v3 = max_{rho1} min_{sigma1} max_{rho2 in S(rho1)} Tr(R (rho2 (x) sigma1))

is evaluated as follows.  For a fixed ``rho1`` the two inner quantifiers are
computed in their literal order: the innermost maximization over consistent
extensions is a linear program over a convex set, so its value equals the
optimum of its conic dual, which is *jointly* minimized with ``sigma1``:

    g(rho1) = min_{sigma1, Y, ...} Tr(Y rho1)  s.t.  Y (x) I - Tr_B(R (I (x) sigma1)) - ... >= 0.

Every ``g(rho1)`` is a valid lower bound on ``v3``.  ``g`` is concave (a
minimum of linear functions of ``rho1``) and the optimal ``Y`` is a
supergradient, so after a deterministic Halton net over purified states the
best net point is refined by Kelley's cutting-plane method.  The cut model
also yields an upper bound on ``v3``.

Higher levels
-------------
Level ``i + 2`` reduces to ``max_{rho in T^(k)} min_{sigma in T^(l)}`` with
``k = l = i/2`` for even ``i + 2`` and ``k = (i+1)/2, l = k-1`` otherwise.
``T^(m)`` lives on ``m + 1`` registers and only constrains the entanglement
between its last register and the rest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import cvxpy as cp
import numpy as np
from scipy.stats import norm, qmc

from ..errors import BudgetError, InputError
from .sets import FeasibleSetSpec, SetKind, consistent_max_dual, ent_bounded_set, full_set, psd
from .solvers import SaddleResult, certify_member, solve_reduced, solve_sdp
from .states import Observable, hermitize, partial_trace

__all__ = [
    "NET_BUDGET",
    "NestedResult",
    "NestedEvaluator",
    "purified_net",
    "solve_nested_level3",
    "level_parameters",
    "ReducedProgram",
    "reduced_program",
    "CollapseReport",
    "check_collapse_structure",
]

NET_BUDGET = 100_000
MAX_NESTED_DIM = 3


# --------------------------------------------------------------------------- nets


def purified_net(d: int, n: int, seed: int = 0) -> list[np.ndarray]:
    """Deterministic net of ``n`` states on ``C^d`` from scrambled Halton points.

    Each point is mapped to a Gaussian vector on ``C^d (x) C^d`` (inverse
    normal CDF), normalized to a pure state and reduced to ``C^d``; the
    resulting states follow the Hilbert-Schmidt measure, which covers mixed
    as well as pure states.
    """
    u = qmc.Halton(d=2 * d * d, scramble=True, seed=seed).random(n)
    g = norm.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    psi = (g[:, : d * d] + 1j * g[:, d * d:]).reshape(n, d, d)
    psi /= np.linalg.norm(psi.reshape(n, -1), axis=1)[:, None, None]
    return [hermitize(p @ p.conj().T) for p in psi]


# --------------------------------------------------------------------------- three rounds


@dataclass
class NestedResult:
    """Outcome of a nested three-round evaluation.

    ``value`` is the best certified-by-evaluation lower bound; ``upper`` is
    the cutting-plane bound (``inf`` when no refinement ran).
    """

    value: float
    upper: float
    rho1: np.ndarray
    sigma1: np.ndarray
    rho2: np.ndarray
    net_value: float
    evaluations: int
    consistency_residual: float
    details: dict = field(default_factory=dict)


class NestedEvaluator:
    """Parameterized program ``g(rho1) = min_{sigma1} max_{rho2 in S(rho1)} Tr(R (rho2 (x) sigma1))``.

    Parameters
    ----------
    R : ndarray
        Observable on ``A1 (x) A2 (x) B1``.
    dims : (dA1, dA2, dB1)
    b2 : float or None
        Entanglement bound for the extension register ``A2``; ``None`` means
        unbounded.
    """

    def __init__(self, R: np.ndarray, dims: Sequence[int], b2: float | None):
        dA1, dA2, dB1 = (int(d) for d in dims)
        if max(dA1, dA2, dB1) > MAX_NESTED_DIM:
            raise InputError(f"nested evaluation supports register dimensions up to {MAX_NESTED_DIM}")
        DA = dA1 * dA2
        R = Observable(np.asarray(R, dtype=complex)).entries
        if R.shape[0] != DA * dB1:
            raise InputError(f"observable size {R.shape[0]} does not match dims {tuple(dims)}")
        self.R, self.dims = R, (dA1, dA2, dB1)
        self.spec = FeasibleSetSpec(SetKind.ENT_BOUNDED if b2 is not None else SetKind.FULL,
                                    (dA1, dA2), b2)
        self.param = (cp.Parameter((dA1, dA1), symmetric=True), cp.Parameter((dA1, dA1)))
        self.sigma = cp.Variable((dB1, dB1), hermitian=True)
        W = cp.partial_trace(R @ cp.kron(np.eye(DA), self.sigma), [DA, dB1], 1)
        obj, cons, self.Y = consistent_max_dual(W, self.param, self.spec)
        self._main = cons[-1]  # the PSD constraint whose multiplier is the extension rho2
        cons = cons + [self.sigma >> 0, cp.real(cp.trace(self.sigma)) == 1]
        self.problem = cp.Problem(cp.Minimize(obj), cons)
        self.evaluations = 0

    @property
    def exact(self) -> bool:
        """Whether ``g`` is computed over the exact extension set (not an outer description)."""
        return FeasibleSetSpec(SetKind.ENT_BOUNDED, self.dims[:2],
                               self.spec.bound if self.spec.bound is not None else 1e9).relaxation_exact

    def __call__(self, rho1: np.ndarray) -> tuple[float, np.ndarray]:
        """Value and supergradient ``Y`` at ``rho1``."""
        rho1 = hermitize(rho1)
        self.param[0].value = rho1.real
        self.param[1].value = rho1.imag
        solve_sdp(self.problem)
        self.evaluations += 1
        return float(self.problem.value), hermitize(self.Y.value)

    def extension(self, rho1: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
        """Optimal ``sigma1`` and a consistent extension ``rho2`` at ``rho1``.

        ``rho2`` is read from the multiplier of the main constraint and then
        corrected so that ``Tr_{A2} rho2 = rho1`` holds to machine precision.
        """
        self(rho1)
        dA1, dA2, _ = self.dims
        dual = self._main.dual_value
        DA = dA1 * dA2
        X = np.asarray(dual)[:DA, :DA] if dual is not None else np.kron(rho1, np.eye(dA2) / dA2)
        tr = np.trace(X).real
        X = X / tr if tr > 1e-12 else np.kron(rho1, np.eye(dA2) / dA2)
        spec = FeasibleSetSpec(SetKind.CONSISTENT, (dA1, dA2), self.spec.bound, hermitize(rho1))
        rho2, info = certify_member(X, spec)
        return hermitize(self.sigma.value), rho2, info["consistency_residual"]


def _kelley(g: NestedEvaluator, cuts: list[tuple[np.ndarray, float, np.ndarray]], best, *,
            max_iter: int, tol: float) -> tuple[tuple, float, int]:
    """Cutting-plane ascent on the concave ``g`` using supergradient cuts ``Tr(Y_i rho)``."""
    d = g.dims[0]
    upper = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        Ys = np.array([c[2] for c in cuts])
        Are = Ys.real.reshape(len(cuts), -1)
        Aim = Ys.imag.reshape(len(cuts), -1)
        rho = cp.Variable((d, d), hermitian=True)
        t = cp.Variable()
        prob = cp.Problem(cp.Maximize(t), [
            rho >> 0, cp.real(cp.trace(rho)) == 1,
            t <= Are @ cp.vec(cp.real(rho), order="C") + Aim @ cp.vec(cp.imag(rho), order="C")])
        solve_sdp(prob)
        upper = min(upper, float(prob.value))
        cand = hermitize(rho.value)
        cand = cand / np.trace(cand).real
        w, v = np.linalg.eigh(cand)
        cand = hermitize((v * np.clip(w, 0, None)) @ v.conj().T)
        cand /= np.trace(cand).real
        val, Y = g(cand)
        cuts.append((cand, val, Y))
        if val > best[1]:
            best = (cand, val)
        if upper - best[1] <= tol:
            break
    return best, upper, it


def solve_nested_level3(R: np.ndarray, dims: Sequence[int], b2: float | None, *,
                        resolution: int = 1000, seed: int = 0, refine: bool = True,
                        refine_iters: int = 60, tol: float = 1e-7,
                        full_output: bool = False) -> float | NestedResult:
    """Lower bound on ``v3`` from the literal nested quantifier order.

    Parameters
    ----------
    R : ndarray
        Observable on ``A1 (x) A2 (x) B1``.
    dims : (dA1, dA2, dB1)
        Register dimensions, each at most 3.
    b2 : float or None
        Entanglement bound (nats) on the extension register.  ``0`` forces
        separable extensions; ``None`` or any ``b2 >= ln min(dA1, dA2)``
        leaves them unconstrained.
    resolution : int
        Number of net points for the outer maximization.
    refine : bool
        Run cutting-plane refinement from the net.

    Raises
    ------
    BudgetError
        If ``resolution`` exceeds :data:`NET_BUDGET`.
    """
    if resolution < 1 or resolution > NET_BUDGET:
        raise BudgetError(f"net resolution {resolution} outside [1, {NET_BUDGET}]")
    g = NestedEvaluator(R, dims, b2)
    cuts = []
    best = (None, -math.inf)
    for rho1 in purified_net(g.dims[0], resolution, seed):
        val, Y = g(rho1)
        cuts.append((rho1, val, Y))
        if val > best[1]:
            best = (rho1, val)
    net_value = best[1]
    upper, its = math.inf, 0
    if refine:
        best, upper, its = _kelley(g, cuts, best, max_iter=refine_iters, tol=tol)
    if not full_output:
        return best[1]
    sigma1, rho2, resid = g.extension(best[0])
    return NestedResult(best[1], upper, best[0], sigma1, rho2, net_value, g.evaluations, resid,
                        {"refine_iterations": its, "exact_extension_set": g.exact})


# --------------------------------------------------------------------------- higher levels


def level_parameters(level: int) -> tuple[int, int]:
    """``(k, l)`` for the reduced program of the given level (level ``= i + 2``).

    Examples
    --------
    >>> [level_parameters(L) for L in (3, 4, 5, 6)]
    [(1, 0), (1, 1), (2, 1), (2, 2)]
    """
    if level < 2:
        raise InputError("levels start at 2")
    i = level - 2
    if level % 2 == 0:
        return i // 2, i // 2
    k = (i + 1) // 2
    return k, k - 1


@dataclass(frozen=True)
class ReducedProgram:
    """``max_{rho in set_a} min_{sigma in set_b} Tr(R (rho (x) sigma))``."""

    level: int
    k: int
    l: int
    set_a: FeasibleSetSpec
    set_b: FeasibleSetSpec
    objective: str = "Tr(R (rho (x) sigma))"

    def canonical(self) -> tuple:
        return (self.set_a.canonical(), self.set_b.canonical(), self.objective)


def _bound_for(bounds, m: int) -> float:
    if np.isscalar(bounds):
        return float(bounds)
    seq = list(bounds)
    # T^(m) constrains register m+1, so it uses the bound indexed by that register
    return float(seq[min(m, len(seq) - 1)])


def _t_set(m: int, bounds, split: tuple[int, int]) -> FeasibleSetSpec:
    rest, last = split
    if m == 0:
        return full_set(rest * last)
    # registers R_1..R_{m+1}; only the last-vs-rest split matters, so the
    # earlier rounds are carried by R_1 and R_2..R_m are trivial
    regs = (rest,) + (1,) * (m - 1) + (last,)
    return ent_bounded_set(_bound_for(bounds, m), *regs)


def reduced_program(level: int, b, d, split_a: tuple[int, int] = (2, 2),
                    split_b: tuple[int, int] = (2, 2)) -> ReducedProgram:
    """Two-round program of ``level`` on message spaces with the given bipartite splits."""
    k, l = level_parameters(level)
    return ReducedProgram(level, k, l, _t_set(k, b, split_a), _t_set(l, d, split_b))


def _constant(bounds) -> bool:
    if np.isscalar(bounds):
        return True
    seq = [float(x) for x in bounds]
    return all(x == seq[0] for x in seq)


@dataclass
class CollapseReport:
    level: int
    status: str  # EQUAL, DIFFERENT or NOT_APPLICABLE
    program: ReducedProgram | None
    program_4: ReducedProgram | None
    deltas: list = field(default_factory=list)
    results: list = field(default_factory=list)

    @property
    def max_delta(self) -> float:
        return max(self.deltas, default=0.0)


def check_collapse_structure(level: int, b, d, *, split_a: tuple[int, int] = (2, 2),
                             split_b: tuple[int, int] = (2, 2), observables: Sequence[np.ndarray] = (),
                             tol: float = 1e-6) -> CollapseReport:
    """Compare the reduced program of ``level`` with that of level 4.

    ``b`` and ``d`` are scalars or per-register sequences.  Non-constant
    bounds make the collapse hypothesis fail, reported as NOT_APPLICABLE.
    For each observable supplied both programs are solved and the
    difference of their certified midpoints is recorded in ``deltas``.
    """
    if level < 4:
        raise InputError("the collapse comparison is defined for levels >= 4")
    if not (_constant(b) and _constant(d)):
        return CollapseReport(level, "NOT_APPLICABLE", None, None)
    prog = reduced_program(level, b, d, split_a, split_b)
    prog4 = reduced_program(4, b, d, split_a, split_b)
    status = "EQUAL" if prog.canonical() == prog4.canonical() else "DIFFERENT"
    report = CollapseReport(level, status, prog, prog4)
    for R in observables:
        r_i: SaddleResult = solve_reduced(R, prog.set_a, prog.set_b, tol=tol)
        r_4: SaddleResult = solve_reduced(R, prog4.set_a, prog4.set_b, tol=tol)
        report.results.append((r_i, r_4))
        report.deltas.append(abs(r_i.value - r_4.value))
    return report
