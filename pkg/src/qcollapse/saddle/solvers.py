"""Bilinear saddle points ``max_rho min_sigma Tr(R (rho (x) sigma))`` over constrained state sets.

The inner player is eliminated by conic duality, so each order of play is a
single semidefinite program (for FULL inner sets this is the ``lambda_min``
reformulation ``min_sigma Tr(M sigma) = lambda_min(M)``).  Both orders are
solved; the optimizers are then pushed into the *true* feasible sets and
re-evaluated against the opposing player, which turns solver output into a
certified bracket

    L = min_{sigma in B'} Tr(R (rho_hat (x) sigma))  <=  v  <=  max_{rho in A'} Tr(R (rho (x) sigma_hat)) = U,

where ``A', B'`` are the convex outer descriptions from :mod:`.sets`.  The
bracket is valid whether or not the solver converged.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum

import cvxpy as cp
import numpy as np

from ..errors import InputError, QCollapseError
from .entropy import fit_separable, ree_bound
from .sets import (FeasibleSetSpec, SetKind, full_set, inner_min_dual, primal_constraints,
                   reduced_map)
from .states import Observable, hermitize, partial_trace, partial_transpose, project_to_state, swap_registers

__all__ = [
    "Certificate",
    "SaddleResult",
    "SolverFailure",
    "solve_sdp",
    "certify_member",
    "value_against_min",
    "value_against_max",
    "solve_reduced",
    "solve_level2",
    "mmw_level2",
]


class Certificate(str, Enum):
    EXACT_SDP = "EXACT_SDP"
    PPT_RELAXATION = "PPT_RELAXATION"
    SEESAW_BOUND = "SEESAW_BOUND"


class SolverFailure(QCollapseError):
    """The conic solver returned no usable solution."""


@dataclass
class SaddleResult:
    """Certified bracket on a saddle value.

    ``maxmin`` is the value guaranteed by the returned max-player state and
    ``minmax`` the value guaranteed by the returned min-player state; they
    coincide with ``value_lower`` and ``value_upper``.
    """

    value_lower: float
    value_upper: float
    rho: np.ndarray
    sigma: np.ndarray
    iterations: int
    certificate: Certificate
    converged: bool = True
    details: dict = field(default_factory=dict)

    @property
    def maxmin(self) -> float:
        return self.value_lower

    @property
    def minmax(self) -> float:
        return self.value_upper

    @property
    def gap(self) -> float:
        return self.value_upper - self.value_lower

    @property
    def value(self) -> float:
        return (self.value_lower + self.value_upper) / 2


_CLARABEL_OPTS = dict(tol_gap_abs=1e-10, tol_gap_rel=1e-10, tol_feas=1e-10, max_iter=400)


def solve_sdp(prob: cp.Problem) -> int:
    """Solve with Clarabel at tight tolerances, falling back to SCS; returns the iteration count."""
    with warnings.catch_warnings():
        # inaccurate solutions are accepted here: brackets are re-certified afterwards
        warnings.filterwarnings("ignore", message="Solution may be inaccurate")
        try:
            prob.solve(solver=cp.CLARABEL, **_CLARABEL_OPTS)
        except cp.error.SolverError:
            prob.solve(solver=cp.SCS, eps=1e-9, max_iters=200000)
    if prob.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        raise SolverFailure(f"SDP solver status {prob.status}")
    stats = prob.solver_stats
    return int(stats.num_iters or 0) if stats is not None else 0


# --------------------------------------------------------------------------- membership certificates


def _min_eig(m: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(hermitize(m))[0])


def _mix_to_identity(X: np.ndarray, mats: list[np.ndarray], D: int) -> tuple[np.ndarray, float]:
    """Smallest mixture ``(1-e) X + e I/D`` making every listed linear image PSD.

    The maps used (identity and partial transpose) send ``I/D`` to ``I/D``.
    """
    eps = 0.0
    for m in mats:
        lam = _min_eig(m)
        if lam < 0:
            eps = max(eps, (-lam) / (-lam + 1.0 / D) * (1 + 1e-9) + 1e-15)
    eps = min(eps, 1.0)
    return hermitize((1 - eps) * X + eps * np.eye(D) / D), eps


def _bisect_mixture(X: np.ndarray, anchor: np.ndarray, ok, steps: int = 24) -> tuple[np.ndarray, float]:
    """Largest weight on ``X`` in ``(1-t) X + t anchor`` satisfying ``ok`` (``ok(anchor)`` must hold)."""
    if ok(X):
        return X, 0.0
    lo, hi = 0.0, 1.0  # ok fails at lo, holds at hi
    for _ in range(steps):
        mid = (lo + hi) / 2
        if ok((1 - mid) * X + mid * anchor):
            hi = mid
        else:
            lo = mid
    return hermitize((1 - hi) * X + hi * anchor), hi


def certify_member(X: np.ndarray, spec: FeasibleSetSpec, *, seed: int = 0) -> tuple[np.ndarray, dict]:
    """Map a near-optimal SDP point to a state provably inside ``spec``.

    Returns the state and a record of how membership is certified.
    """
    spec = spec.normalized()
    D = spec.dim
    raw = hermitize(X)
    X = project_to_state(raw)
    info: dict = {"projection_residual": float(np.linalg.norm(X - raw))}
    lvl = spec.ent_level
    split = spec.split
    if spec.kind is SetKind.CONSISTENT:
        rest, last = split
        anchor = np.kron(spec.parent, np.eye(last) / last)
        X = hermitize(raw + np.kron(spec.parent - partial_trace(raw, split, 1), np.eye(last) / last))

        def ok(m):
            if _min_eig(m) < 0:
                return False
            if lvl == "none":
                return True
            if lvl == "sep" and D <= 6:
                return _min_eig(partial_transpose(m, split, 1)) >= 0
            return ree_bound(m, split, seed=seed)[0] <= (spec.bound if lvl == "bounded" else 1e-7)

        X, t = _bisect_mixture(X, anchor, ok)
        info.update(kind="consistent-mixture", mix=t,
                    consistency_residual=float(np.max(np.abs(partial_trace(X, split, 1) - spec.parent))))
        return X, info
    if lvl == "none":
        info["kind"] = "state"
        return X, info
    if lvl == "sep":
        if D <= 6:
            X, eps = _mix_to_identity(X, [X, partial_transpose(X, split, 1)], D)
            info.update(kind="ppt-low-dim", mix=eps)
            return X, info
        fit = fit_separable(X, split, seed=seed)
        info.update(kind="explicit-decomposition", fit_error=fit.value)
        return fit.sigma, info
    # bounded entanglement: move toward a separable anchor until the REE upper bound fits
    if D <= 6:
        anchor, _ = _mix_to_identity(X, [X, partial_transpose(X, split, 1)], D)
    else:
        anchor = fit_separable(X, split, seed=seed).sigma
    X, t = _bisect_mixture(X, anchor, lambda m: ree_bound(m, split, seed=seed)[0] <= spec.bound, steps=16)
    bound, kind = ree_bound(X, split, seed=seed)
    info.update(kind=f"ree-{kind}", mix=t, ree_upper=bound)
    return X, info


# --------------------------------------------------------------------------- one-sided evaluations


def value_against_min(R: np.ndarray, rho: np.ndarray, setB: FeasibleSetSpec) -> float:
    """``min_{sigma in B'} Re Tr(R (rho (x) sigma))`` (exact eigenvalue for FULL sets)."""
    dA, dB = rho.shape[0], setB.dim
    M = hermitize(reduced_map(R, dA, dB)(rho))
    setB = setB.normalized()
    if setB.kind is SetKind.FULL:
        return float(np.linalg.eigvalsh(M)[0])
    S = cp.Variable((dB, dB), hermitian=True)
    prob = cp.Problem(cp.Minimize(cp.real(cp.trace(M @ S))), primal_constraints(setB, S))
    solve_sdp(prob)
    return float(prob.value)


def value_against_max(R: np.ndarray, sigma: np.ndarray, setA: FeasibleSetSpec) -> float:
    """``max_{rho in A'} Re Tr(R (rho (x) sigma))`` (exact eigenvalue for FULL sets)."""
    dA, dB = setA.dim, sigma.shape[0]
    N = hermitize(partial_trace(R @ np.kron(np.eye(dA), sigma), (dA, dB), 1))
    setA = setA.normalized()
    if setA.kind is SetKind.FULL:
        return float(np.linalg.eigvalsh(N)[-1])
    S = cp.Variable((dA, dA), hermitian=True)
    prob = cp.Problem(cp.Maximize(cp.real(cp.trace(N @ S))), primal_constraints(setA, S))
    solve_sdp(prob)
    return float(prob.value)


# --------------------------------------------------------------------------- saddle programs


def _maxmin_sdp(R: np.ndarray, setA: FeasibleSetSpec, setB: FeasibleSetSpec) -> tuple[float, np.ndarray, int]:
    dA, dB = setA.dim, setB.dim
    rho = cp.Variable((dA, dA), hermitian=True)
    obj, cons = inner_min_dual(setB, reduced_map(R, dA, dB)(rho))
    prob = cp.Problem(cp.Maximize(obj), primal_constraints(setA, rho) + cons)
    its = solve_sdp(prob)
    return float(prob.value), np.asarray(rho.value), its


def _check_dims(R: np.ndarray, setA: FeasibleSetSpec, setB: FeasibleSetSpec) -> np.ndarray:
    R = np.asarray(R, dtype=complex)
    if R.shape != (setA.dim * setB.dim,) * 2:
        raise InputError(f"observable of size {R.shape[0]} does not act on {setA.dim} x {setB.dim}")
    return Observable(R).entries


def solve_reduced(R: np.ndarray, setA: FeasibleSetSpec, setB: FeasibleSetSpec, *,
                  tol: float = 1e-6, seed: int = 0) -> SaddleResult:
    """Certified bracket on ``max_{rho in A} min_{sigma in B} Tr(R (rho (x) sigma))``.

    Parameters
    ----------
    R : ndarray
        Observable on ``A (x) B`` with ``0 <= R <= I``.
    setA, setB : FeasibleSetSpec
        Sets of the maximizing and minimizing player.
    tol : float
        Bracket width below which the result counts as converged.

    Returns
    -------
    SaddleResult
        ``certificate`` is EXACT_SDP when both convex descriptions are exact,
        SEESAW_BOUND when an entanglement-bounded set is binding (brackets
        come from explicit decompositions) and PPT_RELAXATION otherwise.
    """
    R = _check_dims(R, setA, setB)
    a, b = setA.normalized(), setB.normalized()
    v_relaxed, rho_raw, it1 = _maxmin_sdp(R, a, b)
    w_relaxed, sig_raw, it2 = _maxmin_sdp(-swap_registers(R, a.dim, b.dim), b, a)
    rho, info_a = certify_member(rho_raw, a, seed=seed)
    sigma, info_b = certify_member(sig_raw, b, seed=seed)
    lower = value_against_min(R, rho, b)
    upper = value_against_max(R, sigma, a)
    if a.relaxation_exact and b.relaxation_exact:
        cert = Certificate.EXACT_SDP
    elif "bounded" in (a.ent_level, b.ent_level):
        cert = Certificate.SEESAW_BOUND
    else:
        cert = Certificate.PPT_RELAXATION
    if lower > upper + 1e-8:
        raise SolverFailure(f"bracket inverted: {lower} > {upper}")
    converged = upper - lower <= tol
    return SaddleResult(lower, upper, rho, sigma, it1 + it2, cert, converged,
                        {"relaxed_maxmin": v_relaxed, "relaxed_minmax": -w_relaxed,
                         "rho_membership": info_a, "sigma_membership": info_b,
                         "sets": (a.describe(), b.describe())})


def _expm_herm(H: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(hermitize(H))
    e = np.exp(w - w.max())
    m = (v * e) @ v.conj().T
    return hermitize(m / np.trace(m).real)


def mmw_level2(R: np.ndarray, dA: int, dB: int, *, tol: float = 1e-6, max_iter: int = 20000,
               check_every: int = 50) -> SaddleResult:
    """First-order route: matrix multiplicative weights for both players with averaging.

    Converges at rate ``O(sqrt(log d / t))``; when the certified bracket of
    the averaged strategies is still wider than ``tol`` at ``max_iter`` the
    result is returned with ``converged=False`` and a warning is emitted.
    """
    R = _check_dims(R, full_set(dA), full_set(dB))
    M = reduced_map(R, dA, dB)
    def N(s):
        return partial_trace(R @ np.kron(np.eye(dA), s), (dA, dB), 1)
    SA = np.zeros((dA, dA), complex)
    SB = np.zeros((dB, dB), complex)
    rbar = np.zeros_like(SA)
    sbar = np.zeros_like(SB)
    lower, upper = -np.inf, np.inf
    best_r, best_s = np.eye(dA) / dA, np.eye(dB) / dB
    t = 0
    converged = False
    for t in range(1, max_iter + 1):
        eta = np.sqrt(np.log(max(dA, dB, 2)) / t)
        r = _expm_herm(eta * SA)
        s = _expm_herm(-eta * SB)
        SA += N(s)
        SB += M(r)
        rbar += r
        sbar += s
        if t % check_every == 0 or t == max_iter:
            lo = float(np.linalg.eigvalsh(hermitize(M(rbar / t)))[0])
            hi = float(np.linalg.eigvalsh(hermitize(N(sbar / t)))[-1])
            if lo > lower:
                lower, best_r = lo, hermitize(rbar / t)
            if hi < upper:
                upper, best_s = hi, hermitize(sbar / t)
            if upper - lower <= tol:
                converged = True
                break
    if not converged:
        warnings.warn(f"MMW stopped at {t} iterations with bracket width {upper - lower:.3g}",
                      RuntimeWarning, stacklevel=2)
    return SaddleResult(lower, upper, best_r, best_s, t, Certificate.EXACT_SDP, converged,
                        {"method": "mmw"})


def solve_level2(R: np.ndarray, dA: int, dB: int, *, method: str = "sdp", tol: float = 1e-6,
                 max_iter: int = 20000) -> SaddleResult:
    """``max_rho min_sigma Tr(R (rho (x) sigma))`` over all states, with the swapped order.

    Examples
    --------
    >>> import numpy as np
    >>> res = solve_level2(np.eye(4), 2, 2)
    >>> abs(res.value_lower - 1) < 1e-8 and abs(res.value_upper - 1) < 1e-8
    True
    """
    if method == "sdp":
        res = solve_reduced(R, full_set(dA), full_set(dB), tol=tol)
        res.details["method"] = "sdp"
        return res
    if method == "mmw":
        return mmw_level2(R, dA, dB, tol=tol, max_iter=max_iter)
    raise InputError(f"unknown method {method!r}")
