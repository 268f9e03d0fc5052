"""Classical simulation of the sampling verifier for multilinear threshold instances.

One round draws a monomial ``S_j`` with probability ``|beta_j| / B``, reads the
``|S_j|`` proof bits it touches, and reports ``v = sign_j * prod_{i in S_j} y_i``.
This is the exact outcome law of the Hadamard test on the phase
``exp(i pi prod y_i)``: the phase is ``+1`` or ``-1``, so the test is
deterministic once the monomial is fixed.  ``E[B v] = P(y)``.

After ``T`` rounds the estimate is ``P_hat = (B / T) sum_t v_t``.  The verifier
accepts when ``P_hat`` reaches the acceptance cut.  The default cut is the
midpoint ``a - delta/2`` between the YES region ``P >= a`` and the NO region
``P <= a - delta``.  A cut placed at ``a`` itself would accept a proof with
``P(y) = a`` only about half the time.

Weights are integers over the instance denominator, so the draw "uniform real
``r`` in ``[0, B)``" is realised exactly as a uniform integer in
``[0, B * den)`` located in the cumulative-weight partition.

The exact acceptance oracle works on the trinomial law of
``(#plus, #minus)`` with integer arithmetic and returns a ``Fraction``.
"""

from __future__ import annotations

import bisect
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Sequence

import numpy as np

try:  # optional: GMP integers make the exact oracle about five times faster
    from gmpy2 import mpz as _big
except ImportError:  # pragma: no cover - exercised only without gmpy2
    _big = int

from .errors import BudgetError, DegenerateInstanceError, InputError
from .poly import MtpInstance, Promise, as_assignment, index_to_assignment, promise_of_count

__all__ = [
    "Monomial",
    "VerifierSpec",
    "VerifierRun",
    "ProofOracle",
    "ContractReport",
    "nominal_repetitions",
    "hoeffding_repetitions",
    "build_verifier",
    "sample_round",
    "run_verifier",
    "acceptance_rate",
    "signed_weights",
    "acceptance_probability_exact",
    "acceptance_from_weights",
    "acceptance_dp",
    "chernoff_upper",
    "hoeffding_tail",
    "check_pcp_contract",
    "hadamard_test_statevector",
]

#: Largest ``T`` the exact oracle accepts by default.
EXACT_T_LIMIT = 10_000


@dataclass(frozen=True)
class Monomial:
    support: tuple  # 1-based proof positions
    weight: int  # |v_S| (numerator over the instance denominator)
    sign: int  # +1 or -1


def nominal_repetitions(gap: Fraction, fail_budget: Fraction) -> int:
    """``ceil(2 ln(2/delta_fail) / delta^2)``, the nominal repetition count of the construction (no factor B^2)."""
    return math.ceil(2 * math.log(2 / float(fail_budget)) / float(gap) ** 2)


def hoeffding_repetitions(total_weight: Fraction, gap: Fraction, fail_budget: Fraction) -> int:
    """Rounds that make the midpoint cut err with probability at most ``delta_fail / 2`` on each side.

    Each ``B v_t`` lies in ``[-B, B]``; Hoeffding with deviation ``delta/2``
    needs ``T >= 8 B^2 ln(2/delta_fail) / delta^2``.
    """
    B = float(total_weight)
    return math.ceil(8 * B * B * math.log(2 / float(fail_budget)) / float(gap) ** 2)


def hoeffding_tail(total_weight: Fraction, deviation: Fraction, T: int) -> float:
    """Upper bound ``exp(-T dev^2 / (2 B^2))`` on a one-sided deviation of ``P_hat``."""
    B = float(total_weight)
    return math.exp(-T * float(deviation) ** 2 / (2 * B * B))


@dataclass(frozen=True)
class VerifierSpec:
    """Parameters of the simulated verifier.

    ``completeness_raw`` and ``soundness_raw`` are ``(a +/- delta)/B``; the
    unprefixed fields are the same numbers clamped to ``[0, 1]``.
    """

    monomials: tuple
    denominator: int
    threshold: Fraction
    gap: Fraction
    repetitions: int
    fail_budget: Fraction
    proof_length: int
    cut: Fraction
    _cum: tuple = field(repr=False, compare=False, default=())

    @property
    def total_weight_num(self) -> int:
        return sum(m.weight for m in self.monomials)

    @property
    def total_weight(self) -> Fraction:
        """``B = sum |beta_j|``."""
        return Fraction(self.total_weight_num, self.denominator)

    @property
    def completeness_raw(self) -> Fraction:
        return (self.threshold + self.gap) / self.total_weight

    @property
    def soundness_raw(self) -> Fraction:
        return (self.threshold - self.gap) / self.total_weight

    @property
    def completeness(self) -> Fraction:
        return min(max(self.completeness_raw, Fraction(0)), Fraction(1))

    @property
    def soundness(self) -> Fraction:
        return min(max(self.soundness_raw, Fraction(0)), Fraction(1))

    @property
    def query_bound(self) -> int:
        return max((len(m.support) for m in self.monomials), default=0)

    @property
    def min_net(self) -> int:
        """Smallest ``#plus - #minus`` that is accepted."""
        x = self.cut * self.repetitions * self.denominator / self.total_weight_num
        return -((-x.numerator) // x.denominator)

    def with_repetitions(self, T: int) -> "VerifierSpec":
        return VerifierSpec(self.monomials, self.denominator, self.threshold, self.gap, int(T),
                            self.fail_budget, self.proof_length, self.cut, self._cum)


def build_verifier(inst: MtpInstance, fail_budget: Fraction = Fraction(1, 3), *,
                   repetitions: int | None = None, cut: str | Fraction = "midpoint") -> VerifierSpec:
    """Verifier description for ``inst``.

    Parameters
    ----------
    inst : MtpInstance
    fail_budget : Fraction
        Target error ``delta_fail``.
    repetitions : int, optional
        Override ``T``.  By default ``T`` is the larger of
        :func:`nominal_repetitions` and :func:`hoeffding_repetitions`.
    cut : {"midpoint", "threshold"} or Fraction
        Acceptance cut: ``a - delta/2`` (default), ``a``, or an explicit value.

    Raises
    ------
    DegenerateInstanceError
        For the zero polynomial (``B = 0``).
    """
    poly = inst.poly
    if not poly.terms:
        raise DegenerateInstanceError("zero polynomial has total weight B = 0")
    fail_budget = Fraction(fail_budget)
    if not 0 < fail_budget < 1:
        raise InputError("fail_budget must lie in (0, 1)")
    monos = tuple(Monomial(S, abs(v), 1 if v > 0 else -1) for S, v in poly.terms.items())
    B = Fraction(sum(m.weight for m in monos), poly.denominator)
    if repetitions is None:
        repetitions = max(nominal_repetitions(inst.gap, fail_budget), hoeffding_repetitions(B, inst.gap, fail_budget))
    if int(repetitions) < 1:
        raise InputError("repetitions must be positive")
    if cut == "midpoint":
        cut_val = inst.threshold - inst.gap / 2
    elif cut == "threshold":
        cut_val = inst.threshold
    else:
        cut_val = Fraction(cut)
    cum = tuple(np.cumsum([m.weight for m in monos]).tolist()) if sum(m.weight for m in monos) < 1 << 62 \
        else tuple(_py_cumsum([m.weight for m in monos]))
    return VerifierSpec(monos, poly.denominator, inst.threshold, inst.gap, int(repetitions), fail_budget,
                        poly.num_vars, cut_val, cum)


def _py_cumsum(xs):
    s = 0
    for x in xs:
        s += x
        yield s


class ProofOracle:
    """Proof access with per-round query accounting."""

    def __init__(self, y: Sequence[int]):
        self.y = tuple(y)
        self.round_reads = 0
        self.max_reads = 0
        self.total_reads = 0

    def begin_round(self) -> None:
        self.round_reads = 0

    def read(self, i: int) -> int:
        self.round_reads += 1
        self.total_reads += 1
        self.max_reads = max(self.max_reads, self.round_reads)
        return self.y[i - 1]


def _round_value(spec: VerifierSpec, proof: ProofOracle, r: int) -> int:
    j = bisect.bisect_right(spec._cum, r)
    mono = spec.monomials[j]
    proof.begin_round()
    for i in mono.support:  # reads stop at the first zero, never exceeding |S_j|
        if proof.read(i) == 0:
            return 0
    return mono.sign


def _draw(rng: np.random.Generator, upper: int, size: int | None = None):
    if upper < (1 << 62):
        return rng.integers(0, upper, size=size)
    py = random.Random(int(rng.integers(0, 1 << 62)))
    if size is None:
        return py.randrange(upper)
    return [py.randrange(upper) for _ in range(size)]


def sample_round(spec: VerifierSpec, y: Sequence[int] | ProofOracle, rng: np.random.Generator) -> int:
    """One round: draw ``r``, locate its monomial, return ``sign * prod y_i``."""
    proof = y if isinstance(y, ProofOracle) else ProofOracle(as_assignment(y, spec.proof_length))
    if len(proof.y) != spec.proof_length:
        raise InputError("proof length mismatch")
    return _round_value(spec, proof, int(_draw(rng, spec.total_weight_num)))


@dataclass(frozen=True)
class VerifierRun:
    accepted: bool
    net: int  # #plus - #minus
    estimate: Fraction  # P_hat
    max_queries: int


def run_verifier(spec: VerifierSpec, y: Sequence[int], seed: int, *, vectorized: bool = True) -> VerifierRun:
    """Run ``T`` rounds seeded by ``seed`` and apply the acceptance cut.

    Both code paths consume the same random draws and give identical results;
    the loop path reads proof bits through a :class:`ProofOracle`.
    """
    y = as_assignment(y, spec.proof_length)
    rng = np.random.default_rng(seed)
    T = spec.repetitions
    draws = _draw(rng, spec.total_weight_num, T)
    if vectorized and isinstance(draws, np.ndarray):
        j = np.searchsorted(np.asarray(spec._cum, dtype=np.int64), draws, side="right")
        yy = np.asarray(y, dtype=np.int8)
        val = np.array([m.sign if all(yy[i - 1] for i in m.support) else 0 for m in spec.monomials], dtype=np.int64)
        # a round stops reading at the first zero bit
        reads = np.array([_reads_needed(m.support, y) for m in spec.monomials], dtype=np.int64)
        net = int(val[j].sum())
        maxq = int(reads[j].max()) if T else 0
    else:
        proof = ProofOracle(y)
        net = sum(_round_value(spec, proof, int(r)) for r in draws)
        maxq = proof.max_reads
    est = Fraction(spec.total_weight_num * net, spec.denominator * T)
    return VerifierRun(net >= spec.min_net, net, est, maxq)


def _reads_needed(support, y) -> int:
    for k, i in enumerate(support, start=1):
        if y[i - 1] == 0:
            return k
    return len(support)


def acceptance_rate(spec: VerifierSpec, y: Sequence[int], seeds: Sequence[int]) -> float:
    """Fraction of the seeded runs that accept."""
    return float(np.mean([run_verifier(spec, y, s).accepted for s in seeds]))


# --------------------------------------------------------------------------- exact oracle


def signed_weights(spec: VerifierSpec, y: Sequence[int]) -> tuple[int, int]:
    """``(W_plus, W_minus)``: total weight of monomials reporting ``+1`` / ``-1`` on ``y``."""
    y = as_assignment(y, spec.proof_length)
    wp = wm = 0
    for m in spec.monomials:
        if all(y[i - 1] for i in m.support):
            if m.sign > 0:
                wp += m.weight
            else:
                wm += m.weight
    return wp, wm


def acceptance_from_weights(wp: int, wm: int, total: int, T: int, c: int) -> Fraction:
    """``Pr[#plus - #minus >= c]`` after ``T`` rounds with weights ``wp, wm`` out of ``total``.

    Sums ``C(T,i) wp^i H(T-i, i-c)`` over ``i >= max(c, 0)``, where
    ``H(n, J) = sum_{j <= J} C(n, j) wm^j wz^(n-j)`` is updated in ``O(1)``
    big-integer operations per step, so the cost is ``O(T)`` operations on
    numbers of ``O(T log total)`` bits.
    """
    wz = total - wp - wm
    if min(wp, wm, wz) < 0:
        raise InputError("weights must be non-negative and sum to at most the total")
    num, den = _acceptance_num(_big(wp), _big(wm), _big(wz), _big(total), T, c)
    return Fraction(int(num), int(den))


def _acceptance_num(wp, wm, wz, total, T: int, c: int) -> tuple:
    """Numerator and denominator ``total**T`` of the acceptance probability."""
    if c > T:
        return 0, 1
    if c <= -T:
        return 1, 1
    i_min = max(c, 0)
    if wp == 0:
        if c > 0:
            return 0, 1
        return _binom_partial(T, -c, wm, wz), total ** T
    if wm == 0:
        # H(n, J) = wz^n for J >= 0
        return _binom_upper(T, i_min, wp, wz), total ** T

    num = 0
    a = wp ** T  # C(T, i) wp^i at i = T
    n, J = 0, T - c
    H = 1
    # t1 = t(n, J) and t0 = t(n, J-1), the last two terms of H(n, J)
    t1, t0 = _t(n, J, wm, wz), _t(n, J - 1, wm, wz)
    i = T
    while True:
        if wz == 0:
            Hval = wm ** n if J >= n else 0
        else:
            Hval = H
        num += a * Hval
        if i == i_min:
            break
        # step i -> i - 1: n -> n + 1, J -> J - 1
        if wz != 0:
            H_j1 = H - t1
            H = wz * H_j1 + wm * (H_j1 - t0)
            if 0 <= J - 1 <= n and J - 2 >= 0:
                # ratios of consecutive binomial terms; both divisions are exact
                t1, t0 = (t0 * (n + 1) * wz // (n - J + 2),
                          t0 * (n + 1) * (J - 1) * wz * wz // ((n - J + 3) * (n - J + 2) * wm))
            else:
                t1, t0 = _t(n + 1, J - 1, wm, wz), _t(n + 1, J - 2, wm, wz)
        a = a * i // ((T - i + 1) * wp)
        i -= 1
        n += 1
        J -= 1
    return num, total ** T


def _t(n: int, J: int, wm: int, wz: int) -> int:
    if J < 0 or J > n:
        return 0
    return comb(n, J) * wm ** J * wz ** (n - J)


def _binom_partial(n: int, J: int, u: int, w: int) -> int:
    """``sum_{j=0}^{min(J,n)} C(n,j) u^j w^(n-j)``."""
    if J < 0:
        return 0
    if J >= n:
        return (u + w) ** n
    if w == 0:
        return 0
    total, term = 0, w ** n
    for j in range(J + 1):
        total += term
        term = term * (n - j) * u // ((j + 1) * w)
    return total


def _binom_upper(n: int, lo: int, u: int, w: int) -> int:
    """``sum_{i=lo}^{n} C(n,i) u^i w^(n-i)``."""
    return (u + w) ** n - _binom_partial(n, lo - 1, u, w)


def acceptance_dp(wp: int, wm: int, total: int, T: int, c: int) -> Fraction:
    """Reference ``O(T^2)`` dynamic programme over the net count (test oracle)."""
    wz = total - wp - wm
    dist = {0: 1}
    for _ in range(T):
        nxt: dict[int, int] = {}
        for k, v in dist.items():
            for step, w in ((1, wp), (-1, wm), (0, wz)):
                if w:
                    nxt[k + step] = nxt.get(k + step, 0) + v * w
        dist = nxt
    return Fraction(sum(v for k, v in dist.items() if k >= c), total ** T)


def chernoff_upper(wp: int, wm: int, total: int, T: int, c: int) -> float:
    """Rigorous upper bound on :func:`acceptance_from_weights` (returns 1.0 when uninformative).

    Uses ``Pr[S >= c] <= z^(-c) E[z^X]^T`` with the optimal ``z = e^lambda``,
    the positive root of ``p+(1-r) z^2 - r p0 z - p-(1+r) = 0`` for
    ``r = c / T``.  Any ``z >= 1`` gives a valid bound, so rounding in the
    root only loosens it; the result is inflated by ``1e-9`` relative to
    cover floating-point error in the final evaluation.
    """
    if T <= 0 or c <= 0 or c > T or wp == 0:
        return 0.0 if (wp == 0 and c > 0) else 1.0
    pp, pm = wp / total, wm / total
    p0 = 1.0 - pp - pm
    r = c / T
    if r >= 1.0:
        return 1.0
    z = (r * p0 + math.sqrt((r * p0) ** 2 + 4 * pp * (1 - r) * pm * (1 + r))) / (2 * pp * (1 - r))
    if z <= 1.0:
        return 1.0
    log_b = T * math.log(p0 + pp * z + pm / z) - c * math.log(z)
    return min(1.0, math.exp(log_b) * (1 + 1e-9))


def acceptance_probability_exact(spec: VerifierSpec, y: Sequence[int], *, max_T: int = EXACT_T_LIMIT) -> Fraction:
    """Exact probability that :func:`run_verifier` accepts ``y``."""
    if spec.repetitions > max_T:
        raise BudgetError(f"T = {spec.repetitions} exceeds the exact-oracle limit {max_T}")
    wp, wm = signed_weights(spec, y)
    return acceptance_from_weights(wp, wm, spec.total_weight_num, spec.repetitions, spec.min_net)


# --------------------------------------------------------------------------- contract


@dataclass
class ContractReport:
    """Outcome of checking the unique-proof contract.

    ``table`` maps ``(W_plus, W_minus)`` classes to exact acceptance
    probabilities and ``proof_class`` maps each proof index (bits ``y_1..y_p``,
    ``y_1`` most significant) to its class; both are filled in exact mode.
    """

    holds: bool
    promise: Promise
    mode: str
    repetitions: int
    witnesses: tuple
    witness_acceptance: dict
    max_other_acceptance: Fraction | float | None
    violations: list
    reason: str
    table: dict = field(default_factory=dict)
    proof_class: object = None

    def acceptance(self, y: Sequence[int]) -> Fraction:
        idx = int("".join(str(b) for b in y), 2) if len(y) else 0
        return self.table[tuple(self.proof_class[idx])]


def _weights_all(spec: VerifierSpec, budget_bits: int) -> tuple[np.ndarray, np.ndarray]:
    p = spec.proof_length
    if p > budget_bits:
        raise BudgetError(f"enumerating 2^{p} proofs exceeds the budget 2^{budget_bits}")
    if spec.total_weight_num >= 1 << 62:
        raise BudgetError("weights too large for vectorised enumeration")
    idx = np.arange(1 << p, dtype=np.int64)
    wp = np.zeros(1 << p, dtype=np.int64)
    wm = np.zeros(1 << p, dtype=np.int64)
    for m in spec.monomials:
        mask = 0
        for i in m.support:
            mask |= 1 << (p - i)
        hit = (idx & mask) == mask
        if m.sign > 0:
            wp += m.weight * hit
        else:
            wm += m.weight * hit
    return wp, wm


def _pareto_front(pairs: np.ndarray) -> list[tuple[int, int]]:
    """Pairs not dominated by another with larger-or-equal ``W_plus`` and smaller-or-equal ``W_minus``."""
    order = sorted({(int(a), int(b)) for a, b in pairs}, key=lambda t: (-t[0], t[1]))
    front, best_wm = [], None
    for a, b in order:
        if best_wm is None or b < best_wm:
            front.append((a, b))
            best_wm = b
    return front


def check_pcp_contract(spec: VerifierSpec, inst: MtpInstance, *, mode: str = "auto",
                       budget_bits: int = 22, promise: Promise | None = None,
                       witness: Sequence[int] | None = None, full_table: bool = False,
                       max_T: int = EXACT_T_LIMIT, auto_max_T: int = 2000) -> ContractReport:
    """Check that exactly one proof is accepted with probability >= 2/3 and every other with <= 1/3.

    Parameters
    ----------
    mode : {"auto", "exact", "certified"}
        ``exact`` enumerates every proof and uses the exact oracle.  Proofs
        are grouped by ``(W_plus, W_minus)``; acceptance is monotone in that
        pair (more plus weight and less minus weight can only help), so it
        suffices to evaluate the non-dominated non-witness classes unless
        ``full_table`` is requested.  ``certified`` relies on the caller's
        ``promise`` and ``witness`` (obtained by exact counting upstream) and
        on rigorous Hoeffding bounds.  In exact mode the non-witness classes
        are visited in order of decreasing mean and a class is skipped when
        its Chernoff bound (:func:`chernoff_upper`) is already below the
        largest exact value found, so ``max_other_acceptance`` stays exact.
        ``auto`` picks ``exact`` when the
        proof space is within ``budget_bits`` and ``T <= auto_max_T``.
    """
    p = spec.proof_length
    T = spec.repetitions
    total = spec.total_weight_num
    c = spec.min_net
    hi, lo = Fraction(2, 3), Fraction(1, 3)
    if mode == "auto":
        mode = "exact" if (p <= budget_bits and T <= min(max_T, auto_max_T)) else "certified"
    if mode == "exact":
        wp, wm = _weights_all(spec, budget_bits)
        t = inst.scaled_threshold()
        wit_idx = np.flatnonzero((wp - wm) >= t)
        witnesses = tuple(index_to_assignment(int(x), p) for x in wit_idx)
        prom = promise_of_count(len(witnesses))
        pairs = np.stack([wp, wm], axis=1)
        table: dict = {}

        def acc(pair):
            if pair not in table:
                table[pair] = acceptance_from_weights(pair[0], pair[1], total, T, c)
            return table[pair]

        wit_acc = {w: acc((int(wp[x]), int(wm[x]))) for w, x in zip(witnesses, wit_idx)}
        mask = np.ones(len(wp), dtype=bool)
        mask[wit_idx] = False
        others = pairs[mask]
        if full_table:
            for pair in {(int(a), int(b)) for a, b in pairs}:
                acc(pair)
            cand = [(int(a), int(b)) for a, b in np.unique(others, axis=0)] if len(others) else []
        else:
            cand = _pareto_front(others) if len(others) else []
        other_vals: dict = {}
        best = None
        for pair in sorted(cand, key=lambda q: q[1] - q[0]):
            if best is not None and not full_table:
                if chernoff_upper(pair[0], pair[1], total, T, c) <= float(best) * (1 - 1e-9):
                    continue
            other_vals[pair] = acc(pair)
            best = other_vals[pair] if best is None else max(best, other_vals[pair])
        max_other = best
        bad_pairs = [pair for pair, v in other_vals.items() if v > lo]
        violations = []
        for pair in bad_pairs:
            sel = np.flatnonzero(mask & (wp == pair[0]) & (wm == pair[1]))
            violations += [(index_to_assignment(int(x), p), other_vals[pair]) for x in sel[:5]]
        weak_wit = [(w, v) for w, v in wit_acc.items() if v < hi]
        holds, reason = _verdict(prom, bad_pairs, weak_wit, max_other)
        return ContractReport(holds, prom, "exact", T, witnesses, wit_acc, max_other, violations + weak_wit,
                              reason, table, pairs)
    if mode != "certified":
        raise InputError(f"unknown contract mode {mode!r}")
    if promise is None:
        raise InputError("certified mode needs the promise established upstream")
    witnesses = (tuple(witness),) if witness is not None else ()
    B = spec.total_weight
    dev = spec.threshold - spec.gap - spec.cut  # NO-side margin below the cut (negative)
    other_bound = hoeffding_tail(B, -dev, T) if dev < 0 else 1.0
    wit_acc = {}
    for w in witnesses:
        if T <= max_T:
            wit_acc[w] = acceptance_probability_exact(spec, w, max_T=max_T)
        else:
            margin = spec.threshold - spec.cut
            wit_acc[w] = 1.0 - hoeffding_tail(B, margin, T) if margin > 0 else 0.0
    weak_wit = [(w, v) for w, v in wit_acc.items() if v < hi]
    bad = ["hoeffding"] if other_bound > lo else []
    holds, reason = _verdict(promise, bad, weak_wit, other_bound)
    return ContractReport(holds, promise, "certified", T, witnesses, wit_acc, other_bound, weak_wit, reason)


def _verdict(prom: Promise, bad_others, weak_wit, max_other) -> tuple[bool, str]:
    if prom is Promise.MULTI_YES:
        return False, "promise violated: more than one witness"
    if bad_others:
        return False, f"a non-witness proof is accepted with probability {float(max_other):.4f} > 1/3"
    if prom is Promise.UNIQUE_YES and weak_wit:
        return False, f"the witness is accepted with probability {float(weak_wit[0][1]):.4f} < 2/3"
    return True, "ok"


# --------------------------------------------------------------------------- statevector cross-check


def hadamard_test_statevector(y: Sequence[int], support: Sequence[int]) -> float:
    """Probability of measuring the ancilla in ``|0>`` for the phase ``exp(i pi prod_{S} y_i)``.

    Simulates ancilla plus the ``|S|`` proof qubits as an explicit state
    vector: ``H`` on the ancilla, controlled phase, ``H`` again.  Intended for
    ``|S| <= 6``.
    """
    bits = [int(y[i - 1]) for i in support]
    q = len(bits)
    if q > 6:
        raise BudgetError("statevector cross-check limited to 6 data qubits")
    dim = 1 << q
    data = np.zeros(dim, dtype=complex)
    data[int("".join(map(str, bits)) or "0", 2)] = 1.0
    phases = np.array([np.exp(1j * np.pi * float(all((x >> (q - 1 - k)) & 1 for k in range(q)))) if q else
                       np.exp(1j * np.pi) for x in range(dim)])
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    state = np.kron(h @ np.array([1.0, 0.0]), data)  # ancilla first
    cu = np.diag(np.concatenate([np.ones(dim), phases]))
    state = np.kron(h, np.eye(dim)) @ (cu @ state)
    return float(np.sum(np.abs(state[:dim]) ** 2))
