"""Witness isolation by random XOR hashing of the original variables.

For a formula with ``N`` original variables a single hash ``h(x) = A x + b``
over GF(2) is drawn with ``A`` of shape ``(N+1, N)``.  The ``k``-th output
formula conjoins the first ``k`` rows, ``XOR_{i : A[r, i] = 1} x_i = b[r]``, so the
family ``formula_1 .. formula_{N+1}`` is nested and deterministic in the seed.
Each row is Tseytin-encoded with 3-input parity gates, which keeps every
auxiliary functionally determined by the originals.

Hashing only conjoins constraints, so an unsatisfiable input stays
unsatisfiable for every seed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cnf import AUX, CnfFormula, Role, projected_counts
from .errors import BudgetError, InputError

__all__ = [
    "HashConstraint",
    "draw_hash",
    "parity_clauses",
    "encode_xor_row",
    "isolate",
    "isolation_success",
    "exact_isolation_probability",
]


@dataclass(frozen=True)
class HashConstraint:
    """Rows ``(subset of original indices, parity)``; row ``r`` reads ``XOR x_i = parity``."""

    rows: tuple

    def holds(self, x: Sequence[int]) -> bool:
        """Evaluate on an assignment of the originals (``x[i-1]`` is original ``i``)."""
        return all(sum(x[i - 1] for i in S) % 2 == p for S, p in self.rows)

    def prefix(self, k: int) -> "HashConstraint":
        return HashConstraint(self.rows[:k])


def draw_hash(num_originals: int, seed: int) -> HashConstraint:
    """Draw the ``(N+1)``-row hash used by :func:`isolate`."""
    rng = np.random.default_rng(np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF))
    n = num_originals
    A = rng.integers(0, 2, size=(n + 1, n))
    b = rng.integers(0, 2, size=n + 1)
    rows = tuple((tuple(int(i) + 1 for i in np.flatnonzero(A[r])), int(b[r])) for r in range(n + 1))
    return HashConstraint(rows)


def parity_clauses(lits: Sequence[int], parity: int) -> list[tuple]:
    """CNF of ``XOR lits = parity``: one clause per violating assignment."""
    lits = list(lits)
    out = []
    for signs in itertools.product((0, 1), repeat=len(lits)):
        if sum(signs) % 2 != parity:  # forbidden assignment: exclude it
            out.append(tuple(-l if s else l for l, s in zip(lits, signs)))
    return out


def encode_xor_row(lits: Sequence[int], parity: int, next_var: int, tag: str) -> tuple[int, list, dict]:
    """Encode ``XOR lits = parity``.

    Groups of three literals are folded into a fresh variable
    ``t <=> l1 XOR l2 XOR l3`` until at most three remain, which are then
    constrained directly.  A row of length ``L`` uses ``ceil((L-3)/2)``
    auxiliaries (none when ``L <= 3``), never more than ``ceil(L/2) - 1``.

    Returns
    -------
    (num_vars, clauses, roles)
    """
    lits = list(lits)
    clauses: list[tuple] = []
    roles: dict[int, Role] = {}
    n = next_var
    if not lits:
        if parity:
            n += 1
            roles[n] = Role(AUX, f"{tag}:unsat")
            clauses += [(n,), (-n,)]
        return n, clauses, roles
    while len(lits) > 3:
        n += 1
        roles[n] = Role(AUX, f"{tag}:xor#{n}")
        clauses += parity_clauses([lits[0], lits[1], lits[2], n], 0)
        lits = [n] + lits[3:]
    clauses += parity_clauses(lits, parity)
    return n, clauses, roles


def isolate(cnf: CnfFormula, seed: int) -> list[CnfFormula]:
    """``N+1`` formulas, the ``k``-th conjoining the first ``k`` hash rows.

    Examples
    --------
    >>> f = CnfFormula(2, [(1,), (-1,)])
    >>> [projected_counts(g) for g in isolate(f, 7)]
    [{}, {}, {}]
    """
    n = cnf.num_originals
    if n < 1:
        raise InputError("isolation needs at least one original variable")
    h = draw_hash(n, seed)
    var_of = cnf.original_vars  # original index i -> CNF variable var_of[i-1]
    out = []
    num_vars, extra, roles = cnf.num_vars, [], {}
    for r, (S, p) in enumerate(h.rows):
        num_vars, cl, rl = encode_xor_row([var_of[i - 1] for i in S], p, num_vars, f"hash{r + 1}")
        extra += cl
        roles.update(rl)
        out.append(cnf.with_clauses(extra, num_vars, roles))
    return out


def isolation_success(cnf: CnfFormula, seed: int, budget: int = 24) -> int | None:
    """First ``k`` whose formula has exactly one witness projection, else ``None``."""
    if cnf.num_originals > budget:
        raise BudgetError(f"{cnf.num_originals} originals exceed the enumeration budget {budget}")
    for k, f in enumerate(isolate(cnf, seed), start=1):
        if len(projected_counts(f, limit=2)) == 1:
            return k
    return None


def exact_isolation_probability(witnesses: Sequence[Sequence[int]], num_originals: int,
                                max_rows: int | None = None) -> Fraction:
    """Probability, over the nested hash family, that some prefix isolates one witness.

    Enumerates every ``(A, b)`` with ``max_rows`` rows (default ``N+1``) and
    checks the prefixes ``k = 1..max_rows`` as :func:`isolation_success` does.
    Feasible only for tiny ``N``.
    """
    n = num_originals
    rows = n + 1 if max_rows is None else max_rows
    if rows * (n + 1) > 22:
        raise BudgetError("hash family too large to enumerate")
    W = np.array(witnesses, dtype=np.int64).reshape(-1, n)
    # each row is a vector in {0,1}^(n+1): n coefficients plus the parity
    vecs = np.array(list(itertools.product((0, 1), repeat=n + 1)), dtype=np.int64)
    sat_row = ((W @ vecs[:, :n].T) % 2) == vecs[:, n]  # shape (|W|, 2^(n+1))
    hits = 0
    for combo in itertools.product(range(len(vecs)), repeat=rows):
        alive = np.ones(len(W), dtype=bool)
        for r in combo:
            alive &= sat_row[:, r]
            if alive.sum() == 1:
                hits += 1
                break
            if not alive.any():
                break
    return Fraction(hits, len(vecs) ** rows)
