"""Clause arithmetization: CNF to multilinear threshold instance.

Each clause ``C_j`` becomes its multilinear indicator
``Q_j = 1 - prod_{l in C_j} (1 - lit(l))`` with ``lit(+v) = x_v`` and
``lit(-v) = 1 - x_v``, so ``Q_j(x) = 1`` exactly when ``x`` satisfies ``C_j``.
The instance is ``P = (1/m) sum_j Q_j`` with threshold ``a = 1`` and gap
``1/m``; ``P(x) = 1`` iff ``x`` satisfies every clause.  Coefficients are
stored as integer numerators over the exact denominator ``m``.

Polynomial variable ``i`` is CNF variable ``i`` (originals and auxiliaries
alike), so the witness map between the two problems is the identity.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .cnf import AUX, CnfFormula, Role
from .errors import InputError
from .poly import MtpInstance, MultilinearPoly

__all__ = ["clause_indicator", "cnf_to_mtp", "width_reduce"]


def clause_indicator(clause) -> dict[tuple, int]:
    """Integer monomial expansion of the clause indicator ``Q``.

    Duplicate literals are merged; a clause containing ``v`` and ``-v`` is a
    tautology with ``Q = 1``; the empty clause gives ``Q = 0``.
    """
    return dict(_indicator_items(frozenset(int(l) for l in clause)))


@lru_cache(maxsize=1 << 16)
def _indicator_items(lits: frozenset) -> tuple:
    return tuple(_expand_indicator(lits).items())


def _expand_indicator(lits: frozenset) -> dict[tuple, int]:
    if any(-l in lits for l in lits):
        return {(): 1}
    if not lits:
        return {}
    pos = sorted(l for l in lits if l > 0)
    negv = sorted(-l for l in lits if l < 0)
    # prod(1 - lit) = prod_{neg} x_v * prod_{pos} (1 - x_v)
    out: dict[tuple, int] = {(): 1}
    for mask in range(1 << len(pos)):
        T = [pos[i] for i in range(len(pos)) if (mask >> i) & 1]
        key = tuple(sorted(negv + T))
        sign = -1 if len(T) % 2 == 0 else 1  # the leading 1 - (...) flips the sign
        out[key] = out.get(key, 0) + sign
    return {k: v for k, v in out.items() if v != 0}


def cnf_to_mtp(cnf: CnfFormula, max_width: int = 3) -> MtpInstance:
    """Arithmetize ``cnf`` into ``(P, a=1, gap=1/m)``.

    Raises
    ------
    InputError
        If a clause is wider than ``max_width``.

    Examples
    --------
    >>> inst = cnf_to_mtp(CnfFormula(2, [(1, 2)]))
    >>> dict(inst.poly.terms)
    {(1,): 1, (2,): 1, (1, 2): -1}
    """
    for c in cnf.clauses:
        if len(set(c)) > max_width:
            raise InputError(f"clause {c} is wider than {max_width}; width-reduce it first")
    m = len(cnf.clauses)
    if m == 0:
        poly = MultilinearPoly(cnf.num_vars, 0, 0, {(): 1})
        return MtpInstance(poly, Fraction(1), Fraction(1), 2)
    acc: dict[tuple, int] = {}
    for c in cnf.clauses:
        for key, v in _indicator_items(frozenset(c)):
            acc[key] = acc.get(key, 0) + v
    terms = {k: v for k, v in acc.items() if v != 0}
    degree = max((len(k) for k in terms), default=0)
    poly = MultilinearPoly(cnf.num_vars, max(degree, min(max_width, cnf.max_width)),
                           (m - 1).bit_length(), terms, scale_den=m)
    return MtpInstance(poly, Fraction(1), Fraction(1, m), m + 1)


def width_reduce(cnf: CnfFormula, k: int) -> CnfFormula:
    """Split clauses wider than ``k`` using functionally forced link variables.

    A wide clause ``(l_1 .. l_L)`` becomes ``(l_1 .. l_{L-k+1}, z)`` together with
    the definition ``z <=> (l_{L-k+2} OR .. OR l_L)``, repeated until every clause
    fits.  Because ``z`` is defined by an equivalence, each assignment of the
    original variables keeps exactly as many satisfying extensions as before.
    """
    if k < 3:
        raise InputError("width_reduce needs k >= 3")
    n = cnf.num_vars
    roles = dict(cnf.roles)
    out: list[tuple] = []
    for c in cnf.clauses:
        c = list(c)
        while len(c) > k:
            tail = c[-(k - 1):]
            n += 1
            z = n
            roles[z] = Role(AUX, f"link#{z}")
            out.append(tuple([-z] + tail))
            out += [(z, -l) for l in tail]
            c = c[: -(k - 1)] + [z]
        out.append(tuple(c))
    return CnfFormula(n, tuple(out), roles)
