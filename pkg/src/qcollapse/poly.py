"""Exact multilinear threshold instances.

A :class:`MultilinearPoly` stores integer numerators ``v_S`` over a common
integer denominator, so ``P(y) = sum_S v_S prod_{i in S} y_i / den``.  The
denominator defaults to ``2**scale_bits``; instances produced by clause
arithmetization use a non-dyadic denominator (the clause count) instead, which
keeps every value exact.  No floating point is used anywhere in this module.

Variables are numbered ``1..N`` and assignments are tuples of 0/1 integers.
Enumeration order is lexicographic with ``y_1`` as the most significant bit.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import BudgetError, InputError

__all__ = [
    "DEFAULT_BUDGET",
    "Assignment",
    "MultilinearPoly",
    "MtpInstance",
    "Decision",
    "Promise",
    "as_assignment",
    "evaluate",
    "evaluate_all",
    "descaled",
    "all_assignments",
    "brute_force_decide",
    "classify_promise",
    "check_instance_range",
    "poly_to_dict",
    "instance_to_json",
    "instance_from_json",
    "save_instance",
    "load_instance",
]

#: Default cap on the number of variables that may be enumerated exhaustively.
DEFAULT_BUDGET = 24

Assignment = tuple  # tuple[int, ...] of 0/1 values, length N
Term = tuple  # sorted tuple of 1-based variable indices


def _canonical_key(S: Iterable[int]) -> Term:
    return tuple(sorted(int(i) for i in S))


def _term_order(S: Term) -> tuple:
    return (len(S), S)


@dataclass(frozen=True)
class MultilinearPoly:
    """Sparse multilinear polynomial with exact integer numerators.

    Parameters
    ----------
    num_vars : int
        Number of Boolean variables ``N``.
    degree_bound : int
        Upper bound ``d`` on the size of every monomial.
    scale_bits : int
        Fixed-point scale ``l``.  The denominator is ``2**l`` unless
        ``scale_den`` is given.
    terms : mapping
        Map from variable-index sets to non-zero integer numerators.  Keys may
        be any iterable of indices and are normalised to sorted tuples.
    scale_den : int, optional
        Explicit positive denominator overriding ``2**scale_bits``.
    """

    num_vars: int
    degree_bound: int
    scale_bits: int
    terms: Mapping[Term, int] = field(default_factory=dict)
    scale_den: int | None = None

    def __post_init__(self) -> None:
        if int(self.num_vars) < 0:
            raise InputError("num_vars must be non-negative")
        if int(self.degree_bound) < 0 or int(self.scale_bits) < 0:
            raise InputError("degree_bound and scale_bits must be non-negative")
        if self.scale_den is not None and int(self.scale_den) <= 0:
            raise InputError("scale_den must be positive")
        clean: dict[Term, int] = {}
        for raw_key, coeff in dict(self.terms).items():
            key = _canonical_key((raw_key,) if isinstance(raw_key, int) else raw_key)
            if len(set(key)) != len(key):
                raise InputError(f"duplicate variable inside monomial {key}")
            if key in clean:
                raise InputError(f"duplicate monomial key {key}")
            if len(key) > self.degree_bound:
                raise InputError(f"monomial {key} exceeds degree bound {self.degree_bound}")
            if any(i < 1 or i > self.num_vars for i in key):
                raise InputError(f"monomial {key} refers to a variable outside 1..{self.num_vars}")
            if int(coeff) != coeff:
                raise InputError("coefficients must be integers")
            if coeff == 0:
                raise InputError(f"zero coefficient stored for monomial {key}")
            clean[key] = int(coeff)
        ordered = {k: clean[k] for k in sorted(clean, key=_term_order)}
        object.__setattr__(self, "terms", ordered)

    @property
    def denominator(self) -> int:
        """Common denominator of all coefficients."""
        return int(self.scale_den) if self.scale_den is not None else 1 << int(self.scale_bits)

    @property
    def coeff_bits(self) -> int:
        """Smallest ``k`` with ``|v_S| <= 2**k`` for every stored numerator."""
        return max((abs(v) - 1).bit_length() if abs(v) > 1 else 0 for v in self.terms.values()) if self.terms else 0

    @property
    def degree(self) -> int:
        return max((len(S) for S in self.terms), default=0)

    def beta(self, S: Iterable[int]) -> Fraction:
        """Exact rational coefficient of the monomial ``S``."""
        return Fraction(self.terms.get(_canonical_key(S), 0), self.denominator)

    def l1_numerator(self) -> int:
        """``sum |v_S|``; the verifier's total weight is this over the denominator."""
        return sum(abs(v) for v in self.terms.values())


@dataclass(frozen=True)
class MtpInstance:
    """Multilinear threshold instance ``(P, a, delta_D)``.

    Parameters
    ----------
    poly : MultilinearPoly
    threshold : Fraction
        Threshold ``a``.  It must be a non-negative multiple of ``gap``.
    gap : Fraction
        Spacing ``delta_D`` of the value grid (interpreted as the gap between
        YES and NO values).
    value_set_size : int
        Size of the value grid ``D``.

    Notes
    -----
    Construction only performs cheap checks.  The range invariant
    ``0 <= P(y) <= 1`` needs enumeration and is checked separately by
    :func:`check_instance_range`.  Thresholds above 1 are accepted because an
    unreachable threshold is the simplest encoding of a NO instance.
    """

    poly: MultilinearPoly
    threshold: Fraction
    gap: Fraction
    value_set_size: int

    def __post_init__(self) -> None:
        a = Fraction(self.threshold)
        g = Fraction(self.gap)
        if g <= 0:
            raise InputError("gap must be positive")
        if a < 0:
            raise InputError("threshold must be non-negative")
        if (a / g).denominator != 1:
            raise InputError(f"threshold {a} is not on the grid of spacing {g}")
        if int(self.value_set_size) < 1:
            raise InputError("value_set_size must be positive")
        object.__setattr__(self, "threshold", a)
        object.__setattr__(self, "gap", g)
        object.__setattr__(self, "value_set_size", int(self.value_set_size))

    @property
    def num_vars(self) -> int:
        return self.poly.num_vars

    def scaled_threshold(self) -> int:
        """Smallest integer ``t`` with ``P'(y) >= t  <=>  P(y) >= a``."""
        num = self.threshold * self.poly.denominator
        return -((-num.numerator) // num.denominator)


class Promise(enum.Enum):
    """Witness-count classification of an instance."""

    UNIQUE_YES = "UNIQUE_YES"
    MULTI_YES = "MULTI_YES"
    NO = "NO"


@dataclass(frozen=True)
class Decision:
    """Outcome of exhaustive search: ``yes`` iff ``witnesses`` is non-empty."""

    witnesses: tuple

    @property
    def yes(self) -> bool:
        return bool(self.witnesses)

    def __repr__(self) -> str:
        return f"YES({list(self.witnesses)})" if self.yes else "NO"


def as_assignment(bits, num_vars: int | None = None) -> Assignment:
    """Normalise a bit string or sequence into an assignment tuple."""
    if isinstance(bits, str):
        seq = [c for c in bits.strip() if not c.isspace() and c != ","]
        if any(c not in "01" for c in seq):
            raise InputError(f"assignment string must contain only 0/1, got {bits!r}")
        out = tuple(int(c) for c in seq)
    else:
        out = tuple(int(b) for b in bits)
        if any(b not in (0, 1) for b in out):
            raise InputError("assignment entries must be 0 or 1")
    if num_vars is not None and len(out) != num_vars:
        raise InputError(f"assignment has length {len(out)}, expected {num_vars}")
    return out


def evaluate(poly: MultilinearPoly, y: Sequence[int]) -> int:
    """Scaled value ``P'(y) = den * P(y)`` as an exact integer.

    Examples
    --------
    >>> p = MultilinearPoly(2, 2, 0, {(1, 2): 1})
    >>> evaluate(p, (1, 1)), evaluate(p, (1, 0))
    (1, 0)
    """
    y = as_assignment(y, poly.num_vars)
    return sum(v for S, v in poly.terms.items() if all(y[i - 1] for i in S))


def descaled(poly: MultilinearPoly, y: Sequence[int]) -> Fraction:
    """Exact rational value ``P(y)``."""
    return Fraction(evaluate(poly, y), poly.denominator)


def all_assignments(n: int) -> Iterator[Assignment]:
    """All ``2**n`` assignments in lexicographic order."""
    for x in range(1 << n):
        yield tuple((x >> (n - 1 - i)) & 1 for i in range(n))


def index_to_assignment(x: int, n: int) -> Assignment:
    return tuple((x >> (n - 1 - i)) & 1 for i in range(n))


def _check_budget(n: int, budget: int) -> None:
    if n > budget:
        raise BudgetError(f"enumerating 2^{n} assignments exceeds the budget of 2^{budget}")


def evaluate_all(poly: MultilinearPoly, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """Scaled values at every assignment, indexed by the integer whose bits are ``y_1..y_N``.

    Uses 64-bit integers when the coefficient sum provably fits, otherwise
    Python integers in an object array.
    """
    n = poly.num_vars
    _check_budget(n, budget)
    idx = np.arange(1 << n, dtype=np.int64)
    exact64 = poly.l1_numerator() < (1 << 62)
    out = np.zeros(1 << n, dtype=np.int64 if exact64 else object)
    for S, v in poly.terms.items():
        mask = 0
        for i in S:
            mask |= 1 << (n - i)
        hit = (idx & mask) == mask
        if exact64:
            out += np.int64(v) * hit
        else:
            out[hit] = out[hit] + v
    return out


def brute_force_decide(inst: MtpInstance, budget: int = DEFAULT_BUDGET) -> Decision:
    """All witnesses ``y`` with ``P(y) >= a``, sorted lexicographically.

    Raises
    ------
    BudgetError
        If ``N`` exceeds ``budget``.
    """
    values = evaluate_all(inst.poly, budget)
    t = inst.scaled_threshold()
    hits = np.flatnonzero(values >= t)
    n = inst.num_vars
    return Decision(tuple(index_to_assignment(int(x), n) for x in hits))


def classify_promise(inst: MtpInstance, budget: int = DEFAULT_BUDGET) -> Promise:
    """UNIQUE_YES, MULTI_YES or NO according to the number of witnesses."""
    return promise_of_count(len(brute_force_decide(inst, budget).witnesses))


def promise_of_count(count: int) -> Promise:
    if count == 0:
        return Promise.NO
    return Promise.UNIQUE_YES if count == 1 else Promise.MULTI_YES


def check_instance_range(inst: MtpInstance, budget: int = DEFAULT_BUDGET) -> None:
    """Enumerate all assignments and check ``0 <= P(y) <= 1``.

    Raises
    ------
    InputError
        If some value falls outside ``[0, 1]``.
    """
    values = evaluate_all(inst.poly, budget)
    lo, hi = int(values.min()), int(values.max())
    den = inst.poly.denominator
    if lo < 0 or hi > den:
        raise InputError(f"values span [{Fraction(lo, den)}, {Fraction(hi, den)}], outside [0, 1]")


# --------------------------------------------------------------------------- I/O


def poly_to_dict(poly: MultilinearPoly) -> dict:
    out = {
        "num_vars": poly.num_vars,
        "degree_bound": poly.degree_bound,
        "scale_bits": poly.scale_bits,
        "terms": [{"vars": list(S), "coeff": v} for S, v in poly.terms.items()],
    }
    if poly.scale_den is not None:
        out["scale_den"] = poly.scale_den
    return out


def instance_to_json(inst: MtpInstance) -> str:
    """Canonical JSON text; identical instances give identical bytes."""
    doc = poly_to_dict(inst.poly)
    doc.update(
        threshold_num=inst.threshold.numerator,
        threshold_den=inst.threshold.denominator,
        gap_num=inst.gap.numerator,
        gap_den=inst.gap.denominator,
        value_set_size=inst.value_set_size,
    )
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def instance_from_json(text: str) -> MtpInstance:
    try:
        doc = json.loads(text)
        keys = [tuple(t["vars"]) for t in doc["terms"]]
        if len(set(keys)) != len(keys):
            raise InputError("duplicate monomial in the term list")
        poly = MultilinearPoly(
            num_vars=int(doc["num_vars"]),
            degree_bound=int(doc["degree_bound"]),
            scale_bits=int(doc["scale_bits"]),
            terms={tuple(t["vars"]): int(t["coeff"]) for t in doc["terms"]},
            scale_den=doc.get("scale_den"),
        )
        a = Fraction(int(doc["threshold_num"]), int(doc["threshold_den"]))
        g = Fraction(int(doc["gap_num"]), int(doc["gap_den"]))
        size = int(doc.get("value_set_size", int(1 / g) + 1))
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"malformed instance document: {exc}") from exc
    return MtpInstance(poly, a, g, size)


def save_instance(inst: MtpInstance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(instance_to_json(inst))


def load_instance(path) -> MtpInstance:
    with open(path, encoding="utf-8") as fh:
        return instance_from_json(fh.read())
