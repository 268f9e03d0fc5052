"""Compile a multilinear threshold instance into CNF through a Tseytin-encoded circuit.

The circuit evaluates ``P'(y) = sum_S v_S AND_{i in S} y_i`` in two's
complement and compares it with the scaled threshold:

* one AND gate per monomial (:func:`encode_monomial`);
* constant multiplication by wire selection (:func:`scale_by_constant`), since
  the bits of ``v_S`` are compile-time constants;
* a balanced tree of ripple-carry adders (:func:`add_bundles`);
* a comparator against a constant (:func:`compare_geq`).

Wires are either CNF literals (non-zero ints) or Python booleans for
constants.  Gates fold constants eagerly, so constant wires never reach the
clause set.  Every gate output is a fresh auxiliary variable whose value is a
function of its inputs, so each assignment of the originals has at most one
satisfying extension.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

from .cnf import AUX, ORIGINAL, CnfFormula, Role
from .errors import InputError
from .poly import MtpInstance

__all__ = [
    "Wire",
    "GateBuilder",
    "WireBundle",
    "encode_monomial",
    "scale_by_constant",
    "add_bundles",
    "compare_geq",
    "bundle_value",
    "mtp_to_sat",
]

Wire = Union[int, bool]


def neg(w: Wire) -> Wire:
    return (not w) if isinstance(w, bool) else -w


class GateBuilder:
    """Sequential allocator of auxiliary variables and Tseytin clauses.

    Parameters
    ----------
    num_originals : int
        Variables ``1..num_originals`` are the originals ``y_1..y_N``.
    """

    def __init__(self, num_originals: int = 0, roles: dict | None = None, num_vars: int | None = None):
        self.num_vars = num_originals if num_vars is None else num_vars
        self.clauses: list[tuple] = []
        self.roles: dict[int, Role] = dict(roles) if roles is not None else {
            i: Role(ORIGINAL, i) for i in range(1, num_originals + 1)
        }
        self._gate_id = 0

    def new_var(self, kind: str) -> int:
        self.num_vars += 1
        self._gate_id += 1
        self.roles[self.num_vars] = Role(AUX, f"{kind}#{self._gate_id}")
        return self.num_vars

    def add(self, *clauses: Sequence[int]) -> None:
        self.clauses.extend(tuple(c) for c in clauses)

    def formula(self) -> CnfFormula:
        return CnfFormula(self.num_vars, tuple(self.clauses), self.roles)

    # ---------------------------------------------------------------- gates

    def and_(self, wires: Sequence[Wire], kind: str = "and") -> Wire:
        lits: list[int] = []
        for w in wires:
            if w is False:
                return False
            if w is True:
                continue
            if -w in lits:
                return False
            if w not in lits:
                lits.append(w)
        if not lits:
            return True
        if len(lits) == 1:
            return lits[0]
        g = self.new_var(kind)
        self.add(*[(-g, l) for l in lits])
        self.add(tuple([g] + [-l for l in lits]))
        return g

    def or_(self, wires: Sequence[Wire], kind: str = "or") -> Wire:
        return neg(self.and_([neg(w) for w in wires], kind))

    def xor2(self, a: Wire, b: Wire, kind: str = "xor") -> Wire:
        if isinstance(a, bool):
            return neg(b) if a else b
        if isinstance(b, bool):
            return neg(a) if b else a
        if a == b:
            return False
        if a == -b:
            return True
        g = self.new_var(kind)
        self.add((-g, a, b), (-g, -a, -b), (g, -a, b), (g, a, -b))
        return g

    def maj3(self, a: Wire, b: Wire, c: Wire, kind: str = "maj") -> Wire:
        consts = [w for w in (a, b, c) if isinstance(w, bool)]
        if consts:
            rest = [w for w in (a, b, c) if not isinstance(w, bool)]
            if len(consts) >= 2:
                if consts[0] == consts[1]:
                    return consts[0]
                return rest[0] if rest else consts[2]
            return self.or_(rest, kind) if consts[0] else self.and_(rest, kind)
        if a == b or a == c:
            return a
        if b == c:
            return b
        if a == -b:
            return c
        if a == -c:
            return b
        if b == -c:
            return a
        g = self.new_var(kind)
        self.add((-a, -b, g), (-a, -c, g), (-b, -c, g), (a, b, -g), (a, c, -g), (b, c, -g))
        return g

    def full_add(self, a: Wire, b: Wire, c: Wire) -> tuple[Wire, Wire]:
        """Return ``(sum, carry)`` of three input bits."""
        s = self.xor2(self.xor2(a, b, "sum"), c, "sum")
        return s, self.maj3(a, b, c, "carry")


@dataclass(frozen=True)
class WireBundle:
    """Little-endian list of wires encoding an integer.

    When ``signed`` is set the most significant wire is the two's-complement
    sign bit.
    """

    bits: tuple
    signed: bool = True

    def __post_init__(self) -> None:
        if len(self.bits) < 1:
            raise InputError("a bundle needs at least one bit")

    @property
    def width(self) -> int:
        return len(self.bits)

    def extended(self, width: int) -> "WireBundle":
        pad = self.bits[-1] if self.signed else False
        return WireBundle(self.bits + (pad,) * (width - self.width), self.signed)


def bundle_value(bundle: WireBundle, assignment) -> int:
    """Integer value of ``bundle`` when variable ``v`` takes ``assignment[v]``.

    ``assignment`` may be any mapping or sequence indexable by variable number
    (use a dict, or a list with a dummy entry at index 0).
    """
    total = 0
    for i, w in enumerate(bundle.bits):
        if isinstance(w, bool):
            bit = int(w)
        else:
            val = assignment[abs(w)]
            bit = int(val if w > 0 else 1 - val)
        total += bit << i
    if bundle.signed and total >= 1 << (bundle.width - 1):
        total -= 1 << bundle.width
    return total


def encode_monomial(S: Sequence[int], builder: GateBuilder) -> tuple[Wire, list]:
    """Gate literal ``g`` with ``g <=> AND_{i in S} y_i`` and the clauses added.

    An empty ``S`` gives the constant ``True``; a singleton gives the variable
    itself.  Variables are addressed through their CNF numbers (``y_i`` is
    variable ``i``).
    """
    start = len(builder.clauses)
    g = builder.and_([int(i) for i in sorted(S)], kind="mono")
    return g, builder.clauses[start:]


def min_signed_width(v: int) -> int:
    """Smallest two's-complement width that represents ``v``."""
    return (v.bit_length() if v >= 0 else (-v - 1).bit_length()) + 1


def scale_by_constant(g: Wire, v: int, width: int | None = None) -> WireBundle:
    """Bundle equal to ``v`` when ``g`` is true and to 0 otherwise.

    Bit ``i`` is ``g`` if bit ``i`` of the two's-complement pattern of ``v`` is
    set and the constant 0 otherwise.  Without ``width`` a non-negative ``v``
    gives its plain unsigned binary (so ``v = 5`` gives ``[g, 0, g]``); with
    ``width`` the bundle is signed.
    """
    v = int(v)
    if width is None:
        if v >= 0:
            w = max(1, v.bit_length())
            return WireBundle(tuple(g if (v >> i) & 1 else False for i in range(w)), signed=False)
        width = min_signed_width(v)
    if min_signed_width(v) > width:
        raise InputError(f"coefficient {v} overflows width {width}")
    pattern = v & ((1 << width) - 1)
    return WireBundle(tuple(g if (pattern >> i) & 1 else False for i in range(width)), signed=True)


def add_bundles(a: WireBundle, b: WireBundle, builder: GateBuilder) -> WireBundle:
    """Ripple-carry sum; the result is one bit wider than the wider input."""
    if a.signed != b.signed:
        raise InputError("cannot add bundles of different signedness")
    w = max(a.width, b.width) + 1
    aa, bb = a.extended(w), b.extended(w)
    carry: Wire = False
    out = []
    for x, y in zip(aa.bits, bb.bits):
        s, carry = builder.full_add(x, y, carry)
        out.append(s)
    return WireBundle(tuple(out), a.signed)


def compare_geq(bundle: WireBundle, threshold: int, builder: GateBuilder) -> tuple[Wire, list]:
    """Literal true iff the bundle's integer value is at least ``threshold``.

    Thresholds outside the representable range fold to constants.  Signed
    bundles are compared through the offset-binary trick (flip the sign bit
    and add ``2**(w-1)`` to the threshold).
    """
    start = len(builder.clauses)
    w = bundle.width
    bits = list(bundle.bits)
    t = int(threshold)
    if bundle.signed:
        lo, hi = -(1 << (w - 1)), (1 << (w - 1)) - 1
        bits[-1] = neg(bits[-1])
        c = t + (1 << (w - 1))
    else:
        lo, hi = 0, (1 << w) - 1
        c = t
    if t <= lo:
        return True, []
    if t > hi:
        return False, []
    # ge holds the truth of "bits[0..i] >= c[0..i]" as we move up from the LSB
    ge: Wire = True
    for i in range(w):
        if (c >> i) & 1:
            ge = builder.and_([bits[i], ge], kind="cmp")
        else:
            ge = builder.or_([bits[i], ge], kind="cmp")
    return ge, builder.clauses[start:]


def mtp_to_sat(inst: MtpInstance) -> CnfFormula:
    """CNF whose witness projections are exactly ``{y : P(y) >= a}``.

    Variables ``1..N`` are the originals, auxiliaries follow in allocation
    order.  An always-false comparator yields the explicit UNSAT marker
    ``[u], [-u]`` on one fresh auxiliary.

    Examples
    --------
    >>> from qcollapse.poly import MultilinearPoly, MtpInstance
    >>> from qcollapse.cnf import witness_projections
    >>> inst = MtpInstance(MultilinearPoly(2, 2, 0, {(1, 2): 1}), 1, 1, 2)
    >>> witness_projections(mtp_to_sat(inst))
    ((1, 1),)
    """
    poly = inst.poly
    builder = GateBuilder(poly.num_vars)
    terms = list(poly.terms.items())
    k = max((min_signed_width(v) for _, v in terms), default=1)
    bundles = []
    for S, v in terms:
        g, _ = encode_monomial(S, builder)
        bundles.append(scale_by_constant(g, v, k))
    if not bundles:
        bundles = [WireBundle((False,), signed=True)]
    while len(bundles) > 1:
        nxt = [add_bundles(bundles[j], bundles[j + 1], builder) for j in range(0, len(bundles) - 1, 2)]
        if len(bundles) % 2:
            nxt.append(bundles[-1])
        bundles = nxt
    out, _ = compare_geq(bundles[0], inst.scaled_threshold(), builder)
    if out is False:
        u = builder.new_var("unsat")
        builder.add((u,), (-u,))
    elif out is not True:
        builder.add((out,))
    return builder.formula()
