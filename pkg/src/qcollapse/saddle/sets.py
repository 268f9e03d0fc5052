"""Constrained proof sets and their semidefinite descriptions.

A :class:`FeasibleSetSpec` lists register dimensions ``(d_1, ..., d_r)``.  All
entanglement constraints refer to the split between the last register and
the rest, so every set has a *bipartite form* ``(D_rest, d_r)``.

Convex outer descriptions
-------------------------
FULL
    the density matrices; exact.
SEPARABLE
    relaxed to the PPT states, which is exact when ``D_rest * d_r <= 6``.
ENT_BOUNDED(b), 0 < b < ln min(D_rest, d_r)
    ``S(rho||tau) <= b`` implies ``F(rho, tau) >= exp(-b/2)`` for the
    root fidelity ``F`` because the order-1/2 Renyi divergence never exceeds
    the relative entropy.  The set is therefore contained in

        { rho : exists PPT state tau and X with [[rho, X], [X^dagger, tau]] >= 0
                and Re Tr X >= exp(-b/2) },

    which is convex and SDP-representable.  This superset is used for upper
    brackets only; lower brackets always come from states certified to lie in
    the true set.
ENT_BOUNDED(b) with b >= ln min(D_rest, d_r)
    every state qualifies, so the set equals FULL.
CONSISTENT(parent, b)
    states whose partial trace over the last register equals ``parent``,
    intersected with the entanglement description above for the bound ``b``
    (``None`` means no entanglement limit).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import cvxpy as cp
import numpy as np

from ..errors import InputError
from .states import PSD_TOL, hermitize, partial_trace

__all__ = [
    "SetKind",
    "FeasibleSetSpec",
    "full_set",
    "separable_set",
    "ent_bounded_set",
    "consistent_set",
    "parse_set_spec",
    "psd",
    "primal_constraints",
    "inner_min_dual",
    "consistent_max_dual",
    "reduced_map",
]


class SetKind(str, Enum):
    FULL = "FULL"
    SEPARABLE = "SEPARABLE"
    ENT_BOUNDED = "ENT_BOUNDED"
    CONSISTENT = "CONSISTENT"


@dataclass(frozen=True, eq=False)
class FeasibleSetSpec:
    """Description of a constrained set of density matrices.

    Parameters
    ----------
    kind : SetKind
    registers : tuple of int
        Register dimensions, oldest first.
    bound : float or None
        Entanglement bound in nats between the last register and the rest.
        Forced to 0 for SEPARABLE; ignored for FULL; optional for CONSISTENT.
    parent : ndarray or None
        For CONSISTENT sets, the required reduced state on all registers but
        the last.
    """

    kind: SetKind
    registers: tuple
    bound: float | None = None
    parent: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        regs = tuple(int(d) for d in self.registers)
        if not regs or min(regs) < 1:
            raise InputError("register dimensions must be positive integers")
        object.__setattr__(self, "registers", regs)
        kind = SetKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is SetKind.SEPARABLE:
            if self.bound not in (None, 0, 0.0):
                raise InputError("a separable set has bound 0")
            object.__setattr__(self, "bound", 0.0)
        if kind is SetKind.ENT_BOUNDED:
            if self.bound is None or not np.isfinite(self.bound) or self.bound < 0:
                raise InputError("ENT_BOUNDED needs a finite bound b >= 0")
        if kind in (SetKind.SEPARABLE, SetKind.ENT_BOUNDED, SetKind.CONSISTENT) and len(regs) < 2:
            raise InputError(f"{kind.value} needs at least two registers")
        if kind is SetKind.CONSISTENT:
            if self.parent is None:
                raise InputError("CONSISTENT needs a parent state")
            p = np.asarray(self.parent, dtype=complex)
            if p.shape != (self.rest_dim, self.rest_dim):
                raise InputError(
                    f"parent has shape {p.shape}, expected the reduced dimension {self.rest_dim}")
            if (np.max(np.abs(p - p.conj().T)) > 1e-10 or abs(np.trace(p).real - 1) > 1e-10
                    or np.linalg.eigvalsh(hermitize(p))[0] < -PSD_TOL):
                raise InputError("parent is not a density matrix")
            object.__setattr__(self, "parent", hermitize(p))
            if self.bound is not None and self.bound < 0:
                raise InputError("entanglement bound must be non-negative")
        if kind is SetKind.FULL:
            object.__setattr__(self, "bound", None)

    # ------------------------------------------------------------------ geometry
    @property
    def dim(self) -> int:
        return int(np.prod(self.registers))

    @property
    def rest_dim(self) -> int:
        return int(np.prod(self.registers[:-1])) if len(self.registers) > 1 else 1

    @property
    def last_dim(self) -> int:
        return self.registers[-1]

    @property
    def split(self) -> tuple[int, int]:
        return self.rest_dim, self.last_dim

    @property
    def max_entanglement(self) -> float:
        """Largest relative entropy of entanglement any state on the split can have."""
        return math.log(min(self.split)) if len(self.registers) > 1 else 0.0

    # ------------------------------------------------------------------ normal forms
    @property
    def ent_level(self) -> str:
        """``"none"`` (no constraint), ``"sep"`` (bound 0) or ``"bounded"``."""
        if self.kind is SetKind.FULL or self.bound is None:
            return "none"
        if self.bound >= self.max_entanglement:
            return "none"
        if self.bound == 0:
            return "sep"
        return "bounded"

    def normalized(self) -> "FeasibleSetSpec":
        """Equivalent spec with non-binding and zero bounds rewritten."""
        lvl = self.ent_level
        if self.kind is SetKind.CONSISTENT:
            b = None if lvl == "none" else self.bound
            return FeasibleSetSpec(SetKind.CONSISTENT, self.registers, b, self.parent)
        if lvl == "none":
            return FeasibleSetSpec(SetKind.FULL, self.registers)
        if lvl == "sep":
            return FeasibleSetSpec(SetKind.SEPARABLE, self.registers, 0.0)
        return FeasibleSetSpec(SetKind.ENT_BOUNDED, self.registers, float(self.bound))

    @property
    def relaxation_exact(self) -> bool:
        """Whether the SDP description equals the set itself."""
        lvl = self.ent_level
        if lvl == "none":
            return True
        if lvl == "sep":
            return self.dim <= 6
        return False

    def canonical(self) -> tuple:
        """Bipartite normal form used for structural comparisons of programs."""
        n = self.normalized()
        if n.kind is SetKind.FULL:
            return ("FULL", n.dim)
        if n.kind is SetKind.CONSISTENT:
            return ("CONSISTENT", n.split, n.bound, n.parent.round(12).tobytes())
        return (n.kind.value, n.split, float(n.bound))

    def describe(self) -> str:
        if self.kind is SetKind.FULL:
            return f"full@{','.join(map(str, self.registers))}"
        if self.kind is SetKind.SEPARABLE:
            return f"sep@{','.join(map(str, self.registers))}"
        if self.kind is SetKind.ENT_BOUNDED:
            return f"ent:{self.bound:g}@{','.join(map(str, self.registers))}"
        return f"consistent:{self.bound}@{','.join(map(str, self.registers))}"


def full_set(*registers: int) -> FeasibleSetSpec:
    return FeasibleSetSpec(SetKind.FULL, registers)


def separable_set(*registers: int) -> FeasibleSetSpec:
    return FeasibleSetSpec(SetKind.SEPARABLE, registers, 0.0)


def ent_bounded_set(bound: float, *registers: int) -> FeasibleSetSpec:
    return FeasibleSetSpec(SetKind.ENT_BOUNDED, registers, float(bound))


def consistent_set(parent: np.ndarray, last_dim: int, rest_registers: Sequence[int] | None = None,
                   bound: float | None = None) -> FeasibleSetSpec:
    parent = np.asarray(parent, dtype=complex)
    regs = tuple(rest_registers) if rest_registers is not None else (parent.shape[0],)
    return FeasibleSetSpec(SetKind.CONSISTENT, regs + (int(last_dim),), bound, parent)


def parse_set_spec(text: str) -> FeasibleSetSpec:
    """Parse ``full@4``, ``sep@2,2`` or ``ent:0.3@2,2``.

    Examples
    --------
    >>> parse_set_spec("ent:0.25@2,2").describe()
    'ent:0.25@2,2'
    """
    try:
        head, regs = text.strip().split("@")
        registers = tuple(int(x) for x in regs.split(","))
        if head == "full":
            return full_set(*registers)
        if head in ("sep", "separable"):
            return separable_set(*registers)
        if head.startswith("ent:"):
            return ent_bounded_set(float(head[4:]), *registers)
    except ValueError as exc:
        raise InputError(f"malformed set spec {text!r}: {exc}") from exc
    raise InputError(f"unknown set kind in {text!r}; use full@, sep@ or ent:<b>@")


# --------------------------------------------------------------------------- SDP pieces


def psd(expr) -> cp.Constraint:
    """PSD constraint on the Hermitian part of ``expr``."""
    return (expr + expr.H) / 2 >> 0


def _pt_last(expr, split: tuple[int, int]):
    return cp.partial_transpose(expr, list(split), 1)


def _fidelity_cut(spec: FeasibleSetSpec) -> float:
    return math.exp(-spec.bound / 2)


def primal_constraints(spec: FeasibleSetSpec, X: cp.Expression) -> list:
    """Constraints placing the variable ``X`` in the convex outer description of ``spec``."""
    spec = spec.normalized()
    cons = [psd(X), cp.real(cp.trace(X)) == 1]
    lvl = spec.ent_level
    if spec.kind is SetKind.CONSISTENT:
        cons.append(cp.partial_trace(X, list(spec.split), 1) == spec.parent)
    if lvl == "sep":
        cons.append(psd(_pt_last(X, spec.split)))
    elif lvl == "bounded":
        D = spec.dim
        tau = cp.Variable((D, D), hermitian=True)
        Xo = cp.Variable((D, D), complex=True)
        cons += [tau >> 0, cp.real(cp.trace(tau)) == 1, psd(_pt_last(tau, spec.split)),
                 psd(cp.bmat([[X, Xo], [Xo.H, tau]])),
                 cp.real(cp.trace(Xo)) >= _fidelity_cut(spec)]
    return cons


def inner_min_dual(spec: FeasibleSetSpec, M: cp.Expression) -> tuple[cp.Expression, list]:
    """``min_{sigma in spec} Re Tr(M sigma)`` written as ``max obj`` subject to the returned constraints.

    ``M`` may depend affinely on outer variables; strong duality holds since
    every description has a strictly feasible point (the maximally mixed
    state, or ``parent (x) I/d`` for CONSISTENT sets).
    """
    spec = spec.normalized()
    D = spec.dim
    lvl = spec.ent_level
    cons: list = []
    if spec.kind is SetKind.CONSISTENT:
        Y = cp.Variable((spec.rest_dim, spec.rest_dim), hermitian=True)
        base = M - cp.kron(Y, np.eye(spec.last_dim))
        obj = cp.real(cp.trace(Y @ spec.parent))
    else:
        t = cp.Variable()
        base = M - t * np.eye(D)
        obj = t
    if lvl == "none":
        cons.append(psd(base))
    elif lvl == "sep":
        Q = cp.Variable((D, D), hermitian=True)
        cons += [Q >> 0, psd(base - _pt_last(Q, spec.split))]
    else:
        Q = cp.Variable((D, D), hermitian=True)
        mu = cp.Variable(nonneg=True)
        nu = cp.Variable()
        I = np.eye(D)
        cons += [Q >> 0, psd(cp.bmat([[base, (mu / 2) * I],
                                      [(mu / 2) * I, nu * I - _pt_last(Q, spec.split)]]))]
        obj = obj + mu * _fidelity_cut(spec) - nu
    return obj, cons


def consistent_max_dual(W: cp.Expression, parent, spec: FeasibleSetSpec) -> tuple[cp.Expression, list, cp.Variable]:
    """``max Re Tr(W rho)`` over consistent extensions of ``parent`` as ``min obj``.

    ``parent`` may be a constant matrix or a pair ``(Re parent, Im parent)`` of
    real cvxpy Parameters (real parameters keep the problem cacheable across
    repeated solves); ``spec`` supplies the
    registers and the entanglement bound (its own ``parent`` is ignored).
    Returns the objective, the constraints and the dual variable ``Y`` whose
    value is a supergradient of the optimal value as a function of ``parent``.
    """
    rest, last = spec.split
    D = rest * last
    lvl = FeasibleSetSpec(SetKind.ENT_BOUNDED if spec.bound is not None else SetKind.FULL,
                          spec.registers, spec.bound).ent_level
    Y = cp.Variable((rest, rest), hermitian=True)
    base = cp.kron(Y, np.eye(last)) - W
    if isinstance(parent, tuple):
        p_re, p_im = parent
        obj = cp.sum(cp.multiply(cp.real(Y), p_re)) + cp.sum(cp.multiply(cp.imag(Y), p_im))
    else:
        obj = cp.real(cp.trace(Y @ parent))
    cons: list = []
    if lvl == "none":
        cons.append(psd(base))
    elif lvl == "sep":
        Q = cp.Variable((D, D), hermitian=True)
        cons += [Q >> 0, psd(base - _pt_last(Q, spec.split))]
    else:
        Q = cp.Variable((D, D), hermitian=True)
        mu = cp.Variable(nonneg=True)
        nu = cp.Variable()
        I = np.eye(D)
        cons += [Q >> 0, psd(cp.bmat([[base, (mu / 2) * I],
                                      [(mu / 2) * I, nu * I - _pt_last(Q, spec.split)]]))]
        obj = obj - mu * math.exp(-spec.bound / 2) + nu
    return obj, cons, Y


def reduced_map(R: np.ndarray, dA: int, dB: int):
    """Return ``rho -> Tr_A(R (rho (x) I_B))`` for numpy arrays and cvxpy expressions."""
    R = np.asarray(R, dtype=complex)

    def apply(rho):
        if isinstance(rho, cp.Expression):
            return cp.partial_trace(R @ cp.kron(rho, np.eye(dB)), [dA, dB], 0)
        return partial_trace(R @ np.kron(rho, np.eye(dB)), (dA, dB), 0)

    return apply
