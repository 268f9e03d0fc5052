"""CNF formulas with variable roles, DIMACS I/O and an exact projected model counter.

Literals are non-zero integers: ``+v`` is variable ``v`` true, ``-v`` false.
Every variable carries a role, either ``ORIGINAL(i)`` (the ``i``-th input
variable of the encoded problem) or ``AUX(tag)`` (an auxiliary gate output).
Witnesses of a formula are the projections of its satisfying assignments onto
the original variables, ordered by original index.

The counter is a plain DPLL search with unit propagation over
occurrence-list counters.  It branches on original variables first (value 0
before 1, so projections come out in lexicographic order) and then on
auxiliaries, returning, for each witness, the exact number of satisfying
extensions.  It does not depend on any external solver.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

from .errors import BudgetError, InputError

__all__ = [
    "ORIGINAL",
    "AUX",
    "Role",
    "CnfFormula",
    "unsat_marker",
    "projected_counts",
    "witness_projections",
    "count_models",
    "is_satisfiable",
    "brute_force_projected_counts",
    "to_dimacs",
    "from_dimacs",
    "save_cnf",
    "load_cnf",
]

ORIGINAL = "original"
AUX = "aux"


class Role(NamedTuple):
    kind: str  # ORIGINAL or AUX
    ref: object  # original index (int) or gate tag (str)


@dataclass(frozen=True)
class CnfFormula:
    """Immutable clause set over variables ``1..num_vars``.

    Parameters
    ----------
    num_vars : int
    clauses : sequence of sequences of int
    roles : mapping, optional
        ``var -> Role``.  Variables without an entry are auxiliary.  When
        omitted entirely every variable ``v`` is ``ORIGINAL(v)``.
    """

    num_vars: int
    clauses: tuple = ()
    roles: Mapping[int, Role] | None = None
    _originals: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        n = int(self.num_vars)
        if n < 0:
            raise InputError("num_vars must be non-negative")
        cls = tuple(tuple(int(l) for l in c) for c in self.clauses)
        for c in cls:
            for l in c:
                if l == 0 or abs(l) > n:
                    raise InputError(f"literal {l} out of range for {n} variables")
        if self.roles is None:
            roles = {v: Role(ORIGINAL, v) for v in range(1, n + 1)}
        else:
            roles = {}
            for v, r in dict(self.roles).items():
                r = Role(*r)
                if not 1 <= int(v) <= n:
                    raise InputError(f"role for variable {v} out of range")
                if r.kind not in (ORIGINAL, AUX):
                    raise InputError(f"unknown role kind {r.kind!r}")
                roles[int(v)] = r
            for v in range(1, n + 1):
                roles.setdefault(v, Role(AUX, f"v{v}"))
        seen: dict[int, int] = {}
        for v, r in roles.items():
            if r.kind == ORIGINAL:
                if r.ref in seen:
                    raise InputError(f"ORIGINAL({r.ref}) assigned to variables {seen[r.ref]} and {v}")
                seen[int(r.ref)] = v
        object.__setattr__(self, "num_vars", n)
        object.__setattr__(self, "clauses", cls)
        object.__setattr__(self, "roles", dict(sorted(roles.items())))
        object.__setattr__(self, "_originals", tuple(seen[i] for i in sorted(seen)))

    @property
    def original_vars(self) -> tuple:
        """CNF variables holding the originals, ordered by original index."""
        return self._originals

    @property
    def num_originals(self) -> int:
        return len(self._originals)

    @property
    def aux_vars(self) -> tuple:
        return tuple(v for v, r in self.roles.items() if r.kind == AUX)

    @property
    def max_width(self) -> int:
        return max((len(c) for c in self.clauses), default=0)

    def is_unsat_marker(self) -> bool:
        return any(len(c) == 0 for c in self.clauses) or _has_unit_contradiction(self.clauses)

    def with_clauses(self, extra: Iterable[Sequence[int]], num_vars: int | None = None,
                     extra_roles: Mapping[int, Role] | None = None) -> "CnfFormula":
        roles = dict(self.roles)
        roles.update(extra_roles or {})
        return CnfFormula(num_vars or self.num_vars, self.clauses + tuple(tuple(c) for c in extra), roles)

    def satisfied_by(self, assignment: Sequence[int]) -> bool:
        """``assignment[v-1]`` is the value of variable ``v``."""
        return all(any((assignment[abs(l) - 1] == 1) == (l > 0) for l in c) for c in self.clauses)

    def count_satisfied(self, assignment: Sequence[int]) -> int:
        return sum(any((assignment[abs(l) - 1] == 1) == (l > 0) for l in c) for c in self.clauses)


def _has_unit_contradiction(clauses) -> bool:
    units = {c[0] for c in clauses if len(c) == 1}
    return any(-l in units for l in units)


def unsat_marker(num_vars: int, roles: Mapping[int, Role] | None = None) -> tuple:
    """Clauses ``[u], [-u]`` on a fresh auxiliary ``u = num_vars + 1``.

    Returns ``(new_num_vars, clauses, role_update)``.
    """
    u = num_vars + 1
    return u, ((u,), (-u,)), {u: Role(AUX, "unsat")}


# --------------------------------------------------------------------------- counting


class _Counter:
    """DPLL search with unit propagation, counting extensions per projection."""

    def __init__(self, cnf: CnfFormula, limit: int | None):
        self.n = cnf.num_vars
        self.order = list(cnf.original_vars) + [v for v in range(1, self.n + 1) if cnf.roles[v].kind == AUX]
        self.orig = list(cnf.original_vars)
        self.n_orig = len(self.orig)
        self.limit = limit
        clauses = []
        self.trivially_unsat = False
        for c in cnf.clauses:
            lits = sorted(set(c))
            if any(-l in lits for l in lits if l > 0):
                continue  # tautology
            if not lits:
                self.trivially_unsat = True
            clauses.append(lits)
        self.clauses = clauses
        self.m = len(clauses)
        self.occ: dict[int, list[int]] = {}
        for ci, c in enumerate(clauses):
            for l in c:
                self.occ.setdefault(l, []).append(ci)
        self.nsat = [0] * self.m
        self.nfalse = [0] * self.m
        self.length = [len(c) for c in clauses]
        self.value = [0] * (self.n + 1)  # 0 unassigned, +1 true, -1 false
        self.satisfied = 0
        self.trail: list[int] = []
        self.result: dict[tuple, int] = {}
        self.total = 0

    # each assignment updates counters; the returned flag reports a conflict
    def _assign(self, lit: int, queue: list[int]) -> bool:
        value = self.value
        value[lit if lit > 0 else -lit] = 1 if lit > 0 else -1
        self.trail.append(lit)
        nsat, nfalse, length, clauses = self.nsat, self.nfalse, self.length, self.clauses
        for ci in self.occ.get(lit, ()):
            nsat[ci] += 1
            if nsat[ci] == 1:
                self.satisfied += 1
        conflict = False
        for ci in self.occ.get(-lit, ()):
            nfalse[ci] += 1
            if nsat[ci] == 0:
                free = length[ci] - nfalse[ci]
                if free == 0:
                    conflict = True
                elif free == 1:
                    for l in clauses[ci]:
                        if value[l if l > 0 else -l] == 0:
                            queue.append(l)
                            break
        return conflict

    def _unassign_to(self, mark: int) -> None:
        trail, value, nsat, nfalse, occ = self.trail, self.value, self.nsat, self.nfalse, self.occ
        unsat_again = 0
        while len(trail) > mark:
            lit = trail.pop()
            value[lit if lit > 0 else -lit] = 0
            for ci in occ.get(lit, ()):
                nsat[ci] -= 1
                if nsat[ci] == 0:
                    unsat_again += 1
            for ci in occ.get(-lit, ()):
                nfalse[ci] -= 1
        self.satisfied -= unsat_again

    def _propagate(self, lit: int) -> bool:
        queue = [lit]
        while queue:
            l = queue.pop()
            val = self.value[abs(l)]
            if val != 0:
                if (val > 0) != (l > 0):
                    return False
                continue
            if self._assign(l, queue):
                return False
        return True

    def _record(self) -> None:
        # every clause is satisfied; remaining free variables are unconstrained
        free_aux = sum(1 for v in self.order[self.n_orig:] if self.value[v] == 0)
        free_orig = [v for v in self.orig if self.value[v] == 0]
        mult = 1 << free_aux
        base = [1 if self.value[v] > 0 else 0 for v in self.orig]
        pos = {v: k for k, v in enumerate(self.orig)}
        for x in range(1 << len(free_orig)):
            if self._done():
                return
            bits = list(base)
            for j, v in enumerate(free_orig):
                bits[pos[v]] = (x >> (len(free_orig) - 1 - j)) & 1
            key = tuple(bits)
            self.result[key] = self.result.get(key, 0) + mult
            self.total += mult

    def _done(self) -> bool:
        return self.limit is not None and len(self.result) >= self.limit

    def search(self, depth: int) -> None:
        if self._done():
            return
        if self.satisfied == self.m:
            self._record()
            return
        while depth < len(self.order) and self.value[self.order[depth]] != 0:
            depth += 1
        if depth == len(self.order):  # pragma: no cover - unreachable when counters are consistent
            raise AssertionError("all variables assigned but some clause unsatisfied")
        v = self.order[depth]
        for lit in (-v, v):
            mark = len(self.trail)
            if self._propagate(lit):
                self.search(depth + 1)
            self._unassign_to(mark)
            if self._done():
                return

    def run(self) -> dict[tuple, int]:
        if self.trivially_unsat:
            return {}
        mark = len(self.trail)
        ok = True
        for c in self.clauses:
            if len(c) == 1 and self.value[abs(c[0])] == 0:
                if not self._propagate(c[0]):
                    ok = False
                    break
            elif len(c) == 1 and (self.value[abs(c[0])] > 0) != (c[0] > 0):
                ok = False
                break
        if ok:
            self.search(0)
        self._unassign_to(mark)
        return dict(sorted(self.result.items()))


def projected_counts(cnf: CnfFormula, budget: int = 64,
                     limit: int | None = None) -> dict[tuple, int]:
    """Exact map ``witness projection -> number of satisfying extensions``.

    Parameters
    ----------
    cnf : CnfFormula
    budget : int
        Maximum number of original variables (guards the size of the result).
    limit : int, optional
        Stop after this many distinct projections have been found.  Counts
        of the returned projections are then still exact.

    Notes
    -----
    The search is exact; only its running time depends on the formula.
    """
    if cnf.num_originals > budget:
        raise BudgetError(f"{cnf.num_originals} original variables exceed the budget {budget}")
    old = sys.getrecursionlimit()
    need = cnf.num_vars + 100
    if need > old:
        sys.setrecursionlimit(need)
    try:
        return _Counter(cnf, limit).run()
    finally:
        if need > old:
            sys.setrecursionlimit(old)


def witness_projections(cnf: CnfFormula, limit: int | None = None) -> tuple:
    """Sorted witness projections onto the original variables."""
    return tuple(projected_counts(cnf, limit=limit))


def count_models(cnf: CnfFormula) -> int:
    """Number of satisfying assignments over all variables."""
    return sum(projected_counts(cnf).values())


def is_satisfiable(cnf: CnfFormula) -> bool:
    return bool(projected_counts(cnf, limit=1))


def brute_force_projected_counts(cnf: CnfFormula, max_vars: int = 20) -> dict[tuple, int]:
    """Reference oracle: enumerate all ``2**num_vars`` full assignments.

    Independent of the DPLL search; used to validate it on small formulas.
    """
    n = cnf.num_vars
    if n > max_vars:
        raise BudgetError(f"brute force over 2^{n} assignments exceeds 2^{max_vars}")
    import numpy as np

    idx = np.arange(1 << n, dtype=np.int64)
    ok = np.ones(1 << n, dtype=bool)
    bit = {v: ((idx >> (v - 1)) & 1).astype(bool) for v in range(1, n + 1)}
    for c in cnf.clauses:
        sat = np.zeros(1 << n, dtype=bool)
        for l in c:
            sat |= bit[abs(l)] if l > 0 else ~bit[abs(l)]
        ok &= sat
    out: dict[tuple, int] = {}
    origs = cnf.original_vars
    for x in np.flatnonzero(ok):
        key = tuple(int((x >> (v - 1)) & 1) for v in origs)
        out[key] = out.get(key, 0) + 1
    return dict(sorted(out.items()))


# --------------------------------------------------------------------------- DIMACS


def to_dimacs(cnf: CnfFormula) -> str:
    """Standard DIMACS text (``p cnf V C`` header, zero-terminated clauses)."""
    lines = [f"p cnf {cnf.num_vars} {len(cnf.clauses)}"]
    lines += [" ".join(str(l) for l in c) + (" 0" if c else "0") for c in cnf.clauses]
    return "\n".join(lines) + "\n"


def roles_to_json(cnf: CnfFormula) -> str:
    """Sidecar map: original indices and auxiliary gate tags."""
    doc = {
        "num_vars": cnf.num_vars,
        "original": {str(r.ref): v for v, r in cnf.roles.items() if r.kind == ORIGINAL},
        "aux": {str(v): str(r.ref) for v, r in cnf.roles.items() if r.kind == AUX},
    }
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def from_dimacs(text: str, sidecar: str | None = None) -> CnfFormula:
    """Parse DIMACS text; without a sidecar every variable is original."""
    num_vars = None
    clauses: list[list[int]] = []
    cur: list[int] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise InputError(f"bad DIMACS header {line!r}")
            num_vars = int(parts[2])
            continue
        try:
            toks = [int(t) for t in line.split()]
        except ValueError as exc:
            raise InputError(f"bad DIMACS clause line {line!r}") from exc
        for t in toks:
            if t == 0:
                clauses.append(cur)
                cur = []
            else:
                cur.append(t)
    if cur:
        clauses.append(cur)
    if num_vars is None:
        raise InputError("missing DIMACS header")
    roles = None
    if sidecar is not None:
        doc = json.loads(sidecar)
        roles = {int(v): Role(ORIGINAL, int(i)) for i, v in doc.get("original", {}).items()}
        roles.update({int(v): Role(AUX, tag) for v, tag in doc.get("aux", {}).items()})
    return CnfFormula(num_vars, clauses, roles)


def save_cnf(cnf: CnfFormula, path) -> None:
    """Write ``path`` (DIMACS) and ``path + '.map.json'`` (role sidecar)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(to_dimacs(cnf))
    with open(str(path) + ".map.json", "w", encoding="utf-8") as fh:
        fh.write(roles_to_json(cnf))


def load_cnf(path) -> CnfFormula:
    import os

    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    side = str(path) + ".map.json"
    sidecar = None
    if os.path.exists(side):
        with open(side, encoding="utf-8") as fh:
            sidecar = fh.read()
    return from_dimacs(text, sidecar)
