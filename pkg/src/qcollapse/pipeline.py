"""End-to-end chain MTP -> SAT -> isolated SAT -> clause polynomial -> verifier.

:func:`pipeline` runs every stage for one ``(instance, seed)`` pair and records
exact witness counts at each stage, so that the only probabilistic loss is
visible at the isolation step.  The report streams as JSON lines.

:func:`gen_instance` provides deterministic generators for the test corpora.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np

from .clausepoly import cnf_to_mtp, width_reduce
from .cnf import CnfFormula, projected_counts
from .compiler import mtp_to_sat
from .errors import InputError, StageError
from .isolation import isolate
from .poly import (DEFAULT_BUDGET, MtpInstance, MultilinearPoly, Promise, brute_force_decide, evaluate,
                   evaluate_all, promise_of_count)
from .verifier import build_verifier, check_pcp_contract

__all__ = ["StageRecord", "PipelineReport", "pipeline", "gen_instance", "PROFILES"]

#: Width used when arithmetizing isolated formulas (3-input parity gates produce width-4 clauses).
ARITH_WIDTH = 4


@dataclass
class StageRecord:
    """One line of the report: stage name, ``k`` (or ``None``), witness data and verdict."""

    stage: str
    k: int | None
    witnesses: int
    promise: str
    detail: dict = field(default_factory=dict)

    def to_json(self, seed: int) -> str:
        doc = {"seed": seed, **asdict(self)}
        return json.dumps(doc, sort_keys=True, default=_jsonable)


def _jsonable(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, tuple):
        return list(x)
    return str(x)


@dataclass
class PipelineReport:
    """Per-stage records plus the overall verdict for one seed."""

    seed: int
    input_promise: Promise
    input_witnesses: tuple
    sat_vars: int
    records: list
    success_k: int | None
    surviving_witness: tuple | None
    soundness_ok: bool
    #: ``k -> (clause-polynomial instance, full witness or None)``; not serialized
    artifacts: dict = field(default_factory=dict, repr=False)

    @property
    def success(self) -> bool:
        return self.success_k is not None

    def lines(self) -> Iterator[str]:
        for rec in self.records:
            yield rec.to_json(self.seed)
        yield json.dumps({
            "seed": self.seed,
            "stage": "summary",
            "input_promise": self.input_promise.value,
            "sat_vars": self.sat_vars,
            "success_k": self.success_k,
            "surviving_witness": list(self.surviving_witness) if self.surviving_witness else None,
            "soundness_ok": self.soundness_ok,
        }, sort_keys=True)


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except Exception as exc:  # noqa: BLE001 - re-raised with the stage tag
        raise StageError(name, exc) from exc


def pipeline(inst: MtpInstance, seed: int, *, fail_budget: Fraction = Fraction(1, 3),
             budget: int = DEFAULT_BUDGET, contract_mode: str = "auto", stop_on_success: bool = False,
             sat: CnfFormula | None = None) -> PipelineReport:
    """Run the whole chain for one seed.

    Parameters
    ----------
    inst : MtpInstance
        Input instance, small enough to enumerate (``N <= budget``).
    seed : int
        Seed of the isolation hash.
    contract_mode : str
        Passed to :func:`check_pcp_contract`.  Isolated formulas carry every
        Tseytin auxiliary as a proof bit, so the exact mode only applies to
        the smallest inputs; otherwise the certified mode is used with the
        promise and witness established by exact counting.
    stop_on_success : bool
        Skip the remaining ``k`` after the first success.
    sat : CnfFormula, optional
        Pre-compiled ``mtp_to_sat(inst)`` (reused across seeds by sweeps).

    Notes
    -----
    Every stage except isolation is checked to be exact: the SAT stage must
    have the same witnesses as the input, every auxiliary extension must be
    unique, and the clause polynomial must have the same witnesses as the
    isolated formula.  A failure of these checks raises :class:`StageError`.
    """
    records: list[StageRecord] = []
    dec = _stage("input", brute_force_decide, inst, budget)
    in_w = dec.witnesses
    in_prom = promise_of_count(len(in_w))
    records.append(StageRecord("input", None, len(in_w), in_prom.value, {"num_vars": inst.num_vars}))

    if sat is None:
        sat = _stage("mtp2sat", mtp_to_sat, inst)
    counts = _stage("mtp2sat", projected_counts, sat)
    if tuple(counts) != in_w or any(v != 1 for v in counts.values()):
        raise StageError("mtp2sat", AssertionError("SAT witnesses differ from the input witnesses"))
    records.append(StageRecord("mtp2sat", None, len(counts), in_prom.value,
                               {"num_vars": sat.num_vars, "clauses": len(sat.clauses)}))

    success_k, survivor = None, None
    soundness_ok = True
    artifacts: dict = {}
    formulas = _stage("isolate", isolate, sat, seed)
    for k, f in enumerate(formulas, start=1):
        iso = _stage("isolate", projected_counts, f)
        if any(v != 1 for v in iso.values()):
            raise StageError("isolate", AssertionError(f"k={k}: auxiliary extension not unique"))
        if not set(iso) <= set(in_w):
            raise StageError("isolate", AssertionError(f"k={k}: isolation created a witness"))
        prom = promise_of_count(len(iso))
        detail: dict = {"num_vars": f.num_vars, "clauses": len(f.clauses)}
        if in_prom is Promise.NO and iso:
            soundness_ok = False

        narrow = f if f.max_width <= ARITH_WIDTH else width_reduce(f, ARITH_WIDTH)
        poly_inst = _stage("cnf2mtp", cnf_to_mtp, narrow, max(ARITH_WIDTH, narrow.max_width))
        wit_full = _full_witness(narrow, iso) if prom is Promise.UNIQUE_YES else None
        detail["mtp_vars"] = poly_inst.num_vars
        detail["mtp_terms"] = len(poly_inst.poly.terms)
        if wit_full is not None:
            if evaluate(poly_inst.poly, wit_full) != poly_inst.poly.denominator:
                raise StageError("cnf2mtp", AssertionError("witness does not reach the threshold"))

        spec = _stage("verifier", build_verifier, poly_inst, fail_budget)
        detail["B"] = spec.total_weight
        detail["T"] = spec.repetitions
        detail["c_minus_s"] = spec.completeness_raw - spec.soundness_raw
        if spec.completeness_raw - spec.soundness_raw != 2 * poly_inst.gap / spec.total_weight:
            raise StageError("verifier", AssertionError("c - s differs from 2 delta / B"))
        if prom is Promise.MULTI_YES:
            verdict, mode = False, "skipped"
        else:
            rep = _stage("contract", check_pcp_contract, spec, poly_inst, mode=contract_mode,
                         promise=prom, witness=wit_full)
            if rep.promise is not prom:
                raise StageError("cnf2mtp", AssertionError("clause polynomial changed the promise"))
            verdict, mode = rep.holds, rep.mode
            if in_prom is Promise.NO and rep.promise is not Promise.NO:
                soundness_ok = False
        artifacts[k] = (poly_inst, wit_full)
        detail["contract"] = verdict
        detail["contract_mode"] = mode
        records.append(StageRecord("isolated", k, len(iso), prom.value, detail))
        if success_k is None and prom is Promise.UNIQUE_YES and verdict:
            success_k = k
            survivor = next(iter(iso))
            if stop_on_success:
                break
    return PipelineReport(seed, in_prom, in_w, sat.num_vars, records, success_k, survivor, soundness_ok, artifacts)


def _full_witness(cnf: CnfFormula, iso: dict) -> tuple | None:
    """Unique full satisfying assignment of ``cnf`` (originals plus auxiliaries)."""
    (proj,) = iso
    fixed = [(v if b else -v,) for v, b in zip(cnf.original_vars, proj)]
    pinned = CnfFormula(cnf.num_vars, cnf.clauses + tuple(fixed), cnf.roles)
    # with originals fixed, propagate by searching over aux variables only
    full = _solve_one(pinned)
    return full


def _solve_one(cnf: CnfFormula) -> tuple | None:
    """Find one satisfying assignment by making every variable original and stopping at one model."""
    as_orig = CnfFormula(cnf.num_vars, cnf.clauses, None)
    models = projected_counts(as_orig, budget=cnf.num_vars + 1, limit=1)
    return next(iter(models), None)


# --------------------------------------------------------------------------- generators

PROFILES = ("kcnf", "sparse-poly", "planted", "no")


def gen_instance(profile: str, seed: int, *, n: int = 6, k: int = 3, density: float = 4.0,
                 terms: int = 6, degree: int = 2, coeff_bound: int = 4) -> MtpInstance | CnfFormula:
    """Deterministic instance generators.

    Parameters
    ----------
    profile : {"kcnf", "sparse-poly", "planted", "no"}
        ``kcnf``: random ``k``-CNF with ``round(density * n)`` clauses
        (a :class:`CnfFormula`).  ``sparse-poly``: random sparse polynomial
        shifted and scaled into ``[0, 1]``, threshold at the maximum value.
        ``planted``: unique witness by construction.  ``no``: every value
        strictly below the threshold.
    seed : int
    """
    rng = np.random.default_rng(seed)
    if n < 1:
        raise InputError("n must be positive")
    if profile == "kcnf":
        m = int(round(density * n))
        clauses = []
        for _ in range(m):
            vs = rng.choice(n, size=min(k, n), replace=False) + 1
            sg = rng.integers(0, 2, size=len(vs))
            clauses.append(tuple(int(v) if s else -int(v) for v, s in zip(vs, sg)))
        return CnfFormula(n, clauses)
    if profile == "planted":
        return _planted(n, rng)
    if profile == "sparse-poly":
        return _sparse(n, terms, degree, coeff_bound, rng, no=False)
    if profile == "no":
        return _sparse(n, terms, degree, coeff_bound, rng, no=True)
    raise InputError(f"unknown profile {profile!r}; choose from {PROFILES}")


def _planted(n: int, rng: np.random.Generator) -> MtpInstance:
    """``P = (sum_i lit_i + sum_pairs lit_i lit_j) / (n + r)`` with ``lit_i`` agreeing with a hidden ``y*``.

    Each literal term is ``y_i`` or ``1 - y_i``; the maximum ``1`` is reached
    only at ``y*``.
    """
    target = rng.integers(0, 2, size=n)
    r = int(rng.integers(0, n)) if n > 1 else 0
    pairs = set()
    while len(pairs) < r:
        i, j = sorted(rng.choice(n, size=2, replace=False).tolist())
        pairs.add((i + 1, j + 1))
    acc: dict[tuple, int] = {}

    def add_lit_product(idx):
        # prod of lit_i where lit_i = y_i if target=1 else 1-y_i
        terms = {(): 1}
        for i in idx:
            nxt: dict[tuple, int] = {}
            for S, v in terms.items():
                if target[i - 1]:
                    nxt[S + (i,)] = nxt.get(S + (i,), 0) + v
                else:
                    nxt[S] = nxt.get(S, 0) + v
                    nxt[S + (i,)] = nxt.get(S + (i,), 0) - v
            terms = nxt
        for S, v in terms.items():
            key = tuple(sorted(S))
            acc[key] = acc.get(key, 0) + v

    for i in range(1, n + 1):
        add_lit_product([i])
    for pr in sorted(pairs):
        add_lit_product(list(pr))
    den = n + r
    poly = MultilinearPoly(n, 2, (den - 1).bit_length(), {S: v for S, v in acc.items() if v}, scale_den=den)
    return MtpInstance(poly, Fraction(1), Fraction(1, den), den + 1)


def _sparse(n, n_terms, degree, bound, rng, no: bool) -> MtpInstance:
    raw: dict[tuple, int] = {}
    for _ in range(n_terms):
        size = int(rng.integers(1, min(degree, n) + 1))
        S = tuple(sorted((rng.choice(n, size=size, replace=False) + 1).tolist()))
        v = int(rng.integers(-bound, bound + 1)) or 1
        raw[S] = raw.get(S, 0) + v
    raw = {S: v for S, v in raw.items() if v}
    probe = MultilinearPoly(n, degree, 0, raw)
    vals = evaluate_all(probe)
    lo, hi = int(vals.min()), int(vals.max())
    shifted = dict(raw)
    if lo:
        shifted[()] = shifted.get((), 0) - lo
    shifted = {S: v for S, v in shifted.items() if v}
    span = hi - lo
    if span == 0:  # constant polynomial: make it identically 1 (every assignment is a witness)
        shifted[()] = shifted.get((), 0) + 1
        span = 1
    den = span + 1 if no else span
    poly = MultilinearPoly(n, degree, (den - 1).bit_length(), shifted, scale_den=den)
    # values lie on the grid j/den; the threshold 1 is the maximum (YES) or unreachable (NO)
    return MtpInstance(poly, Fraction(1), Fraction(1, den), den + 1)
