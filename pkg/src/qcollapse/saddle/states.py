"""Density matrices, observables and the linear maps used by the saddle programs.

Registers are ordered left to right; a matrix on registers with dimensions
``dims = (d_1, ..., d_r)`` acts on ``C^{d_1} (x) ... (x) C^{d_r}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import InputError

__all__ = [
    "HERM_TOL",
    "PSD_TOL",
    "TRACE_TOL",
    "DensityMatrix",
    "Observable",
    "hermitize",
    "project_to_state",
    "partial_trace",
    "partial_transpose",
    "swap_registers",
    "is_ppt",
    "random_state",
    "random_pure_state",
    "random_observable",
    "min_eigvec",
    "matrix_to_json",
    "matrix_from_json",
]

HERM_TOL = 1e-10
PSD_TOL = 1e-9
TRACE_TOL = 1e-10


def hermitize(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    return (m + m.conj().T) / 2


@dataclass(frozen=True)
class DensityMatrix:
    """Validated quantum state.

    Raises
    ------
    InputError
        If the matrix is not Hermitian, not PSD or not of unit trace within
        the module tolerances.
    """

    entries: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InputError("a density matrix must be square")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > HERM_TOL:
            raise InputError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1) > TRACE_TOL:
            raise InputError(f"density matrix has trace {np.trace(m).real:.3g}")
        if np.linalg.eigvalsh(hermitize(m))[0] < -PSD_TOL:
            raise InputError("density matrix is not positive semidefinite")
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def project(cls, m: np.ndarray) -> tuple["DensityMatrix", float]:
        """Closest state in Frobenius norm and the projection residual."""
        rho = project_to_state(m)
        return cls(rho), float(np.linalg.norm(rho - np.asarray(m)))


@dataclass(frozen=True)
class Observable:
    """Hermitian ``R`` with spectrum in ``[0, 1]``."""

    entries: np.ndarray
    tol: float = 1e-9

    def __post_init__(self) -> None:
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InputError("an observable must be square")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > HERM_TOL:
            raise InputError("observable is not Hermitian")
        ev = np.linalg.eigvalsh(hermitize(m))
        if ev[0] < -self.tol or ev[-1] > 1 + self.tol:
            raise InputError(f"observable spectrum [{ev[0]:.3g}, {ev[-1]:.3g}] leaves [0, 1]")
        object.__setattr__(self, "entries", hermitize(m))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def _simplex_projection(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of a real vector onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, len(v) + 1)
    rho = np.nonzero(u * k > css - 1)[0][-1]
    theta = (css[rho] - 1) / (rho + 1)
    return np.maximum(v - theta, 0)


def project_to_state(m: np.ndarray) -> np.ndarray:
    """Hermitize, then project the spectrum onto the simplex (Frobenius-closest state)."""
    h = hermitize(m)
    w, v = np.linalg.eigh(h)
    w = _simplex_projection(w)
    out = (v * w) @ v.conj().T
    return hermitize(out)


def _check_dims(m: np.ndarray, dims: Sequence[int]) -> tuple:
    dims = tuple(int(d) for d in dims)
    if int(np.prod(dims)) != m.shape[0]:
        raise InputError(f"dims {dims} do not match matrix size {m.shape[0]}")
    return dims


def partial_trace(m: np.ndarray, dims: Sequence[int], traced: int | Sequence[int]) -> np.ndarray:
    """Trace out the register(s) ``traced`` (indices into ``dims``)."""
    m = np.asarray(m)
    dims = _check_dims(m, dims)
    tr = sorted({traced} if isinstance(traced, (int, np.integer)) else set(traced))
    r = len(dims)
    t = m.reshape(dims + dims)
    for off, k in enumerate(tr):
        kk = k - off
        cur = r - off
        t = np.trace(t, axis1=kk, axis2=kk + cur)
    keep = [d for i, d in enumerate(dims) if i not in tr]
    n = int(np.prod(keep)) if keep else 1
    return t.reshape(n, n)


def partial_transpose(m: np.ndarray, dims: Sequence[int], sys: int) -> np.ndarray:
    """Transpose register ``sys``."""
    m = np.asarray(m)
    dims = _check_dims(m, dims)
    r = len(dims)
    t = m.reshape(dims + dims)
    perm = list(range(2 * r))
    perm[sys], perm[sys + r] = perm[sys + r], perm[sys]
    return t.transpose(perm).reshape(m.shape)


def swap_registers(m: np.ndarray, dA: int, dB: int) -> np.ndarray:
    """Conjugate by the swap ``A (x) B -> B (x) A``."""
    t = np.asarray(m).reshape(dA, dB, dA, dB)
    return t.transpose(1, 0, 3, 2).reshape(dA * dB, dA * dB)


def is_ppt(rho: np.ndarray, dims: Sequence[int], sys: int | None = None, tol: float = PSD_TOL) -> bool:
    """Positive partial transpose across ``sys`` (default: the last register)."""
    sys = len(dims) - 1 if sys is None else sys
    return bool(np.linalg.eigvalsh(hermitize(partial_transpose(rho, dims, sys)))[0] >= -tol)


def random_pure_state(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_state(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix from the induced (Hilbert-Schmidt for full rank) measure."""
    k = d if rank is None else rank
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    rho = g @ g.conj().T
    return hermitize(rho / np.trace(rho).real)


def random_observable(d: int, rng: np.random.Generator) -> np.ndarray:
    """``U diag(lambda) U^dagger`` with Haar-like ``U`` and ``lambda`` uniform in ``[0, 1]``."""
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(g)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    lam = rng.uniform(0, 1, size=d)
    return hermitize((q * lam) @ q.conj().T)


def min_eigvec(m: np.ndarray) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue and a deterministically chosen eigenvector.

    Within a degenerate eigenspace (tolerance ``1e-12``) the vector with the
    largest real first component after phase fixing is taken; the phase is
    fixed so that the largest-magnitude entry is real and positive.
    """
    w, v = np.linalg.eigh(hermitize(m))
    cands = [i for i in range(len(w)) if w[i] - w[0] <= 1e-12]
    best = None
    for i in cands:
        x = v[:, i]
        j = int(np.argmax(np.abs(x)))
        x = x * (np.abs(x[j]) / x[j])
        key = tuple(np.round(x.real, 12))
        if best is None or key > best[0]:
            best = (key, x)
    return float(w[0]), best[1]


# --------------------------------------------------------------------------- I/O


def matrix_to_json(m: np.ndarray, dims: Sequence[int] | None = None) -> str:
    """Row-major entries as ``[re, im]`` pairs."""
    m = np.asarray(m, dtype=complex)
    doc = {"dim": m.shape[0], "entries": [[[float(z.real), float(z.imag)] for z in row] for row in m]}
    if dims is not None:
        doc["dims"] = [int(d) for d in dims]
    return json.dumps(doc, indent=1) + "\n"


def matrix_from_json(text: str) -> tuple[np.ndarray, tuple | None]:
    try:
        doc = json.loads(text)
        m = np.array([[complex(re, im) for re, im in row] for row in doc["entries"]], dtype=complex)
        if m.shape != (doc["dim"], doc["dim"]):
            raise InputError("entries do not match the declared dimension")
        dims = tuple(doc["dims"]) if "dims" in doc else None
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"malformed matrix document: {exc}") from exc
    return m, dims
