"""Truncated Fock-space linear algebra.

Everything lives on the finite space spanned by |0>, ..., |n_max>.  Operators
are built directly on that space and exponentiated there, so unitaries are
exactly unitary on the truncated space; the price is the usual truncation
artifact in [a, a^dagger] at the top level, which the tail guards keep out of
reach of physical states.

Basis ordering is fixed: Fock index ascending, and for two-mode objects the
composite index is a_index * (n_max_b + 1) + b_index (a slow, b fast).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .errors import (
    CutoffTooSmallError,
    InvalidLevelError,
    InvalidParameterError,
    ShapeError,
    UnphysicalStateError,
)
from .runtime import check_dimension

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-10
TAIL_MASS_TOL = 1e-8


@dataclass(frozen=True)
class FockCutoff:
    """Highest retained Fock level; the space dimension is n_max + 1."""

    n_max: int

    def __post_init__(self):
        if isinstance(self.n_max, bool) or not isinstance(self.n_max, (int, np.integer)):
            raise InvalidParameterError(f"n_max must be an integer, got {self.n_max!r}")
        if self.n_max < 1:
            raise InvalidParameterError(f"n_max must be >= 1, got {self.n_max}")
        object.__setattr__(self, "n_max", int(self.n_max))

    @property
    def dim(self) -> int:
        return self.n_max + 1


class DensityMatrix:
    """Dense truncated density matrix for one or two modes.

    Immutable value object.  Construction validates Hermiticity, unit trace
    and positive semidefiniteness (each within a fixed tolerance), so any
    instance in circulation is a physical state up to truncation error.
    """

    __slots__ = ("entries", "cutoffs")

    def __init__(self, entries, cutoffs, validate: bool = True):
        arr = np.array(entries, dtype=np.complex128)
        if isinstance(cutoffs, FockCutoff):
            cutoffs = (cutoffs,)
        cutoffs = tuple(cutoffs)
        if len(cutoffs) not in (1, 2) or not all(
            isinstance(c, FockCutoff) for c in cutoffs
        ):
            raise ShapeError("cutoffs must be one or two FockCutoff values")
        dim = 1
        for c in cutoffs:
            dim *= c.dim
        if arr.ndim != 2 or arr.shape != (dim, dim):
            raise ShapeError(
                f"entries shape {arr.shape} does not match cutoff dimension {dim}"
            )
        if validate:
            herm = np.abs(arr - arr.conj().T).max()
            if herm > HERMITICITY_TOL:
                raise UnphysicalStateError(f"not Hermitian: max deviation {herm:.3e}")
            tr = arr.trace()
            if abs(tr - 1.0) > TRACE_TOL:
                raise UnphysicalStateError(f"trace {tr:.12g} is not 1")
            lo = np.linalg.eigvalsh(arr).min()
            if lo < -POSITIVITY_TOL:
                raise UnphysicalStateError(f"negative eigenvalue {lo:.3e}")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)
        object.__setattr__(self, "cutoffs", cutoffs)

    def __setattr__(self, name, value):
        raise AttributeError("DensityMatrix is immutable")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def mode_count(self) -> int:
        return len(self.cutoffs)

    @property
    def cutoff(self) -> FockCutoff:
        if self.mode_count != 1:
            raise ShapeError("cutoff is defined for single-mode states only")
        return self.cutoffs[0]

    def diagonal(self) -> np.ndarray:
        return self.entries.diagonal().real.copy()

    def tail_occupation(self, levels: int = 2) -> float:
        """Total population of the top ``levels`` Fock levels (single mode)."""
        if self.mode_count != 1:
            raise ShapeError("tail_occupation is defined for single-mode states")
        return float(self.entries.diagonal().real[-levels:].sum())

    def to_json_dict(self) -> dict:
        n_max = [c.n_max for c in self.cutoffs]
        return {
            "dim": self.dim,
            "mode_count": self.mode_count,
            "n_max": n_max[0] if self.mode_count == 1 else n_max,
            "re": self.entries.real.tolist(),
            "im": self.entries.imag.tolist(),
        }

    @classmethod
    def from_json_dict(cls, payload: dict) -> "DensityMatrix":
        n_max = payload["n_max"]
        if isinstance(n_max, list):
            cutoffs = tuple(FockCutoff(n) for n in n_max)
        else:
            cutoffs = (FockCutoff(n_max),)
        entries = np.asarray(payload["re"], dtype=float) + 1j * np.asarray(
            payload["im"], dtype=float
        )
        return cls(entries, cutoffs)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh)

    @classmethod
    def load(cls, path) -> "DensityMatrix":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))

    def __repr__(self):
        spec = "x".join(str(c.dim) for c in self.cutoffs)
        return f"DensityMatrix(modes={self.mode_count}, dims={spec})"


@dataclass(frozen=True)
class ModeOperators:
    """Annihilation, creation, and number operators on a truncated mode."""

    annihilate: np.ndarray
    create: np.ndarray
    number: np.ndarray
    cutoff: FockCutoff


@lru_cache(maxsize=64)
def _mode_operator_arrays(n_max: int):
    dim = n_max + 1
    a = np.diag(np.sqrt(np.arange(1.0, dim)), 1).astype(np.complex128)
    adag = a.conj().T
    num = adag @ a
    for m in (a, adag, num):
        m.setflags(write=False)
    return a, adag, num


def mode_operators(cutoff: FockCutoff) -> ModeOperators:
    """Ladder and number operators for the given cutoff."""
    a, adag, num = _mode_operator_arrays(cutoff.n_max)
    return ModeOperators(annihilate=a, create=adag, number=num, cutoff=cutoff)


def displacement_matrix(z: complex, cutoff: FockCutoff) -> np.ndarray:
    """Matrix exponential of z a^dagger - z* a on the truncated space."""
    ops = mode_operators(cutoff)
    gen = z * ops.create - np.conj(z) * ops.annihilate
    return expm(gen)


def displace_state(rho: DensityMatrix, z: complex) -> DensityMatrix:
    """Unitarily displaced state D(z) rho D(z)^dagger."""
    if rho.mode_count != 1:
        raise ShapeError("displace_state acts on single-mode states")
    d = displacement_matrix(z, rho.cutoff)
    return DensityMatrix(d @ rho.entries @ d.conj().T, rho.cutoffs)


def fock_state(n: int, cutoff: FockCutoff) -> DensityMatrix:
    """Projector |n><n|."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise InvalidParameterError(f"Fock level must be an integer, got {n!r}")
    if n < 0:
        raise InvalidParameterError(f"Fock level must be >= 0, got {n}")
    if n > cutoff.n_max:
        raise InvalidLevelError(f"level {n} above cutoff n_max={cutoff.n_max}")
    entries = np.zeros((cutoff.dim, cutoff.dim), dtype=np.complex128)
    entries[n, n] = 1.0
    return DensityMatrix(entries, cutoff)


def thermal_state(beta: float, cutoff: FockCutoff) -> DensityMatrix:
    """Geometric number distribution exp(-beta n), renormalized after truncation."""
    if not (beta > 0) or not math.isfinite(beta):
        raise InvalidParameterError(f"beta must be a positive finite real, got {beta!r}")
    # untruncated mass beyond n_max is exp(-beta (n_max + 1))
    tail = math.exp(-beta * (cutoff.n_max + 1))
    if tail > TAIL_MASS_TOL:
        raise CutoffTooSmallError(
            f"thermal tail mass {tail:.3e} beyond n_max={cutoff.n_max} "
            f"exceeds {TAIL_MASS_TOL:.0e}; raise the cutoff"
        )
    weights = np.exp(-beta * np.arange(cutoff.dim))
    weights /= weights.sum()
    return DensityMatrix(np.diag(weights.astype(np.complex128)), cutoff)


def coherent_state(alpha: complex, cutoff: FockCutoff) -> DensityMatrix:
    """Projector onto the truncated, renormalized coherent vector."""
    mean = abs(alpha) ** 2
    if mean > cutoff.n_max / 4:
        raise CutoffTooSmallError(
            f"|alpha|^2 = {mean:.4g} violates the guard |alpha|^2 <= n_max/4 "
            f"with n_max={cutoff.n_max}"
        )
    amps = np.empty(cutoff.dim, dtype=np.complex128)
    amps[0] = 1.0
    for n in range(1, cutoff.dim):
        amps[n] = amps[n - 1] * alpha / math.sqrt(n)
    amps *= math.exp(-mean / 2)
    amps /= np.linalg.norm(amps)
    return DensityMatrix(np.outer(amps, amps.conj()), cutoff)


def tensor_product(rho_a: DensityMatrix, rho_b: DensityMatrix) -> DensityMatrix:
    """Two-mode product state with a slow / b fast index ordering."""
    if rho_a.mode_count != 1 or rho_b.mode_count != 1:
        raise ShapeError("tensor_product takes two single-mode states")
    joint_dim = rho_a.dim * rho_b.dim
    check_dimension(joint_dim, "tensor product")
    entries = np.kron(rho_a.entries, rho_b.entries)
    # Kronecker product of valid states is valid; skip the O(dim^3) recheck.
    return DensityMatrix(entries, (rho_a.cutoff, rho_b.cutoff), validate=False)


def partial_trace_b(rho_ab: DensityMatrix) -> DensityMatrix:
    """Trace out the second (fast-index) mode of a two-mode state."""
    if rho_ab.mode_count != 2:
        raise ShapeError("partial_trace_b takes a two-mode state")
    da = rho_ab.cutoffs[0].dim
    db = rho_ab.cutoffs[1].dim
    resh = rho_ab.entries.reshape(da, db, da, db)
    reduced = np.einsum("abcb->ac", resh)
    return DensityMatrix(reduced, (rho_ab.cutoffs[0],))
