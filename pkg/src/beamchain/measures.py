"""State functionals: purity, entropy, trace distance, and the quadrature
coherence scale (QCS).

The QCS squared is the commutator form

    C^2(rho) = (||[rho, X]||_F^2 + ||[rho, P]||_F^2) / (2 Tr rho^2)

with X = (a^dagger + a)/sqrt(2) and P = i(a^dagger - a)/sqrt(2).  Values
above 1 witness nonclassicality.  Because X and P couple adjacent Fock
levels, qcs_squared demands a stricter tail guard than the other
functionals: the top four levels must be essentially empty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CutoffTooSmallError, ShapeError, UnphysicalStateError
from .fock import DensityMatrix, mode_operators

ENTROPY_EIGENVALUE_FLOOR = 1e-14
QCS_TAIL_LEVELS = 4
QCS_TAIL_TOL = 1e-8


@dataclass(frozen=True)
class MeasureReport:
    """Bundle of the standard functionals, in fixed serialization order."""

    purity: float
    entropy: float
    qcs_squared: float
    mean_photon: float

    FIELDS = ("purity", "entropy", "qcs_squared", "mean_photon")

    def to_json_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.FIELDS}

    def csv_row(self) -> tuple:
        return tuple(getattr(self, name) for name in self.FIELDS)


def purity(rho: DensityMatrix) -> float:
    """Tr(rho^2), clamped into (0, 1 + 1e-10]."""
    value = float(np.sum(np.abs(rho.entries) ** 2))
    return min(value, 1.0 + 1e-10)


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """-sum p ln p over eigenvalues, with the 0 ln 0 = 0 convention."""
    eigs = np.linalg.eigvalsh(rho.entries)
    if eigs.min() < -1e-8:
        raise UnphysicalStateError(f"eigenvalue {eigs.min():.3e} below -1e-8")
    kept = eigs[eigs >= ENTROPY_EIGENVALUE_FLOOR]
    return float(-np.sum(kept * np.log(kept)))


def mean_photon_number(rho: DensityMatrix) -> float:
    """Expectation of the number operator for a single-mode state."""
    if rho.mode_count != 1:
        raise ShapeError("mean_photon_number takes a single-mode state")
    levels = np.arange(rho.dim)
    return float(np.real(rho.entries.diagonal()) @ levels)


def qcs_squared(rho: DensityMatrix) -> float:
    """Quadrature coherence scale squared via commutator Frobenius norms."""
    if rho.mode_count != 1:
        raise ShapeError("qcs_squared takes a single-mode state")
    tail = rho.tail_occupation(QCS_TAIL_LEVELS)
    if tail > QCS_TAIL_TOL:
        raise CutoffTooSmallError(
            f"top {QCS_TAIL_LEVELS} levels hold {tail:.3e} > {QCS_TAIL_TOL:.0e}; "
            "commutators with X, P would amplify truncation error"
        )
    ops = mode_operators(rho.cutoff)
    x = (ops.create + ops.annihilate) / math.sqrt(2)
    p = 1j * (ops.create - ops.annihilate) / math.sqrt(2)
    arr = rho.entries
    comm_x = arr @ x - x @ arr
    comm_p = arr @ p - p @ arr
    num = np.sum(np.abs(comm_x) ** 2) + np.sum(np.abs(comm_p) ** 2)
    return float(num / (2.0 * purity(rho)))


def trace_distance(rho1: DensityMatrix, rho2: DensityMatrix) -> float:
    """Half the sum of absolute eigenvalues of the difference."""
    if rho1.dim != rho2.dim or rho1.cutoffs != rho2.cutoffs:
        raise ShapeError("trace_distance needs states on identical spaces")
    diff = rho1.entries - rho2.entries
    eigs = np.linalg.eigvalsh(diff)
    return float(0.5 * np.abs(eigs).sum())


def measure_report(rho: DensityMatrix) -> MeasureReport:
    """All functionals of one state."""
    return MeasureReport(
        purity=purity(rho),
        entropy=von_neumann_entropy(rho),
        qcs_squared=qcs_squared(rho),
        mean_photon=mean_photon_number(rho),
    )
