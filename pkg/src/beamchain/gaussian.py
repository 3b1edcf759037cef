"""Exact Gaussian-state bookkeeping.

A Gaussian state is fixed by a 2x2 covariance matrix A in (b, b^dagger)
ordering and a displacement vector Delta = (<b>, <b^dagger>).  Its
characteristic function is exp(G(z)) with the quadratic form

    G(z) = (1/4) Z^T Omega^T A Omega Z - Delta^T Omega Z,
    Z = (z, z*)^T,  Omega = [[0, 1], [-1, 0]].

Internally the quadrature form is canonical: V is the real symmetric
covariance of X = (a^dagger + a)/sqrt(2) and P = i(a^dagger - a)/sqrt(2),
d the real displacement pair, with

    V = [[A01 + Re A00, Im A00], [Im A00, A01 - Re A00]],
    d = (sqrt(2) Re<b>, sqrt(2) Im<b>).

Physical states satisfy det V >= 1 (the uncertainty bound); constructors
reject anything below that within tolerance.
"""

from __future__ import annotations

import math

import numpy as np

from .channel import ChannelParams
from .charfn import CharFn
from .errors import CutoffTooSmallError, ShapeError, UnphysicalStateError
from .fock import DensityMatrix, mode_operators

STRUCTURE_TOL = 1e-9
DET_V_MIN = 1.0 - 1e-9
MOMENT_TAIL_TOL = 1e-6
THERMAL_MATCH_TOL = 1e-7


class GaussianState:
    """Immutable covariance/displacement pair with derived quadrature form."""

    __slots__ = ("A", "Delta", "V", "d")

    def __init__(self, A, Delta):
        A = np.asarray(A, dtype=complex)
        Delta = np.asarray(Delta, dtype=complex)
        if A.shape != (2, 2) or Delta.shape != (2,):
            raise ShapeError("A must be 2x2 and Delta a 2-vector")
        if abs(Delta[1] - np.conj(Delta[0])) > STRUCTURE_TOL:
            raise UnphysicalStateError("Delta[1] must be the conjugate of Delta[0]")
        if (
            abs(A[0, 1].imag) > STRUCTURE_TOL
            or abs(A[1, 0].imag) > STRUCTURE_TOL
            or abs(A[0, 1] - A[1, 0]) > STRUCTURE_TOL
        ):
            raise UnphysicalStateError("A[0,1] and A[1,0] must be equal and real")
        if abs(A[1, 1] - np.conj(A[0, 0])) > STRUCTURE_TOL:
            raise UnphysicalStateError("A[1,1] must be the conjugate of A[0,0]")
        v = np.array(
            [
                [A[0, 1].real + A[0, 0].real, A[0, 0].imag],
                [A[0, 0].imag, A[0, 1].real - A[0, 0].real],
            ]
        )
        if np.linalg.det(v) < DET_V_MIN:
            raise UnphysicalStateError(
                f"det V = {np.linalg.det(v):.12g} violates the uncertainty bound"
            )
        d = np.array(
            [math.sqrt(2) * Delta[0].real, math.sqrt(2) * Delta[0].imag]
        )
        A.setflags(write=False)
        Delta.setflags(write=False)
        v.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "Delta", Delta)
        object.__setattr__(self, "V", v)
        object.__setattr__(self, "d", d)

    def __setattr__(self, name, value):
        raise AttributeError("GaussianState is immutable")

    @classmethod
    def from_quadrature(cls, V, d) -> "GaussianState":
        """Inverse conversion from the (V, d) form."""
        V = np.asarray(V, dtype=float)
        d = np.asarray(d, dtype=float)
        if V.shape != (2, 2) or d.shape != (2,):
            raise ShapeError("V must be 2x2 and d a 2-vector")
        if abs(V[0, 1] - V[1, 0]) > STRUCTURE_TOL:
            raise UnphysicalStateError("V must be symmetric")
        a00 = 0.5 * (V[0, 0] - V[1, 1]) + 1j * V[0, 1]
        a01 = 0.5 * (V[0, 0] + V[1, 1])
        mean_b = (d[0] + 1j * d[1]) / math.sqrt(2)
        A = np.array([[a00, a01], [a01, np.conj(a00)]])
        return cls(A, np.array([mean_b, np.conj(mean_b)]))

    def to_json_dict(self) -> dict:
        return {
            "A_re": self.A.real.tolist(),
            "A_im": self.A.imag.tolist(),
            "Delta_re": self.Delta.real.tolist(),
            "Delta_im": self.Delta.imag.tolist(),
            "V": self.V.tolist(),
            "d": self.d.tolist(),
        }

    @classmethod
    def from_json_dict(cls, payload: dict) -> "GaussianState":
        A = np.asarray(payload["A_re"], dtype=float) + 1j * np.asarray(
            payload["A_im"], dtype=float
        )
        Delta = np.asarray(payload["Delta_re"], dtype=float) + 1j * np.asarray(
            payload["Delta_im"], dtype=float
        )
        return cls(A, Delta)

    def __repr__(self):
        return f"GaussianState(V={self.V.tolist()}, d={self.d.tolist()})"


def gaussian_charfn(g: GaussianState) -> CharFn:
    """Characteristic function exp(G(z)) of a Gaussian state."""
    a00 = complex(g.A[0, 0])
    a01 = float(g.A[0, 1].real)
    delta0 = complex(g.Delta[0])

    def fn(z):
        z = np.asarray(z, dtype=complex)
        zc = np.conj(z)
        quad = 0.25 * (a00 * zc**2 + np.conj(a00) * z**2 - 2 * a01 * z * zc)
        return np.exp(quad + np.conj(delta0) * z - delta0 * zc)

    return CharFn(kind="gaussian", _fn=fn)


def asymptotic_gaussian(g: GaussianState, params: ChannelParams) -> GaussianState:
    """Image of a Gaussian reservoir after infinitely many collisions.

    The covariance matrix survives unchanged; the displacement is scaled by
    s / (1 - c), the closed-form sum of the geometric displacement transfer.
    """
    scale = params.s / (1.0 - params.c)
    return GaussianState(g.A, g.Delta * scale)


def gaussian_from_moments(rho: DensityMatrix) -> GaussianState:
    """Gaussian state with the first and second moments of a matrix state."""
    if rho.mode_count != 1:
        raise ShapeError("gaussian_from_moments takes a single-mode state")
    if rho.tail_occupation(2) > MOMENT_TAIL_TOL:
        raise CutoffTooSmallError(
            f"top levels hold {rho.tail_occupation(2):.3e}; second moments "
            "would be contaminated by truncation"
        )
    ops = mode_operators(rho.cutoff)
    arr = rho.entries
    mean_b = np.trace(arr @ ops.annihilate)
    mean_bb = np.trace(arr @ ops.annihilate @ ops.annihilate)
    sym = np.trace(
        arr @ (ops.annihilate @ ops.create + ops.create @ ops.annihilate)
    ) / 2.0
    a00 = 2.0 * (mean_bb - mean_b**2)
    a01 = 2.0 * (sym - abs(mean_b) ** 2)
    A = np.array([[a00, a01], [a01, np.conj(a00)]])
    return GaussianState(A, np.array([mean_b, np.conj(mean_b)]))


def gaussian_purity(g: GaussianState) -> float:
    """det(V)^(-1/2), clamped into (0, 1]."""
    det = float(np.linalg.det(g.V))
    if det < DET_V_MIN:
        raise UnphysicalStateError(f"det V = {det:.12g} below 1")
    return min(1.0, det**-0.5)


def gaussian_qcs_squared(g: GaussianState) -> float:
    """Quadrature coherence scale of a Gaussian state: (1/2) Tr V^-1."""
    det = float(np.linalg.det(g.V))
    if det < DET_V_MIN:
        raise UnphysicalStateError(f"det V = {det:.12g} below 1")
    return 0.5 * float(np.trace(np.linalg.inv(g.V)))


def symplectic_entropy(x: float) -> float:
    """Entropy of one mode with symplectic eigenvalue x >= 1."""
    if x <= 1.0:
        return 0.0
    up = (x + 1.0) / 2.0
    down = (x - 1.0) / 2.0
    return up * math.log(up) - down * math.log(down)


def gaussian_entropy(g: GaussianState) -> float:
    """Von Neumann entropy of a Gaussian state from det V."""
    det = float(np.linalg.det(g.V))
    if det < DET_V_MIN:
        raise UnphysicalStateError(f"det V = {det:.12g} below 1")
    return symplectic_entropy(math.sqrt(max(det, 1.0)))


def thermal_match(g: GaussianState, tol: float = THERMAL_MATCH_TOL):
    """Inverse temperature of a stationary centered Gaussian, else None.

    Stationary means the covariance is anti-diagonal (no <b^2> component)
    and the displacement vanishes, both within a relative tolerance.  The
    deep-cold limit (mean occupation at numerical zero) returns math.inf.
    """
    nu = float(g.A[0, 1].real)
    scale = max(1.0, abs(nu))
    if abs(g.A[0, 0]) > tol * scale or abs(g.Delta[0]) > tol * scale:
        return None
    if nu < 1.0 - tol:
        raise UnphysicalStateError(f"stationary weight {nu:.12g} below 1")
    n_bar = max(0.0, (nu - 1.0) / 2.0)
    if n_bar <= 1e-12:
        return math.inf
    return math.log(1.0 + 1.0 / n_bar)
