"""The single-collision channel and its iteration.

One collision couples the system mode a to a fresh reservoir mode b through
the beam splitter exp(lam (a^dagger b - a b^dagger)) and discards the
reservoir mode:

    L(rho) = Tr_b S (rho x sigma) S^dagger.

The unitary conserves total photon number, so it is assembled (and applied)
sector by sector; the full two-mode matrix is only materialized on explicit
request.  ``CollisionChannel`` precompiles the map for a fixed reservoir
state and coupling, choosing between three strategies:

* number-diagonal sigma: per-band transfer matrices (the fast path),
* displaced number-diagonal sigma (coherent and displaced thermal states):
  band maps in the displaced frame plus a displacement sandwich,
* general sigma: Kraus operators from the eigendecomposition of sigma.

The displaced-frame strategy relies on the exact mode-transformation rule
for displacements, S (I x D_b(alpha)) S^dagger = D_a(s alpha) x D_b(c alpha);
on the truncated space it matches the direct construction up to
truncation-boundary terms, which the tail guards keep negligible, and it is
exactly completely positive and trace preserving.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from . import _kernels
from .errors import (
    CutoffTooSmallError,
    InvalidParameterError,
    ShapeError,
)
from .fock import DensityMatrix, FockCutoff, displacement_matrix, mode_operators
from .measures import mean_photon_number, purity, trace_distance
from .runtime import active_backend, check_dimension

DIAGONAL_TOL = 1e-12
DISPLACED_DIAGONAL_TOL = 1e-10
KRAUS_WEIGHT_FLOOR = 1e-14
INTERMEDIATE_TAIL_TOL = 1e-6
DEFAULT_TOL = 1e-9
DEFAULT_MAX_STEPS = 10_000


@dataclass(frozen=True)
class ChannelParams:
    """Coupling angle and cutoff of one collision; transmittance is cos(lam)."""

    lam: float
    cutoff: FockCutoff

    def __post_init__(self):
        lam = float(self.lam)
        if not math.isfinite(lam) or not 0.0 < lam <= math.pi / 2 + 1e-12:
            raise InvalidParameterError(
                f"coupling angle must lie in (0, pi/2], got {self.lam!r}"
            )
        object.__setattr__(self, "lam", lam)

    @property
    def s(self) -> float:
        return math.sin(self.lam)

    @property
    def c(self) -> float:
        return math.cos(self.lam)

    @property
    def tau(self) -> float:
        return math.cos(self.lam)


@lru_cache(maxsize=16)
def _sector_blocks_cached(lam: float, n_max: int) -> np.ndarray:
    dim = n_max + 1
    blocks = np.zeros((2 * n_max + 1, dim, dim))
    for total in range(2 * n_max + 1):
        lo = max(0, total - n_max)
        hi = min(total, n_max)
        size = hi - lo + 1
        gen = np.zeros((size, size))
        for r, j in enumerate(range(lo, hi)):
            val = lam * math.sqrt((j + 1) * (total - j))
            gen[r + 1, r] = val
            gen[r, r + 1] = -val
        blocks[total, :size, :size] = expm(gen)
    blocks.setflags(write=False)
    return blocks


def sector_blocks(params: ChannelParams) -> np.ndarray:
    """Orthogonal blocks of the beam splitter over total-photon sectors.

    Entry [N, r, c] couples system levels r + max(0, N - n_max) and
    c + max(0, N - n_max) within the N-photon sector.  The generator of each
    sector is real antisymmetric, so every block is real orthogonal and the
    exponential is exact there (no splitting error, no truncation inside a
    complete sector).
    """
    return _sector_blocks_cached(params.lam, params.cutoff.n_max)


def beam_splitter_unitary(params: ChannelParams) -> np.ndarray:
    """Dense two-mode unitary, composite index a * dim + b."""
    dim = params.cutoff.dim
    n_max = params.cutoff.n_max
    check_dimension(dim * dim, "dense two-mode unitary")
    blocks = sector_blocks(params)
    out = np.zeros((dim * dim, dim * dim), dtype=np.complex128)
    for total in range(2 * n_max + 1):
        lo = max(0, total - n_max)
        hi = min(total, n_max)
        size = hi - lo + 1
        idx = np.array([j * dim + (total - j) for j in range(lo, hi + 1)])
        out[np.ix_(idx, idx)] = blocks[total, :size, :size]
    return out


def heisenberg_check(params: ChannelParams) -> float:
    """Max-norm residual of S^dagger (a x I) S = c (a x I) + s (I x b).

    Evaluated on the joint subspace with total photon number at most
    n_max - 1, where truncation cannot contribute; the contract there is a
    residual below 1e-9.
    """
    dim = params.cutoff.dim
    ops = mode_operators(params.cutoff)
    eye = np.eye(dim)
    a_sys = np.kron(ops.annihilate, eye)
    b_res = np.kron(eye, ops.annihilate)
    s_mat = beam_splitter_unitary(params)
    resid = s_mat.conj().T @ a_sys @ s_mat - (params.c * a_sys + params.s * b_res)
    totals = (np.arange(dim)[:, None] + np.arange(dim)[None, :]).ravel()
    keep = totals <= params.cutoff.n_max - 1
    sub = resid[np.ix_(keep, keep)]
    return float(np.abs(sub).max())


def _dense_sector_slice(blocks, m, n_max):
    """F[i, j] = <i, m| S |j, i + m - j>, zero where the reservoir index
    leaves [0, n_max]."""
    dim = n_max + 1
    i = np.arange(dim)[:, None]
    j = np.arange(dim)[None, :]
    n = i + m - j
    valid = (n >= 0) & (n <= n_max)
    sector = i + m
    offset = np.maximum(0, sector - n_max)
    return np.where(
        valid, blocks[sector, i - offset, np.where(valid, j - offset, 0)], 0.0
    ), n, valid


class CollisionChannel:
    """Precompiled collision map for a fixed reservoir state and coupling.

    Builds its internal representation once; ``apply`` then costs one banded
    (or Kraus) contraction per collision.  The kernel backend is resolved at
    construction time.
    """

    def __init__(self, sigma: DensityMatrix, params: ChannelParams, backend=None):
        if sigma.mode_count != 1:
            raise ShapeError("reservoir state must be single-mode")
        if sigma.cutoff != params.cutoff:
            raise ShapeError("reservoir cutoff does not match channel cutoff")
        if sigma.tail_occupation(2) > INTERMEDIATE_TAIL_TOL:
            raise CutoffTooSmallError(
                f"reservoir occupies its top two levels with "
                f"{sigma.tail_occupation(2):.3e} > {INTERMEDIATE_TAIL_TOL:.0e}"
            )
        self.sigma = sigma
        self.params = params
        self.backend = active_backend() if backend is None else backend
        self._displacement = None
        self._maps = None
        self._kraus = None

        arr = sigma.entries
        probs = self._diagonal_probabilities(arr, DIAGONAL_TOL)
        if probs is None:
            ops = mode_operators(params.cutoff)
            alpha = complex(np.trace(arr @ ops.annihilate))
            if abs(alpha) > 1e-12:
                d_alpha = displacement_matrix(alpha, params.cutoff)
                centered = d_alpha.conj().T @ arr @ d_alpha
                probs = self._diagonal_probabilities(
                    centered, DISPLACED_DIAGONAL_TOL
                )
                if probs is not None:
                    self._displacement = displacement_matrix(
                        params.s * alpha, params.cutoff
                    )
        if probs is not None:
            self.strategy = "banded" if self._displacement is None else "displaced"
            self._maps = _kernels.build_band_maps(
                sector_blocks(params), probs, backend=self.backend
            )
        else:
            self.strategy = "kraus"
            self._kraus = self._build_kraus(arr, params)

    @staticmethod
    def _diagonal_probabilities(arr, tol):
        off = arr - np.diag(arr.diagonal())
        if np.abs(off).max() > tol:
            return None
        probs = np.clip(arr.diagonal().real, 0.0, None)
        return probs / probs.sum()

    @staticmethod
    def _build_kraus(arr, params):
        n_max = params.cutoff.n_max
        dim = params.cutoff.dim
        weights, vectors = np.linalg.eigh(arr)
        keep = weights > KRAUS_WEIGHT_FLOOR
        weights = weights[keep]
        vectors = vectors[:, keep]
        check_dimension(dim * len(weights), "Kraus form of the collision")
        blocks = sector_blocks(params)
        kraus = np.empty((len(weights) * dim, dim, dim), dtype=np.complex128)
        idx = 0
        for r in range(len(weights)):
            root = math.sqrt(weights[r])
            vec = vectors[:, r]
            for m in range(dim):
                slice_m, n, valid = _dense_sector_slice(blocks, m, n_max)
                gathered = np.where(valid, vec[np.where(valid, n, 0)], 0.0)
                kraus[idx] = root * slice_m * gathered
                idx += 1
        return kraus

    def apply_entries(self, arr: np.ndarray) -> np.ndarray:
        """One collision on a raw Hermitian matrix (no state validation)."""
        if self.strategy == "kraus":
            return _kernels.apply_kraus(self._kraus, arr, backend=self.backend)
        out = _kernels.apply_band_maps(self._maps, arr, backend=self.backend)
        if self._displacement is not None:
            out = self._displacement @ out @ self._displacement.conj().T
        return out

    def apply(self, rho: DensityMatrix) -> DensityMatrix:
        """One collision; validates the input guard and the output state."""
        if rho.mode_count != 1:
            raise ShapeError("system state must be single-mode")
        if rho.cutoff != self.params.cutoff:
            raise ShapeError("system cutoff does not match channel cutoff")
        tail = rho.tail_occupation(2)
        if tail > INTERMEDIATE_TAIL_TOL:
            raise CutoffTooSmallError(
                f"state occupies its top two levels with {tail:.3e} > "
                f"{INTERMEDIATE_TAIL_TOL:.0e}; raise the cutoff"
            )
        return DensityMatrix(self.apply_entries(rho.entries), rho.cutoffs)


def apply_channel(
    rho: DensityMatrix, sigma: DensityMatrix, params: ChannelParams
) -> DensityMatrix:
    """Single collision L(rho) = Tr_b S (rho x sigma) S^dagger."""
    return CollisionChannel(sigma, params).apply(rho)


@dataclass(frozen=True)
class CouplingSchedule:
    """Per-collision coupling angles, with three recognized patterns."""

    kind: str
    values: tuple

    KINDS = ("constant", "van_hove_fixed_K", "van_hove_running")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise InvalidParameterError(f"unknown schedule kind {self.kind!r}")
        values = tuple(float(v) for v in self.values)
        if not values:
            raise InvalidParameterError("schedule must contain at least one step")
        for v in values:
            if not 0.0 < v <= math.pi / 2 + 1e-12:
                raise InvalidParameterError(f"coupling {v!r} outside (0, pi/2]")
        if self.kind == "constant":
            if any(abs(v - values[0]) > 1e-12 for v in values):
                raise InvalidParameterError("constant schedule must repeat one value")
        elif self.kind == "van_hove_fixed_K":
            expected = 1.0 / math.sqrt(len(values))
            if any(abs(v - expected) > 1e-12 for v in values):
                raise InvalidParameterError(
                    "fixed-K schedule must use 1/sqrt(K) at every one of its K steps"
                )
        else:
            for k, v in enumerate(values):
                if abs(v - 1.0 / math.sqrt(k + 1)) > 1e-12:
                    raise InvalidParameterError(
                        "running schedule must use 1/sqrt(k+1) at step k"
                    )
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, lam: float, steps: int) -> "CouplingSchedule":
        return cls("constant", (float(lam),) * int(steps))

    @classmethod
    def van_hove_fixed_k(cls, k: int) -> "CouplingSchedule":
        return cls("van_hove_fixed_K", (1.0 / math.sqrt(k),) * int(k))

    @classmethod
    def van_hove_running(cls, steps: int) -> "CouplingSchedule":
        return cls(
            "van_hove_running",
            tuple(1.0 / math.sqrt(k + 1) for k in range(int(steps))),
        )


@dataclass(frozen=True)
class RelaxationTrajectory:
    """Record of an iterated collision run.

    ``distances[k]`` is the trace distance between the states after k and
    k + 1 collisions; ``mean_photons`` and ``purities`` cover every visited
    state (length step_count + 1).  To keep long runs affordable, ``states``
    holds only the initial and final state unless the run was asked to keep
    all of them.
    """

    states: tuple
    distances: np.ndarray
    converged_at: int | None
    mean_photons: np.ndarray
    purities: np.ndarray
    lambdas: np.ndarray

    @property
    def step_count(self) -> int:
        return len(self.distances)

    @property
    def initial(self) -> DensityMatrix:
        return self.states[0]

    @property
    def final(self) -> DensityMatrix:
        return self.states[-1]

    def csv_rows(self):
        """Rows (step, trace_distance_to_next, mean_photon_number, purity).

        The final state has no successor; its distance field is nan.
        """
        rows = []
        for k in range(self.step_count + 1):
            dist = self.distances[k] if k < self.step_count else math.nan
            rows.append((k, dist, self.mean_photons[k], self.purities[k]))
        return rows


def _run_collisions(rho0, channels, lambdas, tol, max_steps, keep_states):
    states = [rho0]
    mean_photons = [mean_photon_number(rho0)]
    purities = [purity(rho0)]
    distances = []
    converged_at = None
    cur = rho0
    for step in range(max_steps):
        nxt = channels[step].apply(cur)
        distances.append(trace_distance(cur, nxt))
        mean_photons.append(mean_photon_number(nxt))
        purities.append(purity(nxt))
        if keep_states:
            states.append(nxt)
        cur = nxt
        if tol is not None and distances[-1] < tol:
            converged_at = step + 1
            break
    if not keep_states:
        states.append(cur)
    return RelaxationTrajectory(
        states=tuple(states),
        distances=np.asarray(distances),
        converged_at=converged_at,
        mean_photons=np.asarray(mean_photons),
        purities=np.asarray(purities),
        lambdas=np.asarray(lambdas[: len(distances)]),
    )


def iterate_to_fixed_point(
    rho0: DensityMatrix,
    sigma: DensityMatrix,
    params: ChannelParams,
    tol: float = DEFAULT_TOL,
    max_steps: int = DEFAULT_MAX_STEPS,
    keep_states: bool = False,
) -> RelaxationTrajectory:
    """Iterate collisions until consecutive states differ by less than tol.

    Returns a trajectory whose ``converged_at`` is unset when max_steps ran
    out before the tolerance was met (that is not an error).
    """
    if not tol >= 1e-12:
        raise InvalidParameterError(f"tol must be at least 1e-12, got {tol!r}")
    if int(max_steps) < 1:
        raise InvalidParameterError(f"max_steps must be >= 1, got {max_steps!r}")
    if rho0.mode_count != 1 or rho0.cutoff != params.cutoff:
        raise ShapeError("initial state must be single-mode on the channel cutoff")
    channel = CollisionChannel(sigma, params)
    max_steps = int(max_steps)
    return _run_collisions(
        rho0, [channel] * max_steps, [params.lam] * max_steps, tol, max_steps, keep_states
    )


def run_schedule(
    rho0: DensityMatrix,
    sigma: DensityMatrix,
    schedule: CouplingSchedule,
    cutoff: FockCutoff,
    keep_states: bool = False,
) -> RelaxationTrajectory:
    """Apply one collision per schedule entry, with its per-step coupling."""
    if rho0.mode_count != 1 or rho0.cutoff != cutoff:
        raise ShapeError("initial state must be single-mode on the given cutoff")
    if sigma.mode_count != 1 or sigma.cutoff != cutoff:
        raise ShapeError("reservoir state must be single-mode on the given cutoff")
    cache = {}
    channels = []
    for lam in schedule.values:
        if lam not in cache:
            cache[lam] = CollisionChannel(sigma, ChannelParams(lam, cutoff))
        channels.append(cache[lam])
    return _run_collisions(
        rho0,
        channels,
        list(schedule.values),
        tol=None,
        max_steps=len(channels),
        keep_states=keep_states,
    )
