"""Characteristic functions and the infinite-product asymptotic state.

The characteristic function of a state is chi(z) = Tr(rho D(z)) with the
displacement D(z) = exp(z a^dagger - z* a).  A collision multiplies
characteristic functions, chi_out(z) = chi_in(c z) chi_sigma(s z), so the
state reached after infinitely many collisions has

    chi_inf(z) = prod_{k>=0} chi_sigma(s c^k z),

which ``asymptotic_product`` evaluates with a certified truncation: the
number of retained factors is chosen so that an empirical bound on the
omitted log-tail drops below the requested tolerance.

Closed forms used throughout: for the n-photon reservoir chi(z) =
exp(-|z|^2/2) p_n(|z|^2) with the Laguerre polynomial written as the
explicit binomial sum p_n(x) = sum_j C(n, j) (-x)^j / j!, and its infinite
product collapses (n = 1) to the q-Pochhammer symbol (s^2 |z|^2; c^2)_inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .channel import ChannelParams
from .errors import (
    EstimationError,
    InvalidParameterError,
    NumericalInstabilityError,
    ShapeError,
)
from .fock import DensityMatrix, displacement_matrix

C0_SAMPLE_POINTS = 64
C0_SAFETY = 1.5
SMALL_FACTOR_FLOOR = 1e-3
UNDERFLOW_FLOOR = 1e-300
MAX_PRODUCT_TERMS = 2_000_000
RICHARDSON_TOL = 1e-5
QUARTIC_FIT_RESIDUAL_TOL = 1e-7


@dataclass(frozen=True)
class CharFn:
    """Evaluatable characteristic function.

    Instances are callable; every kind accepts scalars or numpy arrays of
    complex arguments (matrix-backed evaluation loops internally).
    """

    kind: str
    _fn: Callable

    def __call__(self, z):
        return self._fn(z)


def laguerre_polynomial(n: int, x) -> np.ndarray:
    """p_n(x) = sum_{j=0}^{n} C(n, j) (1/j!) (-x)^j, vectorized in x."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 0:
        raise InvalidParameterError(f"degree must be a nonnegative integer, got {n!r}")
    coeffs = [
        (-1.0) ** j * math.comb(n, j) / math.factorial(j) for j in range(n + 1)
    ]
    x = np.asarray(x)
    result = np.zeros_like(x, dtype=float)
    for coef in reversed(coeffs):
        result = result * x + coef
    return result


def charfn_fock(n: int) -> CharFn:
    """Characteristic function of the n-photon state."""

    def fn(z):
        z = np.asarray(z, dtype=complex)
        r2 = np.abs(z) ** 2
        return np.exp(-r2 / 2) * laguerre_polynomial(n, r2) + 0j

    fn(0.0)  # validates n eagerly
    return CharFn(kind=f"fock({n})", _fn=fn)


def charfn_thermal(beta: float) -> CharFn:
    """Characteristic function of the thermal state at inverse temperature beta."""
    if not (beta > 0) or not math.isfinite(beta):
        raise InvalidParameterError(f"beta must be positive and finite, got {beta!r}")
    width = 1.0 / math.tanh(beta / 2)

    def fn(z):
        z = np.asarray(z, dtype=complex)
        return np.exp(-0.5 * np.abs(z) ** 2 * width) + 0j

    return CharFn(kind=f"thermal({beta})", _fn=fn)


def charfn_coherent(alpha: complex) -> CharFn:
    """Characteristic function of the coherent state with amplitude alpha."""
    alpha = complex(alpha)

    def fn(z):
        z = np.asarray(z, dtype=complex)
        return np.exp(-0.5 * np.abs(z) ** 2 + z * np.conj(alpha) - np.conj(z) * alpha)

    return CharFn(kind=f"coherent({alpha})", _fn=fn)


def charfn_of_state(rho: DensityMatrix) -> CharFn:
    """Matrix-backed characteristic function z -> Tr(rho D(z))."""
    if rho.mode_count != 1:
        raise ShapeError("charfn_of_state takes a single-mode state")
    entries = rho.entries
    cutoff = rho.cutoff

    def fn(z):
        arr = np.asarray(z, dtype=complex)
        flat = arr.ravel()
        vals = np.empty(flat.shape, dtype=complex)
        for k, point in enumerate(flat):
            vals[k] = np.trace(entries @ displacement_matrix(point, cutoff))
        return vals.reshape(arr.shape) if arr.shape else vals[0]

    return CharFn(kind="matrix_backed", _fn=fn)


@dataclass(frozen=True)
class ProductTruncation:
    """How many product factors were kept and the certified log-tail bound.

    ``underflowed`` marks evaluations whose value collapsed to exact zero
    because a factor fell below the floating-point floor.
    """

    k_terms: int
    tail_bound: float
    underflowed: bool = False


def _derivative_bound(chi: CharFn, direction: complex, reach: float) -> float:
    """Empirical bound on |d chi / dx| along x * direction, x in [0, reach]."""
    xs = np.linspace(0.0, reach, C0_SAMPLE_POINTS)
    vals = chi(xs * direction)
    if not np.all(np.isfinite(vals)):
        raise EstimationError("characteristic function returned non-finite values")
    slopes = np.abs(np.diff(vals) / np.diff(xs))
    return C0_SAFETY * float(slopes.max())


def asymptotic_product(
    chi_sigma: CharFn,
    params: ChannelParams,
    z: complex,
    rel_tol: float = 1e-9,
):
    """Evaluate prod_{k >= 0} chi_sigma(s c^k z) with certified truncation.

    Returns (value, ProductTruncation).  Factors are accumulated in log
    space on a branch kept continuous in k; factors whose modulus is below
    a small floor are multiplied in directly, since a nearby zero crossing
    makes the continuity argument unreliable there.
    """
    if not rel_tol >= 1e-12:
        raise InvalidParameterError(f"rel_tol must be at least 1e-12, got {rel_tol!r}")
    z = complex(z)
    s, c = params.s, params.c
    if abs(params.lam - math.pi / 2) < 1e-15:
        # c = 0: a single collision already replaces the state
        return complex(chi_sigma(z)), ProductTruncation(k_terms=1, tail_bound=0.0)
    if z == 0:
        return 1.0 + 0.0j, ProductTruncation(k_terms=1, tail_bound=0.0)

    direction = z / abs(z)
    reach = max(1.0, s * abs(z))
    c0_hat = _derivative_bound(chi_sigma, direction, reach)
    if c0_hat == 0.0:
        return complex(chi_sigma(s * z)), ProductTruncation(k_terms=1, tail_bound=0.0)
    # tail(k) = 2 c0 c^k / (1 - c) <= rel_tol
    needed = math.log(rel_tol * (1 - c) / (2 * c0_hat)) / math.log(c)
    k_terms = max(1, math.ceil(needed))
    if k_terms > MAX_PRODUCT_TERMS:
        raise EstimationError(
            f"would need {k_terms} factors to certify the tail; coupling too weak"
        )
    tail_bound = 2 * c0_hat * c**k_terms / (1 - c)

    factors = np.asarray(chi_sigma(s * c ** np.arange(k_terms) * z), dtype=complex)
    mags = np.abs(factors)
    if np.any(mags < UNDERFLOW_FLOOR):
        return 0.0 + 0.0j, ProductTruncation(
            k_terms=k_terms, tail_bound=tail_bound, underflowed=True
        )
    small = mags < SMALL_FACTOR_FLOOR
    log_mag = np.sum(np.log(mags[~small]))
    angles = np.unwrap(np.angle(factors[~small]))
    value = np.exp(log_mag + 1j * angles.sum()) * np.prod(factors[small])
    return complex(value), ProductTruncation(k_terms=k_terms, tail_bound=tail_bound)


def asymptotic_charfn(
    chi_sigma: CharFn, params: ChannelParams, rel_tol: float = 1e-12
) -> CharFn:
    """The infinite product bundled as a CharFn (tail bounds dropped).

    Defaults to the tightest supported truncation: callers of the bundled
    form tend to difference it, which amplifies any jump in the truncated
    term count by 1/h^2.
    """

    def fn(z):
        arr = np.asarray(z, dtype=complex)
        flat = arr.ravel()
        vals = np.empty(flat.shape, dtype=complex)
        for k, point in enumerate(flat):
            vals[k] = asymptotic_product(chi_sigma, params, point, rel_tol)[0]
        return vals.reshape(arr.shape) if arr.shape else vals[0]

    return CharFn(kind="product_asymptotic", _fn=fn)


def q_pochhammer(a: float, q: float, rel_tol: float = 1e-12) -> float:
    """(a; q)_inf = prod_{k>=0} (1 - a q^k), truncated deterministically.

    Factors stop once |a q^k| < rel_tol * (1 - q); the omitted tail then
    perturbs the product by a relative amount of order rel_tol.
    """
    if not 0.0 <= q < 1.0:
        raise InvalidParameterError(f"q must lie in [0, 1), got {q!r}")
    if not rel_tol > 0:
        raise InvalidParameterError(f"rel_tol must be positive, got {rel_tol!r}")
    if a == 0.0:
        return 1.0
    threshold = rel_tol * (1.0 - q)
    if q == 0.0:
        count = 1
    else:
        count = max(1, math.ceil(math.log(threshold / abs(a)) / math.log(q)))
    ks = np.arange(count)
    return float(np.prod(1.0 - a * q**ks))


class CharFnMoments(NamedTuple):
    mean_a: complex
    cov_adag_a: float
    cov_aa: complex


def _richardson(coarse, fine, what):
    value = (4.0 * fine - coarse) / 3.0
    # The correction removed by extrapolation doubles as its error estimate;
    # a large one means the evaluations are too rough to differentiate.
    if abs(value - fine) > RICHARDSON_TOL:
        raise NumericalInstabilityError(
            f"{what}: Richardson correction {abs(value - fine):.3e} exceeds "
            f"{RICHARDSON_TOL:g}"
        )
    return value


def moments_from_charfn(chi: CharFn, h: float = 1e-3) -> CharFnMoments:
    """First and second moments from derivatives of chi at the origin.

    Uses central differences at steps h and h/2 with one Richardson step;
    disagreement between the two estimates raises, since it signals an
    evaluation too noisy to differentiate.

    Conventions: mean <a> = -d/dz* chi(0), Cov[a^dagger, a] is symmetrized,
    and Wirtinger derivatives follow d/dz = (d/dx - i d/dy) / 2.
    """
    chi0 = complex(chi(0.0))

    def first(step, direction):
        return (complex(chi(step * direction)) - complex(chi(-step * direction))) / (
            2 * step
        )

    def second(step, direction):
        return (
            complex(chi(step * direction))
            - 2 * chi0
            + complex(chi(-step * direction))
        ) / step**2

    def mixed(step):
        corners = (
            complex(chi(step + 1j * step))
            - complex(chi(step - 1j * step))
            - complex(chi(-step + 1j * step))
            + complex(chi(-step - 1j * step))
        )
        return corners / (4 * step**2)

    dx = _richardson(first(h, 1.0), first(h / 2, 1.0), "d/dx")
    dy = _richardson(first(h, 1.0j), first(h / 2, 1.0j), "d/dy")
    dxx = _richardson(second(h, 1.0), second(h / 2, 1.0), "d2/dx2")
    dyy = _richardson(second(h, 1.0j), second(h / 2, 1.0j), "d2/dy2")
    dxy = _richardson(mixed(h), mixed(h / 2), "d2/dxdy")

    dz = 0.5 * (dx - 1j * dy)
    dzbar = 0.5 * (dx + 1j * dy)
    dz_dzbar = 0.25 * (dxx + dyy)
    dzbar2 = 0.25 * (dxx - dyy + 2j * dxy)

    mean_a = -dzbar
    cov_adag_a = float((-dz_dzbar + dz * dzbar).real)
    cov_aa = dzbar2 - dzbar**2
    return CharFnMoments(mean_a=mean_a, cov_adag_a=cov_adag_a, cov_aa=cov_aa)


def log_charfn_quartic_coeff(chi: CharFn) -> float:
    """Coefficient of t^4 in ln chi(t) for real t, by an even polynomial fit.

    Gaussian characteristic functions have a quadratic logarithm, so this
    coefficient is a direct non-Gaussianity diagnostic.  Nine symmetric
    samples on [-0.4, 0.4] are fitted with even orders {2, 4, 6}; a poor
    fit raises rather than returning a meaningless number.
    """
    ts = np.linspace(-0.4, 0.4, 9)
    vals = np.asarray(chi(ts), dtype=complex)
    if np.any(np.abs(vals) == 0.0):
        raise NumericalInstabilityError("chi vanishes on the fit interval")
    logs = np.log(vals).real
    design = np.stack([ts**2, ts**4, ts**6], axis=1)
    coeffs, *_ = np.linalg.lstsq(design, logs, rcond=None)
    residual = float(np.abs(design @ coeffs - logs).max())
    if residual > QUARTIC_FIT_RESIDUAL_TOL:
        raise NumericalInstabilityError(
            f"even-polynomial fit residual {residual:.3e} exceeds "
            f"{QUARTIC_FIT_RESIDUAL_TOL:.0e}"
        )
    return float(coeffs[1])
