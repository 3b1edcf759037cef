"""Environment-controlled runtime knobs.

Two switches are read from the environment:

``BEAMCHAIN_BACKEND``
    Which implementation of the hot kernels to use.  ``auto`` (default)
    picks numba when it is importable and falls back to pure numpy,
    ``numba`` requires numba, ``numpy`` forces the fallback path.

``BEAMCHAIN_MAX_DIM``
    Upper bound on the dimension of any explicitly materialized joint
    (two-mode) space.  Guards tensor products and dense two-mode
    unitaries against accidental memory blowups.
"""

import os

from .errors import InvalidParameterError, ResourceLimitError

try:
    import numba  # noqa: F401

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

BACKEND_ENV = "BEAMCHAIN_BACKEND"
MAX_DIM_ENV = "BEAMCHAIN_MAX_DIM"
DEFAULT_MAX_DIM = 4096


def active_backend() -> str:
    """Resolve the kernel backend currently in effect: "numba" or "numpy"."""
    choice = os.environ.get(BACKEND_ENV, "auto").strip().lower()
    if choice in ("", "auto"):
        return "numba" if HAS_NUMBA else "numpy"
    if choice == "numba":
        if not HAS_NUMBA:
            raise InvalidParameterError(
                f"{BACKEND_ENV}=numba but numba is not importable"
            )
        return "numba"
    if choice == "numpy":
        return "numpy"
    raise InvalidParameterError(
        f"{BACKEND_ENV} must be one of auto/numba/numpy, got {choice!r}"
    )


def max_dimension() -> int:
    """Largest joint dimension this process may materialize densely."""
    raw = os.environ.get(MAX_DIM_ENV)
    if raw is None:
        return DEFAULT_MAX_DIM
    try:
        value = int(raw)
    except ValueError:
        raise InvalidParameterError(f"{MAX_DIM_ENV} must be an integer, got {raw!r}")
    if value < 2:
        raise InvalidParameterError(f"{MAX_DIM_ENV} must be at least 2, got {value}")
    return value


def check_dimension(dim: int, what: str) -> None:
    """Raise if ``dim`` exceeds the configured guard."""
    limit = max_dimension()
    if dim > limit:
        raise ResourceLimitError(
            f"{what} needs dimension {dim}, above the limit {limit} "
            f"(raise {MAX_DIM_ENV} to override)"
        )
