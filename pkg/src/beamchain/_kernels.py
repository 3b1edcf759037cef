"""Hot kernels for the collision update, in numba and pure-numpy variants.

The beam-splitter unitary conserves total photon number, so it splits into
orthogonal blocks over the joint levels N = i + m.  When the reservoir state
is diagonal in the number basis the collision map additionally preserves
matrix diagonals of the system state: output entry (i, j) depends only on
input entries (i', j') with i' - j' = i - j.  The map is then fully described
by one real transfer matrix per band,

    out[r + d, r] = sum_s M[d, r, s] * in[s + d, s],      0 <= d <= n_max,

and the d < 0 bands follow from Hermiticity.  ``build_band_maps`` computes
the M[d] stack from the sector blocks of the unitary and the reservoir
occupation probabilities; ``apply_band_maps`` performs one collision.

For a non-diagonal reservoir the map is applied in Kraus form,
out = sum_k K[k] @ in @ K[k]^dagger, with ``apply_kraus``.

All functions exist twice with identical semantics: ``*_numpy`` (vectorized
array code) and ``*_numba`` (jitted loops, present when numba imports).  Use
the dispatching wrappers at the bottom unless a specific variant is wanted.
"""

import numpy as np

from .runtime import HAS_NUMBA, active_backend

# ---------------------------------------------------------------------------
# pure-numpy variants
# ---------------------------------------------------------------------------


def build_band_maps_numpy(sector_blocks, probs):
    """Band transfer matrices for a number-diagonal reservoir (numpy path).

    ``sector_blocks[N, r, c]`` holds the unitary block of the N-photon
    sector, rows/columns indexed by system level minus max(0, N - n_max).
    For each reservoir output level m the dense slice
    F[i, j] = <i, m| S |j, i + m - j> is gathered once and the products
    F[r + d, s + d] * F[r, s] accumulate into every band d.
    """
    n_max = probs.shape[0] - 1
    dim = n_max + 1
    maps = np.zeros((dim, dim, dim))
    i = np.arange(dim)[:, None]
    j = np.arange(dim)[None, :]
    for m in range(dim):
        n = i + m - j
        valid = (n >= 0) & (n <= n_max)
        sector = i + m
        offset = np.maximum(0, sector - n_max)
        slice_m = np.where(
            valid,
            sector_blocks[sector, i - offset, np.where(valid, j - offset, 0)],
            0.0,
        )
        weighted = np.where(valid, probs[np.where(valid, n, 0)], 0.0) * slice_m
        for d in range(dim):
            size = dim - d
            maps[d, :size, :size] += weighted[d:, d:] * slice_m[:size, :size]
    return maps


def apply_band_maps_numpy(maps, rho):
    """One collision of a Hermitian matrix via the band transfer stack."""
    dim = rho.shape[0]
    d = np.arange(dim)[:, None]
    s = np.arange(dim)[None, :]
    rows = d + s
    pad = rows >= dim
    bands = rho[np.where(pad, 0, rows), s]
    bands[pad] = 0.0
    out_bands = (
        np.matmul(maps, bands.real[:, :, None])
        + 1j * np.matmul(maps, bands.imag[:, :, None])
    )[:, :, 0]
    out = np.zeros((dim, dim), dtype=np.complex128)
    keep = ~pad
    out[rows[keep], np.broadcast_to(s, rows.shape)[keep]] = out_bands[keep]
    lower = np.tril(out, -1)
    return out + lower.conj().T


def apply_kraus_numpy(kraus, rho):
    """One collision in Kraus form (numpy path)."""
    tmp = kraus @ rho
    return np.tensordot(tmp, kraus.conj(), axes=([0, 2], [0, 2]))


# ---------------------------------------------------------------------------
# numba variants
# ---------------------------------------------------------------------------

if HAS_NUMBA:
    from numba import njit

    @njit(cache=True)
    def _build_band_maps_jit(sector_blocks, probs):
        n_max = probs.shape[0] - 1
        dim = n_max + 1
        maps = np.zeros((dim, dim, dim))
        for d in range(dim):
            for r in range(dim - d):
                i = r + d
                for s in range(dim - d):
                    j = s + d
                    acc = 0.0
                    for m in range(dim):
                        n = i + m - j
                        if n < 0 or n > n_max:
                            continue
                        sec1 = i + m
                        off1 = sec1 - n_max if sec1 > n_max else 0
                        sec2 = r + m
                        off2 = sec2 - n_max if sec2 > n_max else 0
                        acc += (
                            probs[n]
                            * sector_blocks[sec1, i - off1, j - off1]
                            * sector_blocks[sec2, r - off2, s - off2]
                        )
                    maps[d, r, s] = acc
        return maps

    @njit(cache=True)
    def _apply_band_maps_jit(maps, rho):
        dim = rho.shape[0]
        out = np.zeros((dim, dim), dtype=np.complex128)
        for d in range(dim):
            for r in range(dim - d):
                acc = 0.0 + 0.0j
                for s in range(dim - d):
                    acc += maps[d, r, s] * rho[s + d, s]
                out[r + d, r] = acc
        for i in range(dim):
            for j in range(i):
                out[j, i] = np.conj(out[i, j])
        return out

    @njit(cache=True)
    def _apply_kraus_jit(kraus, kraus_ct, rho):
        # np.dot lowers to BLAS for contiguous complex matrices, so the loop
        # body runs at gemm speed; the adjoints arrive precomputed because
        # numba cannot pass a transposed view to BLAS.
        count, dim, _ = kraus.shape
        out = np.zeros((dim, dim), dtype=np.complex128)
        for k in range(count):
            out += np.dot(np.dot(kraus[k], rho), kraus_ct[k])
        return out

    def build_band_maps_numba(sector_blocks, probs):
        return _build_band_maps_jit(
            np.ascontiguousarray(sector_blocks), np.ascontiguousarray(probs)
        )

    def apply_band_maps_numba(maps, rho):
        return _apply_band_maps_jit(
            np.ascontiguousarray(maps), np.ascontiguousarray(rho, dtype=np.complex128)
        )

    def apply_kraus_numba(kraus, rho):
        stack = np.ascontiguousarray(kraus, dtype=np.complex128)
        adjoints = np.ascontiguousarray(stack.conj().transpose(0, 2, 1))
        return _apply_kraus_jit(
            stack, adjoints, np.ascontiguousarray(rho, dtype=np.complex128)
        )


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


def _resolve(backend):
    return active_backend() if backend is None else backend


def build_band_maps(sector_blocks, probs, backend=None):
    if _resolve(backend) == "numba":
        return build_band_maps_numba(sector_blocks, probs)
    return build_band_maps_numpy(sector_blocks, probs)


def apply_band_maps(maps, rho, backend=None):
    if _resolve(backend) == "numba":
        return apply_band_maps_numba(maps, rho)
    return apply_band_maps_numpy(maps, rho)


def apply_kraus(kraus, rho, backend=None):
    if _resolve(backend) == "numba":
        return apply_kraus_numba(kraus, rho)
    return apply_kraus_numpy(kraus, rho)
