"""Benchmark the collision kernels: numba-jitted loops vs pure numpy.

Times the three hot paths behind one collision -- building the band transfer
matrices, applying them, and applying a Kraus stack -- at several cutoffs.

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --sizes 31 63 127 --repeats 20
"""

import argparse
import statistics
import time

import numpy as np

from beamchain import ChannelParams, CollisionChannel, FockCutoff, coherent_state, thermal_state
from beamchain._kernels import build_band_maps
from beamchain.channel import sector_blocks
from beamchain.fock import DensityMatrix
from beamchain.runtime import HAS_NUMBA

LAM = 0.7


def random_low_rank_state(rng, cutoff, rank):
    """Mixed state with `rank` nonzero eigenvalues on the lower half levels."""
    support = cutoff.dim // 2
    factors = rng.normal(size=(support, rank)) + 1j * rng.normal(size=(support, rank))
    arr = np.zeros((cutoff.dim, cutoff.dim), dtype=np.complex128)
    arr[:support, :support] = factors @ factors.conj().T
    arr /= arr.trace().real
    return DensityMatrix(arr, (cutoff,))


def best_ms(fn, repeats):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append((time.perf_counter() - start) * 1e3)
    return statistics.median(times)


def bench_size(n_max, repeats, rank, rows):
    cutoff = FockCutoff(n_max)
    params = ChannelParams(LAM, cutoff)
    blocks = sector_blocks(params)
    probs = thermal_state(1.0, cutoff).entries.diagonal().real.copy()
    rho = coherent_state(min(2.0, n_max**0.5 / 2.0), cutoff)

    banded = {"numpy": CollisionChannel(thermal_state(1.0, cutoff), params, backend="numpy")}
    kraus_sigma = random_low_rank_state(np.random.default_rng(7), cutoff, rank)
    kraus = {"numpy": CollisionChannel(kraus_sigma, params, backend="numpy")}
    if HAS_NUMBA:
        banded["numba"] = CollisionChannel(thermal_state(1.0, cutoff), params, backend="numba")
        kraus["numba"] = CollisionChannel(kraus_sigma, params, backend="numba")
        # trigger jit compilation outside the timed region
        build_band_maps(blocks, probs, backend="numba")
        banded["numba"].apply_entries(rho.entries)
        kraus["numba"].apply_entries(rho.entries)

    def timings(make):
        out = {name: best_ms(make(name), repeats) for name in banded}
        out.setdefault("numba", None)
        return out

    rows.append(
        ("build_band_maps", n_max)
        + row_pair(timings(lambda b: lambda: build_band_maps(blocks, probs, backend=b)))
    )
    rows.append(
        ("apply_band_maps", n_max)
        + row_pair(timings(lambda b: lambda: banded[b].apply_entries(rho.entries)))
    )
    rows.append(
        ("apply_kraus", n_max)
        + row_pair(timings(lambda b: lambda: kraus[b].apply_entries(rho.entries)))
    )


def row_pair(timing):
    numpy_ms = timing["numpy"]
    numba_ms = timing["numba"]
    if numba_ms is None:
        return (numpy_ms, None, None)
    return (numpy_ms, numba_ms, numpy_ms / numba_ms)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[31, 63, 127],
                        help="n_max values to benchmark")
    parser.add_argument("--repeats", type=int, default=10,
                        help="timed repetitions per kernel (median reported)")
    parser.add_argument("--rank", type=int, default=8,
                        help="eigenvalue rank of the Kraus-path reservoir")
    args = parser.parse_args()

    if not HAS_NUMBA:
        print("numba not importable; timing the numpy path only\n")

    rows = []
    for n_max in args.sizes:
        bench_size(n_max, args.repeats, args.rank, rows)

    header = f"{'kernel':<17} {'n_max':>5} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for kernel, n_max, numpy_ms, numba_ms, speedup in rows:
        numba_txt = f"{numba_ms:10.3f}" if numba_ms is not None else f"{'-':>10}"
        speed_txt = f"{speedup:7.1f}x" if speedup is not None else f"{'-':>8}"
        print(f"{kernel:<17} {n_max:>5} {numpy_ms:10.3f} {numba_txt} {speed_txt}")


if __name__ == "__main__":
    main()
