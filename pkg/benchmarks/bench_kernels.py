#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times the three hot kernels on protocol-sized states (128 amplitudes, the
seven-atom register) and on the largest validation states (two atoms plus
a truncated mode per cavity), then an end-to-end branch enumeration under
whichever backend is active (set CAVTELEPORT_BACKEND to switch).

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time
import timeit

import numpy as np

from cavteleport import _kernels
from cavteleport import statevec as sv
from cavteleport.protocol import InputState, enumerate_all_branches


def _case(n_subsystems, dims, targets, rng):
    layout_dims = tuple(dims)
    total = int(np.prod(layout_dims))
    amps = rng.normal(size=total) + 1j * rng.normal(size=total)
    amps = np.ascontiguousarray(amps / np.linalg.norm(amps))
    base, toff = sv._offsets(layout_dims, targets)
    k = toff.shape[0]
    mat = np.ascontiguousarray(np.linalg.qr(rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k)))[0])
    return amps, mat, base, toff


def bench_kernels(repeat: int) -> None:
    rng = np.random.default_rng(1)
    cases = {
        "7 atoms, 2-atom op (dim 128, k=4)": _case(7, [2] * 7, (0, 2), rng),
        "7 atoms, 4-atom probs (dim 128, k=16)": _case(7, [2] * 7, (0, 2, 1, 5), rng),
        "2 atoms + mode, 3-local op (dim 10368, k=36)": _case(
            9, [2] * 7 + [9, 9], (0, 2, 7), rng
        ),
    }
    numba_impl = _kernels.numba_impl()
    impls = {"numpy": _kernels.NUMPY_IMPL}
    if numba_impl is not None:
        impls["numba"] = numba_impl

    print(f"{'case':50s} {'kernel':13s} " + "  ".join(f"{n:>10s}" for n in impls))
    for name, (amps, mat, base, toff) in cases.items():
        for kernel_idx, kernel_name in ((0, "apply_local"), (1, "subset_probs"), (2, "collapse")):
            row = []
            for impl_name, impl in impls.items():
                fn = impl[kernel_idx]
                if kernel_idx == 0:
                    call = lambda: fn(amps, mat, base, toff)
                elif kernel_idx == 1:
                    call = lambda: fn(amps, base, toff)
                else:
                    call = lambda: fn(amps, base, toff, 0, 1.0)
                call()  # warm-up / JIT
                t = timeit.timeit(call, number=repeat) / repeat
                row.append(f"{t * 1e6:9.2f}us")
            print(f"{name:50s} {kernel_name:13s} " + "  ".join(f"{v:>10s}" for v in row))


def bench_end_to_end(repeat: int) -> None:
    rng = np.random.default_rng(2)
    inputs = [InputState.random(rng) for _ in range(50)]
    enumerate_all_branches(inputs[0])  # warm-up (table load + JIT)
    t0 = time.perf_counter()
    for _ in range(repeat):
        for inp in inputs:
            enumerate_all_branches(inp)
    dt = (time.perf_counter() - t0) / (repeat * len(inputs))
    print(
        f"\nenumerate_all_branches (32 branches, backend={_kernels.backend_name()}): "
        f"{dt * 1e3:.3f} ms per input"
    )


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()
    print(f"active backend: {_kernels.backend_name()}")
    bench_kernels(args.repeat)
    bench_end_to_end(max(1, args.repeat // 40))
