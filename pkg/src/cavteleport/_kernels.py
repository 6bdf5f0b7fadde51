"""Dense array kernels for the state-vector engine.

Three operations dominate the runtime of protocol enumeration and Monte
Carlo sampling: applying a small local operator to a state vector,
accumulating Born probabilities over a measured subset, and collapsing
onto one outcome.  Each exists in two interchangeable implementations:

* a numba ``@njit`` version (fast path for the many-small-ops workload),
* a pure-numpy version (always available).

The active backend is chosen at import time from the ``CAVTELEPORT_BACKEND``
environment variable: ``numba``, ``numpy``, or ``auto`` (default; numba if
importable).  ``benchmarks/bench_kernels.py`` compares the two.

All kernels address the flat amplitude array through two precomputed
offset tables: ``base`` enumerates the joint index of the non-target
subsystems and ``toff`` the joint index of the targets, so that
``base[b] + toff[t]`` walks every flat index exactly once.
"""

from __future__ import annotations

import os

import numpy as np

_ENV_VAR = "CAVTELEPORT_BACKEND"


# ---------------------------------------------------------------------------
# pure-numpy implementations
# ---------------------------------------------------------------------------

def _apply_local_numpy(amps, mat, base, toff):
    """Return mat applied on the target subsystems, identity elsewhere."""
    out = np.empty_like(amps)
    idx = base[:, None] + toff[None, :]
    out[idx] = amps[idx] @ mat.T
    return out


def _subset_probs_numpy(amps, base, toff):
    """Born probabilities for each joint basis outcome of the targets."""
    idx = base[:, None] + toff[None, :]
    block = amps[idx]
    return np.sum(block.real**2 + block.imag**2, axis=0)


def _collapse_numpy(amps, base, toff, t_index, inv_norm):
    """Project onto target outcome ``t_index`` and renormalize."""
    out = np.zeros_like(amps)
    sel = base + toff[t_index]
    out[sel] = amps[sel] * inv_norm
    return out


# ---------------------------------------------------------------------------
# numba implementations (compiled lazily, cached on disk)
# ---------------------------------------------------------------------------

def _build_numba():
    from numba import njit

    @njit(cache=True)
    def apply_local(amps, mat, base, toff):
        k = toff.shape[0]
        nb = base.shape[0]
        out = np.empty_like(amps)
        if k <= 8:
            for b in range(nb):
                off = base[b]
                for r in range(k):
                    acc = 0.0 + 0.0j
                    for s in range(k):
                        acc += mat[r, s] * amps[off + toff[s]]
                    out[off + toff[r]] = acc
        else:
            # explicit loops lose to BLAS for larger blocks: gather, matmul, scatter
            block = np.empty((nb, k), dtype=np.complex128)
            for b in range(nb):
                off = base[b]
                for s in range(k):
                    block[b, s] = amps[off + toff[s]]
            res = np.dot(block, np.ascontiguousarray(mat.T))
            for b in range(nb):
                off = base[b]
                for r in range(k):
                    out[off + toff[r]] = res[b, r]
        return out

    @njit(cache=True)
    def subset_probs(amps, base, toff):
        k = toff.shape[0]
        probs = np.zeros(k)
        for t in range(k):
            acc = 0.0
            for b in range(base.shape[0]):
                v = amps[base[b] + toff[t]]
                acc += v.real * v.real + v.imag * v.imag
            probs[t] = acc
        return probs

    @njit(cache=True)
    def collapse(amps, base, toff, t_index, inv_norm):
        out = np.zeros_like(amps)
        off = toff[t_index]
        for b in range(base.shape[0]):
            i = base[b] + off
            out[i] = amps[i] * inv_norm
        return out

    return apply_local, subset_probs, collapse


def _select_backend():
    choice = os.environ.get(_ENV_VAR, "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(
            f"{_ENV_VAR} must be 'auto', 'numba' or 'numpy', got {choice!r}"
        )
    if choice == "numpy":
        return "numpy", (_apply_local_numpy, _subset_probs_numpy, _collapse_numpy)
    try:
        fns = _build_numba()
    except ImportError:
        if choice == "numba":
            raise
        return "numpy", (_apply_local_numpy, _subset_probs_numpy, _collapse_numpy)
    return "numba", fns


_BACKEND_NAME, (apply_local, subset_probs, collapse) = _select_backend()

NUMPY_IMPL = (_apply_local_numpy, _subset_probs_numpy, _collapse_numpy)


def backend_name() -> str:
    """Name of the kernel backend selected at import time."""
    return _BACKEND_NAME


def numba_impl():
    """The numba kernel triple, or None when numba is unavailable."""
    try:
        return _build_numba()
    except ImportError:
        return None
