"""Dense state vectors over labelled composite quantum systems.

Conventions fixed here and relied on everywhere else in the package:

* A two-level atom has basis index 0 = |g> (ground) and 1 = |e> (excited).
  A bosonic mode with Fock cutoff n has dimension n+1 and basis index k = |k>.
* The first subsystem listed in a layout is the most significant digit of
  the flat amplitude index: for atoms (1, 2), index = 2*i1 + i2.
* Measurement outcome strings spell one character per measured atom,
  'g' or 'e', in the order the targets were passed (not layout order).
* States returned by public operations that promise normalization have
  squared norm within 1e-10 of 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Hashable, Iterable, NamedTuple, Sequence

import numpy as np

from . import _kernels
from .errors import LayoutError, NormError, ShapeError

Label = Hashable

NORM_TOL = 1e-10
DEFAULT_PROB_FLOOR = 1e-14

_ATOM_CHARS = {"g": 0, "e": 1}
_ATOM_NAMES = "ge"

IDENTITY_2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


@dataclass(frozen=True)
class SubsystemLayout:
    """Ordered collection of (label, dimension) pairs."""

    subsystems: tuple[tuple[Label, int], ...]

    def __post_init__(self):
        labels = [lab for lab, _ in self.subsystems]
        if len(set(labels)) != len(labels):
            raise LayoutError(f"duplicate subsystem labels in {labels}")
        for lab, d in self.subsystems:
            if d < 1:
                raise LayoutError(f"subsystem {lab!r} has non-positive dimension {d}")

    @classmethod
    def atoms(cls, labels: Iterable[Label]) -> "SubsystemLayout":
        return cls(tuple((lab, 2) for lab in labels))

    @property
    def labels(self) -> tuple[Label, ...]:
        return tuple(lab for lab, _ in self.subsystems)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.subsystems)

    @property
    def dim(self) -> int:
        out = 1
        for d in self.dims:
            out *= d
        return out

    def axis(self, label: Label) -> int:
        for i, (lab, _) in enumerate(self.subsystems):
            if lab == label:
                return i
        raise LayoutError(f"unknown subsystem label {label!r}")

    def dimension_of(self, label: Label) -> int:
        return self.subsystems[self.axis(label)][1]


@lru_cache(maxsize=4096)
def _offsets(dims: tuple[int, ...], positions: tuple[int, ...]):
    """Offset tables addressing a flat index as (rest digits, target digits).

    ``toff`` enumerates the joint target index with the first listed target
    as the most significant digit; ``base`` enumerates everything else.
    """
    strides = np.ones(len(dims), dtype=np.int64)
    for i in range(len(dims) - 2, -1, -1):
        strides[i] = strides[i + 1] * dims[i + 1]
    toff = reduce(
        np.add.outer,
        [np.arange(dims[p], dtype=np.int64) * strides[p] for p in positions],
    ).ravel()
    rest = [i for i in range(len(dims)) if i not in positions]
    if rest:
        base = reduce(
            np.add.outer,
            [np.arange(dims[i], dtype=np.int64) * strides[i] for i in rest],
        ).ravel()
    else:
        base = np.zeros(1, dtype=np.int64)
    return base, np.ascontiguousarray(toff)


@dataclass(frozen=True)
class StateVector:
    """Immutable dense amplitude vector over a labelled layout."""

    layout: SubsystemLayout
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.shape[0] != self.layout.dim:
            raise ShapeError(
                f"amplitude length {amps.shape[0]} != layout dimension {self.layout.dim}"
            )
        amps = np.ascontiguousarray(amps)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm_sq(self) -> float:
        return float(np.sum(self.amplitudes.real**2 + self.amplitudes.imag**2))

    def require_normalized(self, tol: float = NORM_TOL) -> "StateVector":
        if abs(self.norm_sq - 1.0) > tol:
            raise NormError(f"state squared norm {self.norm_sq} is not 1 within {tol}")
        return self

    def normalized(self) -> "StateVector":
        n = np.sqrt(self.norm_sq)
        if n == 0.0:
            raise NormError("cannot normalize a zero vector")
        return StateVector(self.layout, self.amplitudes / n)


class MeasurementResult(NamedTuple):
    outcome: str
    probability: float
    state: StateVector


class Branch(NamedTuple):
    outcome: str
    probability: float
    state: StateVector


@dataclass(frozen=True)
class LocalOperator:
    """Square matrix acting on an ordered subset of subsystem labels."""

    labels: tuple[Label, ...]
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.ascontiguousarray(np.asarray(self.matrix, dtype=np.complex128))
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ShapeError(f"operator matrix must be square, got shape {mat.shape}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def is_unitary(self, tol: float = 1e-10) -> bool:
        prod = self.matrix.conj().T @ self.matrix
        return bool(np.max(np.abs(prod - np.eye(self.dim))) < tol)

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.matrix))))
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T)) < tol * scale)

    def dagger(self) -> "LocalOperator":
        return LocalOperator(self.labels, self.matrix.conj().T)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace matrix over the retained subsystems."""

    layout: SubsystemLayout
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=np.complex128)
        d = self.layout.dim
        if mat.shape != (d, d):
            raise ShapeError(f"density matrix shape {mat.shape} != ({d}, {d})")
        if np.max(np.abs(mat - mat.conj().T)) > 1e-10:
            raise ShapeError("density matrix is not Hermitian within 1e-10")
        if abs(np.trace(mat).real - 1.0) > 1e-10:
            raise ShapeError(f"density matrix trace {np.trace(mat)} is not 1 within 1e-10")
        if np.min(np.linalg.eigvalsh(mat)) < -1e-10:
            raise ShapeError("density matrix has an eigenvalue below -1e-10")
        mat = np.ascontiguousarray(mat)
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def basis_state(layout: SubsystemLayout, spec: str | Sequence[int]) -> StateVector:
    """Computational basis state from 'g'/'e' characters or basis indices.

    A string spec addresses atoms only ('gge'); a sequence of integers
    addresses arbitrary dimensions, one index per subsystem in layout order.
    """
    dims = layout.dims
    if isinstance(spec, str):
        if len(spec) != len(dims):
            raise LayoutError(f"spec {spec!r} has {len(spec)} chars for {len(dims)} subsystems")
        indices = []
        for ch, d in zip(spec, dims):
            if d != 2:
                raise LayoutError("string specs address two-level subsystems only")
            if ch not in _ATOM_CHARS:
                raise LayoutError(f"unknown basis character {ch!r}")
            indices.append(_ATOM_CHARS[ch])
    else:
        indices = list(spec)
        if len(indices) != len(dims):
            raise LayoutError(f"{len(indices)} indices given for {len(dims)} subsystems")
        for k, d in zip(indices, dims):
            if not 0 <= k < d:
                raise LayoutError(f"basis index {k} out of range for dimension {d}")
    flat = 0
    for k, d in zip(indices, dims):
        flat = flat * d + k
    amps = np.zeros(layout.dim, dtype=np.complex128)
    amps[flat] = 1.0
    return StateVector(layout, amps)


def atom_state(labels: Iterable[Label], spec: str) -> StateVector:
    """Shortcut: basis state of two-level atoms, e.g. atom_state((1, 2), 'ge')."""
    return basis_state(SubsystemLayout.atoms(labels), spec)


def single_atom_op(label: Label, matrix: np.ndarray) -> LocalOperator:
    return LocalOperator((label,), matrix)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def tensor(states: Sequence[StateVector]) -> StateVector:
    """Tensor product; layouts concatenate in the order given."""
    if not states:
        raise LayoutError("tensor requires at least one state")
    seen: set[Label] = set()
    subsystems: list[tuple[Label, int]] = []
    for s in states:
        for lab, d in s.layout.subsystems:
            if lab in seen:
                raise LayoutError(f"duplicate label {lab!r} across tensor factors")
            seen.add(lab)
            subsystems.append((lab, d))
    amps = reduce(np.kron, [s.amplitudes for s in states])
    return StateVector(SubsystemLayout(tuple(subsystems)), amps)


def _target_positions(state: StateVector, labels: Sequence[Label]) -> tuple[int, ...]:
    positions = tuple(state.layout.axis(lab) for lab in labels)
    if len(set(positions)) != len(positions):
        raise LayoutError(f"repeated target labels in {list(labels)}")
    return positions


def apply(state: StateVector, op: LocalOperator) -> StateVector:
    """Apply op on its target labels, identity elsewhere.  No normalization."""
    positions = _target_positions(state, op.labels)
    k = 1
    for p in positions:
        k *= state.layout.dims[p]
    if op.dim != k:
        raise ShapeError(f"operator dimension {op.dim} != target space dimension {k}")
    base, toff = _offsets(state.layout.dims, positions)
    out = _kernels.apply_local(state.amplitudes, op.matrix, base, toff)
    return StateVector(state.layout, out)


def _outcome_string(state: StateVector, positions: tuple[int, ...], index: int) -> str:
    dims = [state.layout.dims[p] for p in positions]
    digits = []
    for d in reversed(dims):
        digits.append(index % d)
        index //= d
    digits.reverse()
    chars = []
    for p, k in zip(positions, digits):
        if state.layout.dims[p] != 2:
            raise LayoutError("outcome strings are defined for two-level subsystems only")
        chars.append(_ATOM_NAMES[k])
    return "".join(chars)


def _probabilities(state: StateVector, targets: Sequence[Label]):
    positions = _target_positions(state, targets)
    base, toff = _offsets(state.layout.dims, positions)
    probs = _kernels.subset_probs(state.amplitudes, base, toff)
    return positions, base, toff, probs


def measure(
    state: StateVector,
    targets: Sequence[Label],
    rng: np.random.Generator,
) -> MeasurementResult:
    """Sample a projective measurement of the targets with Born probabilities.

    The collapsed state keeps every subsystem; measured ones are pinned to
    the sampled basis state.
    """
    state.require_normalized()
    positions, base, toff, probs = _probabilities(state, targets)
    cum = np.cumsum(probs)
    k = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    k = min(k, len(probs) - 1)
    p = float(probs[k])
    collapsed = _kernels.collapse(state.amplitudes, base, toff, k, 1.0 / np.sqrt(p))
    return MeasurementResult(
        _outcome_string(state, positions, k), p, StateVector(state.layout, collapsed)
    )


def force_outcome(state: StateVector, targets: Sequence[Label], outcome: str) -> MeasurementResult:
    """Collapse onto a chosen outcome instead of sampling it (test hook)."""
    state.require_normalized()
    positions, base, toff, probs = _probabilities(state, targets)
    k = 0
    for ch, p in zip(outcome, positions):
        if ch not in _ATOM_CHARS:
            raise LayoutError(f"unknown outcome character {ch!r}")
        k = k * state.layout.dims[p] + _ATOM_CHARS[ch]
    p_k = float(probs[k])
    if p_k <= 0.0:
        raise NormError(f"outcome {outcome!r} has zero probability")
    collapsed = _kernels.collapse(state.amplitudes, base, toff, k, 1.0 / np.sqrt(p_k))
    return MeasurementResult(outcome, p_k, StateVector(state.layout, collapsed))


def branch_enumerate(
    state: StateVector,
    targets: Sequence[Label],
    prob_floor: float = DEFAULT_PROB_FLOOR,
) -> list[Branch]:
    """All measurement branches of the targets with probability above the floor."""
    state.require_normalized()
    positions, base, toff, probs = _probabilities(state, targets)
    branches = []
    for k, p in enumerate(probs):
        if p <= prob_floor:
            continue
        collapsed = _kernels.collapse(state.amplitudes, base, toff, k, 1.0 / np.sqrt(p))
        branches.append(
            Branch(_outcome_string(state, positions, k), float(p), StateVector(state.layout, collapsed))
        )
    return branches


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2 for pure states on identical layouts (global-phase invariant)."""
    if a.layout != b.layout:
        raise LayoutError("fidelity requires identical layouts")
    a.require_normalized()
    b.require_normalized()
    ov = np.vdot(a.amplitudes, b.amplitudes)
    return float(min(1.0, ov.real**2 + ov.imag**2))


def partial_trace(state: StateVector, keep: Sequence[Label]) -> DensityMatrix:
    """Reduced density matrix over `keep`, ordered as given."""
    state.require_normalized()
    positions = _target_positions(state, keep)
    dims = state.layout.dims
    rest = [i for i in range(len(dims)) if i not in positions]
    psi = state.amplitudes.reshape(dims)
    psi = np.transpose(psi, list(positions) + rest)
    dk = 1
    for p in positions:
        dk *= dims[p]
    m = psi.reshape(dk, -1)
    rho = m @ m.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    sub = SubsystemLayout(tuple(state.layout.subsystems[p] for p in positions))
    return DensityMatrix(sub, rho)


def reduced_fidelity(rho: DensityMatrix, ref: StateVector) -> float:
    """<ref| rho |ref> against a pure reference on the same layout."""
    if rho.layout != ref.layout:
        raise LayoutError("reduced_fidelity requires identical layouts")
    ref.require_normalized()
    val = np.vdot(ref.amplitudes, rho.matrix @ ref.amplitudes).real
    return float(min(1.0, max(0.0, val)))


def substate(state: StateVector, keep: Sequence[Label], tol: float = 1e-10) -> StateVector:
    """Pure state of `keep` when it factorizes from the rest, e.g. after the
    complementary subsystems were measured (pinned to basis states).

    Raises LayoutError if the kept subsystems are entangled with the rest.
    """
    state.require_normalized()
    positions = _target_positions(state, keep)
    dims = state.layout.dims
    if len(positions) == len(dims):
        perm = np.transpose(
            state.amplitudes.reshape(dims), list(positions)
        ).reshape(-1)
        sub = SubsystemLayout(tuple(state.layout.subsystems[p] for p in positions))
        return StateVector(sub, perm)
    rest = [i for i in range(len(dims)) if i not in positions]
    psi = np.transpose(state.amplitudes.reshape(dims), list(positions) + rest)
    dk = 1
    for p in positions:
        dk *= dims[p]
    m = psi.reshape(dk, -1)
    col_norms = np.sum(m.real**2 + m.imag**2, axis=0)
    j = int(np.argmax(col_norms))
    u = m[:, j] / np.sqrt(col_norms[j])
    w = u.conj() @ m
    if np.max(np.abs(m - np.outer(u, w))) > tol:
        raise LayoutError("kept subsystems are entangled with the remainder")
    sub = SubsystemLayout(tuple(state.layout.subsystems[p] for p in positions))
    return StateVector(sub, u)


def relabeled(state: StateVector, mapping: dict) -> StateVector:
    """Same amplitudes with labels renamed through `mapping` (old -> new)."""
    new_subsystems = tuple(
        (mapping.get(lab, lab), d) for lab, d in state.layout.subsystems
    )
    return StateVector(SubsystemLayout(new_subsystems), state.amplitudes)
