"""The controlled teleportation protocol, end to end.

Roles: Alice holds the two input atoms (1, 2) plus one atom of each
channel; Bob holds one atom of the multi-atom channel and one of the pair
channel; every controller holds one channel atom of its own.  Alice runs
both atom pairs through driven cavities, measures her four atoms in the
bare g/e basis, and broadcasts the result.  Each controller applies a
Hadamard to its atom, measures, and broadcasts.  Bob then applies the
correction pair indexed by the complete classical record, which restores
the input state on his two atoms with certainty.

With one controller the atoms are numbered 1..7 as usual: controllers sit
at 5, the pair channel at (6, 7).  For n controllers the channel atoms
renumber consistently: controllers occupy 5..4+n and the pair channel
moves to (5+n, 6+n).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import corrections as corr
from . import statevec as sv
from .dynamics import DEFAULT_SCHEDULE, InteractionSchedule, two_cavity_step
from .errors import ConfigError, LayoutError, NormError
from .statevec import StateVector

NORM_TOL = 1e-12


@dataclass(frozen=True)
class InputState:
    """Coefficients of the two-atom state to teleport: a|gg> + b|ge> + c|eg> + d|ee>."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        n = abs(self.a) ** 2 + abs(self.b) ** 2 + abs(self.c) ** 2 + abs(self.d) ** 2
        if abs(n - 1.0) > NORM_TOL:
            raise NormError(f"input coefficients have squared norm {n}, not 1")

    @classmethod
    def random(cls, rng: np.random.Generator) -> "InputState":
        """Haar-random coefficient vector."""
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        v = v / np.linalg.norm(v)
        return cls(*v)

    def as_vector(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d], dtype=complex)

    def as_statevector(self, labels: Sequence = (1, 2)) -> StateVector:
        return StateVector(sv.SubsystemLayout.atoms(labels), self.as_vector())


@dataclass(frozen=True)
class ProtocolLayout:
    """Atom numbering and interaction schedule for n >= 1 controllers."""

    n_controllers: int = 1
    schedule: InteractionSchedule = DEFAULT_SCHEDULE

    def __post_init__(self):
        if self.n_controllers < 1:
            raise ConfigError("at least one controller is required")

    @property
    def input_atoms(self) -> tuple:
        return (1, 2)

    @property
    def controller_atoms(self) -> tuple:
        return tuple(range(5, 5 + self.n_controllers))

    @property
    def epr_alice_atom(self) -> int:
        return 5 + self.n_controllers

    @property
    def epr_bob_atom(self) -> int:
        return 6 + self.n_controllers

    @property
    def ghz_atoms(self) -> tuple:
        return (3, 4) + self.controller_atoms

    @property
    def alice_atoms(self) -> tuple:
        return (1, 2, 3, self.epr_alice_atom)

    @property
    def bob_atoms(self) -> tuple:
        return (4, self.epr_bob_atom)

    @property
    def measurement_order(self) -> tuple:
        """Alice's outcome-string order: input atom, its cavity partner, twice."""
        return (1, 3, 2, self.epr_alice_atom)

    @property
    def conditional_order(self) -> tuple:
        return (4,) + self.controller_atoms + (self.epr_bob_atom,)

    @property
    def cavity_pairs(self) -> tuple:
        return ((1, 3), (2, self.epr_alice_atom))


@dataclass(frozen=True)
class ClassicalMessage:
    """One broadcast measurement record."""

    sender: str
    payload: str
    index: int


@dataclass(frozen=True)
class BranchRecord:
    """One fully resolved measurement branch of the protocol."""

    alice_outcome: str
    controller_outcomes: str
    probability: float
    conditional_state: StateVector
    corrected_state: StateVector
    fidelity: float
    correction: corr.CorrectionRule


class PreBranch(NamedTuple):
    alice_outcome: str
    controller_outcomes: str
    probability: float
    conditional_state: StateVector
    bob_state: StateVector


class TeleportationResult(NamedTuple):
    record: BranchRecord
    messages: tuple[ClassicalMessage, ...]


# ---------------------------------------------------------------------------
# state preparation
# ---------------------------------------------------------------------------

def prepare_input(a, b, c, d, labels: Sequence = (1, 2)) -> StateVector:
    """The state to teleport, over Alice's two input atoms."""
    return InputState(a, b, c, d).as_statevector(labels)


def prepare_ghz_channel(labels: Sequence) -> StateVector:
    """(|g...g> + i|e...e>) / sqrt(2) over three or more atoms."""
    labels = tuple(labels)
    if len(labels) < 3:
        raise LayoutError("the multi-atom channel needs at least three atoms")
    layout = sv.SubsystemLayout.atoms(labels)
    amps = np.zeros(layout.dim, dtype=complex)
    amps[0] = 1 / np.sqrt(2)
    amps[-1] = 1j / np.sqrt(2)
    return StateVector(layout, amps)


def prepare_epr_channel(labels: Sequence) -> StateVector:
    """(|ge> - i|eg>) / sqrt(2) over the pair channel."""
    labels = tuple(labels)
    if len(labels) != 2:
        raise LayoutError("the pair channel covers exactly two atoms")
    layout = sv.SubsystemLayout.atoms(labels)
    amps = np.array([0, 1, -1j, 0], dtype=complex) / np.sqrt(2)
    return StateVector(layout, amps)


def initial_system_state(input_state: InputState, layout: ProtocolLayout) -> StateVector:
    """Input (x) multi-atom channel (x) pair channel, atoms in ascending order."""
    return sv.tensor(
        [
            input_state.as_statevector(layout.input_atoms),
            prepare_ghz_channel(layout.ghz_atoms),
            prepare_epr_channel((layout.epr_alice_atom, layout.epr_bob_atom)),
        ]
    )


def target_state(input_state: InputState, layout: ProtocolLayout) -> StateVector:
    """The input coefficients relocated onto Bob's atoms (1 -> 4, 2 -> 7)."""
    return input_state.as_statevector(layout.bob_atoms)


# ---------------------------------------------------------------------------
# protocol steps
# ---------------------------------------------------------------------------

def charlie_step(state: StateVector, controller_label) -> list[sv.Branch]:
    """Hadamard on one controller atom, then both measurement sub-branches."""
    rotated = sv.apply(state, sv.single_atom_op(controller_label, sv.HADAMARD))
    return sv.branch_enumerate(rotated, [controller_label])


def pre_correction_branches(
    input_state: InputState, layout: ProtocolLayout
) -> list[PreBranch]:
    """Every (Alice, controllers) branch before Bob's correction.

    `conditional_state` is the post-Alice state over Bob's and the
    still-unmeasured controllers' atoms; `bob_state` is the receiver pair
    after all controllers have measured.
    """
    psi = two_cavity_step(
        initial_system_state(input_state, layout), layout.cavity_pairs, layout.schedule
    )
    out = []
    for alice in sv.branch_enumerate(psi, layout.measurement_order):
        conditional = sv.substate(alice.state, layout.conditional_order)
        leaves = [("", 1.0, alice.state)]
        for c in layout.controller_atoms:
            leaves = [
                (outcomes + br.outcome, p * br.probability, br.state)
                for outcomes, p, state in leaves
                for br in charlie_step(state, c)
            ]
        for outcomes, p, state in leaves:
            out.append(
                PreBranch(
                    alice.outcome,
                    outcomes,
                    alice.probability * p,
                    conditional,
                    sv.substate(state, layout.bob_atoms),
                )
            )
    return out


_TABLE_CACHE: dict[tuple, corr.CorrectionTable] = {}


def default_table(layout: ProtocolLayout) -> corr.CorrectionTable:
    """Published table for one controller, search-derived beyond that."""
    key = (layout.n_controllers, layout.schedule)
    if key not in _TABLE_CACHE:
        if layout.n_controllers == 1 and layout.schedule == DEFAULT_SCHEDULE:
            _TABLE_CACHE[key] = corr.load_published_table()
        else:
            _TABLE_CACHE[key] = corr.derive_table(layout)
    return _TABLE_CACHE[key]


def correction_from_messages(
    messages: Sequence[ClassicalMessage], table: corr.CorrectionTable
) -> corr.CorrectionRule:
    """Bob's rule as a pure function of the broadcast record."""
    ordered = sorted(messages, key=lambda m: m.index)
    alice = [m for m in ordered if m.sender == "alice"]
    controllers = [m for m in ordered if m.sender.startswith("controller")]
    if len(alice) != 1:
        raise ConfigError("expected exactly one message from alice")
    return table.lookup(alice[0].payload, "".join(m.payload for m in controllers))


def enumerate_all_branches(
    input_state: InputState,
    layout: ProtocolLayout | None = None,
    table: corr.CorrectionTable | None = None,
) -> list[BranchRecord]:
    """All 16 * 2^n branches with exact probabilities and corrected fidelities."""
    layout = layout or ProtocolLayout()
    table = table or default_table(layout)
    tgt = target_state(input_state, layout)
    records = []
    for br in pre_correction_branches(input_state, layout):
        rule = table.lookup(br.alice_outcome, br.controller_outcomes)
        corrected = corr.apply_correction(br.bob_state, rule)
        records.append(
            BranchRecord(
                br.alice_outcome,
                br.controller_outcomes,
                br.probability,
                br.conditional_state,
                corrected,
                sv.fidelity(corrected, tgt),
                rule,
            )
        )
    records.sort(key=lambda r: (r.alice_outcome, r.controller_outcomes))
    return records


def run_teleportation(
    input_state: InputState,
    layout: ProtocolLayout | None = None,
    rng: np.random.Generator | None = None,
    table: corr.CorrectionTable | None = None,
    force_alice: str | None = None,
    force_controllers: str | None = None,
) -> TeleportationResult:
    """Sample one full protocol run, returning the branch record and the
    classical message log that determined Bob's correction.

    `force_alice` / `force_controllers` pin measurement outcomes instead of
    sampling them (the recorded probability is still the branch's own).
    """
    layout = layout or ProtocolLayout()
    table = table or default_table(layout)
    if rng is None:
        rng = np.random.default_rng()
    if force_controllers is not None and len(force_controllers) != layout.n_controllers:
        raise ConfigError(
            f"force_controllers needs {layout.n_controllers} characters, "
            f"got {force_controllers!r}"
        )

    psi = two_cavity_step(
        initial_system_state(input_state, layout), layout.cavity_pairs, layout.schedule
    )
    if force_alice is None:
        alice = sv.measure(psi, layout.measurement_order, rng)
    else:
        alice = sv.force_outcome(psi, layout.measurement_order, force_alice)
    messages = [ClassicalMessage("alice", alice.outcome, 0)]
    conditional = sv.substate(alice.state, layout.conditional_order)

    state, probability = alice.state, alice.probability
    for i, c in enumerate(layout.controller_atoms):
        rotated = sv.apply(state, sv.single_atom_op(c, sv.HADAMARD))
        if force_controllers is None:
            step = sv.measure(rotated, [c], rng)
        else:
            step = sv.force_outcome(rotated, [c], force_controllers[i])
        messages.append(ClassicalMessage(f"controller-{i + 1}", step.outcome, i + 1))
        state, probability = step.state, probability * step.probability

    rule = correction_from_messages(messages, table)
    corrected = corr.apply_correction(sv.substate(state, layout.bob_atoms), rule)
    record = BranchRecord(
        alice.outcome,
        "".join(m.payload for m in messages[1:]),
        probability,
        conditional,
        corrected,
        sv.fidelity(corrected, target_state(input_state, layout)),
        rule,
    )
    return TeleportationResult(record, tuple(messages))
