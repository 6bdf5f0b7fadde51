"""Protocol orchestration: preparation, measurement cascade, classical
messages, corrections, and the n-controller generalization."""

import numpy as np
import pytest

from cavteleport import corrections as corr
from cavteleport import protocol as prot
from cavteleport import statevec as sv
from cavteleport.errors import ConfigError, CorrectionTableError, LayoutError, NormError

from .conftest import haar_state


class TestPreparation:
    def test_ground_input(self):
        state = prot.prepare_input(1, 0, 0, 0)
        assert state.amplitudes[0] == 1.0

    def test_equal_superposition_norm(self):
        state = prot.prepare_input(0.5, 0.5, 0.5, 0.5)
        assert state.norm_sq == pytest.approx(1.0, abs=1e-12)

    def test_haar_sampler_normalized(self, rng):
        for _ in range(25):
            inp = prot.InputState.random(rng)
            assert abs(sum(abs(z) ** 2 for z in inp.as_vector()) - 1) < 1e-12

    def test_unnormalized_rejected(self):
        with pytest.raises(NormError):
            prot.prepare_input(1, 0, 0, 0.1)

    def test_ghz_channel_amplitudes(self):
        state = prot.prepare_ghz_channel((3, 4, 5))
        assert state.amplitudes[0] == pytest.approx(1 / np.sqrt(2))
        assert state.amplitudes[7] == pytest.approx(1j / np.sqrt(2))
        assert state.norm_sq == pytest.approx(1.0, abs=1e-12)

    def test_ghz_channel_four_atoms(self):
        state = prot.prepare_ghz_channel((3, 4, 5, 6))
        assert state.amplitudes[0] == pytest.approx(1 / np.sqrt(2))
        assert state.amplitudes[15] == pytest.approx(1j / np.sqrt(2))
        assert np.count_nonzero(state.amplitudes) == 2

    def test_ghz_channel_needs_three(self):
        with pytest.raises(LayoutError):
            prot.prepare_ghz_channel((3, 4))

    def test_epr_channel_amplitudes(self):
        state = prot.prepare_epr_channel((6, 7))
        np.testing.assert_allclose(
            state.amplitudes, [0, 1 / np.sqrt(2), -1j / np.sqrt(2), 0], atol=1e-15
        )

    def test_epr_channel_overlap_with_symmetric_pair(self):
        state = prot.prepare_epr_channel((6, 7))
        sym = sv.StateVector(
            sv.SubsystemLayout.atoms((6, 7)), np.array([0, 1, 1, 0]) / np.sqrt(2)
        )
        assert sv.fidelity(state, sym) == pytest.approx(0.5, abs=1e-12)


class TestLayout:
    def test_single_controller_numbering(self):
        lay = prot.ProtocolLayout()
        assert lay.controller_atoms == (5,)
        assert lay.bob_atoms == (4, 7)
        assert lay.alice_atoms == (1, 2, 3, 6)
        assert lay.measurement_order == (1, 3, 2, 6)
        assert lay.cavity_pairs == ((1, 3), (2, 6))

    def test_three_controller_numbering(self):
        lay = prot.ProtocolLayout(n_controllers=3)
        assert lay.controller_atoms == (5, 6, 7)
        assert lay.bob_atoms == (4, 9)
        assert lay.measurement_order == (1, 3, 2, 8)
        assert lay.ghz_atoms == (3, 4, 5, 6, 7)

    def test_needs_a_controller(self):
        with pytest.raises(ConfigError):
            prot.ProtocolLayout(n_controllers=0)


class TestEnumeration:
    def test_default_layout_branches(self, rng):
        recs = prot.enumerate_all_branches(prot.InputState.random(rng))
        assert len(recs) == 32
        assert sum(r.probability for r in recs) == pytest.approx(1.0, abs=1e-12)
        for r in recs:
            assert r.probability == pytest.approx(1 / 32, abs=1e-12)
            assert r.fidelity >= 1 - 1e-10

    def test_alice_marginals_input_independent(self, rng):
        for _ in range(5):
            recs = prot.enumerate_all_branches(prot.InputState.random(rng))
            marginals = {}
            for r in recs:
                marginals[r.alice_outcome] = (
                    marginals.get(r.alice_outcome, 0.0) + r.probability
                )
            assert len(marginals) == 16
            for p in marginals.values():
                assert p == pytest.approx(1 / 16, abs=1e-12)

    def test_deterministic(self, rng):
        inp = prot.InputState.random(rng)
        a = prot.enumerate_all_branches(inp)
        b = prot.enumerate_all_branches(inp)
        for ra, rb in zip(a, b):
            assert ra.alice_outcome == rb.alice_outcome
            assert ra.probability == rb.probability
            np.testing.assert_array_equal(
                ra.corrected_state.amplitudes, rb.corrected_state.amplitudes
            )

    def test_sorted_by_outcome(self, rng):
        recs = prot.enumerate_all_branches(prot.InputState.random(rng))
        keys = [(r.alice_outcome, r.controller_outcomes) for r in recs]
        assert keys == sorted(keys)

    def test_entanglement_preserved(self):
        inp = prot.InputState(1 / np.sqrt(2), 0, 0, 1 / np.sqrt(2))
        bell = sv.StateVector(
            sv.SubsystemLayout.atoms((4, 7)), np.array([1, 0, 0, 1]) / np.sqrt(2)
        )
        for r in prot.enumerate_all_branches(inp):
            assert sv.fidelity(r.corrected_state, bell) >= 1 - 1e-10

    def test_two_controllers(self, rng):
        lay = prot.ProtocolLayout(n_controllers=2)
        recs = prot.enumerate_all_branches(prot.InputState.random(rng), lay)
        assert len(recs) == 64
        assert all(r.fidelity >= 1 - 1e-10 for r in recs)
        assert all(r.probability == pytest.approx(1 / 64, abs=1e-12) for r in recs)

    def test_missing_rule_raises(self, rng):
        table = corr.load_published_table(validate=False)
        partial = corr.CorrectionTable(
            {k: v for k, v in table.rules.items() if k != ("eeee", "e")},
            provenance="truncated",
        )
        with pytest.raises(CorrectionTableError):
            prot.enumerate_all_branches(prot.InputState.random(rng), table=partial)


class TestRun:
    def test_ground_input_any_seed(self):
        for seed in (0, 1, 2, 3):
            res = prot.run_teleportation(
                prot.InputState(1, 0, 0, 0), rng=np.random.default_rng(seed)
            )
            assert res.record.fidelity >= 1 - 1e-10

    def test_forced_eeee_conditional_matches_printed_state(self, rng):
        inp = prot.InputState.random(rng)
        res = prot.run_teleportation(inp, rng=rng, force_alice="eeee")
        amps = np.zeros(8, dtype=complex)
        amps[1], amps[0], amps[7], amps[6] = -inp.a, -inp.b, inp.c, inp.d
        ref = sv.StateVector(sv.SubsystemLayout.atoms((4, 5, 7)), amps)
        assert sv.fidelity(res.record.conditional_state, ref) >= 1 - 1e-10

    def test_forced_charlie_e_rule_and_recovery(self, rng):
        inp = prot.InputState.random(rng)
        res = prot.run_teleportation(
            inp, rng=rng, force_alice="eeee", force_controllers="e"
        )
        assert (res.record.correction.op4, res.record.correction.op7) == ("I", "sx")
        assert res.record.fidelity >= 1 - 1e-10

    def test_forced_charlie_g_rule_and_recovery(self, rng):
        inp = prot.InputState.random(rng)
        res = prot.run_teleportation(
            inp, rng=rng, force_alice="eeee", force_controllers="g"
        )
        assert (res.record.correction.op4, res.record.correction.op7) == ("sz", "sx")
        assert res.record.fidelity >= 1 - 1e-10

    def test_branch_probability_recorded(self, rng):
        res = prot.run_teleportation(
            prot.InputState.random(rng), rng=rng, force_alice="gege", force_controllers="g"
        )
        assert res.record.probability == pytest.approx(1 / 32, abs=1e-12)

    def test_messages_determine_correction(self, rng):
        inp = prot.InputState.random(rng)
        lay = prot.ProtocolLayout()
        res = prot.run_teleportation(inp, lay, rng)
        table = prot.default_table(lay)
        rule = prot.correction_from_messages(res.messages, table)
        assert rule == res.record.correction
        # replaying the same forced branch reproduces the corrected state
        # bit for bit
        replay = prot.run_teleportation(
            inp,
            lay,
            np.random.default_rng(0),
            force_alice=res.record.alice_outcome,
            force_controllers=res.record.controller_outcomes,
        )
        np.testing.assert_array_equal(
            replay.record.corrected_state.amplitudes,
            res.record.corrected_state.amplitudes,
        )

    def test_message_log_contents(self, rng):
        res = prot.run_teleportation(prot.InputState.random(rng), rng=rng)
        assert [m.sender for m in res.messages] == ["alice", "controller-1"]
        assert [m.index for m in res.messages] == [0, 1]
        assert len(res.messages[0].payload) == 4

    def test_empirical_frequencies_match_enumeration(self):
        # same protocol sampled many times: outcome frequencies near 1/16
        inp = prot.InputState(0.5, 0.5, 0.5, 0.5)
        rng = np.random.default_rng(77)
        counts = {}
        n = 1600
        for _ in range(n):
            rec = prot.run_teleportation(inp, rng=rng).record
            counts[rec.alice_outcome] = counts.get(rec.alice_outcome, 0) + 1
        assert len(counts) == 16
        sigma = np.sqrt(n * (1 / 16) * (15 / 16))
        for c in counts.values():
            assert abs(c - n / 16) < 5 * sigma

    def test_force_controllers_length_checked(self, rng):
        with pytest.raises(ConfigError):
            prot.run_teleportation(
                prot.InputState.random(rng), rng=rng, force_controllers="ee"
            )


class TestCharlieStep:
    def test_even_split_on_correlated_state(self, rng):
        inp = prot.InputState.random(rng)
        res = prot.run_teleportation(inp, rng=rng, force_alice="eeee")
        # rebuild the post-Alice state over (4,5,7) and branch the controller
        branches = prot.charlie_step(res.record.conditional_state, 5)
        assert len(branches) == 2
        for br in branches:
            assert br.probability == pytest.approx(0.5, abs=1e-12)

    def test_e_branch_state(self, rng):
        inp = prot.InputState.random(rng)
        res = prot.run_teleportation(inp, rng=rng, force_alice="eeee")
        branches = {b.outcome: b for b in prot.charlie_step(res.record.conditional_state, 5)}
        got = sv.substate(branches["e"].state, (4, 7))
        ref = sv.StateVector(
            sv.SubsystemLayout.atoms((4, 7)),
            np.array([inp.b, inp.a, inp.d, inp.c]),
        )
        assert sv.fidelity(got, ref) >= 1 - 1e-10

    def test_uncorrelated_controller_splits_evenly(self):
        state = sv.atom_state((5,), "g")
        branches = prot.charlie_step(state, 5)
        assert [b.probability for b in branches] == pytest.approx([0.5, 0.5])
