import csv
import io
import math

import numpy as np
import pytest

from oamnet import protocols
from oamnet.fabric import NetworkSpec, build
from oamnet.protocols import (
    BB84Config,
    ProtocolError,
    active_distribute,
    bb84_run,
    bbm92_run,
    closed_form_passive_state,
    coincidences,
    pair_label,
    passive_distribute_state,
    receiver_statistics,
)
from oamnet.state import fidelity, joint_distribution, project

EPS = 2 * math.pi / 15


def sigma_bound(n):
    return 4 * math.sqrt(0.25 / n)


class TestBB84:
    def test_ideal_point_to_point(self):
        rep = bb84_run(BB84Config(NetworkSpec("point-to-point", {"d": 3}), 1, 1))
        assert rep.qber == 0.0
        assert abs(rep.sift_fraction - 0.5) <= 0.02
        assert rep.detection_efficiency == 1.0
        assert len(rep.sifted_alice) == len(rep.sifted_bob)

    def test_general_label(self):
        spec = NetworkSpec("p2mp-general", {"d_s": 2, "d_r": 3})
        assert pair_label(build(spec), 0, 1) == 2
        assert bb84_run(BB84Config(spec, 0, 1, bits=100)).label == 2

    def test_coprime_label(self):
        spec = NetworkSpec("p2mp-coprime", {"d_s": 2, "d_r": 3})
        p, q, _ = (-1, 1, 1)
        for s in range(2):
            for r in range(3):
                assert pair_label(build(spec), s, r) == (s * q * 3 + r * p * 2) % 6

    @pytest.mark.parametrize("spec,sender,receiver", [
        (NetworkSpec("p2mp-multigroup", {"d_s": 2, "d_r": 4}), 1, (1, 0)),
        (NetworkSpec("p2mp-multigroup-variant", {"d_s": 2, "d_r": 3}), 0, (1, 2)),
        (NetworkSpec("fully-connected", {"n": 5}), 3, 1),
        (NetworkSpec("ent-active", {"d": 4}), 1, 3),
    ])
    def test_ideal_architectures(self, spec, sender, receiver):
        rep = bb84_run(BB84Config(spec, sender, receiver, bits=4000))
        assert rep.qber == 0.0
        assert abs(rep.sift_fraction - 0.5) <= sigma_bound(4000)

    def test_reproducible(self):
        cfg = BB84Config(NetworkSpec("point-to-point", {"d": 2}), 0, 0, bits=500, bit_seed=3, basis_seed=9)
        assert bb84_run(cfg).to_csv() == bb84_run(cfg).to_csv()
        other = BB84Config(cfg.spec, 0, 0, bits=500, bit_seed=3, basis_seed=10)
        assert bb84_run(other).to_csv() != bb84_run(cfg).to_csv()

    def test_csv(self):
        rep = bb84_run(BB84Config(NetworkSpec("point-to-point", {"d": 2}), 0, 0, bits=10))
        header, body = rep.to_csv().split("\n", 1)
        assert header == "# oamnet-csv v1 key label=0"
        rows = list(csv.DictReader(io.StringIO(body)))
        assert len(rows) == 10 and set(rows[0]) == {
            "round", "alice_bit", "alice_basis", "bob_basis", "bob_result", "sifted"}

    def test_receiver_statistics_ideal(self):
        p = build(NetworkSpec("point-to-point", {"d": 2}))
        stats = receiver_statistics(p, 0, 0, 0)
        np.testing.assert_allclose(stats[0, 0], [1, 0], atol=1e-12)  # H in Z
        np.testing.assert_allclose(stats[3, 1], [0, 1], atol=1e-12)  # minus in X
        np.testing.assert_allclose(stats[0, 1], [0.5, 0.5], atol=1e-12)

    def test_noisy_losses(self):
        spec = NetworkSpec("point-to-point", {"d": 3}, {"demux": (0, 0, EPS)})
        rep = bb84_run(BB84Config(spec, 2, 2, bits=5000))
        # misrouting loses photons but does not flip polarization
        assert rep.qber == 0.0
        assert rep.detection_efficiency == pytest.approx(0.9616, abs=0.01)
        assert (rep.bob_results == -1).any()

    @pytest.mark.parametrize("sender,receiver", [(0, 5), (9, 0)])
    def test_invalid_pair(self, sender, receiver):
        with pytest.raises(ProtocolError):
            bb84_run(BB84Config(NetworkSpec("p2mp-general", {"d_s": 2, "d_r": 3}), sender, receiver))

    def test_zero_bits(self):
        with pytest.raises(ProtocolError):
            bb84_run(BB84Config(NetworkSpec("point-to-point", {"d": 2}), 0, 0, bits=0))

    def test_passive_rejected(self):
        with pytest.raises(ProtocolError):
            bb84_run(BB84Config(NetworkSpec("ent-passive", {"d": 2}), 0, 0))

    def test_qber_without_sifted_rounds(self):
        rep = protocols.KeyReport(np.array([0]), np.array([0]), np.array([1]), np.array([0]))
        assert math.isnan(rep.qber)


class TestActive:
    def test_pair_0_2(self):
        res = active_distribute(NetworkSpec("ent-active", {"d": 3}), (0, 2))
        assert res.arrival_probability == pytest.approx(1.0, abs=1e-12)
        assert res.bell_fidelity == pytest.approx(1.0, abs=1e-12)
        assert res.labels == (0, 5)

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_all_pairs(self, d):
        spec = NetworkSpec("ent-active", {"d": d})
        for a in range(d):
            for b in range(d):
                if a == b:
                    continue
                res = active_distribute(spec, (a, b))
                assert res.bell_fidelity == pytest.approx(1.0, abs=1e-12)
                for marg in res.polarization_marginals:
                    np.testing.assert_allclose(marg, [0.5, 0.5], atol=1e-12)

    def test_bbm92_on_pair(self):
        spec = NetworkSpec("ent-active", {"d": 3})
        res = active_distribute(spec, (0, 2))
        ports = {rx: p for p, rx in build(spec).outputs.items()}
        key = bbm92_run(res.state, 1000, 0, {("path", 0): ports[0], ("path", 1): ports[2]})
        assert key.qber == 0.0
        assert np.array_equal(key.sifted_alice, key.sifted_bob)
        assert abs(key.sift_fraction - 0.5) <= sigma_bound(1000)

    @pytest.mark.parametrize("pair", [(1, 1), (0, 3), (-1, 0)])
    def test_invalid(self, pair):
        with pytest.raises(ProtocolError):
            active_distribute(NetworkSpec("ent-active", {"d": 3}), pair)

    def test_wrong_architecture(self):
        with pytest.raises(ProtocolError):
            active_distribute(NetworkSpec("p2mp-general", {"d_s": 2, "d_r": 3}), (0, 1))


class TestPassive:
    @pytest.mark.parametrize("d", range(2, 7))
    @pytest.mark.parametrize("pol", [False, True])
    def test_matches_closed_form(self, d, pol):
        state = passive_distribute_state(d, polarization=pol)
        assert fidelity(state, closed_form_passive_state(d, pol)) >= 1 - 1e-10

    def test_d2_amplitudes(self):
        amps = passive_distribute_state(2).amplitudes
        nz = np.abs(amps[np.abs(amps) > 1e-12]) ** 2
        assert len(nz) == 4
        np.testing.assert_allclose(nz, 0.25, atol=1e-12)

    @pytest.mark.parametrize("d", range(2, 7))
    def test_oam_follows_path(self, d):
        state = passive_distribute_state(d)
        for i in range(d):
            for j in range(d):
                prob, post = project(state, {("path", 0): i, ("path", 1): j})
                assert prob == pytest.approx(1 / d ** 2, abs=1e-12)
                oam = joint_distribution(post, [("oam", 0), ("oam", 1)])
                assert oam[i, (j - 1) % d] == pytest.approx(1.0, abs=1e-12)

    def test_d_too_small(self):
        with pytest.raises(ProtocolError):
            passive_distribute_state(1)

    def test_noisy_state_differs(self):
        state = passive_distribute_state(3, noise={"final": (0, 0, EPS)})
        assert fidelity(state, closed_form_passive_state(3)) < 1


class TestCoincidences:
    def test_d2(self):
        hist = coincidences(passive_distribute_state(2), samples=200, seed=1)
        assert all(p == pytest.approx(0.25, abs=1e-12) for p in hist.probabilities.values())
        assert hist.distinct_fraction == pytest.approx(0.5, abs=1e-12)
        assert hist.same_port_fraction == pytest.approx(0.5, abs=1e-12)

    def test_d3(self):
        hist = coincidences(passive_distribute_state(3), samples=0)
        assert len(hist.probabilities) == 9
        assert all(p == pytest.approx(1 / 9, abs=1e-12) for p in hist.probabilities.values())
        assert math.isnan(hist.sampled_distinct_fraction)

    def test_seeded(self):
        state = passive_distribute_state(3, polarization=True)
        a, b = coincidences(state, 300, 7), coincidences(state, 300, 7)
        assert a.samples == b.samples and a.to_csv() == b.to_csv()
        assert coincidences(state, 300, 8).samples != a.samples

    def test_post_selection(self):
        hist = coincidences(passive_distribute_state(3), samples=1000, seed=0)
        assert all(i != j for i, j in hist.post_selected)
        assert sum(hist.user_pairs().values()) == len(hist.post_selected)
        assert set(hist.user_pairs()) <= {(0, 1), (0, 2), (1, 2)}

    def test_csv(self):
        hist = coincidences(passive_distribute_state(2), samples=10, seed=0)
        header, body = hist.to_csv().split("\n", 1)
        assert header == "# oamnet-csv v1 coincidences seed=0 samples=10"
        rows = list(csv.DictReader(io.StringIO(body)))
        assert len(rows) == 4 and sum(int(r["sampled_count"]) for r in rows) == 10

    def test_single_photon_rejected(self):
        from oamnet.fabric import initial_state
        p = build(NetworkSpec("point-to-point", {"d": 2}))
        with pytest.raises(ProtocolError):
            coincidences(initial_state(p, 0, 0), 10)


class TestBBM92:
    def test_passive_after_post_selection(self):
        state = passive_distribute_state(3, polarization=True)
        key = bbm92_run(state, 2000, 3, {("path", 0): 0, ("path", 1): 2})
        assert key.qber == 0.0
        assert abs(key.sift_fraction - 0.5) <= sigma_bound(2000)

    def test_impossible_condition(self):
        state = passive_distribute_state(2, polarization=True)
        lost = project(state, {("path", 0): 0})[1]
        with pytest.raises(ProtocolError):
            bbm92_run(lost, 10, 0, {("path", 0): 1})

    def test_rounds(self):
        with pytest.raises(ProtocolError):
            bbm92_run(passive_distribute_state(2, polarization=True), 0)
