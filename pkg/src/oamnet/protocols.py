"""QKD and entanglement-distribution runs over built networks."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import planner
from .elements import ElementUnitary
from .fabric import NetworkSpec, Pipeline, build, initial_state
from .state import (
    CompositeState,
    SubsystemLayout,
    apply_local,
    fidelity,
    joint_distribution,
    make_basis_state,
    project,
    reduced_density_matrix,
    superpose,
)

SQ2 = np.sqrt(0.5)
# BB84 payloads indexed by 2*basis + bit; basis 0 = H/V, 1 = D/A
PAYLOADS = np.array([[1, 0], [0, 1], [SQ2, SQ2], [SQ2, -SQ2]], dtype=complex)
# half-wave plate at 22.5 deg: D -> H, A -> V
HWP = ElementUnitary(np.array([[1, 1], [1, -1]]) * SQ2, ("pol",), (2,), "HWP(22.5)")
BELL = np.array([1, 0, 0, 1], dtype=complex) * SQ2


class ProtocolError(ValueError):
    pass


def _streams(bit_seed: int, basis_seed: int):
    bits = np.random.default_rng(bit_seed)
    alice_basis, bob_basis = (np.random.default_rng(s)
                              for s in np.random.SeedSequence(basis_seed).spawn(2))
    meas = np.random.default_rng([bit_seed, basis_seed])
    return bits, alice_basis, bob_basis, meas


@dataclass
class KeyReport:
    """Per-round record of one QKD run.

    ``bob_results`` is -1 where the receiver saw no photon (misrouted).
    QBER is computed over sifted rounds only.
    """

    alice_bits: np.ndarray
    alice_bases: np.ndarray
    bob_bases: np.ndarray
    bob_results: np.ndarray
    label: object = None

    @property
    def bits(self) -> int:
        return len(self.alice_bits)

    @property
    def detected(self) -> np.ndarray:
        return self.bob_results >= 0

    @property
    def sift_mask(self) -> np.ndarray:
        return self.detected & (self.alice_bases == self.bob_bases)

    @property
    def sifted_alice(self) -> np.ndarray:
        return self.alice_bits[self.sift_mask]

    @property
    def sifted_bob(self) -> np.ndarray:
        return self.bob_results[self.sift_mask]

    @property
    def qber(self) -> float:
        n = int(self.sift_mask.sum())
        if n == 0:
            return float("nan")
        return float(np.count_nonzero(self.sifted_alice != self.sifted_bob)) / n

    @property
    def sift_fraction(self) -> float:
        return float(self.sift_mask.sum()) / self.bits

    @property
    def detection_efficiency(self) -> float:
        return float(self.detected.sum()) / self.bits

    def summary(self) -> str:
        return (f"bits={self.bits} sifted={int(self.sift_mask.sum())} "
                f"sift_fraction={self.sift_fraction:.4f} QBER={self.qber:.4f} "
                f"detection={self.detection_efficiency:.4f}")

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# oamnet-csv v1 key label={self.label}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["round", "alice_bit", "alice_basis", "bob_basis", "bob_result", "sifted"])
        sift = self.sift_mask
        for i in range(self.bits):
            w.writerow([i, int(self.alice_bits[i]), "ZX"[self.alice_bases[i]],
                        "ZX"[self.bob_bases[i]], int(self.bob_results[i]), int(sift[i])])
        return buf.getvalue()


@dataclass
class BB84Config:
    spec: NetworkSpec
    sender: object
    receiver: object
    bits: int = 10_000
    bit_seed: int = 0
    basis_seed: int = 1


def pair_label(pipeline: Pipeline, sender, receiver) -> int:
    for (s, g, r), l in pipeline.table.entries.items():
        if s == sender and (r if g is None else (g, r)) == receiver:
            return l
    raise ProtocolError(f"no route from sender {sender!r} to receiver {receiver!r}")


def receiver_statistics(pipeline: Pipeline, sender, label: int, receiver) -> np.ndarray:
    """P(detector 0), P(detector 1) at ``receiver`` for each payload and basis.

    Shape (4 payloads, 2 receiver bases, 2 outcomes); the shortfall from 1
    is the probability that the photon went elsewhere.
    """
    ports = [p for p, rx in pipeline.outputs.items() if rx == receiver]
    if not ports:
        raise ProtocolError(f"receiver {receiver!r} not attached to the network")
    out = np.zeros((4, 2, 2))
    for k, payload in enumerate(PAYLOADS):
        final = pipeline.run(initial_state(pipeline, sender, label, payload))
        for basis in (0, 1):
            st = apply_local(final, HWP, ["pol"]) if basis else final
            out[k, basis] = joint_distribution(st, ["path", "pol"])[ports[0]]
    return out


def bb84_run(config: BB84Config) -> KeyReport:
    """Prepare-and-measure BB84 in polarization over the network.

    The sender picks a bit and basis per round and uses the planner's OAM
    label for the pair. The receiver's 50/50 beamsplitter picks a basis; the
    diagonal arm holds a half-wave plate ahead of its PBS.
    """
    if config.bits < 1:
        raise ProtocolError("bit count must be >= 1")
    pipeline = build(config.spec)
    if pipeline.photons != 1:
        raise ProtocolError(f"BB84 needs a prepare-and-measure network, not {config.spec.architecture}")
    if config.sender not in pipeline.inputs:
        raise ProtocolError(f"unknown sender {config.sender!r}")
    label = pair_label(pipeline, config.sender, config.receiver)
    stats = receiver_statistics(pipeline, config.sender, label, config.receiver)

    rng_bits, rng_a, rng_b, rng_m = _streams(config.bit_seed, config.basis_seed)
    n = config.bits
    bits = rng_bits.integers(0, 2, n)
    a_bases = rng_a.integers(0, 2, n)
    b_bases = rng_b.integers(0, 2, n)
    u = rng_m.random(n)
    p = stats[2 * a_bases + bits, b_bases]
    results = np.where(u < p[:, 0], 0, np.where(u < p[:, 0] + p[:, 1], 1, -1))
    return KeyReport(bits, a_bases, b_bases, results, label)


# -- entanglement ------------------------------------------------------------

@dataclass
class DistributionResult:
    state: CompositeState
    ports: tuple
    labels: tuple
    arrival_probability: float
    bell_fidelity: float
    polarization_marginals: tuple = field(default=())


def _bell_fidelity(rho: np.ndarray) -> float:
    return float(np.real(BELL.conj() @ rho @ BELL))


def active_distribute(spec: NetworkSpec, pair: tuple[int, int]) -> DistributionResult:
    """Route a polarization Bell pair to nodes ``pair`` through a general network.

    The source sits on sender ports 0 and 1; photon 1 takes label ``2a`` and
    photon 2 label ``1 + 2b``.
    """
    if spec.architecture != "ent-active":
        raise ProtocolError(f"active distribution runs on ent-active networks, not {spec.architecture}")
    a, b = pair
    d = spec.dims["d"]
    if not (0 <= a < d and 0 <= b < d):
        raise ProtocolError(f"nodes {pair} outside [0, {d})")
    if a == b:
        raise ProtocolError("both photons would leave on the same port")
    pipeline = build(spec)
    layout = pipeline.layout(2)
    labels = (planner.oam_group(0, a, 2), planner.oam_group(1, b, 2))
    terms = []
    for pol in (0, 1):
        addr = (pol, labels[0], pipeline.inputs[0], pol, labels[1], pipeline.inputs[1])
        terms.append((SQ2, make_basis_state(layout, addr)))
    final = pipeline.run(superpose(terms), (0, 1))
    port = {rx: p for p, rx in pipeline.outputs.items()}
    prob, post = project(final, {("path", 0): port[a], ("path", 1): port[b]})
    if post is None:
        return DistributionResult(final, pair, labels, 0.0, 0.0)
    rho = reduced_density_matrix(post, [("pol", 0), ("pol", 1)])
    marg = tuple(tuple(np.real(np.diag(reduced_density_matrix(post, [("pol", k)]))))
                 for k in (0, 1))
    return DistributionResult(final, pair, labels, prob, _bell_fidelity(rho), marg)


def _passive_layout(d: int, polarization: bool) -> SubsystemLayout:
    factors = ((("pol", 2),) if polarization else ()) + (("oam", d), ("path", d))
    return SubsystemLayout(factors, 2)


def closed_form_passive_state(d: int, polarization: bool = False) -> CompositeState:
    """(1/d) sum_ij |i, j-1>_oam |i, j>_path, optionally with a Bell pair in polarization."""
    layout = _passive_layout(d, polarization)
    amps = np.zeros(layout.dims, dtype=complex)
    for i in range(d):
        for j in range(d):
            if polarization:
                for pol in (0, 1):
                    amps[pol, i, i, pol, (j - 1) % d, j] = SQ2 / d
            else:
                amps[i, i, (j - 1) % d, j] = 1.0 / d
    return CompositeState(layout, amps.reshape(-1))


def passive_distribute_state(d: int, polarization: bool = False,
                             noise=None) -> CompositeState:
    """Simulate the passive entanglement-distribution network from |0,0>_oam |0,0>_path.

    In the noiseless case the result is checked against the closed form.
    """
    if d < 2:
        raise ProtocolError("passive distribution needs d >= 2")
    pipeline = build(NetworkSpec("ent-passive", {"d": d}, noise))
    layout = _passive_layout(d, polarization)
    if polarization:
        terms = [(SQ2, make_basis_state(layout, (pol, 0, 0, pol, 0, 0))) for pol in (0, 1)]
        start = superpose(terms)
    else:
        start = make_basis_state(layout, (0, 0, 0, 0))
    final = pipeline.run(start, (0, 1))
    if noise is None:
        f = fidelity(final, closed_form_passive_state(d, polarization))
        if f < 1 - 1e-10:
            raise AssertionError(f"passive network state deviates from closed form (fidelity {f})")
    return final


@dataclass
class CoincidenceHistogram:
    probabilities: dict  # (signal path, idler path) -> probability
    samples: list  # sampled (i, j) events
    seed: int

    @property
    def post_selected(self) -> list:
        return [ev for ev in self.samples if ev[0] != ev[1]]

    @property
    def distinct_fraction(self) -> float:
        return float(sum(p for (i, j), p in self.probabilities.items() if i != j))

    @property
    def same_port_fraction(self) -> float:
        return 1.0 - self.distinct_fraction

    @property
    def sampled_distinct_fraction(self) -> float:
        return len(self.post_selected) / len(self.samples) if self.samples else float("nan")

    def user_pairs(self) -> dict:
        """How often each unordered user pair shared a photon pair in the sampled run."""
        counts: dict = {}
        for i, j in self.post_selected:
            key = (min(i, j), max(i, j))
            counts[key] = counts.get(key, 0) + 1
        return counts

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# oamnet-csv v1 coincidences seed={self.seed} samples={len(self.samples)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["signal_path", "idler_path", "probability", "sampled_count"])
        counts: dict = {}
        for ev in self.samples:
            counts[ev] = counts.get(ev, 0) + 1
        for (i, j), p in sorted(self.probabilities.items()):
            w.writerow([i, j, f"{p:.12f}", counts.get((i, j), 0)])
        return buf.getvalue()


def coincidences(state: CompositeState, samples: int = 1000, seed: int = 0) -> CoincidenceHistogram:
    """Exact two-detector coincidence statistics plus a seeded sampled run."""
    layout = state.layout
    if layout.photons != 2:
        raise ProtocolError("coincidences need a two-photon state")
    joint = joint_distribution(state, [("path", 0), ("path", 1)])
    probs = {(i, j): float(joint[i, j]) for i in range(joint.shape[0]) for j in range(joint.shape[1])}
    rng = np.random.default_rng(seed)
    flat = joint.reshape(-1)
    draws = rng.choice(flat.size, size=samples, p=flat / flat.sum()) if samples else []
    events = [tuple(int(x) for x in np.unravel_index(k, joint.shape)) for k in draws]
    return CoincidenceHistogram(probs, events, seed)


def bbm92_run(state: CompositeState, rounds: int = 1000, seed: int = 0,
              condition: dict | None = None) -> KeyReport:
    """Entanglement-based key from the polarization of a delivered pair.

    Both holders pick Z or X at random and measure; ``condition`` fixes
    factor outcomes (e.g. the post-selected detector ports) first.
    """
    if rounds < 1:
        raise ProtocolError("rounds must be >= 1")
    if condition:
        _, state = project(state, condition)
        if state is None:
            raise ProtocolError(f"conditioning event {condition} has zero probability")
    rho = reduced_density_matrix(state, [("pol", 0), ("pol", 1)])
    joint = np.zeros((2, 2, 4))
    for ba in (0, 1):
        for bb in (0, 1):
            w = np.kron(HWP.matrix if ba else np.eye(2), HWP.matrix if bb else np.eye(2))
            joint[ba, bb] = np.clip(np.real(np.diag(w @ rho @ w.conj().T)), 0.0, None)
    rng_a, rng_b, rng_m = (np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3))
    a_bases = rng_a.integers(0, 2, rounds)
    b_bases = rng_b.integers(0, 2, rounds)
    cum = np.cumsum(joint[a_bases, b_bases], axis=1)
    outcome = (rng_m.random(rounds)[:, None] * cum[:, -1:] >= cum).sum(axis=1)
    outcome = np.minimum(outcome, 3)
    return KeyReport(outcome // 2, a_bases, b_bases, outcome % 2, label="bbm92")
