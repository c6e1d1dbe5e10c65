"""Compile network descriptions into element pipelines and simulate transport.

A single photon travels in the layout (pol, oam, path). The path register is
one flat index space covering every fiber/port in the network; elements that
own only some paths are embedded with identity on the rest, and classical
rewiring between devices is a path permutation. Ports that no receiver
listens on count as loss.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from . import planner
from .elements import (
    ElementUnitary,
    PortMap,
    circulator,
    embed_paths,
    fourier_gate,
    group_demux,
    interferometric_sorter,
    mux_unitary,
    path_permutation,
    sorter_unitary,
    spp_arms,
)
from .state import (
    CompositeState,
    SubsystemLayout,
    apply_local,
    joint_distribution,
    make_basis_state,
    measure_factor,
    product_state,
    project,
    reduced_density_matrix,
)

REQUIRED_DIMS = {
    "point-to-point": ("d",),
    "p2mp-coprime": ("d_s", "d_r"),
    "p2mp-general": ("d_s", "d_r"),
    "p2mp-multigroup": ("d_s", "d_r"),
    "p2mp-multigroup-variant": ("d_s", "d_r"),
    "fully-connected": ("n",),
    "ent-active": ("d",),
    "ent-passive": ("d",),
}
OPTIONAL_DIMS = {"p2mp-multigroup": ("groups",), "p2mp-multigroup-variant": ("groups",)}

H = np.array([1.0, 0.0], dtype=complex)


class SpecError(ValueError):
    """Inconsistent network description."""


@dataclass(frozen=True)
class NetworkSpec:
    architecture: str
    dims: Mapping[str, int]
    noise: Mapping[str, Sequence[float]] | None = None

    def __post_init__(self):
        object.__setattr__(self, "dims", {k: int(v) for k, v in dict(self.dims).items()})
        if self.noise is not None:
            object.__setattr__(self, "noise", {k: tuple(float(x) for x in v)
                                               for k, v in dict(self.noise).items()})

    def validate(self) -> None:
        arch = self.architecture
        if arch not in REQUIRED_DIMS:
            raise SpecError(f"unknown architecture {arch!r}; expected one of {planner.ARCHITECTURES}")
        allowed = set(REQUIRED_DIMS[arch]) | set(OPTIONAL_DIMS.get(arch, ()))
        missing = set(REQUIRED_DIMS[arch]) - set(self.dims)
        extra = set(self.dims) - allowed
        if missing or extra:
            raise SpecError(f"{arch} needs dims {sorted(allowed)}; missing {sorted(missing)}, "
                            f"unexpected {sorted(extra)}")
        dims = self.dims
        if any(v < 1 for v in dims.values()):
            raise SpecError(f"dimensions must be positive: {dims}")
        if arch == "p2mp-coprime":
            try:
                planner.check_coprime(dims["d_s"], dims["d_r"])
            except planner.CoprimalityError as exc:
                raise SpecError(str(exc)) from exc
        if arch == "p2mp-multigroup" and dims["d_r"] % dims["d_s"]:
            raise SpecError("p2mp-multigroup needs d_s to divide d_r (receivers per group = d_r/d_s)")
        if arch in OPTIONAL_DIMS and dims.get("groups", dims["d_s"]) > dims["d_s"]:
            raise SpecError("at most d_s receiver groups fit on the sender multiplexer")
        if arch in ("point-to-point",) and dims["d"] < 2:
            raise SpecError("point-to-point needs d >= 2")
        if arch == "fully-connected" and dims["n"] < 2:
            raise SpecError("fully-connected needs n >= 2")
        if arch in ("ent-active", "ent-passive") and dims["d"] < 2:
            raise SpecError(f"{arch} needs d >= 2")

    def with_noise(self, noise) -> "NetworkSpec":
        return replace(self, noise=noise)


@dataclass(frozen=True)
class Stage:
    name: str
    element: ElementUnitary
    photons: tuple[int, ...] | None = None  # None: every routed photon


@dataclass
class Pipeline:
    spec: NetworkSpec
    factors: tuple[tuple[str, int], ...]
    stages: list[Stage]
    inputs: dict  # sender -> path index
    outputs: dict  # path index -> receiver
    sorters: dict = field(default_factory=dict)  # physical sorter name -> d
    port_map: PortMap | None = None
    photons: int = 1
    table: planner.AssignmentTable | None = None

    def layout(self, photons: int | None = None) -> SubsystemLayout:
        return SubsystemLayout(self.factors, photons or self.photons)

    @property
    def path_dim(self) -> int:
        return dict(self.factors)["path"]

    @property
    def oam_dim(self) -> int:
        return dict(self.factors)["oam"]

    def run(self, state: CompositeState, photons: Sequence[int] = (0,)) -> CompositeState:
        for stage in self.stages:
            for p in stage.photons if stage.photons is not None else photons:
                state = apply_local(state, stage.element,
                                    [(lab, p) for lab in stage.element.footprint])
        return state

    def reversed(self) -> "Pipeline":
        """The same hardware traversed backwards: receivers become senders."""
        stages = [Stage(s.name, s.element.dagger(s.element.name), s.photons)
                  for s in reversed(self.stages)]
        return Pipeline(self.spec, self.factors, stages,
                        inputs={rx: p for p, rx in self.outputs.items()},
                        outputs={p: tx for tx, p in self.inputs.items()},
                        sorters=self.sorters, port_map=self.port_map,
                        photons=self.photons, table=self.table)

    def expected_receiver(self, sender, label):
        if self.table is None:
            return None
        hits = [(g, r) for (s, g, r), l in self.table.entries.items() if s == sender and l == label]
        if not hits:
            return None
        g, r = hits[0]
        return r if g is None else (g, r)

    def component_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for d in self.sorters.values():
            counts[f"U_{d}"] = counts.get(f"U_{d}", 0) + 1
        for s in self.stages:
            if s.name.endswith("spp"):
                counts["SPP"] = counts.get("SPP", 0) + s.element.dims[1] * len(s.photons or (0,))
        return counts


# -- builders ----------------------------------------------------------------

class _Builder:
    def __init__(self, spec: NetworkSpec, oam_dim: int, path_dim: int, pol: bool = True):
        self.spec = spec
        self.noise = dict(spec.noise or {})
        self.D = oam_dim
        self.P = path_dim
        self.factors = ((("pol", 2),) if pol else ()) + (("oam", oam_dim), ("path", path_dim))
        self.stages: list[Stage] = []
        self.sorters: dict[str, int] = {}
        self.used_noise: set[str] = set()

    def errors_for(self, name: str, d: int):
        eps = self.noise.get(name)
        if eps is None:
            eps = self.noise.get("*")
            if eps is not None and len(eps) != d:
                eps = None
        else:
            self.used_noise.add(name)
            if len(eps) != d:
                raise SpecError(f"noise for sorter {name!r} has length {len(eps)}, expected {d}")
        return eps

    def sorter(self, name: str, d: int, offset: int = 0, mux: bool = False, photons=None):
        """Add a d-port sorter (or MUX) on paths offset..offset+d-1."""
        if d < 2:
            return
        self.sorters[name] = d
        eps = self.errors_for(name, d)
        if eps is None:
            el = mux_unitary(d, self.D) if mux else sorter_unitary(d, self.D)
        else:
            el = interferometric_sorter(d, eps, self.D)
            el = el.dagger() if mux else el
        self.add(name, embed_paths(el, self.P, offset), photons)

    def group(self, name: str, d_s: int, d_r: int, offset: int = 0, inverse: bool = False):
        """Group demultiplexer (or its inverse, a group multiplexer) at ``offset``."""
        D = d_s * d_r
        sorter_name = f"{name}.sorter"
        block = f"{name}.demux" if inverse else f"{name}.mux"
        if D > 1:
            self.sorters[sorter_name] = D
        sorter_eps = self.errors_for(sorter_name, D) if D > 1 else None
        mux_eps = {}
        if d_s > 1:
            for r in range(d_r):
                self.sorters[f"{block}{r}"] = d_s
                eps = self.errors_for(f"{block}{r}", d_s)
                if eps is not None:
                    mux_eps[r] = eps
        g = group_demux(d_s, d_r, sorter_eps, mux_eps)
        if inverse:
            g = g.dagger(f"G^{d_r}_{d_s}^dag")
        self.add(name, embed_paths(g, self.P, offset))

    def channel(self):
        self.add("channel", ElementUnitary(np.eye(self.P), ("path",), (self.P,), "channel"))

    def wire(self, name: str, mapping: Mapping[int, int]):
        if mapping:
            self.add(name, path_permutation(mapping, self.P, name))

    def add(self, name: str, element: ElementUnitary, photons=None):
        self.stages.append(Stage(name, element, photons))

    def finish(self, inputs, outputs, **kw) -> Pipeline:
        unknown = set(self.noise) - set(self.sorters) - {"*"}
        if unknown:
            raise SpecError(f"noise given for unknown sorters {sorted(unknown)}; "
                            f"this network has {sorted(self.sorters)}")
        return Pipeline(self.spec, self.factors, self.stages, inputs, outputs,
                        dict(self.sorters), **kw)


def build(spec: NetworkSpec, validate: bool = True) -> Pipeline:
    """Compile a network description into a pipeline.

    Sorter instance names (keys for ``spec.noise``; ``"*"`` matches every
    sorter of the vector's length):

    * point-to-point, p2mp-coprime: ``mux``, ``demux``
    * p2mp-general, ent-active: ``mux``, ``group.sorter``, ``group.mux<r>``
    * p2mp-multigroup: ``mux``, ``group<g>.sorter``, ``group<g>.mux<r>``
    * p2mp-multigroup-variant: ``gmux.sorter``, ``gmux.demux<b>``, ``demux<g>``
    * fully-connected: ``sorter``
    * ent-passive: ``signal.mux``, ``idler.mux``, ``final``
    """
    if validate:
        spec.validate()
    elif spec.architecture not in REQUIRED_DIMS:
        raise SpecError(f"unknown architecture {spec.architecture!r}")
    arch, dims = spec.architecture, spec.dims
    table = None
    if arch != "ent-passive":
        try:
            table = planner.assignment_table(arch, **dims)
        except planner.CoprimalityError:
            pass  # unchecked coprime build: no valid labels exist
    return _BUILDERS[arch](spec, dims, table)


def _point_to_point(spec, dims, table):
    d = dims["d"]
    b = _Builder(spec, d, d)
    b.sorter("mux", d, mux=True)
    b.channel()
    b.sorter("demux", d)
    ports = {i: i for i in range(d)}
    return b.finish(ports, dict(ports), table=table)


def _coprime(spec, dims, table):
    d_s, d_r = dims["d_s"], dims["d_r"]
    b = _Builder(spec, d_s * d_r, max(d_s, d_r))
    b.sorter("mux", d_s, mux=True)
    b.channel()
    b.sorter("demux", d_r)
    return b.finish({s: s for s in range(d_s)}, {r: r for r in range(d_r)}, table=table)


def _general(spec, dims, table, d_s=None, d_r=None):
    d_s = dims["d_s"] if d_s is None else d_s
    d_r = dims["d_r"] if d_r is None else d_r
    D = d_s * d_r
    b = _Builder(spec, D, D)
    b.sorter("mux", d_s, mux=True)
    b.channel()
    b.group("group", d_s, d_r)
    return b.finish({s: s for s in range(d_s)}, {r * d_s: r for r in range(d_r)}, table=table)


def _ent_active(spec, dims, table):
    return _general(spec, dims, table, d_s=2, d_r=dims["d"])


def _multigroup(spec, dims, table):
    d_s, band = dims["d_s"], dims["d_r"]
    groups = dims.get("groups", d_s)
    per_group = band // d_s
    offsets = [d_s + g * band for g in range(groups)]
    b = _Builder(spec, band, d_s + groups * band)
    b.sorter("mux", d_s, mux=True)
    b.channel()
    # MUX output g feeds input port g of group g's demultiplexer, so its
    # receivers sit on output g of each block MUX
    b.wire("wiring", {g: offsets[g] + g for g in range(groups)})
    outputs = {}
    for g in range(groups):
        b.group(f"group{g}", d_s, per_group, offsets[g])
        for r in range(per_group):
            outputs[offsets[g] + r * d_s + g] = (g, r)
    return b.finish({s: s for s in range(d_s)}, outputs, table=table)


def _multigroup_variant(spec, dims, table):
    d_s, d_r = dims["d_s"], dims["d_r"]
    groups = dims.get("groups", d_s)
    D = d_s * d_r
    b = _Builder(spec, D, D + groups * d_r)
    # group multiplexer: sender s enters block s, groups leave on outputs g*d_r
    b.group("gmux", d_r, d_s, inverse=True)
    b.channel()
    b.wire("wiring", {g * d_r: D + g * d_r for g in range(groups)})
    outputs = {}
    for g in range(groups):
        b.sorter(f"demux{g}", d_r, D + g * d_r)
        for r in range(d_r):
            outputs[D + g * d_r + r] = (g, r)
    return b.finish({s: s * d_r for s in range(d_s)}, outputs, table=table)


def _fully_connected(spec, dims, table):
    n = dims["n"]
    b = _Builder(spec, n, n)
    b.sorter("sorter", n)
    pm = fully_connected_ports(n)
    inputs, outputs = {}, {}
    for x in range(n):
        end = pm.trace((f"node{x}", 1, "in"))[-1]
        if end[0] != "sorter" or end[2] != "in":
            raise AssertionError(f"node {x} Tx does not reach the sorter: {end}")
        inputs[x] = end[1]
    for p in range(n):
        end = pm.trace(("sorter", p, "out"))[-1]
        if not (end[0].startswith("node") and end[1] == 3):
            raise AssertionError(f"sorter output {p} does not reach a receiver: {end}")
        outputs[p] = int(end[0][4:])
    return b.finish(inputs, outputs, table=table, port_map=pm)


def fully_connected_ports(n: int) -> PortMap:
    """Circulator wiring: every node reaches the central sorter over one fiber.

    Node side circulator: Tx on port 1, fiber on port 2, Rx on port 3.
    Sorter side circulator: fiber on port 1, sorter input on port 2, sorter
    output arriving on port 3.
    """
    pm = PortMap()
    for x in range(n):
        pm = pm | circulator((1, 2, 3), f"node{x}") | circulator((1, 2, 3), f"hub{x}")
        pm.add((f"node{x}", 2, "out"), (f"hub{x}", 1, "in"))
        pm.add((f"hub{x}", 1, "out"), (f"node{x}", 2, "in"))
        pm.add((f"hub{x}", 2, "out"), ("sorter", x, "in"))
        pm.add(("sorter", x, "out"), (f"hub{x}", 3, "in"))
    return pm


def _ent_passive(spec, dims, table):
    d = dims["d"]
    b = _Builder(spec, d, d, pol=False)
    both = (0, 1)
    f = fourier_gate(d)
    b.add("fourier", f, both)
    b.add("spp", spp_arms(d), both)
    b.sorter("signal.mux", d, mux=True, photons=(0,))
    b.sorter("idler.mux", d, mux=True, photons=(1,))
    # idler enters the final sorter on port 1
    b.add("idler-wiring", path_permutation({0: 1}, d, "idler-wiring"), (1,))
    b.sorter("final", d, photons=both)
    ports = {i: i for i in range(d)}
    return b.finish({"source": 0}, ports, photons=2)


_BUILDERS = {
    "point-to-point": _point_to_point,
    "p2mp-coprime": _coprime,
    "p2mp-general": _general,
    "p2mp-multigroup": _multigroup,
    "p2mp-multigroup-variant": _multigroup_variant,
    "fully-connected": _fully_connected,
    "ent-active": _ent_active,
    "ent-passive": _ent_passive,
}


# -- transport ---------------------------------------------------------------

@dataclass
class TransmissionResult:
    state: CompositeState
    arrival: dict  # receiver (None = lost) -> probability
    receiver: object
    payload_fidelity: float

    @property
    def probability(self) -> float:
        return self.arrival.get(self.receiver, 0.0)


def arrival_distribution(pipeline: Pipeline, state: CompositeState, photon: int = 0) -> dict:
    probs = measure_factor(state, ("path", photon))
    out: dict = {}
    for p, pr in enumerate(probs):
        rx = pipeline.outputs.get(p)
        out[rx] = out.get(rx, 0.0) + float(pr)
    return {k: v for k, v in out.items() if v > 0.0 or k is not None}


def payload_fidelity(pipeline: Pipeline, state: CompositeState, receiver, payload) -> float:
    ports = [p for p, rx in pipeline.outputs.items() if rx == receiver]
    if not ports:
        return 0.0
    prob, post = project(state, {"path": ports[0]})
    if post is None:
        return 0.0
    rho = reduced_density_matrix(post, ["pol"])
    psi = np.asarray(payload, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return float(np.real(psi.conj() @ rho @ psi))


def initial_state(pipeline: Pipeline, sender, label: int, payload=None) -> CompositeState:
    if sender not in pipeline.inputs:
        raise ValueError(f"unknown sender port {sender!r}")
    if not 0 <= label < pipeline.oam_dim:
        raise ValueError(f"OAM label {label} outside band [0, {pipeline.oam_dim})")
    oam = np.zeros(pipeline.oam_dim, dtype=complex)
    oam[label] = 1.0
    path = np.zeros(pipeline.path_dim, dtype=complex)
    path[pipeline.inputs[sender]] = 1.0
    pol = H if payload is None else payload
    return product_state(pipeline.layout(1), {"pol": pol, "oam": oam, "path": path})


def transmit(pipeline: Pipeline, sender, label: int, payload=None, receiver=None) -> TransmissionResult:
    """Send one photon from ``sender`` with OAM ``label`` and polarization ``payload``.

    The target receiver defaults to the one the assignment table pairs with
    (sender, label).
    """
    if pipeline.photons != 1:
        raise ValueError(f"{pipeline.spec.architecture} has no single-photon senders")
    start = initial_state(pipeline, sender, label, payload)
    final = pipeline.run(start)
    if receiver is None:
        receiver = pipeline.expected_receiver(sender, label)
    arrival = arrival_distribution(pipeline, final)
    fid = payload_fidelity(pipeline, final, receiver, H if payload is None else payload)
    return TransmissionResult(final, arrival, receiver, fid)


# -- verification ------------------------------------------------------------

@dataclass
class PairResult:
    sender: object
    receiver: object
    label: object
    probability: float


@dataclass
class RoutingReport:
    architecture: str
    entries: list[PairResult]

    def ok(self, tol: float = 1e-9) -> bool:
        return all(abs(e.probability - 1.0) <= tol for e in self.entries)

    @property
    def min_probability(self) -> float:
        return min(e.probability for e in self.entries)

    @property
    def senders(self) -> list:
        return sorted({e.sender for e in self.entries}, key=str)

    @property
    def receivers(self) -> list:
        return sorted({e.receiver for e in self.entries}, key=str)

    def matrix(self) -> np.ndarray:
        """Senders x receivers; NaN where a pair is not served."""
        ss, rs = self.senders, self.receivers
        m = np.full((len(ss), len(rs)), np.nan)
        for e in self.entries:
            m[ss.index(e.sender), rs.index(e.receiver)] = e.probability
        return m

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# oamnet-csv v1 routing architecture={self.architecture}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["sender", "receiver", "oam_label", "probability"])
        for e in self.entries:
            w.writerow([_fmt_port(e.sender), _fmt_port(e.receiver), _fmt_port(e.label),
                        f"{e.probability:.12f}"])
        return buf.getvalue()


def _fmt_port(x) -> str:
    return ":".join(str(v) for v in x) if isinstance(x, tuple) else str(x)


def _pairs(pipeline: Pipeline, include_self: bool):
    for (s, g, r), l in sorted(pipeline.table.entries.items(), key=lambda kv: str(kv[0])):
        if pipeline.spec.architecture == "fully-connected" and s == r and not include_self:
            continue
        yield s, (r if g is None else (g, r)), l


def verify_all_pairs(spec_or_pipeline, include_self: bool = False, reverse: bool = False) -> RoutingReport:
    """Route every designated (sender, receiver) pair and record arrival probability.

    Fully-connected self-pairs (label 0, a loopback) are skipped unless
    ``include_self``. With ``reverse`` each receiver sends back to its sender
    through the reversed network.
    """
    pipeline = spec_or_pipeline if isinstance(spec_or_pipeline, Pipeline) else build(spec_or_pipeline)
    arch = pipeline.spec.architecture
    if arch == "ent-passive":
        return _verify_passive(pipeline)
    if arch == "ent-active":
        return _verify_active(pipeline, reverse)
    run = pipeline.reversed() if reverse else pipeline
    entries = []
    for s, r, l in _pairs(pipeline, include_self):
        src, dst = (r, s) if reverse else (s, r)
        res = transmit(run, src, l, receiver=dst)
        entries.append(PairResult(s, r, l, res.probability))
    return RoutingReport(arch, entries)


def _verify_active(pipeline: Pipeline, reverse: bool) -> RoutingReport:
    d = pipeline.spec.dims["d"]
    run = pipeline.reversed() if reverse else pipeline
    single = {}
    for port in (0, 1):
        for node in range(d):
            l = planner.oam_group(port, node, 2)
            src, dst = (node, port) if reverse else (port, node)
            single[port, node] = transmit(run, src, l, receiver=dst).probability
    entries = [PairResult(a, b, (planner.oam_group(0, a, 2), planner.oam_group(1, b, 2)),
                          single[0, a] * single[1, b])
               for a in range(d) for b in range(d) if a != b]
    return RoutingReport("ent-active", entries)


def _verify_passive(pipeline: Pipeline) -> RoutingReport:
    d = pipeline.spec.dims["d"]
    start = make_basis_state(pipeline.layout(2), (0, 0, 0, 0))
    final = pipeline.run(start, (0, 1))
    entries = []
    for i in range(d):
        for j in range(d):
            oam = (i, (j - 1) % d)
            prob, post = project(final, {("oam", 0): oam[0], ("oam", 1): oam[1]})
            ok = 0.0 if post is None else float(
                joint_distribution(post, [("path", 0), ("path", 1)])[i, j])
            entries.append(PairResult(i, j, oam, ok))
    return RoutingReport("ent-passive", entries)


# -- noise -------------------------------------------------------------------

@dataclass
class SweepPoint:
    magnitude: float
    mean_prob: float
    min_prob: float
    samples: int


def noise_sweep(spec: NetworkSpec, magnitudes: Sequence[float], samples: int = 100,
                seed: int = 0, workers: int = 1,
                sorters: Sequence[str] | None = None) -> list[SweepPoint]:
    """Correct-routing probability under random sorter phase errors.

    Every physical sorter (or only those named in ``sorters``) gets its own
    error vector, uniform in [-m, m] per arm. Draws are made once on the unit scale and multiplied
    by each magnitude, so all grid points see the same random directions
    and the curve is deterministic for a given seed.
    """
    mags = [float(m) for m in magnitudes]
    if not mags:
        raise ValueError("empty magnitude grid")
    if not all(math.isfinite(m) for m in mags):
        raise ValueError("magnitudes must be finite")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    ideal = build(spec.with_noise(None))
    names = sorted(ideal.sorters)
    if sorters is not None:
        unknown = set(sorters) - set(names)
        if unknown:
            raise SpecError(f"unknown sorters {sorted(unknown)}; this network has {names}")
        names = sorted(sorters)
    rng = np.random.default_rng(seed)
    draws = [{n: rng.uniform(-1.0, 1.0, ideal.sorters[n]) for n in names} for _ in range(samples)]

    def point(m: float) -> SweepPoint:
        if m == 0.0:
            # zero error is the ideal permutation network, exactly
            probs = [e.probability for e in verify_all_pairs(spec.with_noise(None)).entries]
            return SweepPoint(m, float(np.mean(probs)), float(np.min(probs)), samples)
        probs = []
        for unit in draws:
            noisy = spec.with_noise({n: tuple(m * unit[n]) for n in names})
            probs.extend(e.probability for e in verify_all_pairs(noisy).entries)
        return SweepPoint(m, float(np.mean(probs)), float(np.min(probs)), samples)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(point, mags))
    return [point(m) for m in mags]


def sweep_to_csv(points: Sequence[SweepPoint]) -> str:
    buf = io.StringIO()
    buf.write("# oamnet-csv v1 sweep\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["magnitude", "mean_prob", "min_prob", "samples"])
    for p in points:
        w.writerow([f"{p.magnitude:.12g}", f"{p.mean_prob:.12f}", f"{p.min_prob:.12f}", p.samples])
    return buf.getvalue()
