"""Optical building blocks as unitaries (or classical port maps).

All OAM-dependent elements accept an ``oam_dim`` larger than the element's
own dimension: a d-port sorter acting on a register holding OAM values up to
``oam_dim - 1`` only sees ``l mod d``, which is how a small multiplexer sits
in a network carrying a wider OAM band.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .state import check_unitary

ELEMENT_TOL = 1e-10


@dataclass(frozen=True)
class ElementUnitary:
    """A unitary together with the factors it acts on.

    ``dims`` gives the dimension of each footprint factor, in footprint order;
    the matrix is indexed mixed-radix in that same order.
    """

    matrix: np.ndarray = field(repr=False)
    footprint: tuple[str, ...]
    dims: tuple[int, ...]
    name: str = ""

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        object.__setattr__(self, "footprint", tuple(self.footprint))
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if len(self.footprint) != len(self.dims):
            raise ValueError("footprint and dims differ in length")
        n = int(np.prod(self.dims))
        if m.shape != (n, n):
            raise ValueError(f"matrix shape {m.shape} does not match dims {self.dims}")
        check_unitary(m, ELEMENT_TOL)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def dagger(self, name: str | None = None) -> "ElementUnitary":
        return ElementUnitary(self.matrix.conj().T, self.footprint, self.dims,
                              name if name is not None else self.name + "^dag")

    def then(self, other: "ElementUnitary", name: str = "") -> "ElementUnitary":
        """``other`` applied after ``self`` (same footprint required)."""
        if (other.footprint, other.dims) != (self.footprint, self.dims):
            raise ValueError("cannot compose elements with different footprints")
        return ElementUnitary(other.matrix @ self.matrix, self.footprint, self.dims, name)

    def action(self, address: Sequence[int]) -> dict[tuple[int, ...], complex]:
        """Output amplitudes for one basis input (nonzero entries only)."""
        col = self.matrix[:, int(np.ravel_multi_index(tuple(address), self.dims))]
        return {
            tuple(int(i) for i in np.unravel_index(k, self.dims)): complex(col[k])
            for k in np.flatnonzero(np.abs(col) > 1e-12)
        }


def _check_dim(d: int, minimum: int = 2) -> int:
    d = int(d)
    if d < minimum:
        raise ValueError(f"dimension must be >= {minimum}, got {d}")
    return d


def _permutation(dims: Sequence[int], mapping) -> np.ndarray:
    n = int(np.prod(dims))
    m = np.zeros((n, n), dtype=complex)
    for src in range(n):
        addr = np.unravel_index(src, dims)
        dst = np.ravel_multi_index(mapping(*(int(a) for a in addr)), dims)
        m[dst, src] = 1.0
    return m


def sorter_unitary(d: int, oam_dim: int | None = None) -> ElementUnitary:
    """The d-port OAM sorter (DEMUX): |l>|k> -> |l>|k + l mod d>."""
    d = _check_dim(d)
    D = d if oam_dim is None else _check_dim(oam_dim, 1)
    m = _permutation((D, d), lambda l, k: (l, (k + l) % d))
    return ElementUnitary(m, ("oam", "path"), (D, d), f"U_{d}")


def mux_unitary(d: int, oam_dim: int | None = None) -> ElementUnitary:
    """Inverse sorter (MUX): |l>|k> -> |l>|k - l mod d>."""
    return sorter_unitary(d, oam_dim).dagger(f"U_{d}^dag")


def fourier_gate(d: int) -> ElementUnitary:
    d = _check_dim(d, 1)
    j = np.arange(d)
    m = np.exp(2j * np.pi * np.outer(j, j) / d) / np.sqrt(d)
    return ElementUnitary(m, ("path",), (d,), f"F_{d}")


def spp(order: int, d: int) -> ElementUnitary:
    """Spiral phase plate adding ``order`` to the OAM value (mod d)."""
    d = _check_dim(d, 1)
    m = _permutation((d,), lambda l: ((l + order) % d,))
    return ElementUnitary(m, ("oam",), (d,), f"SPP^{order % d}")


def dove_phase(alpha: float, d: int) -> ElementUnitary:
    """Dove prism rotated by ``alpha``: OAM l picks up exp(2i l alpha)."""
    d = _check_dim(d, 1)
    m = np.diag(np.exp(2j * np.arange(d) * alpha))
    return ElementUnitary(m, ("oam",), (d,), f"Dove({alpha:.4g})")


def path_controlled(arms: Sequence[ElementUnitary], name: str = "") -> ElementUnitary:
    """Block element on (oam, path) applying ``arms[k]`` to OAM on path k."""
    oam_dims = {a.dims for a in arms}
    if len(oam_dims) != 1 or any(a.footprint != ("oam",) for a in arms):
        raise ValueError("arms must all be OAM elements of one dimension")
    (D,), P = oam_dims.pop(), len(arms)
    m = np.zeros((D * P, D * P), dtype=complex)
    for k, arm in enumerate(arms):
        idx = np.arange(D) * P + k
        m[np.ix_(idx, idx)] = arm.matrix
    return ElementUnitary(m, ("oam", "path"), (D, P), name)


def spp_arms(d: int) -> ElementUnitary:
    """Interferometer arms with SPP^i on path i: |m>|i> -> |m + i>|i>."""
    return path_controlled([spp(i, d) for i in range(d)], f"SPP-arms_{d}")


def phase_errors(d: int, errors: Sequence[float] | None) -> np.ndarray:
    if errors is None:
        return np.zeros(d)
    eps = np.asarray(errors, dtype=float).reshape(-1)
    if eps.shape != (d,):
        raise ValueError(f"phase-error vector must have length {d}, got {eps.size}")
    if not np.all(np.isfinite(eps)):
        raise ValueError("phase errors must be finite")
    return eps


def interferometric_sorter(d: int, errors: Sequence[float] | None = None,
                           oam_dim: int | None = None) -> ElementUnitary:
    """Multi-path Mach-Zehnder sorter: F_d^dag . (Dove prism per arm) . F_d.

    Arm k holds a Dove prism at angle k*pi/d. ``errors[k]`` is an extra phase
    picked up on arm k, independent of OAM (imperfect path length).
    """
    d = _check_dim(d)
    D = d if oam_dim is None else _check_dim(oam_dim, 1)
    eps = phase_errors(d, errors)
    arms = []
    for k in range(d):
        prism = dove_phase(k * np.pi / d, D)
        arms.append(ElementUnitary(prism.matrix * np.exp(1j * eps[k]), ("oam",), (D,)))
    f = fourier_gate(d).matrix
    f_full = np.kron(np.eye(D), f)
    m = f_full.conj().T @ path_controlled(arms).matrix @ f_full
    return ElementUnitary(m, ("oam", "path"), (D, d), f"U_{d}[interf]")


def sorting_probability(d: int, errors: Sequence[float] | None, l: int) -> float:
    """Probability that OAM ``l`` entering port 0 leaves on port ``l``."""
    d = _check_dim(d)
    if not 0 <= l < d:
        raise ValueError(f"OAM label {l} out of range [0, {d})")
    u = interferometric_sorter(d, errors).matrix
    return float(abs(u[l * d + l, l * d]) ** 2)


def embed_paths(element: ElementUnitary, path_dim: int, offset: int = 0) -> ElementUnitary:
    """Place an (oam, path:m) or (path:m) element on paths offset..offset+m-1."""
    fp = element.footprint
    if fp == ("path",):
        (m,) = element.dims
        if offset + m > path_dim:
            raise ValueError("embedded element exceeds the path register")
        out = np.eye(path_dim, dtype=complex)
        out[offset:offset + m, offset:offset + m] = element.matrix
        return ElementUnitary(out, fp, (path_dim,), element.name)
    if fp != ("oam", "path"):
        raise ValueError(f"cannot embed element with footprint {fp}")
    D, m = element.dims
    if offset + m > path_dim:
        raise ValueError("embedded element exceeds the path register")
    out = np.eye(D * path_dim, dtype=complex)
    idx = (np.arange(D)[:, None] * path_dim + offset + np.arange(m)[None, :]).reshape(-1)
    out[np.ix_(idx, idx)] = element.matrix
    return ElementUnitary(out, fp, (D, path_dim), element.name)


def path_permutation(mapping: Mapping[int, int], path_dim: int, name: str = "wiring") -> ElementUnitary:
    """Classical rewiring of path indices; unlisted paths are fixed.

    The mapping is completed to a permutation, so swaps need only list one
    direction.
    """
    perm = dict(mapping)
    for src, dst in list(perm.items()):
        perm.setdefault(dst, src)
    if sorted(perm) != sorted(perm.values()):
        raise ValueError(f"wiring {mapping} is not a permutation")
    m = np.zeros((path_dim, path_dim), dtype=complex)
    for p in range(path_dim):
        m[perm.get(p, p), p] = 1.0
    return ElementUnitary(m, ("path",), (path_dim,), name)


def group_demux(d_s: int, d_r: int,
                sorter_errors: Sequence[float] | None = None,
                mux_errors: Mapping[int, Sequence[float]] | None = None) -> ElementUnitary:
    """Group demultiplexer on (oam: d_s*d_r, path: d_s*d_r).

    Built from its parts: a (d_s*d_r)-port sorter onto local paths, then one
    d_s-port MUX per block of d_s consecutive local paths. The path index
    leaving the element is local; output port r is local ``r*d_s`` (see
    :func:`group_output_port`). Optional phase errors make either part an
    imperfect interferometer.
    """
    d_s, d_r = _check_dim(d_s, 1), _check_dim(d_r, 1)
    D = d_s * d_r
    mux_errors = dict(mux_errors or {})
    if D == 1:
        return ElementUnitary(np.eye(1), ("oam", "path"), (1, 1), "G_1^1")
    if sorter_errors is None:
        first = sorter_unitary(D)
    else:
        first = interferometric_sorter(D, sorter_errors)
    m = first.matrix
    if d_s > 1:
        for r in range(d_r):
            errs = mux_errors.get(r)
            block = (mux_unitary(d_s, D) if errs is None
                     else interferometric_sorter(d_s, errs, D).dagger())
            m = embed_paths(block, D, r * d_s).matrix @ m
    return ElementUnitary(m, ("oam", "path"), (D, D), f"G^{d_r}_{d_s}")


def group_output_port(local: int, d_s: int) -> tuple[int, int]:
    """Split a local path into (output port, residual); residual 0 is the port itself."""
    return divmod(int(local), d_s)


def group_demux_route(l: int, k: int, d_s: int, d_r: int) -> int:
    """Closed-form output port of the group demultiplexer."""
    return ((k + l) % (d_s * d_r)) // d_s


# -- circulators -------------------------------------------------------------

Endpoint = tuple  # (device, port, "in" | "out")


class PortMap:
    """Directed classical links between device ports.

    A link goes from an endpoint to the next endpoint a signal reaches:
    ``(dev, p, "in") -> (dev, q, "out")`` inside a device, and
    ``(dev, p, "out") -> (dev2, q, "in")`` along a fiber.
    """

    def __init__(self, links: Mapping[Endpoint, Endpoint] | Iterable = ()):
        self.links: dict[Endpoint, Endpoint] = {}
        items = links.items() if isinstance(links, Mapping) else links
        for src, dst in items:
            self.add(src, dst)

    def add(self, src: Endpoint, dst: Endpoint) -> None:
        for ep in (src, dst):
            if len(ep) != 3 or ep[2] not in ("in", "out"):
                raise ValueError(f"malformed endpoint {ep!r}")
        if src in self.links:
            raise ValueError(f"endpoint {src!r} already linked")
        if dst in self.links.values():
            raise ValueError(f"two signals would merge into {dst!r}")
        self.links[src] = dst

    def __or__(self, other: "PortMap") -> "PortMap":
        merged = PortMap(self.links)
        for src, dst in other.links.items():
            merged.add(src, dst)
        return merged

    def __getitem__(self, src: Endpoint) -> Endpoint:
        return self.links[src]

    def __contains__(self, src) -> bool:
        return src in self.links

    def __len__(self) -> int:
        return len(self.links)

    def trace(self, start: Endpoint, stop=None) -> list[Endpoint]:
        """Follow links from ``start`` until a dead end or ``stop(endpoint)``."""
        path = [start]
        seen = {start}
        while path[-1] in self.links and not (stop and len(path) > 1 and stop(path[-1])):
            nxt = self.links[path[-1]]
            if nxt in seen:
                raise ValueError(f"port map loops at {nxt!r}")
            seen.add(nxt)
            path.append(nxt)
        return path


def circulator(ports: Sequence[int] = (1, 2, 3), name: str = "circ") -> PortMap:
    """Three-port circulator cycling 1 -> 2 -> 3 -> 1."""
    ports = tuple(ports)
    if len(ports) != 3 or len(set(ports)) != 3:
        raise ValueError(f"a circulator needs three distinct ports, got {ports}")
    a, b, c = ports
    return PortMap({
        (name, a, "in"): (name, b, "out"),
        (name, b, "in"): (name, c, "out"),
        (name, c, "in"): (name, a, "out"),
    })
