"""OAM label assignment for each network architecture.

Everything here is integer arithmetic: which OAM value a sender uses to reach
a receiver, the inverse lookup a receiver performs, and the component count of
each architecture.
"""

from __future__ import annotations

import csv
import io
import math
import string
from dataclasses import dataclass, field
from typing import NamedTuple

ARCHITECTURES = (
    "point-to-point",
    "p2mp-coprime",
    "p2mp-general",
    "p2mp-multigroup",
    "p2mp-multigroup-variant",
    "fully-connected",
    "ent-active",
    "ent-passive",
)

# rows of the resource-scaling table
RESOURCE_ROWS = (
    "point-to-point",
    "p2mp-general",
    "p2mp-groups",
    "fully-connected",
    "ent-active",
    "ent-passive",
)


class CoprimalityError(ValueError):
    pass


class BezoutResult(NamedTuple):
    p: int
    q: int
    gcd: int


def bezout(a: int, b: int) -> BezoutResult:
    """Extended Euclid: returns p, q with p*a + q*b = gcd(a, b)."""
    if a < 1 or b < 1:
        raise ValueError("bezout needs positive integers")
    old_r, r = a, b
    old_p, p = 1, 0
    old_q, q = 0, 1
    while r:
        quot = old_r // r
        old_r, r = r, old_r - quot * r
        old_p, p = p, old_p - quot * p
        old_q, q = q, old_q - quot * q
    return BezoutResult(old_p, old_q, old_r)


def _check_range(name: str, value: int, bound: int) -> None:
    if not 0 <= value < bound:
        raise ValueError(f"{name}={value} out of range [0, {bound})")


def oam_coprime(s: int, r: int, d_s: int, d_r: int) -> int:
    """Label l with l = s (mod d_s) and l = r (mod d_r), reduced into [0, d_s*d_r)."""
    p, q, g = bezout(d_s, d_r)
    if g != 1:
        raise CoprimalityError(
            f"d_s={d_s} and d_r={d_r} share the factor {g}; use the general architecture"
        )
    _check_range("s", s, d_s)
    _check_range("r", r, d_r)
    return (s * q * d_r + r * p * d_s) % (d_s * d_r)


def oam_group(s: int, r: int, d_s: int) -> int:
    _check_range("s", s, d_s)
    if r < 0:
        raise ValueError(f"r={r} must be non-negative")
    return s + r * d_s


def oam_multigroup(s: int, g: int, r: int, d_s: int, band: int) -> int:
    """Label for sender s to reach receiver r of group g (group g on MUX output g)."""
    _check_range("s", s, d_s)
    _check_range("g", g, d_s)
    if r < 0 or band < 1:
        raise ValueError("r must be non-negative and band positive")
    return (s + r * d_s - g) % band


def oam_multigroup_variant(s: int, g: int, r: int, d_r: int, band: int,
                           group_stride: int | None = None) -> int:
    """Label when senders share a group multiplexer and groups use plain DEMUXes.

    Groups leave the group multiplexer on outputs ``g * group_stride``; with
    block size d_r (the default stride) this is the arrangement built by the
    network fabric.
    """
    _check_range("r", r, d_r)
    if s < 0 or g < 0 or band < 1:
        raise ValueError("s, g must be non-negative and band positive")
    stride = d_r if group_stride is None else group_stride
    return (r + s * d_r - g * stride) % band


def signed_label(l: int, l_max: int) -> int:
    """Physical signed OAM for logical label ``l``: the top of the band folds to negatives.

    ``l_max - n`` becomes ``-n - 1`` for n up to l_max // 2, but only where that
    does not increase |OAM|.
    """
    if not 0 <= l <= l_max:
        raise ValueError(f"label {l} outside [0, {l_max}]")
    n = l_max - l
    if n <= l_max // 2 and n + 1 <= l:
        return -n - 1
    return l


# -- tables ------------------------------------------------------------------

@dataclass
class AssignmentTable:
    """Map (sender, group, receiver) -> OAM label; group is None when unused."""

    architecture: str
    dims: dict
    band: int
    entries: dict = field(default_factory=dict)

    def label(self, sender, receiver, group=None) -> int:
        return self.entries[(sender, group, receiver)]

    @property
    def senders(self) -> list:
        return sorted({k[0] for k in self.entries})

    @property
    def columns(self) -> list:
        return sorted({(k[1], k[2]) for k in self.entries}, key=lambda c: (c[0] or 0, c[1]))

    def rows(self):
        for (s, g, r), l in sorted(self.entries.items(), key=lambda kv: (kv[0][0], kv[0][1] or 0, kv[0][2])):
            yield s, g, r, l

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# oamnet-csv v1 assignment architecture={self.architecture} band={self.band}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["sender", "group", "receiver", "oam_label", "signed_label"])
        for s, g, r, l in self.rows():
            w.writerow([s, "" if g is None else g, r, l, signed_label(l, self.band - 1)])
        return buf.getvalue()

    def grid(self) -> str:
        """Text grid, senders down, receivers across."""
        names = _node_names(self)
        cols = self.columns
        head = ["sender\\receiver"] + [names(r) if g is None else f"g{g}:{names(r)}" for g, r in cols]
        lines = [head]
        for s in self.senders:
            row = [names(s)]
            for g, r in cols:
                l = self.entries.get((s, g, r))
                row.append("-" if l is None else f"|{l}>")
            lines.append(row)
        widths = [max(len(row[i]) for row in lines) for i in range(len(head))]
        return "\n".join("  ".join(c.rjust(w) for c, w in zip(row, widths)).rstrip() for row in lines)


def _node_names(table: AssignmentTable):
    if table.architecture == "fully-connected" and table.dims["n"] <= 26:
        return lambda i: string.ascii_uppercase[i]
    return str


def point_to_point_table(d: int) -> AssignmentTable:
    t = AssignmentTable("point-to-point", {"d": d}, d)
    for i in range(d):
        t.entries[(i, None, i)] = i
    return t


def coprime_table(d_s: int, d_r: int) -> AssignmentTable:
    t = AssignmentTable("p2mp-coprime", {"d_s": d_s, "d_r": d_r}, d_s * d_r)
    for s in range(d_s):
        for r in range(d_r):
            t.entries[(s, None, r)] = oam_coprime(s, r, d_s, d_r)
    return t


def general_table(d_s: int, d_r: int, architecture: str = "p2mp-general") -> AssignmentTable:
    t = AssignmentTable(architecture, {"d_s": d_s, "d_r": d_r}, d_s * d_r)
    for s in range(d_s):
        for r in range(d_r):
            t.entries[(s, None, r)] = oam_group(s, r, d_s)
    return t


def multigroup_table(d_s: int, d_r: int, groups: int | None = None) -> AssignmentTable:
    """d_s senders on a d_s-port MUX; group g gets a G^{d_r/d_s}_{d_s} on MUX output g."""
    groups = d_s if groups is None else groups
    per_group = d_r // d_s
    t = AssignmentTable("p2mp-multigroup", {"d_s": d_s, "d_r": d_r, "groups": groups}, d_r)
    for s in range(d_s):
        for g in range(groups):
            for r in range(per_group):
                t.entries[(s, g, r)] = oam_multigroup(s, g, r, d_s, d_r)
    return t


def multigroup_variant_table(d_s: int, d_r: int, groups: int | None = None) -> AssignmentTable:
    """d_s senders on a group multiplexer G^{d_s}_{d_r}; group g gets a d_r-port DEMUX."""
    groups = d_s if groups is None else groups
    band = d_s * d_r
    t = AssignmentTable("p2mp-multigroup-variant",
                        {"d_s": d_s, "d_r": d_r, "groups": groups}, band)
    for s in range(d_s):
        for g in range(groups):
            for r in range(d_r):
                t.entries[(s, g, r)] = oam_multigroup_variant(s, g, r, d_r, band)
    return t


def fully_connected_table(n: int) -> AssignmentTable:
    """Sender a reaches receiver b with label (b - a) mod n."""
    if n < 2:
        raise ValueError(f"a fully-connected network needs n >= 2, got {n}")
    t = AssignmentTable("fully-connected", {"n": n}, n)
    for a in range(n):
        for b in range(n):
            t.entries[(a, None, b)] = (b - a) % n
    return t


def assignment_table(architecture: str, **dims) -> AssignmentTable:
    if architecture == "point-to-point":
        return point_to_point_table(dims["d"])
    if architecture == "p2mp-coprime":
        return coprime_table(dims["d_s"], dims["d_r"])
    if architecture == "p2mp-general":
        return general_table(dims["d_s"], dims["d_r"])
    if architecture == "p2mp-multigroup":
        return multigroup_table(dims["d_s"], dims["d_r"], dims.get("groups"))
    if architecture == "p2mp-multigroup-variant":
        return multigroup_variant_table(dims["d_s"], dims["d_r"], dims.get("groups"))
    if architecture == "fully-connected":
        return fully_connected_table(dims["n"])
    if architecture == "ent-active":
        # the source occupies sender ports 0 and 1 of a general network
        return general_table(2, dims["d"], "ent-active")
    raise ValueError(f"no assignment table for architecture {architecture!r}")


# -- decoding ----------------------------------------------------------------

def decode(architecture: str, dims: dict, label: int, arrival_port=None):
    """Invert the assignment for a receiver.

    Injective architectures return one ``(sender, receiver)`` pair. The
    multigroup architectures reuse labels, so they return the set of
    ``(sender, group, receiver)`` triples, narrowed by ``arrival_port``
    (a ``(group, receiver)`` pair) when given. Fully-connected decoding needs
    the arrival port, since every node sees every label.
    """
    if architecture == "fully-connected":
        n = dims["n"]
        _check_range("label", label, n)
        if arrival_port is None:
            raise ValueError("fully-connected decoding needs the arrival port")
        return ((arrival_port - label) % n, arrival_port)
    if architecture in ("p2mp-multigroup", "p2mp-multigroup-variant"):
        table = assignment_table(architecture, **dims)
        _check_range("label", label, table.band)
        hits = {(s, g, r) for (s, g, r), l in table.entries.items() if l == label}
        if arrival_port is not None:
            hits = {h for h in hits if (h[1], h[2]) == tuple(arrival_port)}
        return hits
    table = assignment_table(architecture, **dims)
    _check_range("label", label, table.band)
    if architecture == "point-to-point":
        return (label, label)
    if architecture == "p2mp-coprime":
        return (label % dims["d_s"], label % dims["d_r"])
    d_s = 2 if architecture == "ent-active" else dims["d_s"]
    return (label % d_s, label // d_s)


# -- resources ---------------------------------------------------------------

class Component(NamedTuple):
    count: int
    kind: str  # "U" (sorter) or "SPP"
    dim: object  # int, or a symbolic string such as "d_s"

    def __str__(self):
        if self.kind == "SPP":
            return f"{self.count}x SPP(i)"
        return f"{self.count}x U_{self.dim}"


def resource_plan(architecture: str, **dims) -> list[Component]:
    """Bill of materials for one row of the resource-scaling table.

    Dimensions: point-to-point ``d_s, d_r``; p2mp-general, fully-connected,
    ent-active and ent-passive ``d``; p2mp-groups ``d_s, d_r``.
    """
    if architecture == "point-to-point":
        return [Component(1, "U", dims["d_s"]), Component(1, "U", dims["d_r"])]
    if architecture in ("p2mp-general", "ent-active"):
        d = dims["d"]
        if d % 2:
            raise ValueError(f"{architecture} uses d/2 two-port sorters; d={d} must be even")
        return [Component(1, "U", d), Component(d // 2 + 1, "U", 2)]
    if architecture == "p2mp-groups":
        return [Component(1, "U", dims["d_s"]), Component(dims["d_s"], "U", dims["d_r"])]
    if architecture == "fully-connected":
        return [Component(1, "U", dims["d"])]
    if architecture == "ent-passive":
        d = dims["d"]
        return [Component(3, "U", d), Component(2 * d, "SPP", None)]
    raise ValueError(f"unknown architecture {architecture!r}; expected one of {RESOURCE_ROWS}")


def resource_row(architecture: str, dims: dict) -> tuple[str, dict]:
    """Map a network architecture and its dims onto a resource-table row."""
    if architecture == "point-to-point":
        return "point-to-point", {"d_s": dims["d"], "d_r": dims["d"]}
    if architecture == "p2mp-general":
        return "p2mp-general", {"d": dims["d_s"] * dims["d_r"]}
    if architecture == "p2mp-multigroup":
        return "p2mp-groups", {"d_s": dims["d_s"], "d_r": dims["d_r"]}
    if architecture == "fully-connected":
        return "fully-connected", {"d": dims["n"]}
    if architecture == "ent-active":
        return "ent-active", {"d": 2 * dims["d"]}
    if architecture == "ent-passive":
        return "ent-passive", {"d": dims["d"]}
    raise ValueError(f"{architecture!r} has no row in the resource table")


def check_coprime(d_s: int, d_r: int) -> None:
    g = math.gcd(d_s, d_r)
    if g != 1:
        raise CoprimalityError(f"d_s={d_s} and d_r={d_r} are not coprime (gcd {g})")
