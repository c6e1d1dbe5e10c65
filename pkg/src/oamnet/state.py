"""Pure-state vectors over photonic degrees of freedom.

A layout is an ordered list of factors (``oam``, ``path``, ``pol``,
``local-path``), repeated once per photon. Amplitudes are stored flat using
mixed-radix encoding in layout order, most significant factor first, i.e.
plain C-order reshaping: photon 0's factors come before photon 1's, and
within a photon the factors keep the order they were declared in.

Factors are addressed by key. A bare label such as ``"oam"`` means photon 0;
``("oam", 1)`` addresses the second photon.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

LABELS = ("oam", "path", "pol", "local-path")
NORM_TOL = 1e-10
UNITARY_TOL = 1e-8

FactorKey = Union[str, tuple]


class LayoutError(ValueError):
    """Raised for malformed layouts, unknown factors or mismatched layouts."""


class AddressError(IndexError):
    """Raised when a basis address does not fit the layout."""


def _key(key: FactorKey) -> tuple[str, int]:
    if isinstance(key, str):
        return (key, 0)
    label, photon = key
    return (label, int(photon))


@dataclass(frozen=True)
class SubsystemLayout:
    """Ordered factors of one photon, repeated ``photons`` times."""

    factors: tuple[tuple[str, int], ...]
    photons: int = 1

    def __post_init__(self):
        factors = tuple((str(lab), int(dim)) for lab, dim in self.factors)
        object.__setattr__(self, "factors", factors)
        if self.photons not in (1, 2):
            raise LayoutError(f"photon count must be 1 or 2, got {self.photons}")
        if not factors:
            raise LayoutError("layout needs at least one factor")
        labels = [lab for lab, _ in factors]
        if len(set(labels)) != len(labels):
            raise LayoutError(f"duplicate factor labels in {labels}")
        for lab, dim in factors:
            if lab not in LABELS:
                raise LayoutError(f"unknown factor label {lab!r}")
            if dim < 1:
                raise LayoutError(f"factor {lab!r} has dimension {dim} < 1")

    @classmethod
    def of(cls, photons: int = 1, **dims: int) -> "SubsystemLayout":
        """Shorthand: ``SubsystemLayout.of(oam=3, path=3)``.

        ``local_path`` is accepted for the ``local-path`` label.
        """
        return cls(tuple((k.replace("_", "-"), v) for k, v in dims.items()), photons)

    @property
    def keys(self) -> tuple[tuple[str, int], ...]:
        return tuple((lab, p) for p in range(self.photons) for lab, _ in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _ in range(self.photons) for _, dim in self.factors)

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    def axis(self, key: FactorKey) -> int:
        k = _key(key)
        try:
            return self.keys.index(k)
        except ValueError:
            raise LayoutError(f"no factor {k} in layout {self.keys}") from None

    def dim(self, key: FactorKey) -> int:
        return self.dims[self.axis(key)]

    def flat_index(self, address: Sequence[int]) -> int:
        address = tuple(int(a) for a in address)
        if len(address) != len(self.dims):
            raise AddressError(f"address {address} has wrong length for dims {self.dims}")
        for a, d in zip(address, self.dims):
            if not 0 <= a < d:
                raise AddressError(f"address {address} out of range for dims {self.dims}")
        return int(np.ravel_multi_index(address, self.dims))

    def address(self, flat: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(flat, self.dims))


@dataclass(frozen=True)
class CompositeState:
    layout: SubsystemLayout
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != self.layout.size:
            raise LayoutError(
                f"{amps.size} amplitudes for a layout of dimension {self.layout.size}"
            )
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, layout: SubsystemLayout, amplitudes, normalize: bool = False):
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if normalize:
            amps = amps / np.linalg.norm(amps)
        return cls(layout, amps)

    @property
    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.layout.dims)

    @property
    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def amplitude(self, address: Sequence[int]) -> complex:
        return complex(self.amplitudes[self.layout.flat_index(address)])

    def __add__(self, other):
        raise TypeError("use superpose() to build superpositions")


def make_basis_state(layout: SubsystemLayout, address: Sequence[int]) -> CompositeState:
    amps = np.zeros(layout.size, dtype=complex)
    amps[layout.flat_index(address)] = 1.0
    return CompositeState(layout, amps)


def superpose(terms: Iterable[tuple[complex, CompositeState]]) -> CompositeState:
    """Normalized linear combination of states sharing one layout."""
    terms = list(terms)
    layout = terms[0][1].layout
    amps = np.zeros(layout.size, dtype=complex)
    for coeff, st in terms:
        if st.layout != layout:
            raise LayoutError("cannot superpose states with different layouts")
        amps += coeff * st.amplitudes
    return CompositeState.from_amplitudes(layout, amps, normalize=True)


def product_state(layout: SubsystemLayout, parts: Mapping[FactorKey, np.ndarray]) -> CompositeState:
    """Tensor product of per-factor vectors; factors not given start in |0>."""
    given = {_key(k): np.asarray(v, dtype=complex) for k, v in parts.items()}
    for k in given:
        layout.axis(k)
    vec = np.ones(1, dtype=complex)
    for k, d in zip(layout.keys, layout.dims):
        v = given.get(k)
        if v is None:
            v = np.zeros(d, dtype=complex)
            v[0] = 1.0
        if v.shape != (d,):
            raise LayoutError(f"vector for {k} has shape {v.shape}, expected ({d},)")
        vec = np.kron(vec, v)
    return CompositeState.from_amplitudes(layout, vec, normalize=True)


def check_unitary(matrix: np.ndarray, tol: float = UNITARY_TOL) -> None:
    m = np.asarray(matrix)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix must be square, got shape {m.shape}")
    dev = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
    if dev > tol:
        raise ValueError(f"matrix is not unitary (max |U^dag U - I| = {dev:.3g})")


def _targets(layout: SubsystemLayout, targets: Sequence[FactorKey]) -> list[int]:
    axes = [layout.axis(t) for t in targets]
    if len(set(axes)) != len(axes):
        raise LayoutError(f"repeated target factors {targets}")
    return axes


def apply_local(state: CompositeState, u, targets: Sequence[FactorKey] | None = None) -> CompositeState:
    """Apply ``u`` to the listed factors, identity elsewhere.

    ``u`` is an :class:`~oamnet.elements.ElementUnitary` (already validated,
    targets default to its footprint) or a raw square matrix, which is
    checked for unitarity first. Target order fixes the mixed-radix order of
    the matrix indices.
    """
    matrix = getattr(u, "matrix", None)
    if matrix is None:
        matrix = np.asarray(u, dtype=complex)
        check_unitary(matrix)
        if targets is None:
            raise LayoutError("targets are required for a raw matrix")
    elif targets is None:
        targets = u.footprint
    layout = state.layout
    axes = _targets(layout, targets)
    sub = [layout.dims[a] for a in axes]
    n = int(np.prod(sub))
    if matrix.shape != (n, n):
        raise LayoutError(
            f"matrix of shape {matrix.shape} does not match target dims {sub} ({n})"
        )
    t = np.moveaxis(state.tensor, axes, range(len(axes)))
    rest = t.shape[len(axes):]
    out = (matrix @ t.reshape(n, -1)).reshape(tuple(sub) + rest)
    out = np.moveaxis(out, range(len(axes)), axes)
    return CompositeState(layout, out.reshape(-1))


def joint_distribution(state: CompositeState, factors: Sequence[FactorKey]) -> np.ndarray:
    """Joint outcome probabilities of the listed factors, shaped by their dims."""
    layout = state.layout
    axes = _targets(layout, factors)
    probs = np.abs(state.tensor) ** 2
    others = tuple(a for a in range(len(layout.dims)) if a not in axes)
    marg = probs.sum(axis=others)
    # sum keeps remaining axes in layout order; reorder to the requested order
    order = np.argsort(np.argsort(axes))
    return np.transpose(marg, order) if len(axes) > 1 else marg


def measure_factor(state: CompositeState, factor: FactorKey) -> np.ndarray:
    """Marginal distribution of one factor."""
    return joint_distribution(state, [factor])


def project(state: CompositeState, outcomes: Mapping[FactorKey, int]) -> tuple[float, CompositeState | None]:
    """Project onto fixed factor values; returns (probability, collapsed state)."""
    layout = state.layout
    t = state.tensor
    index = [slice(None)] * len(layout.dims)
    for key, value in outcomes.items():
        ax = layout.axis(key)
        if not 0 <= value < layout.dims[ax]:
            raise AddressError(f"outcome {value} out of range for {key}")
        index[ax] = slice(value, value + 1)
    mask = np.zeros_like(t)
    mask[tuple(index)] = t[tuple(index)]
    prob = float(np.vdot(mask, mask).real)
    if prob <= 0.0:
        return 0.0, None
    return prob, CompositeState(layout, mask.reshape(-1) / np.sqrt(prob))


def sample_factor(state: CompositeState, factor: FactorKey, rng: np.random.Generator):
    """Sample one outcome of ``factor``; returns (outcome, collapsed state)."""
    probs = measure_factor(state, factor)
    outcome = int(rng.choice(len(probs), p=probs / probs.sum()))
    _, post = project(state, {factor: outcome})
    return outcome, post


def reduced_density_matrix(state: CompositeState, keep: Sequence[FactorKey]) -> np.ndarray:
    """Partial trace onto ``keep`` (in the given order)."""
    layout = state.layout
    axes = _targets(layout, keep)
    t = np.moveaxis(state.tensor, axes, range(len(axes)))
    n = int(np.prod([layout.dims[a] for a in axes]))
    m = t.reshape(n, -1)
    return m @ m.conj().T


def fidelity(a: CompositeState, b: CompositeState) -> float:
    if a.layout != b.layout:
        raise LayoutError("fidelity needs identical layouts")
    return float(min(1.0, abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2))
