"""Truncated multimode Fock space: spaces, states, operators, composition, reduction.

A mode is one bosonic degree of freedom labelled by (spatial, polarization).
Basis ordering is row-major over the mode sequence with the last mode varying
fastest, so basis index = sum_k n_k * stride_k with stride_k = prod(dims[k+1:]).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import (
    CutoffExceeded,
    CutoffTooSmall,
    DuplicateMode,
    OverlappingModes,
    SpaceMismatch,
    UnknownMode,
    ZeroCutoff,
)

H = "H"
V = "V"
POLARIZATIONS = (H, V)


@dataclass(frozen=True)
class ModeDescriptor:
    spatial: str
    polarization: str
    cutoff: int

    @property
    def key(self):
        return (self.spatial, self.polarization)

    @property
    def dim(self):
        return self.cutoff + 1


class HilbertSpace:
    """Ordered registry of modes with per-mode Fock cutoffs.

    Immutable after construction; use :func:`build_space`.
    """

    def __init__(self, modes):
        self.modes = tuple(modes)
        self.dims = tuple(m.dim for m in self.modes)
        self.total_dim = int(np.prod(self.dims, dtype=np.int64))
        strides = []
        acc = 1
        for d in reversed(self.dims):
            strides.append(acc)
            acc *= d
        self.strides = tuple(reversed(strides))
        self._index = {m.key: i for i, m in enumerate(self.modes)}

    def __eq__(self, other):
        return isinstance(other, HilbertSpace) and self.modes == other.modes

    def __hash__(self):
        return hash(self.modes)

    def __repr__(self):
        inner = ", ".join(f"{s}_{p}:{c}" for (s, p, c) in
                          ((m.spatial, m.polarization, m.cutoff) for m in self.modes))
        return f"HilbertSpace({inner}, dim={self.total_dim})"

    def mode_position(self, key) -> int:
        try:
            return self._index[tuple(key)]
        except KeyError:
            raise UnknownMode(f"mode {key!r} not in space") from None

    def has_mode(self, key) -> bool:
        return tuple(key) in self._index

    def descriptor(self, key) -> ModeDescriptor:
        return self.modes[self.mode_position(key)]

    def spatial_modes(self, spatial):
        """Mode keys sharing a spatial label, in registry order."""
        keys = [m.key for m in self.modes if m.spatial == spatial]
        if not keys:
            raise UnknownMode(f"no modes with spatial label {spatial!r}")
        return keys

    def basis_index(self, occupations) -> int:
        """Flat index of a product basis state given per-mode photon counts."""
        idx = 0
        for n, d, s in zip(occupations, self.dims, self.strides):
            if not 0 <= n < d:
                raise ValueError(f"occupation {n} out of range for dim {d}")
            idx += n * s
        return idx

    def occupations(self, index):
        """Inverse of basis_index."""
        out = []
        for d, s in zip(self.dims, self.strides):
            out.append((index // s) % d)
        return tuple(out)


def build_space(mode_specs) -> HilbertSpace:
    """Create a space from (spatial, polarization, cutoff) triples, in order."""
    if not mode_specs:
        raise ZeroCutoff("space needs at least one mode")
    seen = set()
    modes = []
    for spatial, pol, cutoff in mode_specs:
        if pol not in POLARIZATIONS:
            raise UnknownMode(f"polarization must be one of {POLARIZATIONS}, got {pol!r}")
        key = (spatial, pol)
        if key in seen:
            raise DuplicateMode(f"duplicate mode {key!r}")
        seen.add(key)
        if cutoff < 1:
            raise ZeroCutoff(f"mode {key!r}: cutoff must be >= 1, got {cutoff}")
        modes.append(ModeDescriptor(spatial, pol, int(cutoff)))
    return HilbertSpace(modes)


class StateVector:
    """Dense complex amplitudes over the multimode Fock basis of a space."""

    def __init__(self, space: HilbertSpace, amps):
        amps = np.asarray(amps, dtype=complex)
        if amps.shape != (space.total_dim,):
            raise SpaceMismatch(
                f"amplitude length {amps.shape} != total_dim {space.total_dim}")
        amps = amps.copy()
        amps.setflags(write=False)
        self.space = space
        self.amps = amps

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0.0:
            raise ZeroDivisionError("cannot normalize a zero state")
        return StateVector(self.space, self.amps / n)

    def tensor_view(self):
        """Read-only view of the amplitudes reshaped to per-mode axes."""
        return self.amps.reshape(self.space.dims)

    def to_density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(self.space, np.outer(self.amps, self.amps.conj()))

    def __repr__(self):
        return f"StateVector(dim={self.space.total_dim}, norm={self.norm():.6g})"


class DensityMatrix:
    """Hermitian matrix over the same basis, for mixed and conditional states."""

    def __init__(self, space: HilbertSpace, elements):
        elements = np.asarray(elements, dtype=complex)
        if elements.shape != (space.total_dim, space.total_dim):
            raise SpaceMismatch(
                f"matrix shape {elements.shape} != ({space.total_dim},)*2")
        elements = elements.copy()
        elements.setflags(write=False)
        self.space = space
        self.elements = elements

    def trace(self) -> float:
        return float(np.trace(self.elements).real)

    def validate(self, tol=1e-9):
        """Check hermiticity, unit trace and spectral positivity."""
        herm = np.max(np.abs(self.elements - self.elements.conj().T))
        if herm > 1e-10:
            raise ValueError(f"not Hermitian: deviation {herm:.3e}")
        tr = self.trace()
        if abs(tr - 1.0) > 1e-10:
            raise ValueError(f"trace {tr} != 1")
        lo = np.linalg.eigvalsh(self.elements).min()
        if lo < -tol:
            raise ValueError(f"negative eigenvalue {lo:.3e}")

    def __repr__(self):
        return f"DensityMatrix(dim={self.space.total_dim}, trace={self.trace():.6g})"


class SparseOperator:
    """Sparse complex matrix acting on a HilbertSpace."""

    def __init__(self, space: HilbertSpace, entries):
        entries = sp.csr_matrix(entries, dtype=complex)
        if entries.shape != (space.total_dim, space.total_dim):
            raise SpaceMismatch(
                f"operator shape {entries.shape} != ({space.total_dim},)*2")
        self.space = space
        self.entries = entries

    def adjoint(self) -> "SparseOperator":
        return SparseOperator(self.space, self.entries.conj().T.tocsr())

    def is_unitary(self, tol=1e-10) -> bool:
        d = self.space.total_dim
        delta = (self.entries.conj().T @ self.entries) - sp.identity(d, dtype=complex)
        return abs(delta).max() <= tol if delta.nnz else True

    def __matmul__(self, other):
        if isinstance(other, SparseOperator):
            if other.space != self.space:
                raise SpaceMismatch("operator spaces differ")
            return SparseOperator(self.space, self.entries @ other.entries)
        return NotImplemented

    def __repr__(self):
        return f"SparseOperator(dim={self.space.total_dim}, nnz={self.entries.nnz})"


def identity(space: HilbertSpace) -> SparseOperator:
    return SparseOperator(space, sp.identity(space.total_dim, dtype=complex, format="csr"))


def _ladder_matrix(dim: int):
    # single-mode annihilation: <n-1|a|n> = sqrt(n)
    return sp.diags(np.sqrt(np.arange(1, dim)), offsets=1, dtype=complex, format="csr")


def single_mode_operator(space: HilbertSpace, mode, small) -> SparseOperator:
    """Embed a (dim x dim) matrix acting on one mode, identity elsewhere."""
    pos = space.mode_position(mode)
    op = None
    for i, d in enumerate(space.dims):
        block = sp.csr_matrix(small) if i == pos else sp.identity(d, dtype=complex)
        op = block if op is None else sp.kron(op, block, format="csr")
    return SparseOperator(space, op)


def annihilation(space: HilbertSpace, mode) -> SparseOperator:
    """a on the addressed mode: a|n> = sqrt(n)|n-1>, identity elsewhere."""
    return single_mode_operator(space, mode, _ladder_matrix(space.dims[space.mode_position(mode)]))


def creation(space: HilbertSpace, mode) -> SparseOperator:
    return annihilation(space, mode).adjoint()


def number_operator(space: HilbertSpace, mode) -> SparseOperator:
    d = space.dims[space.mode_position(mode)]
    return single_mode_operator(space, mode, sp.diags(np.arange(d, dtype=float), dtype=complex))


def apply(op: SparseOperator, state: StateVector) -> StateVector:
    """Matrix-vector product; no implicit renormalization."""
    if op.space != state.space:
        raise SpaceMismatch("operator and state live on different spaces")
    return StateVector(state.space, op.entries @ state.amps)


def tensor(s1: StateVector, s2: StateVector) -> StateVector:
    """Product state on the concatenated space (mode label sets must be disjoint)."""
    overlap = {m.key for m in s1.space.modes} & {m.key for m in s2.space.modes}
    if overlap:
        raise OverlappingModes(f"shared mode labels: {sorted(overlap)}")
    space = HilbertSpace(s1.space.modes + s2.space.modes)
    return StateVector(space, np.kron(s1.amps, s2.amps))


def inner(a: StateVector, b: StateVector) -> complex:
    """<a|b>, conjugate-linear in the first argument."""
    if a.space != b.space:
        raise SpaceMismatch("states live on different spaces")
    return complex(np.vdot(a.amps, b.amps))


def _partition_positions(space: HilbertSpace, keep):
    keep_pos = [space.mode_position(k) for k in keep]
    if len(set(keep_pos)) != len(keep_pos):
        raise DuplicateMode("repeated mode in keep list")
    drop_pos = [i for i in range(len(space.modes)) if i not in set(keep_pos)]
    return keep_pos, drop_pos


def partial_trace(rho, keep) -> DensityMatrix:
    """Reduced density matrix on the kept modes (order = keep order).

    Accepts a DensityMatrix or a pure StateVector; for pure inputs the
    reduction is computed as M M^dagger without forming the full matrix.
    """
    keep = [tuple(k) for k in keep]
    if not keep:
        raise UnknownMode("keep list must be nonempty")
    space = rho.space
    keep_pos, drop_pos = _partition_positions(space, keep)
    keep_dims = [space.dims[i] for i in keep_pos]
    new_space = HilbertSpace([space.modes[i] for i in keep_pos])

    if isinstance(rho, StateVector):
        t = rho.tensor_view()
        m = np.transpose(t, keep_pos + drop_pos).reshape(int(np.prod(keep_dims)), -1)
        return DensityMatrix(new_space, m @ m.conj().T)

    n = len(space.modes)
    t = rho.elements.reshape(space.dims + space.dims)
    perm = keep_pos + drop_pos + [n + i for i in keep_pos] + [n + i for i in drop_pos]
    dk = int(np.prod(keep_dims))
    dd = space.total_dim // dk
    t = np.transpose(t, perm).reshape(dk, dd, dk, dd)
    return DensityMatrix(new_space, np.einsum("atbt->ab", t))


def remove_modes(state: StateVector, projected: dict) -> StateVector:
    """Project listed modes onto definite photon numbers and drop them.

    Returns the (unnormalized) state on the remaining modes.
    """
    space = state.space
    items = [(space.mode_position(k), n) for k, n in projected.items()]
    sl = [slice(None)] * len(space.modes)
    for pos, n in items:
        if not 0 <= n < space.dims[pos]:
            raise CutoffExceeded(f"projection onto n={n} exceeds mode dim {space.dims[pos]}")
        sl[pos] = n
    remaining = [m for i, m in enumerate(space.modes) if i not in {p for p, _ in items}]
    new_space = HilbertSpace(remaining)
    amps = state.tensor_view()[tuple(sl)].reshape(-1)
    return StateVector(new_space, amps)


def reorder_modes(state: StateVector, keys) -> StateVector:
    """Permute the mode sequence to the given complete key order."""
    keys = [tuple(k) for k in keys]
    if sorted(keys) != sorted(m.key for m in state.space.modes):
        raise UnknownMode("reorder needs a permutation of the existing mode keys")
    perm = [state.space.mode_position(k) for k in keys]
    new_space = HilbertSpace([state.space.modes[p] for p in perm])
    amps = np.transpose(state.tensor_view(), perm).reshape(-1)
    return StateVector(new_space, amps)


def relabel_spatials(state: StateVector, mapping: dict) -> StateVector:
    """Rename spatial labels (e.g. reuse a generated state as a protocol resource)."""
    modes = []
    for m in state.space.modes:
        spatial = mapping.get(m.spatial, m.spatial)
        modes.append(ModeDescriptor(spatial, m.polarization, m.cutoff))
    return StateVector(HilbertSpace(modes), state.amps)


def restrict_cutoffs(state: StateVector, new_cutoffs: dict, tol=1e-12) -> StateVector:
    """Lower per-mode cutoffs, verifying the dropped weight is below tol."""
    space = state.space
    t = state.tensor_view()
    sl = []
    modes = []
    for m in space.modes:
        c = new_cutoffs.get(m.key, m.cutoff)
        if c > m.cutoff:
            raise ValueError(f"cannot raise cutoff of {m.key} from {m.cutoff} to {c}")
        sl.append(slice(0, c + 1))
        modes.append(ModeDescriptor(m.spatial, m.polarization, c))
    kept = t[tuple(sl)]
    dropped = float(np.linalg.norm(state.amps) ** 2 - np.linalg.norm(kept) ** 2)
    if dropped > tol:
        raise CutoffTooSmall(f"restriction would drop probability {dropped:.3e} > {tol}")
    return StateVector(HilbertSpace(modes), kept.reshape(-1))


def embed_pair_operator(space: HilbertSpace, mode_a, mode_b, pair_matrix) -> SparseOperator:
    """Lift an operator on the (mode_a, mode_b) factor to the full space.

    pair_matrix is (da*db) x (da*db) over the basis |n_a, n_b> with n_b fastest.
    """
    pa, pb = space.mode_position(mode_a), space.mode_position(mode_b)
    if pa == pb:
        raise DuplicateMode("pair must consist of two distinct modes")
    da, db = space.dims[pa], space.dims[pb]
    sa, sb = space.strides[pa], space.strides[pb]

    # flat offsets contributed by the pair occupation (i_a, i_b)
    pair_offsets = (np.arange(da)[:, None] * sa + np.arange(db)[None, :] * sb).reshape(-1)

    # flat offsets contributed by every joint occupation of the remaining modes
    rest = np.zeros(1, dtype=np.int64)
    for i, (d, s) in enumerate(zip(space.dims, space.strides)):
        if i in (pa, pb):
            continue
        rest = (rest[:, None] + (np.arange(d, dtype=np.int64) * s)[None, :]).reshape(-1)

    pm = sp.coo_matrix(pair_matrix)
    rows = pair_offsets[pm.row][:, None] + rest[None, :]
    cols = pair_offsets[pm.col][:, None] + rest[None, :]
    data = np.broadcast_to(pm.data[:, None], rows.shape)
    full = sp.coo_matrix(
        (data.reshape(-1), (rows.reshape(-1), cols.reshape(-1))),
        shape=(space.total_dim, space.total_dim),
    )
    return SparseOperator(space, full.tocsr())
