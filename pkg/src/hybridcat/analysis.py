"""State metrics: fidelity, negativity, Wigner functions, quadrature
distributions, parity, and hybrid-basis qubit extraction.

Conventions: x = (a + a^dag)/sqrt(2), p = (a - a^dag)/(i sqrt(2)), hbar = 1,
vacuum quadrature variance 1/2.  The Wigner function is normalized so that
its (x, p) integral is 1 and the vacuum peaks at 1/pi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from . import fock, states
from .errors import BadPartition, MultiModeInput, SpaceMismatch, UnknownMode
from .fock import DensityMatrix, H, V, HilbertSpace, StateVector


@dataclass(frozen=True)
class WignerGrid:
    """W sampled on a rectangular grid; values[i, j] = W(x_axis[j], p_axis[i])."""

    x_axis: np.ndarray
    p_axis: np.ndarray
    values: np.ndarray

    def integral(self) -> float:
        return float(np.trapezoid(np.trapezoid(self.values, self.x_axis, axis=1),
                                  self.p_axis))


@dataclass(frozen=True)
class HybridQubitDensity:
    """4x4 density in the ordered basis {|1H>|Cat+_H>, |1H>|Cat-_V>,
    |1V>|Cat+_H>, |1V>|Cat-_V>} plus the probability weight outside it."""

    matrix: np.ndarray
    leakage: float


def fidelity(a, b) -> float:
    """|<a|b>|^2 for two pure states, <psi|rho|psi> for pure vs mixed."""
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        raise SpaceMismatch("fidelity needs at least one pure argument")
    if isinstance(b, StateVector) and isinstance(a, DensityMatrix):
        a, b = b, a
    if a.space != b.space:
        raise SpaceMismatch("states live on different spaces")
    if isinstance(b, StateVector):
        return float(abs(np.vdot(a.amps, b.amps)) ** 2)
    return float(np.vdot(a.amps, b.elements @ a.amps).real)


def _split_positions(space: HilbertSpace, side_a):
    side_a = [tuple(k) for k in side_a]
    if not side_a:
        raise BadPartition("side A of the partition is empty")
    pos_a = []
    for k in side_a:
        p = space.mode_position(k)
        if p in pos_a:
            raise BadPartition(f"mode {k} listed twice")
        pos_a.append(p)
    pos_b = [i for i in range(len(space.modes)) if i not in set(pos_a)]
    if not pos_b:
        raise BadPartition("side B of the partition is empty")
    return pos_a, pos_b


def negativity(rho, side_a) -> float:
    """Entanglement negativity (||rho^T_A||_1 - 1)/2 across the bipartition.

    For a pure StateVector this reduces to the Schmidt-coefficient formula
    ((sum_i s_i)^2 - 1)/2, computed by SVD; for a DensityMatrix the partial
    transpose is diagonalized exactly.
    """
    space = rho.space
    pos_a, pos_b = _split_positions(space, side_a)
    da = int(np.prod([space.dims[i] for i in pos_a]))
    db = space.total_dim // da

    if isinstance(rho, StateVector):
        m = np.transpose(rho.tensor_view(), pos_a + pos_b).reshape(da, db)
        s = np.linalg.svd(m, compute_uv=False)
        return float((s.sum() ** 2 - 1.0) / 2.0)

    n = len(space.modes)
    t = rho.elements.reshape(space.dims + space.dims)
    perm = list(range(2 * n))
    for i in pos_a:  # transpose bra/ket on side A
        perm[i], perm[n + i] = perm[n + i], perm[i]
    pt = np.transpose(t, perm).reshape(space.total_dim, space.total_dim)
    eigs = np.linalg.eigvalsh(pt)
    return float((np.abs(eigs).sum() - 1.0) / 2.0)


def _single_mode_rho(rho_mode):
    if isinstance(rho_mode, StateVector):
        rho_mode = rho_mode.to_density_matrix()
    if len(rho_mode.space.modes) != 1:
        raise MultiModeInput("reduce to a single mode first (partial_trace)")
    return rho_mode


def _displacement_columns(betas, dim):
    """D(beta)[m, n] for an array of displacements; shape (len(betas), dim, dim)."""
    betas = np.asarray(betas, dtype=complex)
    absq = np.abs(betas) ** 2
    env = np.exp(-absq / 2.0)
    out = np.zeros(betas.shape + (dim, dim), dtype=complex)
    for m in range(dim):
        for n in range(dim):
            k, d = min(m, n), abs(m - n)
            pref = np.exp(0.5 * (gammaln(k + 1) - gammaln(k + d + 1)))
            lag = eval_genlaguerre(k, d, absq)
            if m >= n:
                out[..., m, n] = pref * betas ** d * env * lag
            else:
                out[..., m, n] = pref * (-betas.conj()) ** d * env * lag
    return out


def default_grid(alpha, points: int = 201):
    """Symmetric grid covering the cat lobes with >= 4 sigma margin."""
    ext = abs(alpha) + 4.0
    ax = np.linspace(-ext, ext, points)
    return ax, ax.copy()


def wigner(rho_mode, x_axis=None, p_axis=None, points: int = 201) -> WignerGrid:
    """Displaced-parity Wigner function on a grid.

    W(x, p) = (1/pi) Tr[rho D(beta) Pi D(beta)^dag], beta = (x + i p)/sqrt(2);
    evaluated through the exact dyad identity
    Tr[|m><n| D(beta) Pi D(beta)^dag] = (-1)^m <n|D(2 beta)|m>,
    so truncation never leaks into the trace.
    """
    rho_mode = _single_mode_rho(rho_mode)
    dim = rho_mode.space.total_dim
    if x_axis is None or p_axis is None:
        # heuristic extent from the occupied levels
        nbar = float(np.real(np.diag(rho_mode.elements) @ np.arange(dim)))
        x_axis, p_axis = default_grid(np.sqrt(max(nbar, 0.0)), points)
    x_axis = np.asarray(x_axis, dtype=float)
    p_axis = np.asarray(p_axis, dtype=float)
    weighted = rho_mode.elements * ((-1.0) ** np.arange(dim))[:, None]

    xg, pg = np.meshgrid(x_axis, p_axis)
    betas = ((xg + 1j * pg) / np.sqrt(2.0)).reshape(-1)
    chunk = max(1, 4_000_000 // (dim * dim))
    out = np.empty(betas.size)
    for lo in range(0, betas.size, chunk):
        d2 = _displacement_columns(2.0 * betas[lo:lo + chunk], dim)
        out[lo:lo + chunk] = np.einsum("mn,gnm->g", weighted, d2).real
    return WignerGrid(x_axis, p_axis, out.reshape(pg.shape) / np.pi)


def wigner_negative_volume(grid: WignerGrid) -> float:
    """Integral of max(-W, 0) over the grid by trapezoid quadrature."""
    neg = np.maximum(-grid.values, 0.0)
    return float(np.trapezoid(np.trapezoid(neg, grid.x_axis, axis=1), grid.p_axis))


def _hermite_functions(x, dim):
    """Orthonormal Hermite functions phi_n(x) = <x|n> by stable recurrence."""
    x = np.asarray(x, dtype=float)
    phi = np.empty((x.size, dim))
    phi[:, 0] = np.pi ** -0.25 * np.exp(-x * x / 2.0)
    if dim > 1:
        phi[:, 1] = np.sqrt(2.0) * x * phi[:, 0]
    for n in range(2, dim):
        phi[:, n] = np.sqrt(2.0 / n) * x * phi[:, n - 1] \
            - np.sqrt((n - 1) / n) * phi[:, n - 2]
    return phi


def quadrature_distribution(rho_mode, theta, x_grid) -> np.ndarray:
    """Homodyne distribution p(x | theta) = <x_theta| rho |x_theta>."""
    rho_mode = _single_mode_rho(rho_mode)
    dim = rho_mode.space.total_dim
    x_grid = np.asarray(x_grid, dtype=float)
    phi = _hermite_functions(x_grid, dim)
    u = phi * np.exp(1j * theta * np.arange(dim))[None, :]
    return np.einsum("xm,mn,xn->x", u.conj(), rho_mode.elements, u).real


def parity_expectation(state_or_rho, mode) -> float:
    """<(-1)^n> on the addressed mode."""
    reduced = fock.partial_trace(state_or_rho, [mode])
    dim = reduced.space.total_dim
    return float(np.real(np.diag(reduced.elements) @ (-1.0) ** np.arange(dim)))


def hybrid_basis(space: HilbertSpace, dv_spatial, cv_spatial, alpha):
    """The four kets {|1H>|Cat+_H>, |1H>|Cat-_V>, |1V>|Cat+_H>, |1V>|Cat-_V>}."""
    kets = []
    for pol in (H, V):
        adag = fock.creation(space, (dv_spatial, pol))
        for cv_pol, sign in ((H, states.PLUS), (V, states.MINUS)):
            cat = states.cat_state(space, (cv_spatial, cv_pol), alpha, sign)
            kets.append(fock.apply(adag, cat))  # dv mode was vacuum: a^dag|0> = |1>
    return kets


def hybrid_qubit_density(rho, dv_spatial, cv_spatial, alpha) -> HybridQubitDensity:
    """Overlap matrix of rho onto the ordered hybrid qubit-pair basis."""
    space = rho.space
    for key in [(dv_spatial, H), (dv_spatial, V), (cv_spatial, H), (cv_spatial, V)]:
        if not space.has_mode(key):
            raise UnknownMode(f"missing mode {key}")
    kets = hybrid_basis(space, dv_spatial, cv_spatial, alpha)
    basis = np.stack([k.amps for k in kets])  # (4, dim)
    if isinstance(rho, StateVector):
        overlaps = basis.conj() @ rho.amps
        matrix = np.outer(overlaps, overlaps.conj())
    else:
        matrix = basis.conj() @ rho.elements @ basis.T
    leakage = 1.0 - float(np.trace(matrix).real)
    return HybridQubitDensity(matrix, leakage)


def qubit_pair_negativity(matrix4) -> float:
    """Negativity of a 4x4 two-qubit density matrix across its first|second cut."""
    t = np.asarray(matrix4, dtype=complex).reshape(2, 2, 2, 2)
    pt = np.transpose(t, (2, 1, 0, 3)).reshape(4, 4)
    eigs = np.linalg.eigvalsh(pt)
    return float((np.abs(eigs).sum() - np.trace(matrix4).real) / 2.0)
