"""Linear-optical elements and loss.

Every passive element here is a product of two-mode mixers.  A mixer with a
2x2 unitary J maps creation operators as a_k^dag -> sum_j J[j,k] a_j^dag; its
Fock-space unitary is exp(sum_pq C[p,q] a_p^dag a_q) with e^C = J, built by
dense exponentiation on the two-mode factor and embedded sparsely.  All mixers
conserve the pair's total photon number, which we enforce exactly to strip
numerical fuzz from the exponential.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm, logm
from scipy.special import gammaln

from . import fock
from .errors import BadEta, BadReflectivity, OutputNotVacuum, TapNotVacuum, UnknownMode
from .fock import (
    DensityMatrix,
    H,
    V,
    HilbertSpace,
    SparseOperator,
    StateVector,
    annihilation,
    creation,
    embed_pair_operator,
)

FIRST_ORDER = "first_order"
EXACT_BS = "exact_bs"


@dataclass(frozen=True)
class TapResult:
    state: StateVector
    kept_spatial: str
    tap_spatial: str
    order: str


def _pair_unitary(da: int, db: int, jones) -> np.ndarray:
    """exp(sum C_pq a_p^dag a_q) on the |n_a, n_b> basis (n_b fastest)."""
    jones = np.asarray(jones, dtype=complex)
    c = logm(jones)
    c = 0.5 * (c - c.conj().T)  # anti-Hermitianize against logm roundoff
    a1 = np.kron(np.diag(np.sqrt(np.arange(1, da)), k=1), np.eye(db))
    a2 = np.kron(np.eye(da), np.diag(np.sqrt(np.arange(1, db)), k=1))
    ops = (a1, a2)
    gen = sum(c[p, q] * ops[p].conj().T @ ops[q] for p in range(2) for q in range(2))
    u = expm(gen)
    # zero out entries that would violate pair photon-number conservation
    n_tot = (np.arange(da)[:, None] + np.arange(db)[None, :]).reshape(-1)
    mask = n_tot[:, None] == n_tot[None, :]
    u[~mask] = 0.0
    u[np.abs(u) < 1e-15] = 0.0
    return u


def two_mode_mixer(space: HilbertSpace, mode_a, mode_b, jones) -> SparseOperator:
    """Unitary implementing a 2x2 creation-operator mixing of two modes."""
    da = space.descriptor(mode_a).dim
    db = space.descriptor(mode_b).dim
    return embed_pair_operator(space, mode_a, mode_b, _pair_unitary(da, db, jones))


def beam_splitter(space: HilbertSpace, spatial1, spatial2, r) -> SparseOperator:
    """Polarization-preserving beam splitter between two spatial labels.

    Amplitude reflectivity r, transmissivity t = sqrt(1-r^2); convention
    b1' = t b1 + r b2, b2' = -r b1 + t b2, identically on the H and V pairs.
    """
    if not 0.0 <= r <= 1.0:
        raise BadReflectivity(f"reflectivity must be in [0, 1], got {r}")
    t = np.sqrt(1.0 - r * r)
    jones = np.array([[t, r], [-r, t]])
    pols1 = {p for (s, p) in (m.key for m in space.modes) if s == spatial1}
    pols2 = {p for (s, p) in (m.key for m in space.modes) if s == spatial2}
    if not pols1 or not pols2:
        raise UnknownMode(f"missing spatial label {spatial1!r} or {spatial2!r}")
    if pols1 != pols2:
        raise UnknownMode(f"polarization sets differ: {pols1} vs {pols2}")
    op = None
    for pol in sorted(pols1):
        mixer = two_mode_mixer(space, (spatial1, pol), (spatial2, pol), jones)
        op = mixer if op is None else op @ mixer
    return op


def half_wave_plate(space: HilbertSpace, spatial, theta_deg) -> SparseOperator:
    """Half-wave plate at angle theta (degrees): Jones diag(1,-1) rotated by 2*theta.

    At 45 degrees it exchanges the H and V mode contents.
    """
    keys = space.spatial_modes(spatial)
    if len(keys) != 2:
        raise UnknownMode(f"spatial {spatial!r} must carry exactly H and V modes")
    th = np.deg2rad(theta_deg)
    c2, s2 = np.cos(2 * th), np.sin(2 * th)
    jones = np.array([[c2, s2], [s2, -c2]])
    return two_mode_mixer(space, (spatial, H), (spatial, V), jones)


def pbs(space: HilbertSpace, spatial_in, spatial_out_h, spatial_out_v) -> SparseOperator:
    """Polarizing routing: H content of the input swaps with the H mode of
    out_h, V content with the V mode of out_v.  Pure basis permutation."""
    swaps = [((spatial_in, H), (spatial_out_h, H)),
             ((spatial_in, V), (spatial_out_v, V))]
    op = None
    for a, b in swaps:
        da, db = space.descriptor(a).dim, space.descriptor(b).dim
        if da != db:
            raise UnknownMode(f"swap {a} <-> {b} needs equal cutoffs, got {da-1} vs {db-1}")
        perm = np.zeros((da * db, da * db))
        for i in range(da):
            for j in range(db):
                perm[j * db + i, i * db + j] = 1.0
        swap = embed_pair_operator(space, a, b, perm)
        op = swap if op is None else op @ swap
    return op


def require_vacuum(state: StateVector, spatial, error=OutputNotVacuum, tol=1e-12):
    """Raise unless the given spatial label carries no photons."""
    for key in state.space.spatial_modes(spatial):
        n_op = fock.number_operator(state.space, key)
        mean = np.vdot(state.amps, n_op.entries @ state.amps).real
        if mean > tol:
            raise error(f"spatial {spatial!r} not in vacuum: <n_{key}> = {mean:.3e}")


def weak_tap(state: StateVector, spatial_in, spatial_tap, r, order=EXACT_BS) -> TapResult:
    """Divert a small amplitude from one spatial channel into a vacuum tap.

    FIRST_ORDER applies the non-unitary 1 + r * sum_pol (a_in a_tap^dag); the
    result is deliberately left unnormalized.  EXACT_BS applies the physical
    beam splitter with reflectivity r (tap listed first so the transfer term
    carries +r).
    """
    if not 0.0 <= r < 1.0:
        raise BadReflectivity(f"tap reflectivity must be in [0, 1), got {r}")
    require_vacuum(state, spatial_tap, error=TapNotVacuum)
    space = state.space
    if order == FIRST_ORDER:
        op = sp.identity(space.total_dim, dtype=complex, format="csr")
        for pol in (H, V):
            a_in = annihilation(space, (spatial_in, pol)).entries
            adag_tap = creation(space, (spatial_tap, pol)).entries
            op = op + r * (adag_tap @ a_in)
        out = StateVector(space, op @ state.amps)
    elif order == EXACT_BS:
        bs = beam_splitter(space, spatial_tap, spatial_in, r)
        out = fock.apply(bs, state)
    else:
        raise ValueError(f"unknown tap order {order!r}")
    return TapResult(out, spatial_in, spatial_tap, order)


def first_order_tap_operator(space: HilbertSpace, spatial_in, spatial_tap, r) -> SparseOperator:
    """The operator 1 + r * sum_pol (a_in a_tap^dag), for algebra checks."""
    op = sp.identity(space.total_dim, dtype=complex, format="csr")
    for pol in (H, V):
        a_in = annihilation(space, (spatial_in, pol)).entries
        adag_tap = creation(space, (spatial_tap, pol)).entries
        op = op + r * (adag_tap @ a_in)
    return SparseOperator(space, op)


def loss_kraus(dim: int, eta: float):
    """Kraus family for transmission eta on one mode: K_k loses k photons.

    K_k|n> = sqrt(C(n,k)) eta^{(n-k)/2} (1-eta)^{k/2} |n-k>; identical to a
    beam splitter of transmissivity sqrt(eta) into a vacuum ancilla that is
    then traced out.
    """
    if not 0.0 <= eta <= 1.0:
        raise BadEta(f"transmission must be in [0, 1], got {eta}")
    n = np.arange(dim)
    ops = []
    for k in range(dim):
        m = n[k:]  # source levels; note 0.0**0 == 1.0 covers the eta edge cases
        log_binom = gammaln(m + 1) - gammaln(k + 1) - gammaln(m - k + 1)
        amp = np.exp(0.5 * log_binom) * eta ** ((m - k) / 2.0) * (1.0 - eta) ** (k / 2.0)
        ops.append(sp.diags(amp, offsets=k, shape=(dim, dim), dtype=complex, format="csr"))
    return ops


def loss_channel(rho: DensityMatrix, mode, eta: float) -> DensityMatrix:
    """Pure-loss channel with transmission eta on one mode; trace preserving."""
    if not 0.0 <= eta <= 1.0:
        raise BadEta(f"transmission must be in [0, 1], got {eta}")
    space = rho.space
    dim = space.descriptor(mode).dim
    out = np.zeros_like(rho.elements)
    for k_small in loss_kraus(dim, eta):
        k_full = fock.single_mode_operator(space, mode, k_small).entries
        out += (k_full @ rho.elements) @ k_full.conj().T.tocsr()
    return DensityMatrix(space, out)
