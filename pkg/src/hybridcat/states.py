"""Constructors for the kets used by the protocols.

Cat-state normalization constants are always computed numerically from the
truncated coherent superpositions, never from a closed form; the truncated
vectors themselves are the ground truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import fock
from .errors import (
    CutoffExceeded,
    CutoffTooSmall,
    DegenerateAmplitude,
    NotNormalized,
    UnknownMode,
)
from .fock import H, V, HilbertSpace, StateVector

PLUS = "+"
MINUS = "-"

# Truncation contract enforced by the CV-state constructors.
TRUNCATION_DEFICIT = 1e-12


@dataclass(frozen=True)
class CatSpec:
    """A cat-state recipe: amplitude, parity sign, numeric normalization factor."""

    alpha: complex
    sign: str
    normalization: float


def dv_cutoff(station: bool = True) -> int:
    """Default cutoff for single-photon modes.

    Modes entering the physical detection station need n=2 capacity for
    two-photon bunching; purely logical polarization qubits never leave n<=1.
    """
    return 2 if station else 1


def cv_cutoff(alpha) -> int:
    """Default cutoff for a mode carrying coherent/cat states of amplitude alpha.

    Starts at ceil(|a|^2 + 6|a| + 6) and grows until the Poisson tail is far
    below the truncation contract, so constructors never reject their own
    default.
    """
    a = abs(alpha)
    n = math.ceil(a * a + 6 * a + 6)
    while _poisson_tail(a, n) >= TRUNCATION_DEFICIT / 4:
        n += 1
    return n


def _poisson_tail(a: float, cutoff: int) -> float:
    lam = a * a
    if lam == 0.0:
        return 0.0
    n = np.arange(cutoff + 1)
    kept = np.exp(-lam + n * np.log(lam) - gammaln(n + 1)).sum()
    return max(0.0, 1.0 - float(kept))


def _coherent_amplitudes(alpha: complex, cutoff: int):
    """Unnormalized truncated coherent amplitudes alpha^n / sqrt(n!) * e^{-|a|^2/2}."""
    n = np.arange(cutoff + 1)
    if alpha == 0:
        amps = np.zeros(cutoff + 1, dtype=complex)
        amps[0] = 1.0
        return amps
    log_mag = -abs(alpha) ** 2 / 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    phase = np.exp(1j * n * np.angle(complex(alpha)))
    return np.exp(log_mag) * phase


def _single_mode_amps_to_state(space, mode, amps) -> StateVector:
    pos = space.mode_position(mode)
    full = np.zeros(space.dims, dtype=complex)
    sl = [0] * len(space.dims)
    sl[pos] = slice(None)
    full[tuple(sl)] = amps
    return StateVector(space, full.reshape(-1))


def fock_state(space: HilbertSpace, occupation: dict | None = None) -> StateVector:
    """Unit-norm basis ket with the given photon counts (vacuum elsewhere)."""
    occupation = occupation or {}
    counts = [0] * len(space.modes)
    for key, n in occupation.items():
        pos = space.mode_position(key)
        if n > space.modes[pos].cutoff:
            raise CutoffExceeded(
                f"mode {tuple(key)}: count {n} exceeds cutoff {space.modes[pos].cutoff}")
        counts[pos] = int(n)
    amps = np.zeros(space.total_dim, dtype=complex)
    amps[space.basis_index(counts)] = 1.0
    return StateVector(space, amps)


def vacuum(space: HilbertSpace) -> StateVector:
    return fock_state(space, {})


def coherent_state(space: HilbertSpace, mode, alpha) -> StateVector:
    """|alpha> on one mode, renormalized after truncation.

    Raises CutoffTooSmall when the truncated tail exceeds the 1e-12 contract.
    """
    cutoff = space.descriptor(mode).cutoff
    deficit = _poisson_tail(abs(alpha), cutoff)
    if deficit >= TRUNCATION_DEFICIT:
        raise CutoffTooSmall(
            f"coherent |alpha|={abs(alpha):.4g} on cutoff {cutoff}: deficit {deficit:.2e}")
    amps = _coherent_amplitudes(alpha, cutoff)
    amps = amps / np.linalg.norm(amps)
    return _single_mode_amps_to_state(space, mode, amps)


def cat_norms(alpha, cutoff=None):
    """Norms of the truncated superpositions |a>+|-a> and |a>-|-a>.

    The reciprocals are the multiplicative cat normalization constants; the
    photon-subtraction ladder coefficient is |a| times a ratio of these norms.
    """
    if cutoff is None:
        cutoff = cv_cutoff(alpha)
    base = _coherent_amplitudes(alpha, cutoff)
    flipped = _coherent_amplitudes(-alpha, cutoff)
    return float(np.linalg.norm(base + flipped)), float(np.linalg.norm(base - flipped))


def cat_spec(alpha, sign, cutoff=None) -> CatSpec:
    np_, nm = cat_norms(alpha, cutoff)
    norm = np_ if sign == PLUS else nm
    if norm == 0.0:
        raise DegenerateAmplitude(f"cat {sign} at alpha={alpha} is the zero vector")
    return CatSpec(complex(alpha), sign, 1.0 / norm)


def cat_ladder_coefficient(alpha, sign, cutoff=None) -> float:
    """Norm of (annihilation applied to a unit cat): photon subtraction flips parity."""
    np_, nm = cat_norms(alpha, cutoff)
    return abs(alpha) * (nm / np_ if sign == PLUS else np_ / nm)


def cat_state(space: HilbertSpace, mode, alpha, sign) -> StateVector:
    """Normalized superposition of |alpha> and |-alpha> on one mode.

    sign '+' keeps even photon numbers only, '-' odd only.
    """
    if sign not in (PLUS, MINUS):
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    cutoff = space.descriptor(mode).cutoff
    base = _coherent_amplitudes(alpha, cutoff)
    flipped = _coherent_amplitudes(-alpha, cutoff)
    raw = base + flipped if sign == PLUS else base - flipped
    norm = np.linalg.norm(raw)
    if norm < 1e-300:
        raise DegenerateAmplitude(f"cat {sign} at alpha={alpha} is the zero vector")
    # untruncated norm^2 is 2 +- 2<a|-a> and <a|-a> = e^{-2|a|^2} for any complex a
    exact_sq = 2.0 + (1 if sign == PLUS else -1) * 2.0 * math.exp(-2 * abs(alpha) ** 2)
    deficit = max(0.0, 1.0 - float(norm) ** 2 / exact_sq)
    if deficit >= TRUNCATION_DEFICIT:
        raise CutoffTooSmall(
            f"cat {sign} |alpha|={abs(alpha):.4g} on cutoff {cutoff}: deficit {deficit:.2e}")
    return _single_mode_amps_to_state(space, mode, raw / norm)


def polarization_qubit(space: HilbertSpace, spatial, c_h, c_v) -> StateVector:
    """One photon shared across the two polarization modes of a spatial label."""
    if abs(abs(c_h) ** 2 + abs(c_v) ** 2 - 1.0) > 1e-10:
        raise NotNormalized(f"|cH|^2+|cV|^2 = {abs(c_h)**2 + abs(c_v)**2:.12g}")
    ket_h = fock_state(space, {(spatial, H): 1})
    ket_v = fock_state(space, {(spatial, V): 1})
    return StateVector(space, c_h * ket_h.amps + c_v * ket_v.amps)


def bell_pair(space: HilbertSpace, spatial_a, spatial_b) -> StateVector:
    """(|1H>|1H> + |1V>|1V>)/sqrt(2) across two spatial labels."""
    for s in (spatial_a, spatial_b):
        for pol in (H, V):
            if not space.has_mode((s, pol)):
                raise UnknownMode(f"missing mode {(s, pol)}")
    hh = fock_state(space, {(spatial_a, H): 1, (spatial_b, H): 1})
    vv = fock_state(space, {(spatial_a, V): 1, (spatial_b, V): 1})
    return StateVector(space, (hh.amps + vv.amps) / np.sqrt(2.0))


def polarization_coupled_cat(space: HilbertSpace, spatial, alpha,
                             relative_sign: int = +1) -> StateVector:
    """(|Cat+ in H> + s |Cat- in V>)/sqrt(2): even cat on H xor odd cat on V."""
    if relative_sign not in (+1, -1):
        raise ValueError("relative_sign must be +1 or -1")
    plus_h = cat_state(space, (spatial, H), alpha, PLUS)
    minus_v = cat_state(space, (spatial, V), alpha, MINUS)
    return StateVector(space, (plus_h.amps + relative_sign * minus_v.amps) / np.sqrt(2.0))
