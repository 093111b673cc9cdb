"""Projective/POVM detection, coincidence heralding, and Bell-state measurement.

Two routes to the same physics: `bsm_project` applies an abstract two-photon
Bell projector, while `central_station` models the linear-optics station of
the generation circuit (balanced beam splitter, wave plates, polarizing
splitters, four detectors).  The station's plate angles are calibrated once so
a C13 coincidence realizes the Theta+ projection on its input modes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import fock, optics
from .errors import BadEta, CutoffExceeded, UnknownMode
from .fock import DensityMatrix, H, V, HilbertSpace, StateVector


class BellOutcome(enum.Enum):
    OMEGA_PLUS = "omega_plus"
    OMEGA_MINUS = "omega_minus"
    THETA_PLUS = "theta_plus"
    THETA_MINUS = "theta_minus"


# (first pattern, second pattern, relative sign) on modes (A_H, A_V, B_H, B_V)
_BELL_TERMS = {
    BellOutcome.OMEGA_PLUS: ((1, 0, 1, 0), (0, 1, 0, 1), +1),
    BellOutcome.OMEGA_MINUS: ((1, 0, 1, 0), (0, 1, 0, 1), -1),
    BellOutcome.THETA_PLUS: ((1, 0, 0, 1), (0, 1, 1, 0), +1),
    BellOutcome.THETA_MINUS: ((1, 0, 0, 1), (0, 1, 1, 0), -1),
}

# Calibrated station geometry: detectors D1/D2 sit behind the polarizing
# splitter on output 1 (the first input's path), D3/D4 on output 2.  A
# half-wave plate at 0 deg on input 2 and one at 45 deg on output 2 make the
# C13 and C24 cross-port coincidences herald the Theta+ Bell projection.
STATION_INPUT_PLATES = ((2, 0.0),)
STATION_OUTPUT_PLATES = ((2, 45.0),)

C13 = "C13"
C24 = "C24"
_COINCIDENCE_PATTERNS = {
    # exactly one photon at D1 & D3 (H detectors) or D2 & D4 (V detectors)
    C13: (1, 0, 1, 0),
    C24: (0, 1, 0, 1),
}


@dataclass(frozen=True)
class HeraldedResult:
    outcome: str
    probability: float
    state: object  # StateVector or DensityMatrix on the surviving modes; None if impossible


def bell_ket(space: HilbertSpace, spatial_a, spatial_b, outcome: BellOutcome) -> StateVector:
    """The two-photon Bell ket on the four polarization modes of two spatials."""
    keys = [(spatial_a, H), (spatial_a, V), (spatial_b, H), (spatial_b, V)]
    pat1, pat2, sign = _BELL_TERMS[outcome]
    occ1 = dict(zip(keys, pat1))
    occ2 = dict(zip(keys, pat2))
    k1 = fock.fock_state(space, {k: n for k, n in occ1.items() if n})
    k2 = fock.fock_state(space, {k: n for k, n in occ2.items() if n})
    return StateVector(space, (k1.amps + sign * k2.amps) / np.sqrt(2.0))


def project_fock(state, mode, n) -> HeraldedResult:
    """Ideal photon-number detection: project one mode onto |n> and remove it."""
    space = state.space
    pos = space.mode_position(mode)
    if n > space.modes[pos].cutoff:
        raise CutoffExceeded(f"n={n} exceeds cutoff {space.modes[pos].cutoff}")
    remaining = HilbertSpace([m for i, m in enumerate(space.modes) if i != pos])
    label = f"n={n}"

    if isinstance(state, StateVector):
        amps = np.moveaxis(state.tensor_view(), pos, 0)[n].reshape(-1)
        prob = float(np.vdot(amps, amps).real)
        if prob <= 1e-300:
            return HeraldedResult(label, 0.0, None)
        return HeraldedResult(label, prob, StateVector(remaining, amps / np.sqrt(prob)))

    t = state.elements.reshape(space.dims + space.dims)
    nm = len(space.modes)
    t = np.moveaxis(t, (pos, nm + pos), (0, 1))[n, n]
    block = t.reshape(remaining.total_dim, remaining.total_dim)
    prob = float(np.trace(block).real)
    if prob <= 1e-300:
        return HeraldedResult(label, 0.0, None)
    return HeraldedResult(label, prob, DensityMatrix(remaining, block / prob))


def click_detector(rho, mode, eta):
    """On/off detector of efficiency eta on one mode.

    No-click POVM element is (1-eta)^n; click is its complement.  Returns the
    (click, no_click) pair of HeraldedResults; the mode is kept in place, its
    detected photons absorbed.
    """
    if not 0.0 < eta <= 1.0:
        raise BadEta(f"efficiency must be in (0, 1], got {eta}")
    if isinstance(rho, StateVector):
        rho = rho.to_density_matrix()
    space = rho.space
    dim = space.descriptor(mode).dim
    kraus = optics.loss_kraus(dim, 1.0 - eta)  # photons route to the detector with prob eta
    k0 = fock.single_mode_operator(space, mode, kraus[0]).entries
    no_click_mat = (k0 @ rho.elements) @ k0.conj().T.tocsr()
    p_nc = float(np.trace(no_click_mat).real)
    click_mat = np.zeros_like(rho.elements)
    for k in kraus[1:]:
        kf = fock.single_mode_operator(space, mode, k).entries
        click_mat += (kf @ rho.elements) @ kf.conj().T.tocsr()
    p_c = float(np.trace(click_mat).real)
    click = HeraldedResult("click", p_c,
                           DensityMatrix(space, click_mat / p_c) if p_c > 1e-300 else None)
    no_click = HeraldedResult("no_click", p_nc,
                              DensityMatrix(space, no_click_mat / p_nc) if p_nc > 1e-300 else None)
    return click, no_click


def bsm_project(state: StateVector, spatial_a, spatial_b,
                outcome: BellOutcome) -> HeraldedResult:
    """Project two polarization qubits onto a Bell ket; measured modes removed."""
    space = state.space
    keys = [(spatial_a, H), (spatial_a, V), (spatial_b, H), (spatial_b, V)]
    pos = [space.mode_position(k) for k in keys]
    pat1, pat2, sign = _BELL_TERMS[outcome]

    t = np.moveaxis(state.tensor_view(), pos, range(4))
    amp = (t[pat1] + sign * t[pat2]) / np.sqrt(2.0)
    amp = amp.reshape(-1)
    prob = float(np.vdot(amp, amp).real)

    remaining = HilbertSpace([m for i, m in enumerate(space.modes) if i not in set(pos)])
    if remaining.total_dim == 1 or not remaining.modes:
        return HeraldedResult(outcome.value, prob, None)
    if prob <= 1e-300:
        return HeraldedResult(outcome.value, 0.0, None)
    return HeraldedResult(outcome.value, prob, StateVector(remaining, amp / np.sqrt(prob)))


def bsm_complement_weight(state: StateVector, spatial_a, spatial_b) -> float:
    """Weight of the projector complementary to the four Bell outcomes."""
    total = sum(bsm_project(state, spatial_a, spatial_b, o).probability
                for o in BellOutcome)
    return float(np.vdot(state.amps, state.amps).real) - total


def _station_unitary(space, spatial_b, spatial_d):
    arms = {1: spatial_b, 2: spatial_d}
    ops = []
    for arm, angle in STATION_INPUT_PLATES:
        ops.append(optics.half_wave_plate(space, arms[arm], angle))
    ops.append(optics.beam_splitter(space, spatial_b, spatial_d, 1.0 / np.sqrt(2.0)))
    for arm, angle in STATION_OUTPUT_PLATES:
        ops.append(optics.half_wave_plate(space, arms[arm], angle))
    u = ops[0]
    for op in ops[1:]:
        u = op @ u
    return u


def central_station(state: StateVector, spatial_b, spatial_d, coincidence,
                    eta: float = 1.0, povm: str = "number") -> HeraldedResult:
    """Physical Bell detection: mix two spatial channels on a balanced beam
    splitter (with the calibrated wave plates), split polarizations, and
    herald on a two-detector coincidence.

    coincidence C13 pairs the H detectors of the two output ports, C24 the V
    detectors.  povm "number" uses eta-scaled number-resolved elements
    (exactly-one-photon projectors at eta=1); "click" uses on/off elements
    1-(1-eta)^n.  Returns the conditional state on all remaining modes.
    """
    if coincidence not in _COINCIDENCE_PATTERNS:
        raise UnknownMode(f"coincidence must be C13 or C24, got {coincidence!r}")
    if not 0.0 < eta <= 1.0:
        raise BadEta(f"efficiency must be in (0, 1], got {eta}")
    space = state.space
    mixed = fock.apply(_station_unitary(space, spatial_b, spatial_d), state)

    keys = [(spatial_b, H), (spatial_b, V), (spatial_d, H), (spatial_d, V)]
    pos = [space.mode_position(k) for k in keys]
    pattern = _COINCIDENCE_PATTERNS[coincidence]
    remaining = HilbertSpace([m for i, m in enumerate(space.modes) if i not in set(pos)])

    if povm == "number" and eta == 1.0:
        amp = np.moveaxis(mixed.tensor_view(), pos, range(4))[pattern].reshape(-1)
        prob = float(np.vdot(amp, amp).real)
        if prob <= 1e-300:
            return HeraldedResult(coincidence, 0.0, None)
        return HeraldedResult(coincidence, prob, StateVector(remaining, amp / np.sqrt(prob)))

    # eta < 1 or on/off detection: diagonal POVM over the four detector modes
    dims4 = [space.dims[p] for p in pos]
    t = np.moveaxis(mixed.tensor_view(), pos, range(4))
    m = t.reshape(int(np.prod(dims4)), remaining.total_dim)
    weights = _coincidence_weights(dims4, pattern, eta, povm)
    prob = float(np.sum(weights * np.sum(np.abs(m) ** 2, axis=1)))
    if prob <= 1e-300:
        return HeraldedResult(coincidence, 0.0, None)
    rho = ((weights[:, None] * m).T @ m.conj()) / prob
    return HeraldedResult(coincidence, prob, DensityMatrix(remaining, rho))


def _coincidence_weights(dims4, pattern, eta, povm):
    singles = []
    for d, want_click in zip(dims4, pattern):
        n = np.arange(d)
        if povm == "number":
            e = n * eta * (1.0 - eta) ** (np.maximum(n - 1, 0)) if want_click \
                else (1.0 - eta) ** n
        elif povm == "click":
            e = 1.0 - (1.0 - eta) ** n if want_click else (1.0 - eta) ** n
        else:
            raise ValueError(f"unknown povm {povm!r}")
        singles.append(e)
    w = singles[0]
    for e in singles[1:]:
        w = np.multiply.outer(w, e)
    return w.reshape(-1)


def sample_outcome(results, rng) -> HeraldedResult:
    """Draw one HeraldedResult by its Born weight using an explicit generator."""
    probs = np.array([r.probability for r in results], dtype=float)
    probs = probs / probs.sum()
    return results[int(rng.choice(len(results), p=probs))]
