"""End-to-end drivers: heralded hybrid generation, the two entanglement
swapping schemes, and teleportation of a polarization qubit onto a cat qubit.

Variant map (targets are the four heralded hybrid Bell states, in display
order; kappa_plus/kappa_minus are the photon-subtraction ladder norms of the
even/odd cat, and the weight multiplying a Cat+ component is always r*kappa_minus):

  1: kappa-|1H>|Cat+_H> + kappa+|1V>|Cat-_V>   circuit: psi_B, wave plate on c
  2: kappa-|1H>|Cat+_V> + kappa+|1V>|Cat-_H>   circuit: psi_B, no extra plates
  3: kappa+|1H>|Cat-_H> - kappa-|1V>|Cat+_V>   circuit: psi'_B, wave plate on b
  4: kappa-|1H>|Cat+_V> - kappa+|1V>|Cat-_H>   circuit: psi'_B, no extra plates

Every variant heralds on the same station coincidence (C13, equivalently the
Theta+ Bell projector on modes b and d).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import analysis, fock, measure, optics, states
from .errors import BadReflectivity, MemoryGuardExceeded, NotNormalized
from .fock import H, V, HilbertSpace, StateVector
from .measure import BellOutcome

PROJECTOR_BSM = "projector"
PHYSICAL_STATION = "physical"

DEFAULT_MAX_DIM = 2 ** 24


@dataclass(frozen=True)
class Resource:
    kind: str  # "ideal" or "generated"
    r: float = 0.0

    def label(self) -> str:
        return self.kind if self.kind == "ideal" else f"generated(r={self.r:g})"


IDEAL = Resource("ideal")


def generated(r: float) -> Resource:
    return Resource("generated", r)


@dataclass
class GenerationReport:
    variant: int
    herald_probability: float
    conditional_state: object
    fidelity_vs_target: float
    gamma_plus: float
    gamma_minus: float
    negativity: float


@dataclass
class SwapReport:
    scheme: str
    resource: str
    outcome_probabilities: dict
    corrected_fidelities: dict
    ideal_fidelities: dict
    no_herald_weight: float
    conditional_states: dict = field(repr=False, default_factory=dict)
    negativities: dict = field(default_factory=dict)


@dataclass
class TeleportReport:
    input: tuple
    resource: str
    outcome_probabilities: dict
    corrected_fidelities: dict
    no_herald_weight: float


def max_amplitudes(override=None) -> int:
    if override is not None:
        return int(override)
    env = os.environ.get("HYBRIDCAT_MAX_DIM")
    return int(env) if env else DEFAULT_MAX_DIM


def guard_dimension(total_dim: int, context: str, max_dim=None):
    cap = max_amplitudes(max_dim)
    if total_dim > cap:
        mib = total_dim * 16 / 2 ** 20
        raise MemoryGuardExceeded(
            f"{context} needs {total_dim} amplitudes (~{mib:.0f} MiB complex128), "
            f"over the guard of {cap}; raise HYBRIDCAT_MAX_DIM or reduce alpha/cutoffs")


# variant -> (bob relative sign, plate on channel c, plate on channel b)
_VARIANT_CIRCUIT = {
    1: (+1, True, False),
    2: (+1, False, False),
    3: (-1, False, True),
    4: (-1, False, False),
}

# variant -> ((dv_pol, cv_pol, cat_sign, coeff_sign), ...)
_VARIANT_TARGET = {
    1: ((H, H, states.PLUS, +1), (V, V, states.MINUS, +1)),
    2: ((H, V, states.PLUS, +1), (V, H, states.MINUS, +1)),
    3: ((H, H, states.MINUS, +1), (V, V, states.PLUS, -1)),
    4: ((H, V, states.PLUS, +1), (V, H, states.MINUS, -1)),
}


def hybrid_component(space, dv_spatial, dv_pol, cv_spatial, cv_pol, alpha, sign) -> StateVector:
    """|1_dvpol>_dv (x) |Cat^sign in cv_pol>_cv within a shared space."""
    cat = states.cat_state(space, (cv_spatial, cv_pol), alpha, sign)
    return fock.apply(fock.creation(space, (dv_spatial, dv_pol)), cat)


def variant_target(space, variant, alpha, dv_spatial="a", cv_spatial="c") -> StateVector:
    """Normalized heralded target for one variant, on the given space."""
    kp = states.cat_ladder_coefficient(alpha, states.PLUS)
    km = states.cat_ladder_coefficient(alpha, states.MINUS)
    amps = np.zeros(space.total_dim, dtype=complex)
    for dv_pol, cv_pol, sign, coeff_sign in _VARIANT_TARGET[variant]:
        weight = km if sign == states.PLUS else kp
        ket = hybrid_component(space, dv_spatial, dv_pol, cv_spatial, cv_pol, alpha, sign)
        amps += coeff_sign * weight * ket.amps
    return StateVector(space, amps).normalized()


def ideal_hybrid_state(space, dv_spatial, cv_spatial, alpha) -> StateVector:
    """(|1H>|Cat+_H> + |1V>|Cat-_V>)/sqrt(2): the balanced target state."""
    e_h = hybrid_component(space, dv_spatial, H, cv_spatial, H, alpha, states.PLUS)
    e_v = hybrid_component(space, dv_spatial, V, cv_spatial, V, alpha, states.MINUS)
    return StateVector(space, (e_h.amps + e_v.amps) / np.sqrt(2.0))


def generate_hybrid(alpha, r, variant: int = 1, model: str = PROJECTOR_BSM,
                    eta: float = 1.0, tap_order: str = optics.EXACT_BS,
                    dv_mode_cutoff: int | None = None, cv_mode_cutoff: int | None = None,
                    max_dim=None) -> GenerationReport:
    """Run the generation circuit and herald one hybrid entangled state.

    The circuit prepares a polarization Bell pair on (a, b) and a
    polarization-coupled cat on c, taps c into d, applies the variant's wave
    plates, and heralds either with the Theta+ Bell projector on (b, d) or
    with the physical station's C13 coincidence.
    """
    if not 0.0 < r < 1.0:
        raise BadReflectivity(f"tap reflectivity must be in (0, 1), got {r}")
    if variant not in _VARIANT_CIRCUIT:
        raise ValueError(f"variant must be 1..4, got {variant}")
    dv = states.dv_cutoff() if dv_mode_cutoff is None else dv_mode_cutoff
    cv = states.cv_cutoff(alpha) if cv_mode_cutoff is None else cv_mode_cutoff
    bob_sign, plate_c, plate_b = _VARIANT_CIRCUIT[variant]

    s_ab = fock.build_space([("a", H, dv), ("a", V, dv), ("b", H, dv), ("b", V, dv)])
    s_cd = fock.build_space([("c", H, cv), ("c", V, cv), ("d", H, dv), ("d", V, dv)])
    guard_dimension(s_ab.total_dim * s_cd.total_dim, "generation circuit", max_dim)

    alice = states.bell_pair(s_ab, "a", "b")
    bob = states.polarization_coupled_cat(s_cd, "c", alpha, bob_sign)
    state = fock.tensor(alice, bob)
    state = optics.weak_tap(state, "c", "d", r, tap_order).state
    if tap_order == optics.FIRST_ORDER:
        state = state.normalized()
    if plate_c:
        state = fock.apply(optics.half_wave_plate(state.space, "c", 45.0), state)
    if plate_b:
        state = fock.apply(optics.half_wave_plate(state.space, "b", 45.0), state)

    if model == PROJECTOR_BSM:
        herald = measure.bsm_project(state, "b", "d", BellOutcome.THETA_PLUS)
    elif model == PHYSICAL_STATION:
        herald = measure.central_station(state, "b", "d", measure.C13, eta)
    else:
        raise ValueError(f"model must be '{PROJECTOR_BSM}' or '{PHYSICAL_STATION}'")

    conditional = herald.state
    target = variant_target(conditional.space, variant, alpha)
    fid = analysis.fidelity(target, conditional)
    dv_keys = [("a", H), ("a", V)]
    neg = analysis.negativity(conditional, dv_keys)
    kp = states.cat_ladder_coefficient(alpha, states.PLUS)
    km = states.cat_ladder_coefficient(alpha, states.MINUS)
    return GenerationReport(
        variant=variant,
        herald_probability=herald.probability,
        conditional_state=conditional,
        fidelity_vs_target=fid,
        gamma_plus=r * km,   # weight of the Cat+ branch
        gamma_minus=r * kp,  # weight of the Cat- branch
        negativity=neg,
    )


def _resource_state(alpha, resource: Resource, dv_spatial, cv_spatial,
                    max_dim=None) -> StateVector:
    """The shared hybrid state on (dv_spatial, cv_spatial), dv cutoff 1."""
    cv = states.cv_cutoff(alpha)
    if resource.kind == "ideal":
        space = fock.build_space([(dv_spatial, H, 1), (dv_spatial, V, 1),
                                  (cv_spatial, H, cv), (cv_spatial, V, cv)])
        return ideal_hybrid_state(space, dv_spatial, cv_spatial, alpha)
    if resource.kind == "generated":
        rep = generate_hybrid(alpha, resource.r, variant=1, model=PROJECTOR_BSM,
                              max_dim=max_dim)
        state = rep.conditional_state
        state = fock.restrict_cutoffs(state, {("a", H): 1, ("a", V): 1})
        return fock.relabel_spatials(state, {"a": dv_spatial, "c": cv_spatial})
    raise ValueError(f"unknown resource kind {resource.kind!r}")


# BSM outcome -> Pauli correction on the retained qubit, applied as Z after X
_CORRECTION = {
    BellOutcome.OMEGA_PLUS: (False, False),   # identity
    BellOutcome.OMEGA_MINUS: (True, False),   # Z
    BellOutcome.THETA_PLUS: (False, True),    # X
    BellOutcome.THETA_MINUS: (True, True),    # Z X
}


def _apply_dv_correction(state, spatial, outcome):
    do_z, do_x = _CORRECTION[outcome]
    if do_x:
        state = fock.apply(optics.half_wave_plate(state.space, spatial, 45.0), state)
    if do_z:
        state = fock.apply(optics.half_wave_plate(state.space, spatial, 0.0), state)
    return state


def apply_cat_pauli(state: StateVector, spatial, alpha, do_z: bool, do_x: bool) -> StateVector:
    """Pauli action on the cat-qubit subspace {|Cat+_H>, |Cat-_V>} of one
    spatial label, identity on the orthogonal complement (leakage).

    Applied through rank-2 updates so no operator on the full space is built.
    """
    space = state.space
    keys = [(spatial, H), (spatial, V)]
    pos = [space.mode_position(k) for k in keys]
    mini = fock.build_space([(spatial, H, space.descriptor(keys[0]).cutoff),
                             (spatial, V, space.descriptor(keys[1]).cutoff)])
    e0 = states.cat_state(mini, keys[0], alpha, states.PLUS).amps
    e1 = states.cat_state(mini, keys[1], alpha, states.MINUS).amps

    rest = [i for i in range(len(space.modes)) if i not in set(pos)]
    t = np.transpose(state.tensor_view(), pos + rest)
    shape = t.shape
    m = t.reshape(mini.total_dim, -1).copy()
    v0 = e0.conj() @ m
    v1 = e1.conj() @ m
    if do_x:
        m += np.outer(e0, v1 - v0) + np.outer(e1, v0 - v1)
        v0, v1 = v1, v0
    if do_z:
        m -= 2.0 * np.outer(e1, v1)
    t = m.reshape(shape)
    inverse = np.argsort(pos + rest)
    amps = np.transpose(t, inverse).reshape(-1)
    return StateVector(space, amps)


def _bsm_sweep(full, spatial_x, spatial_y):
    results = {o: measure.bsm_project(full, spatial_x, spatial_y, o) for o in BellOutcome}
    heralded = sum(r.probability for r in results.values())
    return results, 1.0 - heralded


def swap_dv_dvbsm_cv(alpha, resource: Resource = IDEAL, max_dim=None) -> SwapReport:
    """DV-(DV-BSM-DV)-CV swapping: a polarization Bell pair on (A1, A2) and a
    hybrid state on (B1, B2); Charlie Bell-measures (A2, B1), leaving the
    hybrid entanglement on (A1, B2) after a local Pauli correction on A1."""
    s_a = fock.build_space([("A1", H, 1), ("A1", V, 1), ("A2", H, 1), ("A2", V, 1)])
    bob = _resource_state(alpha, resource, "B1", "B2", max_dim)
    guard_dimension(s_a.total_dim * bob.space.total_dim, "DV swap", max_dim)
    full = fock.tensor(states.bell_pair(s_a, "A1", "A2"), bob)

    results, no_herald = _bsm_sweep(full, "A2", "B1")
    probs, fids, ideal_fids, conds = {}, {}, {}, {}
    relocated = fock.relabel_spatials(bob, {"B1": "A1"})
    for outcome, res in results.items():
        corrected = _apply_dv_correction(res.state, "A1", outcome)
        reference = fock.reorder_modes(relocated, [m.key for m in corrected.space.modes])
        probs[outcome] = res.probability
        fids[outcome] = analysis.fidelity(reference, corrected)
        ideal_fids[outcome] = analysis.fidelity(
            ideal_hybrid_state(corrected.space, "A1", "B2", alpha), corrected)
        conds[outcome] = corrected
    return SwapReport("swap-dv", resource.label(), probs, fids, ideal_fids,
                      no_herald, conds)


def swap_cv_dvbsm_cv(alpha, resource: Resource = IDEAL, max_dim=None,
                     with_negativity: bool = False) -> SwapReport:
    """CV-(DV-BSM-DV)-CV swapping: two hybrid states with their DV halves sent
    to Charlie; success leaves the two CV nodes in an entangled cat pair
    (|Cat+_H>|Cat+_H> + |Cat-_V>|Cat-_V>)/sqrt(2) after correction on A1."""
    alice = _resource_state(alpha, resource, "A2", "A1", max_dim)
    alice = fock.reorder_modes(alice, [("A1", H), ("A1", V), ("A2", H), ("A2", V)])
    bob = _resource_state(alpha, resource, "B1", "B2", max_dim)
    guard_dimension(alice.space.total_dim * bob.space.total_dim, "CV swap", max_dim)
    full = fock.tensor(alice, bob)

    results, no_herald = _bsm_sweep(full, "A2", "B1")
    cv = states.cv_cutoff(alpha)
    probs, fids, ideal_fids, conds, negs = {}, {}, {}, {}, {}
    for outcome, res in results.items():
        do_z, do_x = _CORRECTION[outcome]
        corrected = apply_cat_pauli(res.state, "A1", alpha, do_z, do_x)
        target = _cat_pair_target(corrected.space, alpha)
        probs[outcome] = res.probability
        fids[outcome] = analysis.fidelity(target, corrected)
        ideal_fids[outcome] = fids[outcome]
        conds[outcome] = corrected
        if with_negativity:
            negs[outcome] = analysis.negativity(corrected, [("A1", H), ("A1", V)])
    return SwapReport("swap-cv", resource.label(), probs, fids, ideal_fids,
                      no_herald, conds, negs)


def _cat_pair_target(space, alpha) -> StateVector:
    s1 = fock.build_space([("A1", H, space.descriptor(("A1", H)).cutoff),
                           ("A1", V, space.descriptor(("A1", V)).cutoff)])
    s2 = fock.build_space([("B2", H, space.descriptor(("B2", H)).cutoff),
                           ("B2", V, space.descriptor(("B2", V)).cutoff)])
    t_plus = fock.tensor(states.cat_state(s1, ("A1", H), alpha, states.PLUS),
                         states.cat_state(s2, ("B2", H), alpha, states.PLUS))
    t_minus = fock.tensor(states.cat_state(s1, ("A1", V), alpha, states.MINUS),
                          states.cat_state(s2, ("B2", V), alpha, states.MINUS))
    target = StateVector(t_plus.space, (t_plus.amps + t_minus.amps) / np.sqrt(2.0))
    return fock.reorder_modes(target, [m.key for m in space.modes])


def teleport(c_h, c_v, alpha, resource: Resource = IDEAL, max_dim=None) -> TeleportReport:
    """Teleport the polarization qubit cH|1H> + cV|1V> onto Bob's cat qubit.

    Alice Bell-measures her photon against the DV half of the shared hybrid
    state; Bob applies the outcome's Pauli on {|Cat+_H>, |Cat-_V>} and is
    compared against cH|Cat+_H> + cV|Cat-_V>.
    """
    if abs(abs(c_h) ** 2 + abs(c_v) ** 2 - 1.0) > 1e-10:
        raise NotNormalized(f"|cH|^2+|cV|^2 = {abs(c_h)**2 + abs(c_v)**2:.12g}")
    s_in = fock.build_space([("A", H, 1), ("A", V, 1)])
    shared = _resource_state(alpha, resource, "C", "B", max_dim)
    guard_dimension(s_in.total_dim * shared.space.total_dim, "teleportation", max_dim)
    full = fock.tensor(states.polarization_qubit(s_in, "A", c_h, c_v), shared)

    results, no_herald = _bsm_sweep(full, "A", "C")
    probs, fids = {}, {}
    for outcome, res in results.items():
        do_z, do_x = _CORRECTION[outcome]
        corrected = apply_cat_pauli(res.state, "B", alpha, do_z, do_x)
        plus = states.cat_state(corrected.space, ("B", H), alpha, states.PLUS)
        minus = states.cat_state(corrected.space, ("B", V), alpha, states.MINUS)
        target = StateVector(corrected.space, c_h * plus.amps + c_v * minus.amps).normalized()
        probs[outcome] = res.probability
        fids[outcome] = analysis.fidelity(target, corrected)
    return TeleportReport((complex(c_h), complex(c_v)), resource.label(),
                          probs, fids, no_herald)
