"""Chiral atom-photon routing model.

Three-level basis ordering is (|g>, |s>, |e>): ground, storage (spin-wave)
and optically excited state. All rates and detunings are in units of Gamma.
"""
from __future__ import annotations

import cmath
import dataclasses
import math
from dataclasses import dataclass
from enum import Enum, IntEnum

import numpy as np

from .core import (
    LindbladTerm,
    build_liouvillian,
    hamiltonian_superop,
    linear_response,
    projector,
    steady_state,
    transition,
)
from .zeeman import SubSystem, ZeemanScheme

GROUND, STORAGE, EXCITED = 0, 1, 2
WEAK_PROBE_MAX = 0.1


class Direction(Enum):
    FORWARD = "forward"  # port 1 -> 2, +z
    BACKWARD = "backward"  # port 2 -> 1, -z

    @property
    def reversed(self):
        return Direction.BACKWARD if self is Direction.FORWARD else Direction.FORWARD


class Helicity(IntEnum):
    PLUS = 1
    MINUS = -1


@dataclass(frozen=True)
class RoutingParams:
    delta_p: float = 0.0
    delta_c: float = 0.0
    omega_p: float = 0.01
    omega_c: float = 1.0
    omega_diss: float = 1.0
    gamma: float = 1.0
    gamma_gs: float = 1e-3

    def __post_init__(self):
        if not self.omega_p > 0:
            raise ValueError("omega_p must be positive")
        if self.omega_c < 0 or self.omega_diss < 0:
            raise ValueError("Rabi frequencies must be nonnegative")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.gamma_gs < 0:
            raise ValueError("gamma_gs must be nonnegative")

    @property
    def delta(self):
        """Two-photon detuning Delta_p - Delta_c."""
        return self.delta_p - self.delta_c

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def at_two_photon_detuning(self, delta):
        """Same control detuning, probe moved so that delta_p - delta_c == delta."""
        return self.replace(delta_p=self.delta_c + delta)


def gamma_eff(omega_diss, gamma):
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    return omega_diss**2 / gamma


def _aligned(direction, sigma_control):
    return (Direction(direction) is Direction.FORWARD) == (Helicity(sigma_control) is Helicity.PLUS)


def lambda_for(direction, sigma_control, params) -> complex:
    """Non-Hermitian ground-state shift: 0 when the probe shares the control
    helicity, -i*gamma_eff/2 otherwise."""
    if _aligned(direction, sigma_control):
        return 0j
    return -0.5j * gamma_eff(params.omega_diss, params.gamma)


def _h_matrix(omega_p, omega_c, delta, delta_p, lam):
    return np.array(
        [
            [lam, 0, omega_p / 2],
            [0, delta, omega_c / 2],
            [omega_p / 2, omega_c / 2, delta_p],
        ],
        dtype=complex,
    )


def build_h_eff(params, lam) -> np.ndarray:
    return _h_matrix(params.omega_p, params.omega_c, params.delta, params.delta_p, lam)


def default_lindblad_terms(params):
    """|e> decays at Gamma, half to |g> and half to |s>; ground coherence
    dephases at gamma_gs (the |s><s| rate 2*gamma_gs gives rho_sg ~ exp(-gamma_gs t))."""
    return [
        LindbladTerm(transition(3, GROUND, EXCITED), params.gamma / 2),
        LindbladTerm(transition(3, STORAGE, EXCITED), params.gamma / 2),
        LindbladTerm(projector(3, STORAGE), 2 * params.gamma_gs),
    ]


_PROBE_COUPLING = 0.5 * (transition(3, GROUND, EXCITED) + transition(3, EXCITED, GROUND))


def steady_coherence(sub: SubSystem | None, params: RoutingParams, lam, method="linear") -> complex:
    """Steady optical coherence per unit (Omega_p/2), sign chosen so Im > 0 is absorption.

    Returns -<e|rho|g> / (Omega_p/2). ``method="linear"`` takes the exact
    weak-probe limit (first-order response about |g><g|); ``"full"`` solves
    the nonlinear steady state at the actual ``params.omega_p``.
    """
    if params.omega_p > WEAK_PROBE_MAX:
        raise ValueError(f"omega_p={params.omega_p} outside weak-probe regime (<= {WEAK_PROBE_MAX})")
    scale = 1.0 if sub is None else sub.control_scale
    omega_c = params.omega_c * scale
    terms = default_lindblad_terms(params)
    if method == "linear":
        h0 = _h_matrix(0.0, omega_c, params.delta, params.delta_p, lam)
        l0 = build_liouvillian(h0, terms, recycle=True)
        rho1 = linear_response(l0, hamiltonian_superop(_PROBE_COUPLING), projector(3, GROUND))
        return complex(-2.0 * rho1[EXCITED, GROUND])
    if method == "full":
        h = _h_matrix(params.omega_p, omega_c, params.delta, params.delta_p, lam)
        rho = steady_state(build_liouvillian(h, terms, recycle=True))
        return complex(-rho[EXCITED, GROUND] / (params.omega_p / 2))
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class BackwardTerms:
    """How the counter-rotating (dissipative) susceptibility is assembled.

    count_cycling_twice
        keep the stretched (-F_e, -F_g) transition both inside the sigma-minus
        sum and as the separate loss term (literal double counting).
    coherent_sum
        evaluate the sigma-minus sum with Lambda = 0 (only the loss term sees
        the dissipative channel).
    """

    count_cycling_twice: bool = False
    coherent_sum: bool = False


@dataclass(frozen=True)
class ChiralSusceptibility:
    chi_eit: complex
    chi_loss: complex = 0j

    @property
    def total(self) -> complex:
        return self.chi_eit + self.chi_loss


def susceptibility(
    direction,
    scheme: ZeemanScheme,
    params: RoutingParams,
    sigma_control=Helicity.PLUS,
    backward: BackwardTerms = BackwardTerms(),
    method="linear",
) -> ChiralSusceptibility:
    """Effective chiral susceptibility, normalized so a resonant two-level
    medium (Omega_c = 0) has chi = i and transmission exp(-D)."""
    norm = 0.5 * params.gamma / scheme.coupling_total(+1)
    cache = {}

    def coh(sub, lam):
        key = (sub.control_scale, lam)
        if key not in cache:
            cache[key] = steady_coherence(sub, params, lam, method)
        return cache[key]

    if _aligned(direction, sigma_control):
        chi = sum(s.population * s.weight * coh(s, 0j) for s in scheme.subsystems(+1))
        return ChiralSusceptibility(norm * chi, 0j)

    lam = lambda_for(direction, sigma_control, params)
    cyc = scheme.cycling_pair()
    lam_sum = 0j if backward.coherent_sum else lam
    chi_eit = 0j
    for s in scheme.subsystems(-1):
        is_cycling = (s.ground_m, s.excited_m) == (cyc.ground_m, cyc.excited_m)
        if is_cycling and not backward.count_cycling_twice:
            continue
        chi_eit += s.population * s.weight * coh(s, lam_sum)
    chi_loss = cyc.population * cyc.weight * coh(cyc, lam)
    return ChiralSusceptibility(norm * chi_eit, norm * chi_loss)


def transmission(chi, depth):
    """Field amplitude h and power transmission T after optical depth ``depth``.

    Im(chi) attenuates and Re(chi) shifts the phase: h = exp(i D chi / 2),
    T = |h|^2 = exp(-D Im chi).
    """
    if depth < 0:
        raise ValueError("optical depth must be nonnegative")
    if isinstance(chi, ChiralSusceptibility):
        chi = chi.total
    chi = complex(chi)
    h = cmath.exp(0.5j * depth * chi)
    t = math.exp(-depth * chi.imag)
    return h, t


def isolation_db(t_forward, t_backward, noise_floor=0.0):
    """10 log10((T_f + b) / (T_b + b)) with a detection floor b."""
    if noise_floor < 0:
        raise ValueError("noise floor must be nonnegative")
    num = t_forward + noise_floor
    den = t_backward + noise_floor
    if num <= 0 or den <= 0:
        raise ValueError("isolation undefined for zero transmission without a noise floor")
    return 10.0 * (math.log10(num) - math.log10(den))


def insertion_loss_db(t_forward):
    if not t_forward > 0:
        raise ValueError("forward transmission must be positive")
    return -10.0 * math.log10(t_forward)
