"""Dual-rail polarization qubits sent through the direction-dependent router."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import check_density_matrix
from .errors import FullyBlocked
from .model import Direction, Helicity, susceptibility, transmission

_S2 = 1 / math.sqrt(2)
BASIS_VECTORS = {
    "H": np.array([1, 0], dtype=complex),
    "V": np.array([0, 1], dtype=complex),
    "D": np.array([_S2, _S2], dtype=complex),
    "A": np.array([_S2, -_S2], dtype=complex),
    "R": np.array([_S2, 1j * _S2], dtype=complex),
    "L": np.array([_S2, -1j * _S2], dtype=complex),
}
PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True)
class PolarizationQubit:
    """cos(theta/2)|H> + exp(i phi) sin(theta/2)|V>."""

    theta: float
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta={self.theta} outside [0, pi]")

    @property
    def vector(self) -> np.ndarray:
        return np.array(
            [math.cos(self.theta / 2), np.exp(1j * self.phi) * math.sin(self.theta / 2)],
            dtype=complex,
        )

    def density_matrix(self) -> np.ndarray:
        v = self.vector
        return np.outer(v, v.conj())


def encode(theta, phi) -> PolarizationQubit:
    return PolarizationQubit(float(theta), float(phi) % (2 * math.pi))


NAMED_STATES = {
    "H": encode(0, 0),
    "V": encode(math.pi, 0),
    "D": encode(math.pi / 2, 0),
    "A": encode(math.pi / 2, math.pi),
    "R": encode(math.pi / 2, math.pi / 2),
    "L": encode(math.pi / 2, 3 * math.pi / 2),
}


def bloch_to_rho(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return 0.5 * (np.eye(2) + sum(c * p for c, p in zip(r, PAULI)))


def rho_to_bloch(rho) -> np.ndarray:
    return np.array([np.trace(rho @ p).real for p in PAULI])


@dataclass(frozen=True)
class RailImbalance:
    """Relative rail transmission 1 -/+ amplitude (H/V) and a V-rail phase offset."""

    amplitude: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        if not -1.0 < self.amplitude < 1.0:
            raise ValueError("rail amplitude imbalance must lie in (-1, 1)")

    @classmethod
    def from_insertion_losses(cls, loss_h_db, loss_v_db, phase=0.0):
        r = 10 ** ((loss_v_db - loss_h_db) / 10)  # T_H / T_V
        return cls((1 - r) / (1 + r), phase)


@dataclass(frozen=True)
class Scrambling:
    """With probability ``probability`` the surviving photon's polarization
    is replaced by the fixed background state with Bloch vector ``bloch``."""

    probability: float = 0.0
    bloch: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError("scrambling probability must lie in [0, 1]")
        b = tuple(float(x) for x in self.bloch)
        if len(b) != 3 or math.sqrt(sum(x * x for x in b)) > 1 + 1e-12:
            raise ValueError("background Bloch vector must lie in the unit ball")
        object.__setattr__(self, "bloch", b)

    def background(self):
        return bloch_to_rho(self.bloch)


@dataclass(frozen=True)
class DualRailChannel:
    h_H: complex
    h_V: complex
    direction: Direction = Direction.FORWARD
    scrambling: Scrambling = Scrambling()

    def __post_init__(self):
        for name in ("h_H", "h_V"):
            h = complex(getattr(self, name))
            if abs(h) > 1 + 1e-12:
                raise ValueError(f"|{name}| = {abs(h)} exceeds 1")
            object.__setattr__(self, name, h)

    @property
    def kraus(self) -> np.ndarray:
        return np.diag([self.h_H, self.h_V])

    @classmethod
    def from_model(cls, direction, scheme, params, depth, sigma_control=Helicity.PLUS,
                   imbalance=RailImbalance(), scrambling=Scrambling(), backward=None):
        kw = {} if backward is None else {"backward": backward}
        chi = susceptibility(direction, scheme, params, sigma_control, **kw)
        h, _ = transmission(chi, depth)
        a_h = math.sqrt(1 - imbalance.amplitude)
        a_v = math.sqrt(1 + imbalance.amplitude)
        h_h = h * a_h
        h_v = h * a_v * complex(math.cos(imbalance.phase), math.sin(imbalance.phase))
        # a passive medium cannot amplify a rail
        h_h = h_h / max(1.0, abs(h_h))
        h_v = h_v / max(1.0, abs(h_v))
        return cls(h_h, h_v, Direction(direction), scrambling)

    def unnormalized_output(self, rho) -> np.ndarray:
        """Linear (trace-decreasing) map on 2x2 density matrices."""
        k = self.kraus
        out = k @ rho @ k.conj().T
        p = self.scrambling.probability
        if p:
            out = (1 - p) * out + p * np.trace(out).real * self.scrambling.background()
        return out


@dataclass(frozen=True)
class ChannelResult:
    rho_out: np.ndarray
    success_prob: float
    fidelity: float


def _as_rho(q):
    if isinstance(q, PolarizationQubit):
        return q.density_matrix(), q.vector
    v = np.asarray(q, dtype=complex)
    if v.shape == (2,):
        v = v / np.linalg.norm(v)
        return np.outer(v, v.conj()), v
    check_density_matrix(v)
    return v, None


def fidelity(rho, psi) -> float:
    v = psi.vector if isinstance(psi, PolarizationQubit) else np.asarray(psi, dtype=complex)
    f = np.vdot(v, np.asarray(rho) @ v).real
    return float(min(1.0, max(0.0, f)))


def apply_channel(q, ch: DualRailChannel) -> ChannelResult:
    """Send a qubit (or 2x2 density matrix) through ``ch``.

    Fidelity is taken against the input when it is pure, else reported as NaN.
    """
    rho, v = _as_rho(q)
    out = ch.unnormalized_output(rho)
    p = float(np.trace(out).real)
    if p < 1e-15:
        raise FullyBlocked(f"success probability {p:.3g} below 1e-15")
    rho_out = out / p
    rho_out = 0.5 * (rho_out + rho_out.conj().T)
    f = fidelity(rho_out, v) if v is not None else float("nan")
    return ChannelResult(rho_out, p, f)


def fit_scrambling(channel: DualRailChannel, states, targets) -> Scrambling:
    """Background mixing that reproduces target fidelities for the first four
    ``states``; requires them to pin down (p, r) as H, V, D, R do.

    The H/V pair fixes p and the z component; each remaining state fixes one
    more Bloch component. Solved exactly as a linear system.
    """
    if len(states) != len(targets):
        raise ValueError("one target per state")
    clean = [apply_channel(s, DualRailChannel(channel.h_H, channel.h_V, channel.direction)) for s in states]
    # F_k = (1-p) f_k + p/2 (1 + n_k . r)  ->  unknowns x = (p, p r_x, p r_y, p r_z)
    rows, rhs = [], []
    for s, c, t in zip(states, clean, targets):
        n = rho_to_bloch(_as_rho(s)[0])
        rows.append([0.5 - c.fidelity, *(0.5 * n)])
        rhs.append(t - c.fidelity)
    x, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
    p = float(x[0])
    if not 0 < p <= 1:
        raise ValueError(f"targets need scrambling probability {p:.4g} outside (0, 1]")
    return Scrambling(p, tuple(float(c) for c in x[1:] / p))
