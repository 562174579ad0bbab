"""Spin-wave diode: EIT write, dark storage and read-out of a weak signal pulse.

The signal is a weak coherent amplitude alpha(t) (units sqrt(photons * Gamma))
coupled to a collective optical mode of cooperativity C = D/2. The ensemble is
reduced to one three-level density matrix driven with probe Rabi frequency
Omega_p = 2 sqrt(kappa) eps alpha(t), kappa = C Gamma, and the extra collective
emission is an additional |e> -> |g> decay at rate kappa. The re-emitted field is
alpha_out = alpha_in - i sqrt(kappa) rho_eg / eps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import LindbladTerm, build_liouvillian, hamiltonian_superop, projector, transition
from .dynamics import TimeDependentLiouvillian, evolve
from .model import (
    EXCITED,
    GROUND,
    STORAGE,
    Direction,
    Helicity,
    RoutingParams,
    _aligned,
    _h_matrix,
    default_lindblad_terms,
    lambda_for,
)
from .tables import write_csv
from .units import gamma_to_ns, ns_to_gamma
from .zeeman import ZeemanScheme

WEAK_SCALE = 1e-3
CONTRAST_FLOOR = 1e-12


@dataclass(frozen=True)
class PulseSequence:
    """Write / dark / read timing in units of 1/Gamma.

    ``control_peak=None`` takes the control Rabi frequency from the routing
    parameters.
    """

    write_duration: float = ns_to_gamma(1000.0)
    dark_time: float = ns_to_gamma(500.0)
    read_duration: float = ns_to_gamma(1000.0)
    control_peak: float | None = None
    edge_smoothing: float = ns_to_gamma(50.0)

    def __post_init__(self):
        for name in ("write_duration", "dark_time", "read_duration", "edge_smoothing"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.control_peak is not None and self.control_peak < 0:
            raise ValueError("control_peak must be nonnegative")
        e = self.edge_smoothing
        if not (e < self.write_duration / 4 and e < self.read_duration / 4 and e < self.dark_time):
            raise ValueError("edge_smoothing must be < write/4, < read/4 and < dark_time")

    @classmethod
    def from_ns(cls, write_ns=1000.0, dark_ns=500.0, read_ns=1000.0, control_peak=None, edge_ns=50.0):
        return cls(ns_to_gamma(write_ns), ns_to_gamma(dark_ns), ns_to_gamma(read_ns),
                   control_peak, ns_to_gamma(edge_ns))

    @property
    def read_start(self):
        return self.write_duration + self.dark_time

    @property
    def total(self):
        return self.read_start + self.read_duration

    def dark_interior(self):
        """Interval where the control is exactly off."""
        h = self.edge_smoothing / 2
        return self.write_duration + h, self.read_start - h


def _ramp(x, width):
    # 0 -> 1 raised cosine over [-width/2, width/2]
    u = np.clip(np.asarray(x, dtype=float) / width + 0.5, 0.0, 1.0)
    return 0.5 - 0.5 * np.cos(np.pi * u)


def control_envelope(seq: PulseSequence, t, peak=None):
    """Two-plateau control Rabi frequency; raised-cosine edges of width
    ``edge_smoothing`` centered on each window boundary."""
    if peak is None:
        peak = 1.0 if seq.control_peak is None else seq.control_peak
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("envelope defined for t >= 0")
    w = seq.edge_smoothing
    on = (_ramp(t, w) - _ramp(t - seq.write_duration, w)
          + _ramp(t - seq.read_start, w) - _ramp(t - seq.total, w))
    out = peak * on
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class SignalWaveform:
    time_grid: np.ndarray
    amplitude: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.time_grid, dtype=float)
        a = np.asarray(self.amplitude, dtype=complex)
        if t.ndim != 1 or t.shape != a.shape or t.size < 2:
            raise ValueError("time grid and amplitude must be equal-length 1-D arrays")
        if np.any(np.diff(t) <= 0):
            raise ValueError("time grid must be strictly increasing")
        object.__setattr__(self, "time_grid", t)
        object.__setattr__(self, "amplitude", a)

    def energy(self, t_min=-math.inf, t_max=math.inf) -> float:
        m = (self.time_grid >= t_min) & (self.time_grid <= t_max)
        if m.sum() < 2:
            return 0.0
        return float(np.trapezoid(np.abs(self.amplitude[m]) ** 2, self.time_grid[m]))

    def __call__(self, t):
        """Linear interpolation, zero outside the grid."""
        re = np.interp(t, self.time_grid, self.amplitude.real, left=0.0, right=0.0)
        im = np.interp(t, self.time_grid, self.amplitude.imag, left=0.0, right=0.0)
        return re + 1j * im

    def peak_time(self) -> float:
        return float(self.time_grid[np.argmax(np.abs(self.amplitude))])


def gaussian_input(seq: PulseSequence, fwhm=ns_to_gamma(300.0), dt=0.05, center=None) -> SignalWaveform:
    """Unit-peak Gaussian, by default centered in the write window, truncated to it."""
    if center is None:
        center = seq.write_duration / 2
    n = int(math.ceil(seq.write_duration / dt))
    t = np.linspace(0.0, seq.write_duration, n + 1)
    sigma = fwhm / (2 * math.sqrt(2 * math.log(2)))
    return SignalWaveform(t, np.exp(-((t - center) ** 2) / (2 * sigma**2)).astype(complex))


@dataclass(frozen=True, eq=False)
class StorageResult:
    """``spin_wave`` holds the stored amplitude rho_sg / eps per sqrt(input energy);
    ``spin_wave_peak`` is the largest stored fraction |.|^2 during the dark time."""

    output: SignalWaveform
    retrieval_efficiency: float
    spin_wave_peak: float
    spin_wave: SignalWaveform
    input_energy: float


_V_CONTROL = 0.5 * (transition(3, STORAGE, EXCITED) + transition(3, EXCITED, STORAGE))
_V_PROBE_RE = 0.5 * (transition(3, EXCITED, GROUND) + transition(3, GROUND, EXCITED))
_V_PROBE_IM = 0.5j * (transition(3, EXCITED, GROUND) - transition(3, GROUND, EXCITED))


def simulate_storage(direction, seq: PulseSequence, params: RoutingParams, scheme: ZeemanScheme | None = None,
                     signal: SignalWaveform | None = None, *, sigma_control=Helicity.PLUS, depth=14.0,
                     dt=0.1, weak_scale=WEAK_SCALE, rtol=1e-8, atol=None) -> StorageResult:
    """Write, store and read ``signal`` in the given propagation direction.

    The counter-propagating configuration sees the non-Hermitian ground-state
    loss and so loses the stored spin wave.
    """
    scheme = scheme or ZeemanScheme()
    if signal is None:
        signal = gaussian_input(seq)
    if signal.time_grid[0] < 0 or signal.time_grid[-1] > seq.write_duration + 1e-9:
        raise ValueError("input must be supported within the write window")
    e_in = signal.energy()
    if not e_in > 0:
        raise ValueError("input energy must be positive")
    if depth < 0:
        raise ValueError("optical depth must be nonnegative")

    q = +1 if _aligned(direction, sigma_control) else -1
    kappa = 0.5 * depth * params.gamma * scheme.coupling_total(q) / scheme.coupling_total(+1)
    peak_amp = float(np.max(np.abs(signal.amplitude)))
    drive_scale = 2.0 * math.sqrt(kappa) * weak_scale / peak_amp
    ctrl = params.omega_c if seq.control_peak is None else seq.control_peak

    lam = lambda_for(direction, sigma_control, params)
    h0 = _h_matrix(0.0, 0.0, params.delta, params.delta_p, lam)
    terms = default_lindblad_terms(params) + [LindbladTerm(transition(3, GROUND, EXCITED), kappa)]
    static = build_liouvillian(h0, terms, recycle=True)
    dyn = [hamiltonian_superop(_V_CONTROL), hamiltonian_superop(_V_PROBE_RE), hamiltonian_superop(_V_PROBE_IM)]

    def coeffs(t):
        a = complex(signal(t)) * drive_scale
        c = control_envelope(seq, t, ctrl) if t >= 0 else 0.0
        return (c, a.real, a.imag)

    gen = TimeDependentLiouvillian(static, dyn, coeffs)
    n = int(math.ceil(seq.total / dt))
    times = np.linspace(0.0, seq.total, n + 1)
    if atol is None:
        atol = 1e-10 * weak_scale**2
    states = evolve(projector(3, GROUND), gen, times, rtol=rtol, atol=atol)

    polar = states[:, EXCITED, GROUND] / weak_scale * peak_amp  # back in input amplitude units
    spin = states[:, STORAGE, GROUND] / weak_scale * peak_amp
    out = signal(times) - 1j * math.sqrt(kappa) * polar
    output = SignalWaveform(times, out)
    read_from = seq.read_start - seq.edge_smoothing / 2
    eff = output.energy(read_from, seq.total) / e_in
    d0, d1 = seq.dark_interior()
    m = (times >= d0) & (times <= d1)
    stored = float(np.max(np.abs(spin[m]) ** 2) / e_in) if m.any() else 0.0
    return StorageResult(output, float(eff), stored, SignalWaveform(times, spin / math.sqrt(e_in)), e_in)


def diode_contrast(forward: StorageResult, backward: StorageResult, floor=CONTRAST_FLOOR) -> float:
    if not forward.retrieval_efficiency > 0:
        raise ValueError("forward retrieval efficiency must be positive")
    return 10.0 * math.log10(forward.retrieval_efficiency / max(backward.retrieval_efficiency, floor))


def waveform_rows(w: SignalWaveform):
    return [(gamma_to_ns(t), a.real, a.imag, abs(a) ** 2) for t, a in zip(w.time_grid, w.amplitude)]


WAVEFORM_HEADER = ("time_ns", "re_amp", "im_amp", "abs2")


def write_waveform_csv(w: SignalWaveform, path):
    return write_csv(path, WAVEFORM_HEADER, waveform_rows(w))
