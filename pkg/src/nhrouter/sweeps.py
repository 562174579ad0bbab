"""Parameter sweeps behind the command line tables.

Every sweep is a pure function of the resolved configuration. Grid points
are evaluated independently (optionally in worker processes) and emitted in
a fixed order, so the numbers never depend on the worker count.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from pathlib import Path

import numpy as np

from .calibration import Calibration, load_default
from .config import Config
from .errors import ConfigError
from .model import (
    BackwardTerms,
    Direction,
    Helicity,
    RoutingParams,
    insertion_loss_db,
    isolation_db,
    susceptibility,
)
from .qubit import DualRailChannel, apply_channel, encode, fidelity
from .storage import PulseSequence, diode_contrast, gaussian_input, simulate_storage
from .tomography import mle_reconstruct, rho_to_json_obj, simulate_counts
from .units import gamma_to_ns, mhz_to_gamma, ns_to_gamma
from .zeeman import ZeemanScheme


@dataclass(frozen=True)
class Setup:
    params: RoutingParams  # at two-photon resonance
    scheme: ZeemanScheme
    backward: BackwardTerms
    calibration: Calibration
    noise_floor: float


def resolve(cfg: Config) -> Setup:
    if cfg["calibration"] is None:
        cal = load_default()
    else:
        try:
            with open(cfg["calibration"], encoding="utf-8") as f:
                cal = Calibration.from_dict(json.load(f))
        except (OSError, ValueError, KeyError, TypeError) as e:
            raise ConfigError(f"cannot load calibration: {e}", "calibration") from None
    m = cfg["model"]

    def pick(k, fallback):
        return fallback if m[k] is None else m[k]

    try:
        params = RoutingParams(
            delta_p=m["delta_c"], delta_c=m["delta_c"], omega_p=m["omega_p"],
            omega_c=pick("omega_c", cal.omega_c), omega_diss=pick("omega_diss", cal.omega_diss),
            gamma_gs=pick("gamma_gs", cal.gamma_gs),
        )
        pops = None if m["populations"] is None else tuple(m["populations"])
        scheme = ZeemanScheme(m["f_g"], m["f_e"], pops)
    except ValueError as e:
        raise ConfigError(str(e), "model") from None
    b = cal.noise_floor if cfg["noise_floor"] == "calibrated" else cfg["noise_floor"]
    bt = BackwardTerms(m["count_cycling_twice"], m["coherent_backward_sum"])
    return Setup(params, scheme, bt, cal, float(b))


def pmap(fn, items, workers=1):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    chunk = max(1, math.ceil(len(items) / (4 * workers)))
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items, chunksize=chunk))


def delta_axis(cfg: Config):
    """(values in the configured unit, values in units of Gamma)."""
    lo, hi, n = cfg["delta_range"]
    vals = np.linspace(lo, hi, n)
    if n == 1:
        vals = np.array([lo])
    gam = mhz_to_gamma(vals) if cfg["delta_unit"] == "MHz" else vals
    return vals, gam


def depth_axis(cfg: Config):
    lo, hi, n = cfg["depth_range"]
    return np.array([lo]) if n == 1 else np.linspace(lo, hi, n)


def _chi(setup: Setup, direction, sigma, delta):
    p = setup.params.at_two_photon_detuning(delta)
    return susceptibility(direction, setup.scheme, p, sigma, setup.backward).total


def _chi_point(args, setup):
    direction, sigma, delta = args
    return _chi(setup, Direction(direction), Helicity(sigma), float(delta))


def _chis(setup, keys, workers):
    return pmap(partial(_chi_point, setup=setup), keys, workers)


def _t(chi, depth):
    return math.exp(-depth * chi.imag)


def run_spectrum(cfg: Config, workers=1):
    setup = resolve(cfg)
    vals, gam = delta_axis(cfg)
    sigma = cfg["helicity"]
    keys = [(d, sigma, x) for x in gam for d in ("forward", "backward")]
    chis = _chis(setup, keys, workers)
    depth = cfg["depth"]
    rows = [(v, _t(chis[2 * i], depth), _t(chis[2 * i + 1], depth)) for i, v in enumerate(vals)]
    return ("delta", "T_forward", "T_backward"), rows


def run_map(cfg: Config, workers=1):
    if cfg["delta_range"][2] < 2 or cfg["depth_range"][2] < 2:
        raise ConfigError("map needs at least 2 steps on both axes", "delta_range")
    setup = resolve(cfg)
    vals, gam = delta_axis(cfg)
    depths = depth_axis(cfg)
    sigma = cfg["helicity"]
    out = {}
    for d in cfg["directions"]:
        chis = _chis(setup, [(d, sigma, x) for x in gam], workers)
        out[d] = [(dep, v, _t(c, dep)) for dep in depths for v, c in zip(vals, chis)]
    return ("D", "delta", "T"), out


def run_isolation_vs_depth(cfg: Config, workers=1):
    setup = resolve(cfg)
    sigma = cfg["helicity"]
    cf, cb = _chis(setup, [("forward", sigma, 0.0), ("backward", sigma, 0.0)], workers)
    rows = [(dep, isolation_db(_t(cf, dep), _t(cb, dep), setup.noise_floor)) for dep in depth_axis(cfg)]
    return ("D", "isolation_db"), rows


def _channel(setup: Setup, direction, sigma, depth, delta=0.0, scrambled=True):
    cal = setup.calibration
    return DualRailChannel.from_model(
        direction, setup.scheme, setup.params.at_two_photon_detuning(delta), depth, sigma,
        imbalance=cal.rail_imbalance, scrambling=cal.scrambling if scrambled else type(cal.scrambling)(),
        backward=setup.backward,
    )


def _flip_point(args, setup, depth, states):
    sigma, direction = args
    ch = _channel(setup, Direction(direction), Helicity(sigma), depth)
    return [apply_channel(encode(s.theta, s.phi), ch).success_prob for s in states]


def run_helicity_flip(cfg: Config, workers=1):
    setup = resolve(cfg)
    states = cfg.qubit_states
    if not states:
        raise ConfigError("need at least one qubit state", "qubit_states")
    keys = [(sg, d) for sg in (1, -1) for d in ("forward", "backward")]
    ts = pmap(partial(_flip_point, setup=setup, depth=cfg["depth"], states=states), keys, workers)
    rows = [(sg, d, s.label, t) for (sg, d), tt in zip(keys, ts) for s, t in zip(states, tt)]
    return ("sigma", "direction", "state", "T"), rows


def _qubit_point(args, setup, depth, shots, seed, sigma):
    i, s = args
    q = encode(s.theta, s.phi)
    fw = apply_channel(q, _channel(setup, Direction.FORWARD, sigma, depth))
    bw = apply_channel(q, _channel(setup, Direction.BACKWARD, sigma, depth))
    entry = {
        "label": s.label,
        "theta": s.theta,
        "phi": s.phi,
        "T_forward": fw.success_prob,
        "T_backward": bw.success_prob,
        "isolation_db": isolation_db(fw.success_prob, bw.success_prob),
        "insertion_loss_db": insertion_loss_db(fw.success_prob),
        "fidelity_channel": fw.fidelity,
        "rho_channel": rho_to_json_obj(fw.rho_out),
    }
    if shots > 0:
        rec = mle_reconstruct(simulate_counts(fw.rho_out, shots, [seed, i]))
        entry["rho_hat"] = rho_to_json_obj(rec.rho_hat)
        entry["fidelity"] = fidelity(rec.rho_hat, q)
        entry["converged"] = rec.converged
    else:
        entry["fidelity"] = fw.fidelity
    return entry


def run_qubit_report(cfg: Config, workers=1):
    setup = resolve(cfg)
    states = cfg.qubit_states
    if not states:
        raise ConfigError("need at least one qubit state", "qubit_states")
    fn = partial(_qubit_point, setup=setup, depth=cfg["depth"], shots=cfg["shots"], seed=cfg["seed"],
                 sigma=Helicity(cfg["helicity"]))
    entries = pmap(fn, list(enumerate(states)), workers)
    header = ("state", "T_forward", "T_backward", "isolation_db", "insertion_loss_db", "fidelity")
    rows = [(e["label"], e["T_forward"], e["T_backward"], e["isolation_db"], e["insertion_loss_db"],
             e["fidelity"]) for e in entries]
    report = {"shots": cfg["shots"], "seed": cfg["seed"], "depth": cfg["depth"], "states": entries}
    return header, rows, report


def pulse_sequence(cfg: Config) -> PulseSequence:
    s = cfg["storage"]
    try:
        return PulseSequence.from_ns(s["write_ns"], s["dark_ns"], s["read_ns"], s["control_peak"], s["edge_ns"])
    except ValueError as e:
        raise ConfigError(str(e), "storage") from None


def _storage_point(direction, setup, seq, signal, depth, dt, sigma):
    return simulate_storage(Direction(direction), seq, setup.params, setup.scheme, signal,
                            sigma_control=sigma, depth=depth, dt=dt)


def _read_peak(res, seq):
    t = res.output.time_grid
    m = t >= seq.read_start - seq.edge_smoothing / 2
    return float(t[m][np.argmax(np.abs(res.output.amplitude[m]))])


def run_storage(cfg: Config, workers=1):
    setup = resolve(cfg)
    seq = pulse_sequence(cfg)
    signal = gaussian_input(seq, ns_to_gamma(cfg["storage"]["fwhm_ns"]))
    fn = partial(_storage_point, setup=setup, seq=seq, signal=signal, depth=cfg["depth"],
                 dt=cfg["storage"]["dt"], sigma=Helicity(cfg["helicity"]))
    fw, bw = pmap(fn, ["forward", "backward"], workers)
    d0, d1 = seq.dark_interior()
    a0, a1 = abs(complex(fw.spin_wave(d0))), abs(complex(fw.spin_wave(d1)))
    summary = {
        "retrieval_efficiency_forward": fw.retrieval_efficiency,
        "retrieval_efficiency_backward": bw.retrieval_efficiency,
        "diode_contrast_db": diode_contrast(fw, bw),
        "spin_wave_peak_forward": fw.spin_wave_peak,
        "spin_wave_peak_backward": bw.spin_wave_peak,
        "dark_decay_ratio": a1 / a0 if a0 > 0 else 0.0,
        "dark_decay_expected": math.exp(-setup.params.gamma_gs * (d1 - d0)),
        "retrieved_peak_time_ns_forward": gamma_to_ns(_read_peak(fw, seq)),
    }
    return signal, fw, bw, summary


def write_outputs_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
