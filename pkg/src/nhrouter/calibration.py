"""Least-squares calibration of model rates and the qubit-channel imperfections."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources

import numpy as np
from scipy.optimize import least_squares

from .model import Direction, RoutingParams, isolation_db, susceptibility, transmission
from .qubit import NAMED_STATES, DualRailChannel, RailImbalance, Scrambling, fit_scrambling
from .zeeman import ZeemanScheme


@dataclass(frozen=True)
class CalibrationTargets:
    depth: float = 14.0
    t_forward: float = 0.94
    t_backward: float = 0.0265
    far_depth: float = 40.0
    far_isolation_db: float = 20.0
    omega_c_prior: float = 1.0
    prior_weight: float = 1e-2
    # per-qubit figures of merit used for the channel imperfections
    qubit_states: tuple = ("H", "V", "D", "R")
    qubit_fidelities: tuple = (0.92, 0.97, 0.93, 0.94)
    insertion_loss_h_db: float = 0.36
    insertion_loss_v_db: float = 0.18


@dataclass(frozen=True)
class Calibration:
    omega_c: float
    omega_diss: float
    gamma_gs: float
    noise_floor: float
    depth: float = 14.0
    rail_imbalance: RailImbalance = RailImbalance()
    scrambling: Scrambling = Scrambling()
    residuals: tuple = field(default=(), compare=False)

    def routing_params(self, delta=0.0, delta_c=0.0, omega_p=0.01) -> RoutingParams:
        return RoutingParams(delta_p=delta_c + delta, delta_c=delta_c, omega_p=omega_p,
                             omega_c=self.omega_c, omega_diss=self.omega_diss, gamma_gs=self.gamma_gs)

    def to_dict(self):
        return {
            "omega_c": self.omega_c,
            "omega_diss": self.omega_diss,
            "gamma_gs": self.gamma_gs,
            "noise_floor": self.noise_floor,
            "depth": self.depth,
            "rail_imbalance": asdict(self.rail_imbalance),
            "scrambling": {"probability": self.scrambling.probability, "bloch": list(self.scrambling.bloch)},
            "residuals": list(self.residuals),
        }

    @classmethod
    def from_dict(cls, d):
        s = d.get("scrambling", {})
        return cls(
            float(d["omega_c"]), float(d["omega_diss"]), float(d["gamma_gs"]), float(d["noise_floor"]),
            float(d.get("depth", 14.0)),
            RailImbalance(**d.get("rail_imbalance", {})),
            Scrambling(float(s.get("probability", 0.0)), tuple(s.get("bloch", (0.0, 0.0, 0.0)))),
            tuple(d.get("residuals", ())),
        )


def load_default() -> Calibration:
    text = resources.files("nhrouter").joinpath("data/calibration.json").read_text()
    return Calibration.from_dict(json.loads(text))


def model_transmissions(params, scheme, depth, **kw):
    tf = transmission(susceptibility(Direction.FORWARD, scheme, params, **kw), depth)[1]
    tb = transmission(susceptibility(Direction.BACKWARD, scheme, params, **kw), depth)[1]
    return tf, tb


def calibrate(targets: CalibrationTargets = CalibrationTargets(), scheme: ZeemanScheme | None = None,
              start=(1.0, 1.5, 3e-3, 1e-2)) -> Calibration:
    """Fit (Omega_c, Omega, gamma_gs, b) in log space.

    Residuals: log transmission misfits at the reference depth, the isolation
    misfit at the far depth, and a weak pull of Omega_c toward its prior
    (forward transparency alone cannot separate Omega_c from gamma_gs).
    The starting point selects the strong-dissipation branch, where the
    counter-propagating absorption peaks at two-photon resonance.
    """
    scheme = scheme or ZeemanScheme()

    def unpack(y):
        oc, om, g, b = np.exp(y)
        return RoutingParams(omega_c=oc, omega_diss=om, gamma_gs=g), b

    def residuals(y):
        p, b = unpack(y)
        cf = susceptibility(Direction.FORWARD, scheme, p).total.imag
        cb = susceptibility(Direction.BACKWARD, scheme, p).total.imag
        # T = exp(-D Im chi) evaluated in log form for a smooth objective
        r_f = -targets.depth * cf - math.log(targets.t_forward)
        r_b = -targets.depth * cb - math.log(targets.t_backward)
        tf40 = math.exp(-targets.far_depth * cf)
        tb40 = math.exp(-targets.far_depth * cb)
        r_i = (isolation_db(tf40, tb40, b) - targets.far_isolation_db) / 10.0
        r_p = targets.prior_weight * math.log(p.omega_c / targets.omega_c_prior)
        return [r_f, r_b, r_i, r_p]

    sol = least_squares(residuals, np.log(start), method="lm", xtol=1e-14, ftol=1e-14, gtol=1e-14)
    p, b = unpack(sol.x)
    cal = Calibration(float(p.omega_c), float(p.omega_diss), float(p.gamma_gs), float(b), targets.depth,
                      residuals=tuple(float(r) for r in sol.fun))
    return calibrate_channel(cal, targets, scheme)


def calibrate_channel(cal: Calibration, targets: CalibrationTargets = CalibrationTargets(),
                      scheme: ZeemanScheme | None = None) -> Calibration:
    """Rail imbalance from the H/V insertion losses, then the polarization
    scrambling that reproduces the per-state fidelities."""
    scheme = scheme or ZeemanScheme()
    imb = RailImbalance.from_insertion_losses(targets.insertion_loss_h_db, targets.insertion_loss_v_db)
    ch = DualRailChannel.from_model(Direction.FORWARD, scheme, cal.routing_params(), cal.depth, imbalance=imb)
    states = [NAMED_STATES[s] for s in targets.qubit_states]
    scr = fit_scrambling(ch, states, targets.qubit_fidelities)
    return Calibration(cal.omega_c, cal.omega_diss, cal.gamma_gs, cal.noise_floor, cal.depth, imb, scr,
                       cal.residuals)
