"""Conversions between laboratory units and the internal Gamma-based units.

Internally every rate and detuning is in units of the excited-state decay
rate Gamma and every time in units of 1/Gamma.
"""
import math

GAMMA_HZ = 2 * math.pi * 6e6  # rad/s
GAMMA_MHZ = 6.0  # Gamma / 2pi in MHz


def ns_to_gamma(t_ns):
    return t_ns * 1e-9 * GAMMA_HZ


def gamma_to_ns(t):
    return t / GAMMA_HZ * 1e9


def mhz_to_gamma(f_mhz):
    """Detuning given as f = Delta/2pi in MHz."""
    return f_mhz / GAMMA_MHZ


def gamma_to_mhz(delta):
    return delta * GAMMA_MHZ
